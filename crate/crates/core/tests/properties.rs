mod common;

use std::collections::BTreeSet;

use common::*;
use iot_footprint::fleet::{fleet_waste, FleetStats};
use iot_footprint::frame::*;
use iot_footprint::lca::*;
use iot_footprint::power::*;
use iot_footprint::report::{emit, records, run_scenario, Format};
use iot_footprint::scenario::Scenario;
use iot_footprint::Execution;
use proptest::prelude::*;

fn fig() -> FrameGrid {
    build_grid(FrameConfig::default()).unwrap()
}

fn signal() -> impl Strategy<Value = SignalType> {
    prop_oneof![
        6 => Just(SignalType::Free),
        1 => Just(SignalType::Nrs),
        1 => Just(SignalType::Npss),
        1 => Just(SignalType::Nsss),
        1 => Just(SignalType::Npbch),
    ]
}

fn random_grid() -> impl Strategy<Value = FrameGrid> {
    proptest::collection::vec(signal(), 280)
        .prop_map(|cells| FrameGrid::from_cells(FrameConfig::default(), cells).unwrap())
}

fn profile() -> impl Strategy<Value = PowerProfile> {
    (
        0.1f64..10.0,
        0.0f64..5.0,
        0.0f64..5.0,
        0.0f64..6.0,
        0.0f64..3.0,
    )
        .prop_map(|(sleep, di, da, tt, ms)| PowerProfile {
            p_active: sleep + di + da,
            p_idle_awake: sleep + di,
            p_sleep: sleep,
            t_transition: tt * SYMBOL_DURATION,
            min_sleep: ms * SYMBOL_DURATION,
        })
}

#[test]
fn grid_matches_reference_drawing_for_several_hyperperiods() {
    for frames in [2, 4, 6, 10] {
        let grid = build_grid(FrameConfig::with_frames(frames)).unwrap();
        assert_eq!(
            grid.cells(),
            drawn_cells(frames).as_slice(),
            "frames = {frames}"
        );
        let k = frames / 2;
        assert_eq!(grid.count(SignalType::Npbch), 22 * k);
        assert_eq!(grid.count(SignalType::Npss), 22 * k);
        assert_eq!(grid.count(SignalType::Nsss), 11 * k);
        assert_eq!(grid.count(SignalType::Nrs), 60 * k);
        assert_eq!(grid.count(SignalType::Free), 165 * k);
    }
}

#[test]
fn shares_are_periodic() {
    let two = occupancy_shares(&fig());
    let four = occupancy_shares(&build_grid(FrameConfig::with_frames(4)).unwrap());
    for s in SignalType::ALL {
        assert!((two.share(s) - four.share(s)).abs() < 1e-15);
    }
}

#[test]
fn free_runs_of_reference_grid() {
    let cells = drawn_cells(2);
    let longest = (0..280)
        .filter(|&i| cells[i] == SignalType::Free)
        .map(|i| run_around(&cells, i).1)
        .max()
        .unwrap();
    assert_eq!(longest, 5);
    let iv = free_intervals(&fig());
    assert_eq!(iv.iter().map(|i| i.length).max(), Some(5));
    assert!((iv.iter().map(|i| i.duration).fold(0.0, f64::max) - 5.0e-3 / 14.0).abs() < 1e-15);
    assert_eq!(iv.iter().map(|i| i.length).sum::<usize>(), 165);
}

#[test]
fn walk_oracle_matches_on_reference_grid() {
    let g = fig();
    for ratio in [1.0, 1.3, 4.0, 50.0] {
        let p = CalibrationTemplate::default().profile(ratio);
        let sim = simulate_idle(&g, &p).unwrap().energy_per_hyperperiod;
        assert!(rel_close(sim, walk_energy(&g, &p), 1e-9), "ratio {ratio}");
    }
}

#[test]
fn table_ordering_at_one_km() {
    let totals: Vec<f64> = reference_plans()
        .iter()
        .map(|p| provisioning_totals(p).unwrap().grand_total)
        .collect();
    // E-car, Solar, UAV wireless, UAV contacts
    assert!(totals[1] < totals[2] && totals[2] < totals[3] && totals[3] < totals[0]);
}

proptest! {
    #[test]
    fn shares_normalize(grid in random_grid()) {
        let shares = occupancy_shares(&grid);
        let sum: f64 = shares.iter().map(|(_, v)| v).sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(shares.iter().all(|(_, v)| v >= 0.0));
    }

    #[test]
    fn free_intervals_partition_free_cells(grid in random_grid()) {
        let cells = grid.cells();
        let n = cells.len();
        let intervals = free_intervals(&grid);
        let mut covered = vec![0u8; n];
        for iv in &intervals {
            prop_assert!(iv.length >= 1);
            for k in 0..iv.length {
                let i = (iv.start + k) % n;
                prop_assert_eq!(cells[i], SignalType::Free);
                covered[i] += 1;
            }
            if iv.length < n {
                prop_assert!(!cells[(iv.start + n - 1) % n].is_free());
                prop_assert!(!cells[(iv.start + iv.length) % n].is_free());
            }
        }
        for i in 0..n {
            prop_assert_eq!(covered[i], u8::from(cells[i].is_free()));
        }
        let oracle: BTreeSet<(usize, usize)> = (0..n)
            .filter(|&i| cells[i].is_free())
            .map(|i| run_around(cells, i))
            .collect();
        let got: BTreeSet<(usize, usize)> = intervals.iter().map(|iv| (iv.start, iv.length)).collect();
        prop_assert_eq!(got, oracle);
    }

    #[test]
    fn simulation_matches_symbol_walk(grid in random_grid(), p in profile()) {
        let sim = simulate_idle(&grid, &p).unwrap();
        let walked = walk_energy(&grid, &p);
        prop_assert!(rel_close(sim.energy_per_hyperperiod, walked, 1e-9), "{} vs {}", sim.energy_per_hyperperiod, walked);
        let total = sim.sleep_fraction + sim.transmit_fraction + sim.awake_idle_fraction;
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(rel_close(sim.avg_power, sim.energy_per_hyperperiod / grid.config().duration(), 1e-12));
        let shares = occupancy_shares(&grid);
        prop_assert!((sim.transmit_fraction - shares.signalling()).abs() < 1e-12);
    }

    #[test]
    fn reference_grid_simulation_matches_walk(p in profile()) {
        let g = fig();
        let sim = simulate_idle(&g, &p).unwrap().energy_per_hyperperiod;
        prop_assert!(rel_close(sim, walk_energy(&g, &p), 1e-9));
    }

    #[test]
    fn penalty_scale_invariant(p in profile(), k in 0.01f64..100.0) {
        let g = fig();
        let a = idle_penalty(&g, &p).unwrap();
        let b = idle_penalty(&g, &p.scaled(k)).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        let ea = simulate_idle(&g, &p).unwrap().energy_per_hyperperiod;
        let eb = simulate_idle(&g, &p.scaled(k)).unwrap().energy_per_hyperperiod;
        prop_assert!(rel_close(eb, k * ea, 1e-12));
    }

    #[test]
    fn penalty_non_decreasing_in_active_power(p in profile(), extra in 0.0f64..10.0) {
        let g = fig();
        let hotter = PowerProfile { p_active: p.p_active + extra, ..p };
        prop_assert!(idle_penalty(&g, &hotter).unwrap() >= idle_penalty(&g, &p).unwrap() - 1e-12);
    }

    #[test]
    fn penalty_non_increasing_in_sleep_power(p in profile(), frac in 0.0f64..1.0) {
        let g = fig();
        let warmer = PowerProfile { p_sleep: p.p_sleep + frac * (p.p_idle_awake - p.p_sleep), ..p };
        prop_assert!(idle_penalty(&g, &warmer).unwrap() <= idle_penalty(&g, &p).unwrap() + 1e-12);
    }

    // Energy with signalling never drops as transitions get longer.
    #[test]
    fn energy_non_decreasing_in_transition(p in profile(), extra in 0.0f64..3.0) {
        let g = fig();
        let slower = PowerProfile { t_transition: p.t_transition + extra * SYMBOL_DURATION, ..p };
        let a = simulate_idle(&g, &p).unwrap().energy_per_hyperperiod;
        let b = simulate_idle(&g, &slower).unwrap().energy_per_hyperperiod;
        prop_assert!(b >= a * (1.0 - 1e-12));
    }

    // The penalty is only monotone in the transition time while some gaps
    // still admit sleep and the power ratio is moderate; past that the empty
    // baseline grows faster than the signalling grid.
    #[test]
    fn penalty_non_decreasing_in_transition(ratio in 1.0f64..10.0, t0 in 0.0f64..4.0, dt in 0.0f64..4.0) {
        let g = fig();
        let t1 = (t0 + dt).min(4.0);
        let base = CalibrationTemplate::default().profile(ratio);
        let a = idle_penalty(&g, &PowerProfile { t_transition: t0 * SYMBOL_DURATION, ..base }).unwrap();
        let b = idle_penalty(&g, &PowerProfile { t_transition: t1 * SYMBOL_DURATION, ..base }).unwrap();
        prop_assert!(b >= a - 1e-12, "t {t0} -> {t1}: {a} -> {b}");
    }

    #[test]
    fn calibration_round_trip(target in 1e-4f64..=0.5) {
        let g = fig();
        let c = calibrate_profile(&g, &CalibrationTemplate::default(), target).unwrap();
        prop_assert!((idle_penalty(&g, &c.profile).unwrap() - target).abs() < 1e-4);
        prop_assert!(c.ratio >= 1.0 && c.ratio <= 1e6);
    }

    #[test]
    fn break_even_consistency(g in 0.0f64..50.0, rate in 1e-3f64..1.0, n in 1.0f64..100.0) {
        let mode = TransportMode::per_km("m", rate);
        let d = break_even_distance(g, &mode, n).unwrap();
        let back = manual_service_gwp(&mode, d, n).unwrap();
        prop_assert!(rel_close(back, g, 1e-9) || (g == 0.0 && back == 0.0));
    }

    #[test]
    fn manual_service_linear(rate in 0.0f64..1.0, d in 0.0f64..100.0, n in 0.0f64..50.0, k in 0.0f64..10.0) {
        let mode = TransportMode::per_km("m", rate);
        let base = manual_service_gwp(&mode, d, n).unwrap();
        prop_assert!(rel_close(manual_service_gwp(&mode, k * d, n).unwrap(), k * base, 1e-9) || base == 0.0);
        prop_assert!(rel_close(manual_service_gwp(&mode, d, k * n).unwrap(), k * base, 1e-9) || base == 0.0);
    }

    #[test]
    fn wpt_homogeneous(grid_i in 0.0f64..1e-3, bat in 1e-4f64..1.0, k in 1e-3f64..1e3) {
        let a = wpt_breakeven_efficiency(grid_i, bat).unwrap();
        let b = wpt_breakeven_efficiency(k * grid_i, k * bat).unwrap();
        prop_assert!(rel_close(a, b, 1e-12) || a == 0.0);
    }

    #[test]
    fn totals_decompose(idx in 0usize..4, km in 0.0f64..50.0, horizon in 1.0f64..30.0) {
        let mut plan = reference_plans()[idx].at_distance(km).unwrap();
        plan.horizon = horizon;
        let t = provisioning_totals(&plan).unwrap();
        prop_assert!((t.grand_total - (t.overhead + t.battery_total + t.service_total)).abs() < 1e-9);
        if plan.method == ProvisioningMethod::SolarPanel {
            let far = provisioning_totals(&plan.at_distance(km + 7.0).unwrap()).unwrap();
            prop_assert_eq!(far, t);
        }
    }

    #[test]
    fn fleet_linear(registered in 0u64..1_000_000, online_frac in 0.0f64..=1.0, gwp in 0.0f64..100.0) {
        let online = (registered as f64 * online_frac) as u64;
        let w = fleet_waste(&FleetStats { registered, online, gwp_per_gateway: gwp }).unwrap();
        prop_assert_eq!(w.offline_count, registered - online);
        prop_assert!((0.0..=1.0).contains(&w.offline_fraction));
        let w2 = fleet_waste(&FleetStats { registered, online, gwp_per_gateway: 2.0 * gwp }).unwrap();
        prop_assert!(rel_close(w2.stranded_gwp, 2.0 * w.stranded_gwp, 1e-12) || w.stranded_gwp == 0.0);
    }
}

#[test]
fn csv_values_round_trip_exactly() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/full_run.json"
    ))
    .unwrap();
    let loaded = Scenario::parse(&text).unwrap();
    let report = run_scenario(&loaded, Execution::Parallel).unwrap();
    let csv = emit(&report, Format::Csv).unwrap();
    let recs = records(&report);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), recs.len());
    for (line, (_, _, _, value)) in rows.iter().zip(&recs) {
        let parsed: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(parsed.to_bits(), value.to_bits(), "{line}");
    }
}

#[test]
fn report_is_independent_of_execution_strategy() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/full_run.json"
    ))
    .unwrap();
    let loaded = Scenario::parse(&text).unwrap();
    let seq = emit(
        &run_scenario(&loaded, Execution::Sequential).unwrap(),
        Format::Csv,
    )
    .unwrap();
    let par = emit(
        &run_scenario(&loaded, Execution::Parallel).unwrap(),
        Format::Csv,
    )
    .unwrap();
    assert_eq!(seq, par);
}
