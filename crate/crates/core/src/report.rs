//! Running a scenario through every model and emitting the results.
//!
//! CSV output is long format (`section,item,metric,value`), sections in
//! name order, numbers in shortest round-trip decimal form. Identical input
//! therefore yields identical bytes regardless of execution strategy.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fleet::{fleet_waste, FleetWaste};
use crate::frame::{
    build_grid, free_intervals, occupancy_shares, FrameConfig, OccupancyShares,
    REFERENCE_SHARE_PERCENT,
};
use crate::lca::{
    annual_standby_energy, break_even_distance, manual_service_gwp, standby_offset,
    wpt_breakeven_efficiency, DeviceProfile, TotalsRow, TransportRate, DAYS_PER_YEAR,
    HOURS_PER_DAY,
};
use crate::power::{
    calibrate_profile, idle_penalty, simulate_idle, CalibrationTemplate, PowerProfile,
    SleepSimResult,
};
use crate::scenario::{
    BreakEvenSection, LightingSection, LoadedScenario, PowerSection, WptSection,
};
use crate::sweep::{linspace, servicing_grid};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Ascii,
    PlotData,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "ascii" => Ok(Format::Ascii),
            "plotdata" => Ok(Format::PlotData),
            other => Err(Error::Format(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameReport {
    pub config: FrameConfig,
    pub shares: OccupancyShares,
    pub free_intervals: usize,
    pub longest_free_run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerReport {
    pub profile: PowerProfile,
    /// Present when the profile came from calibration.
    pub calibrated_ratio: Option<f64>,
    pub sim: SleepSimResult,
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakEvenRow {
    pub mode: String,
    pub gwp_per_km: f64,
    pub interventions: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakEvenReport {
    pub device_gwp: f64,
    pub max_distance: f64,
    pub rows: Vec<BreakEvenRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServicingRow {
    pub plan: String,
    pub distance: Option<f64>,
    pub totals: TotalsRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WptReport {
    pub grid_intensity: f64,
    pub battery_gwp_per_wh: f64,
    pub breakeven_efficiency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LightingReport {
    pub standby_annual_kwh: f64,
    pub offset_hours_per_day: f64,
    pub hub_annual_kwh: Option<f64>,
    /// Offset including the hub's draw, spread evenly over the day.
    pub offset_hours_with_hub: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub input_sha256: String,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub breakeven: Option<BreakEvenReport>,
    pub device: Option<DeviceProfile>,
    pub fleet: Option<FleetWaste>,
    pub frame: Option<FrameReport>,
    pub lighting: Option<LightingReport>,
    pub power: Option<PowerReport>,
    pub servicing: Vec<ServicingRow>,
    pub wpt: Option<WptReport>,
    pub provenance: Provenance,
}

impl ScenarioReport {
    pub fn empty() -> Self {
        ScenarioReport {
            breakeven: None,
            device: None,
            fleet: None,
            frame: None,
            lighting: None,
            power: None,
            servicing: Vec::new(),
            wpt: None,
            provenance: Provenance {
                input_sha256: String::new(),
                tool_version: TOOL_VERSION.to_string(),
            },
        }
    }
}

pub fn frame_report(config: FrameConfig) -> Result<FrameReport> {
    let grid = build_grid(config)?;
    let intervals = free_intervals(&grid);
    Ok(FrameReport {
        config,
        shares: occupancy_shares(&grid),
        free_intervals: intervals.len(),
        longest_free_run: intervals.iter().map(|i| i.length).max().unwrap_or(0),
    })
}

pub fn power_report(config: FrameConfig, section: &PowerSection) -> Result<PowerReport> {
    let grid = build_grid(config)?;
    let (profile, calibrated_ratio) = match (section.profile, section.target_penalty) {
        (Some(p), _) => (p, None),
        (None, Some(target)) => {
            let template = section
                .template
                .unwrap_or_else(|| CalibrationTemplate::for_config(&config));
            let cal = calibrate_profile(&grid, &template, target)?;
            (cal.profile, Some(cal.ratio))
        }
        (None, None) => return Err(Error::validation("power", "no profile or target_penalty")),
    };
    Ok(PowerReport {
        profile,
        calibrated_ratio,
        sim: simulate_idle(&grid, &profile)?,
        penalty: idle_penalty(&grid, &profile)?,
    })
}

pub fn breakeven_report(
    device: &DeviceProfile,
    transports: &[crate::lca::TransportMode],
    section: &BreakEvenSection,
) -> Result<BreakEvenReport> {
    let interventions = device.design_lifetime * section.interventions_per_year;
    let mut rows = Vec::new();
    for mode in transports {
        if let TransportRate::PerKm(rate) = mode.rate()? {
            rows.push(BreakEvenRow {
                mode: mode.name.clone(),
                gwp_per_km: rate,
                interventions,
                distance: break_even_distance(device.production_gwp, mode, interventions)?,
            });
        }
    }
    Ok(BreakEvenReport {
        device_gwp: device.production_gwp,
        max_distance: section.max_distance,
        rows,
    })
}

pub fn wpt_report(section: &WptSection) -> Result<WptReport> {
    if section.battery_capacity.is_nan() || section.battery_capacity <= 0.0 {
        return Err(Error::validation("wpt.battery_capacity", "must be > 0"));
    }
    let per_wh = section.battery_gwp / section.battery_capacity;
    Ok(WptReport {
        grid_intensity: section.grid_intensity,
        battery_gwp_per_wh: per_wh,
        breakeven_efficiency: wpt_breakeven_efficiency(section.grid_intensity, per_wh)?,
    })
}

pub fn lighting_report(section: &LightingSection) -> Result<LightingReport> {
    let offset = standby_offset(section.standby_power, section.lamp_power)?;
    let with_hub = match section.hub_annual_energy {
        Some(kwh) => {
            let hub_w = kwh * 1000.0 / (DAYS_PER_YEAR * HOURS_PER_DAY);
            Some(standby_offset(
                section.standby_power + hub_w,
                section.lamp_power,
            )?)
        }
        None => None,
    };
    Ok(LightingReport {
        standby_annual_kwh: annual_standby_energy(section.standby_power)?,
        offset_hours_per_day: offset,
        hub_annual_kwh: section.hub_annual_energy,
        offset_hours_with_hub: with_hub,
    })
}

/// Evaluates every present section. Independent sections run concurrently
/// under `Execution::Parallel`; the result does not depend on `exec`.
pub fn run_scenario(loaded: &LoadedScenario, exec: Execution) -> Result<ScenarioReport> {
    let s = &loaded.scenario;
    let frame_config = s.frame.unwrap_or_default();

    let signalling = || -> Result<(Option<FrameReport>, Option<PowerReport>)> {
        let (frame, power) = exec.join(
            || s.frame.map(frame_report).transpose(),
            || {
                s.power
                    .as_ref()
                    .map(|p| power_report(frame_config, p))
                    .transpose()
            },
        );
        Ok((frame?, power?))
    };

    let lifecycle = || -> Result<ScenarioReport> {
        let mut r = ScenarioReport::empty();
        r.device = s.device.clone();
        if let Some(device) = &s.device {
            let section = s.breakeven.clone().unwrap_or_default();
            if s.breakeven.is_some() || !s.transports.is_empty() {
                r.breakeven = Some(breakeven_report(device, &s.transports, &section)?);
            }
        }
        if s.servicing_distances.is_empty() {
            for plan in &loaded.plans {
                r.servicing.push(ServicingRow {
                    plan: plan.name.clone(),
                    distance: plan.visit_distance,
                    totals: crate::lca::provisioning_totals(plan)?,
                });
            }
        } else {
            for row in servicing_grid(&loaded.plans, &s.servicing_distances, exec) {
                let (plan, totals) = row?;
                r.servicing.push(ServicingRow {
                    plan: plan.name.clone(),
                    distance: plan.visit_distance,
                    totals,
                });
            }
        }
        r.fleet = s.fleet.as_ref().map(fleet_waste).transpose()?;
        r.wpt = s.wpt.as_ref().map(wpt_report).transpose()?;
        r.lighting = s.lighting.as_ref().map(lighting_report).transpose()?;
        Ok(r)
    };

    let (signalling, lifecycle) = exec.join(signalling, lifecycle);
    let (frame, power) = signalling?;
    let mut report = lifecycle?;
    report.frame = frame;
    report.power = power;
    report.provenance.input_sha256 = loaded.sha256.clone();
    Ok(report)
}

/// Flat `(section, item, metric, value)` records in emission order.
pub fn records(report: &ScenarioReport) -> Vec<(&'static str, String, &'static str, f64)> {
    let mut out = Vec::new();
    let mut push =
        |section, item: &str, metric, value| out.push((section, item.to_string(), metric, value));

    if let Some(b) = &report.breakeven {
        push("breakeven", "device", "gwp_kgco2eq", b.device_gwp);
        for row in &b.rows {
            push("breakeven", &row.mode, "gwp_per_km", row.gwp_per_km);
            push("breakeven", &row.mode, "interventions", row.interventions);
            push("breakeven", &row.mode, "distance_km", row.distance);
        }
    }
    if let Some(d) = &report.device {
        push("device", &d.name, "production_gwp", d.production_gwp);
        if let Some(parts) = &d.component_breakdown {
            for (name, v) in parts {
                push(
                    "device",
                    &format!("{}/{name}", d.name),
                    "production_gwp",
                    *v,
                );
            }
        }
        if let Some(w) = d.water_use {
            push("device", &d.name, "water_use_l", w);
        }
        push("device", &d.name, "daily_energy_j", d.daily_energy);
        push("device", &d.name, "design_lifetime_y", d.design_lifetime);
    }
    if let Some(f) = &report.fleet {
        push("fleet", "gateways", "offline_count", f.offline_count as f64);
        push("fleet", "gateways", "offline_fraction", f.offline_fraction);
        push("fleet", "gateways", "stranded_kgco2eq", f.stranded_gwp);
    }
    if let Some(f) = &report.frame {
        for (signal, share) in f.shares.iter() {
            push("frame", signal.token(), "share", share);
        }
        for (signal, pct) in REFERENCE_SHARE_PERCENT {
            push(
                "frame",
                signal.token(),
                "delta_vs_pie_pp",
                f.shares.share(signal) * 100.0 - pct,
            );
        }
        push("frame", "grid", "signalling_share", f.shares.signalling());
        push("frame", "grid", "free_intervals", f.free_intervals as f64);
        push(
            "frame",
            "grid",
            "longest_free_run_symbols",
            f.longest_free_run as f64,
        );
    }
    if let Some(l) = &report.lighting {
        push("lighting", "standby", "annual_kwh", l.standby_annual_kwh);
        push(
            "lighting",
            "standby",
            "offset_hours_per_day",
            l.offset_hours_per_day,
        );
        if let (Some(kwh), Some(h)) = (l.hub_annual_kwh, l.offset_hours_with_hub) {
            push(
                "lighting",
                "with_hub",
                "annual_kwh",
                l.standby_annual_kwh + kwh,
            );
            push("lighting", "with_hub", "offset_hours_per_day", h);
        }
    }
    if let Some(p) = &report.power {
        push("power", "profile", "p_active", p.profile.p_active);
        push("power", "profile", "p_idle_awake", p.profile.p_idle_awake);
        push("power", "profile", "p_sleep", p.profile.p_sleep);
        push("power", "profile", "t_transition", p.profile.t_transition);
        push("power", "profile", "min_sleep", p.profile.min_sleep);
        if let Some(r) = p.calibrated_ratio {
            push("power", "calibration", "active_sleep_ratio", r);
        }
        push("power", "idle", "energy_j", p.sim.energy_per_hyperperiod);
        push("power", "idle", "avg_power_w", p.sim.avg_power);
        push("power", "idle", "sleep_frac", p.sim.sleep_fraction);
        push("power", "idle", "tx_frac", p.sim.transmit_fraction);
        push("power", "idle", "idle_frac", p.sim.awake_idle_fraction);
        push("power", "idle", "penalty", p.penalty);
    }
    for row in &report.servicing {
        let item = match row.distance {
            Some(d) => format!("{}@{d}km", row.plan),
            None => row.plan.clone(),
        };
        let t = &row.totals;
        push("servicing", &item, "overhead", t.overhead);
        push("servicing", &item, "battery_total", t.battery_total);
        push("servicing", &item, "service_total", t.service_total);
        push("servicing", &item, "n_visits", t.n_visits);
        push("servicing", &item, "grand_total", t.grand_total);
    }
    if let Some(w) = &report.wpt {
        push(
            "wpt",
            "threshold",
            "grid_intensity_kg_per_wh",
            w.grid_intensity,
        );
        push(
            "wpt",
            "threshold",
            "battery_gwp_per_wh",
            w.battery_gwp_per_wh,
        );
        push(
            "wpt",
            "threshold",
            "breakeven_efficiency",
            w.breakeven_efficiency,
        );
    }
    out
}

/// `(series, x, y)` points of the servicing-distance comparison: a flat line
/// for the device and one line per ground transport mode.
pub fn plot_points(report: &ScenarioReport) -> Result<Vec<(String, f64, f64)>> {
    let Some(b) = &report.breakeven else {
        return Ok(Vec::new());
    };
    let xs = linspace(
        0.0,
        b.max_distance,
        b.max_distance.ceil().max(1.0) as usize + 1,
    );
    let mut out: Vec<_> = xs
        .iter()
        .map(|&x| ("device".to_string(), x, b.device_gwp))
        .collect();
    for row in &b.rows {
        let mode = crate::lca::TransportMode::per_km(&row.mode, row.gwp_per_km);
        for &x in &xs {
            out.push((
                row.mode.clone(),
                x,
                manual_service_gwp(&mode, x, row.interventions)?,
            ));
        }
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit(report: &ScenarioReport, format: Format) -> Result<String> {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("section,item,metric,value\n");
            for (section, item, metric, value) in records(report) {
                let _ = writeln!(out, "{section},{},{metric},{value}", csv_field(&item));
            }
        }
        Format::PlotData => {
            out.push_str("series,x,y\n");
            for (series, x, y) in plot_points(report)? {
                let _ = writeln!(out, "{},{x},{y}", csv_field(&series));
            }
        }
        Format::Ascii => out = ascii(report),
    }
    Ok(out)
}

fn ascii(report: &ScenarioReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", report.provenance.tool_version);
    if !report.provenance.input_sha256.is_empty() {
        let _ = writeln!(out, "input sha256 {}", report.provenance.input_sha256);
    }
    let mut current = "";
    for (section, item, metric, value) in records(report) {
        if section != current {
            let _ = writeln!(out, "\n[{section}]");
            current = section;
        }
        let _ = writeln!(out, "  {item:<40} {metric:<26} {value:>16.6}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    #[test]
    fn format_tokens() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert_eq!("plotdata".parse::<Format>().unwrap(), Format::PlotData);
        assert_eq!("xml".parse::<Format>(), Err(Error::Format("xml".into())));
    }

    #[test]
    fn empty_scenario_gives_header_only_csv() {
        let loaded = Scenario::parse("{}").unwrap();
        let report = run_scenario(&loaded, Execution::Sequential).unwrap();
        assert_eq!(
            emit(&report, Format::Csv).unwrap(),
            "section,item,metric,value\n"
        );
        assert_eq!(emit(&report, Format::PlotData).unwrap(), "series,x,y\n");
    }

    #[test]
    fn csv_quotes_awkward_names() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn lighting_with_hub() {
        let l = lighting_report(&LightingSection {
            standby_power: 0.4,
            lamp_power: 10.0,
            hub_annual_energy: Some(13.0),
        })
        .unwrap();
        assert!((l.offset_hours_per_day - 0.96).abs() < 1e-12);
        let expected = (0.4 + 13_000.0 / 8760.0) * 24.0 / 10.0;
        assert!((l.offset_hours_with_hub.unwrap() - expected).abs() < 1e-12);
    }
}
