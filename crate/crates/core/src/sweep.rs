//! Batch evaluations over parameter grids.

use crate::error::Result;
use crate::exec::Execution;
use crate::frame::FrameGrid;
use crate::lca::{provisioning_totals, wpt_breakeven_efficiency, ProvisioningPlan, TotalsRow};
use crate::power::{calibrate_profile, idle_penalty, Calibration, CalibrationTemplate};

/// Idle penalty of `grid` for each active/sleep power ratio.
pub fn penalty_curve(
    grid: &FrameGrid,
    template: &CalibrationTemplate,
    ratios: &[f64],
    exec: Execution,
) -> Vec<Result<f64>> {
    exec.map(ratios, |&r| idle_penalty(grid, &template.profile(r)))
}

pub fn calibrate_targets(
    grid: &FrameGrid,
    template: &CalibrationTemplate,
    targets: &[f64],
    exec: Execution,
) -> Vec<Result<Calibration>> {
    exec.map(targets, |&t| calibrate_profile(grid, template, t))
}

/// WPT break-even efficiency for each grid intensity (kgCO2eq/Wh).
pub fn wpt_curve(
    intensities: &[f64],
    battery_gwp_per_wh: f64,
    exec: Execution,
) -> Vec<Result<f64>> {
    exec.map(intensities, |&g| {
        wpt_breakeven_efficiency(g, battery_gwp_per_wh)
    })
}

/// Totals for every plan at every distance, distance-major.
pub fn servicing_grid(
    plans: &[ProvisioningPlan],
    distances: &[f64],
    exec: Execution,
) -> Vec<Result<(ProvisioningPlan, TotalsRow)>> {
    let jobs: Vec<(f64, &ProvisioningPlan)> = distances
        .iter()
        .flat_map(|&d| plans.iter().map(move |p| (d, p)))
        .collect();
    exec.map(&jobs, |&(d, plan)| {
        let plan = plan.at_distance(d)?;
        let row = provisioning_totals(&plan)?;
        Ok((plan, row))
    })
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{build_grid, FrameConfig};

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let grid = build_grid(FrameConfig::default()).unwrap();
        let t = CalibrationTemplate::default();
        let ratios = linspace(1.0, 50.0, 64);
        let a: Vec<f64> = penalty_curve(&grid, &t, &ratios, Execution::Sequential)
            .into_iter()
            .map(Result::unwrap)
            .collect();
        let b: Vec<f64> = penalty_curve(&grid, &t, &ratios, Execution::Parallel)
            .into_iter()
            .map(Result::unwrap)
            .collect();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn linspace_endpoints() {
        let xs = linspace(0.0, 20.0, 21);
        assert_eq!(xs.len(), 21);
        assert_eq!(xs[0], 0.0);
        assert_eq!(xs[20], 20.0);
        assert!(linspace(1.0, 2.0, 0).is_empty());
        assert_eq!(linspace(3.0, 9.0, 1), vec![3.0]);
    }
}
