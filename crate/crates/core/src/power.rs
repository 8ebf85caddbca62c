//! Base-station idle-mode energy under an NB-IoT signalling grid.
//!
//! In idle mode the base station only has to transmit the mandatory
//! signals. Every gap between them is a sleep opportunity, but a sleep
//! episode costs a fixed transition time and is only worth taking when the
//! remaining time in the sleep state reaches `min_sleep`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{free_intervals, FrameConfig, FrameGrid, SYMBOL_DURATION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerProfile {
    /// Power while transmitting a signalling symbol, W.
    pub p_active: f64,
    /// Awake but not transmitting, W.
    pub p_idle_awake: f64,
    pub p_sleep: f64,
    /// Ramp-down plus ramp-up time of one sleep episode, s.
    pub t_transition: f64,
    pub min_sleep: f64,
}

impl PowerProfile {
    pub fn flat(power: f64) -> Self {
        PowerProfile {
            p_active: power,
            p_idle_awake: power,
            p_sleep: power,
            t_transition: SYMBOL_DURATION,
            min_sleep: SYMBOL_DURATION,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("p_active", self.p_active),
            ("p_idle_awake", self.p_idle_awake),
            ("p_sleep", self.p_sleep),
            ("t_transition", self.t_transition),
            ("min_sleep", self.min_sleep),
        ];
        for (field, v) in finite {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::validation(
                    field,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if self.p_active < self.p_idle_awake {
            return Err(Error::validation("p_active", "must be >= p_idle_awake"));
        }
        if self.p_idle_awake < self.p_sleep {
            return Err(Error::validation("p_idle_awake", "must be >= p_sleep"));
        }
        Ok(())
    }

    /// Same timing, every power level multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        PowerProfile {
            p_active: self.p_active * k,
            p_idle_awake: self.p_idle_awake * k,
            p_sleep: self.p_sleep * k,
            ..*self
        }
    }

    fn sleep_eligible(&self, gap: f64) -> bool {
        let need = self.t_transition + self.min_sleep;
        // tolerate rounding when gap and need are built from the same symbol length
        gap + 1e-12 * gap.max(need) >= need
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SleepSimResult {
    pub energy_per_hyperperiod: f64,
    pub avg_power: f64,
    pub sleep_fraction: f64,
    pub transmit_fraction: f64,
    pub awake_idle_fraction: f64,
}

impl SleepSimResult {
    pub const CSV_HEADER: &'static str = "energy_j,avg_power_w,sleep_frac,tx_frac,idle_frac";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.energy_per_hyperperiod,
            self.avg_power,
            self.sleep_fraction,
            self.transmit_fraction,
            self.awake_idle_fraction
        )
    }
}

pub fn simulate_idle(grid: &FrameGrid, profile: &PowerProfile) -> Result<SleepSimResult> {
    profile.validate()?;
    let cfg = grid.config();
    let total = cfg.duration();
    let busy = grid.cells().iter().filter(|c| !c.is_free()).count() as f64 * cfg.symbol_duration;

    let (mut awake, mut asleep) = (0.0, 0.0);
    for gap in free_intervals(grid) {
        if profile.sleep_eligible(gap.duration) {
            awake += profile.t_transition;
            asleep += gap.duration - profile.t_transition;
        } else {
            awake += gap.duration;
        }
    }

    let energy = busy * profile.p_active + awake * profile.p_idle_awake + asleep * profile.p_sleep;
    let hyperperiods = (cfg.frames / 2) as f64;
    Ok(SleepSimResult {
        energy_per_hyperperiod: energy / hyperperiods,
        avg_power: energy / total,
        sleep_fraction: asleep / total,
        transmit_fraction: busy / total,
        awake_idle_fraction: awake / total,
    })
}

/// Relative idle-energy increase of `grid` over an empty carrier with the
/// same frame configuration.
pub fn idle_penalty(grid: &FrameGrid, profile: &PowerProfile) -> Result<f64> {
    let with_signals = simulate_idle(grid, profile)?.energy_per_hyperperiod;
    let baseline =
        simulate_idle(&FrameGrid::all_free(*grid.config())?, profile)?.energy_per_hyperperiod;
    if baseline <= 0.0 {
        return Err(Error::UndefinedPenalty);
    }
    Ok((with_signals - baseline) / baseline)
}

/// Power model with a single free parameter, the active/sleep power ratio.
///
/// `p_idle_awake` sits at `idle_fraction` of the way from `p_sleep` to
/// `p_active`, so ratio 1 is the flat profile and large ratios approach
/// `p_idle_awake = idle_fraction * p_active`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationTemplate {
    pub p_sleep: f64,
    pub idle_fraction: f64,
    pub t_transition: f64,
    pub min_sleep: f64,
    pub max_ratio: f64,
}

impl Default for CalibrationTemplate {
    fn default() -> Self {
        CalibrationTemplate {
            p_sleep: 1.0,
            idle_fraction: 0.5,
            t_transition: SYMBOL_DURATION,
            min_sleep: SYMBOL_DURATION,
            max_ratio: 1e6,
        }
    }
}

impl CalibrationTemplate {
    /// Default template with transition and minimum sleep set to one symbol of `config`.
    pub fn for_config(config: &FrameConfig) -> Self {
        CalibrationTemplate {
            t_transition: config.symbol_duration,
            min_sleep: config.symbol_duration,
            ..Self::default()
        }
    }

    pub fn profile(&self, ratio: f64) -> PowerProfile {
        let p_active = self.p_sleep * ratio;
        PowerProfile {
            p_active,
            p_idle_awake: self.p_sleep + self.idle_fraction * (p_active - self.p_sleep),
            p_sleep: self.p_sleep,
            t_transition: self.t_transition,
            min_sleep: self.min_sleep,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p_sleep.is_finite() && self.p_sleep > 0.0) {
            return Err(Error::validation("p_sleep", "template needs p_sleep > 0"));
        }
        if !(0.0..=1.0).contains(&self.idle_fraction) {
            return Err(Error::validation("idle_fraction", "must lie in [0, 1]"));
        }
        if !(self.max_ratio.is_finite() && self.max_ratio >= 1.0) {
            return Err(Error::validation("max_ratio", "must be finite and >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub profile: PowerProfile,
    /// Resolved p_active / p_sleep.
    pub ratio: f64,
    pub penalty: f64,
}

/// Finds the power ratio whose idle penalty on `grid` equals `target`.
///
/// The penalty is a ratio of two affine functions of the power ratio and is
/// monotone in it, so bisection on log(ratio) converges.
pub fn calibrate_profile(
    grid: &FrameGrid,
    template: &CalibrationTemplate,
    target: f64,
) -> Result<Calibration> {
    template.validate()?;
    if !(target.is_finite() && target >= 0.0) {
        return Err(Error::validation(
            "target_penalty",
            format!("must be >= 0, got {target}"),
        ));
    }
    let penalty_at = |ratio: f64| idle_penalty(grid, &template.profile(ratio));

    let flat = penalty_at(1.0)?;
    if target == 0.0 || target <= flat {
        return Ok(Calibration {
            profile: template.profile(1.0),
            ratio: 1.0,
            penalty: flat,
        });
    }
    if penalty_at(template.max_ratio)? < target {
        return Err(Error::CalibrationInfeasible {
            target,
            max_ratio: template.max_ratio,
        });
    }

    let (mut lo, mut hi) = (0.0f64, template.max_ratio.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if penalty_at(mid.exp())? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let ratio = hi.exp();
    Ok(Calibration {
        profile: template.profile(ratio),
        ratio,
        penalty: penalty_at(ratio)?,
    })
}
