//! Scenario files: one JSON document describing a reproduction run.
//!
//! Every section is optional. Plans refer to transport modes by name; names
//! are resolved against the `transports` list when the file is loaded.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fleet::FleetStats;
use crate::frame::FrameConfig;
use crate::lca::{
    BatteryProfile, DeviceProfile, ProvisioningMethod, ProvisioningPlan, TransportMode,
};
use crate::power::{CalibrationTemplate, PowerProfile};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<PowerProfile>,
    /// When set, the profile is calibrated to reach this idle penalty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_penalty: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<CalibrationTemplate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BreakEvenSection {
    pub interventions_per_year: f64,
    /// Right end of the plotted distance axis, km.
    pub max_distance: f64,
}

impl Default for BreakEvenSection {
    fn default() -> Self {
        BreakEvenSection {
            interventions_per_year: 1.0,
            max_distance: 20.0,
        }
    }
}

/// Plan as written in the file, with the transport given by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    pub name: String,
    pub method: ProvisioningMethod,
    #[serde(default)]
    pub overhead_gwp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solar_gwp_per_wp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub panel_wp: Option<f64>,
    pub battery: BatteryProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visit_duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visit_distance: Option<f64>,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WptSection {
    /// kgCO2eq per Wh drawn from the grid.
    #[serde(default = "default_grid_intensity")]
    pub grid_intensity: f64,
    /// Primary battery being replaced: GWP per unit and capacity in Wh.
    pub battery_gwp: f64,
    pub battery_capacity: f64,
}

fn default_grid_intensity() -> f64 {
    crate::lca::DEFAULT_GRID_INTENSITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightingSection {
    /// W drawn by a connected lamp while switched off.
    pub standby_power: f64,
    pub lamp_power: f64,
    /// kWh/year of a dedicated hub, if one is needed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hub_annual_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<DeviceProfile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transports: Vec<TransportMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakeven: Option<BreakEvenSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plans: Vec<PlanSpec>,
    /// Per-visit distances (km) at which every plan is evaluated. Empty
    /// means each plan's own distance.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub servicing_distances: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fleet: Option<FleetStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wpt: Option<WptSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lighting: Option<LightingSection>,
}

/// A parsed scenario together with the digest of the bytes it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub plans: Vec<ProvisioningPlan>,
    pub sha256: String,
}

fn prefixed(prefix: &str, err: Error) -> Error {
    match err {
        Error::Validation { field, reason } => Error::Validation {
            field: format!("{prefix}.{field}"),
            reason,
        },
        other => other,
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<LoadedScenario> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let plans = scenario.resolve_plans()?;
        scenario.validate()?;
        Ok(LoadedScenario {
            scenario,
            plans,
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        })
    }

    pub fn load(path: &Path) -> Result<LoadedScenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            column: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn transport(&self, name: &str) -> Option<&TransportMode> {
        self.transports.iter().find(|t| t.name == name)
    }

    fn resolve_plans(&self) -> Result<Vec<ProvisioningPlan>> {
        self.plans
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let transport = match &spec.transport {
                    Some(name) => Some(self.transport(name).cloned().ok_or_else(|| {
                        Error::validation(
                            format!("plans[{i}].transport"),
                            format!("unknown transport `{name}`"),
                        )
                    })?),
                    None => None,
                };
                Ok(ProvisioningPlan {
                    name: spec.name.clone(),
                    method: spec.method,
                    overhead_gwp: spec.overhead_gwp,
                    solar_gwp_per_wp: spec.solar_gwp_per_wp,
                    panel_wp: spec.panel_wp,
                    battery: spec.battery,
                    transport,
                    visit_duration: spec.visit_duration,
                    visit_distance: spec.visit_distance,
                    horizon: spec.horizon,
                })
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if let Some(frame) = &self.frame {
            frame.validate()?;
        }
        if let Some(power) = &self.power {
            match (&power.profile, power.target_penalty) {
                (Some(p), None) => p.validate().map_err(|e| prefixed("power.profile", e))?,
                (None, Some(_)) => {}
                _ => {
                    return Err(Error::validation(
                        "power",
                        "set exactly one of `profile` and `target_penalty`",
                    ))
                }
            }
        }
        if let Some(device) = &self.device {
            device.validate().map_err(|e| prefixed("device", e))?;
        }
        let mut names = std::collections::BTreeSet::new();
        for (i, t) in self.transports.iter().enumerate() {
            if !names.insert(t.name.as_str()) {
                return Err(Error::validation(
                    format!("transports[{i}].name"),
                    "duplicate name",
                ));
            }
            t.rate()?;
        }
        for (i, d) in self.servicing_distances.iter().enumerate() {
            if !(d.is_finite() && *d >= 0.0) {
                return Err(Error::validation(
                    format!("servicing_distances[{i}]"),
                    "must be >= 0",
                ));
            }
        }
        if let Some(b) = &self.breakeven {
            if !(b.interventions_per_year > 0.0 && b.max_distance > 0.0) {
                return Err(Error::validation(
                    "breakeven",
                    "interventions_per_year and max_distance must be > 0",
                ));
            }
        }
        Ok(())
    }
}
