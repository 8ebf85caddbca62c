//! Lifecycle GWP accounting for IoT nodes.
//!
//! All GWP figures are kgCO2eq. Production footprints are consumed as
//! pre-computed numbers; this module only does the bookkeeping around them:
//! servicing-transport break-even, energy provisioning totals, the wireless
//! power transfer efficiency threshold and standby-power offsets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HOURS_PER_DAY: f64 = 24.0;
pub const DAYS_PER_YEAR: f64 = 365.0;
pub const HOURS_PER_YEAR: f64 = HOURS_PER_DAY * DAYS_PER_YEAR;

/// Production GWP of the reference IoT node (production phase only), kgCO2eq.
pub const DEFAULT_DEVICE_GWP: f64 = 4.4;
/// Grid carbon intensity for a European mix, kgCO2eq per Wh.
pub const DEFAULT_GRID_INTENSITY: f64 = 250e-6;

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be finite and >= 0, got {v}"),
        ))
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceProfile {
    pub name: String,
    pub production_gwp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component_breakdown: Option<BTreeMap<String, f64>>,
    /// Liters over the life cycle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub water_use: Option<f64>,
    /// J/day.
    pub daily_energy: f64,
    /// Years.
    pub design_lifetime: f64,
}

impl DeviceProfile {
    /// Reference smart-meter class node. The component split is an
    /// illustrative allocation that sums to the reference production total;
    /// it is not a measured breakdown.
    pub fn reference_node() -> Self {
        let breakdown = [
            ("integrated circuits", 2.1),
            ("printed circuit board", 1.1),
            ("battery", 0.5),
            ("passives and connectors", 0.4),
            ("enclosure", 0.3),
        ];
        DeviceProfile {
            name: "reference-node".into(),
            production_gwp: DEFAULT_DEVICE_GWP,
            component_breakdown: Some(breakdown.iter().map(|&(k, v)| (k.to_string(), v)).collect()),
            water_use: Some(23.0),
            daily_energy: 500.0,
            design_lifetime: 15.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("production_gwp", self.production_gwp)?;
        non_negative("daily_energy", self.daily_energy)?;
        non_negative("design_lifetime", self.design_lifetime)?;
        if let Some(w) = self.water_use {
            non_negative("water_use", w)?;
        }
        if let Some(parts) = &self.component_breakdown {
            for (name, v) in parts {
                non_negative(&format!("component_breakdown.{name}"), *v)?;
            }
            let sum: f64 = parts.values().sum();
            let tol = 1e-3 * self.production_gwp.max(f64::MIN_POSITIVE);
            if (sum - self.production_gwp).abs() > tol {
                return Err(Error::validation(
                    "component_breakdown",
                    format!("components sum to {sum}, expected {}", self.production_gwp),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransportRate {
    PerKm(f64),
    PerHour(f64),
}

/// A servicing vehicle. Ground modes are rated per km, aerial ones per hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportMode {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gwp_per_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gwp_per_hour: Option<f64>,
}

impl TransportMode {
    pub fn per_km(name: &str, rate: f64) -> Self {
        TransportMode {
            name: name.into(),
            gwp_per_km: Some(rate),
            gwp_per_hour: None,
        }
    }

    pub fn per_hour(name: &str, rate: f64) -> Self {
        TransportMode {
            name: name.into(),
            gwp_per_km: None,
            gwp_per_hour: Some(rate),
        }
    }

    pub fn gasoline_car() -> Self {
        Self::per_km("gasoline", 0.210)
    }

    pub fn electric_car() -> Self {
        Self::per_km("e-car", 0.075)
    }

    pub fn electric_bike() -> Self {
        Self::per_km("e-bike", 0.015)
    }

    pub fn uav() -> Self {
        Self::per_hour("uav", 0.060)
    }

    pub fn rate(&self) -> Result<TransportRate> {
        let field = format!("transports.{}", self.name);
        let rate = match (self.gwp_per_km, self.gwp_per_hour) {
            (Some(r), None) => TransportRate::PerKm(r),
            (None, Some(r)) => TransportRate::PerHour(r),
            _ => {
                return Err(Error::validation(
                    field,
                    "exactly one of gwp_per_km and gwp_per_hour must be set",
                ))
            }
        };
        let (TransportRate::PerKm(r) | TransportRate::PerHour(r)) = rate;
        non_negative(&field, r)?;
        Ok(rate)
    }

    fn rate_per_km(&self) -> Result<f64> {
        match self.rate()? {
            TransportRate::PerKm(r) => Ok(r),
            TransportRate::PerHour(_) => Err(Error::WrongMode(self.name.clone())),
        }
    }
}

/// GWP of `n_interventions` trips of `distance` km each.
pub fn manual_service_gwp(
    mode: &TransportMode,
    distance: f64,
    n_interventions: f64,
) -> Result<f64> {
    let rate = mode.rate_per_km()?;
    non_negative("distance", distance)?;
    non_negative("n_interventions", n_interventions)?;
    Ok(rate * distance * n_interventions)
}

/// Trip distance at which manual servicing emits as much as producing the device.
pub fn break_even_distance(
    device_gwp: f64,
    mode: &TransportMode,
    n_interventions: f64,
) -> Result<f64> {
    let rate = mode.rate_per_km()?;
    non_negative("device_gwp", device_gwp)?;
    if !(rate > 0.0 && n_interventions > 0.0) {
        return Err(Error::Domain(format!(
            "break-even needs a positive rate and intervention count (rate {rate}, n {n_interventions})"
        )));
    }
    Ok(device_gwp / (rate * n_interventions))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryProfile {
    /// Wh.
    pub capacity: f64,
    pub rechargeable: bool,
    pub gwp_per_unit: f64,
    /// Years between visits.
    pub lifetime: f64,
}

impl BatteryProfile {
    pub fn validate(&self) -> Result<()> {
        positive("battery.capacity", self.capacity)?;
        non_negative("battery.gwp_per_unit", self.gwp_per_unit)?;
        positive("battery.lifetime", self.lifetime)
    }

    pub fn gwp_per_wh(&self) -> f64 {
        self.gwp_per_unit / self.capacity
    }
}

/// Battery runtime in years for a given daily draw.
pub fn battery_lifetime_estimate(
    battery: &BatteryProfile,
    daily_energy: f64,
    usable_fraction: f64,
) -> Result<f64> {
    if daily_energy.is_nan() || daily_energy <= 0.0 {
        return Err(Error::Domain(format!(
            "daily energy must be > 0, got {daily_energy}"
        )));
    }
    if !(usable_fraction > 0.0 && usable_fraction <= 1.0) {
        return Err(Error::validation("usable_fraction", "must lie in (0, 1]"));
    }
    positive("battery.capacity", battery.capacity)?;
    let days = battery.capacity * 3600.0 * usable_fraction / daily_energy;
    Ok(days / DAYS_PER_YEAR)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProvisioningMethod {
    ECarSwap,
    SolarPanel,
    UavWireless,
    UavContacts,
}

impl ProvisioningMethod {
    /// Battery is replaced at every visit rather than recharged in place.
    pub fn swaps_battery(self) -> bool {
        matches!(
            self,
            ProvisioningMethod::ECarSwap | ProvisioningMethod::UavContacts
        )
    }

    pub fn is_aerial(self) -> bool {
        matches!(
            self,
            ProvisioningMethod::UavWireless | ProvisioningMethod::UavContacts
        )
    }
}

/// How a deployed node is kept powered over `horizon` years.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProvisioningPlan {
    pub name: String,
    pub method: ProvisioningMethod,
    /// One-time GWP of extra hardware (charging interface, mounting).
    pub overhead_gwp: f64,
    pub solar_gwp_per_wp: Option<f64>,
    pub panel_wp: Option<f64>,
    pub battery: BatteryProfile,
    pub transport: Option<TransportMode>,
    /// Hours per visit, aerial methods.
    pub visit_duration: Option<f64>,
    /// km per visit. Aerial plans may set it to allow rescaling the duration.
    pub visit_distance: Option<f64>,
    pub horizon: f64,
}

fn require<T: Copy>(v: Option<T>, field: &str, method: ProvisioningMethod) -> Result<T> {
    v.ok_or_else(|| Error::validation(field, format!("required for {method:?}")))
}

impl ProvisioningPlan {
    pub fn validate(&self) -> Result<()> {
        positive("horizon", self.horizon)?;
        non_negative("overhead_gwp", self.overhead_gwp)?;
        self.battery.validate()?;
        if self.method == ProvisioningMethod::SolarPanel {
            non_negative(
                "solar_gwp_per_wp",
                require(self.solar_gwp_per_wp, "solar_gwp_per_wp", self.method)?,
            )?;
            non_negative("panel_wp", require(self.panel_wp, "panel_wp", self.method)?)?;
            return Ok(());
        }
        let transport = self.transport.as_ref().ok_or_else(|| {
            Error::validation("transport", format!("required for {:?}", self.method))
        })?;
        match (self.method.is_aerial(), transport.rate()?) {
            (true, TransportRate::PerHour(_)) => {
                non_negative(
                    "visit_duration",
                    require(self.visit_duration, "visit_duration", self.method)?,
                )?;
                if let Some(d) = self.visit_distance {
                    non_negative("visit_distance", d)?;
                }
            }
            (false, TransportRate::PerKm(_)) => {
                non_negative(
                    "visit_distance",
                    require(self.visit_distance, "visit_distance", self.method)?,
                )?;
            }
            _ => return Err(Error::WrongMode(transport.name.clone())),
        }
        Ok(())
    }

    /// The same plan with a different per-visit distance. Aerial visit time
    /// scales in proportion to distance, which needs `visit_distance` set.
    pub fn at_distance(&self, km: f64) -> Result<Self> {
        non_negative("visit_distance", km)?;
        let mut plan = self.clone();
        match self.method {
            ProvisioningMethod::SolarPanel | ProvisioningMethod::ECarSwap => {
                plan.visit_distance = Some(km)
            }
            _ => {
                let base = require(self.visit_distance, "visit_distance", self.method)?;
                let hours = require(self.visit_duration, "visit_duration", self.method)?;
                positive("visit_distance", base)?;
                plan.visit_duration = Some(hours * km / base);
                plan.visit_distance = Some(km);
            }
        }
        Ok(plan)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TotalsRow {
    pub overhead: f64,
    pub battery_total: f64,
    pub service_total: f64,
    pub grand_total: f64,
    pub n_visits: f64,
}

impl TotalsRow {
    pub const CSV_HEADER: &'static str =
        "method,overhead,battery_total,service_total,n_visits,grand_total";

    pub fn csv_row(&self, method: &str) -> String {
        format!(
            "{method},{},{},{},{},{}",
            self.overhead, self.battery_total, self.service_total, self.n_visits, self.grand_total
        )
    }
}

pub fn provisioning_totals(plan: &ProvisioningPlan) -> Result<TotalsRow> {
    plan.validate()?;
    let visits = plan.horizon / plan.battery.lifetime;
    let battery_units = if plan.method.swaps_battery() {
        visits
    } else {
        1.0
    };

    let (overhead, n_visits, service_total) = match plan.method {
        ProvisioningMethod::SolarPanel => {
            let panel = plan.solar_gwp_per_wp.unwrap_or(0.0) * plan.panel_wp.unwrap_or(0.0);
            (panel + plan.overhead_gwp, 0.0, 0.0)
        }
        _ => {
            // validate() guarantees the transport and its per-visit quantity
            let per_visit = match plan
                .transport
                .as_ref()
                .map(TransportMode::rate)
                .transpose()?
            {
                Some(TransportRate::PerKm(r)) => r * plan.visit_distance.unwrap_or(0.0),
                Some(TransportRate::PerHour(r)) => r * plan.visit_duration.unwrap_or(0.0),
                None => 0.0,
            };
            (plan.overhead_gwp, visits, per_visit * visits)
        }
    };
    let battery_total = plan.battery.gwp_per_unit * battery_units;
    Ok(TotalsRow {
        overhead,
        battery_total,
        service_total,
        grand_total: overhead + battery_total + service_total,
        n_visits,
    })
}

/// Minimum end-to-end WPT efficiency at which grid-fed charging emits less
/// per delivered Wh than replacing primary batteries. Both inputs in kgCO2eq/Wh.
pub fn wpt_breakeven_efficiency(grid_intensity: f64, battery_gwp_per_wh: f64) -> Result<f64> {
    non_negative("grid_intensity", grid_intensity)?;
    if !(battery_gwp_per_wh > 0.0 && battery_gwp_per_wh.is_finite()) {
        return Err(Error::Domain(format!(
            "battery GWP per Wh must be > 0, got {battery_gwp_per_wh}"
        )));
    }
    Ok(grid_intensity / battery_gwp_per_wh)
}

/// Hours per day a lamp must stay off to offset an always-on standby load.
pub fn standby_offset(standby_power: f64, lamp_power: f64) -> Result<f64> {
    non_negative("standby_power", standby_power)?;
    if !(lamp_power > 0.0 && lamp_power.is_finite()) {
        return Err(Error::Domain(format!(
            "lamp power must be > 0, got {lamp_power}"
        )));
    }
    Ok(standby_power * HOURS_PER_DAY / lamp_power)
}

/// kWh per year drawn by a constant load of `power` W.
pub fn annual_standby_energy(power: f64) -> Result<f64> {
    non_negative("standby_power", power)?;
    Ok(power * HOURS_PER_YEAR / 1000.0)
}

/// Four-method plan set for the intense-usage node (500 J/day, 15 years, 1 km visits).
pub fn reference_plans() -> Vec<ProvisioningPlan> {
    let primary = BatteryProfile {
        capacity: 22.5,
        rechargeable: false,
        gwp_per_unit: 0.8,
        lifetime: 1.3,
    };
    let ten_minutes = 10.0 / 60.0;
    let base = ProvisioningPlan {
        name: String::new(),
        method: ProvisioningMethod::ECarSwap,
        overhead_gwp: 0.0,
        solar_gwp_per_wp: None,
        panel_wp: None,
        battery: primary,
        transport: None,
        visit_duration: None,
        visit_distance: Some(1.0),
        horizon: 15.0,
    };
    vec![
        ProvisioningPlan {
            name: "E-car".into(),
            transport: Some(TransportMode::electric_car()),
            ..base.clone()
        },
        ProvisioningPlan {
            name: "Solar panel".into(),
            method: ProvisioningMethod::SolarPanel,
            overhead_gwp: 0.2,
            solar_gwp_per_wp: Some(1.0),
            panel_wp: Some(1.0),
            battery: BatteryProfile {
                capacity: 1.0,
                rechargeable: true,
                gwp_per_unit: 0.1,
                lifetime: 15.0,
            },
            visit_distance: None,
            ..base.clone()
        },
        ProvisioningPlan {
            name: "UAV wireless".into(),
            method: ProvisioningMethod::UavWireless,
            overhead_gwp: 0.7,
            battery: BatteryProfile {
                capacity: 10.0,
                rechargeable: true,
                gwp_per_unit: 1.0,
                lifetime: 0.2,
            },
            transport: Some(TransportMode::uav()),
            visit_duration: Some(ten_minutes),
            ..base.clone()
        },
        ProvisioningPlan {
            name: "UAV contacts".into(),
            method: ProvisioningMethod::UavContacts,
            transport: Some(TransportMode::uav()),
            visit_duration: Some(ten_minutes),
            ..base
        },
    ]
}
