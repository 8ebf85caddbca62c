//! Embodied carbon stranded in offline gateways of a crowdsourced network.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetStats {
    pub registered: u64,
    pub online: u64,
    /// kgCO2eq per gateway.
    pub gwp_per_gateway: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FleetWaste {
    pub offline_count: u64,
    pub offline_fraction: f64,
    pub stranded_gwp: f64,
}

impl FleetWaste {
    pub const CSV_HEADER: &'static str = "offline_count,offline_fraction,stranded_kgco2eq";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{}",
            self.offline_count, self.offline_fraction, self.stranded_gwp
        )
    }
}

pub fn fleet_waste(stats: &FleetStats) -> Result<FleetWaste> {
    if stats.online > stats.registered {
        return Err(Error::validation(
            "online",
            format!(
                "{} online exceeds {} registered",
                stats.online, stats.registered
            ),
        ));
    }
    if !(stats.gwp_per_gateway.is_finite() && stats.gwp_per_gateway >= 0.0) {
        return Err(Error::validation(
            "gwp_per_gateway",
            "must be finite and >= 0",
        ));
    }
    let offline_count = stats.registered - stats.online;
    let offline_fraction = if stats.registered == 0 {
        0.0
    } else {
        offline_count as f64 / stats.registered as f64
    };
    Ok(FleetWaste {
        offline_count,
        offline_fraction,
        stranded_gwp: offline_count as f64 * stats.gwp_per_gateway,
    })
}
