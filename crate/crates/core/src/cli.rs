//! Command-line front end. `main` only parses arguments and maps errors to
//! exit codes; everything else lives here so it can be tested in-process.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fleet::{fleet_waste, FleetStats, FleetWaste};
use crate::frame::{
    build_grid, free_intervals, occupancy_shares, FrameConfig, REFERENCE_SHARE_PERCENT,
};
use crate::lca::{
    reference_plans, DeviceProfile, TotalsRow, TransportMode, DEFAULT_GRID_INTENSITY,
};
use crate::power::{CalibrationTemplate, PowerProfile, SleepSimResult};
use crate::report::{
    breakeven_report, emit, lighting_report, plot_points, power_report, run_scenario, wpt_report,
    Format, ScenarioReport,
};
use crate::scenario::{
    BreakEvenSection, LightingSection, LoadedScenario, PowerSection, Scenario, WptSection,
};
use crate::sweep::{linspace, servicing_grid, wpt_curve};

#[derive(Debug, Parser)]
#[command(
    name = "iot-footprint",
    version,
    about = "Direct ecological cost models for IoT deployments"
)]
pub struct Cli {
    /// Scenario file (JSON) supplying inputs for the subcommand.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,

    /// csv, ascii or plotdata.
    #[arg(long, global = true, default_value = "csv")]
    pub format: String,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Disable multi-threaded evaluation.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// NB-IoT downlink signalling grid and occupancy shares.
    Frame {
        #[arg(long)]
        frames: Option<usize>,
    },
    /// Base-station idle energy and NB-IoT idle penalty.
    Power(PowerArgs),
    /// Servicing-transport break-even distances.
    Breakeven(BreakevenArgs),
    /// Energy provisioning totals per servicing method.
    Servicing {
        /// Per-visit distance in km; repeat for several.
        #[arg(long = "distance")]
        distances: Vec<f64>,
    },
    /// Stranded embodied carbon of offline gateways.
    Fleet {
        #[arg(long)]
        registered: Option<u64>,
        #[arg(long)]
        online: Option<u64>,
        #[arg(long, default_value_t = 7.0)]
        gwp_per_gateway: f64,
    },
    /// Minimum WPT efficiency that beats primary batteries.
    Wpt(WptArgs),
    /// Standby power of connected lighting.
    Lighting {
        #[arg(long, default_value_t = 0.4)]
        standby_power: f64,
        #[arg(long, default_value_t = 10.0)]
        lamp_power: f64,
        /// kWh/year of a dedicated hub.
        #[arg(long)]
        hub_annual_energy: Option<f64>,
    },
    /// Run every section of a scenario file.
    Report,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Power profile as a flat JSON object.
    #[arg(long, conflicts_with = "calibrate")]
    pub profile: Option<PathBuf>,
    /// Calibrate the active/sleep ratio to this idle penalty.
    #[arg(long)]
    pub calibrate: Option<f64>,
    /// Upper bound of the active/sleep ratio search.
    #[arg(long)]
    pub max_ratio: Option<f64>,
    /// Position of awake-idle power between sleep (0) and active (1).
    #[arg(long)]
    pub idle_fraction: Option<f64>,
    /// Save the resulting profile as JSON.
    #[arg(long)]
    pub write_profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BreakevenArgs {
    #[arg(long)]
    pub device_gwp: Option<f64>,
    #[arg(long, default_value_t = 15.0)]
    pub interventions: f64,
    /// Ground transport as NAME=KGCO2EQ_PER_KM; repeat for several.
    #[arg(long = "mode")]
    pub modes: Vec<String>,
    #[arg(long, default_value_t = 20.0)]
    pub max_distance: f64,
}

#[derive(Debug, Args)]
pub struct WptArgs {
    /// kgCO2eq per Wh drawn from the grid.
    #[arg(long, default_value_t = DEFAULT_GRID_INTENSITY)]
    pub grid_intensity: f64,
    #[arg(long, default_value_t = 0.8)]
    pub battery_gwp: f64,
    /// Wh.
    #[arg(long, default_value_t = 22.5)]
    pub battery_capacity: f64,
    /// Sweep grid intensity from --grid-intensity up to this value.
    #[arg(long)]
    pub sweep_to: Option<f64>,
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
}

struct Ctx {
    scenario: Option<LoadedScenario>,
    format: Format,
    exec: Execution,
}

/// Runs one invocation and returns the bytes to write.
pub fn execute(cli: &Cli) -> Result<String> {
    let ctx = Ctx {
        scenario: cli.scenario.as_deref().map(Scenario::load).transpose()?,
        format: cli.format.parse()?,
        exec: if cli.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    };
    let s = ctx.scenario.as_ref().map(|l| &l.scenario);

    match &cli.command {
        Command::Frame { frames } => {
            let config = match frames {
                Some(n) => FrameConfig {
                    frames: *n,
                    ..s.and_then(|s| s.frame).unwrap_or_default()
                },
                None => s.and_then(|s| s.frame).unwrap_or_default(),
            };
            frame_cmd(config, ctx.format)
        }
        Command::Power(args) => power_cmd(args, s, &ctx),
        Command::Breakeven(args) => breakeven_cmd(args, s, ctx.format),
        Command::Servicing { distances } => servicing_cmd(distances, ctx.scenario.as_ref(), &ctx),
        Command::Fleet {
            registered,
            online,
            gwp_per_gateway,
        } => {
            let stats = match (registered, online, s.and_then(|s| s.fleet)) {
                (Some(r), Some(o), _) => FleetStats {
                    registered: *r,
                    online: *o,
                    gwp_per_gateway: *gwp_per_gateway,
                },
                (None, None, Some(f)) => f,
                _ => {
                    return Err(Error::validation(
                        "fleet",
                        "pass --registered and --online, or a scenario with a fleet section",
                    ))
                }
            };
            fleet_cmd(&fleet_waste(&stats)?, ctx.format)
        }
        Command::Wpt(args) => wpt_cmd(args, s, &ctx),
        Command::Lighting {
            standby_power,
            lamp_power,
            hub_annual_energy,
        } => {
            let section = match s.and_then(|s| s.lighting.clone()) {
                Some(l) => l,
                None => LightingSection {
                    standby_power: *standby_power,
                    lamp_power: *lamp_power,
                    hub_annual_energy: *hub_annual_energy,
                },
            };
            let r = lighting_report(&section)?;
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            match ctx.format {
                Format::Csv => Ok(format!(
                    "standby_annual_kwh,offset_hours_per_day,offset_hours_with_hub\n{},{},{}\n",
                    r.standby_annual_kwh,
                    r.offset_hours_per_day,
                    opt(r.offset_hours_with_hub)
                )),
                Format::Ascii => Ok(format!(
                    "standby energy      {:.3} kWh/year\nlamp-off offset     {:.3} h/day\n{}",
                    r.standby_annual_kwh,
                    r.offset_hours_per_day,
                    r.offset_hours_with_hub
                        .map(|h| format!("offset with hub     {h:.3} h/day\n"))
                        .unwrap_or_default()
                )),
                Format::PlotData => Err(Error::Format("plotdata (lighting)".into())),
            }
        }
        Command::Report => {
            let loaded = ctx
                .scenario
                .as_ref()
                .ok_or_else(|| Error::validation("scenario", "`report` needs --scenario"))?;
            let report = run_scenario(loaded, ctx.exec)?;
            emit(&report, ctx.format)
        }
    }
}

fn frame_cmd(config: FrameConfig, format: Format) -> Result<String> {
    let grid = build_grid(config)?;
    match format {
        Format::Csv => Ok(grid.to_csv()),
        Format::PlotData => {
            let mut out = String::from("series,x,y\n");
            for (i, c) in grid.cells().iter().enumerate() {
                let _ = writeln!(out, "occupied,{i},{}", u8::from(!c.is_free()));
            }
            Ok(out)
        }
        Format::Ascii => {
            let shares = occupancy_shares(&grid);
            let mut out = grid.to_ascii();
            let _ = writeln!(
                out,
                "\n{:<8} {:>6} {:>8} {:>8} {:>9}",
                "signal", "count", "share%", "pie%", "delta pp"
            );
            for (signal, pie) in REFERENCE_SHARE_PERCENT {
                let share = shares.share(signal) * 100.0;
                let _ = writeln!(
                    out,
                    "{:<8} {:>6} {:>8.2} {:>8.2} {:>+9.2}",
                    signal.token(),
                    grid.count(signal),
                    share,
                    pie,
                    share - pie
                );
            }
            let longest = free_intervals(&grid)
                .iter()
                .map(|i| i.length)
                .max()
                .unwrap_or(0);
            let _ = writeln!(out, "signalling share {:.2}%", shares.signalling() * 100.0);
            let _ = writeln!(out, "longest free run {longest} symbols");
            Ok(out)
        }
    }
}

fn power_cmd(args: &PowerArgs, s: Option<&Scenario>, ctx: &Ctx) -> Result<String> {
    let config = s.and_then(|s| s.frame).unwrap_or_default();
    let section = if let Some(path) = &args.profile {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::validation("profile", format!("{}: {e}", path.display())))?;
        let profile: PowerProfile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        PowerSection {
            profile: Some(profile),
            ..Default::default()
        }
    } else if let Some(target) = args.calibrate {
        let mut template = s
            .and_then(|s| s.power.as_ref())
            .and_then(|p| p.template)
            .unwrap_or_else(|| CalibrationTemplate::for_config(&config));
        if let Some(m) = args.max_ratio {
            template.max_ratio = m;
        }
        if let Some(f) = args.idle_fraction {
            template.idle_fraction = f;
        }
        PowerSection {
            profile: None,
            target_penalty: Some(target),
            template: Some(template),
        }
    } else {
        s.and_then(|s| s.power.clone()).ok_or_else(|| {
            Error::validation(
                "power",
                "pass --profile or --calibrate, or a scenario with a power section",
            )
        })?
    };
    let r = power_report(config, &section)?;
    if let Some(path) = &args.write_profile {
        let json = serde_json::to_string_pretty(&r.profile).expect("profile serializes");
        std::fs::write(path, json + "\n")
            .map_err(|e| Error::validation("write_profile", format!("{}: {e}", path.display())))?;
    }
    match ctx.format {
        Format::Csv => Ok(format!(
            "{}\n{}\n",
            SleepSimResult::CSV_HEADER,
            r.sim.csv_row()
        )),
        Format::Ascii => {
            let mut out = String::new();
            let p = &r.profile;
            let _ = writeln!(out, "p_active      {:.6} W", p.p_active);
            let _ = writeln!(out, "p_idle_awake  {:.6} W", p.p_idle_awake);
            let _ = writeln!(out, "p_sleep       {:.6} W", p.p_sleep);
            let _ = writeln!(out, "t_transition  {:.3} us", p.t_transition * 1e6);
            let _ = writeln!(out, "min_sleep     {:.3} us", p.min_sleep * 1e6);
            if let Some(ratio) = r.calibrated_ratio {
                let _ = writeln!(out, "calibrated active/sleep ratio {ratio:.6}");
            }
            let _ = writeln!(out, "avg power     {:.6} W", r.sim.avg_power);
            let _ = writeln!(
                out,
                "time split    tx {:.2}%  awake {:.2}%  sleep {:.2}%",
                r.sim.transmit_fraction * 100.0,
                r.sim.awake_idle_fraction * 100.0,
                r.sim.sleep_fraction * 100.0
            );
            let _ = writeln!(out, "idle penalty  {:.3}%", r.penalty * 100.0);
            Ok(out)
        }
        Format::PlotData => Err(Error::Format("plotdata (power)".into())),
    }
}

fn parse_mode(spec: &str) -> Result<TransportMode> {
    let (name, rate) = spec
        .split_once('=')
        .ok_or_else(|| Error::validation("mode", format!("expected NAME=RATE, got `{spec}`")))?;
    let rate: f64 = rate
        .parse()
        .map_err(|_| Error::validation("mode", format!("bad rate in `{spec}`")))?;
    Ok(TransportMode::per_km(name, rate))
}

fn breakeven_cmd(args: &BreakevenArgs, s: Option<&Scenario>, format: Format) -> Result<String> {
    let mut device = s
        .and_then(|s| s.device.clone())
        .unwrap_or_else(DeviceProfile::reference_node);
    if let Some(g) = args.device_gwp {
        device.production_gwp = g;
        device.component_breakdown = None;
    }
    let modes: Vec<TransportMode> = if !args.modes.is_empty() {
        args.modes
            .iter()
            .map(|m| parse_mode(m))
            .collect::<Result<_>>()?
    } else if let Some(s) = s.filter(|s| !s.transports.is_empty()) {
        s.transports.clone()
    } else {
        vec![
            TransportMode::gasoline_car(),
            TransportMode::electric_car(),
            TransportMode::electric_bike(),
        ]
    };
    // interventions are given directly here, not derived from the device lifetime
    device.design_lifetime = 1.0;
    let section = BreakEvenSection {
        interventions_per_year: args.interventions,
        max_distance: args.max_distance,
    };
    let b = breakeven_report(&device, &modes, &section)?;
    match format {
        Format::Csv => {
            let mut out = String::from("mode,gwp_per_km,interventions,break_even_km\n");
            for r in &b.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    r.mode, r.gwp_per_km, r.interventions, r.distance
                );
            }
            Ok(out)
        }
        Format::Ascii => {
            let mut out = format!("device production GWP {} kgCO2eq\n", b.device_gwp);
            for r in &b.rows {
                let _ = writeln!(
                    out,
                    "{:<12} {:>6.3} kg/km x {:>4} visits -> break-even {:>7.3} km",
                    r.mode, r.gwp_per_km, r.interventions, r.distance
                );
            }
            Ok(out)
        }
        Format::PlotData => {
            let mut report = ScenarioReport::empty();
            report.breakeven = Some(b);
            let mut out = String::from("series,x,y\n");
            for (series, x, y) in plot_points(&report)? {
                let _ = writeln!(out, "{series},{x},{y}");
            }
            Ok(out)
        }
    }
}

fn servicing_cmd(distances: &[f64], loaded: Option<&LoadedScenario>, ctx: &Ctx) -> Result<String> {
    let plans = match loaded {
        Some(l) if !l.plans.is_empty() => l.plans.clone(),
        _ => reference_plans(),
    };
    let distances: Vec<f64> = if !distances.is_empty() {
        distances.to_vec()
    } else {
        loaded
            .map(|l| l.scenario.servicing_distances.clone())
            .unwrap_or_default()
    };
    let rows: Vec<(String, TotalsRow)> = if distances.is_empty() {
        plans
            .iter()
            .map(|p| Ok((p.name.clone(), crate::lca::provisioning_totals(p)?)))
            .collect::<Result<_>>()?
    } else {
        let tag = distances.len() > 1;
        servicing_grid(&plans, &distances, ctx.exec)
            .into_iter()
            .map(|r| {
                let (plan, totals) = r?;
                let name = match (tag, plan.visit_distance) {
                    (true, Some(d)) => format!("{}@{d}km", plan.name),
                    _ => plan.name.clone(),
                };
                Ok((name, totals))
            })
            .collect::<Result<_>>()?
    };
    match ctx.format {
        Format::Csv => {
            let mut out = format!("{}\n", TotalsRow::CSV_HEADER);
            for (name, t) in &rows {
                let _ = writeln!(out, "{}", t.csv_row(name));
            }
            Ok(out)
        }
        Format::Ascii => {
            let mut out = format!(
                "{:<20} {:>10} {:>10} {:>10} {:>9} {:>10}\n",
                "method", "overhead", "battery", "service", "visits", "total"
            );
            for (name, t) in &rows {
                let _ = writeln!(
                    out,
                    "{:<20} {:>10.4} {:>10.4} {:>10.4} {:>9.2} {:>10.4}",
                    name, t.overhead, t.battery_total, t.service_total, t.n_visits, t.grand_total
                );
            }
            Ok(out)
        }
        Format::PlotData => {
            let mut out = String::from("series,x,y\n");
            for (name, t) in &rows {
                let _ = writeln!(out, "{name},0,{}", t.grand_total);
            }
            Ok(out)
        }
    }
}

fn fleet_cmd(w: &FleetWaste, format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(format!("{}\n{}\n", FleetWaste::CSV_HEADER, w.csv_row())),
        Format::Ascii => Ok(format!(
            "offline gateways  {}\noffline share     {:.2}%\nstranded GWP      {} kgCO2eq\n",
            w.offline_count,
            w.offline_fraction * 100.0,
            w.stranded_gwp
        )),
        Format::PlotData => Err(Error::Format("plotdata (fleet)".into())),
    }
}

fn wpt_cmd(args: &WptArgs, s: Option<&Scenario>, ctx: &Ctx) -> Result<String> {
    let section = match s.and_then(|s| s.wpt.clone()) {
        Some(w) => w,
        None => WptSection {
            grid_intensity: args.grid_intensity,
            battery_gwp: args.battery_gwp,
            battery_capacity: args.battery_capacity,
        },
    };
    let intensities = match args.sweep_to {
        Some(hi) => linspace(section.grid_intensity, hi, args.steps.max(2)),
        None => vec![section.grid_intensity],
    };
    let per_wh = wpt_report(&section)?.battery_gwp_per_wh;
    let etas = wpt_curve(&intensities, per_wh, ctx.exec)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    match ctx.format {
        Format::Csv => {
            let mut out = String::from("grid_intensity,battery_gwp_per_wh,breakeven_efficiency\n");
            for (g, eta) in intensities.iter().zip(&etas) {
                let _ = writeln!(out, "{g},{per_wh},{eta}");
            }
            Ok(out)
        }
        Format::Ascii => {
            let mut out = format!("battery GWP {per_wh:.6} kgCO2eq/Wh\n");
            for (g, eta) in intensities.iter().zip(&etas) {
                let _ = writeln!(
                    out,
                    "grid {:>7.1} g/kWh -> WPT efficiency must exceed {:.3}%",
                    g * 1e6,
                    eta * 100.0
                );
            }
            Ok(out)
        }
        Format::PlotData => {
            let mut out = String::from("series,x,y\n");
            for (g, eta) in intensities.iter().zip(&etas) {
                let _ = writeln!(out, "wpt_breakeven,{g},{eta}");
            }
            Ok(out)
        }
    }
}
