//! Command-line orchestration: one configuration file in, deterministic
//! artifacts out. Each subcommand prints its primary JSON report to stdout
//! and writes the same bytes (plus any CSV series) under the output
//! directory. Exit codes: 0 success, 2 invalid input, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, RunConfig};
use crate::device::DeviceSpec;
use crate::dynamics::{
    accumulated_theta, decoherence_dilation, extract_gate, run_model, virtual_population_stats,
    Model,
};
use crate::encoding::logical_gate_from_simulation;
use crate::error::{Error, Result};
use crate::feasibility::{check_adiabatic, pulse_area, scan_plane, solve_g_las_for_area};
use crate::output::{
    region_csv, to_json_string, trajectory_csv, write_atomic, CheckReportJson, GateReportJson,
    Provenance, ScanReportJson, SimulateSummary, SolveAreaJson,
};
use crate::output::PopulationsJson;
use crate::quantum::StateVector;

#[derive(Parser)]
#[command(
    name = "spincav",
    version,
    about = "Cavity-mediated spin-qubit gate simulator and feasibility analyzer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the configured model; writes trajectory.csv and summary.json.
    Simulate(CommonArgs),
    /// Extract the two-qubit gate; writes gate.json.
    Gate(CommonArgs),
    /// Evaluate the adiabatic conditions per dot; writes check.json.
    Check(CommonArgs),
    /// Scan the coupling/pulse-width plane; writes region.csv and region.json.
    Scan(CommonArgs),
    /// Solve the laser peak for the target pulse area; writes solve_area.json.
    SolveArea(CommonArgs),
}

/// Subcommand handler: consumes the parsed config, writes artifacts under
/// the output directory, returns the one-line stdout summary.
type Handler = fn(&RunConfig, &Path) -> Result<String>;

/// Run one CLI invocation (argv includes the program name) and return the
/// process exit code. Errors are printed to stderr.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (args, run): (&CommonArgs, Handler) = match &cli.command {
        Command::Simulate(a) => (a, cmd_simulate),
        Command::Gate(a) => (a, cmd_gate),
        Command::Check(a) => (a, cmd_check),
        Command::Scan(a) => (a, cmd_scan),
        Command::SolveArea(a) => (a, cmd_solve_area),
    };
    match execute(args, run) {
        Ok(report) => {
            print!("{report}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) | Error::Io(_) => 2,
                Error::Numerical(_) => 3,
            }
        }
    }
}

fn execute(args: &CommonArgs, run: fn(&RunConfig, &Path) -> Result<String>) -> Result<String> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        Error::validation(format!(
            "cannot read config {}: {e}",
            args.config.display()
        ))
    })?;
    let config = parse_config(&text)?;
    let out_dir = args.out.clone().unwrap_or_else(|| config.output.dir.clone());
    run(&config, &out_dir)
}

fn provenance(config: &RunConfig) -> Provenance {
    Provenance::new(
        config.config_sha256.clone(),
        config.defaults_applied.clone(),
    )
}

/// Decay rates to use for coherence estimates: the explicit decay block
/// when enabled, otherwise the rates recorded on the device (requiring a
/// shared exciton rate across dots).
fn effective_rates(config: &RunConfig) -> Option<(f64, f64)> {
    if config.decay.enabled {
        return Some((config.decay.kappa, config.decay.gamma_x));
    }
    let first = config.device.dots[0].gamma_x;
    if config.device.dots.iter().any(|d| d.gamma_x != first) {
        return None;
    }
    Some((config.device.cavity.kappa, first))
}

fn dilation_estimate(config: &RunConfig, max_exc: f64, max_ph: f64) -> Option<f64> {
    let (kappa, gamma_x) = effective_rates(config)?;
    let window = decoherence_dilation(max_exc, max_ph, kappa, gamma_x).ok()?;
    window.is_finite().then_some(window)
}

fn initial_state(config: &RunConfig) -> Result<StateVector> {
    let basis = config.model.basis(&config.device)?;
    let multi: Vec<usize> = match config.model {
        Model::Full => config
            .initial_state
            .iter()
            .copied()
            .chain(std::iter::once(0))
            .collect(),
        Model::EffectiveRaman => vec![config.initial_state[0], 0],
        Model::EffectiveXy => config.initial_state.clone(),
    };
    StateVector::basis_state(&basis, &multi)
}

/// Windowed coupling integral and analytic area, when the device defines a
/// two-qubit coupling.
fn two_dot_areas(config: &RunConfig) -> (Option<f64>, Option<f64>) {
    let spec = &config.device;
    if spec.dots.len() != 2 {
        return (None, None);
    }
    let theta = accumulated_theta(spec, &config.grid).ok();
    let area = pulse_area(&spec.dots[0], &spec.dots[1], &spec.cavity).ok();
    (theta, area)
}

/// Run the configured trajectory; returns (summary JSON, trajectory CSV).
pub fn simulate_report(config: &RunConfig) -> Result<(String, String)> {
    let psi0 = initial_state(config)?;
    let traj = run_model(
        config.model,
        &config.device,
        &psi0,
        &config.grid,
        &config.decay,
    )?;
    let (max_exc, max_ph) = virtual_population_stats(&traj);
    let (theta_accumulated_rad, pulse_area_rad) = two_dot_areas(config);
    let final_norm = *traj.norm().last().expect("nonempty trajectory");
    let summary = SimulateSummary {
        provenance: provenance(config),
        model: config.model,
        initial_state: config
            .initial_state
            .iter()
            .map(|b| b.to_string())
            .collect(),
        t_start_ps: config.grid.t_start(),
        t_end_ps: config.grid.t_end(),
        n_steps: config.grid.n_steps(),
        theta_accumulated_rad,
        pulse_area_rad,
        max_exciton_pop: max_exc,
        max_photon_pop: max_ph,
        final_norm,
        norm_loss: 1.0 - final_norm * final_norm,
        final_populations: PopulationsJson::from_populations(
            traj.populations().last().expect("nonempty trajectory"),
        ),
        decoherence_dilation_ps: dilation_estimate(config, max_exc, max_ph),
    };
    let json = to_json_string(&summary)?;
    let csv = trajectory_csv(&traj, config.output.amplitudes, &summary.provenance);
    Ok((json, csv))
}

/// Extract the configured gate; returns the gate report JSON.
pub fn gate_report(config: &RunConfig) -> Result<String> {
    let gate = extract_gate(&config.device, &config.grid, config.model, &config.decay)?;
    let logical = logical_gate_from_simulation(&gate);
    let (_, pulse_area_rad) = two_dot_areas(config);
    let report = GateReportJson {
        provenance: provenance(config),
        model: config.model,
        theta_accumulated_rad: gate.theta_accumulated,
        pulse_area_rad,
        fidelity_vs_ideal: gate.fidelity,
        max_exciton_pop: gate.max_exciton_pop,
        max_photon_pop: gate.max_photon_pop,
        norm_loss: gate.norm_loss,
        area_deficit: gate.area_deficit,
        stark_phases_rad: gate.stark_phases.clone(),
        decoherence_dilation_ps: dilation_estimate(
            config,
            gate.max_exciton_pop,
            gate.max_photon_pop,
        ),
        unitary: gate.unitary,
        logical,
    };
    to_json_string(&report)
}

/// Per-dot adiabaticity ratios against the configured policy, as JSON.
pub fn check_report(config: &RunConfig) -> Result<String> {
    let spec: &DeviceSpec = &config.device;
    let reports = spec
        .dots
        .iter()
        .map(|dot| check_adiabatic(dot, &spec.cavity, &config.policy))
        .collect::<Result<Vec<_>>>()?;
    let report = CheckReportJson::new(provenance(config), &reports);
    to_json_string(&report)
}

/// Run the configured feasibility scan; returns (region JSON, region CSV).
pub fn scan_report(config: &RunConfig) -> Result<(String, String)> {
    let scan = config.scan.as_ref().ok_or_else(|| {
        Error::validation("scan subcommand needs a \"scan\" block in the config")
    })?;
    let grid = scan_plane(&scan.gc_axis, &scan.tau_axis, &scan.search)?;
    let prov = provenance(config);
    let report = ScanReportJson {
        provenance: prov.clone(),
        gc_axis: &grid.gc_axis,
        tau_axis_ps: &grid.tau_axis,
        cells: &grid.cells,
    };
    let json = to_json_string(&report)?;
    Ok((json, region_csv(&grid, &prov)))
}

/// Solve the first dot's peak laser coupling for the configured pulse
/// area; returns the solver report JSON.
pub fn solve_area_report(config: &RunConfig) -> Result<String> {
    let dot = &config.device.dots[0];
    let target = config
        .scan
        .as_ref()
        .map(|s| s.search.area_target)
        .unwrap_or(2.0 * std::f64::consts::PI);
    let g_las = solve_g_las_for_area(
        target,
        dot.delta_big,
        dot.delta_small,
        config.device.cavity.g_c,
        dot.tau,
    )?;
    let mut solved = dot.clone();
    solved.g_las_peak = g_las;
    let roundtrip = pulse_area(&solved, &solved, &config.device.cavity)?;
    let report = SolveAreaJson {
        provenance: provenance(config),
        g_las,
        area_target_rad: target,
        area_roundtrip_rad: roundtrip,
    };
    to_json_string(&report)
}

fn cmd_simulate(config: &RunConfig, out_dir: &Path) -> Result<String> {
    let (json, csv) = simulate_report(config)?;
    write_atomic(&out_dir.join("trajectory.csv"), &csv)?;
    write_atomic(&out_dir.join("summary.json"), &json)?;
    Ok(json)
}

fn cmd_gate(config: &RunConfig, out_dir: &Path) -> Result<String> {
    let json = gate_report(config)?;
    write_atomic(&out_dir.join("gate.json"), &json)?;
    Ok(json)
}

fn cmd_check(config: &RunConfig, out_dir: &Path) -> Result<String> {
    let json = check_report(config)?;
    write_atomic(&out_dir.join("check.json"), &json)?;
    Ok(json)
}

fn cmd_scan(config: &RunConfig, out_dir: &Path) -> Result<String> {
    let (json, csv) = scan_report(config)?;
    write_atomic(&out_dir.join("region.csv"), &csv)?;
    write_atomic(&out_dir.join("region.json"), &json)?;
    Ok(json)
}

fn cmd_solve_area(config: &RunConfig, out_dir: &Path) -> Result<String> {
    let json = solve_area_report(config)?;
    write_atomic(&out_dir.join("solve_area.json"), &json)?;
    Ok(json)
}
