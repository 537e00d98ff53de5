//! Strict JSON configuration: unit-suffixed keys, unknown keys fatal,
//! every filled default echoed into the provenance block.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::device::{CavityParams, DeviceSpec, DotParams};
use crate::dynamics::{DecayParams, Model};
use crate::error::{Error, Result};
use crate::feasibility::{
    Condition, MarginPolicy, SearchConfig, DEFAULT_MARGIN, DEFAULT_WINDOW_W,
};
use crate::numerics::lin_space;
use crate::quantum::TimeGrid;

/// Grid-resolution rule for the default step count: dt <= tau / 200 of the
/// narrowest pulse.
const STEPS_PER_TAU: f64 = 200.0;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    device: RawDevice,
    model: Option<Model>,
    grid: Option<RawGrid>,
    decay: Option<RawDecay>,
    margin: Option<RawMargin>,
    window_w: Option<f64>,
    initial_state: Option<String>,
    scan: Option<RawScan>,
    output: Option<RawOutput>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    dot: RawDot,
    n_dots: Option<usize>,
    dot_overrides: Option<Vec<RawDotOverride>>,
    cavity: RawCavity,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawDot {
    delta_big_meV: f64,
    delta_small_meV: f64,
    g_las_peak_meV: f64,
    tau_ps: f64,
    t_center_ps: Option<f64>,
    gamma_x_meV: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawDotOverride {
    delta_big_meV: Option<f64>,
    delta_small_meV: Option<f64>,
    g_las_peak_meV: Option<f64>,
    tau_ps: Option<f64>,
    t_center_ps: Option<f64>,
    gamma_x_meV: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawCavity {
    g_c_meV: f64,
    kappa_meV: Option<f64>,
    n_max: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t_start_ps: Option<f64>,
    t_end_ps: Option<f64>,
    n_steps: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawDecay {
    enabled: bool,
    kappa_meV: Option<f64>,
    gamma_x_meV: Option<f64>,
}

/// Margin thresholds accept numbers or the strings "inf" / "infinity".
#[derive(Deserialize)]
#[serde(untagged)]
enum MarginValue {
    Number(f64),
    Text(String),
}

impl MarginValue {
    fn to_f64(&self, key: &str) -> Result<f64> {
        match self {
            MarginValue::Number(x) => Ok(*x),
            MarginValue::Text(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" => Ok(f64::INFINITY),
                other => Err(Error::validation(format!(
                    "{key}: expected a number or \"inf\" (got \"{other}\")"
                ))),
            },
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMargin {
    m: Option<MarginValue>,
    overrides: Option<BTreeMap<String, MarginValue>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawScan {
    gc_min_meV: f64,
    gc_max_meV: f64,
    gc_points: usize,
    tau_min_ps: f64,
    tau_max_ps: f64,
    tau_points: usize,
    delta_big_min_meV: Option<f64>,
    delta_big_max_meV: Option<f64>,
    delta_small_min_meV: Option<f64>,
    delta_small_max_meV: Option<f64>,
    g_las_max_meV: Option<f64>,
    delta_big_points: Option<usize>,
    delta_small_points: Option<usize>,
    area_target_rad: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    amplitudes: Option<bool>,
}

/// Scan axes plus the per-cell search settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanSettings {
    pub gc_axis: Vec<f64>,
    pub tau_axis: Vec<f64>,
    pub search: SearchConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub amplitudes: bool,
}

/// Fully validated run configuration with provenance data.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub device: DeviceSpec,
    pub model: Model,
    pub grid: TimeGrid,
    pub decay: DecayParams,
    pub policy: MarginPolicy,
    pub window_w: f64,
    /// Per-dot qubit levels of the launch state, first dot first.
    pub initial_state: Vec<usize>,
    pub scan: Option<ScanSettings>,
    pub output: OutputSettings,
    /// Hex SHA-256 of the raw configuration text.
    pub config_sha256: String,
    /// One entry per default the parser filled in.
    pub defaults_applied: Vec<String>,
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Tracks defaults as they are applied so provenance can echo them.
struct Defaults(Vec<String>);

impl Defaults {
    fn fill<T: Copy>(&mut self, slot: Option<T>, key: &str, value: T, show: impl Fn(T) -> String) -> T {
        match slot {
            Some(v) => v,
            None => {
                self.0.push(format!("{key} = {}", show(value)));
                value
            }
        }
    }

    fn fill_f64(&mut self, slot: Option<f64>, key: &str, value: f64) -> f64 {
        self.fill(slot, key, value, crate::output::fmt_g17)
    }
}

/// Parse, validate, and default-fill a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| Error::validation(format!("config rejected: {e}")))?;
    let config_sha256 = sha256_hex(text);
    let mut defaults = Defaults(Vec::new());

    let model = defaults.fill(raw.model, "model", Model::Full, |m| {
        format!("{:?}", m).to_ascii_lowercase()
    });

    let window_w = defaults.fill_f64(raw.window_w, "window_w", DEFAULT_WINDOW_W);
    if !(window_w > 0.0 && window_w.is_finite()) {
        return Err(Error::validation(format!(
            "window_w > 0 violated (got {window_w})"
        )));
    }

    // dots: template + optional per-dot overrides
    let n_dots = defaults.fill(raw.device.n_dots, "device.n_dots", 2usize, |v| v.to_string());
    if n_dots == 0 || n_dots > 2 {
        return Err(Error::validation(format!(
            "device.n_dots must be 1 or 2 (got {n_dots})"
        )));
    }
    let overrides = match raw.device.dot_overrides {
        None => vec![RawDotOverride::default(), RawDotOverride::default()],
        Some(v) => {
            if v.len() != n_dots {
                return Err(Error::validation(format!(
                    "device.dot_overrides has {} entries but device.n_dots is {n_dots}",
                    v.len()
                )));
            }
            v
        }
    };

    let template = &raw.device.dot;
    let gamma_default = defaults.fill_f64(template.gamma_x_meV, "device.dot.gamma_x_meV", 0.0);

    // timing defaults depend on the pulse widths, so resolve taus first
    let taus: Vec<f64> = overrides
        .iter()
        .take(n_dots)
        .map(|o| o.tau_ps.unwrap_or(template.tau_ps))
        .collect();
    if taus.iter().any(|t| !t.is_finite() || *t <= 0.0) {
        return Err(Error::validation(format!(
            "tau_ps > 0 violated (got {})",
            taus.iter()
                .map(|t| crate::output::fmt_g17(*t))
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    let tau_max = taus.iter().cloned().fold(0.0f64, f64::max);
    let tau_min = taus.iter().cloned().fold(f64::INFINITY, f64::min);

    let raw_grid = raw.grid.unwrap_or(RawGrid {
        t_start_ps: None,
        t_end_ps: None,
        n_steps: None,
    });
    let t_start = defaults.fill_f64(raw_grid.t_start_ps, "grid.t_start_ps", 0.0);
    let t_end = defaults.fill_f64(
        raw_grid.t_end_ps,
        "grid.t_end_ps",
        t_start + 2.0 * window_w * tau_max,
    );
    if t_end.is_nan() || t_start.is_nan() || t_end <= t_start {
        return Err(Error::validation(format!(
            "grid.t_end_ps > grid.t_start_ps violated (got {t_start} .. {t_end})"
        )));
    }
    let default_steps = ((t_end - t_start) / (tau_min / STEPS_PER_TAU)).ceil() as usize;
    let n_steps = defaults.fill(raw_grid.n_steps, "grid.n_steps", default_steps.max(1), |v| {
        v.to_string()
    });
    let grid = TimeGrid::new(t_start, t_end, n_steps)?;

    let t_center_default = 0.5 * (t_start + t_end);
    let shared_t_center = defaults.fill_f64(
        template.t_center_ps,
        "device.dot.t_center_ps",
        t_center_default,
    );

    let dots: Vec<DotParams> = overrides
        .iter()
        .take(n_dots)
        .map(|o| DotParams {
            delta_big: o.delta_big_meV.unwrap_or(template.delta_big_meV),
            delta_small: o.delta_small_meV.unwrap_or(template.delta_small_meV),
            g_las_peak: o.g_las_peak_meV.unwrap_or(template.g_las_peak_meV),
            tau: o.tau_ps.unwrap_or(template.tau_ps),
            t_center: o.t_center_ps.unwrap_or(shared_t_center),
            gamma_x: o.gamma_x_meV.unwrap_or(gamma_default),
        })
        .collect();

    let kappa = defaults.fill_f64(raw.device.cavity.kappa_meV, "device.cavity.kappa_meV", 0.0);
    let n_max = defaults.fill(raw.device.cavity.n_max, "device.cavity.n_max", 2usize, |v| {
        v.to_string()
    });
    let device = DeviceSpec {
        dots,
        cavity: CavityParams {
            g_c: raw.device.cavity.g_c_meV,
            kappa,
            n_max,
        },
    };
    device.validate()?;

    // decay: disabled by default; rates inherit the device values unless
    // the decay block overrides them
    let decay = match raw.decay {
        None => {
            defaults.0.push("decay.enabled = false".to_string());
            DecayParams::off()
        }
        Some(d) => {
            let kappa = match d.kappa_meV {
                Some(k) => k,
                None => {
                    defaults.0.push(format!(
                        "decay.kappa_meV = {} (from device.cavity.kappa_meV)",
                        crate::output::fmt_g17(device.cavity.kappa)
                    ));
                    device.cavity.kappa
                }
            };
            let gamma_x = match d.gamma_x_meV {
                Some(g) => g,
                None => {
                    let first = device.dots[0].gamma_x;
                    if device.dots.iter().any(|dot| dot.gamma_x != first) {
                        return Err(Error::validation(
                            "decay.gamma_x_meV must be given explicitly when dots have \
                             different gamma_x_meV values",
                        ));
                    }
                    defaults.0.push(format!(
                        "decay.gamma_x_meV = {} (from device.dot.gamma_x_meV)",
                        crate::output::fmt_g17(first)
                    ));
                    first
                }
            };
            let decay = DecayParams {
                kappa,
                gamma_x,
                enabled: d.enabled,
            };
            decay.validate()?;
            decay
        }
    };

    // margin policy
    let raw_margin = raw.margin.unwrap_or(RawMargin {
        m: None,
        overrides: None,
    });
    let m = match raw_margin.m {
        Some(v) => v.to_f64("margin.m")?,
        None => {
            defaults
                .0
                .push(format!("margin.m = {}", crate::output::fmt_g17(DEFAULT_MARGIN)));
            DEFAULT_MARGIN
        }
    };
    let mut policy = MarginPolicy::uniform(m)
        .map_err(|e| Error::validation(format!("margin.m invalid: {e}")))?;
    if let Some(overrides) = raw_margin.overrides {
        for (name, value) in overrides {
            let condition = Condition::from_name(&name)
                .map_err(|e| Error::validation(format!("margin.overrides: {e}")))?;
            let v = value.to_f64(&format!("margin.overrides.{name}"))?;
            policy = policy
                .with_threshold(condition, v)
                .map_err(|e| Error::validation(format!("margin.overrides.{name} invalid: {e}")))?;
        }
    }

    // launch state: one qubit level character per dot
    let initial_default = if n_dots == 2 { "01" } else { "1" };
    let initial_text = match raw.initial_state {
        Some(s) => s,
        None => {
            defaults
                .0
                .push(format!("initial_state = \"{initial_default}\""));
            initial_default.to_string()
        }
    };
    if initial_text.len() != n_dots || !initial_text.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::validation(format!(
            "initial_state must be {n_dots} characters of 0/1 (got \"{initial_text}\")"
        )));
    }
    let initial_state: Vec<usize> = initial_text.bytes().map(|b| (b - b'0') as usize).collect();

    // scan settings
    let scan = match raw.scan {
        None => None,
        Some(s) => {
            let mut search = SearchConfig::with_policy(policy.clone());
            search.window_w = window_w;
            search.delta_big_bounds = (
                defaults.fill_f64(s.delta_big_min_meV, "scan.delta_big_min_meV", 1.0),
                defaults.fill_f64(s.delta_big_max_meV, "scan.delta_big_max_meV", 50.0),
            );
            search.delta_small_bounds = (
                defaults.fill_f64(s.delta_small_min_meV, "scan.delta_small_min_meV", 0.1),
                defaults.fill_f64(s.delta_small_max_meV, "scan.delta_small_max_meV", 5.0),
            );
            search.g_las_max = defaults.fill_f64(s.g_las_max_meV, "scan.g_las_max_meV", 10.0);
            search.n_delta_big = defaults.fill(s.delta_big_points, "scan.delta_big_points", 40, |v| v.to_string());
            search.n_delta_small = defaults.fill(s.delta_small_points, "scan.delta_small_points", 40, |v| v.to_string());
            search.area_target = defaults.fill_f64(
                s.area_target_rad,
                "scan.area_target_rad",
                2.0 * std::f64::consts::PI,
            );
            search.validate()?;
            for (axis, lo, hi, points) in [
                ("gc", s.gc_min_meV, s.gc_max_meV, s.gc_points),
                ("tau", s.tau_min_ps, s.tau_max_ps, s.tau_points),
            ] {
                if points == 0 {
                    return Err(Error::validation(format!(
                        "scan.{axis}_points must be >= 1"
                    )));
                }
                if lo.is_nan() || hi.is_nan() || lo <= 0.0 || hi < lo || (points > 1 && hi == lo)
                {
                    return Err(Error::validation(format!(
                        "scan {axis} axis needs 0 < min {} max (got [{lo}, {hi}] with {points} points)",
                        if points > 1 { "<" } else { "<=" }
                    )));
                }
            }
            Some(ScanSettings {
                gc_axis: lin_space(s.gc_min_meV, s.gc_max_meV, s.gc_points),
                tau_axis: lin_space(s.tau_min_ps, s.tau_max_ps, s.tau_points),
                search,
            })
        }
    };

    // output settings
    let raw_output = raw.output.unwrap_or(RawOutput {
        dir: None,
        amplitudes: None,
    });
    let dir = match raw_output.dir {
        Some(d) => PathBuf::from(d),
        None => {
            defaults.0.push("output.dir = \"out\"".to_string());
            PathBuf::from("out")
        }
    };
    let amplitudes = defaults.fill(raw_output.amplitudes, "output.amplitudes", false, |v| {
        v.to_string()
    });

    Ok(RunConfig {
        device,
        model,
        grid,
        decay,
        policy,
        window_w,
        initial_state,
        scan,
        output: OutputSettings { dir, amplitudes },
        config_sha256,
        defaults_applied: defaults.0,
    })
}
