//! Deterministic result emission: fixed 17-significant-digit float
//! formatting, CSV and JSON writers, provenance blocks, and atomic file
//! writes. Identical inputs must produce byte-identical artifacts, so
//! nothing here consults clocks, locales, or iteration order of unordered
//! containers.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64 as C64;
use serde::{Serialize, Serializer};

use crate::device::dot_label;
use crate::dynamics::{Model, Populations, Trajectory};
use crate::encoding::LogicalGateReport;
use crate::error::{Error, Result};
use crate::feasibility::{Condition, ConditionRatio, FeasibilityReport, RegionGrid};
use crate::quantum::BasisDescriptor;

/// Format a float with up to 17 significant digits, trailing zeros
/// trimmed, scientific notation (lowercase e, signed two-digit exponent)
/// when the decimal exponent is below -4 or at least 17. Non-finite values
/// become "nan", "inf", "-inf". 17 digits round-trip every f64 exactly.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp_str) = sci.split_once('e').expect("e-format always has exponent");
    let exp: i32 = exp_str.parse().expect("e-format exponent is an integer");
    if !(-4..17).contains(&exp) {
        let trimmed = mantissa.trim_end_matches('0').trim_end_matches('.');
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{trimmed}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    }
}

/// serde_json formatter routing every float through [`fmt_g17`]
/// (non-finite floats become null, as in the default formatter).
struct G17Formatter;

impl serde_json::ser::Formatter for G17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value.is_finite() {
            writer.write_all(fmt_g17(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize any report to a JSON line with deterministic float text.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, G17Formatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::numerical(format!("report serialization failed: {e}")))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::numerical(format!("report is not UTF-8: {e}")))
}

#[derive(Serialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

fn complex_rows(rows: usize, cols: usize, get: impl Fn(usize, usize) -> C64) -> Vec<Vec<ComplexJson>> {
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| {
                    let c = get(i, j);
                    ComplexJson { re: c.re, im: c.im }
                })
                .collect()
        })
        .collect()
}

/// Serde helper: 2x2 complex matrix as nested arrays of {re, im}.
pub fn serialize_matrix2<S: Serializer>(m: &Matrix2<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    complex_rows(2, 2, |i, j| m[(i, j)]).serialize(s)
}

/// Serde helper: dense complex matrix as nested arrays of {re, im}.
pub fn serialize_cmatrix<S: Serializer>(m: &DMatrix<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    complex_rows(m.nrows(), m.ncols(), |i, j| m[(i, j)]).serialize(s)
}

/// Identification block embedded in every artifact: what configuration
/// produced it (by hash), which defaults were filled in, and the package
/// version. Deliberately no timestamps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub defaults_applied: Vec<String>,
    pub version: String,
}

impl Provenance {
    pub fn new(config_sha256: String, defaults_applied: Vec<String>) -> Self {
        Provenance {
            config_sha256,
            defaults_applied,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    fn csv_comments(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# config_sha256: {}\n", self.config_sha256));
        out.push_str(&format!("# version: {}\n", self.version));
        for d in &self.defaults_applied {
            out.push_str(&format!("# default: {d}\n"));
        }
        out
    }
}

/// Binary label of one qubit configuration, first dot most significant.
fn config_label(config: usize, n_dots: usize) -> String {
    (0..n_dots)
        .rev()
        .map(|bit| if config >> bit & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Column label of one basis state: subsystem labels with their level
/// indices, e.g. "dot_a0_dot_b1_cavity0".
fn state_label(basis: &BasisDescriptor, flat: usize) -> String {
    let multi = basis.multi_index(flat);
    basis
        .subsystems()
        .iter()
        .zip(multi)
        .map(|((label, _), idx)| format!("{label}{idx}"))
        .collect::<Vec<_>>()
        .join("_")
}

/// Time-series CSV of a trajectory: per-step time, optional complex
/// amplitudes, the disjoint population buckets, and the state norm.
/// Leading # lines carry the provenance block.
pub fn trajectory_csv(
    traj: &Trajectory,
    with_amplitudes: bool,
    provenance: &Provenance,
) -> String {
    let basis = traj.states()[0].basis();
    let n_dots = basis
        .subsystems()
        .iter()
        .filter(|(l, _)| l != crate::device::LABEL_CAVITY)
        .count();
    let n_configs = 1 << n_dots;

    let mut out = provenance.csv_comments();
    out.push_str("t_ps");
    if with_amplitudes {
        for flat in 0..basis.dim() {
            let label = state_label(basis, flat);
            out.push_str(&format!(",re_{label},im_{label}"));
        }
    }
    out.push_str(",pop_exciton_total,pop_photon");
    for c in 0..n_configs {
        out.push_str(&format!(",pop_{}", config_label(c, n_dots)));
    }
    out.push_str(",norm\n");

    let times = traj.grid().times();
    for (i, state) in traj.states().iter().enumerate() {
        out.push_str(&fmt_g17(times[i]));
        if with_amplitudes {
            for amp in state.amplitudes().iter() {
                out.push(',');
                out.push_str(&fmt_g17(amp.re));
                out.push(',');
                out.push_str(&fmt_g17(amp.im));
            }
        }
        let pops = &traj.populations()[i];
        out.push(',');
        out.push_str(&fmt_g17(pops.exciton_total));
        out.push(',');
        out.push_str(&fmt_g17(pops.photon));
        for &q in &pops.qubit {
            out.push(',');
            out.push_str(&fmt_g17(q));
        }
        out.push(',');
        out.push_str(&fmt_g17(traj.norm()[i]));
        out.push('\n');
    }
    out
}

/// Parameter-plane CSV, one row per cell in grid order (g_c outer, tau
/// inner). Cells whose search found no in-bounds candidate emit nan for
/// the candidate columns.
pub fn region_csv(grid: &RegionGrid, provenance: &Provenance) -> String {
    let mut out = provenance.csv_comments();
    out.push_str(
        "gc_meV,tau_ps,feasible,delta_big_meV,delta_small_meV,g_las_meV,min_ratio,gate_time_ps\n",
    );
    for cell in &grid.cells {
        let (db, ds, gl, mr) = match &cell.best {
            Some(b) => (b.delta_big, b.delta_small, b.g_las, b.min_ratio),
            None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_g17(cell.g_c),
            fmt_g17(cell.tau),
            u8::from(cell.feasible),
            fmt_g17(db),
            fmt_g17(ds),
            fmt_g17(gl),
            fmt_g17(mr),
            fmt_g17(cell.gate_time),
        ));
    }
    out
}

/// Write a file via a same-directory temp file and rename, so readers
/// never observe a partial artifact.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::validation(format!("not a file path: {}", path.display())))?
        .to_string_lossy()
        .into_owned();
    let tmp = path.with_file_name(format!("{file_name}.tmp.{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Population buckets of the final state, keyed like the CSV columns.
#[derive(Clone, Debug, Serialize)]
pub struct PopulationsJson {
    #[serde(flatten)]
    pub qubit: BTreeMap<String, f64>,
    pub pop_photon: f64,
    pub pop_exciton_total: f64,
}

impl PopulationsJson {
    pub fn from_populations(pops: &Populations) -> Self {
        let n_dots = pops.qubit.len().trailing_zeros() as usize;
        let qubit = pops
            .qubit
            .iter()
            .enumerate()
            .map(|(c, &p)| (format!("pop_{}", config_label(c, n_dots)), p))
            .collect();
        PopulationsJson {
            qubit,
            pop_photon: pops.photon,
            pop_exciton_total: pops.exciton_total,
        }
    }
}

/// JSON summary of a `simulate` run.
#[derive(Serialize)]
pub struct SimulateSummary {
    pub provenance: Provenance,
    pub model: Model,
    pub initial_state: String,
    pub t_start_ps: f64,
    pub t_end_ps: f64,
    pub n_steps: usize,
    /// Quadrature of the effective coupling over the simulated window;
    /// absent for single-dot models.
    pub theta_accumulated_rad: Option<f64>,
    /// Analytic full-line pulse area (solver target); absent for
    /// single-dot models.
    pub pulse_area_rad: Option<f64>,
    pub max_exciton_pop: f64,
    pub max_photon_pop: f64,
    pub final_norm: f64,
    /// 1 - squared final norm: total decay/leakage probability.
    pub norm_loss: f64,
    pub final_populations: PopulationsJson,
    /// Effective coherent window at the observed virtual populations;
    /// null when both decay channels are off or the window is unbounded.
    pub decoherence_dilation_ps: Option<f64>,
}

/// JSON report of a `gate` run.
#[derive(Serialize)]
pub struct GateReportJson {
    pub provenance: Provenance,
    pub model: Model,
    pub theta_accumulated_rad: f64,
    /// Analytic full-line pulse area; absent when the two pulses are not
    /// aligned in time.
    pub pulse_area_rad: Option<f64>,
    pub fidelity_vs_ideal: f64,
    pub max_exciton_pop: f64,
    pub max_photon_pop: f64,
    pub norm_loss: f64,
    pub area_deficit: f64,
    pub stark_phases_rad: Vec<f64>,
    #[serde(serialize_with = "serialize_cmatrix")]
    pub unitary: DMatrix<C64>,
    pub logical: LogicalGateReport,
    pub decoherence_dilation_ps: Option<f64>,
}

/// Per-dot adiabatic report within [`CheckReportJson`].
#[derive(Serialize)]
pub struct DotCheckJson {
    pub dot: String,
    pub ratios: Vec<ConditionRatio>,
    pub feasible: bool,
    pub binding_constraint: Condition,
    pub min_ratio: f64,
}

impl DotCheckJson {
    pub fn from_report(dot_index: usize, report: &FeasibilityReport) -> Self {
        DotCheckJson {
            dot: dot_label(dot_index),
            ratios: report.ratios.clone(),
            feasible: report.feasible,
            binding_constraint: report.binding_constraint,
            min_ratio: report.min_ratio(),
        }
    }
}

/// JSON report of a `check` run: per-dot reports plus the overall verdict.
#[derive(Serialize)]
pub struct CheckReportJson {
    pub provenance: Provenance,
    pub dots: Vec<DotCheckJson>,
    pub feasible: bool,
    pub min_ratio: f64,
    pub binding_constraint: Condition,
}

impl CheckReportJson {
    pub fn new(provenance: Provenance, reports: &[FeasibilityReport]) -> Self {
        assert!(!reports.is_empty());
        let dots: Vec<DotCheckJson> = reports
            .iter()
            .enumerate()
            .map(|(k, r)| DotCheckJson::from_report(k, r))
            .collect();
        let worst = dots
            .iter()
            .min_by(|a, b| a.min_ratio.total_cmp(&b.min_ratio))
            .expect("nonempty");
        CheckReportJson {
            feasible: dots.iter().all(|d| d.feasible),
            min_ratio: worst.min_ratio,
            binding_constraint: worst.binding_constraint,
            provenance,
            dots,
        }
    }
}

/// JSON report of a `scan` run; mirrors the CSV cell-for-cell.
#[derive(Serialize)]
pub struct ScanReportJson<'a> {
    pub provenance: Provenance,
    #[serde(rename = "gc_axis_meV")]
    pub gc_axis: &'a [f64],
    pub tau_axis_ps: &'a [f64],
    pub cells: &'a [crate::feasibility::CellOutcome],
}

/// JSON report of a `solve-area` run.
#[derive(Serialize)]
pub struct SolveAreaJson {
    pub provenance: Provenance,
    #[serde(rename = "g_las_meV")]
    pub g_las: f64,
    pub area_target_rad: f64,
    /// Analytic area recomputed at the solved coupling.
    pub area_roundtrip_rad: f64,
}
