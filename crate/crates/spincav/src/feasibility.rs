//! Adiabatic-condition checking, the pulse-area solver, and the coupling
//! vs pulse-width parameter-plane scan.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{raman_rabi, xy_strength, CavityParams, DeviceSpec, DotParams};
use crate::error::{Error, Result};
use crate::numerics::{integrate_simpson, log_space};
use crate::units::HBAR_MEV_PS;

/// Default ratio threshold interpreting "much greater than".
pub const DEFAULT_MARGIN: f64 = 10.0;
/// Relaxed threshold used when calibrating against gate-time anchors.
pub const CALIBRATION_MARGIN: f64 = 5.0;
/// Default half-width of the gate window in pulse widths; the gate time is
/// `2 * window_w * tau`.
pub const DEFAULT_WINDOW_W: f64 = 3.0;

/// The four adiabatic separation-of-scales conditions. Each is a ratio of
/// a detuning to the scale it must dominate; pulse bandwidth enters every
/// denominator as the floor hbar/tau.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// delta_big / delta_small.
    #[serde(rename = "delta_big_over_delta_small")]
    DeltaBigOverDeltaSmall,
    /// delta_small / max(Omega_peak / 2, hbar/tau).
    #[serde(rename = "delta_small_over_raman")]
    DeltaSmallOverRaman,
    /// (delta_big + delta_small) / max(g_c, hbar/tau).
    #[serde(rename = "cavity_leg_detuning_over_g_c")]
    CavityLegDetuningOverGc,
    /// delta_big / max(g_las_peak, hbar/tau).
    #[serde(rename = "laser_leg_detuning_over_g_las")]
    LaserLegDetuningOverGlas,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::DeltaBigOverDeltaSmall,
        Condition::DeltaSmallOverRaman,
        Condition::CavityLegDetuningOverGc,
        Condition::LaserLegDetuningOverGlas,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::DeltaBigOverDeltaSmall => "delta_big_over_delta_small",
            Condition::DeltaSmallOverRaman => "delta_small_over_raman",
            Condition::CavityLegDetuningOverGc => "cavity_leg_detuning_over_g_c",
            Condition::LaserLegDetuningOverGlas => "laser_leg_detuning_over_g_las",
        }
    }

    pub fn from_name(name: &str) -> Result<Condition> {
        Condition::ALL
            .into_iter()
            .find(|c| c.as_str() == name)
            .ok_or_else(|| {
                Error::validation(format!(
                    "unknown adiabatic condition '{name}' (expected one of: {})",
                    Condition::ALL.map(|c| c.as_str()).join(", ")
                ))
            })
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Threshold policy quantifying "much greater than" as ratio >= m.
/// One default threshold, optionally overridden per condition; every
/// threshold must exceed 1 (a ratio of 1 is no separation at all).
/// `f64::INFINITY` is accepted and makes the condition unsatisfiable.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginPolicy {
    default: f64,
    overrides: BTreeMap<Condition, f64>,
}

fn validate_margin(m: f64) -> Result<()> {
    if m > 1.0 {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "margin threshold must exceed 1 (got {m})"
        )))
    }
}

impl MarginPolicy {
    pub fn uniform(m: f64) -> Result<Self> {
        validate_margin(m)?;
        Ok(MarginPolicy {
            default: m,
            overrides: BTreeMap::new(),
        })
    }

    /// Builder-style per-condition override.
    pub fn with_threshold(mut self, condition: Condition, m: f64) -> Result<Self> {
        validate_margin(m)?;
        self.overrides.insert(condition, m);
        Ok(self)
    }

    pub fn threshold(&self, condition: Condition) -> f64 {
        *self.overrides.get(&condition).unwrap_or(&self.default)
    }

    pub fn default_threshold(&self) -> f64 {
        self.default
    }
}

impl Default for MarginPolicy {
    fn default() -> Self {
        MarginPolicy::uniform(DEFAULT_MARGIN).expect("default margin is valid")
    }
}

/// One evaluated adiabatic condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionRatio {
    pub condition: Condition,
    pub ratio: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

/// Outcome of [`check_adiabatic`]: all four ratios, the overall verdict,
/// and the smallest ratio's name.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// Always the four conditions, in [`Condition::ALL`] order.
    pub ratios: Vec<ConditionRatio>,
    /// True iff every ratio meets its threshold.
    pub feasible: bool,
    /// Condition with the smallest ratio (first on ties).
    pub binding_constraint: Condition,
}

impl FeasibilityReport {
    pub fn min_ratio(&self) -> f64 {
        self.ratios
            .iter()
            .map(|r| r.ratio)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn binding(&self) -> &ConditionRatio {
        self.ratios
            .iter()
            .find(|r| r.condition == self.binding_constraint)
            .expect("binding constraint is one of the four ratios")
    }
}

/// Evaluate the four adiabatic ratios for one dot coupled to the cavity,
/// at the pulse peak, all in meV. The pulse bandwidth floor hbar/tau
/// enters each max() denominator.
pub fn check_adiabatic(
    dot: &DotParams,
    cavity: &CavityParams,
    policy: &MarginPolicy,
) -> Result<FeasibilityReport> {
    dot.validate()?;
    cavity.validate()?;
    if dot.delta_small <= 0.0 {
        return Err(Error::validation(format!(
            "adiabatic ratios need delta_small_meV > 0 (got {})",
            dot.delta_small
        )));
    }
    let floor = HBAR_MEV_PS / dot.tau;
    let omega_peak = raman_rabi(
        cavity.g_c,
        dot.g_las_peak,
        dot.delta_big,
        dot.delta_small,
    )?;
    let ratio_of = |c: Condition| -> f64 {
        match c {
            Condition::DeltaBigOverDeltaSmall => dot.delta_big / dot.delta_small,
            Condition::DeltaSmallOverRaman => {
                dot.delta_small / (omega_peak / 2.0).max(floor)
            }
            Condition::CavityLegDetuningOverGc => {
                (dot.delta_big + dot.delta_small) / cavity.g_c.max(floor)
            }
            Condition::LaserLegDetuningOverGlas => {
                dot.delta_big / dot.g_las_peak.max(floor)
            }
        }
    };
    let ratios: Vec<ConditionRatio> = Condition::ALL
        .into_iter()
        .map(|condition| {
            let ratio = ratio_of(condition);
            let threshold = policy.threshold(condition);
            ConditionRatio {
                condition,
                ratio,
                threshold,
                satisfied: ratio >= threshold,
            }
        })
        .collect();
    let feasible = ratios.iter().all(|r| r.satisfied);
    let binding_constraint = ratios
        .iter()
        .min_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .expect("four ratios")
        .condition;
    Ok(FeasibilityReport {
        ratios,
        feasible,
        binding_constraint,
    })
}

const PULSE_MATCH_TOL: f64 = 1e-9;

fn require_matched_pulses(dot_a: &DotParams, dot_b: &DotParams) -> Result<()> {
    if (dot_a.tau - dot_b.tau).abs() > PULSE_MATCH_TOL
        || (dot_a.t_center - dot_b.t_center).abs() > PULSE_MATCH_TOL
    {
        return Err(Error::validation(
            "pulse area needs simultaneous pulses: tau_ps and t_center_ps must match",
        ));
    }
    if (dot_a.delta_small - dot_b.delta_small).abs() > PULSE_MATCH_TOL {
        return Err(Error::validation(
            "pulse area needs one shared delta_small_meV across both dots",
        ));
    }
    Ok(())
}

/// Analytic full-line pulse area (1/hbar) integral of the effective
/// two-qubit coupling, in radians. The product of the two Gaussian
/// envelopes integrates to tau sqrt(pi), so the area is
/// strength_peak * tau * sqrt(pi) / hbar.
pub fn pulse_area(dot_a: &DotParams, dot_b: &DotParams, cavity: &CavityParams) -> Result<f64> {
    dot_a.validate()?;
    dot_b.validate()?;
    cavity.validate()?;
    require_matched_pulses(dot_a, dot_b)?;
    let om_a = raman_rabi(
        cavity.g_c,
        dot_a.g_las_peak,
        dot_a.delta_big,
        dot_a.delta_small,
    )?;
    let om_b = raman_rabi(
        cavity.g_c,
        dot_b.g_las_peak,
        dot_b.delta_big,
        dot_b.delta_small,
    )?;
    let peak = xy_strength(om_a, om_b, dot_a.delta_small)?;
    Ok(peak * dot_a.tau * std::f64::consts::PI.sqrt() / HBAR_MEV_PS)
}

/// Pulse area by Simpson quadrature over the finite gate window
/// [t_center - w tau, t_center + w tau], in radians. Cross-check for
/// [`pulse_area`]; the relative difference is the window truncation loss.
pub fn pulse_area_simpson(
    dot_a: &DotParams,
    dot_b: &DotParams,
    cavity: &CavityParams,
    window_w: f64,
    n_steps: usize,
) -> Result<f64> {
    dot_a.validate()?;
    dot_b.validate()?;
    cavity.validate()?;
    require_matched_pulses(dot_a, dot_b)?;
    if window_w.is_nan() || window_w <= 0.0 {
        return Err(Error::validation(format!(
            "window half-width must be positive (got {window_w})"
        )));
    }
    if n_steps == 0 {
        return Err(Error::validation("quadrature needs at least one interval"));
    }
    let spec = DeviceSpec {
        dots: vec![dot_a.clone(), dot_b.clone()],
        cavity: cavity.clone(),
    };
    let f = |t: f64| spec.xy_strength_at(t).expect("validated spec") / HBAR_MEV_PS;
    let half = window_w * dot_a.tau;
    Ok(integrate_simpson(
        f,
        dot_a.t_center - half,
        dot_a.t_center + half,
        n_steps,
    ))
}

/// Peak laser coupling (meV) that makes the analytic [`pulse_area`] equal
/// `target`, identical on both dots:
/// g_las = sqrt(2 delta_small hbar target / (tau sqrt(pi)))
///         / (g_c (1/delta_big + 1/(delta_big + delta_small))).
pub fn solve_g_las_for_area(
    target: f64,
    delta_big: f64,
    delta_small: f64,
    g_c: f64,
    tau: f64,
) -> Result<f64> {
    for (name, v) in [
        ("area target", target),
        ("delta_big_meV", delta_big),
        ("delta_small_meV", delta_small),
        ("g_c_meV", g_c),
        ("tau_ps", tau),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::validation(format!(
                "{name} must be positive and finite (got {v})"
            )));
        }
    }
    let leg_sum = 1.0 / delta_big + 1.0 / (delta_big + delta_small);
    let num = (2.0 * delta_small * HBAR_MEV_PS * target / (tau * std::f64::consts::PI.sqrt()))
        .sqrt();
    Ok(num / (g_c * leg_sum))
}

/// Search bounds and densities for the per-cell (delta_big, delta_small)
/// grid search of [`scan_plane`].
#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// (lo, hi) in meV.
    pub delta_big_bounds: (f64, f64),
    /// (lo, hi) in meV.
    pub delta_small_bounds: (f64, f64),
    /// Candidates needing a laser coupling above this are discarded, meV.
    pub g_las_max: f64,
    /// Log-spaced grid points along delta_big.
    pub n_delta_big: usize,
    /// Log-spaced grid points along delta_small.
    pub n_delta_small: usize,
    pub policy: MarginPolicy,
    /// Pulse area every candidate is solved for, radians.
    pub area_target: f64,
    /// Gate window half-width in pulse widths; gate time is 2 w tau.
    pub window_w: f64,
}

impl SearchConfig {
    pub fn with_policy(policy: MarginPolicy) -> Self {
        SearchConfig {
            delta_big_bounds: (1.0, 50.0),
            delta_small_bounds: (0.1, 5.0),
            g_las_max: 10.0,
            n_delta_big: 40,
            n_delta_small: 40,
            policy,
            area_target: 2.0 * std::f64::consts::PI,
            window_w: DEFAULT_WINDOW_W,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("delta_big_meV", self.delta_big_bounds),
            ("delta_small_meV", self.delta_small_bounds),
        ] {
            if !(lo > 0.0 && lo.is_finite() && hi.is_finite()) {
                return Err(Error::validation(format!(
                    "{name} search bounds must be positive and finite (got [{lo}, {hi}])"
                )));
            }
            if lo >= hi {
                return Err(Error::validation(format!(
                    "{name} search bounds need lower < upper (got [{lo}, {hi}])"
                )));
            }
        }
        if self.g_las_max.is_nan() || self.g_las_max <= 0.0 {
            return Err(Error::validation(format!(
                "g_las_max_meV must be positive (got {})",
                self.g_las_max
            )));
        }
        if self.n_delta_big == 0 || self.n_delta_small == 0 {
            return Err(Error::validation("search grid densities must be >= 1"));
        }
        if self.area_target.is_nan() || self.area_target <= 0.0 {
            return Err(Error::validation(format!(
                "area target must be positive (got {})",
                self.area_target
            )));
        }
        if self.window_w.is_nan() || self.window_w <= 0.0 {
            return Err(Error::validation(format!(
                "window half-width must be positive (got {})",
                self.window_w
            )));
        }
        Ok(())
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig::with_policy(MarginPolicy::default())
    }
}

/// Best detuning/laser choice found for one cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateParams {
    #[serde(rename = "delta_big_meV")]
    pub delta_big: f64,
    #[serde(rename = "delta_small_meV")]
    pub delta_small: f64,
    #[serde(rename = "g_las_meV")]
    pub g_las: f64,
    /// Smallest of the four adiabatic ratios at this candidate.
    pub min_ratio: f64,
}

/// One (g_c, tau) cell of the scanned plane.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellOutcome {
    #[serde(rename = "g_c_meV")]
    pub g_c: f64,
    #[serde(rename = "tau_ps")]
    pub tau: f64,
    /// True iff some in-bounds candidate satisfied every condition.
    pub feasible: bool,
    /// Candidate maximizing the minimum ratio; None when every candidate
    /// needed a laser coupling above the bound.
    pub best: Option<CandidateParams>,
    /// 2 w tau, ps.
    #[serde(rename = "gate_time_ps")]
    pub gate_time: f64,
}

/// Feasibility over the (g_c, tau) plane, cells in row-major order with
/// g_c as the outer axis.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionGrid {
    pub gc_axis: Vec<f64>,
    pub tau_axis: Vec<f64>,
    pub cells: Vec<CellOutcome>,
}

impl RegionGrid {
    pub fn cell(&self, i_gc: usize, i_tau: usize) -> &CellOutcome {
        &self.cells[i_gc * self.tau_axis.len() + i_tau]
    }

    pub fn feasible_cells(&self) -> impl Iterator<Item = &CellOutcome> {
        self.cells.iter().filter(|c| c.feasible)
    }
}

fn validate_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::validation(format!("{name} axis is empty")));
    }
    if axis.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::validation(format!(
            "{name} axis values must be positive and finite"
        )));
    }
    if axis.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation(format!(
            "{name} axis must be strictly increasing"
        )));
    }
    Ok(())
}

/// Scan the (g_c, tau) plane. Each cell independently grid-searches
/// (delta_big, delta_small) over log-spaced candidates, sets the laser
/// coupling so the analytic pulse area hits the target, and keeps the
/// candidate with the largest minimum adiabatic ratio. Cells are evaluated
/// in parallel but keyed by index, so the output layout is deterministic.
pub fn scan_plane(gc_axis: &[f64], tau_axis: &[f64], search: &SearchConfig) -> Result<RegionGrid> {
    validate_axis("g_c", gc_axis)?;
    validate_axis("tau", tau_axis)?;
    search.validate()?;

    let delta_bigs = log_space(
        search.delta_big_bounds.0,
        search.delta_big_bounds.1,
        search.n_delta_big,
    );
    let delta_smalls = log_space(
        search.delta_small_bounds.0,
        search.delta_small_bounds.1,
        search.n_delta_small,
    );

    let n_tau = tau_axis.len();
    let cells: Vec<CellOutcome> = (0..gc_axis.len() * n_tau)
        .into_par_iter()
        .map(|idx| {
            let g_c = gc_axis[idx / n_tau];
            let tau = tau_axis[idx % n_tau];
            scan_cell(g_c, tau, &delta_bigs, &delta_smalls, search)
        })
        .collect::<Result<_>>()?;

    Ok(RegionGrid {
        gc_axis: gc_axis.to_vec(),
        tau_axis: tau_axis.to_vec(),
        cells,
    })
}

fn scan_cell(
    g_c: f64,
    tau: f64,
    delta_bigs: &[f64],
    delta_smalls: &[f64],
    search: &SearchConfig,
) -> Result<CellOutcome> {
    let cavity = CavityParams {
        g_c,
        kappa: 0.0,
        n_max: 1,
    };
    let mut feasible = false;
    let mut best: Option<CandidateParams> = None;
    for &delta_big in delta_bigs {
        for &delta_small in delta_smalls {
            let g_las =
                solve_g_las_for_area(search.area_target, delta_big, delta_small, g_c, tau)?;
            if g_las > search.g_las_max {
                continue;
            }
            let dot = DotParams {
                delta_big,
                delta_small,
                g_las_peak: g_las,
                tau,
                t_center: 0.0,
                gamma_x: 0.0,
            };
            let report = check_adiabatic(&dot, &cavity, &search.policy)?;
            feasible |= report.feasible;
            let min_ratio = report.min_ratio();
            if best.as_ref().is_none_or(|b| min_ratio > b.min_ratio) {
                best = Some(CandidateParams {
                    delta_big,
                    delta_small,
                    g_las,
                    min_ratio,
                });
            }
        }
    }
    Ok(CellOutcome {
        g_c,
        tau,
        feasible,
        best,
        gate_time: 2.0 * search.window_w * tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn worked_dot(g_las_peak: f64) -> DotParams {
        DotParams {
            delta_big: 13.0,
            delta_small: 1.3,
            g_las_peak,
            tau: 25.0,
            t_center: 0.0,
            gamma_x: 0.0,
        }
    }

    fn worked_cavity() -> CavityParams {
        CavityParams {
            g_c: 1.0,
            kappa: 0.0,
            n_max: 2,
        }
    }

    #[test]
    fn worked_point_ratios() {
        let report = check_adiabatic(
            &worked_dot(3.0),
            &worked_cavity(),
            &MarginPolicy::default(),
        )
        .unwrap();
        let expect = [
            10.0,
            5.901587301587302,
            14.3,
            4.333333333333333,
        ];
        for (r, e) in report.ratios.iter().zip(expect) {
            assert!((r.ratio - e).abs() < 1e-12, "{}: {} vs {e}", r.condition, r.ratio);
        }
        assert!(!report.feasible);
        assert_eq!(
            report.binding_constraint,
            Condition::LaserLegDetuningOverGlas
        );
        assert!((report.min_ratio() - 4.333333333333333).abs() < 1e-12);
        // the same point clears a margin of 4
        let relaxed = check_adiabatic(
            &worked_dot(3.0),
            &worked_cavity(),
            &MarginPolicy::uniform(4.0).unwrap(),
        )
        .unwrap();
        assert!(relaxed.feasible);
    }

    #[test]
    fn zero_laser_uses_bandwidth_floor() {
        let report = check_adiabatic(
            &worked_dot(0.0),
            &worked_cavity(),
            &MarginPolicy::default(),
        )
        .unwrap();
        let laser_leg = report
            .ratios
            .iter()
            .find(|r| r.condition == Condition::LaserLegDetuningOverGlas)
            .unwrap();
        assert!((laser_leg.ratio - 493.7619205987414).abs() < 1e-9);
    }

    #[test]
    fn per_condition_override_flips_verdict() {
        let policy = MarginPolicy::uniform(4.0)
            .unwrap()
            .with_threshold(Condition::DeltaSmallOverRaman, 6.0)
            .unwrap();
        let report = check_adiabatic(&worked_dot(3.0), &worked_cavity(), &policy).unwrap();
        assert!(!report.feasible);
        let raman = &report.ratios[1];
        assert_eq!(raman.condition, Condition::DeltaSmallOverRaman);
        assert!(!raman.satisfied);
        // binding stays the smallest ratio, not the failed condition
        assert_eq!(
            report.binding_constraint,
            Condition::LaserLegDetuningOverGlas
        );
    }

    #[test]
    fn margin_must_exceed_one() {
        assert!(MarginPolicy::uniform(1.0).is_err());
        assert!(MarginPolicy::uniform(f64::NAN).is_err());
        assert!(MarginPolicy::uniform(f64::INFINITY).is_ok());
    }

    #[test]
    fn condition_names_round_trip() {
        for c in Condition::ALL {
            assert_eq!(Condition::from_name(c.as_str()).unwrap(), c);
        }
        assert!(Condition::from_name("nonsense").is_err());
    }

    #[test]
    fn area_solver_worked_point() {
        let g_las = solve_g_las_for_area(
            2.0 * std::f64::consts::PI,
            13.0,
            1.3,
            1.0,
            25.0,
        )
        .unwrap();
        assert!((g_las - 3.3544302205782768).abs() < 1e-12);
        let area = pulse_area(&worked_dot(g_las), &worked_dot(g_las), &worked_cavity()).unwrap();
        assert!((area - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn zero_laser_gives_zero_area() {
        let area = pulse_area(&worked_dot(0.0), &worked_dot(0.0), &worked_cavity()).unwrap();
        assert_eq!(area, 0.0);
    }

    #[test]
    fn mismatched_pulses_rejected() {
        let a = worked_dot(3.0);
        let mut b = worked_dot(3.0);
        b.t_center = 1.0;
        assert!(pulse_area(&a, &b, &worked_cavity()).is_err());
        let mut c = worked_dot(3.0);
        c.tau = 26.0;
        assert!(pulse_area(&a, &c, &worked_cavity()).is_err());
    }

    #[test]
    fn quadrature_matches_analytic_to_window_truncation() {
        let g_las = solve_g_las_for_area(
            2.0 * std::f64::consts::PI,
            13.0,
            1.3,
            1.0,
            25.0,
        )
        .unwrap();
        let dot = worked_dot(g_las);
        let analytic = pulse_area(&dot, &dot, &worked_cavity()).unwrap();
        let windowed = pulse_area_simpson(&dot, &dot, &worked_cavity(), 3.0, 2000).unwrap();
        let rel = (analytic - windowed).abs() / analytic;
        assert!(rel < 1e-4, "relative mismatch {rel}");
        // the mismatch is the Gaussian tail beyond 3 pulse widths
        assert!((rel - 2.2090496998639075e-5).abs() < 1e-9);
    }

    #[test]
    fn solver_rejects_nonpositive_inputs() {
        assert!(solve_g_las_for_area(0.0, 13.0, 1.3, 1.0, 25.0).is_err());
        assert!(solve_g_las_for_area(1.0, -1.0, 1.3, 1.0, 25.0).is_err());
        assert!(solve_g_las_for_area(1.0, 13.0, 0.0, 1.0, 25.0).is_err());
        assert!(solve_g_las_for_area(1.0, 13.0, 1.3, 0.0, 25.0).is_err());
        assert!(solve_g_las_for_area(1.0, 13.0, 1.3, 1.0, 0.0).is_err());
    }

    #[test]
    fn scan_single_cell_finds_feasible_point() {
        let search = SearchConfig {
            n_delta_big: 12,
            n_delta_small: 12,
            ..SearchConfig::default()
        };
        let grid = scan_plane(&[1.0], &[300.0], &search).unwrap();
        assert_eq!(grid.cells.len(), 1);
        let cell = grid.cell(0, 0);
        assert!(cell.feasible);
        assert_eq!(cell.gate_time, 1800.0);
        let best = cell.best.as_ref().unwrap();
        assert!(best.min_ratio >= 10.0);
        assert!(best.g_las <= search.g_las_max);
    }

    #[test]
    fn infinite_margin_empties_region() {
        let mut search = SearchConfig::with_policy(
            MarginPolicy::uniform(f64::INFINITY).unwrap(),
        );
        search.n_delta_big = 6;
        search.n_delta_small = 6;
        let grid = scan_plane(&[0.5, 1.0], &[50.0, 150.0], &search).unwrap();
        assert_eq!(grid.cells.len(), 4);
        assert!(grid.feasible_cells().next().is_none());
        // the best candidate is still recorded with its finite ratio
        assert!(grid.cells.iter().all(|c| c.best.is_some()));
    }

    #[test]
    fn scan_rejects_bad_axes() {
        let search = SearchConfig::default();
        assert!(scan_plane(&[], &[10.0], &search).is_err());
        assert!(scan_plane(&[1.0, 1.0], &[10.0], &search).is_err());
        assert!(scan_plane(&[2.0, 1.0], &[10.0], &search).is_err());
        assert!(scan_plane(&[1.0], &[-5.0], &search).is_err());
    }

    #[test]
    fn cells_keyed_by_index() {
        let search = SearchConfig {
            n_delta_big: 4,
            n_delta_small: 4,
            ..SearchConfig::default()
        };
        let gc = [0.5, 1.0, 2.0];
        let tau = [20.0, 80.0];
        let grid = scan_plane(&gc, &tau, &search).unwrap();
        for (i, &g) in gc.iter().enumerate() {
            for (j, &t) in tau.iter().enumerate() {
                let cell = grid.cell(i, j);
                assert_eq!(cell.g_c, g);
                assert_eq!(cell.tau, t);
            }
        }
    }

    proptest! {
        #[test]
        fn ratios_are_scale_invariant(
            delta_big in 1.0f64..50.0,
            delta_small in 0.1f64..5.0,
            g_las in 0.01f64..10.0,
            g_c in 0.05f64..5.0,
            tau in 1.0f64..500.0,
            lambda in 0.1f64..10.0,
        ) {
            let policy = MarginPolicy::default();
            let dot = DotParams {
                delta_big, delta_small, g_las_peak: g_las,
                tau, t_center: 0.0, gamma_x: 0.0,
            };
            let cavity = CavityParams { g_c, kappa: 0.0, n_max: 1 };
            let scaled_dot = DotParams {
                delta_big: delta_big * lambda,
                delta_small: delta_small * lambda,
                g_las_peak: g_las * lambda,
                tau: tau / lambda,
                t_center: 0.0,
                gamma_x: 0.0,
            };
            let scaled_cavity = CavityParams { g_c: g_c * lambda, kappa: 0.0, n_max: 1 };
            let base = check_adiabatic(&dot, &cavity, &policy).unwrap();
            let scaled = check_adiabatic(&scaled_dot, &scaled_cavity, &policy).unwrap();
            for (a, b) in base.ratios.iter().zip(&scaled.ratios) {
                let rel = (a.ratio - b.ratio).abs() / a.ratio;
                prop_assert!(rel < 1e-12, "{}: {} vs {}", a.condition, a.ratio, b.ratio);
            }
            prop_assert_eq!(base.feasible, scaled.feasible);
        }

        #[test]
        fn solver_round_trips(
            target in 0.1f64..20.0,
            delta_big in 1.0f64..50.0,
            delta_small in 0.1f64..5.0,
            g_c in 0.1f64..5.0,
            tau in 5.0f64..200.0,
        ) {
            let g_las = solve_g_las_for_area(target, delta_big, delta_small, g_c, tau).unwrap();
            let dot = DotParams {
                delta_big, delta_small, g_las_peak: g_las,
                tau, t_center: 0.0, gamma_x: 0.0,
            };
            let cavity = CavityParams { g_c, kappa: 0.0, n_max: 1 };
            let area = pulse_area(&dot, &dot, &cavity).unwrap();
            prop_assert!((area - target).abs() / target < 1e-9);
        }

        #[test]
        fn solved_laser_scales_as_inverse_sqrt_tau(
            delta_big in 1.0f64..50.0,
            delta_small in 0.1f64..5.0,
            g_c in 0.1f64..5.0,
            tau in 5.0f64..200.0,
        ) {
            let target = 2.0 * std::f64::consts::PI;
            let base = solve_g_las_for_area(target, delta_big, delta_small, g_c, tau).unwrap();
            let quad = solve_g_las_for_area(target, delta_big, delta_small, g_c, 4.0 * tau).unwrap();
            prop_assert!((base / quad - 2.0).abs() < 1e-12);
        }

        #[test]
        fn infinite_margin_never_feasible(
            delta_big in 1.0f64..50.0,
            delta_small in 0.1f64..5.0,
            g_las in 0.01f64..10.0,
            g_c in 0.05f64..5.0,
            tau in 1.0f64..500.0,
        ) {
            let policy = MarginPolicy::uniform(f64::INFINITY).unwrap();
            let dot = DotParams {
                delta_big, delta_small, g_las_peak: g_las,
                tau, t_center: 0.0, gamma_x: 0.0,
            };
            let cavity = CavityParams { g_c, kappa: 0.0, n_max: 1 };
            let report = check_adiabatic(&dot, &cavity, &policy).unwrap();
            prop_assert!(!report.feasible);
        }
    }
}
