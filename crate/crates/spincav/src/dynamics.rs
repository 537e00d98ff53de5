//! Trajectory runs under any of the three models, virtual-excitation
//! statistics, non-Hermitian decay estimates, the closed-form XY evolution,
//! and gate extraction with fidelities.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::device::{
    build_effective_raman, build_effective_xy, build_full_hamiltonian, classify_slots, DeviceSpec,
    FullHamiltonianParts,
    SlotRole,
};
use crate::error::{Error, Result};
use crate::numerics::integrate_simpson;
use crate::quantum::{propagate, BasisDescriptor, Operator, StateVector, TimeGrid};
use crate::units::HBAR_MEV_PS;

/// Level of description to propagate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Lambda systems + truncated cavity, nothing eliminated.
    Full,
    /// Single dot with the exciton eliminated (qubit x cavity).
    EffectiveRaman,
    /// Two qubits with cavity and excitons eliminated.
    EffectiveXy,
}

impl Model {
    pub fn basis(self, spec: &DeviceSpec) -> Result<BasisDescriptor> {
        match self {
            Model::Full => spec.full_basis(),
            Model::EffectiveRaman => spec.raman_basis(),
            Model::EffectiveXy => Ok(DeviceSpec::xy_basis()),
        }
    }

    fn hamiltonian(self, spec: &DeviceSpec, t: f64) -> Result<Operator> {
        match self {
            Model::Full => build_full_hamiltonian(spec, t),
            Model::EffectiveRaman => build_effective_raman(spec, t),
            Model::EffectiveXy => build_effective_xy(spec, t),
        }
    }

    /// Hamiltonian source for a trajectory. The full model precomputes its
    /// static part once; the effective models are small enough to rebuild.
    fn prepared<'a>(self, spec: &'a DeviceSpec) -> Result<PreparedHamiltonian<'a>> {
        match self {
            Model::Full => Ok(PreparedHamiltonian::Cached(FullHamiltonianParts::build(
                spec,
            )?)),
            _ => Ok(PreparedHamiltonian::Rebuilt(self, spec)),
        }
    }
}

enum PreparedHamiltonian<'a> {
    Cached(FullHamiltonianParts),
    Rebuilt(Model, &'a DeviceSpec),
}

impl PreparedHamiltonian<'_> {
    fn at(&self, t: f64) -> Result<Operator> {
        match self {
            PreparedHamiltonian::Cached(parts) => parts.at(t),
            PreparedHamiltonian::Rebuilt(model, spec) => model.hamiltonian(spec, t),
        }
    }
}

/// No-jump decay rates (as hbar * rate, meV) applied as an anti-Hermitian
/// diagonal: H -> H - (i/2hbar)(kappa a'a + gamma_x sum_k |X><X|_k).
/// With both rates zero the run takes the Hermitian code path, so results
/// are bit-identical to `enabled: false`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayParams {
    pub kappa: f64,
    pub gamma_x: f64,
    pub enabled: bool,
}

impl DecayParams {
    pub fn off() -> Self {
        DecayParams {
            kappa: 0.0,
            gamma_x: 0.0,
            enabled: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.gamma_x.is_finite()) {
            return Err(Error::validation("decay rates must be finite"));
        }
        if self.kappa < 0.0 || self.gamma_x < 0.0 {
            return Err(Error::validation(format!(
                "decay rates must be nonnegative (kappa {}, gamma_x {})",
                self.kappa, self.gamma_x
            )));
        }
        Ok(())
    }
}

/// Disjoint per-step population buckets. The buckets partition the basis,
/// so their sum equals the squared norm exactly (to rounding).
#[derive(Clone, Debug)]
pub struct Populations {
    /// One entry per qubit configuration (row-major over dots), restricted
    /// to no-exciton, zero-photon basis states.
    pub qubit: Vec<f64>,
    /// No exciton, at least one photon.
    pub photon: f64,
    /// At least one dot in the exciton level.
    pub exciton_total: f64,
}

impl Populations {
    pub fn total(&self) -> f64 {
        self.qubit.iter().sum::<f64>() + self.photon + self.exciton_total
    }
}

enum Bucket {
    Qubit(usize),
    Photon,
    Exciton,
}

/// Per-flat-index classification and occupation counts for a device basis.
struct IndexMaps {
    buckets: Vec<Bucket>,
    exciton_count: Vec<f64>,
    photon_count: Vec<f64>,
    n_qubit_configs: usize,
}

impl IndexMaps {
    fn build(basis: &BasisDescriptor) -> Result<IndexMaps> {
        let roles = classify_slots(basis)?;
        let n_dots = roles
            .iter()
            .filter(|r| matches!(r, SlotRole::Dot { .. }))
            .count();
        let n_qubit_configs = 1 << n_dots;
        let dim = basis.dim();
        let mut buckets = Vec::with_capacity(dim);
        let mut exciton_count = vec![0.0; dim];
        let mut photon_count = vec![0.0; dim];
        for flat in 0..dim {
            let multi = basis.multi_index(flat);
            let mut excitons = 0usize;
            let mut photons = 0usize;
            let mut config = 0usize;
            let mut config_valid = true;
            for (slot, role) in roles.iter().enumerate() {
                match role {
                    SlotRole::Cavity => photons += multi[slot],
                    SlotRole::Dot { exciton } => {
                        if Some(multi[slot]) == *exciton {
                            excitons += 1;
                            config_valid = false;
                        } else {
                            config = config * 2 + multi[slot];
                        }
                    }
                }
            }
            exciton_count[flat] = excitons as f64;
            photon_count[flat] = photons as f64;
            buckets.push(if excitons > 0 {
                Bucket::Exciton
            } else if photons > 0 {
                Bucket::Photon
            } else {
                debug_assert!(config_valid && config < n_qubit_configs);
                Bucket::Qubit(config)
            });
        }
        Ok(IndexMaps {
            buckets,
            exciton_count,
            photon_count,
            n_qubit_configs,
        })
    }

    fn populations(&self, state: &StateVector) -> Populations {
        let mut pops = Populations {
            qubit: vec![0.0; self.n_qubit_configs],
            photon: 0.0,
            exciton_total: 0.0,
        };
        for (flat, amp) in state.amplitudes().iter().enumerate() {
            let p = amp.norm_sqr();
            match self.buckets[flat] {
                Bucket::Qubit(c) => pops.qubit[c] += p,
                Bucket::Photon => pops.photon += p,
                Bucket::Exciton => pops.exciton_total += p,
            }
        }
        pops
    }

    /// (<sum_k |X><X|_k>, <a'a>) for one state.
    fn occupation_expectations(&self, state: &StateVector) -> (f64, f64) {
        let mut exc = 0.0;
        let mut ph = 0.0;
        for (flat, amp) in state.amplitudes().iter().enumerate() {
            let p = amp.norm_sqr();
            exc += p * self.exciton_count[flat];
            ph += p * self.photon_count[flat];
        }
        (exc, ph)
    }
}

/// Time grid, state snapshots, derived populations, and per-step norm of
/// one model run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: TimeGrid,
    states: Vec<StateVector>,
    populations: Vec<Populations>,
    norm: Vec<f64>,
}

impl Trajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn populations(&self) -> &[Populations] {
        &self.populations
    }

    /// 2-norm of the state at each grid point.
    pub fn norm(&self) -> &[f64] {
        &self.norm
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory holds >= 1 state")
    }
}

/// Propagate `psi0` under the chosen model. With decay enabled the
/// evolution is non-Hermitian and the norm is non-increasing; 1 - final
/// squared norm estimates the total leakage/decoherence probability.
pub fn run_model(
    model: Model,
    spec: &DeviceSpec,
    psi0: &StateVector,
    grid: &TimeGrid,
    decay: &DecayParams,
) -> Result<Trajectory> {
    spec.validate()?;
    decay.validate()?;
    let basis = model.basis(spec)?;
    if psi0.basis() != &basis {
        return Err(Error::validation(
            "initial state basis does not match the model basis",
        ));
    }
    let maps = IndexMaps::build(&basis)?;

    // anti-Hermitian diagonal, angular units; zero-rate channels vanish so
    // a fully zero diagonal falls back to the Hermitian path
    let decay_diag: Option<DVector<f64>> = if decay.enabled {
        let mut d = DVector::zeros(basis.dim());
        for flat in 0..basis.dim() {
            d[flat] = (decay.kappa * maps.photon_count[flat]
                + decay.gamma_x * maps.exciton_count[flat])
                / HBAR_MEV_PS;
        }
        if d.iter().any(|&x| x != 0.0) {
            Some(d)
        } else {
            None
        }
    } else {
        None
    };

    let prepared = model.prepared(spec)?;
    let h_of_t = |t: f64| -> Result<Operator> {
        let h = prepared.at(t)?;
        match &decay_diag {
            None => Ok(h),
            Some(d) => {
                let mut m = h.matrix().clone();
                for i in 0..m.nrows() {
                    m[(i, i)] -= C64::new(0.0, 0.5 * d[i]);
                }
                Operator::new(m, false)
            }
        }
    };

    let run = propagate(h_of_t, psi0, grid)?;
    let populations: Vec<Populations> = run.states.iter().map(|s| maps.populations(s)).collect();
    let norm: Vec<f64> = run.states.iter().map(|s| s.norm()).collect();
    for (p, n) in populations.iter().zip(&norm) {
        debug_assert!((p.total() - n * n).abs() < 1e-9);
    }
    Ok(Trajectory {
        grid: run.grid,
        states: run.states,
        populations,
        norm,
    })
}

/// Per-step maxima of the exciton occupation expectation sum_k <|X><X|_k>
/// and the photon number <a'a> along a trajectory.
pub fn virtual_population_stats(traj: &Trajectory) -> (f64, f64) {
    let maps = IndexMaps::build(traj.states[0].basis())
        .expect("trajectory bases come from device constructors");
    let mut max_exc = 0.0f64;
    let mut max_ph = 0.0f64;
    for state in &traj.states {
        let (exc, ph) = maps.occupation_expectations(state);
        max_exc = max_exc.max(exc);
        max_ph = max_ph.max(ph);
    }
    (max_exc, max_ph)
}

/// Excitation-weighted effective coherent window,
/// 1 / (max_exciton gamma_x / hbar + max_photon kappa / hbar), in ps.
/// Returns infinity when both products vanish.
pub fn decoherence_dilation(
    max_exciton: f64,
    max_photon: f64,
    kappa: f64,
    gamma_x: f64,
) -> Result<f64> {
    if kappa < 0.0 || gamma_x < 0.0 || max_exciton < 0.0 || max_photon < 0.0 {
        return Err(Error::validation(
            "decoherence_dilation inputs must be nonnegative",
        ));
    }
    let rate = (max_exciton * gamma_x + max_photon * kappa) / HBAR_MEV_PS;
    if rate == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(1.0 / rate)
    }
}

/// Closed-form XY evolution by angle theta on the two-qubit basis
/// {|00>, |01>, |10>, |11>}:
/// |01> -> cos(theta/2)|01> - i sin(theta/2)|10> (and symmetrically),
/// |00> and |11> unchanged.
pub fn analytic_xy_evolution(theta: f64, psi0: &StateVector) -> Result<StateVector> {
    if psi0.dim() != 4 {
        return Err(Error::validation(format!(
            "analytic XY evolution needs the 4-dim two-qubit space (got dim {})",
            psi0.dim()
        )));
    }
    let gate = analytic_xy_gate(theta);
    let amps = &gate * psi0.amplitudes();
    StateVector::new(psi0.basis().clone(), amps)
}

/// Matrix of [`analytic_xy_evolution`] on {|00>, |01>, |10>, |11>}.
pub fn analytic_xy_gate(theta: f64) -> DMatrix<C64> {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(theta / 2.0).sin());
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    DMatrix::from_row_slice(
        4,
        4,
        &[
            one, zero, zero, zero, //
            zero, c, s, zero, //
            zero, s, c, zero, //
            zero, zero, zero, one,
        ],
    )
}

/// Simulated 4x4 gate on {|00>, |01>, |10>, |11>} plus diagnostics.
#[derive(Clone, Debug)]
pub struct GateResult {
    /// Final amplitudes of each computational basis launch, projected back
    /// onto the qubit (x) vacuum subspace, with the analytically known
    /// second-order diagonal (AC-Stark / photon-elimination) phases removed
    /// (see [`extract_gate`]).
    pub unitary: DMatrix<C64>,
    /// (1/hbar) integral of the effective XY coupling over the run window,
    /// by Simpson quadrature on the grid. Radians.
    pub theta_accumulated: f64,
    /// Phase-insensitive fidelity of `unitary` against the closed-form XY
    /// gate at `theta_accumulated`.
    pub fidelity: f64,
    /// Largest exciton occupation expectation over all four launches.
    pub max_exciton_pop: f64,
    /// Largest photon number expectation over all four launches.
    pub max_photon_pop: f64,
    /// 1 - min over launches of the population retained in the qubit (x)
    /// vacuum subspace: decay plus leakage, i.e. the unitarity defect.
    pub norm_loss: f64,
    /// Relative pulse area lost to the finite gate window (1 - windowed
    /// area / infinite-line area); NaN when the two pulses are not aligned.
    pub area_deficit: f64,
    /// Per-dot second-order diagonal phase (radians) removed from rows of
    /// `unitary`; a row gains the sum over dots that sit in |1> in that
    /// basis state.
    pub stark_phases: Vec<f64>,
}

/// Run the four computational basis states |b> (x) |vacuum> through the
/// model, project the finals back onto the qubit (x) vacuum subspace, and
/// report the resulting 4x4 gate.
///
/// For the full model the projected amplitudes still carry the second-order
/// diagonal phases that the effective description drops: the laser AC-Stark
/// shift -G_las^2/Delta per dot in |1>, and the photon-elimination shift
/// +Omega_k^2/(4 delta) per dot in |1>. Both are local-Z, analytically
/// known, and excluded from the gate by multiplying row b with
/// exp(+i sum_{k in b} phi_k), phi_k = (1/hbar) integral of that shift.
/// The removed phases are reported in `stark_phases`.
pub fn extract_gate(
    spec: &DeviceSpec,
    grid: &TimeGrid,
    model: Model,
    decay: &DecayParams,
) -> Result<GateResult> {
    if model == Model::EffectiveRaman {
        return Err(Error::validation(
            "gate extraction needs a two-qubit model (full or effective_xy)",
        ));
    }
    spec.validate_for_xy()?;
    let basis = model.basis(spec)?;

    // flat indices of |b> (x) |vacuum| for b in {00, 01, 10, 11}
    let configs = [[0usize, 0], [0, 1], [1, 0], [1, 1]];
    let mut qubit_vac = [0usize; 4];
    for (i, cfg) in configs.iter().enumerate() {
        let multi: Vec<usize> = match model {
            Model::Full => vec![cfg[0], cfg[1], 0],
            Model::EffectiveXy => vec![cfg[0], cfg[1]],
            Model::EffectiveRaman => unreachable!(),
        };
        qubit_vac[i] = basis.flat_index(&multi)?;
    }

    let mut unitary = DMatrix::<C64>::zeros(4, 4);
    let mut max_exc = 0.0f64;
    let mut max_ph = 0.0f64;
    let mut min_retained = f64::INFINITY;
    for (col, &flat) in qubit_vac.iter().enumerate() {
        let mut amps = DVector::zeros(basis.dim());
        amps[flat] = C64::new(1.0, 0.0);
        let psi0 = StateVector::new(basis.clone(), amps)?;
        let traj = run_model(model, spec, &psi0, grid, decay)?;
        let (exc, ph) = virtual_population_stats(&traj);
        max_exc = max_exc.max(exc);
        max_ph = max_ph.max(ph);
        let finals = traj.final_state();
        let mut retained = 0.0;
        for (row, &rflat) in qubit_vac.iter().enumerate() {
            let amp = finals.amplitudes()[rflat];
            unitary[(row, col)] = amp;
            retained += amp.norm_sqr();
        }
        min_retained = min_retained.min(retained);
    }

    let theta_accumulated = accumulated_theta(spec, grid)?;

    let stark_phases = match model {
        Model::Full => stark_phases(spec, grid)?,
        _ => vec![0.0; spec.dots.len()],
    };
    for (row, cfg) in configs.iter().enumerate() {
        let phi: f64 = cfg
            .iter()
            .zip(&stark_phases)
            .filter(|(&bit, _)| bit == 1)
            .map(|(_, &p)| p)
            .sum();
        if phi != 0.0 {
            let rot = C64::from_polar(1.0, phi);
            for col in 0..4 {
                unitary[(row, col)] *= rot;
            }
        }
    }

    let fidelity = gate_fidelity(&unitary, &analytic_xy_gate(theta_accumulated))?;
    let area_deficit = area_deficit(spec, theta_accumulated);

    Ok(GateResult {
        unitary,
        theta_accumulated,
        fidelity,
        max_exciton_pop: max_exc,
        max_photon_pop: max_ph,
        norm_loss: 1.0 - min_retained,
        area_deficit,
        stark_phases,
    })
}

/// (1/hbar) integral of the effective XY coupling over the grid window.
pub fn accumulated_theta(spec: &DeviceSpec, grid: &TimeGrid) -> Result<f64> {
    spec.validate_for_xy()?;
    let f = |t: f64| {
        spec.xy_strength_at(t).expect("validated spec") / HBAR_MEV_PS
    };
    Ok(integrate_simpson(
        f,
        grid.t_start(),
        grid.t_end(),
        grid.n_steps(),
    ))
}

fn stark_phases(spec: &DeviceSpec, grid: &TimeGrid) -> Result<Vec<f64>> {
    let delta_small = spec.dots[0].delta_small;
    spec.dots
        .iter()
        .map(|dot| {
            let shift = |t: f64| {
                let g = dot.g_las_at(t);
                let omega = dot
                    .raman_rabi_at(spec.cavity.g_c, t)
                    .expect("validated spec");
                (-g * g / dot.delta_big + omega * omega / (4.0 * delta_small)) / HBAR_MEV_PS
            };
            Ok(integrate_simpson(
                shift,
                grid.t_start(),
                grid.t_end(),
                grid.n_steps(),
            ))
        })
        .collect()
}

fn area_deficit(spec: &DeviceSpec, theta_windowed: f64) -> f64 {
    let (a, b) = (&spec.dots[0], &spec.dots[1]);
    if (a.tau - b.tau).abs() > 1e-9 || (a.t_center - b.t_center).abs() > 1e-9 {
        return f64::NAN;
    }
    let peak = match spec.xy_strength_at(a.t_center) {
        Ok(v) => v,
        Err(_) => return f64::NAN,
    };
    let infinite = peak * a.tau * std::f64::consts::PI.sqrt() / HBAR_MEV_PS;
    if infinite == 0.0 {
        return f64::NAN;
    }
    1.0 - theta_windowed / infinite
}

/// Phase-insensitive fidelity |Tr(u_target' u_sim)|^2 / 16, clipped to
/// [0, 1]. A global phase on either argument drops out.
pub fn gate_fidelity(u_sim: &DMatrix<C64>, u_target: &DMatrix<C64>) -> Result<f64> {
    if u_sim.shape() != (4, 4) || u_target.shape() != (4, 4) {
        return Err(Error::validation(format!(
            "gate fidelity expects 4x4 matrices (got {:?} and {:?})",
            u_sim.shape(),
            u_target.shape()
        )));
    }
    let tr = (u_target.adjoint() * u_sim).trace();
    Ok((tr.norm_sqr() / 16.0).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{CavityParams, DotParams};
    use crate::quantum::BasisDescriptor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn xy_state(amps: [C64; 4]) -> StateVector {
        StateVector::new(DeviceSpec::xy_basis(), DVector::from_row_slice(&amps)).unwrap()
    }

    fn two_dot_spec(g_las_peak: f64, tau: f64, t_center: f64) -> DeviceSpec {
        let dot = DotParams {
            delta_big: 13.0,
            delta_small: 1.3,
            g_las_peak,
            tau,
            t_center,
            gamma_x: 0.0,
        };
        DeviceSpec {
            dots: vec![dot.clone(), dot],
            cavity: CavityParams {
                g_c: 1.0,
                kappa: 0.0,
                n_max: 2,
            },
        }
    }

    #[test]
    fn analytic_examples() {
        let psi01 = xy_state([c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let id = analytic_xy_evolution(0.0, &psi01).unwrap();
        assert!((id.amplitudes()[1] - c(1.0, 0.0)).norm() < 1e-15);

        let pi_turn = analytic_xy_evolution(std::f64::consts::PI, &psi01).unwrap();
        assert!((pi_turn.amplitudes()[2] - c(0.0, -1.0)).norm() < 1e-15);
        assert!(pi_turn.amplitudes()[1].norm() < 1e-15);

        let full_turn = analytic_xy_evolution(2.0 * std::f64::consts::PI, &psi01).unwrap();
        assert!((full_turn.amplitudes()[1] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn xy_run_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let g_las: f64 = rng.gen_range(0.5..4.0);
            let spec = two_dot_spec(g_las, 25.0, 75.0);
            let grid = TimeGrid::new(0.0, 150.0, 24000).unwrap();
            // random single-excitation initial state
            let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let (p, q): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let norm = (a * a + b * b + p * p + q * q).sqrt();
            let psi0 = xy_state([
                c(0.0, 0.0),
                c(a / norm, b / norm),
                c(p / norm, q / norm),
                c(0.0, 0.0),
            ]);
            let traj = run_model(Model::EffectiveXy, &spec, &psi0, &grid, &DecayParams::off())
                .unwrap();
            let theta = accumulated_theta(&spec, &grid).unwrap();
            let oracle = analytic_xy_evolution(theta, &psi0).unwrap();
            let err = (traj.final_state().amplitudes() - oracle.amplitudes())
                .iter()
                .map(|x| x.norm())
                .fold(0.0f64, f64::max);
            assert!(err < 1e-6, "amplitude error {err} at theta {theta}");
        }
    }

    #[test]
    fn xy_confines_population_exactly() {
        let spec = two_dot_spec(3.0, 25.0, 75.0);
        let grid = TimeGrid::new(0.0, 150.0, 500).unwrap();
        let psi0 = xy_state([
            c(0.0, 0.0),
            c(0.6, 0.0),
            c(0.0, 0.8),
            c(0.0, 0.0),
        ]);
        let traj =
            run_model(Model::EffectiveXy, &spec, &psi0, &grid, &DecayParams::off()).unwrap();
        for s in traj.states() {
            assert_eq!(s.amplitudes()[0], c(0.0, 0.0));
            assert_eq!(s.amplitudes()[3], c(0.0, 0.0));
        }
        // |00> and |11> are exactly stationary
        let corners = xy_state([c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.8)]);
        let traj =
            run_model(Model::EffectiveXy, &spec, &corners, &grid, &DecayParams::off()).unwrap();
        for s in traj.states() {
            assert_eq!(s.amplitudes()[0], c(0.6, 0.0));
            assert_eq!(s.amplitudes()[3], c(0.0, 0.8));
        }
    }

    #[test]
    fn full_model_stationary_without_couplings() {
        let mut spec = two_dot_spec(0.0, 25.0, 75.0);
        spec.cavity.g_c = 0.0;
        let basis = spec.full_basis().unwrap();
        let psi0 = StateVector::basis_state(&basis, &[1, 0, 0]).unwrap();
        let grid = TimeGrid::new(0.0, 150.0, 100).unwrap();
        let traj = run_model(Model::Full, &spec, &psi0, &grid, &DecayParams::off()).unwrap();
        let final_amp = traj.final_state().amplitudes()[basis.flat_index(&[1, 0, 0]).unwrap()];
        assert!((final_amp.norm() - 1.0).abs() < 1e-12);
        let (exc, ph) = virtual_population_stats(&traj);
        assert_eq!(exc, 0.0);
        assert_eq!(ph, 0.0);
    }

    #[test]
    fn populations_partition_norm() {
        let spec = two_dot_spec(3.0, 25.0, 75.0);
        let basis = spec.full_basis().unwrap();
        let psi0 = StateVector::basis_state(&basis, &[0, 1, 0]).unwrap();
        let grid = TimeGrid::new(0.0, 150.0, 300).unwrap();
        let traj = run_model(Model::Full, &spec, &psi0, &grid, &DecayParams::off()).unwrap();
        for (p, n) in traj.populations().iter().zip(traj.norm()) {
            assert!((p.total() - n * n).abs() < 1e-9);
        }
        // closed system: norm constant
        for n in traj.norm() {
            assert!((n - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn decay_zero_rates_identical_to_off() {
        let spec = two_dot_spec(3.0, 25.0, 75.0);
        let basis = spec.full_basis().unwrap();
        let psi0 = StateVector::basis_state(&basis, &[0, 1, 0]).unwrap();
        let grid = TimeGrid::new(0.0, 150.0, 200).unwrap();
        let off = run_model(Model::Full, &spec, &psi0, &grid, &DecayParams::off()).unwrap();
        let zeros = run_model(
            Model::Full,
            &spec,
            &psi0,
            &grid,
            &DecayParams {
                kappa: 0.0,
                gamma_x: 0.0,
                enabled: true,
            },
        )
        .unwrap();
        for (a, b) in off
            .final_state()
            .amplitudes()
            .iter()
            .zip(zeros.final_state().amplitudes().iter())
        {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn decay_shrinks_norm_monotonically() {
        let spec = two_dot_spec(3.0, 25.0, 75.0);
        let basis = spec.full_basis().unwrap();
        let psi0 = StateVector::basis_state(&basis, &[0, 1, 0]).unwrap();
        let grid = TimeGrid::new(0.0, 150.0, 200).unwrap();
        let decay = DecayParams {
            kappa: 0.01,
            gamma_x: 0.01,
            enabled: true,
        };
        let traj = run_model(Model::Full, &spec, &psi0, &grid, &decay).unwrap();
        for w in traj.norm().windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(traj.norm().last().unwrap() < &1.0);
    }

    #[test]
    fn gate_fidelity_examples() {
        let target = analytic_xy_gate(2.0 * std::f64::consts::PI);
        assert!((gate_fidelity(&target, &target).unwrap() - 1.0).abs() < 1e-14);
        let phased = &target * c(0.0, 1.0);
        assert!((gate_fidelity(&phased, &target).unwrap() - 1.0).abs() < 1e-14);
        let id = DMatrix::<C64>::identity(4, 4);
        assert!(gate_fidelity(&id, &target).unwrap() < 1e-14);
        let bad = DMatrix::<C64>::identity(3, 3);
        assert!(gate_fidelity(&bad, &target).is_err());
    }

    #[test]
    fn xy_gate_extraction_at_full_turn() {
        // pick the laser peak so the windowed area is ~2*pi
        let tau = 25.0;
        let t_center = 75.0;
        let mut spec = two_dot_spec(1.0, tau, t_center);
        let theta_unit = {
            let grid = TimeGrid::new(0.0, 150.0, 2000).unwrap();
            accumulated_theta(&spec, &grid).unwrap()
        };
        // theta scales with g_las^2
        let scale = (2.0 * std::f64::consts::PI / theta_unit).sqrt();
        for dot in &mut spec.dots {
            dot.g_las_peak = scale;
        }
        let grid = TimeGrid::new(0.0, 150.0, 16000).unwrap();
        let gate = extract_gate(&spec, &grid, Model::EffectiveXy, &DecayParams::off()).unwrap();
        assert!((gate.theta_accumulated - 2.0 * std::f64::consts::PI).abs() < 1e-9);
        let expect = analytic_xy_gate(gate.theta_accumulated);
        let err = (&gate.unitary - &expect)
            .iter()
            .map(|x| x.norm())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-5, "gate deviates from closed form by {err}");
        assert!(gate.fidelity > 1.0 - 1e-9);
        assert!(gate.norm_loss.abs() < 1e-10);
        assert_eq!(gate.stark_phases, vec![0.0, 0.0]);
        assert_eq!(gate.max_exciton_pop, 0.0);
        assert_eq!(gate.max_photon_pop, 0.0);
        // window spans W = 3 pulse widths each side
        assert!((gate.area_deficit - 2.209e-5).abs() < 1e-6);
    }

    #[test]
    fn extract_gate_rejects_raman_model() {
        let spec = two_dot_spec(3.0, 25.0, 75.0);
        let grid = TimeGrid::new(0.0, 150.0, 100).unwrap();
        assert!(extract_gate(&spec, &grid, Model::EffectiveRaman, &DecayParams::off()).is_err());
    }

    #[test]
    fn dilation_examples() {
        assert!(decoherence_dilation(0.0, 0.0, 0.1, 0.1)
            .unwrap()
            .is_infinite());
        // both channels at 1% with per-channel bare window 10 ps
        let kappa = HBAR_MEV_PS / 10.0;
        let w = decoherence_dilation(0.01, 0.01, kappa, kappa).unwrap();
        assert!((w - 500.0).abs() < 1e-9);
        // single channel at 1%: 100x the bare window
        let w = decoherence_dilation(0.0, 0.01, kappa, kappa).unwrap();
        assert!((w - 1000.0).abs() < 1e-9);
        assert!(decoherence_dilation(0.1, 0.1, -1.0, 0.0).is_err());
    }

    #[test]
    fn run_model_rejects_mismatched_state() {
        let spec = two_dot_spec(3.0, 25.0, 75.0);
        let wrong = StateVector::basis_state(
            &BasisDescriptor::new(vec![("dot_a".into(), 2)]).unwrap(),
            &[0],
        )
        .unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 4).unwrap();
        assert!(run_model(Model::Full, &spec, &wrong, &grid, &DecayParams::off()).is_err());
    }
}
