//! Physical parameterization of dots, cavity, and laser pulses, plus the
//! three levels of Hamiltonian description: the full Lambda-system + cavity
//! model, the single-dot Raman model with the exciton eliminated, and the
//! two-qubit XY model with cavity and excitons eliminated.
//!
//! All couplings and detunings are rotating-frame quantities in meV;
//! absolute optical frequencies never enter. Builders return matrices in
//! angular-frequency units (1/ps).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quantum::{tensor_embed, BasisDescriptor, Operator};
use crate::units::HBAR_MEV_PS;

/// Fixed per-dot level layout: two spin ground states and the charged
/// exciton used as the virtual intermediate level. The cavity exchanges a
/// photon on the |0> <-> |X> leg; the laser drives |1> <-> |X> with no
/// photon change.
pub struct LevelScheme;

impl LevelScheme {
    /// |0> = electron spin -1/2.
    pub const Q0: usize = 0;
    /// |1> = electron spin +1/2.
    pub const Q1: usize = 1;
    /// |X> = charged-exciton level.
    pub const EXCITON: usize = 2;
    pub const DIM: usize = 3;
}

pub const LABEL_CAVITY: &str = "cavity";

/// Subsystem label for dot `k` (0-based).
pub fn dot_label(k: usize) -> String {
    match k {
        0 => "dot_a".to_string(),
        1 => "dot_b".to_string(),
        _ => format!("dot_{k}"),
    }
}

/// Per-dot detunings, laser pulse, and exciton decay rate (as hbar * rate).
#[derive(Clone, Debug, PartialEq)]
pub struct DotParams {
    /// Laser-leg detuning Delta from the exciton level, meV.
    pub delta_big: f64,
    /// Two-photon detuning delta between the Raman legs, meV.
    pub delta_small: f64,
    /// Peak laser coupling, meV.
    pub g_las_peak: f64,
    /// Gaussian pulse width, ps.
    pub tau: f64,
    /// Pulse center, ps.
    pub t_center: f64,
    /// Exciton decoherence rate times hbar, meV.
    pub gamma_x: f64,
}

impl DotParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.delta_big,
            self.delta_small,
            self.g_las_peak,
            self.tau,
            self.t_center,
            self.gamma_x,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("dot parameters must be finite"));
        }
        if self.delta_big <= 0.0 {
            return Err(Error::validation(format!(
                "delta_big_meV > 0 violated (got {})",
                self.delta_big
            )));
        }
        if self.delta_big + self.delta_small <= 0.0 {
            return Err(Error::validation(format!(
                "delta_big_meV + delta_small_meV > 0 violated (got {})",
                self.delta_big + self.delta_small
            )));
        }
        if self.tau <= 0.0 {
            return Err(Error::validation(format!(
                "tau_ps > 0 violated (got {})",
                self.tau
            )));
        }
        if self.g_las_peak < 0.0 {
            return Err(Error::validation(format!(
                "g_las_peak_meV >= 0 violated (got {})",
                self.g_las_peak
            )));
        }
        if self.gamma_x < 0.0 {
            return Err(Error::validation(format!(
                "gamma_x_meV >= 0 violated (got {})",
                self.gamma_x
            )));
        }
        Ok(())
    }

    /// Laser envelope at time t, meV.
    pub fn g_las_at(&self, t: f64) -> f64 {
        gaussian_pulse(self.g_las_peak, self.tau, self.t_center, t)
    }

    /// Two-photon Raman coupling at time t, meV.
    pub fn raman_rabi_at(&self, g_c: f64, t: f64) -> Result<f64> {
        raman_rabi(g_c, self.g_las_at(t), self.delta_big, self.delta_small)
    }
}

/// Cavity coupling, linewidth (as hbar * rate), and Fock truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct CavityParams {
    /// Cavity-dot coupling, meV.
    pub g_c: f64,
    /// Cavity linewidth times hbar, meV.
    pub kappa: f64,
    /// Highest retained Fock level (cavity dimension is n_max + 1).
    pub n_max: usize,
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_c.is_finite() && self.kappa.is_finite()) {
            return Err(Error::validation("cavity parameters must be finite"));
        }
        if self.g_c < 0.0 {
            return Err(Error::validation(format!(
                "g_c_meV >= 0 violated (got {})",
                self.g_c
            )));
        }
        if self.kappa < 0.0 {
            return Err(Error::validation(format!(
                "kappa_meV >= 0 violated (got {})",
                self.kappa
            )));
        }
        if self.n_max < 1 {
            return Err(Error::validation("n_max >= 1 violated (got 0)"));
        }
        Ok(())
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }
}

/// One or two dots sharing one cavity mode.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceSpec {
    pub dots: Vec<DotParams>,
    pub cavity: CavityParams,
}

/// Tolerance on the two-photon detuning mismatch between dots, meV.
pub const DELTA_SMALL_MATCH_TOL: f64 = 1e-9;

impl DeviceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dots.is_empty() || self.dots.len() > 2 {
            return Err(Error::validation(format!(
                "device needs 1 or 2 dots (got {})",
                self.dots.len()
            )));
        }
        for dot in &self.dots {
            dot.validate()?;
        }
        self.cavity.validate()
    }

    /// Extra constraints for anything that uses one shared two-photon
    /// detuning across two dots (the XY model and the two-dot full model).
    pub fn validate_for_xy(&self) -> Result<()> {
        self.validate()?;
        if self.dots.len() != 2 {
            return Err(Error::validation(format!(
                "two dots required (got {})",
                self.dots.len()
            )));
        }
        let mismatch = (self.dots[0].delta_small - self.dots[1].delta_small).abs();
        if mismatch > DELTA_SMALL_MATCH_TOL {
            return Err(Error::validation(format!(
                "|delta_small_meV(A) - delta_small_meV(B)| <= 1e-9 violated (got {mismatch:e})"
            )));
        }
        Ok(())
    }

    /// Basis of the full model: one 3-level slot per dot, then the cavity.
    pub fn full_basis(&self) -> Result<BasisDescriptor> {
        let mut subsystems: Vec<(String, usize)> = self
            .dots
            .iter()
            .enumerate()
            .map(|(k, _)| (dot_label(k), LevelScheme::DIM))
            .collect();
        subsystems.push((LABEL_CAVITY.to_string(), self.cavity.fock_dim()));
        BasisDescriptor::new(subsystems)
    }

    /// Basis of the single-dot Raman model: qubit levels only, plus cavity.
    pub fn raman_basis(&self) -> Result<BasisDescriptor> {
        BasisDescriptor::new(vec![
            (dot_label(0), 2),
            (LABEL_CAVITY.to_string(), self.cavity.fock_dim()),
        ])
    }

    /// Basis of the XY model: two qubits, cavity and excitons eliminated.
    pub fn xy_basis() -> BasisDescriptor {
        BasisDescriptor::new(vec![(dot_label(0), 2), (dot_label(1), 2)])
            .expect("static basis is valid")
    }

    /// Effective two-qubit coupling at time t, meV. Two dots required.
    pub fn xy_strength_at(&self, t: f64) -> Result<f64> {
        if self.dots.len() != 2 {
            return Err(Error::validation(format!(
                "two dots required (got {})",
                self.dots.len()
            )));
        }
        let om_a = self.dots[0].raman_rabi_at(self.cavity.g_c, t)?;
        let om_b = self.dots[1].raman_rabi_at(self.cavity.g_c, t)?;
        xy_strength(om_a, om_b, self.dots[0].delta_small)
    }
}

/// Gaussian envelope peak * exp(-(t - t_center)^2 / (2 tau^2)), meV.
/// Total function; callers guarantee tau > 0.
pub fn gaussian_pulse(peak: f64, tau: f64, t_center: f64, t: f64) -> f64 {
    debug_assert!(tau > 0.0);
    let x = (t - t_center) / tau;
    peak * (-0.5 * x * x).exp()
}

/// Two-photon Raman coupling Omega = G_c * G_las * (1/Delta + 1/(Delta + delta)), meV.
pub fn raman_rabi(g_c: f64, g_las: f64, delta_big: f64, delta_small: f64) -> Result<f64> {
    if delta_big <= 0.0 {
        return Err(Error::validation(format!(
            "delta_big_meV > 0 violated (got {delta_big})"
        )));
    }
    if delta_big + delta_small <= 0.0 {
        return Err(Error::validation(format!(
            "delta_big_meV + delta_small_meV > 0 violated (got {})",
            delta_big + delta_small
        )));
    }
    Ok(g_c * g_las * (1.0 / delta_big + 1.0 / (delta_big + delta_small)))
}

/// Effective two-qubit coupling Omega_A * Omega_B / (2 delta), meV.
pub fn xy_strength(omega_a: f64, omega_b: f64, delta_small: f64) -> Result<f64> {
    if delta_small == 0.0 {
        return Err(Error::validation(
            "delta_small_meV must be nonzero for the XY coupling",
        ));
    }
    Ok(omega_a * omega_b / (2.0 * delta_small))
}

fn real(matrix: DMatrix<f64>) -> DMatrix<C64> {
    matrix.map(|x| C64::new(x, 0.0))
}

/// Shared two-photon detuning for the cavity-frame term. Enforces the
/// single-frame constraint for two-dot devices.
fn shared_delta_small(spec: &DeviceSpec) -> Result<f64> {
    if spec.dots.len() == 2 {
        let mismatch = (spec.dots[0].delta_small - spec.dots[1].delta_small).abs();
        if mismatch > DELTA_SMALL_MATCH_TOL {
            return Err(Error::validation(format!(
                "|delta_small_meV(A) - delta_small_meV(B)| <= 1e-9 violated (got {mismatch:e})"
            )));
        }
    }
    Ok(spec.dots[0].delta_small)
}

/// Full rotating-frame Hamiltonian at time t, angular units:
///
/// H/hbar = sum_k [ Delta_k |X><X|_k
///                + G_las_k(t) (|X><1|_k + h.c.)
///                + G_c (a |X><0|_k + h.c.) ]
///        - delta a'a
pub fn build_full_hamiltonian(spec: &DeviceSpec, t: f64) -> Result<Operator> {
    FullHamiltonianParts::build(spec)?.at(t)
}

/// Full-model Hamiltonian split into a time-independent part plus one
/// unit-amplitude laser leg per dot. Only the Gaussian envelope varies
/// along a trajectory, so propagation assembles H(t) from these parts
/// instead of re-embedding every operator at each step.
pub(crate) struct FullHamiltonianParts {
    static_part: DMatrix<C64>,
    /// (|X><1|_k + h.c.) / hbar per dot; scaled by G_las_k(t) on assembly.
    lasers: Vec<DMatrix<C64>>,
    /// Pulse envelope (peak, tau, t_center) per dot.
    pulses: Vec<(f64, f64, f64)>,
}

impl FullHamiltonianParts {
    pub(crate) fn build(spec: &DeviceSpec) -> Result<Self> {
        spec.validate()?;
        let delta_small = shared_delta_small(spec)?;
        let basis = spec.full_basis()?;
        let dim = basis.dim();
        let a_emb =
            tensor_embed(&Operator::annihilator(spec.cavity.fock_dim()), LABEL_CAVITY, &basis)?;
        let mut stat = DMatrix::<C64>::zeros(dim, dim);
        let mut lasers = Vec::with_capacity(spec.dots.len());
        let mut pulses = Vec::with_capacity(spec.dots.len());

        for (k, dot) in spec.dots.iter().enumerate() {
            let label = dot_label(k);
            let proj_x = tensor_embed(
                &Operator::ketbra(LevelScheme::DIM, LevelScheme::EXCITON, LevelScheme::EXCITON)?,
                &label,
                &basis,
            )?;
            stat += proj_x.matrix() * C64::new(dot.delta_big / HBAR_MEV_PS, 0.0);

            // laser leg |1> <-> |X>, no photon change; stored at unit amplitude
            let x_from_1 = tensor_embed(
                &Operator::ketbra(LevelScheme::DIM, LevelScheme::EXCITON, LevelScheme::Q1)?,
                &label,
                &basis,
            )?;
            let up = x_from_1.matrix() * C64::new(1.0 / HBAR_MEV_PS, 0.0);
            lasers.push(&up + up.adjoint());
            pulses.push((dot.g_las_peak, dot.tau, dot.t_center));

            // cavity leg: absorb a photon while promoting |0> -> |X>
            let x_from_0 = tensor_embed(
                &Operator::ketbra(LevelScheme::DIM, LevelScheme::EXCITON, LevelScheme::Q0)?,
                &label,
                &basis,
            )?;
            let cav =
                (a_emb.matrix() * x_from_0.matrix()) * C64::new(spec.cavity.g_c / HBAR_MEV_PS, 0.0);
            stat += &cav + cav.adjoint();
        }

        let number = a_emb.adjoint().matrix() * a_emb.matrix();
        stat += number * C64::new(-delta_small / HBAR_MEV_PS, 0.0);
        Ok(FullHamiltonianParts {
            static_part: stat,
            lasers,
            pulses,
        })
    }

    pub(crate) fn at(&self, t: f64) -> Result<Operator> {
        let mut m = self.static_part.clone();
        for (laser, &(peak, tau, t_center)) in self.lasers.iter().zip(&self.pulses) {
            let g = C64::new(gaussian_pulse(peak, tau, t_center, t), 0.0);
            m.zip_apply(laser, |x, l| *x += l * g);
        }
        Operator::new(m, true)
    }
}

/// Single-dot Raman model with the exciton eliminated, angular units:
/// H/hbar = (Omega(t) / 2 hbar) (a sigma_01 + h.c.), sigma_01 = |1><0|.
pub fn build_effective_raman(spec: &DeviceSpec, t: f64) -> Result<Operator> {
    spec.validate()?;
    if spec.dots.len() != 1 {
        return Err(Error::validation(format!(
            "the Raman model takes one dot (got {})",
            spec.dots.len()
        )));
    }
    let basis = spec.raman_basis()?;
    let omega = spec.dots[0].raman_rabi_at(spec.cavity.g_c, t)?;
    let a_emb = tensor_embed(&Operator::annihilator(spec.cavity.fock_dim()), LABEL_CAVITY, &basis)?;
    let sigma = tensor_embed(&Operator::ketbra(2, 1, 0)?, &dot_label(0), &basis)?;
    let half = (a_emb.matrix() * sigma.matrix()) * C64::new(omega / (2.0 * HBAR_MEV_PS), 0.0);
    Operator::new(&half + half.adjoint(), true)
}

/// Two-qubit XY model, angular units:
/// H/hbar = (Omega~(t) / 2 hbar) (|10><01| + |01><10|).
pub fn build_effective_xy(spec: &DeviceSpec, t: f64) -> Result<Operator> {
    spec.validate_for_xy()?;
    let strength = spec.xy_strength_at(t)? / (2.0 * HBAR_MEV_PS);
    let mut m = DMatrix::<f64>::zeros(4, 4);
    // basis {|00>, |01>, |10>, |11>}
    m[(2, 1)] = strength;
    m[(1, 2)] = strength;
    Operator::new(real(m), true)
}

/// Role of a basis slot, used when deriving populations from amplitudes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SlotRole {
    /// A dot; `exciton` is the local index of the exciton level if present.
    Dot { exciton: Option<usize> },
    Cavity,
}

pub(crate) fn classify_slots(basis: &BasisDescriptor) -> Result<Vec<SlotRole>> {
    basis
        .subsystems()
        .iter()
        .map(|(label, dim)| {
            if label == LABEL_CAVITY {
                Ok(SlotRole::Cavity)
            } else if label.starts_with("dot") {
                match dim {
                    2 => Ok(SlotRole::Dot { exciton: None }),
                    3 => Ok(SlotRole::Dot {
                        exciton: Some(LevelScheme::EXCITON),
                    }),
                    _ => Err(Error::validation(format!(
                        "dot slot '{label}' has unsupported dimension {dim}"
                    ))),
                }
            } else {
                Err(Error::validation(format!(
                    "unrecognized subsystem label '{label}'"
                )))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn one_dot_spec(
        delta_big: f64,
        delta_small: f64,
        g_las_peak: f64,
        g_c: f64,
        n_max: usize,
    ) -> DeviceSpec {
        DeviceSpec {
            dots: vec![DotParams {
                delta_big,
                delta_small,
                g_las_peak,
                tau: 25.0,
                t_center: 0.0,
                gamma_x: 0.0,
            }],
            cavity: CavityParams {
                g_c,
                kappa: 0.0,
                n_max,
            },
        }
    }

    fn two_dot_spec(delta_big: f64, delta_small: f64, g_las_peak: f64, g_c: f64) -> DeviceSpec {
        let dot = DotParams {
            delta_big,
            delta_small,
            g_las_peak,
            tau: 25.0,
            t_center: 0.0,
            gamma_x: 0.0,
        };
        DeviceSpec {
            dots: vec![dot.clone(), dot],
            cavity: CavityParams {
                g_c,
                kappa: 0.0,
                n_max: 1,
            },
        }
    }

    #[test]
    fn gaussian_pulse_examples() {
        assert_eq!(gaussian_pulse(4.2, 25.0, 10.0, 10.0), 4.2);
        let one_sigma = gaussian_pulse(1.0, 25.0, 0.0, 25.0);
        assert!((one_sigma - 0.6065306597126334).abs() < 1e-15);
        let two_sigma = gaussian_pulse(3.0, 25.0, 0.0, 50.0);
        assert!((two_sigma - 0.4060058497098381).abs() < 1e-15);
    }

    #[test]
    fn raman_rabi_examples() {
        assert_eq!(raman_rabi(1.0, 0.0, 13.0, 1.3).unwrap(), 0.0);
        let symmetric = raman_rabi(2.0, 3.0, 12.0, 0.0).unwrap();
        assert!((symmetric - 2.0 * 2.0 * 3.0 / 12.0).abs() < 1e-15);
        let worked = raman_rabi(1.0, 3.0, 13.0, 1.3).unwrap();
        assert!((worked - 0.4405594405594405).abs() < 1e-15);
        assert!(raman_rabi(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(raman_rabi(1.0, 1.0, 13.0, -13.0).is_err());
    }

    #[test]
    fn xy_strength_examples() {
        assert_eq!(xy_strength(0.0, 0.3, 1.3).unwrap(), 0.0);
        let worked = xy_strength(0.4405594405594405, 0.4405594405594405, 1.3).unwrap();
        assert!((worked - 0.07465100794847969).abs() < 1e-15);
        assert!(xy_strength(0.1, 0.1, -1.3).unwrap() < 0.0);
        assert!(xy_strength(0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn full_hamiltonian_decoupled_is_diagonal() {
        let spec = one_dot_spec(13.0, 1.3, 0.0, 0.0, 2);
        let h = build_full_hamiltonian(&spec, 0.0).unwrap();
        let m = h.matrix();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if i != j {
                    assert_eq!(m[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
        let basis = spec.full_basis().unwrap();
        for flat in 0..basis.dim() {
            let idx = basis.multi_index(flat);
            let mut expect = 0.0;
            if idx[0] == LevelScheme::EXCITON {
                expect += 13.0 / HBAR_MEV_PS;
            }
            expect -= 1.3 / HBAR_MEV_PS * idx[1] as f64;
            assert!((m[(flat, flat)].re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn full_hamiltonian_single_dot_nonzero_structure() {
        // one dot, one virtual photon: 6x6 with six off-diagonal entries
        // (laser pairs at both photon numbers, one cavity pair)
        let spec = one_dot_spec(13.0, 1.3, 3.0, 1.0, 1);
        let h = build_full_hamiltonian(&spec, 0.0).unwrap();
        let m = h.matrix();
        assert_eq!(m.nrows(), 6);
        let mut off: Vec<(usize, usize)> = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                if i != j && m[(i, j)].norm() > 0.0 {
                    off.push((i, j));
                }
            }
        }
        off.sort_unstable();
        // basis order |level, n>: 00 01 10 11 X0 X1
        assert_eq!(
            off,
            vec![(1, 4), (2, 4), (3, 5), (4, 1), (4, 2), (5, 3)]
        );
        // laser element G_las / hbar, cavity element G_c / hbar
        assert!((m[(4, 2)].re - 3.0 / HBAR_MEV_PS).abs() < 1e-12);
        assert!((m[(4, 1)].re - 1.0 / HBAR_MEV_PS).abs() < 1e-12);
    }

    #[test]
    fn full_hamiltonian_adjacency_matches_coupling_graph() {
        let spec = two_dot_spec(13.0, 1.3, 3.0, 1.0);
        let basis = spec.full_basis().unwrap();
        let h = build_full_hamiltonian(&spec, 5.0).unwrap();
        let n_dots = 2;
        let cav_slot = n_dots;
        let mut expected = std::collections::BTreeSet::new();
        for i in 0..basis.dim() {
            let mi = basis.multi_index(i);
            for j in 0..basis.dim() {
                if i == j {
                    continue;
                }
                let mj = basis.multi_index(j);
                for k in 0..n_dots {
                    let others_same = (0..n_dots + 1)
                        .filter(|&s| s != k)
                        .all(|s| if s == cav_slot { true } else { mi[s] == mj[s] });
                    if !others_same {
                        continue;
                    }
                    let laser = mi[cav_slot] == mj[cav_slot]
                        && ((mi[k] == 1 && mj[k] == 2) || (mi[k] == 2 && mj[k] == 1));
                    let cavity = (mi[k] == 0
                        && mj[k] == 2
                        && mi[cav_slot] == mj[cav_slot] + 1)
                        || (mi[k] == 2 && mj[k] == 0 && mj[cav_slot] == mi[cav_slot] + 1);
                    if laser || cavity {
                        expected.insert((i, j));
                    }
                }
            }
        }
        let mut actual = std::collections::BTreeSet::new();
        for i in 0..basis.dim() {
            for j in 0..basis.dim() {
                if i != j && h.matrix()[(i, j)].norm() > 0.0 {
                    actual.insert((i, j));
                }
            }
        }
        assert_eq!(actual, expected);
    }

    #[test]
    fn full_hamiltonian_reproduces_raman_coupling_when_far_detuned() {
        // dressed splitting of the degenerate |1,0>/|0,1> pair equals the
        // printed Raman formula at detuning/coupling = 1000
        let delta_big = 13.0;
        let g = 0.013;
        let spec = one_dot_spec(delta_big, 0.0, g, g, 1);
        let h = build_full_hamiltonian(&spec, 0.0).unwrap();
        // single-excitation sector: |1,0>, |0,1>, |X,0> (flat 2, 1, 4)
        let sector = [2usize, 1, 4];
        let mut block = DMatrix::<C64>::zeros(3, 3);
        for (bi, &i) in sector.iter().enumerate() {
            for (bj, &j) in sector.iter().enumerate() {
                block[(bi, bj)] = h.matrix()[(i, j)];
            }
        }
        let eig = block.symmetric_eigen();
        let mut evals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        evals.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
        // the two lowest dressed states are the dark/bright Raman pair;
        // their splitting is the effective coupling
        let splitting = (evals[0] - evals[1]).abs();
        let omega = raman_rabi(g, g, delta_big, 0.0).unwrap() / HBAR_MEV_PS;
        assert!(
            (splitting - omega).abs() / omega < 0.01,
            "splitting {splitting} vs Raman {omega}"
        );
    }

    #[test]
    fn raman_model_examples() {
        let spec = one_dot_spec(13.0, 1.3, 0.0, 1.0, 1);
        let h = build_effective_raman(&spec, 0.0).unwrap();
        assert!(h.matrix().iter().all(|c| c.norm() == 0.0));

        let spec = one_dot_spec(13.0, 1.3, 3.0, 1.0, 1);
        let h = build_effective_raman(&spec, 0.0).unwrap();
        let omega = raman_rabi(1.0, 3.0, 13.0, 1.3).unwrap();
        // basis |q, n>: |0,1> = 1 -> |1,0> = 2
        assert!((h.matrix()[(2, 1)].re - omega / (2.0 * HBAR_MEV_PS)).abs() < 1e-12);
        // |0, vac> is dark
        let col: Vec<C64> = h.matrix().column(0).iter().copied().collect();
        assert!(col.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn raman_model_needs_one_dot() {
        let spec = two_dot_spec(13.0, 1.3, 3.0, 1.0);
        assert!(build_effective_raman(&spec, 0.0).is_err());
    }

    #[test]
    fn xy_model_structure() {
        let spec = two_dot_spec(13.0, 1.3, 3.0, 1.0);
        let h = build_effective_xy(&spec, 0.0).unwrap();
        let strength = spec.xy_strength_at(0.0).unwrap() / (2.0 * HBAR_MEV_PS);
        let nnz = h.matrix().iter().filter(|c| c.norm() > 0.0).count();
        assert_eq!(nnz, 2);
        assert!((h.matrix()[(1, 2)].re - strength).abs() < 1e-15);

        let eig = h.matrix().clone().symmetric_eigen();
        let mut evals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        evals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((evals[0] + strength).abs() < 1e-12);
        assert!(evals[1].abs() < 1e-12);
        assert!(evals[2].abs() < 1e-12);
        assert!((evals[3] - strength).abs() < 1e-12);
    }

    #[test]
    fn xy_model_rejects_mismatched_detunings() {
        let mut spec = two_dot_spec(13.0, 1.3, 3.0, 1.0);
        spec.dots[1].delta_small = 1.4;
        assert!(build_effective_xy(&spec, 0.0).is_err());
        assert!(build_full_hamiltonian(&spec, 0.0).is_err());
    }

    #[test]
    fn validation_errors_name_constraints() {
        let mut spec = one_dot_spec(13.0, 1.3, 3.0, 1.0, 1);
        spec.dots[0].tau = -1.0;
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("tau_ps > 0"), "{err}");

        let mut spec = one_dot_spec(13.0, 1.3, 3.0, 1.0, 1);
        spec.cavity.n_max = 0;
        assert!(spec.validate().is_err());
    }

    proptest! {
        #[test]
        fn prop_builders_are_hermitian(
            delta_big in 0.5f64..40.0,
            delta_small in -0.4f64..4.0,
            g_las in 0.0f64..8.0,
            g_c in 0.0f64..3.0,
            t in -60.0f64..60.0,
            two_dots in proptest::bool::ANY,
        ) {
            let spec = if two_dots {
                two_dot_spec(delta_big, delta_small, g_las, g_c)
            } else {
                one_dot_spec(delta_big, delta_small, g_las, g_c, 2)
            };
            // constructor verifies the hermiticity defect < 1e-12
            let h = build_full_hamiltonian(&spec, t).unwrap();
            prop_assert!(h.is_hermitian());
            if two_dots {
                if delta_small != 0.0 {
                    prop_assert!(build_effective_xy(&spec, t).unwrap().is_hermitian());
                }
            } else {
                prop_assert!(build_effective_raman(&spec, t).unwrap().is_hermitian());
            }
        }
    }
}
