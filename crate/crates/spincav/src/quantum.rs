//! Dense complex linear algebra over labeled tensor-product bases and
//! midpoint-exponential propagation of time-dependent Hamiltonians.
//!
//! Hamiltonians handed to this layer are in angular-frequency units (1/ps);
//! see [`crate::units`]. Dimensions in this crate are tiny (<= ~54), so
//! everything is dense and clarity beats asymptotics.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Ordered list of (label, dimension) subsystems with row-major index maps.
///
/// The flat index composes sub-indices row-major: the first subsystem is the
/// most significant digit. Round-trips between multi-index and flat index are
/// exact bijections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisDescriptor {
    subsystems: Vec<(String, usize)>,
}

impl BasisDescriptor {
    pub fn new(subsystems: Vec<(String, usize)>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::validation("basis needs at least one subsystem"));
        }
        for (label, dim) in &subsystems {
            if *dim == 0 {
                return Err(Error::validation(format!(
                    "subsystem '{label}' has dimension 0"
                )));
            }
        }
        for (i, (label, _)) in subsystems.iter().enumerate() {
            if subsystems[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::validation(format!(
                    "duplicate subsystem label '{label}'"
                )));
            }
        }
        Ok(BasisDescriptor { subsystems })
    }

    pub fn subsystems(&self) -> &[(String, usize)] {
        &self.subsystems
    }

    /// Total Hilbert-space dimension (product of subsystem dimensions).
    pub fn dim(&self) -> usize {
        self.subsystems.iter().map(|(_, d)| d).product()
    }

    /// Position of a labeled subsystem.
    pub fn slot(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::validation(format!("unknown subsystem label '{label}'")))
    }

    pub fn dim_of(&self, slot: usize) -> usize {
        self.subsystems[slot].1
    }

    /// Row-major flat index of a multi-index.
    pub fn flat_index(&self, multi: &[usize]) -> Result<usize> {
        if multi.len() != self.subsystems.len() {
            return Err(Error::validation(format!(
                "multi-index rank {} does not match basis rank {}",
                multi.len(),
                self.subsystems.len()
            )));
        }
        let mut flat = 0;
        for (k, (label, dim)) in self.subsystems.iter().enumerate() {
            if multi[k] >= *dim {
                return Err(Error::validation(format!(
                    "index {} out of range for subsystem '{label}' (dim {dim})",
                    multi[k]
                )));
            }
            flat = flat * dim + multi[k];
        }
        Ok(flat)
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        debug_assert!(flat < self.dim());
        let mut multi = vec![0; self.subsystems.len()];
        let mut rem = flat;
        for (k, (_, dim)) in self.subsystems.iter().enumerate().rev() {
            multi[k] = rem % dim;
            rem /= dim;
        }
        multi
    }
}

/// Complex amplitudes over a labeled tensor basis.
#[derive(Clone, Debug)]
pub struct StateVector {
    amplitudes: DVector<C64>,
    basis: Arc<BasisDescriptor>,
}

impl StateVector {
    pub fn new(basis: BasisDescriptor, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::validation(format!(
                "amplitude length {} does not match basis dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        Ok(StateVector {
            amplitudes,
            basis: Arc::new(basis),
        })
    }

    /// Unit basis ket |multi>.
    pub fn basis_state(basis: &BasisDescriptor, multi: &[usize]) -> Result<Self> {
        let flat = basis.flat_index(multi)?;
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[flat] = C64::new(1.0, 0.0);
        Ok(StateVector {
            amplitudes,
            basis: Arc::new(basis.clone()),
        })
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn basis(&self) -> &BasisDescriptor {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Squared 2-norm (total probability for a closed system).
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    fn with_amplitudes(&self, amplitudes: DVector<C64>) -> Self {
        StateVector {
            amplitudes,
            basis: Arc::clone(&self.basis),
        }
    }
}

/// Dense complex square matrix with an asserted hermiticity flag.
///
/// Constructing with `hermitian = true` verifies max |M - M^H| < 1e-12 in the
/// unit system of the matrix.
#[derive(Clone, Debug)]
pub struct Operator {
    matrix: DMatrix<C64>,
    hermitian: bool,
}

impl Operator {
    pub fn new(matrix: DMatrix<C64>, hermitian: bool) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::validation(format!(
                "operator matrix is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if hermitian {
            let defect = hermiticity_defect(&matrix);
            if defect >= 1e-12 {
                return Err(Error::validation(format!(
                    "hermitian_flag set but max |M - M^H| = {defect:.3e}"
                )));
            }
        }
        Ok(Operator { matrix, hermitian })
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            matrix: DMatrix::identity(dim, dim),
            hermitian: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            matrix: DMatrix::zeros(dim, dim),
            hermitian: true,
        }
    }

    /// Harmonic-ladder annihilator on `dim` Fock levels: a|n> = sqrt(n)|n-1>.
    pub fn annihilator(dim: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for n in 1..dim {
            m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        Operator {
            matrix: m,
            hermitian: false,
        }
    }

    /// |i><j| on a `dim`-level subsystem.
    pub fn ketbra(dim: usize, i: usize, j: usize) -> Result<Self> {
        if i >= dim || j >= dim {
            return Err(Error::validation(format!(
                "ketbra indices ({i},{j}) out of range for dim {dim}"
            )));
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(i, j)] = C64::new(1.0, 0.0);
        Ok(Operator {
            matrix: m,
            hermitian: i == j,
        })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Operator {
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }
}

fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let mut defect = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

/// Uniform time grid over [t_start, t_end] with n_steps intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::validation("time grid endpoints must be finite"));
        }
        if n_steps == 0 {
            return Err(Error::validation("n_steps must be positive"));
        }
        if t_end <= t_start {
            return Err(Error::validation(format!(
                "time grid needs t_end > t_start (got {t_start} .. {t_end})"
            )));
        }
        Ok(TimeGrid {
            t_start,
            t_end,
            n_steps,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps as f64
    }

    /// Grid point i (0 ..= n_steps).
    pub fn time_at(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt()
    }

    /// All n_steps + 1 grid points.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|i| self.time_at(i)).collect()
    }
}

/// op_local acting on `slot`, identity elsewhere, in basis order.
pub fn tensor_embed(op_local: &Operator, slot: &str, basis: &BasisDescriptor) -> Result<Operator> {
    let pos = basis.slot(slot)?;
    let want = basis.dim_of(pos);
    if op_local.dim() != want {
        return Err(Error::validation(format!(
            "operator dimension {} does not match subsystem '{slot}' dimension {want}",
            op_local.dim()
        )));
    }
    let mut acc = DMatrix::identity(1, 1);
    for (k, (_, dim)) in basis.subsystems().iter().enumerate() {
        if k == pos {
            acc = acc.kronecker(op_local.matrix());
        } else {
            acc = acc.kronecker(&DMatrix::<C64>::identity(*dim, *dim));
        }
    }
    Operator::new(acc, op_local.is_hermitian())
}

/// exp(-i H dt) for H in angular-frequency units.
///
/// Hermitian H goes through eigendecomposition (unitary to roundoff for any
/// dt); otherwise scaling-and-squaring on the dense matrix.
pub fn step_propagator(h_mid: &Operator, dt: f64) -> Result<Operator> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::validation(format!("dt must be positive (got {dt})")));
    }
    if h_mid.matrix().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::numerical("Hamiltonian contains non-finite entries"));
    }
    let matrix = if h_mid.is_hermitian() {
        let eig = h_mid.matrix().clone().symmetric_eigen();
        let phases = DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues.iter().map(|&w| C64::from_polar(1.0, -w * dt)),
        );
        let mut scaled = eig.eigenvectors.clone();
        for (j, col) in scaled.column_iter_mut().enumerate() {
            let mut col = col;
            col *= phases[j];
        }
        &scaled * eig.eigenvectors.adjoint()
    } else {
        (h_mid.matrix() * C64::new(0.0, -dt)).exp()
    };
    if matrix.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::numerical("propagator contains non-finite entries"));
    }
    Operator::new(matrix, false)
}

/// Snapshots of a propagated state at every grid point (n_steps + 1 states,
/// the first being psi0 itself).
#[derive(Clone, Debug)]
pub struct Propagation {
    pub grid: TimeGrid,
    pub states: Vec<StateVector>,
}

impl Propagation {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("propagation holds >= 1 state")
    }
}

/// Time-ordered evolution of psi0 under H(t), one midpoint exponential per
/// grid interval (second-order Magnus).
pub fn propagate<F>(mut h_of_t: F, psi0: &StateVector, grid: &TimeGrid) -> Result<Propagation>
where
    F: FnMut(f64) -> Result<Operator>,
{
    let dt = grid.dt();
    let mut states = Vec::with_capacity(grid.n_steps() + 1);
    states.push(psi0.clone());
    let mut psi = psi0.amplitudes().clone();
    for i in 0..grid.n_steps() {
        let t_mid = grid.time_at(i) + 0.5 * dt;
        let h = h_of_t(t_mid)?;
        if h.dim() != psi.len() {
            return Err(Error::validation(format!(
                "Hamiltonian dimension {} does not match state dimension {}",
                h.dim(),
                psi.len()
            )));
        }
        let u = step_propagator(&h, dt)?;
        psi = u.matrix() * &psi;
        states.push(psi0.with_amplitudes(psi.clone()));
    }
    Ok(Propagation {
        grid: grid.clone(),
        states,
    })
}

/// <psi| op |psi>. Real part carries the physics when op is Hermitian (the
/// imaginary part is then < 1e-12 by construction).
pub fn expectation(op: &Operator, psi: &StateVector) -> Result<C64> {
    if op.dim() != psi.dim() {
        return Err(Error::validation(format!(
            "operator dimension {} does not match state dimension {}",
            op.dim(),
            psi.dim()
        )));
    }
    let v = op.matrix() * psi.amplitudes();
    Ok(psi.amplitudes().dotc(&v))
}
