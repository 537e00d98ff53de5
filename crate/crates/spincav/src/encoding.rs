//! Logical qubits over adjacent dot pairs and the logical rotations the
//! two-qubit exchange generates on them.

use nalgebra::{DVector, Matrix2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::device::DeviceSpec;
use crate::dynamics::GateResult;
use crate::quantum::StateVector;

/// Flat indices of the logical span in the 4-dim pair space:
/// logical 0 is |01>, logical 1 is |10>.
const LOGICAL_FLATS: [usize; 2] = [1, 2];

/// Unitarity defect below which a rotation decomposition is reported.
const ROTATION_DEFECT_TOL: f64 = 1e-3;

/// One logical qubit living on a pair of adjacent dots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LogicalQubit {
    /// (first dot, second dot); always adjacent.
    pub dot_pair: (usize, usize),
}

impl LogicalQubit {
    /// Logical qubit on dots (first, first + 1).
    pub fn adjacent(first: usize) -> Self {
        LogicalQubit {
            dot_pair: (first, first + 1),
        }
    }
}

impl Default for LogicalQubit {
    fn default() -> Self {
        LogicalQubit::adjacent(0)
    }
}

/// Logical basis states in the pair space: false -> |01>, true -> |10>.
/// Both are unit vectors in the single-excitation sector.
pub fn encode(bit: bool) -> StateVector {
    let mut amps = DVector::zeros(4);
    amps[LOGICAL_FLATS[bit as usize]] = C64::new(1.0, 0.0);
    StateVector::new(DeviceSpec::xy_basis(), amps).expect("static 4-dim state")
}

/// Axis (unit 3-vector) and angle of a logical rotation, exp(-i(angle/2)
/// axis . sigma) up to global phase. The angle is reported in [0, 2pi];
/// rotations outside that range come back as the equivalent canonical
/// representative (possibly with the axis flipped).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquivalentRotation {
    pub axis: [f64; 3],
    pub angle: f64,
}

/// Action of a physical gate on one logical qubit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogicalGateReport {
    /// The gate compressed onto span{|01>, |10>}, rows/columns in logical
    /// order {0_L, 1_L}. Not assumed unitary; see `unitarity_defect`.
    #[serde(serialize_with = "crate::output::serialize_matrix2")]
    pub logical_2x2: Matrix2<C64>,
    /// 1 - min over logical basis inputs of the population retained in the
    /// logical span.
    pub leakage: f64,
    /// Largest entry of |L'L - I|.
    pub unitarity_defect: f64,
    /// Present when `unitarity_defect` < 1e-3.
    pub equivalent_rotation: Option<EquivalentRotation>,
}

/// Ideal logical action of the exchange accumulated to `theta`: an X_L
/// rotation by that angle,
/// [[cos(theta/2), -i sin(theta/2)], [-i sin(theta/2), cos(theta/2)]].
pub fn logical_rotation_from_theta(theta: f64) -> LogicalGateReport {
    let c = C64::new((theta / 2.0).cos(), 0.0);
    let s = C64::new(0.0, -(theta / 2.0).sin());
    let logical_2x2 = Matrix2::new(c, s, s, c);
    LogicalGateReport {
        logical_2x2,
        leakage: 0.0,
        unitarity_defect: 0.0,
        equivalent_rotation: Some(EquivalentRotation {
            axis: [1.0, 0.0, 0.0],
            angle: theta,
        }),
    }
}

/// Compress a simulated two-qubit gate onto the logical span and, when the
/// block is unitary enough, factor it as an axis-angle rotation (global
/// phase discarded).
pub fn logical_gate_from_simulation(gate: &GateResult) -> LogicalGateReport {
    let u = &gate.unitary;
    let logical_2x2 = Matrix2::new(
        u[(LOGICAL_FLATS[0], LOGICAL_FLATS[0])],
        u[(LOGICAL_FLATS[0], LOGICAL_FLATS[1])],
        u[(LOGICAL_FLATS[1], LOGICAL_FLATS[0])],
        u[(LOGICAL_FLATS[1], LOGICAL_FLATS[1])],
    );

    let mut min_retained = f64::INFINITY;
    for &col in &LOGICAL_FLATS {
        let retained: f64 = LOGICAL_FLATS
            .iter()
            .map(|&row| u[(row, col)].norm_sqr())
            .sum();
        min_retained = min_retained.min(retained);
    }
    let leakage = (1.0 - min_retained).clamp(0.0, 1.0);

    let gram = logical_2x2.adjoint() * logical_2x2;
    let identity = Matrix2::<C64>::identity();
    let unitarity_defect = (gram - identity)
        .iter()
        .map(|x| x.norm())
        .fold(0.0f64, f64::max);

    let equivalent_rotation = if unitarity_defect < ROTATION_DEFECT_TOL {
        Some(rotation_of(&logical_2x2))
    } else {
        None
    };

    LogicalGateReport {
        logical_2x2,
        leakage,
        unitarity_defect,
        equivalent_rotation,
    }
}

/// Axis-angle factoring of a (near-)unitary 2x2 block: strip the global
/// phase via det, then read the angle from the trace and the axis from the
/// Pauli components.
fn rotation_of(l: &Matrix2<C64>) -> EquivalentRotation {
    let alpha = l.determinant().arg() / 2.0;
    let v = l * C64::from_polar(1.0, -alpha);
    let half_trace = 0.5 * (v[(0, 0)] + v[(1, 1)]).re;
    let angle = 2.0 * half_trace.clamp(-1.0, 1.0).acos();
    let s = (angle / 2.0).sin();
    if s.abs() < 1e-9 {
        // identity or -identity: any axis works
        return EquivalentRotation {
            axis: [1.0, 0.0, 0.0],
            angle,
        };
    }
    let tr_x = v[(1, 0)] + v[(0, 1)];
    let tr_y = C64::new(0.0, 1.0) * (v[(0, 1)] - v[(1, 0)]);
    let tr_z = v[(0, 0)] - v[(1, 1)];
    let mut axis = [
        -tr_x.im / (2.0 * s),
        -tr_y.im / (2.0 * s),
        -tr_z.im / (2.0 * s),
    ];
    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut axis {
            *x /= norm;
        }
    }
    EquivalentRotation { axis, angle }
}
