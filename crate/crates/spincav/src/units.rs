//! Unit conventions.
//!
//! Physical parameters are specified in meV (energies, couplings, decay
//! rates as hbar times a rate) and ps (times). Hamiltonian matrices are
//! stored in angular-frequency units (1/ps): every meV value is divided by
//! hbar exactly once, here. Phases are then plain radians.

/// hbar in meV*ps.
pub const HBAR_MEV_PS: f64 = 0.6582119569;

/// Energy in meV to angular frequency in 1/ps.
#[inline]
pub fn mev_to_angular(energy_mev: f64) -> f64 {
    energy_mev / HBAR_MEV_PS
}

/// Angular frequency in 1/ps back to meV.
#[inline]
pub fn angular_to_mev(omega: f64) -> f64 {
    omega * HBAR_MEV_PS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let e = 1.3;
        assert!((angular_to_mev(mev_to_angular(e)) - e).abs() < 1e-15);
    }

    #[test]
    fn one_mev_rate() {
        // 1 meV corresponds to ~1.519 rad/ps.
        assert!((mev_to_angular(1.0) - 1.519_266_9).abs() < 1e-6);
    }
}
