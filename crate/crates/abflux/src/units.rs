//! Unit system.
//!
//! All formulas are written in Gaussian conventions, so ħ and c appear
//! explicitly and the electric charge is whatever the caller supplies.
//! The default "natural mode" sets ħ = c = 1, which keeps the phase
//! qΦ/(ħc) and the transport current (πe²/ħ)V directly readable; the
//! cgs constructor restores laboratory magnitudes.

/// Physical constants threaded through phase and field computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    /// Reduced Planck constant ħ.
    pub hbar: f64,
    /// Speed of light c.
    pub c: f64,
}

impl Units {
    /// ħ = c = 1.
    #[must_use]
    pub const fn natural() -> Self {
        Self { hbar: 1.0, c: 1.0 }
    }

    /// Gaussian cgs values: ħ in erg·s, c in cm/s.
    #[must_use]
    pub const fn gaussian_cgs() -> Self {
        Self {
            hbar: 1.054_571_817e-27,
            c: 2.997_924_58e10,
        }
    }
}

impl Default for Units {
    fn default() -> Self {
        Self::natural()
    }
}
