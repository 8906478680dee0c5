//! Physical constants. Kernels work in natural units; SI values are only used
//! when the CLI converts inputs or outputs.

/// Speed of light, m/s.
pub const C_SI: f64 = 299_792_458.0;
/// Reduced Planck constant, J·s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const EPS0_SI: f64 = 8.854_187_812_8e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub c: f64,
    pub hbar: f64,
    pub eps0: f64,
}

impl Constants {
    pub const NATURAL: Constants = Constants {
        c: 1.0,
        hbar: 1.0,
        eps0: 1.0,
    };

    pub const SI: Constants = Constants {
        c: C_SI,
        hbar: HBAR_SI,
        eps0: EPS0_SI,
    };

    /// Field prefactor `sqrt(ħ/(2ε₀))` shared by the one-photon potential and
    /// the field operator.
    pub fn field_prefactor(&self) -> f64 {
        (self.hbar / (2.0 * self.eps0)).sqrt()
    }
}

impl Default for Constants {
    fn default() -> Self {
        Constants::NATURAL
    }
}
