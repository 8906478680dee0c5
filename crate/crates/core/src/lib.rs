//! First-quantized photon wave mechanics on a covariant k-space quadrature.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`] – Gauss–Legendre k-space quadrature with the flat `dk/(2π)³` and
//!   covariant `dk/((2π)³ω)` measures kept as separate weight arrays.
//! * [`kspace`] – helicity/parity amplitudes, polarization triads, eigenstate
//!   constructors, the sign-of-energy map and the conserved charge.
//! * [`scalar`] – the biorthogonal scalar product, number density and Born densities.
//! * [`propagator`] – position-space amplitudes, regularized light-cone kernels,
//!   sourced solutions and `E`/`B` from sampled potentials.
//! * [`multiphoton`] – symmetrized pairs, 1D waveguide beam splitting, entanglement
//!   and Born-rule detection sampling.
//! * [`fock`] – truncated multi-mode Fock space and the field-operator identities.
//! * [`runner`] – experiment configs, reports and CSV output used by the CLI.
//!
//! All internal quantities use natural units `c = ħ = ε₀ = 1`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod grid;
pub mod kspace;
pub mod multiphoton;
pub mod propagator;
pub mod runner;
pub mod scalar;
pub mod special;
pub mod units;

pub use error::{Error, Result};
pub use grid::{GridParams, QuadratureGrid, RadialGrid};
pub use kspace::{Helicity, KSpaceState, Parity, PolarizationTriad, RadialState, SpacetimePoint};

pub type C64 = num_complex::Complex64;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type CVec3 = nalgebra::Vector3<C64>;
