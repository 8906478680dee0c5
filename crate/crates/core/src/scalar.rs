//! Biorthogonal scalar product, number density and Born-rule densities.
//!
//! Two measures are in play and are never mixed:
//! the scalar product pairs amplitudes with the covariant weights `w_i`,
//! probabilities use the flat weights `f_i`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::kspace::{Helicity, KSpaceState, Parity, RadialState};
use crate::propagator;
use crate::special::gauss_legendre;
use crate::{Error, Result, Vec3, C64};

/// Covariant scalar product
/// `(s1, s2) = Σ_{r,λ} Σ_i w_i conj(ã_{1rλ}(k_i)) ã_{2rλ}(k_i)` with `ã` the
/// effective amplitudes (origin phases included). Block diagonal in `r` and `λ`
/// by construction.
pub fn scalar_product(s1: &KSpaceState, s2: &KSpaceState) -> Result<C64> {
    s1.check_same_grid(s2)?;
    let grid = s1.grid();
    let mut acc = C64::new(0.0, 0.0);
    for p in Parity::ALL {
        for h in Helicity::ALL {
            let a = s1.amplitudes(p, h);
            let b = s2.amplitudes(p, h);
            for i in 0..grid.len() {
                if a[i] == C64::new(0.0, 0.0) || b[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                let ea = a[i] * s1.origin_phase(i);
                let eb = b[i] * s2.origin_phase(i);
                acc += grid.covariant[i] * ea.conj() * eb;
            }
        }
    }
    Ok(acc)
}

/// Nonnegative density sampled on quadrature points.
#[derive(Debug, Clone, Serialize)]
pub struct DensityField {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
    /// `Σ weights·values`.
    pub total: f64,
    /// `total` divided by the k-space probability it should reproduce.
    pub captured: f64,
}

impl DensityField {
    pub fn new(points: Vec<Vec3>, weights: Vec<f64>, values: Vec<f64>, expected_total: f64) -> Self {
        let total = weights.iter().zip(&values).map(|(w, v)| w * v).sum();
        let captured = if expected_total > 0.0 { total / expected_total } else { 0.0 };
        DensityField {
            points,
            weights,
            values,
            total,
            captured,
        }
    }

    /// Probability carried by the points selected by `pred`.
    pub fn probability_where<F: Fn(&Vec3) -> bool>(&self, pred: F) -> f64 {
        self.points
            .iter()
            .zip(self.weights.iter().zip(&self.values))
            .filter(|(p, _)| pred(p))
            .map(|(_, (w, v))| w * v)
            .sum()
    }

    pub fn argmax(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
            .0
    }
}

/// Spatial quadrature for x-space integrals.
#[derive(Debug, Clone)]
pub enum SpatialGrid {
    /// Midpoint cells on a box.
    Cartesian { min: Vec3, max: Vec3, n: [usize; 3] },
    /// Gauss–Legendre in `R ∈ (0, r_max)` with weight `4πR²`, for spherically
    /// symmetric densities. Points lie on the +z axis.
    Radial { r_max: f64, n: usize },
}

impl SpatialGrid {
    pub fn points_and_weights(&self) -> (Vec<Vec3>, Vec<f64>) {
        match self {
            SpatialGrid::Cartesian { min, max, n } => {
                let h = Vec3::new(
                    (max.x - min.x) / n[0] as f64,
                    (max.y - min.y) / n[1] as f64,
                    (max.z - min.z) / n[2] as f64,
                );
                let cell = h.x * h.y * h.z;
                let mut pts = Vec::with_capacity(n[0] * n[1] * n[2]);
                for i in 0..n[0] {
                    for j in 0..n[1] {
                        for k in 0..n[2] {
                            pts.push(Vec3::new(
                                min.x + (i as f64 + 0.5) * h.x,
                                min.y + (j as f64 + 0.5) * h.y,
                                min.z + (k as f64 + 0.5) * h.z,
                            ));
                        }
                    }
                }
                let w = vec![cell; pts.len()];
                (pts, w)
            }
            SpatialGrid::Radial { r_max, n } => {
                let (r, w) = gauss_legendre(*n, 0.0, *r_max);
                let pts = r.iter().map(|&r| Vec3::new(0.0, 0.0, r)).collect();
                let wts = r.iter().zip(&w).map(|(r, w)| 4.0 * PI * r * r * w).collect();
                (pts, wts)
            }
        }
    }
}

/// `ρ_{−1λ}(k_i) = |a_{−1λ}(k_i)|²` with the flat weights.
pub fn born_density_k(state: &KSpaceState, h: Helicity) -> DensityField {
    let grid = state.grid();
    let values: Vec<f64> = state.amplitudes(Parity::Odd, h).iter().map(|a| a.norm_sqr()).collect();
    let expected: f64 = values.iter().zip(&grid.flat).map(|(v, f)| v * f).sum();
    DensityField::new(grid.nodes.clone(), grid.flat.clone(), values, expected)
}

fn odd_sector_norm(state: &KSpaceState, h: Helicity) -> f64 {
    state
        .amplitudes(Parity::Odd, h)
        .iter()
        .zip(&state.grid().flat)
        .map(|(a, f)| f * a.norm_sqr())
        .sum()
}

fn report_coverage(d: &DensityField) {
    if d.captured < 1.0 - 1e-6 {
        log::warn!(
            "spatial grid captures {:.8} of the probability; enlarge the domain",
            d.captured
        );
    }
}

/// `ρ_{−1λ}(t, x) = |ψ_{−1λ}(t, x)|²` on a spatial grid.
pub fn born_density_x(state: &KSpaceState, h: Helicity, grid: &SpatialGrid, t: f64) -> Result<DensityField> {
    if !state.has_component(Parity::Odd) {
        return Err(Error::Domain("state has no odd (r = -1) component".into()));
    }
    let (pts, wts) = grid.points_and_weights();
    let values: Vec<f64> = pts
        .par_iter()
        .map(|x| propagator::amplitude(state, Parity::Odd, h, x, t).norm_sqr())
        .collect();
    let d = DensityField::new(pts, wts, values, odd_sector_norm(state, h));
    report_coverage(&d);
    Ok(d)
}

/// Radial fast path of [`born_density_x`]; `grid` must be [`SpatialGrid::Radial`].
pub fn born_density_x_radial(state: &RadialState, h: Helicity, grid: &SpatialGrid, t: f64) -> Result<DensityField> {
    if !matches!(grid, SpatialGrid::Radial { .. }) {
        return Err(Error::Config("radial fast path needs a radial spatial grid".into()));
    }
    let (pts, wts) = grid.points_and_weights();
    let values: Vec<f64> = pts
        .par_iter()
        .map(|x| propagator::radial_amplitude(state, Parity::Odd, h, x.z, t).norm_sqr())
        .collect();
    let r = state.radial();
    let expected = state
        .amplitudes(Parity::Odd, h)
        .iter()
        .zip(r.nodes.iter().zip(&r.weights))
        .map(|(a, (k, w))| w * k * k * a.norm_sqr())
        .sum::<f64>()
        / (2.0 * PI * PI);
    let d = DensityField::new(pts, wts, values, expected);
    report_coverage(&d);
    Ok(d)
}

/// Number density `(ε₀/ħ) Ẽ*⊥·A⊥` at `(x, t)`, summed over helicities.
///
/// Per helicity, with `a₊` and `a₋` from [`KSpaceState::frequency_components`]
/// and `F[·]`, `Ψ[·]` the covariant and flat transforms,
///
/// ```text
///   A  = F[a₊] + conj(F[ā₋])
///   Ẽ  = i Ψ[a₊] + i conj(Ψ[ā₋])          (ε̂ applied to E = −∂ₜA)
///   ρ  = 2 Re( i Ẽ*·A ) = 2 Re( (Ψ[a₊] + Ψ[ā₋])* (F[a₊] + conj F[ā₋]) )
/// ```
///
/// The factor 2 fixes `∫ρ dx = (s, s)` for states with a single frequency sign.
pub fn number_density(state: &KSpaceState, x: &Vec3, t: f64) -> f64 {
    let mut rho = 0.0;
    for h in Helicity::ALL {
        let (plus, minus) = state.frequency_components(h);
        let minus_c: Vec<C64> = minus.iter().map(|m| m.conj()).collect();
        let (fp, pp) = propagator::transforms(state.grid(), &plus, x, t);
        let (fm, pm) = propagator::transforms(state.grid(), &minus_c, x, t);
        let psi = pp + pm;
        let a = fp + fm.conj();
        rho += 2.0 * (psi.conj() * a).re;
    }
    rho
}

/// Radial fast path of [`number_density`] at distance `r` from the origin.
pub fn number_density_radial(state: &RadialState, r: f64, t: f64) -> f64 {
    let mut rho = 0.0;
    for h in Helicity::ALL {
        let e = state.amplitudes(Parity::Even, h);
        let o = state.amplitudes(Parity::Odd, h);
        let plus: Vec<C64> = e.iter().zip(o).map(|(a, b)| (a + b) * 0.5).collect();
        let minus_c: Vec<C64> = e.iter().zip(o).map(|(a, b)| (a - b) * 0.5).collect();
        let (fp, pp) = propagator::radial_transforms(state.radial(), &plus, r, t);
        let (fm, pm) = propagator::radial_transforms(state.radial(), &minus_c, r, t);
        rho += 2.0 * ((pp + pm).conj() * (fp + fm.conj())).re;
    }
    rho
}
