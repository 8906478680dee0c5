//! Position-space amplitudes, regularized light-cone kernels and sourced solutions.
//!
//! Two transforms of a k-space coefficient array `c_i` are used throughout:
//!
//! ```text
//!   F(x, t) = Σ_i w_i c_i e^{−i(ω_i t − k_i·x)}   covariant; the field amplitude φ
//!   Ψ(x, t) = Σ_i f_i c_i e^{−i(ω_i t − k_i·x)}   flat; the Born amplitude ψ = i∂ₜF
//! ```
//!
//! For an odd series the physical field is `Im F`, for an even series `Re F`.
//! Distributions are never represented symbolically: every δ or principal value
//! is regularized with an explicit width `σ`. The continuum kernels carry `1/R`
//! throughout.
//!
//! `E` is obtained as `−∂ₜA` only. The `∇φ` term vanishes in the Coulomb gauge
//! used here and is not computed.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{QuadratureGrid, RadialGrid};
use crate::kspace::{polarization_basis, Helicity, KSpaceState, Parity, RadialState, SpacetimePoint};
use crate::special::{gaussian_delta, regularized_principal_value, sinc_delta};
use crate::{CVec3, Error, Result, Vec3, C64};

/// Covariant and flat transforms of `coeffs` at `(x, t)`.
pub fn transforms(grid: &QuadratureGrid, coeffs: &[C64], x: &Vec3, t: f64) -> (C64, C64) {
    let mut f = C64::new(0.0, 0.0);
    let mut p = C64::new(0.0, 0.0);
    for i in 0..grid.len() {
        let c = coeffs[i];
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let ph = grid.nodes[i].dot(x) - grid.omega[i] * t;
        let term = c * C64::from_polar(1.0, ph);
        f += grid.covariant[i] * term;
        p += grid.flat[i] * term;
    }
    (f, p)
}

fn odd_or_even_sum(state: &KSpaceState, parity: Parity, h: Helicity, x: &Vec3, t: f64, flat: bool) -> C64 {
    let grid = state.grid();
    let a = state.amplitudes(parity, h);
    let o = state.origin();
    let dx = x - o.x;
    let dt = t - o.t;
    let weights = if flat { &grid.flat } else { &grid.covariant };
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..grid.len() {
        if a[i] == C64::new(0.0, 0.0) {
            continue;
        }
        let ph = grid.nodes[i].dot(&dx) - grid.omega[i] * dt;
        acc += weights[i] * a[i] * C64::from_polar(1.0, ph);
    }
    acc
}

/// `φ_{rλ}(x) = Σ_i w_i a_{rλ}(k_i) e^{−ik(x − x′)}`.
pub fn wavefunction(state: &KSpaceState, parity: Parity, h: Helicity, x: &Vec3, t: f64) -> C64 {
    odd_or_even_sum(state, parity, h, x, t, false)
}

/// Born amplitude `ψ_{rλ}(t, x) = Σ_i f_i a_{rλ}(k_i) e^{−ik(x − x′)}`.
pub fn amplitude(state: &KSpaceState, parity: Parity, h: Helicity, x: &Vec3, t: f64) -> C64 {
    odd_or_even_sum(state, parity, h, x, t, true)
}

/// Real odd field `Im φ_{−1λ}`.
pub fn odd_field(state: &KSpaceState, h: Helicity, x: &Vec3, t: f64) -> f64 {
    wavefunction(state, Parity::Odd, h, x, t).im
}

/// Real even field `Re φ_{1λ}`.
pub fn even_field(state: &KSpaceState, h: Helicity, x: &Vec3, t: f64) -> f64 {
    wavefunction(state, Parity::Even, h, x, t).re
}

/// `−∂ₜ φ_{−1λ} = Re ψ_{−1λ}`: the odd field's density kernel. For a position
/// eigenstate at equal times this is the discrete `δ(x − x′)`.
pub fn odd_field_rate(state: &KSpaceState, h: Helicity, x: &Vec3, t: f64) -> f64 {
    amplitude(state, Parity::Odd, h, x, t).re
}

/// True when `|x − x′|` and `|t − t′|` stay within the range the angular grid resolves.
pub fn is_resolvable(grid: &QuadratureGrid, origin: &SpacetimePoint, x: &Vec3, t: f64) -> bool {
    let ext = grid.resolvable_extent();
    (x - origin.x).norm() <= ext && (t - origin.t).abs() <= ext * 4.0
}

/// Born amplitudes at many points, evaluated in parallel.
pub fn sample_amplitudes(state: &KSpaceState, parity: Parity, h: Helicity, points: &[SpacetimePoint]) -> Vec<C64> {
    let o = state.origin();
    if points.iter().any(|p| !is_resolvable(state.grid(), &o, &p.x, p.t)) {
        log::warn!(
            "some sample points exceed the resolvable extent {:.3} of the grid; expect phase aliasing",
            state.grid().resolvable_extent()
        );
    }
    points
        .par_iter()
        .map(|p| amplitude(state, parity, h, &p.x, p.t))
        .collect()
}

/// Radial covariant and flat transforms of an isotropic coefficient array
/// at distance `r` from the origin:
///
/// ```text
///   F = (1/(2π² r)) ∫ dk c(k) sin(kr) e^{−iωt}
///   Ψ = (1/(2π² r)) ∫ dk k c(k) sin(kr) e^{−iωt}
/// ```
///
/// `r = 0` uses the limit `sin(kr)/r → k`.
pub fn radial_transforms(radial: &RadialGrid, coeffs: &[C64], r: f64, t: f64) -> (C64, C64) {
    let mut f = C64::new(0.0, 0.0);
    let mut p = C64::new(0.0, 0.0);
    for j in 0..radial.len() {
        let c = coeffs[j];
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let k = radial.nodes[j];
        let sinc = if r == 0.0 { k } else { (k * r).sin() / r };
        let term = radial.weights[j] * sinc * c * C64::from_polar(1.0, -k * t);
        f += term;
        p += k * term;
    }
    let norm = 1.0 / (2.0 * PI * PI);
    (f * norm, p * norm)
}

/// Radial fast path of [`wavefunction`] for a spherically symmetric state.
pub fn radial_wavefunction(state: &RadialState, parity: Parity, h: Helicity, r: f64, dt: f64) -> C64 {
    radial_transforms(state.radial(), state.amplitudes(parity, h), r, dt).0
}

/// Radial fast path of [`amplitude`].
pub fn radial_amplitude(state: &RadialState, parity: Parity, h: Helicity, r: f64, dt: f64) -> C64 {
    radial_transforms(state.radial(), state.amplitudes(parity, h), r, dt).1
}

/// Shape used for regularized δ functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularization {
    #[default]
    Gaussian,
    /// `sin(s/σ)/(πs)`, the kernel of a hard cutoff at `k = 1/σ`.
    HardCutoff,
}

impl Regularization {
    pub fn delta(self, s: f64, sigma: f64) -> f64 {
        match self {
            Regularization::Gaussian => gaussian_delta(s, sigma),
            Regularization::HardCutoff => sinc_delta(s, sigma),
        }
    }
}

/// `(1/(4πR))[δ_σ(R + cΔt) − δ_σ(R − cΔt)]`: advanced minus retarded shell.
pub fn odd_propagator(r: f64, dt: f64, sigma: f64) -> f64 {
    odd_propagator_with(Regularization::Gaussian, r, dt, sigma)
}

pub fn odd_propagator_with(reg: Regularization, r: f64, dt: f64, sigma: f64) -> f64 {
    (reg.delta(r + dt, sigma) - reg.delta(r - dt, sigma)) / (4.0 * PI * r)
}

/// `(1/(4πR))[δ_σ(R + cΔt) + δ_σ(R − cΔt)]`.
pub fn green_function(r: f64, dt: f64, sigma: f64) -> f64 {
    green_function_with(Regularization::Gaussian, r, dt, sigma)
}

pub fn green_function_with(reg: Regularization, r: f64, dt: f64, sigma: f64) -> f64 {
    (reg.delta(r + dt, sigma) + reg.delta(r - dt, sigma)) / (4.0 * PI * r)
}

/// `½(G − φ₋₁)`: the retarded shell, emission from an instantaneous source.
pub fn emission_amplitude(r: f64, dt: f64, sigma: f64) -> f64 {
    0.5 * (green_function(r, dt, sigma) - odd_propagator(r, dt, sigma))
}

/// `½(G + φ₋₁)`: the advanced shell.
pub fn absorption_amplitude(r: f64, dt: f64, sigma: f64) -> f64 {
    0.5 * (green_function(r, dt, sigma) + odd_propagator(r, dt, sigma))
}

/// Even kernel `(1/(4π²R)) Σ_± P_σ(1/(R ± cΔt))`, the real part of the
/// covariant transform of `exp(−k²σ²/2)`. `P_σ` is the Gaussian-regularized
/// principal value (a scaled Dawson function). Decays like a power law off the cone.
pub fn even_propagator(r: f64, dt: f64, sigma: f64) -> f64 {
    (regularized_principal_value(r + dt, sigma) + regularized_principal_value(r - dt, sigma)) / (4.0 * PI * PI * r)
}

/// Helicity-`λ` current sampled on a spacetime lattice.
///
/// Spatial samples sit at cell centres `origin + (i + ½)h`, time samples at
/// `t0 + j·dt`. Between time samples the current is interpolated linearly.
#[derive(Debug, Clone)]
pub struct SourceCurrent {
    pub helicity: Helicity,
    pub origin: Vec3,
    pub h: f64,
    pub n: [usize; 3],
    pub t0: f64,
    pub dt: f64,
    pub nt: usize,
    /// Reference time separating the advanced (`t < t_ref`) and retarded
    /// (`t ≥ t_ref`) branches.
    pub t_ref: f64,
    values: Vec<C64>,
    quiet_before: bool,
    quiet_after: bool,
}

impl SourceCurrent {
    /// Samples `j(x, t)` on the lattice.
    #[allow(clippy::too_many_arguments)]
    pub fn sample<F>(helicity: Helicity, origin: Vec3, h: f64, n: [usize; 3], t0: f64, dt: f64, nt: usize, t_ref: f64, j: F) -> Result<Self>
    where
        F: Fn(&Vec3, f64) -> C64 + Sync,
    {
        if !(h > 0.0) || !(dt > 0.0) || nt < 2 || n.contains(&0) {
            return Err(Error::Config("source lattice needs h, dt > 0, nt ≥ 2 and nonempty axes".into()));
        }
        let cells = n[0] * n[1] * n[2];
        let values: Vec<C64> = (0..nt * cells)
            .into_par_iter()
            .map(|idx| {
                let it = idx / cells;
                let c = idx % cells;
                let (ix, iy, iz) = (c / (n[1] * n[2]), (c / n[2]) % n[1], c % n[2]);
                let x = origin + Vec3::new(ix as f64 + 0.5, iy as f64 + 0.5, iz as f64 + 0.5) * h;
                j(&x, t0 + it as f64 * dt)
            })
            .collect();
        let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let quiet = |slice: &[C64]| slice.iter().map(|v| v.norm()).fold(0.0, f64::max) <= 1e-12 * peak;
        Ok(SourceCurrent {
            helicity,
            origin,
            h,
            n,
            t0,
            dt,
            nt,
            t_ref,
            quiet_before: quiet(&values[..cells]),
            quiet_after: quiet(&values[(nt - 1) * cells..]),
            values,
        })
    }

    fn cells(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn cell_center(&self, c: usize) -> Vec3 {
        let n = self.n;
        let (ix, iy, iz) = (c / (n[1] * n[2]), (c / n[2]) % n[1], c % n[2]);
        self.origin + Vec3::new(ix as f64 + 0.5, iy as f64 + 0.5, iz as f64 + 0.5) * self.h
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + (self.nt - 1) as f64 * self.dt
    }

    /// Linear-in-time value at cell `c`; `None` when `t` leaves the lattice.
    fn at(&self, c: usize, t: f64) -> Option<C64> {
        let s = (t - self.t0) / self.dt;
        if s < 0.0 || s > (self.nt - 1) as f64 {
            return None;
        }
        let j = (s.floor() as usize).min(self.nt - 2);
        let frac = s - j as f64;
        let cells = self.cells();
        let a = self.values[j * cells + c];
        let b = self.values[(j + 1) * cells + c];
        Some(a * (1.0 - frac) + b * frac)
    }

    /// Source value by the same interpolation, zero off the lattice.
    pub fn value(&self, x: &Vec3, t: f64) -> C64 {
        let rel = (x - self.origin) / self.h;
        let idx = [rel.x.floor(), rel.y.floor(), rel.z.floor()];
        if idx.iter().zip(&self.n).any(|(&i, &m)| i < 0.0 || i >= m as f64) {
            return C64::new(0.0, 0.0);
        }
        let c = (idx[0] as usize * self.n[1] + idx[1] as usize) * self.n[2] + idx[2] as usize;
        self.at(c, t).unwrap_or(C64::new(0.0, 0.0))
    }
}

/// Particular solution of `□φ = J` by lattice quadrature:
///
/// ```text
///   φ(x, t) = Σ_cells h³/(4πR) J(x′, t ∓ R/c)
/// ```
///
/// with the retarded branch for `t ≥ t_ref` and the advanced branch before.
/// A light-cone time beyond either end of the time lattice is a coverage error
/// unless the current has died away (≤ 1e-12 of its peak) on that end slice.
pub fn particular_solution(j: &SourceCurrent, x: &Vec3, t: f64) -> Result<C64> {
    let retarded = t >= j.t_ref;
    let cell_vol = j.h * j.h * j.h;
    let mut acc = C64::new(0.0, 0.0);
    for c in 0..j.cells() {
        let xp = j.cell_center(c);
        let r = (x - xp).norm();
        if r == 0.0 {
            continue;
        }
        let tt = if retarded { t - r } else { t + r };
        match j.at(c, tt) {
            Some(v) => acc += v * (cell_vol / (4.0 * PI * r)),
            None if tt < j.t0 && j.quiet_before => {}
            None if tt > j.t0 && j.quiet_after => {}
            None => {
                return Err(Error::Coverage(format!(
                    "light cone from ({:.3},{:.3},{:.3}, t={t:.3}) reaches t'={tt:.3} outside the source lattice [{:.3}, {:.3}]",
                    x.x,
                    x.y,
                    x.z,
                    j.t0,
                    j.t_end()
                )))
            }
        }
    }
    Ok(acc)
}

/// `□_h φ − J` at `(x, t)`, with `□ = ∂ₜ² − ∇²` by second-order central
/// differences of step `step` applied to [`particular_solution`], and `J` the exact current.
pub fn wave_operator_residual<F>(j: &SourceCurrent, exact: F, x: &Vec3, t: f64, step: f64) -> Result<C64>
where
    F: Fn(&Vec3, f64) -> C64,
{
    let centre = particular_solution(j, x, t)?;
    let h2 = step * step;
    let mut box_op = (particular_solution(j, x, t + step)? + particular_solution(j, x, t - step)? - centre * 2.0) / h2;
    for axis in 0..3 {
        let mut e = Vec3::zeros();
        e[axis] = step;
        let lap = particular_solution(j, &(x + e), t)? + particular_solution(j, &(x - e), t)? - centre * 2.0;
        box_op -= lap / h2;
    }
    Ok(box_op - exact(x, t))
}

/// Regular spacetime slab of complex 3-vector samples.
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub origin: SpacetimePoint,
    /// `[dt, dx, dy, dz]`.
    pub spacing: [f64; 4],
    /// `[nt, nx, ny, nz]`.
    pub dims: [usize; 4],
    pub values: Vec<CVec3>,
    /// Regularization width of the kernels the samples came from, if any.
    pub sigma: Option<f64>,
}

impl FieldSample {
    pub fn index(&self, it: usize, ix: usize, iy: usize, iz: usize) -> usize {
        let [_, nx, ny, nz] = self.dims;
        ((it * nx + ix) * ny + iy) * nz + iz
    }

    pub fn point(&self, it: usize, ix: usize, iy: usize, iz: usize) -> SpacetimePoint {
        let [dt, dx, dy, dz] = self.spacing;
        SpacetimePoint::new(
            self.origin.t + it as f64 * dt,
            self.origin.x + Vec3::new(ix as f64 * dx, iy as f64 * dy, iz as f64 * dz),
        )
    }

    pub fn get(&self, it: usize, ix: usize, iy: usize, iz: usize) -> CVec3 {
        self.values[self.index(it, ix, iy, iz)]
    }

    fn with_values(&self, values: Vec<CVec3>) -> FieldSample {
        FieldSample {
            origin: self.origin,
            spacing: self.spacing,
            dims: self.dims,
            values,
            sigma: self.sigma,
        }
    }

    /// 4th-order derivative along `axis` (0 = t, 1..3 = x, y, z).
    fn derivative(&self, axis: usize, it: usize, ix: usize, iy: usize, iz: usize) -> CVec3 {
        let mut idx = [it, ix, iy, iz];
        let n = self.dims[axis];
        let h = self.spacing[axis];
        let i = idx[axis];
        let at = |k: usize, idx: &mut [usize; 4]| {
            idx[axis] = k;
            self.get(idx[0], idx[1], idx[2], idx[3])
        };
        let (coeffs, start): ([f64; 5], usize) = if i >= 2 && i + 2 < n {
            ([1.0, -8.0, 0.0, 8.0, -1.0], i - 2)
        } else if i == 0 {
            ([-25.0, 48.0, -36.0, 16.0, -3.0], 0)
        } else if i == 1 {
            ([-3.0, -10.0, 18.0, -6.0, 1.0], 0)
        } else if i + 1 == n {
            ([3.0, -16.0, 36.0, -48.0, 25.0], n - 5)
        } else {
            ([-1.0, 6.0, -18.0, 10.0, 3.0], n - 5)
        };
        let mut acc = CVec3::zeros();
        for (m, c) in coeffs.iter().enumerate() {
            if *c != 0.0 {
                acc += at(start + m, &mut idx) * C64::new(*c, 0.0);
            }
        }
        acc / C64::new(12.0 * h, 0.0)
    }
}

/// Vector potential `A_λ(x) = Σ_i w_i ã_{rλ}(k_i) e_λ(k_i) e^{−ikx}` summed over helicities.
pub fn vector_potential(state: &KSpaceState, parity: Parity, x: &Vec3, t: f64) -> Result<CVec3> {
    let triads = triads(state.grid())?;
    Ok(vector_potential_with(state, parity, &triads, x, t))
}

fn triads(grid: &QuadratureGrid) -> Result<Vec<[CVec3; 2]>> {
    grid.nodes
        .iter()
        .map(|k| {
            let t = polarization_basis(k)?;
            Ok([t.e_lambda(Helicity::Plus), t.e_lambda(Helicity::Minus)])
        })
        .collect()
}

fn vector_potential_with(state: &KSpaceState, parity: Parity, triads: &[[CVec3; 2]], x: &Vec3, t: f64) -> CVec3 {
    let grid = state.grid();
    let o = state.origin();
    let dx = x - o.x;
    let dt = t - o.t;
    let mut acc = CVec3::zeros();
    for h in Helicity::ALL {
        let a = state.amplitudes(parity, h);
        for i in 0..grid.len() {
            if a[i] == C64::new(0.0, 0.0) {
                continue;
            }
            let ph = grid.nodes[i].dot(&dx) - grid.omega[i] * dt;
            let c = grid.covariant[i] * a[i] * C64::from_polar(1.0, ph);
            acc += triads[i][h.index()] * c;
        }
    }
    acc
}

/// Samples [`vector_potential`] on a slab.
pub fn sample_vector_potential(
    state: &KSpaceState,
    parity: Parity,
    origin: SpacetimePoint,
    spacing: [f64; 4],
    dims: [usize; 4],
) -> Result<FieldSample> {
    let tr = triads(state.grid())?;
    let mut sample = FieldSample {
        origin,
        spacing,
        dims,
        values: Vec::new(),
        sigma: None,
    };
    let total = dims.iter().product::<usize>();
    let pts: Vec<SpacetimePoint> = (0..total)
        .map(|idx| {
            let iz = idx % dims[3];
            let iy = (idx / dims[3]) % dims[2];
            let ix = (idx / (dims[3] * dims[2])) % dims[1];
            let it = idx / (dims[3] * dims[2] * dims[1]);
            sample.point(it, ix, iy, iz)
        })
        .collect();
    sample.values = pts
        .par_iter()
        .map(|p| vector_potential_with(state, parity, &tr, &p.x, p.t))
        .collect();
    Ok(sample)
}

/// `E = −∂ₜA`, `B = ∇×A` by 4th-order finite differences (central inside,
/// one-sided 5-point stencils near the edges).
pub fn derive_fields(a: &FieldSample) -> Result<(FieldSample, FieldSample)> {
    if a.dims.iter().any(|&n| n < 5) {
        return Err(Error::Config(format!(
            "derive_fields needs ≥ 5 samples along every axis for the 5-point stencil, got {:?}",
            a.dims
        )));
    }
    let [nt, nx, ny, nz] = a.dims;
    let total = nt * nx * ny * nz;
    let pairs: Vec<(CVec3, CVec3)> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let iz = idx % nz;
            let iy = (idx / nz) % ny;
            let ix = (idx / (nz * ny)) % nx;
            let it = idx / (nz * ny * nx);
            let e = -a.derivative(0, it, ix, iy, iz);
            let ddx = a.derivative(1, it, ix, iy, iz);
            let ddy = a.derivative(2, it, ix, iy, iz);
            let ddz = a.derivative(3, it, ix, iy, iz);
            let b = CVec3::new(ddy.z - ddz.y, ddz.x - ddx.z, ddx.y - ddy.x);
            (e, b)
        })
        .collect();
    let (e, b): (Vec<CVec3>, Vec<CVec3>) = pairs.into_iter().unzip();
    Ok((a.with_values(e), a.with_values(b)))
}

/// `∇·B` by the same stencils.
pub fn divergence(b: &FieldSample, it: usize, ix: usize, iy: usize, iz: usize) -> C64 {
    b.derivative(1, it, ix, iy, iz).x + b.derivative(2, it, ix, iy, iz).y + b.derivative(3, it, ix, iy, iz).z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridParams;
    use std::sync::Arc;

    fn grid(nr: usize, nc: usize, np: usize, kmin: f64, kmax: f64) -> Arc<QuadratureGrid> {
        Arc::new(
            QuadratureGrid::new(GridParams {
                n_radial: nr,
                n_costheta: nc,
                n_phi: np,
                k_min: kmin,
                k_max: kmax,
            })
            .unwrap(),
        )
    }

    #[test]
    fn odd_propagator_properties() {
        let sigma = 0.1;
        assert_eq!(odd_propagator(2.0, 0.0, sigma), 0.0);
        let r = 50.0;
        let on = odd_propagator(r, r, sigma);
        let expect = -1.0 / (4.0 * PI * r * sigma * (2.0 * PI).sqrt());
        assert!((on - expect).abs() < 1e-14 * expect.abs());
    }

    #[test]
    fn green_even_and_tails() {
        let s = 0.2;
        for &(r, dt) in &[(1.0, 0.3), (3.0, 2.9), (5.0, 7.0)] {
            assert!((green_function(r, dt, s) - green_function(r, -dt, s)).abs() < 1e-14);
        }
        let peak = green_function(4.0, 4.0, s);
        assert!(green_function(4.0, 4.0 - 9.0 * s, s).abs() < 1e-12 * peak);
    }

    #[test]
    fn emission_absorption_split() {
        let s = 0.15;
        for &(r, dt) in &[(1.0, 1.0), (2.0, -2.0), (3.0, 0.5), (0.7, -3.0)] {
            let g = green_function(r, dt, s);
            let o = odd_propagator(r, dt, s);
            let e = emission_amplitude(r, dt, s);
            let a = absorption_amplitude(r, dt, s);
            assert!((e + a - g).abs() < 1e-14);
            assert!((e - a + o).abs() < 1e-14);
        }
        // retarded support: nothing before the source fires
        assert!(emission_amplitude(2.0, -2.0, s) < 1e-100);
        // emission is the retarded shell, absorption the advanced one
        assert!((emission_amplitude(3.0, 3.0, s) - gaussian_delta(0.0, s) / (12.0 * PI)).abs() < 1e-14);
        assert!((absorption_amplitude(3.0, -3.0, s) - gaussian_delta(0.0, s) / (12.0 * PI)).abs() < 1e-14);
        assert!(absorption_amplitude(3.0, 3.0, s) < 1e-100);
    }

    #[test]
    fn hard_cutoff_flag_changes_kernel_shape() {
        let s = 0.2;
        let g = odd_propagator_with(Regularization::Gaussian, 5.0, 5.0, s);
        let h = odd_propagator_with(Regularization::HardCutoff, 5.0, 5.0, s);
        let expect = ((50.0f64).sin() / (10.0 * PI) - 1.0 / (PI * s)) / (20.0 * PI);
        assert!((h - expect).abs() < 1e-14);
        assert!((g + 1.0 / (20.0 * PI * s * (2.0 * PI).sqrt())).abs() < 1e-14);
    }

    #[test]
    fn radial_path_matches_3d_quadrature() {
        let g = grid(96, 48, 64, 1e-3, 8.0);
        let radial = Arc::new(g.radial.clone());
        let rs = RadialState::gaussian_shell(3.0, 0.35, Helicity::Plus, Parity::Odd, radial).unwrap();
        let s = rs.to_kspace(g.clone()).unwrap();
        let mut rng_state = 12345u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let r = 3.0 * next();
            let dt = 6.0 * next() - 3.0;
            let dir = Vec3::new(next() - 0.5, next() - 0.5, next() - 0.5).normalize();
            let full = wavefunction(&s, Parity::Odd, Helicity::Plus, &(dir * r), dt);
            let fast = radial_wavefunction(&rs, Parity::Odd, Helicity::Plus, r, dt);
            worst = worst.max((full - fast).norm());
        }
        assert!(worst < 1e-8, "max diff {worst:e}");
    }

    #[test]
    fn radial_limits() {
        let radial = Arc::new(RadialGrid::new(128, 1e-3, 8.0).unwrap());
        let rs = RadialState::gaussian_shell(3.0, 0.35, Helicity::Plus, Parity::Odd, radial).unwrap();
        let v = radial_wavefunction(&rs, Parity::Odd, Helicity::Plus, 1.3, 0.0);
        assert_eq!(v.im, 0.0);
        let at0 = radial_wavefunction(&rs, Parity::Odd, Helicity::Plus, 0.0, 0.4);
        let near = radial_wavefunction(&rs, Parity::Odd, Helicity::Plus, 1e-7, 0.4);
        assert!(at0.norm().is_finite() && (at0 - near).norm() < 1e-9 * at0.norm());
    }

    #[test]
    fn even_propagator_matches_radial_quadrature() {
        let sigma = 0.5;
        let radial = Arc::new(RadialGrid::new(800, 1e-6, 16.0).unwrap());
        let rs = RadialState::regularized_position(sigma, Helicity::Plus, Parity::Even, radial).unwrap();
        for &(r, dt) in &[(1.0, 0.5), (4.0, 2.0), (6.0, 6.3), (10.0, 3.0)] {
            let q = radial_wavefunction(&rs, Parity::Even, Helicity::Plus, r, dt);
            assert!((q.re - even_propagator(r, dt, sigma)).abs() < 1e-9, "r={r} dt={dt}");
            assert!((q.im - odd_propagator(r, dt, sigma)).abs() < 1e-9, "r={r} dt={dt}");
        }
    }

    #[test]
    fn odd_propagator_matches_regularized_eigenstate_on_cone() {
        let sigma = 0.5;
        let g = grid(160, 64, 80, 1e-3, 12.0);
        let s = KSpaceState::regularized_position_eigenstate(&Vec3::zeros(), Helicity::Plus, Parity::Odd, sigma, g).unwrap();
        for &r in &[1.5, 2.5] {
            let x = Vec3::new(0.3, -0.4, 0.866_025_403_784_438_6).normalize() * r;
            for dt in [r, -r] {
                let num = odd_field(&s, Helicity::Plus, &x, dt);
                let ana = odd_propagator(r, dt, sigma);
                assert!((num - ana).abs() < 1e-6, "r={r} dt={dt}: {num} vs {ana}");
            }
        }
    }

    #[test]
    fn time_translation_is_phase_evolution() {
        let g = grid(32, 16, 16, 0.2, 4.0);
        let s = KSpaceState::from_fn(g, Parity::Odd, Helicity::Minus, |k| C64::new((-(k.norm() - 2.0).powi(2)).exp(), 0.1 * k.x));
        let dt = 0.7;
        let shifted = s.clone().with_origin(SpacetimePoint::new(-dt, Vec3::zeros()));
        let evolved = s.time_evolved(dt);
        let x = Vec3::new(0.2, 0.5, -0.3);
        for t in [0.0, 1.0, 2.5] {
            let a = wavefunction(&shifted, Parity::Odd, Helicity::Minus, &x, t);
            let b = wavefunction(&evolved, Parity::Odd, Helicity::Minus, &x, t);
            let c = wavefunction(&s, Parity::Odd, Helicity::Minus, &x, t + dt);
            assert!((a - b).norm() < 1e-10 && (a - c).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_state_has_zero_wavefunction() {
        let g = grid(8, 4, 4, 0.2, 3.0);
        let s = KSpaceState::zero(g);
        assert_eq!(wavefunction(&s, Parity::Odd, Helicity::Plus, &Vec3::new(1.0, 0.0, 0.0), 1.0), C64::new(0.0, 0.0));
    }

    #[test]
    fn plane_wave_fields() {
        let g = grid(6, 5, 6, 0.5, 2.0);
        let node = 77;
        let s = KSpaceState::node_eigenstate(node, Helicity::Plus, Parity::Odd, g.clone());
        let k = g.nodes[node];
        let w = g.omega[node];
        let h = 0.02;
        let origin = SpacetimePoint::new(0.1, Vec3::new(-0.05, 0.02, 0.0));
        let a = sample_vector_potential(&s, Parity::Odd, origin, [h, h, h, h], [7, 7, 7, 7]).unwrap();
        let (e, b) = derive_fields(&a).unwrap();
        let i = C64::new(0.0, 1.0);
        for p in [(3, 3, 3, 3), (2, 4, 3, 2)] {
            let av = a.get(p.0, p.1, p.2, p.3);
            let ev = e.get(p.0, p.1, p.2, p.3);
            let bv = b.get(p.0, p.1, p.2, p.3);
            let kc = CVec3::new(C64::new(k.x, 0.0), C64::new(k.y, 0.0), C64::new(k.z, 0.0));
            let e_exact = av * (i * w);
            let b_exact = kc.cross(&av) * i;
            assert!((ev - e_exact).norm() < 1e-6, "{}", (ev - e_exact).norm());
            assert!((bv - b_exact).norm() < 1e-6, "{}", (bv - b_exact).norm());
        }
    }

    #[test]
    fn static_potential_has_no_electric_field_and_b_is_solenoidal() {
        let n = 11;
        let h = 0.1;
        let mut values = Vec::new();
        for _it in 0..n {
            for ix in 0..n {
                for iy in 0..n {
                    for iz in 0..n {
                        let (x, y, z) = (ix as f64 * h, iy as f64 * h, iz as f64 * h);
                        values.push(CVec3::new(
                            C64::new((y * z).sin(), 0.0),
                            C64::new(x * x * z, 0.3),
                            C64::new((x + 2.0 * y).cos(), x * y),
                        ));
                    }
                }
            }
        }
        let a = FieldSample {
            origin: SpacetimePoint::origin(),
            spacing: [h; 4],
            dims: [n; 4],
            values,
            sigma: None,
        };
        let (e, b) = derive_fields(&a).unwrap();
        assert!(e.values.iter().all(|v| v.norm() < 1e-12));
        let bnorm = b.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for ix in 4..n - 4 {
            for iy in 4..n - 4 {
                for iz in 4..n - 4 {
                    assert!(divergence(&b, 5, ix, iy, iz).norm() < 1e-6 * bnorm);
                }
            }
        }
    }

    #[test]
    fn too_few_slices_rejected() {
        let a = FieldSample {
            origin: SpacetimePoint::origin(),
            spacing: [0.1; 4],
            dims: [4, 5, 5, 5],
            values: vec![CVec3::zeros(); 500],
            sigma: None,
        };
        assert!(matches!(derive_fields(&a), Err(Error::Config(_))));
    }

    #[test]
    fn zero_source_gives_zero_field() {
        let j = SourceCurrent::sample(Helicity::Plus, Vec3::new(-1.0, -1.0, -1.0), 0.25, [8, 8, 8], -1.0, 0.25, 9, 0.0, |_, _| C64::new(0.0, 0.0)).unwrap();
        assert_eq!(particular_solution(&j, &Vec3::new(0.1, 0.2, 0.3), 0.5).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn noncompact_source_reports_coverage() {
        let j = SourceCurrent::sample(Helicity::Plus, Vec3::new(-1.0, -1.0, -1.0), 0.25, [8, 8, 8], -1.0, 0.25, 9, 0.0, |_, _| C64::new(1.0, 0.0)).unwrap();
        let r = particular_solution(&j, &Vec3::new(0.0, 0.0, 5.0), 0.5);
        assert!(matches!(r, Err(Error::Coverage(_))));
    }
}
