//! Covariant one-photon states on a k-space quadrature grid.
//!
//! A state stores scalar helicity amplitudes `a_{rλ}(k_i)` for the even
//! (`r = +1`) and odd (`r = −1`) series together with a spacetime origin `x′`.
//! The amplitude entering every field expansion is the effective amplitude
//! `a_{rλ}(k) · e^{i(ω t′ − k·x′)}`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::grid::{QuadratureGrid, RadialGrid};
use crate::{CVec3, Error, Result, Vec3, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Helicity {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Helicity {
    pub const ALL: [Helicity; 2] = [Helicity::Plus, Helicity::Minus];

    pub fn value(self) -> f64 {
        match self {
            Helicity::Plus => 1.0,
            Helicity::Minus => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Helicity::Plus => 0,
            Helicity::Minus => 1,
        }
    }

    pub fn flip(self) -> Helicity {
        match self {
            Helicity::Plus => Helicity::Minus,
            Helicity::Minus => Helicity::Plus,
        }
    }

    pub fn from_sign(s: i32) -> Result<Helicity> {
        match s {
            1 => Ok(Helicity::Plus),
            -1 => Ok(Helicity::Minus),
            _ => Err(Error::Domain(format!("helicity must be ±1, got {s}"))),
        }
    }
}

/// Behaviour of a series under photon ↔ antiphoton exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "+1")]
    Even,
    #[serde(rename = "-1")]
    Odd,
}

impl Parity {
    pub const ALL: [Parity; 2] = [Parity::Even, Parity::Odd];

    pub fn value(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn from_sign(s: i32) -> Result<Parity> {
        match s {
            1 => Ok(Parity::Even),
            -1 => Ok(Parity::Odd),
            _ => Err(Error::Domain(format!("parity must be ±1, got {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: Vec3,
}

impl SpacetimePoint {
    pub fn new(t: f64, x: Vec3) -> Self {
        SpacetimePoint { t, x }
    }

    pub fn origin() -> Self {
        Self::default()
    }
}

/// Spherical-polar unit vectors at `k` and the helicity vectors built from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationTriad {
    pub e_theta: Vec3,
    pub e_phi: Vec3,
    pub e_k: Vec3,
}

impl PolarizationTriad {
    /// `e_λ = (e_θ + iλ e_φ)/√2`.
    pub fn e_lambda(&self, h: Helicity) -> CVec3 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let l = h.value();
        CVec3::new(
            C64::new(self.e_theta.x * s, l * self.e_phi.x * s),
            C64::new(self.e_theta.y * s, l * self.e_phi.y * s),
            C64::new(self.e_theta.z * s, l * self.e_phi.z * s),
        )
    }
}

/// Triad at `k`. On the polar axis `φ = atan2(0, 0) = 0`, which gives
/// `e_θ = (±1,0,0)`, `e_φ = (0,1,0)`.
pub fn polarization_basis(k: &Vec3) -> Result<PolarizationTriad> {
    let kn = k.norm();
    if !(kn > 0.0) {
        return Err(Error::Domain("undefined polarization at k=0".into()));
    }
    let ct = (k.z / kn).clamp(-1.0, 1.0);
    let st = (k.x * k.x + k.y * k.y).sqrt() / kn;
    let phi = k.y.atan2(k.x);
    let (sp, cp) = phi.sin_cos();
    Ok(PolarizationTriad {
        e_theta: Vec3::new(ct * cp, ct * sp, -st),
        e_phi: Vec3::new(-sp, cp, 0.0),
        e_k: k / kn,
    })
}

type Components = [[Vec<C64>; 2]; 2];

fn zero_components(n: usize) -> Components {
    [
        [vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]],
        [vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]],
    ]
}

#[derive(Debug, Clone)]
pub struct KSpaceState {
    grid: Arc<QuadratureGrid>,
    origin: SpacetimePoint,
    amp: Components,
}

impl KSpaceState {
    pub fn zero(grid: Arc<QuadratureGrid>) -> Self {
        let n = grid.len();
        KSpaceState {
            grid,
            origin: SpacetimePoint::origin(),
            amp: zero_components(n),
        }
    }

    /// Single `(r, λ)` component filled from `f(k)`, origin at zero.
    pub fn from_fn<F>(grid: Arc<QuadratureGrid>, parity: Parity, h: Helicity, f: F) -> Self
    where
        F: Fn(&Vec3) -> C64,
    {
        let mut s = Self::zero(grid);
        let vals: Vec<C64> = s.grid.nodes.iter().map(&f).collect();
        s.amp[parity.index()][h.index()] = vals;
        s
    }

    /// Plane wave of momentum `k′`: the discrete `(2π)³ω δ(k − k′)`, i.e.
    /// `1/w_i` at the matching node. Off-node momenta snap to the nearest node.
    pub fn momentum_eigenstate(
        k: &Vec3,
        h: Helicity,
        parity: Parity,
        grid: Arc<QuadratureGrid>,
    ) -> Result<Self> {
        let km = k.norm();
        if km < grid.k_min() || km > grid.k_max() {
            return Err(Error::Range(format!(
                "|k'| = {km} outside [{}, {}]",
                grid.k_min(),
                grid.k_max()
            )));
        }
        let i = grid.nearest_node(k);
        if (grid.nodes[i] - k).norm() > 1e-12 * km.max(1.0) {
            log::warn!(
                "momentum eigenstate: k' = {:?} snapped to grid node {:?}",
                k.as_slice(),
                grid.nodes[i].as_slice()
            );
        }
        Ok(Self::node_eigenstate(i, h, parity, grid))
    }

    pub fn node_eigenstate(node: usize, h: Helicity, parity: Parity, grid: Arc<QuadratureGrid>) -> Self {
        let w = grid.covariant[node];
        let mut s = Self::zero(grid);
        s.amp[parity.index()][h.index()][node] = C64::new(1.0 / w, 0.0);
        s
    }

    /// Position eigenvector: scalar amplitude `1` with origin `x′` (at `t′ = 0`),
    /// i.e. effective amplitude `e^{−ik·x′}`.
    pub fn position_eigenstate(x: &Vec3, h: Helicity, parity: Parity, grid: Arc<QuadratureGrid>) -> Self {
        let mut s = Self::from_fn(grid, parity, h, |_| C64::new(1.0, 0.0));
        s.origin = SpacetimePoint::new(0.0, *x);
        s
    }

    /// Position eigenvector smeared by `exp(−k²σ²/2)`; in x-space the Born
    /// amplitude at `t = t′` is a normalized Gaussian of width `σ`.
    pub fn regularized_position_eigenstate(
        x: &Vec3,
        h: Helicity,
        parity: Parity,
        sigma: f64,
        grid: Arc<QuadratureGrid>,
    ) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("regularization width must be > 0, got {sigma}")));
        }
        let mut s = Self::from_fn(grid, parity, h, |k| {
            C64::new((-0.5 * k.norm_squared() * sigma * sigma).exp(), 0.0)
        });
        s.origin = SpacetimePoint::new(0.0, *x);
        Ok(s)
    }

    /// Gaussian packet `N exp(−|k − k₀|²/(4σ_k²))` normalized so that
    /// `Σ_λ ∫ dk/(2π)³ |a_{rλ}|² = 1`.
    pub fn gaussian_wavepacket(
        k0: &Vec3,
        sigma_k: f64,
        h: Helicity,
        parity: Parity,
        grid: Arc<QuadratureGrid>,
    ) -> Result<Self> {
        if !(sigma_k > 0.0) {
            return Err(Error::Domain(format!("sigma_k must be > 0, got {sigma_k}")));
        }
        let density = |d: f64| (-(d * d) / (2.0 * sigma_k * sigma_k)).exp();
        let k0n = k0.norm();
        let tail_lo = density((k0n - grid.k_min()).max(0.0));
        let tail_hi = density((grid.k_max() - k0n).max(0.0));
        if tail_lo > 1e-12 || tail_hi > 1e-12 {
            return Err(Error::Resolution(format!(
                "packet density tail {:.2e} at k_min / {:.2e} at k_max exceeds 1e-12",
                tail_lo, tail_hi
            )));
        }
        let env = |k: &Vec3| (-(k - k0).norm_squared() / (4.0 * sigma_k * sigma_k)).exp();
        let mut s = Self::from_fn(grid, parity, h, |k| C64::new(env(k), 0.0));
        let norm = s.sector_flat_norm_sq(parity);
        let exact = (2.0 * PI * sigma_k * sigma_k).powf(1.5) / crate::grid::TWO_PI_CUBED;
        if ((norm - exact) / exact).abs() > 1e-3 {
            return Err(Error::Resolution(format!(
                "grid integrates the packet to {norm:.6e}, analytic {exact:.6e}; refine the grid"
            )));
        }
        s.scale_in_place(C64::new(1.0 / norm.sqrt(), 0.0));
        Ok(s)
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn origin(&self) -> SpacetimePoint {
        self.origin
    }

    pub fn with_origin(mut self, origin: SpacetimePoint) -> Self {
        self.origin = origin;
        self
    }

    pub fn amplitudes(&self, parity: Parity, h: Helicity) -> &[C64] {
        &self.amp[parity.index()][h.index()]
    }

    pub fn amplitudes_mut(&mut self, parity: Parity, h: Helicity) -> &mut [C64] {
        &mut self.amp[parity.index()][h.index()]
    }

    /// Phase `e^{i(ω t′ − k·x′)}` of the origin at node `i`.
    #[inline]
    pub fn origin_phase(&self, i: usize) -> C64 {
        let k = &self.grid.nodes[i];
        let ph = self.grid.omega[i] * self.origin.t - k.dot(&self.origin.x);
        C64::from_polar(1.0, ph)
    }

    /// Amplitudes with the origin phase folded in.
    pub fn effective(&self, parity: Parity, h: Helicity) -> Vec<C64> {
        let a = self.amplitudes(parity, h);
        if self.origin == SpacetimePoint::origin() {
            return a.to_vec();
        }
        a.iter()
            .enumerate()
            .map(|(i, &v)| v * self.origin_phase(i))
            .collect()
    }

    /// Same state expressed with origin at zero.
    pub fn rebased(&self) -> Self {
        let mut amp = zero_components(self.grid.len());
        for p in Parity::ALL {
            for h in Helicity::ALL {
                amp[p.index()][h.index()] = self.effective(p, h);
            }
        }
        KSpaceState {
            grid: self.grid.clone(),
            origin: SpacetimePoint::origin(),
            amp,
        }
    }

    pub fn same_grid(&self, other: &KSpaceState) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn check_same_grid(&self, other: &KSpaceState) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Config("states live on different grids".into()))
        }
    }

    pub fn scale_in_place(&mut self, c: C64) {
        for comp in self.amp.iter_mut().flatten() {
            for v in comp.iter_mut() {
                *v *= c;
            }
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut s = self.clone();
        s.scale_in_place(c);
        s
    }

    /// `α·s1 + β·s2`, returned with origin at zero.
    pub fn linear_combination(alpha: C64, s1: &Self, beta: C64, s2: &Self) -> Result<Self> {
        s1.check_same_grid(s2)?;
        let a = s1.rebased();
        let b = s2.rebased();
        let mut out = KSpaceState::zero(s1.grid.clone());
        for p in 0..2 {
            for h in 0..2 {
                for i in 0..out.grid.len() {
                    out.amp[p][h][i] = alpha * a.amp[p][h][i] + beta * b.amp[p][h][i];
                }
            }
        }
        Ok(out)
    }

    /// Copies the `(r, λ)` amplitudes into the `(r′, λ′)` slot.
    pub fn with_component_copied(mut self, from: (Parity, Helicity), to: (Parity, Helicity)) -> Self {
        let src = self.amp[from.0.index()][from.1.index()].clone();
        self.amp[to.0.index()][to.1.index()] = src;
        self
    }

    /// `Σ_λ Σ_i f_i |a_{rλ}|²` for one parity sector (flat measure).
    pub fn sector_flat_norm_sq(&self, parity: Parity) -> f64 {
        Helicity::ALL
            .iter()
            .map(|&h| {
                self.amplitudes(parity, h)
                    .iter()
                    .zip(&self.grid.flat)
                    .map(|(a, f)| f * a.norm_sqr())
                    .sum::<f64>()
            })
            .sum()
    }

    /// Probability normalization `Σ_λ ∫ dk/(2π)³ |a_{−1λ}|²`.
    pub fn born_norm_sq(&self) -> f64 {
        self.sector_flat_norm_sq(Parity::Odd)
    }

    /// Rescaled so that the covariant scalar product with itself is 1.
    pub fn normalized_covariant(&self) -> Result<Self> {
        let n = crate::scalar::scalar_product(self, self)?.re;
        if !(n > 0.0) {
            return Err(Error::Normalization("zero state cannot be normalized".into()));
        }
        Ok(self.scaled(C64::new(1.0 / n.sqrt(), 0.0)))
    }

    /// Sign-of-energy operator. With the frequency amplitudes
    ///
    /// ```text
    ///   a₊ = (a₁ + a₋₁)/2        (coefficient of e^{−ikx})
    ///   a₋ = conj(a₁ − a₋₁)/2    (coefficient of e^{+ikx})
    /// ```
    ///
    /// negating `a₋` while keeping `a₊` is the exchange `(a₁, a₋₁) → (a₋₁, a₁)`.
    pub fn sign_of_energy(&self) -> Self {
        let mut s = self.clone();
        s.amp.swap(0, 1);
        s
    }

    /// Frequency amplitudes `(a₊, a₋)` for helicity `h`, origin phase included.
    pub fn frequency_components(&self, h: Helicity) -> (Vec<C64>, Vec<C64>) {
        let e = self.effective(Parity::Even, h);
        let o = self.effective(Parity::Odd, h);
        let plus = e.iter().zip(&o).map(|(a, b)| (a + b) * 0.5).collect();
        let minus = e.iter().zip(&o).map(|(a, b)| ((a - b) * 0.5).conj()).collect();
        (plus, minus)
    }

    /// `Σ_λ ∫ dk/(2π)³ (|a_{λ+}|² − |a_{λ−}|²)`.
    pub fn conserved_charge(&self) -> f64 {
        let mut q = 0.0;
        for h in Helicity::ALL {
            let (p, m) = self.frequency_components(h);
            for i in 0..self.grid.len() {
                q += self.grid.flat[i] * (p[i].norm_sqr() - m[i].norm_sqr());
            }
        }
        q
    }

    /// Free evolution by `Δt`:`a_{rλ}(k) → a_{rλ}(k) e^{−iω Δt}` for both
    /// parities (`a₊` picks up `e^{−iωΔt}`, `a₋` picks up `e^{+iωΔt}`).
    pub fn time_evolved(&self, dt: f64) -> Self {
        let mut s = self.clone();
        for comp in s.amp.iter_mut().flatten() {
            for (i, v) in comp.iter_mut().enumerate() {
                *v *= C64::from_polar(1.0, -self.grid.omega[i] * dt);
            }
        }
        s
    }

    /// Sectors with any nonzero amplitude.
    pub fn has_component(&self, parity: Parity) -> bool {
        Helicity::ALL
            .iter()
            .any(|&h| self.amplitudes(parity, h).iter().any(|a| a.norm_sqr() > 0.0))
    }
}

/// Spherically symmetric state: amplitudes depend on `|k|` only and live on a
/// radial rule. Used by the radial fast paths of the propagator.
#[derive(Debug, Clone)]
pub struct RadialState {
    radial: Arc<RadialGrid>,
    amp: Components,
}

impl RadialState {
    pub fn zero(radial: Arc<RadialGrid>) -> Self {
        let n = radial.len();
        RadialState {
            radial,
            amp: zero_components(n),
        }
    }

    pub fn from_fn<F>(radial: Arc<RadialGrid>, parity: Parity, h: Helicity, f: F) -> Self
    where
        F: Fn(f64) -> C64,
    {
        let mut s = Self::zero(radial);
        let vals = s.radial.nodes.iter().map(|&k| f(k)).collect();
        s.amp[parity.index()][h.index()] = vals;
        s
    }

    /// Isotropic Gaussian shell `N exp(−(|k| − k₀)²/(4σ_k²))`, normalized with
    /// the flat measure in its `(r, λ)` sector.
    pub fn gaussian_shell(
        k0: f64,
        sigma_k: f64,
        h: Helicity,
        parity: Parity,
        radial: Arc<RadialGrid>,
    ) -> Result<Self> {
        if !(sigma_k > 0.0) || !(k0 > 0.0) {
            return Err(Error::Domain("shell needs k0 > 0 and sigma_k > 0".into()));
        }
        let density = |d: f64| (-(d * d) / (2.0 * sigma_k * sigma_k)).exp();
        if density(k0 - radial.k_min) > 1e-12 || density(radial.k_max - k0) > 1e-12 {
            return Err(Error::Resolution(
                "shell density tail exceeds 1e-12 at the radial grid edges".into(),
            ));
        }
        let mut s = Self::from_fn(radial, parity, h, |k| {
            C64::new((-(k - k0) * (k - k0) / (4.0 * sigma_k * sigma_k)).exp(), 0.0)
        });
        let n = s.sector_flat_norm_sq(parity);
        s.scale_in_place(1.0 / n.sqrt());
        Ok(s)
    }

    /// `exp(−k²σ²/2)` at the origin, not normalized.
    pub fn regularized_position(sigma: f64, h: Helicity, parity: Parity, radial: Arc<RadialGrid>) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("regularization width must be > 0, got {sigma}")));
        }
        Ok(Self::from_fn(radial, parity, h, |k| C64::new((-0.5 * k * k * sigma * sigma).exp(), 0.0)))
    }

    pub fn radial(&self) -> &Arc<RadialGrid> {
        &self.radial
    }

    pub fn amplitudes(&self, parity: Parity, h: Helicity) -> &[C64] {
        &self.amp[parity.index()][h.index()]
    }

    pub fn scale_in_place(&mut self, c: f64) {
        for comp in self.amp.iter_mut().flatten() {
            for v in comp.iter_mut() {
                *v *= c;
            }
        }
    }

    /// `Σ_λ ∫ dk/(2π)³ |a_{rλ}|² = Σ_λ (1/2π²) ∫ k² |a|² dk`.
    pub fn sector_flat_norm_sq(&self, parity: Parity) -> f64 {
        let r = &self.radial;
        Helicity::ALL
            .iter()
            .map(|&h| {
                self.amplitudes(parity, h)
                    .iter()
                    .zip(r.nodes.iter().zip(&r.weights))
                    .map(|(a, (k, w))| w * k * k * a.norm_sqr())
                    .sum::<f64>()
            })
            .sum::<f64>()
            / (2.0 * PI * PI)
    }

    pub fn born_norm_sq(&self) -> f64 {
        self.sector_flat_norm_sq(Parity::Odd)
    }

    /// Amplitudes multiplied by `e^{−iωΔt}`.
    pub fn time_evolved(&self, dt: f64) -> Self {
        let mut s = self.clone();
        for comp in s.amp.iter_mut().flatten() {
            for (v, &k) in comp.iter_mut().zip(&self.radial.nodes) {
                *v *= C64::from_polar(1.0, -k * dt);
            }
        }
        s
    }

    /// `a₁ = a₋₁`: copies the odd sector into the even one (pure positive energy).
    pub fn positive_energy(mut self) -> Self {
        self.amp[0] = self.amp[1].clone();
        self
    }

    /// Lifts onto a 3D grid whose radial rule equals this state's rule.
    pub fn to_kspace(&self, grid: Arc<QuadratureGrid>) -> Result<KSpaceState> {
        if grid.radial != *self.radial {
            return Err(Error::Config("3D grid radial rule differs from the radial state's".into()));
        }
        let per_shell = grid.params().n_costheta * grid.params().n_phi;
        let mut s = KSpaceState::zero(grid.clone());
        for p in 0..2 {
            for h in 0..2 {
                let src = &self.amp[p][h];
                for (i, v) in s.amp[p][h].iter_mut().enumerate() {
                    *v = src[i / per_shell];
                }
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridParams;

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

    fn close(a: &CVec3, b: &CVec3, tol: f64) -> bool {
        (a - b).iter().all(|d| d.norm() < tol)
    }

    #[test]
    fn polar_axis_convention() {
        let t = polarization_basis(&Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(t.e_theta, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(t.e_phi, Vec3::new(0.0, 1.0, 0.0));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = CVec3::new(C64::new(s, 0.0), C64::new(0.0, s), C64::new(0.0, 0.0));
        assert!(close(&t.e_lambda(Helicity::Plus), &expect, 1e-15));
    }

    #[test]
    fn diagonal_triad_matches_spherical_angles() {
        // θ = acos(1/√3), φ = π/4 evaluated by hand:
        // e_θ = (1/√6, 1/√6, −√(2/3)), e_φ = (−1/√2, 1/√2, 0).
        let k = Vec3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
        let t = polarization_basis(&k).unwrap();
        let r6 = 1.0 / 6f64.sqrt();
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((t.e_theta - Vec3::new(r6, r6, -(2.0f64 / 3.0).sqrt())).norm() < 1e-15);
        assert!((t.e_phi - Vec3::new(-r2, r2, 0.0)).norm() < 1e-15);
        assert!((t.e_k - k).norm() < 1e-15);
    }

    #[test]
    fn zero_k_is_domain_error() {
        let e = polarization_basis(&Vec3::zeros()).unwrap_err().to_string();
        assert!(e.contains("undefined polarization at k=0"));
    }

    #[test]
    fn momentum_eigenstate_amplitude_is_inverse_weight() {
        let g = grid(4, 2, 2, 0.5, 2.0);
        let i = 9;
        let s = KSpaceState::momentum_eigenstate(&g.nodes[i], Helicity::Minus, Parity::Odd, g.clone()).unwrap();
        // independent recomputation of w_i from the quadrature definition
        let (kr, wr) = crate::special::gauss_legendre(4, 0.5, 2.0);
        let (_, wc) = crate::special::gauss_legendre(2, -1.0, 1.0);
        let (ir, ic) = (i / 4, (i / 2) % 2);
        let w = wr[ir] * wc[ic] * PI * kr[ir] * kr[ir] / (8.0 * PI.powi(3) * kr[ir]);
        let a = s.amplitudes(Parity::Odd, Helicity::Minus)[i];
        assert!((a.re - 1.0 / w).abs() < 1e-12 / w);
        assert_eq!(s.amplitudes(Parity::Odd, Helicity::Plus)[i], C64::new(0.0, 0.0));
    }

    #[test]
    fn momentum_out_of_range() {
        let g = grid(4, 2, 2, 0.5, 2.0);
        let r = KSpaceState::momentum_eigenstate(&Vec3::new(0.0, 0.0, 3.0), Helicity::Plus, Parity::Odd, g);
        assert!(matches!(r, Err(Error::Range(_))));
    }

    #[test]
    fn position_eigenstate_is_pure_phase() {
        let g = grid(6, 4, 6, 0.1, 3.0);
        let x = Vec3::new(0.3, -1.0, 2.0);
        let s = KSpaceState::position_eigenstate(&x, Helicity::Plus, Parity::Odd, g.clone());
        let eff = s.effective(Parity::Odd, Helicity::Plus);
        for (i, a) in eff.iter().enumerate() {
            assert!((a.norm() - 1.0).abs() < 1e-14);
            let expect = C64::from_polar(1.0, -g.nodes[i].dot(&x));
            assert!((a - expect).norm() < 1e-13);
        }
        let s0 = KSpaceState::position_eigenstate(&Vec3::zeros(), Helicity::Plus, Parity::Odd, g);
        assert!(s0.effective(Parity::Odd, Helicity::Plus).iter().all(|a| *a == C64::new(1.0, 0.0)));
    }

    #[test]
    fn sign_of_energy_eigenvalues_and_involution() {
        let g = grid(6, 4, 6, 0.1, 3.0);
        let odd = KSpaceState::from_fn(g.clone(), Parity::Odd, Helicity::Plus, |k| C64::new(k.x, k.z * k.y));
        let pos = odd.clone().with_component_copied((Parity::Odd, Helicity::Plus), (Parity::Even, Helicity::Plus));
        let eps = pos.sign_of_energy();
        for p in Parity::ALL {
            assert_eq!(eps.amplitudes(p, Helicity::Plus), pos.amplitudes(p, Helicity::Plus));
        }
        let mut neg = pos.clone();
        for v in neg.amplitudes_mut(Parity::Odd, Helicity::Plus) {
            *v = -*v;
        }
        let eneg = neg.sign_of_energy();
        for p in Parity::ALL {
            for (a, b) in eneg.amplitudes(p, Helicity::Plus).iter().zip(neg.amplitudes(p, Helicity::Plus)) {
                assert_eq!(*a, -*b);
            }
        }
        let twice = odd.sign_of_energy().sign_of_energy();
        for p in Parity::ALL {
            for h in Helicity::ALL {
                assert_eq!(twice.amplitudes(p, h), odd.amplitudes(p, h));
            }
        }
    }

    #[test]
    fn conserved_charge_signs() {
        let g = grid(24, 8, 8, 1e-3, 8.0);
        let odd = KSpaceState::gaussian_wavepacket(&Vec3::new(0.0, 0.0, 3.0), 0.6, Helicity::Plus, Parity::Odd, g.clone());
        // the coarse angular grid cannot resolve this packet
        assert!(matches!(odd, Err(Error::Resolution(_))));
        let radial = Arc::new(g.radial.clone());
        let shell = RadialState::gaussian_shell(4.0, 0.5, Helicity::Plus, Parity::Odd, radial).unwrap();
        let odd = shell.to_kspace(g.clone()).unwrap();
        assert!(odd.conserved_charge().abs() < 1e-12);
        let even = odd.sign_of_energy();
        assert!(even.conserved_charge().abs() < 1e-12);
        let pos = odd.clone().with_component_copied((Parity::Odd, Helicity::Plus), (Parity::Even, Helicity::Plus));
        assert!((pos.conserved_charge() - 1.0).abs() < 1e-12);
        let neg = negate_odd(&pos);
        assert!((neg.conserved_charge() + 1.0).abs() < 1e-12);
        for dt in [0.5, 3.0, 17.0] {
            assert!((pos.time_evolved(dt).conserved_charge() - 1.0).abs() < 1e-12);
        }
    }

    fn negate_odd(s: &KSpaceState) -> KSpaceState {
        let mut n = s.clone();
        for h in Helicity::ALL {
            for v in n.amplitudes_mut(Parity::Odd, h) {
                *v = -*v;
            }
        }
        n
    }
}
