//! Truncated multi-mode Fock space on grid modes.
//!
//! Mode `m` sits on grid node `i` with helicity `λ`. Its ladder operators are
//! `a = √ν b`, `ν = 1/w_i = (2π)³ω_i/v_i`, where `b` is the dimensionless
//! lowering matrix, so `[a, a†] = ν` is the grid form of `(2π)³ω δ(k − k′)`.
//!
//! Field operators are linear in the ladder operators,
//! `X = Σ_m (α_m b_m + ᾱ_m b_m†)` with a 3-vector `α_m`. They are built as
//! matrices for small mode sets. Vacuum expectations of commutators only touch
//! the single-excitation sector and are also available in closed form for
//! arbitrarily many modes.

use std::sync::Arc;

use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use rayon::prelude::*;

use crate::grid::QuadratureGrid;
use crate::kspace::{polarization_basis, Helicity, SpacetimePoint};
use crate::units::Constants;
use crate::{CVec3, Error, Result, Vec3, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Dimension at which operators switch from dense to sparse storage.
pub const DENSE_LIMIT: usize = 4096;

/// Distinct `(node, helicity)` modes with their polarization vectors.
#[derive(Debug, Clone)]
pub struct ModeSet {
    grid: Arc<QuadratureGrid>,
    modes: Vec<(usize, Helicity)>,
    pol: Vec<CVec3>,
    pub consts: Constants,
}

impl ModeSet {
    pub fn new(grid: Arc<QuadratureGrid>, modes: Vec<(usize, Helicity)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(i, h) in &modes {
            if i >= grid.len() {
                return Err(Error::Range(format!("node {i} outside grid of {}", grid.len())));
            }
            if !seen.insert((i, h)) {
                return Err(Error::Config(format!("mode ({i}, {:+}) listed twice", h.value())));
            }
        }
        let pol = modes
            .iter()
            .map(|&(i, h)| Ok(polarization_basis(&grid.nodes[i])?.e_lambda(h)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModeSet {
            grid,
            modes,
            pol,
            consts: Constants::NATURAL,
        })
    }

    /// Every node of the grid in helicity `h`.
    pub fn all_nodes(grid: Arc<QuadratureGrid>, h: Helicity) -> Result<Self> {
        let modes = (0..grid.len()).map(|i| (i, h)).collect();
        Self::new(grid, modes)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn mode(&self, m: usize) -> (usize, Helicity) {
        self.modes[m]
    }

    /// `ν_m = 1/w_i`.
    pub fn nu(&self, m: usize) -> f64 {
        1.0 / self.grid.covariant[self.modes[m].0]
    }

    /// Coefficients `α_m` of `b_m` in `Â(x, t)`:
    /// `Â = −i√(ħ/2ε₀) Σ w √ν [b e_λ e^{−ikx} − b† e_λ* e^{ikx}]`, `kx = ωt − k·x`.
    pub fn potential_coeffs(&self, p: &SpacetimePoint) -> Vec<CVec3> {
        let c0 = self.consts.field_prefactor();
        (0..self.len())
            .map(|m| {
                let i = self.modes[m].0;
                let w = self.grid.covariant[i];
                let ph = self.grid.omega[i] * p.t - self.grid.nodes[i].dot(&p.x);
                let s = -I * c0 * w * self.nu(m).sqrt() * C64::from_polar(1.0, -ph);
                self.pol[m] * s
            })
            .collect()
    }

    /// Coefficients of `Ê⊥ = −∂ₜÂ`: `iω α`.
    pub fn electric_coeffs(&self, p: &SpacetimePoint) -> Vec<CVec3> {
        self.potential_coeffs(p)
            .into_iter()
            .enumerate()
            .map(|(m, a)| a * (I * self.grid.omega[self.modes[m].0]))
            .collect()
    }

    /// Coefficients of `B̂ = ∇×Â`: `ik × α`.
    pub fn magnetic_coeffs(&self, p: &SpacetimePoint) -> Vec<CVec3> {
        self.potential_coeffs(p)
            .into_iter()
            .enumerate()
            .map(|(m, a)| {
                let k = self.grid.nodes[self.modes[m].0];
                let kc = CVec3::new(C64::new(k.x, 0.0), C64::new(k.y, 0.0), C64::new(k.z, 0.0));
                kc.cross(&a) * I
            })
            .collect()
    }
}

/// Occupation basis `(n₁..n_M)`, `n_m ≤ n_max`, in mixed radix with mode 0 fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    pub n_modes: usize,
    pub n_max: usize,
    pub dim: usize,
}

impl FockBasis {
    pub fn new(n_modes: usize, n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::Config("n_max must be ≥ 1".into()));
        }
        let mut dim: usize = 1;
        for _ in 0..n_modes {
            dim = dim
                .checked_mul(n_max + 1)
                .filter(|&d| d <= 50_000_000)
                .ok_or_else(|| Error::Config(format!("Fock dimension (n_max+1)^M too large for M = {n_modes}")))?;
        }
        Ok(FockBasis { n_modes, n_max, dim })
    }

    pub fn stride(&self, m: usize) -> usize {
        (self.n_max + 1).pow(m as u32)
    }

    pub fn occupation(&self, idx: usize, m: usize) -> usize {
        (idx / self.stride(m)) % (self.n_max + 1)
    }

    pub fn occupations(&self, idx: usize) -> Vec<usize> {
        (0..self.n_modes).map(|m| self.occupation(idx, m)).collect()
    }

    pub fn index(&self, occ: &[usize]) -> usize {
        occ.iter().enumerate().map(|(m, &n)| n * self.stride(m)).sum()
    }

    /// True when no mode sits at the cutoff.
    pub fn below_cutoff(&self, idx: usize) -> bool {
        (0..self.n_modes).all(|m| self.occupation(idx, m) < self.n_max)
    }
}

/// Storage choice for [`OperatorMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    Dense,
    Sparse,
}

impl Storage {
    pub fn for_dim(dim: usize) -> Storage {
        if dim < DENSE_LIMIT {
            Storage::Dense
        } else {
            Storage::Sparse
        }
    }
}

/// Complex matrix on a truncated Fock basis.
#[derive(Debug, Clone)]
pub enum OperatorMatrix {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix<C64>),
}

impl OperatorMatrix {
    pub fn from_triplets(dim: usize, trip: &[(usize, usize, C64)]) -> Self {
        Self::from_triplets_as(Storage::for_dim(dim), dim, trip)
    }

    pub fn from_triplets_as(storage: Storage, dim: usize, trip: &[(usize, usize, C64)]) -> Self {
        match storage {
            Storage::Dense => {
                let mut m = DMatrix::from_element(dim, dim, ZERO);
                for &(r, c, v) in trip {
                    m[(r, c)] += v;
                }
                OperatorMatrix::Dense(m)
            }
            Storage::Sparse => {
                let mut coo = CooMatrix::new(dim, dim);
                for &(r, c, v) in trip {
                    coo.push(r, c, v);
                }
                OperatorMatrix::Sparse(CsrMatrix::from(&coo))
            }
        }
    }

    pub fn identity_as(storage: Storage, dim: usize) -> Self {
        let trip: Vec<_> = (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
        Self::from_triplets_as(storage, dim, &trip)
    }

    pub fn storage(&self) -> Storage {
        match self {
            OperatorMatrix::Dense(_) => Storage::Dense,
            OperatorMatrix::Sparse(_) => Storage::Sparse,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorMatrix::Dense(m) => m.nrows(),
            OperatorMatrix::Sparse(m) => m.nrows(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        match self {
            OperatorMatrix::Dense(m) => m[(r, c)],
            OperatorMatrix::Sparse(m) => m.get_entry(r, c).map(|e| e.into_value()).unwrap_or(ZERO),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match self {
            OperatorMatrix::Dense(m) => m.clone(),
            OperatorMatrix::Sparse(m) => DMatrix::from(m),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        match (self, other) {
            (OperatorMatrix::Dense(a), OperatorMatrix::Dense(b)) => OperatorMatrix::Dense(a * b),
            (OperatorMatrix::Sparse(a), OperatorMatrix::Sparse(b)) => OperatorMatrix::Sparse(a * b),
            (a, b) => OperatorMatrix::Dense(a.to_dense() * b.to_dense()),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        match (self, other) {
            (OperatorMatrix::Dense(a), OperatorMatrix::Dense(b)) => OperatorMatrix::Dense(a - b),
            (OperatorMatrix::Sparse(a), OperatorMatrix::Sparse(b)) => OperatorMatrix::Sparse(a - b),
            (a, b) => OperatorMatrix::Dense(a.to_dense() - b.to_dense()),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (OperatorMatrix::Dense(a), OperatorMatrix::Dense(b)) => OperatorMatrix::Dense(a + b),
            (OperatorMatrix::Sparse(a), OperatorMatrix::Sparse(b)) => OperatorMatrix::Sparse(a + b),
            (a, b) => OperatorMatrix::Dense(a.to_dense() + b.to_dense()),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        match self {
            OperatorMatrix::Dense(a) => OperatorMatrix::Dense(a * s),
            OperatorMatrix::Sparse(a) => {
                let mut b = a.clone();
                b.values_mut().iter_mut().for_each(|v| *v *= s);
                OperatorMatrix::Sparse(b)
            }
        }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            OperatorMatrix::Dense(a) => OperatorMatrix::Dense(a.adjoint()),
            OperatorMatrix::Sparse(a) => {
                let mut t = a.transpose();
                t.values_mut().iter_mut().for_each(|v| *v = v.conj());
                OperatorMatrix::Sparse(t)
            }
        }
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        match self {
            OperatorMatrix::Dense(a) => {
                let x = nalgebra::DVector::from_column_slice(v);
                (a * x).as_slice().to_vec()
            }
            OperatorMatrix::Sparse(a) => a
                .row_iter()
                .map(|row| row.col_indices().iter().zip(row.values()).map(|(&c, &x)| x * v[c]).sum())
                .collect(),
        }
    }

    /// `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &FockVector) -> C64 {
        let av = self.apply(&v.coeffs);
        v.coeffs.iter().zip(&av).map(|(a, b)| a.conj() * b).sum()
    }

    /// `max |A_rc|` over rows and columns selected by `keep`.
    pub fn max_abs_where<F: Fn(usize) -> bool>(&self, keep: F) -> f64 {
        match self {
            OperatorMatrix::Dense(a) => {
                let mut m: f64 = 0.0;
                for c in 0..a.ncols() {
                    if !keep(c) {
                        continue;
                    }
                    for r in 0..a.nrows() {
                        if keep(r) {
                            m = m.max(a[(r, c)].norm());
                        }
                    }
                }
                m
            }
            OperatorMatrix::Sparse(a) => a
                .triplet_iter()
                .filter(|(r, c, _)| keep(*r) && keep(*c))
                .map(|(_, _, v)| v.norm())
                .fold(0.0, f64::max),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_where(|_| true)
    }
}

/// Complex vector on a [`FockBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub basis: FockBasis,
    pub coeffs: Vec<C64>,
}

impl FockVector {
    pub fn vacuum(basis: FockBasis) -> Self {
        let mut coeffs = vec![ZERO; basis.dim];
        coeffs[0] = C64::new(1.0, 0.0);
        FockVector { basis, coeffs }
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &FockVector) -> C64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn applied(&self, op: &OperatorMatrix) -> FockVector {
        FockVector {
            basis: self.basis,
            coeffs: op.apply(&self.coeffs),
        }
    }
}

/// Ladder operators `a_m = √ν_m b_m` and their adjoints for every mode.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub basis: FockBasis,
    /// Dimensionless `b_m`.
    pub b: Vec<OperatorMatrix>,
    pub a: Vec<OperatorMatrix>,
    pub a_dag: Vec<OperatorMatrix>,
    pub nu: Vec<f64>,
}

fn lowering_triplets(basis: &FockBasis, m: usize) -> Vec<(usize, usize, C64)> {
    let stride = basis.stride(m);
    (0..basis.dim)
        .filter_map(|idx| {
            let n = basis.occupation(idx, m);
            (n > 0).then(|| (idx - stride, idx, C64::new((n as f64).sqrt(), 0.0)))
        })
        .collect()
}

pub fn ladder_operators(modes: &ModeSet, n_max: usize) -> Result<Ladder> {
    ladder_operators_as(modes, n_max, None)
}

/// As [`ladder_operators`] with the storage forced, for cross-checking the two paths.
pub fn ladder_operators_as(modes: &ModeSet, n_max: usize, storage: Option<Storage>) -> Result<Ladder> {
    let basis = FockBasis::new(modes.len(), n_max)?;
    let st = storage.unwrap_or(Storage::for_dim(basis.dim));
    let b: Vec<OperatorMatrix> = (0..modes.len())
        .into_par_iter()
        .map(|m| OperatorMatrix::from_triplets_as(st, basis.dim, &lowering_triplets(&basis, m)))
        .collect();
    let nu: Vec<f64> = (0..modes.len()).map(|m| modes.nu(m)).collect();
    let a: Vec<OperatorMatrix> = b.iter().zip(&nu).map(|(b, n)| b.scale(C64::new(n.sqrt(), 0.0))).collect();
    let a_dag = a.iter().map(|a| a.adjoint()).collect();
    Ok(Ladder { basis, b, a, a_dag, nu })
}

impl Ladder {
    pub fn storage(&self) -> Storage {
        self.b.first().map(|b| b.storage()).unwrap_or(Storage::Dense)
    }

    /// `b_m† b_m`.
    pub fn number_operator(&self, m: usize) -> OperatorMatrix {
        let trip: Vec<_> = (0..self.basis.dim)
            .map(|i| (i, i, C64::new(self.basis.occupation(i, m) as f64, 0.0)))
            .collect();
        OperatorMatrix::from_triplets_as(self.storage(), self.basis.dim, &trip)
    }

    /// `Σ_m (c_m b_m + c̄_m b_m†)` for one Cartesian component.
    pub fn linear_operator(&self, coeffs: &[C64]) -> OperatorMatrix {
        let mut trip = Vec::new();
        for (m, &c) in coeffs.iter().enumerate() {
            for (r, col, v) in lowering_triplets(&self.basis, m) {
                trip.push((r, col, c * v));
                trip.push((col, r, c.conj() * v));
            }
        }
        OperatorMatrix::from_triplets_as(self.storage(), self.basis.dim, &trip)
    }

    /// Cartesian components of a field from its per-mode vector coefficients.
    pub fn vector_operator(&self, coeffs: &[CVec3]) -> [OperatorMatrix; 3] {
        let comp = |j: usize| self.linear_operator(&coeffs.iter().map(|c| c[j]).collect::<Vec<_>>());
        [comp(0), comp(1), comp(2)]
    }

    /// Largest residual of the ladder algebra on states below the cutoff:
    /// `[a_i, a_j]`, `[a_i†, a_j†]` and `[a_i, a_j†] − ν_i δ_ij`.
    pub fn commutator_residual(&self) -> f64 {
        let m = self.a.len();
        let basis = self.basis;
        let keep = |i: usize| basis.below_cutoff(i);
        let id = OperatorMatrix::identity_as(self.storage(), basis.dim);
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let aa = self.a[i].commutator(&self.a[j]).max_abs();
                let dd = self.a_dag[i].commutator(&self.a_dag[j]).max_abs();
                let mut ad = self.a[i].commutator(&self.a_dag[j]);
                if i == j {
                    ad = ad.sub(&id.scale(C64::new(self.nu[i], 0.0)));
                }
                let scale = if i == j { self.nu[i] } else { 1.0 };
                worst = worst.max(aa).max(dd).max(ad.max_abs_where(keep) / scale);
            }
        }
        worst
    }
}

/// `|n⟩` in mode `m`, built as `(a†)ⁿ|0⟩/√(n! νⁿ)`.
pub fn n_photon_state(ladder: &Ladder, m: usize, n: usize) -> Result<FockVector> {
    if n > ladder.basis.n_max {
        return Err(Error::Range(format!("n = {n} exceeds n_max = {}", ladder.basis.n_max)));
    }
    if m >= ladder.a.len() {
        return Err(Error::Range(format!("mode {m} outside the mode set")));
    }
    let mut v = FockVector::vacuum(ladder.basis);
    for _ in 0..n {
        v = v.applied(&ladder.a_dag[m]);
    }
    let norm = ((1..=n).map(|k| k as f64).product::<f64>() * ladder.nu[m].powi(n as i32)).sqrt();
    v.coeffs.iter_mut().for_each(|c| *c /= norm);
    Ok(v)
}

/// `Â`, `Ê⊥` and `B̂` as matrices on the truncated space at one spacetime point.
#[derive(Debug, Clone)]
pub struct FieldOperators {
    pub a: [OperatorMatrix; 3],
    pub e: [OperatorMatrix; 3],
    pub b: [OperatorMatrix; 3],
}

pub fn field_operator(modes: &ModeSet, ladder: &Ladder, p: &SpacetimePoint) -> FieldOperators {
    FieldOperators {
        a: ladder.vector_operator(&modes.potential_coeffs(p)),
        e: ladder.vector_operator(&modes.electric_coeffs(p)),
        b: ladder.vector_operator(&modes.magnetic_coeffs(p)),
    }
}

/// `⟨0|[X, Y]|0⟩` summed over components, for linear fields with coefficients
/// `α_m` (of `X`) and `γ_m` (of `Y`): `Σ_m (α_m·γ̄_m − γ_m·ᾱ_m)`.
pub fn vacuum_commutator(x: &[CVec3], y: &[CVec3]) -> C64 {
    x.iter()
        .zip(y)
        .map(|(a, g)| {
            let ag: C64 = (0..3).map(|j| a[j] * g[j].conj()).sum();
            let ga: C64 = (0..3).map(|j| g[j] * a[j].conj()).sum();
            ag - ga
        })
        .sum()
}

fn restrict<T: Clone>(modes: &ModeSet, h: Helicity, v: Vec<T>) -> Vec<T> {
    v.into_iter()
        .enumerate()
        .filter(|(m, _)| modes.mode(*m).1 == h)
        .map(|(_, x)| x)
        .collect()
}

/// `⟨0|Ĉ_λ|0⟩` with `Ĉ_λ = i(ε₀/ħ)[Â_λ(p)·Ê_λ(p′) − Ê_λ(p′)·Â_λ(p)]`, over the
/// modes of helicity `λ`, from the single-excitation sector.
///
/// This equals `Σ_i f_i cos(ωΔt − k·Δx)`. At equal times it is the discrete
/// `δ(x − x′)`; in general it is `−∂ₜφ₋₁`, the density kernel of the odd
/// field of a position eigenstate at `x′`.
pub fn causality_commutator(modes: &ModeSet, h: Helicity, p: &SpacetimePoint, pp: &SpacetimePoint) -> C64 {
    let a = restrict(modes, h, modes.potential_coeffs(p));
    let e = restrict(modes, h, modes.electric_coeffs(pp));
    I * (modes.consts.eps0 / modes.consts.hbar) * vacuum_commutator(&a, &e)
}

/// `(ε₀/ħ)⟨0|[Â_λ(p)·Â_λ(p′)]|0⟩ = i φ₋₁(p; p′)`, the Pauli–Jordan function.
pub fn potential_commutator(modes: &ModeSet, h: Helicity, p: &SpacetimePoint, pp: &SpacetimePoint) -> C64 {
    let a = restrict(modes, h, modes.potential_coeffs(p));
    let b = restrict(modes, h, modes.potential_coeffs(pp));
    (modes.consts.eps0 / modes.consts.hbar) * vacuum_commutator(&a, &b)
}

/// Matrix route for `⟨0|Ĉ_λ|0⟩`. The mode set should contain only helicity `λ`.
pub fn causality_commutator_matrix(modes: &ModeSet, ladder: &Ladder, p: &SpacetimePoint, pp: &SpacetimePoint) -> C64 {
    let a = ladder.vector_operator(&modes.potential_coeffs(p));
    let e = ladder.vector_operator(&modes.electric_coeffs(pp));
    let mut c = a[0].commutator(&e[0]);
    for j in 1..3 {
        c = c.add(&a[j].commutator(&e[j]));
    }
    let vac = FockVector::vacuum(ladder.basis);
    I * (modes.consts.eps0 / modes.consts.hbar) * c.expectation(&vac)
}

/// Poisson tail `Σ_{n > n_max} e^{−|α|²}|α|^{2n}/n!`.
pub fn poisson_tail(alpha: C64, n_max: usize) -> f64 {
    let lam = alpha.norm_sqr();
    if lam == 0.0 {
        return 0.0;
    }
    // log p_n for n = n_max + 1, then recur upward
    let n0 = n_max + 1;
    let mut logp = -lam + n0 as f64 * lam.ln() - (1..=n0).map(|k| (k as f64).ln()).sum::<f64>();
    let mut tail = 0.0;
    let mut n = n0;
    loop {
        let p = logp.exp();
        tail += p;
        n += 1;
        logp += lam.ln() - (n as f64).ln();
        if (n as f64) > lam && p < 1e-20 * tail.max(1e-300) || n > n0 + 10_000 {
            break;
        }
    }
    tail
}

/// Coherent state `⊗_m Σ_n e^{−|α_m|²/2} α_mⁿ/√(n!) |n⟩` in the `b` basis.
pub fn coherent_state(basis: FockBasis, alphas: &[C64]) -> Result<FockVector> {
    if alphas.len() != basis.n_modes {
        return Err(Error::Config(format!("{} amplitudes for {} modes", alphas.len(), basis.n_modes)));
    }
    for &a in alphas {
        if poisson_tail(a, basis.n_max) > 1e-10 {
            let mut need = basis.n_max;
            while poisson_tail(a, need) > 1e-10 {
                need += 1;
            }
            return Err(Error::Truncation {
                message: format!("Poisson tail of |α| = {:.3} beyond n_max = {} exceeds 1e-10", a.norm(), basis.n_max),
                required_n_max: need,
            });
        }
    }
    let per_mode: Vec<Vec<C64>> = alphas
        .iter()
        .map(|&a| {
            let mut c = Vec::with_capacity(basis.n_max + 1);
            let mut cur = C64::new((-a.norm_sqr() / 2.0).exp(), 0.0);
            c.push(cur);
            for n in 1..=basis.n_max {
                cur = cur * a / (n as f64).sqrt();
                c.push(cur);
            }
            c
        })
        .collect();
    let coeffs = (0..basis.dim)
        .into_par_iter()
        .map(|idx| (0..basis.n_modes).map(|m| per_mode[m][basis.occupation(idx, m)]).product())
        .collect();
    Ok(FockVector { basis, coeffs })
}

/// `⟨{α}|Â(p)|{α}⟩` two ways: matrix expectation on the truncated state, and the closed form
/// `−i√(ħ/2ε₀) Σ w √ν [α e_λ e^{−ikx} − α* e_λ* e^{ikx}]`.
pub fn classical_expectation(modes: &ModeSet, ladder: &Ladder, alphas: &[C64], p: &SpacetimePoint) -> Result<(CVec3, CVec3)> {
    let psi = coherent_state(ladder.basis, alphas)?;
    let coeffs = modes.potential_coeffs(p);
    let ops = ladder.vector_operator(&coeffs);
    let matrix = CVec3::new(ops[0].expectation(&psi), ops[1].expectation(&psi), ops[2].expectation(&psi));
    Ok((matrix, closed_form_potential(modes, alphas, p)))
}

/// Closed-form coherent expectation of `Â` for any number of modes.
pub fn closed_form_potential(modes: &ModeSet, alphas: &[C64], p: &SpacetimePoint) -> CVec3 {
    let coeffs = modes.potential_coeffs(p);
    let mut out = CVec3::zeros();
    for (c, &a) in coeffs.iter().zip(alphas) {
        for j in 0..3 {
            out[j] += c[j] * a + (c[j] * a).conj();
        }
    }
    out
}

/// Point pair helper for the vacuum identities.
pub fn spacetime(t: f64, x: Vec3) -> SpacetimePoint {
    SpacetimePoint::new(t, x)
}
