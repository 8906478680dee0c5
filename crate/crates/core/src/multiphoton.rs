//! Two-photon states, the 1D waveguide beam splitter, entangled pairs and
//! Born-rule detection sampling.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::kspace::{Helicity, KSpaceState};
use crate::scalar::{scalar_product, DensityField};
use crate::{Error, Result, Vec3, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// What a two-photon state needs from its one-photon factors.
pub trait OnePhoton: Clone {
    fn inner(&self, other: &Self) -> Result<C64>;
    /// Structural identity, used to pick the product convention in [`symmetrize`].
    fn same_state(&self, other: &Self) -> bool;
}

impl OnePhoton for KSpaceState {
    fn inner(&self, other: &Self) -> Result<C64> {
        scalar_product(self, other)
    }

    fn same_state(&self, other: &Self) -> bool {
        self.same_grid(other)
            && self.origin() == other.origin()
            && crate::kspace::Parity::ALL.iter().all(|&p| {
                Helicity::ALL
                    .iter()
                    .all(|&h| self.amplitudes(p, h) == other.amplitudes(p, h))
            })
    }
}

/// `Σ_t c_t [a_t(x₁) b_t(x₂) + b_t(x₁) a_t(x₂)]`, exchange-symmetric by construction.
#[derive(Debug, Clone)]
pub struct SymmetrizedPair<S: OnePhoton> {
    pub terms: Vec<(C64, S, S)>,
}

impl<S: OnePhoton> SymmetrizedPair<S> {
    /// Two-photon amplitude, given a one-photon evaluator.
    pub fn amplitude<X, F: Fn(&S, &X) -> C64>(&self, eval: F, x1: &X, x2: &X) -> C64 {
        self.terms
            .iter()
            .map(|(c, a, b)| c * (eval(a, x1) * eval(b, x2) + eval(b, x1) * eval(a, x2)))
            .sum()
    }

    pub fn norm_sq(&self) -> Result<f64> {
        Ok(two_photon_scalar_product(self, self)?.re)
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sq()?;
        if !(n > 0.0) {
            return Err(Error::Normalization("two-photon state has zero norm".into()));
        }
        let s = 1.0 / n.sqrt();
        for t in &mut self.terms {
            t.0 *= s;
        }
        Ok(self)
    }

    /// `⟨S| P⊗Q + Q⊗P |S⟩` for one-photon maps `P`, `Q`. For orthogonal projectors
    /// this is the probability of finding one photon in each.
    pub fn pair_expectation<P, Q>(&self, p: P, q: Q) -> Result<f64>
    where
        P: Fn(&S) -> S,
        Q: Fn(&S) -> S,
    {
        let mut acc = ZERO;
        for (cs, as_, bs) in &self.terms {
            for (ct, at, bt) in &self.terms {
                let w = cs.conj() * ct;
                let (pa, pb, qa, qb) = (p(at), p(bt), q(at), q(bt));
                // ⟨a_s b_s + b_s a_s| (P⊗Q + Q⊗P) |a_t b_t + b_t a_t⟩
                let mut s = ZERO;
                for (x, y) in [(as_, bs), (bs, as_)] {
                    s += x.inner(&pa)? * y.inner(&qb)? + x.inner(&pb)? * y.inner(&qa)?;
                    s += x.inner(&qa)? * y.inner(&pb)? + x.inner(&qb)? * y.inner(&pa)?;
                }
                acc += w * s;
            }
        }
        Ok(acc.re)
    }
}

/// `(A₄A₃, A₂A₁) = (A₄,A₂)(A₃,A₁) + (A₄,A₁)(A₃,A₂)` extended bilinearly over terms,
/// with `Sym(a, b) = a⊗b + b⊗a` giving `⟨Sym(a,b)|Sym(c,d)⟩ = 2[(a,c)(b,d) + (a,d)(b,c)]`.
pub fn two_photon_scalar_product<S: OnePhoton>(s: &SymmetrizedPair<S>, t: &SymmetrizedPair<S>) -> Result<C64> {
    let mut acc = ZERO;
    for (cs, a, b) in &s.terms {
        for (ct, c, d) in &t.terms {
            let v = a.inner(c)? * b.inner(d)? + a.inner(d)? * b.inner(c)?;
            acc += cs.conj() * ct * 2.0 * v;
        }
    }
    Ok(acc)
}

/// `(1/√2)[A_j(x₁)A_k(x₂) + A_j(x₂)A_k(x₁)]`.
///
/// Identical inputs give the plain product `A_j(x₁)A_j(x₂)` with no `√2`, which is
/// the normalized state when `A_j` is normalized.
pub fn symmetrize<S: OnePhoton>(a: &S, b: &S) -> Result<SymmetrizedPair<S>> {
    a.inner(b)?;
    let c = if a.same_state(b) { 0.5 } else { FRAC_1_SQRT_2 };
    Ok(SymmetrizedPair {
        terms: vec![(C64::new(c, 0.0), a.clone(), b.clone())],
    })
}

/// Uniform 1D sample grid `x_i = x0 + i·dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if !(dx > 0.0) || n < 2 {
            return Err(Error::Config("1D grid needs dx > 0 and n ≥ 2".into()));
        }
        Ok(Grid1D { x0, dx, n })
    }

    /// `n` points symmetric about 0 spanning `[−half, half]`.
    pub fn symmetric(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, 2.0 * half / (n - 1) as f64, n)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

/// One travelling branch: envelope samples of `u = x − ct` or `v = x + ct`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub helicity: Helicity,
    pub envelope: Vec<C64>,
}

impl Branch {
    fn zero(h: Helicity, n: usize) -> Self {
        Branch {
            helicity: h,
            envelope: vec![ZERO; n],
        }
    }

    fn norm_sq(&self, dx: f64) -> f64 {
        self.envelope.iter().map(|f| f.norm_sqr()).sum::<f64>() * dx
    }

    fn is_zero(&self) -> bool {
        self.envelope.iter().all(|f| *f == ZERO)
    }

    /// Envelope at characteristic coordinate `s`. Whole-cell shifts read a
    /// sample directly; anything else interpolates linearly. Zero outside the grid.
    pub fn at(&self, grid: &Grid1D, s: f64) -> C64 {
        let pos = (s - grid.x0) / grid.dx;
        let near = pos.round();
        if (pos - near).abs() < 1e-9 {
            return if near >= 0.0 && (near as usize) < grid.n {
                self.envelope[near as usize]
            } else {
                ZERO
            };
        }
        if pos < 0.0 || pos > (grid.n - 1) as f64 {
            return ZERO;
        }
        let i = (pos.floor() as usize).min(grid.n - 2);
        let f = pos - i as f64;
        self.envelope[i] * (1.0 - f) + self.envelope[i + 1] * f
    }
}

/// `ψ_λ(x, t) = f₊(x − ct) + f₋(x + ct)` in a 1D waveguide.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveguide1DState {
    pub grid: Grid1D,
    pub right: Branch,
    pub left: Branch,
}

/// Travel direction of a waveguide branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Right,
    Left,
}

impl Waveguide1DState {
    pub fn zero(grid: Grid1D) -> Self {
        Waveguide1DState {
            grid,
            right: Branch::zero(Helicity::Plus, grid.n),
            left: Branch::zero(Helicity::Plus, grid.n),
        }
    }

    /// Single right-moving pulse from `f(u)`, normalized to 1.
    pub fn right_pulse<F: Fn(f64) -> C64>(grid: Grid1D, h: Helicity, f: F) -> Result<Self> {
        let mut s = Self::zero(grid);
        s.right.helicity = h;
        s.right.envelope = grid.points().into_iter().map(f).collect();
        s.normalized()
    }

    /// Gaussian pulse `exp(−u²/(4w²) + ik₀u)` moving right.
    pub fn gaussian_pulse(grid: Grid1D, h: Helicity, width: f64, k0: f64) -> Result<Self> {
        Self::right_pulse(grid, h, |u| C64::from_polar((-(u * u) / (4.0 * width * width)).exp(), k0 * u))
    }

    /// Both branches from envelope functions, not normalized.
    pub fn from_branches<F, G>(grid: Grid1D, right: (Helicity, F), left: (Helicity, G)) -> Self
    where
        F: Fn(f64) -> C64,
        G: Fn(f64) -> C64,
    {
        let pts = grid.points();
        Waveguide1DState {
            grid,
            right: Branch {
                helicity: right.0,
                envelope: pts.iter().map(|&u| (right.1)(u)).collect(),
            },
            left: Branch {
                helicity: left.0,
                envelope: pts.iter().map(|&v| (left.1)(v)).collect(),
            },
        }
    }

    pub fn branch(&self, d: Direction) -> &Branch {
        match d {
            Direction::Right => &self.right,
            Direction::Left => &self.left,
        }
    }

    /// `Σ_branches ∫|f|² dx`.
    pub fn norm_sq(&self) -> f64 {
        self.right.norm_sq(self.grid.dx) + self.left.norm_sq(self.grid.dx)
    }

    pub fn is_zero(&self) -> bool {
        self.right.is_zero() && self.left.is_zero()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sq();
        if !(n > 0.0) {
            return Err(Error::Normalization("waveguide state has zero norm".into()));
        }
        let s = 1.0 / n.sqrt();
        for f in self.right.envelope.iter_mut().chain(self.left.envelope.iter_mut()) {
            *f *= s;
        }
        Ok(self)
    }

    /// `(P_right, P_left)` as ratios of branch norms.
    pub fn branch_probabilities(&self) -> (f64, f64) {
        let r = self.right.norm_sq(self.grid.dx);
        let l = self.left.norm_sq(self.grid.dx);
        let t = r + l;
        if t == 0.0 {
            (0.0, 0.0)
        } else {
            (r / t, l / t)
        }
    }

    /// Amplitude of helicity `h` at `(x, t)`.
    pub fn amplitude(&self, h: Helicity, x: f64, t: f64) -> C64 {
        let mut a = ZERO;
        if self.right.helicity == h {
            a += self.right.at(&self.grid, x - t);
        }
        if self.left.helicity == h {
            a += self.left.at(&self.grid, x + t);
        }
        a
    }

    /// `Σ_λ |ψ_λ(x, t)|²`.
    pub fn density(&self, x: f64, t: f64) -> f64 {
        Helicity::ALL.iter().map(|&h| self.amplitude(h, x, t).norm_sqr()).sum()
    }

    /// Position density on `xs` as a [`DensityField`] with cell weights `dx`.
    pub fn position_density(&self, xs: &Grid1D, t: f64) -> DensityField {
        let points = xs.points().into_iter().map(|x| Vec3::new(x, 0.0, 0.0)).collect();
        let vals = xs.points().into_iter().map(|x| self.density(x, t)).collect();
        DensityField::new(points, vec![xs.dx; xs.n], vals, self.norm_sq())
    }

    /// Keep only the branch travelling in `d`, and only if it carries helicity `h`.
    pub fn project(&self, d: Direction, h: Helicity) -> Self {
        let mut out = self.clone();
        let keep_right = d == Direction::Right && self.right.helicity == h;
        let keep_left = d == Direction::Left && self.left.helicity == h;
        if !keep_right {
            out.right.envelope.iter_mut().for_each(|f| *f = ZERO);
        }
        if !keep_left {
            out.left.envelope.iter_mut().for_each(|f| *f = ZERO);
        }
        out
    }
}

impl OnePhoton for Waveguide1DState {
    fn inner(&self, other: &Self) -> Result<C64> {
        if self.grid != other.grid {
            return Err(Error::Config("waveguide states live on different grids".into()));
        }
        let dot = |a: &Branch, b: &Branch| -> C64 {
            if a.helicity != b.helicity {
                return ZERO;
            }
            a.envelope.iter().zip(&b.envelope).map(|(x, y)| x.conj() * y).sum::<C64>() * self.grid.dx
        };
        Ok(dot(&self.right, &other.right) + dot(&self.left, &other.left))
    }

    fn same_state(&self, other: &Self) -> bool {
        self == other
    }
}

/// `(1/√2)[A(x − ct) + A(x + ct)]`: one input pulse split into both directions.
///
/// The input must be a single normalized right mover. The zero state maps to itself.
pub fn beam_split(s: &Waveguide1DState) -> Result<Waveguide1DState> {
    if s.is_zero() {
        return Ok(s.clone());
    }
    if !s.left.is_zero() {
        return Err(Error::Domain("beam_split expects a single right-moving pulse".into()));
    }
    let n = s.norm_sq();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Normalization(format!("input pulse has norm² {n}, expected 1")));
    }
    let half: Vec<C64> = s.right.envelope.iter().map(|f| f * FRAC_1_SQRT_2).collect();
    Ok(Waveguide1DState {
        grid: s.grid,
        right: Branch {
            helicity: s.right.helicity,
            envelope: half.clone(),
        },
        left: Branch {
            helicity: s.right.helicity,
            envelope: half,
        },
    })
}

/// Unequal splitter: `√(1−R) A(x − ct) + √R A(x + ct)` for reflectance `R ∈ [0, 1]`.
pub fn beam_split_ratio(s: &Waveguide1DState, reflectance: f64) -> Result<Waveguide1DState> {
    if !(0.0..=1.0).contains(&reflectance) {
        return Err(Error::Domain(format!("reflectance {reflectance} outside [0, 1]")));
    }
    let mut out = beam_split(s)?;
    let (t, r) = (((1.0 - reflectance) * 2.0).sqrt(), (reflectance * 2.0).sqrt());
    out.right.envelope.iter_mut().for_each(|f| *f *= t);
    out.left.envelope.iter_mut().for_each(|f| *f *= r);
    Ok(out)
}

/// Reverses the left-arm envelope, `f₋(v) → f₋(−v)`, which flips the sign of
/// its carrier wavenumber. Needs a grid symmetric about 0.
pub fn fold_left(s: &Waveguide1DState) -> Result<Waveguide1DState> {
    let g = s.grid;
    if (g.x0 + g.x(g.n - 1)).abs() > 1e-9 * g.dx {
        return Err(Error::Domain("fold_left needs a grid symmetric about x = 0".into()));
    }
    let mut out = s.clone();
    out.left.envelope.reverse();
    Ok(out)
}

/// Inverse splitter with relative phase `φ` on the left arm:
/// `f₊′ = (f₊ + e^{iφ}f₋)/√2`, `f₋′ = (f₊ − e^{iφ}f₋)/√2`.
pub fn recombine(s: &Waveguide1DState, phase: f64) -> Result<Waveguide1DState> {
    if s.right.helicity != s.left.helicity && !s.right.is_zero() && !s.left.is_zero() {
        return Err(Error::Domain("recombine needs both arms in the same helicity".into()));
    }
    let h = if s.right.is_zero() { s.left.helicity } else { s.right.helicity };
    let e = C64::from_polar(1.0, phase);
    let (r, l): (Vec<C64>, Vec<C64>) = s
        .right
        .envelope
        .iter()
        .zip(&s.left.envelope)
        .map(|(a, b)| ((a + e * b) * FRAC_1_SQRT_2, (a - e * b) * FRAC_1_SQRT_2))
        .unzip();
    Ok(Waveguide1DState {
        grid: s.grid,
        right: Branch { helicity: h, envelope: r },
        left: Branch { helicity: h, envelope: l },
    })
}

/// Zero-momentum pair: `Σ_λ Sym(R_λ, L_{−λ})`, with `R_λ` the envelope moving
/// right in helicity `λ` and `L_{−λ}` the same envelope moving left in `−λ`.
/// Normalized explicitly, which gives each term the coefficient ½.
pub fn entangled_pair<F: Fn(f64) -> C64>(grid: Grid1D, envelope: F) -> Result<SymmetrizedPair<Waveguide1DState>> {
    let samples: Vec<C64> = grid.points().into_iter().map(envelope).collect();
    let mut terms = Vec::new();
    for h in Helicity::ALL {
        let mut r = Waveguide1DState::zero(grid);
        r.right = Branch {
            helicity: h,
            envelope: samples.clone(),
        };
        let mut l = Waveguide1DState::zero(grid);
        l.left = Branch {
            helicity: h.flip(),
            envelope: samples.clone(),
        };
        terms.push((C64::new(1.0, 0.0), r.normalized()?, l.normalized()?));
    }
    SymmetrizedPair { terms }.normalized()
}

/// `P(λ_R, λ_L)`: one photon counted right in helicity `λ_R`, the other left in `λ_L`.
/// Indexed by [`Helicity::index`].
pub fn joint_helicity(s: &SymmetrizedPair<Waveguide1DState>) -> Result<[[f64; 2]; 2]> {
    let mut out = [[0.0; 2]; 2];
    for hr in Helicity::ALL {
        for hl in Helicity::ALL {
            out[hr.index()][hl.index()] = s.pair_expectation(
                |a: &Waveguide1DState| a.project(Direction::Right, hr),
                |a: &Waveguide1DState| a.project(Direction::Left, hl),
            )?;
        }
    }
    Ok(out)
}

/// Helicity distribution at the right detector, summed over the left one.
pub fn marginal_helicity_right(s: &SymmetrizedPair<Waveguide1DState>) -> Result<[f64; 2]> {
    let j = joint_helicity(s)?;
    Ok([j[0][0] + j[0][1], j[1][0] + j[1][1]])
}

/// Conditional state of the partner after a right-branch count of helicity `λ`
/// at `(x, t)`, normalized.
pub fn collapse(
    s: &SymmetrizedPair<Waveguide1DState>,
    x: f64,
    t: f64,
    h: Helicity,
) -> Result<Waveguide1DState> {
    let grid = s
        .terms
        .first()
        .map(|t| t.1.grid)
        .ok_or_else(|| Error::InvalidDetection("empty two-photon state".into()))?;
    let u = x - t;
    let eval = |a: &Waveguide1DState| if a.right.helicity == h { a.right.at(&a.grid, u) } else { ZERO };
    let mut out = Waveguide1DState::zero(grid);
    let mut left_h: Option<Helicity> = None;
    let mut right_h: Option<Helicity> = None;
    for (c, a, b) in &s.terms {
        for (detected, partner) in [(a, b), (b, a)] {
            let amp = c * eval(detected);
            if amp == ZERO {
                continue;
            }
            for (slot, src, seen) in [
                (&mut out.right, &partner.right, &mut right_h),
                (&mut out.left, &partner.left, &mut left_h),
            ] {
                if src.is_zero() {
                    continue;
                }
                match seen {
                    Some(prev) if *prev != src.helicity => {
                        return Err(Error::Domain("conditional state mixes helicities within one branch".into()))
                    }
                    _ => *seen = Some(src.helicity),
                }
                slot.helicity = src.helicity;
                for (o, f) in slot.envelope.iter_mut().zip(&src.envelope) {
                    *o += amp * f;
                }
            }
        }
    }
    let n = out.norm_sq();
    if !(n > 1e-300) {
        return Err(Error::InvalidDetection(format!(
            "no amplitude for a helicity {:+} count at x = {x}, t = {t}",
            h.value()
        )));
    }
    out.normalized()
}

/// Per-cell probabilities of a normalized density.
fn cumulative(density: &DensityField) -> Result<Vec<f64>> {
    if density.values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::Normalization("density has negative or non-finite cells".into()));
    }
    if (density.total - 1.0).abs() > 1e-6 {
        return Err(Error::Normalization(format!(
            "density integrates to {}, expected 1",
            density.total
        )));
    }
    let mut acc = 0.0;
    Ok(density
        .weights
        .iter()
        .zip(&density.values)
        .map(|(w, v)| {
            acc += w * v;
            acc
        })
        .collect())
}

fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cdf.last().unwrap_or(&0.0);
    let u: f64 = rng.random::<f64>() * total;
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// One Born-rule detection: index of the cell where the photon is counted.
pub fn sample_detection(density: &DensityField, seed: u64) -> Result<usize> {
    let cdf = cumulative(density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(draw(&cdf, &mut rng))
}

/// `trials` independent single-photon detections, one per trial. Trial `i`
/// draws from stream `i` of the generator seeded with `seed`, so the result
/// does not depend on the thread count.
pub fn sample_detections(density: &DensityField, seed: u64, trials: usize) -> Result<Vec<usize>> {
    let cdf = cumulative(density)?;
    Ok((0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            draw(&cdf, &mut rng)
        })
        .collect())
}

/// Interference measurements on an x grid.
#[derive(Debug, Clone, Serialize)]
pub struct FringePattern {
    pub x: Vec<f64>,
    /// Born density `Σ_λ|ψ_λ|²`.
    pub density: Vec<f64>,
    /// `|f₊|² + |f₋|² + 2|f₊||f₋|cos(arg f₊ − arg f₋)` per helicity, summed.
    pub classical: Vec<f64>,
    pub visibility: f64,
    pub period: Option<f64>,
}

/// Density and fringe parameters of two overlapping branches at time `t`.
///
/// The normalized modulation `n(x) = I/(I₁ + I₂) − 1` is fitted by
/// `A cos(qx) + B sin(qx)`, `q = 2π/period`, and `V = √(A² + B²)`. The period
/// comes from the mean spacing of zero crossings of `n`.
pub fn fringe_pattern(s: &Waveguide1DState, xs: &Grid1D, t: f64) -> FringePattern {
    let x = xs.points();
    let mut density = Vec::with_capacity(x.len());
    let mut classical = Vec::with_capacity(x.len());
    let mut incoherent = Vec::with_capacity(x.len());
    for &xi in &x {
        density.push(s.density(xi, t));
        let mut cl = 0.0;
        let mut inc = 0.0;
        for h in Helicity::ALL {
            let fr = if s.right.helicity == h { s.right.at(&s.grid, xi - t) } else { ZERO };
            let fl = if s.left.helicity == h { s.left.at(&s.grid, xi + t) } else { ZERO };
            let (i1, i2) = (fr.norm_sqr(), fl.norm_sqr());
            cl += i1 + i2 + 2.0 * fr.norm() * fl.norm() * (fr.arg() - fl.arg()).cos();
            inc += i1 + i2;
        }
        classical.push(cl);
        incoherent.push(inc);
    }
    let peak = incoherent.iter().cloned().fold(0.0, f64::max);
    let mask: Vec<bool> = incoherent.iter().map(|&i| peak > 0.0 && i > 1e-3 * peak).collect();
    let n: Vec<f64> = density
        .iter()
        .zip(&incoherent)
        .map(|(d, i)| if *i > 0.0 { d / i - 1.0 } else { 0.0 })
        .collect();

    let mut crossings = Vec::new();
    for i in 1..x.len() {
        if mask[i] && mask[i - 1] && n[i - 1].abs() > 1e-12 && n[i].abs() > 1e-12 && n[i - 1].signum() != n[i].signum() {
            let f = n[i - 1] / (n[i - 1] - n[i]);
            crossings.push(x[i - 1] + f * (x[i] - x[i - 1]));
        }
    }
    let period = if crossings.len() >= 3 {
        Some(2.0 * (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
    } else {
        None
    };
    let visibility = match period {
        Some(p) => {
            let q = 2.0 * std::f64::consts::PI / p;
            let (mut cc, mut ss, mut cs, mut yc, mut ys) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..x.len() {
                if !mask[i] {
                    continue;
                }
                let (c, s_) = ((q * x[i]).cos(), (q * x[i]).sin());
                cc += c * c;
                ss += s_ * s_;
                cs += c * s_;
                yc += n[i] * c;
                ys += n[i] * s_;
            }
            let det = cc * ss - cs * cs;
            if det.abs() < 1e-300 {
                0.0
            } else {
                let a = (yc * ss - ys * cs) / det;
                let b = (ys * cc - yc * cs) / det;
                (a * a + b * b).sqrt()
            }
        }
        None => 0.0,
    };
    if visibility == 0.0 {
        log::warn!("branches do not overlap on the sampled interval; visibility 0");
    }
    FringePattern {
        x,
        density,
        classical,
        visibility,
        period,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid1D {
        Grid1D::symmetric(30.0, 3001).unwrap()
    }

    #[test]
    fn beam_split_probabilities_and_norm() {
        let p = Waveguide1DState::gaussian_pulse(grid(), Helicity::Plus, 1.5, 2.0).unwrap();
        let s = beam_split(&p).unwrap();
        assert_eq!(s.branch_probabilities(), (0.5, 0.5));
        assert!((s.norm_sq() - 1.0).abs() < 1e-12);
        let back = recombine(&s, 0.0).unwrap();
        for (a, b) in back.right.envelope.iter().zip(&p.right.envelope) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!(back.left.is_zero() || back.left.envelope.iter().all(|f| f.norm() < 1e-10));
    }

    #[test]
    fn beam_split_rejects_unnormalized() {
        let mut p = Waveguide1DState::gaussian_pulse(grid(), Helicity::Plus, 1.5, 2.0).unwrap();
        p.right.envelope.iter_mut().for_each(|f| *f *= 2.0);
        assert!(matches!(beam_split(&p), Err(Error::Normalization(_))));
        let z = Waveguide1DState::zero(grid());
        assert!(beam_split(&z).unwrap().is_zero());
    }

    #[test]
    fn branches_move_by_index_shift() {
        let g = grid();
        let p = Waveguide1DState::gaussian_pulse(g, Helicity::Minus, 1.0, 0.0).unwrap();
        let s = beam_split(&p).unwrap();
        let shift = 50.0 * g.dx;
        let i = 1500;
        assert_eq!(s.amplitude(Helicity::Minus, g.x(i) + shift, shift), s.right.envelope[i] + s.left.envelope[i + 100]);
    }

    #[test]
    fn symmetrize_conventions() {
        let g = grid();
        let a = Waveguide1DState::gaussian_pulse(g, Helicity::Plus, 1.0, 1.0).unwrap();
        let b = Waveguide1DState::gaussian_pulse(g, Helicity::Minus, 1.0, 1.0).unwrap();
        let ab = symmetrize(&a, &b).unwrap();
        let ba = symmetrize(&b, &a).unwrap();
        assert!((ab.norm_sq().unwrap() - 1.0).abs() < 1e-12);
        assert!((two_photon_scalar_product(&ab, &ba).unwrap() - 1.0).norm() < 1e-12);
        let aa = symmetrize(&a, &a).unwrap();
        assert!((aa.norm_sq().unwrap() - 1.0).abs() < 1e-12);
        // product form: amplitude(x1, x2) = A(x1) A(x2)
        let eval = |s: &Waveguide1DState, x: &f64| s.amplitude(Helicity::Plus, *x, 0.0);
        let (x1, x2) = (0.3, -1.1);
        let lhs = aa.amplitude(eval, &x1, &x2);
        assert!((lhs - eval(&a, &x1) * eval(&a, &x2)).norm() < 1e-15);
        assert_eq!(ab.amplitude(eval, &x1, &x2), ab.amplitude(eval, &x2, &x1));
    }

    #[test]
    fn disjoint_support_is_orthogonal() {
        let g = grid();
        let a = Waveguide1DState::right_pulse(g, Helicity::Plus, |u| C64::new(if u < -10.0 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        let b = Waveguide1DState::right_pulse(g, Helicity::Plus, |u| C64::new(if u > 10.0 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        let c = Waveguide1DState::gaussian_pulse(g, Helicity::Minus, 1.0, 0.0).unwrap();
        let s = symmetrize(&a, &c).unwrap();
        let t = symmetrize(&b, &c).unwrap();
        assert_eq!(two_photon_scalar_product(&s, &t).unwrap(), ZERO);
    }

    #[test]
    fn entangled_pair_correlations() {
        let g = grid();
        let pair = entangled_pair(g, |u| C64::new((-(u * u) / 4.0).exp(), 0.0)).unwrap();
        assert!((pair.norm_sq().unwrap() - 1.0).abs() < 1e-12);
        let j = joint_helicity(&pair).unwrap();
        assert!((j[0][1] + j[1][0] - 1.0).abs() < 1e-12);
        assert!(j[0][0].abs() < 1e-15 && j[1][1].abs() < 1e-15);
        let m = marginal_helicity_right(&pair).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);
        let eval = |s: &Waveguide1DState, x: &(f64, Helicity)| s.amplitude(x.1, x.0, 2.0);
        let (p1, p2) = ((2.3, Helicity::Plus), (-1.7, Helicity::Minus));
        assert_eq!(pair.amplitude(eval, &p1, &p2), pair.amplitude(eval, &p2, &p1));
    }

    #[test]
    fn collapse_leaves_opposite_helicity() {
        let g = grid();
        let env = |u: f64| C64::from_polar((-(u * u) / 4.0).exp(), 0.7 * u);
        let pair = entangled_pair(g, env).unwrap();
        for h in Helicity::ALL {
            let rest = collapse(&pair, 3.0, 3.0, h).unwrap();
            assert!((rest.norm_sq() - 1.0).abs() < 1e-12);
            assert!(rest.right.is_zero());
            assert_eq!(rest.left.helicity, h.flip());
            // position density follows |f₋|²
            let norm: f64 = g.points().iter().map(|&u| env(u).norm_sqr()).sum::<f64>() * g.dx;
            for &x in &[-4.0, -3.0, -2.5] {
                let d = rest.density(x, 3.0);
                assert!((d - env(x + 3.0).norm_sqr() / norm).abs() < 1e-12);
            }
        }
        let far = collapse(&pair, 1e3, 0.0, Helicity::Plus);
        assert!(matches!(far, Err(Error::InvalidDetection(_))));
    }

    #[test]
    fn detection_sampling() {
        let g = Grid1D::new(0.0, 1.0, 10).unwrap();
        let mut vals = vec![0.0; 10];
        vals[3] = 1.0;
        let d = DensityField::new(g.points().iter().map(|&x| Vec3::new(x, 0.0, 0.0)).collect(), vec![1.0; 10], vals, 1.0);
        assert!(sample_detections(&d, 7, 1000).unwrap().iter().all(|&i| i == 3));
        assert_eq!(sample_detection(&d, 1).unwrap(), 3);
        let a = sample_detections(&d, 5, 100).unwrap();
        assert_eq!(a, sample_detections(&d, 5, 100).unwrap());
        let bad = DensityField::new(vec![Vec3::zeros(); 2], vec![1.0; 2], vec![0.7, 0.7], 1.0);
        assert!(matches!(sample_detection(&bad, 0), Err(Error::Normalization(_))));
    }

    #[test]
    fn fringes_equal_and_unequal_arms() {
        let g = grid();
        let k0 = 3.0;
        let env = |s: f64| (-(s * s) / (4.0 * 25.0)).exp();
        let xs = Grid1D::symmetric(10.0, 4001).unwrap();
        for (pr, expect) in [(0.5f64, 1.0), (0.25, 3f64.sqrt() / 2.0)] {
            let st = Waveguide1DState::from_branches(
                g,
                (Helicity::Plus, |u: f64| C64::from_polar(pr.sqrt() * env(u), k0 * u)),
                (Helicity::Plus, |v: f64| C64::from_polar((1.0 - pr).sqrt() * env(v), -k0 * v)),
            );
            let f = fringe_pattern(&st, &xs, 0.0);
            assert!((f.visibility - expect).abs() < 1e-3, "{}", f.visibility);
            assert!((f.period.unwrap() - PI / k0).abs() < 0.01 * PI / k0);
            for (a, b) in f.density.iter().zip(&f.classical) {
                assert!((a - b).abs() < 1e-8);
            }
        }
        let one = Waveguide1DState::from_branches(g, (Helicity::Plus, |u: f64| C64::new(env(u), 0.0)), (Helicity::Plus, |_| ZERO));
        assert_eq!(fringe_pattern(&one, &xs, 0.0).visibility, 0.0);
    }

    #[test]
    fn unequal_split_and_fold() {
        let g = grid();
        let p = Waveguide1DState::gaussian_pulse(g, Helicity::Plus, 1.5, 2.0).unwrap();
        let s = beam_split_ratio(&p, 0.25).unwrap();
        let (pr, pl) = s.branch_probabilities();
        assert!((pr - 0.75).abs() < 1e-12 && (pl - 0.25).abs() < 1e-12);
        assert!(beam_split_ratio(&p, 1.5).is_err());
        let f = fold_left(&s).unwrap();
        for x in [-3.0, -0.4, 0.0, 1.7] {
            let a = f.branch(Direction::Left).at(&g, x);
            let b = s.branch(Direction::Left).at(&g, -x);
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(f.branch_probabilities(), s.branch_probabilities());
        let lopsided = Grid1D::new(-10.0, 0.1, 150).unwrap();
        assert!(fold_left(&Waveguide1DState::zero(lopsided)).is_err());
    }
}
