//! Quadrature rules and special functions used by the kernels.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[a, b]`, nodes strictly increasing.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = (b - a) / 2.0;
    let mid = (b + a) / 2.0;
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let theta = PI * (i as f64 + 0.75) / (n as f64 + 0.5);
        let mut z = theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        // z runs from +1 downwards; store ascending.
        x[i] = mid - half * z;
        x[n - 1 - i] = mid + half * z;
        w[i] = half * wi;
        w[n - 1 - i] = half * wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Dawson's integral `F(x) = e^{-x²} ∫₀ˣ e^{t²} dt`.
///
/// Rybicki's sampling-theorem sum for moderate `x` (error ~ `exp(-(π/2h)²)`
/// with `h = 0.2`), the asymptotic series beyond `|x| = 10`.
pub fn dawson(x: f64) -> f64 {
    let ax = x.abs();
    let val = if ax < 1e-4 {
        ax * (1.0 - 2.0 * ax * ax / 3.0)
    } else if ax > 10.0 {
        let inv2 = 1.0 / (2.0 * ax * ax);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..30 {
            term *= (2 * k - 1) as f64 * inv2;
            sum += term;
            if term < 1e-17 {
                break;
            }
        }
        sum / (2.0 * ax)
    } else {
        const H: f64 = 0.2;
        // Centre the sum on the odd lattice point nearest x.
        let n0 = 2 * ((0.5 * ax / H).round() as i64);
        let x0 = n0 as f64 * H;
        let xp = ax - x0;
        let mut sum = 0.0;
        let reach = 40;
        for j in 0..reach {
            let odd = (2 * j + 1) as f64;
            let a = odd * H;
            // terms at n0 ± odd
            let plus = (-(xp - a) * (xp - a)).exp() / (n0 as f64 + odd);
            let minus = (-(xp + a) * (xp + a)).exp() / (n0 as f64 - odd);
            sum += plus + minus;
        }
        sum / PI.sqrt()
    };
    val.copysign(x)
}

/// Gaussian-regularized delta `exp(-s²/(2σ²))/(σ√(2π))`.
#[inline]
pub fn gaussian_delta(s: f64, sigma: f64) -> f64 {
    (-(s * s) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
}

/// Hard k-cutoff delta `sin(s/σ)/(π s)`, cutoff wavenumber `1/σ`.
#[inline]
pub fn sinc_delta(s: f64, sigma: f64) -> f64 {
    if s.abs() < 1e-12 * sigma {
        1.0 / (PI * sigma)
    } else {
        (s / sigma).sin() / (PI * s)
    }
}

/// `∫₀^∞ sin(k s) exp(-k²σ²/2) dk`, the Gaussian-regularized principal value `P(1/s)`.
pub fn regularized_principal_value(s: f64, sigma: f64) -> f64 {
    2f64.sqrt() / sigma * dawson(s / (sigma * 2f64.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8, -1.0, 2.0);
        for deg in 0..16 {
            let num: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = (2f64.powi(deg + 1) - (-1f64).powi(deg + 1)) / (deg + 1) as f64;
            assert!((num - exact).abs() < 1e-12 * exact.abs().max(1.0), "deg {deg}");
        }
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn gl_large_n_weights_sum() {
        let (x, w) = gauss_legendre(1001, 0.0, 3.0);
        let s: f64 = w.iter().sum();
        assert!((s - 3.0).abs() < 1e-12);
        assert!(x[0] > 0.0 && x[1000] < 3.0);
        assert!((x[500] - 1.5).abs() < 1e-14);
    }

    // Independent route: Simpson integration of the defining integral.
    fn dawson_simpson(x: f64) -> f64 {
        let n = 400_000;
        let h = x / n as f64;
        let f = |t: f64| (t * t - x * x).exp();
        let mut s = f(0.0) + f(x);
        for i in 1..n {
            let t = i as f64 * h;
            s += if i % 2 == 1 { 4.0 * f(t) } else { 2.0 * f(t) };
        }
        s * h / 3.0
    }

    #[test]
    fn dawson_matches_quadrature() {
        for &x in &[0.01, 0.3, 0.9241, 1.5, 2.7, 4.0, 6.5, 9.9, 10.1] {
            let a = dawson(x);
            let b = dawson_simpson(x);
            assert!((a - b).abs() < 1e-11 * b.abs(), "x={x}: {a} vs {b}");
            assert_eq!(dawson(-x), -a);
        }
        // maximum of F at x ≈ 0.9241
        assert!((dawson(0.924_138_873_6) - 0.541_044_224_5).abs() < 1e-9);
    }

    #[test]
    fn principal_value_tends_to_inverse() {
        let s = 50.0;
        let pv = regularized_principal_value(s, 1.0);
        assert!((pv * s - 1.0).abs() < 1e-3);
    }
}
