use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use photonwave::fock::{self, ModeSet};
use photonwave::kspace::polarization_basis;
use photonwave::multiphoton::{self, two_photon_scalar_product, Grid1D, SymmetrizedPair, Waveguide1DState};
use photonwave::propagator;
use photonwave::scalar::scalar_product;
use photonwave::{GridParams, Helicity, KSpaceState, Parity, QuadratureGrid, SpacetimePoint, Vec3, C64};

fn grid() -> Arc<QuadratureGrid> {
    static G: OnceLock<Arc<QuadratureGrid>> = OnceLock::new();
    G.get_or_init(|| {
        Arc::new(
            QuadratureGrid::new(GridParams {
                n_radial: 10,
                n_costheta: 6,
                n_phi: 8,
                k_min: 0.2,
                k_max: 4.0,
            })
            .unwrap(),
        )
    })
    .clone()
}

fn random_state(seed: u64) -> KSpaceState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = KSpaceState::zero(grid());
    for p in Parity::ALL {
        for h in Helicity::ALL {
            for a in s.amplitudes_mut(p, h) {
                *a = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
    }
    let o = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    s.with_origin(SpacetimePoint::new(rng.random_range(-1.0..1.0), o))
}

fn relabel_helicity(s: &KSpaceState) -> KSpaceState {
    let mut out = KSpaceState::zero(s.grid().clone());
    let s = s.clone().with_origin(s.origin());
    for p in Parity::ALL {
        for h in Helicity::ALL {
            out.amplitudes_mut(p, h.flip()).copy_from_slice(s.amplitudes(p, h));
        }
    }
    out.with_origin(s.origin())
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn triads_orthonormal_and_transverse(x in -10.0..10.0f64, y in -10.0..10.0f64, z in -10.0..10.0f64) {
        let k = Vec3::new(x, y, z);
        prop_assume!(k.norm() > 1e-6);
        let t = polarization_basis(&k).unwrap();
        let v = [t.e_theta, t.e_phi, t.e_k];
        for i in 0..3 {
            for j in 0..3 {
                let d = if i == j { 1.0 } else { 0.0 };
                prop_assert!((v[i].dot(&v[j]) - d).abs() < 1e-14);
            }
        }
        prop_assert!((t.e_k - k / k.norm()).norm() < 1e-14);
        for h in Helicity::ALL {
            let e = t.e_lambda(h);
            let kc = k.map(|q| c(q, 0.0));
            prop_assert!(e.dotc(&kc).norm() < 1e-14 * k.norm());
            prop_assert!((e.dotc(&e).re - 1.0).abs() < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scalar_product_is_sesquilinear(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(),
                                      ar in -2.0..2.0f64, ai in -2.0..2.0f64, br in -2.0..2.0f64, bi in -2.0..2.0f64) {
        let (x, y, z) = (random_state(s1), random_state(s2), random_state(s3));
        let (a, b) = (c(ar, ai), c(br, bi));
        let lhs = scalar_product(&KSpaceState::linear_combination(a, &x, b, &y).unwrap(), &z).unwrap();
        let rhs = a.conj() * scalar_product(&x, &z).unwrap() + b.conj() * scalar_product(&y, &z).unwrap();
        let scale = (a.norm() + b.norm()) * scalar_product(&x, &x).unwrap().re.max(scalar_product(&y, &y).unwrap().re).sqrt()
            * scalar_product(&z, &z).unwrap().re.sqrt();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
    }

    #[test]
    fn helicity_blocks_are_exactly_orthogonal(s1 in any::<u64>(), s2 in any::<u64>(), pa in 0usize..2, pb in 0usize..2) {
        let pick = |s: KSpaceState, p: Parity, h: Helicity| {
            let mut out = KSpaceState::zero(grid());
            out.amplitudes_mut(p, h).copy_from_slice(s.amplitudes(p, h));
            out.with_origin(s.origin())
        };
        let (p, q) = (Parity::ALL[pa], Parity::ALL[pb]);
        let a = pick(random_state(s1), p, Helicity::Plus);
        let b = pick(random_state(s2), q, Helicity::Minus);
        prop_assert_eq!(scalar_product(&a, &b).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn sign_of_energy_involution_and_relabeling(s in any::<u64>()) {
        let x = random_state(s);
        let twice = x.sign_of_energy().sign_of_energy();
        let once_relabel = relabel_helicity(&x.sign_of_energy());
        let relabel_once = relabel_helicity(&x).sign_of_energy();
        for p in Parity::ALL {
            for h in Helicity::ALL {
                prop_assert_eq!(twice.amplitudes(p, h), x.amplitudes(p, h));
                prop_assert_eq!(once_relabel.amplitudes(p, h), relabel_once.amplitudes(p, h));
            }
        }
        // eigenvalue +1 on a₁ = a₋₁, −1 on a₁ = −a₋₁
        let pos = x.clone().with_component_copied((Parity::Odd, Helicity::Plus), (Parity::Even, Helicity::Plus));
        let mut neg = pos.clone();
        let flipped: Vec<C64> = pos.amplitudes(Parity::Odd, Helicity::Plus).iter().map(|v| -v).collect();
        neg.amplitudes_mut(Parity::Even, Helicity::Plus).copy_from_slice(&flipped);
        let (sp, sn) = (pos.sign_of_energy(), neg.sign_of_energy());
        for sector in [Parity::Even, Parity::Odd] {
            prop_assert_eq!(sp.amplitudes(sector, Helicity::Plus), pos.amplitudes(sector, Helicity::Plus));
            let minus: Vec<C64> = neg.amplitudes(sector, Helicity::Plus).iter().map(|v| -v).collect();
            prop_assert_eq!(sn.amplitudes(sector, Helicity::Plus), &minus[..]);
        }
    }

    #[test]
    fn charge_invariant_under_time_translation(s in any::<u64>(), dt in -50.0..50.0f64) {
        let x = random_state(s);
        let q = x.conserved_charge();
        prop_assert!((x.time_evolved(dt).conserved_charge() - q).abs() < 1e-12 * (1.0 + q.abs()));
    }

    #[test]
    fn wavefunction_time_shift_is_phase_evolution(s in any::<u64>(), dt in -2.0..2.0f64,
                                                  x in -0.5..0.5f64, t in -0.5..0.5f64) {
        let st = random_state(s);
        let p = Vec3::new(x, 0.3 * x, -0.2);
        for par in Parity::ALL {
            for h in Helicity::ALL {
                let a = propagator::wavefunction(&st, par, h, &p, t + dt);
                let b = propagator::wavefunction(&st.time_evolved(dt), par, h, &p, t);
                prop_assert!(close(a, b, 1e-10));
            }
        }
    }
}

fn pulse(g: Grid1D, seed: u64) -> Waveguide1DState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, k0, x0) = (rng.random_range(0.5..2.0), rng.random_range(-3.0..3.0), rng.random_range(-5.0..5.0));
    let h = if rng.random::<bool>() { Helicity::Plus } else { Helicity::Minus };
    Waveguide1DState::right_pulse(g, h, |u: f64| C64::from_polar((-(u - x0).powi(2) / (4.0 * w * w)).exp(), k0 * u))
        .unwrap()
        .normalized()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn two_photon_product_ignores_order(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), s4 in any::<u64>()) {
        let (a, b, x, y) = (random_state(s1), random_state(s2), random_state(s3), random_state(s4));
        let s = multiphoton::symmetrize(&a, &b).unwrap();
        let s_rev = multiphoton::symmetrize(&b, &a).unwrap();
        let t = multiphoton::symmetrize(&x, &y).unwrap();
        let t_rev = multiphoton::symmetrize(&y, &x).unwrap();
        let base = two_photon_scalar_product(&s, &t).unwrap();
        for (p, q) in [(&s_rev, &t), (&s, &t_rev), (&s_rev, &t_rev)] {
            prop_assert!(close(two_photon_scalar_product(p, q).unwrap(), base, 1e-12));
        }
        let mixed = SymmetrizedPair { terms: vec![(c(0.5, 0.0), a.clone(), b.clone()), (c(0.0, 0.5), x.clone(), y.clone())] };
        let swapped = SymmetrizedPair { terms: vec![(c(0.0, 0.5), y, x), (c(0.5, 0.0), b, a)] };
        prop_assert!(close(two_photon_scalar_product(&mixed, &t).unwrap(), two_photon_scalar_product(&swapped, &t).unwrap(), 1e-12));
    }

    #[test]
    fn split_recombine_round_trip(seed in any::<u64>(), rounds in 1usize..4) {
        let g = Grid1D::symmetric(30.0, 1201).unwrap();
        let p = pulse(g, seed);
        let mut s = p.clone();
        for _ in 0..rounds {
            let split = multiphoton::beam_split(&s).unwrap();
            prop_assert!((split.norm_sq() - 1.0).abs() < 1e-12);
            s = multiphoton::recombine(&split, 0.0).unwrap();
        }
        let worst = s.right.envelope.iter().zip(&p.right.envelope).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-10);
        prop_assert!(s.left.envelope.iter().all(|f| f.norm() < 1e-10));
    }

    #[test]
    fn one_detection_per_trial(seed in any::<u64>(), trials in 1usize..5000) {
        let g = Grid1D::symmetric(30.0, 1201).unwrap();
        let split = multiphoton::beam_split(&pulse(g, seed)).unwrap();
        let d = split.position_density(&g, 12.0);
        let hits = multiphoton::sample_detections(&d, seed, trials).unwrap();
        prop_assert_eq!(hits.len(), trials);
        prop_assert!(hits.iter().all(|&i| i < d.points.len()));
    }
}

#[test]
fn branch_frequency_error_shrinks_like_inverse_sqrt_n() {
    let g = Grid1D::symmetric(30.0, 1201).unwrap();
    let p = Waveguide1DState::gaussian_pulse(g, Helicity::Plus, 1.0, 2.0).unwrap();
    let split = multiphoton::beam_split(&p).unwrap();
    let d = split.position_density(&g, 15.0);
    // rms deviation over independent seeds, scaled by √N, stays near the binomial 1/2
    for n in [100usize, 10_000] {
        let mut acc = 0.0;
        let reps = 40;
        for seed in 0..reps {
            let hits = multiphoton::sample_detections(&d, 1000 + seed, n).unwrap();
            let f = hits.iter().filter(|&&i| d.points[i].x > 0.0).count() as f64 / n as f64;
            acc += (f - 0.5).powi(2);
        }
        let scaled = (acc / reps as f64).sqrt() * (n as f64).sqrt();
        assert!((0.3..0.75).contains(&scaled), "n = {n}: √N·rms = {scaled}");
    }
}

#[test]
fn coherent_expectation_is_real() {
    let modes = ModeSet::new(grid(), vec![(3, Helicity::Plus), (40, Helicity::Minus)]).unwrap();
    let ladder = fock::ladder_operators(&modes, 14).unwrap();
    let alphas = [C64::from_polar(1.2, 0.4), C64::from_polar(0.7, -2.0)];
    let p = SpacetimePoint::new(0.3, Vec3::new(0.1, -0.2, 0.4));
    let (m, closed) = fock::classical_expectation(&modes, &ladder, &alphas, &p).unwrap();
    for j in 0..3 {
        assert!(m[j].im.abs() < 1e-14 * (1.0 + m[j].re.abs()));
        assert_eq!(closed[j].im, 0.0);
    }
}

#[test]
fn raising_cutoff_never_raises_vacuum_residual() {
    let modes = ModeSet::new(grid(), vec![(5, Helicity::Plus), (77, Helicity::Plus), (200, Helicity::Plus)]).unwrap();
    let p = SpacetimePoint::new(0.4, Vec3::new(0.3, 0.0, -0.1));
    let pp = SpacetimePoint::new(-0.2, Vec3::new(-0.1, 0.2, 0.0));
    let exact = fock::causality_commutator(&modes, Helicity::Plus, &p, &pp);
    let mut last = f64::INFINITY;
    for n_max in 1..=5 {
        let ladder = fock::ladder_operators(&modes, n_max).unwrap();
        let r = (fock::causality_commutator_matrix(&modes, &ladder, &p, &pp) - exact).norm();
        assert!(r <= last, "n_max = {n_max}: {r} > {last}");
        last = r;
    }
}
