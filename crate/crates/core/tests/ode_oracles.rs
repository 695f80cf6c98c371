use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swnoon_core::blockade::{
    cross_mode_amplitudes, cross_mode_hamiltonian, integrate_cross_mode, ladder_hamiltonian, same_mode_amplitudes,
    OdeParams,
};
use swnoon_core::ode::{integrate_linear, integrate_sampled, IntegratorOptions};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// exp(tM) for a 2×2 matrix via Cayley–Hamilton:
/// e^{t·tr/2}[cosh(tΔ) 1 + sinh(tΔ)/Δ (M − tr/2·1)], Δ² = ((a−d)/2)² + bc.
fn expm2(m: &Matrix2<C64>, t: f64) -> Matrix2<C64> {
    let half_tr = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    let delta = (((m[(0, 0)] - m[(1, 1)]) / 2.0).powi(2) + m[(0, 1)] * m[(1, 0)]).sqrt();
    let shifted = m - Matrix2::identity() * half_tr;
    let sinhc = if delta.norm() < 1e-12 {
        C64::from(t)
    } else {
        (delta * t).sinh() / delta
    };
    (Matrix2::identity() * (delta * t).cosh() + shifted * sinhc) * (half_tr * t).exp()
}

/// exp(−iHt)ψ for real symmetric H through its eigenbasis.
fn evolve_symmetric(h: &Matrix3<f64>, psi: &Vector3<C64>, t: f64) -> Vector3<C64> {
    let eig = SymmetricEigen::new(*h);
    let v = eig.eigenvectors.map(C64::from);
    let phases = Matrix3::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l * t)));
    v * phases * v.transpose() * psi
}

#[test]
fn damped_detuned_two_level_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let p = OdeParams {
            n_atoms: rng.random_range(10.0..500.0),
            rabi: rng.random_range(0.05..3.0),
            rabi_transfer: 1.0,
            shift: rng.random_range(0.0..200.0),
            decay: rng.random_range(0.0..0.5),
            order: 1,
        };
        let got = cross_mode_amplitudes(&p, IntegratorOptions::default()).unwrap();
        let gen = cross_mode_hamiltonian(&p) * c(0.0, -1.0);
        let want = expm2(&gen, p.excitation_duration()) * Vector2::new(c(1.0, 0.0), c(0.0, 0.0));
        let err = (got - want).camax();
        assert!(err <= 1e-10, "{p:?}: {err:e}");
        assert!((integrate_cross_mode(&p).unwrap() - want[0].norm_sqr()).abs() <= 2e-10);
    }
}

#[test]
fn resonant_two_level_is_a_pi_pulse() {
    // Δe = 0, γ = 0: the cross-mode pulse is an exact π rotation and empties |0⟩
    let p = OdeParams {
        n_atoms: 100.0,
        rabi: 0.7,
        rabi_transfer: 1.0,
        shift: 0.0,
        decay: 0.0,
        order: 1,
    };
    assert!(integrate_cross_mode(&p).unwrap() < 1e-20);
}

#[test]
fn undamped_ladder_matches_eigen_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let (g01, g12, shift) = (
            rng.random_range(0.1..20.0),
            rng.random_range(0.1..30.0),
            rng.random_range(-100.0..100.0),
        );
        let t = rng.random_range(0.1..2.0);
        let h = ladder_hamiltonian(g01, g12, shift, 0.0);
        let h_real = h.map(|z| z.re);
        let psi = Vector3::new(c(0.6, 0.0), c(0.0, 0.64), c(0.48, 0.0));
        let got = integrate_linear(&(h * c(0.0, -1.0)), &psi, t, IntegratorOptions::default()).unwrap();
        let want = evolve_symmetric(&h_real, &psi, t);
        assert!((got - want).camax() <= 1e-8, "{g01} {g12} {shift} {t}");
    }
}

#[test]
fn damped_ladder_matches_matrix_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let h = ladder_hamiltonian(
            rng.random_range(0.1..10.0),
            rng.random_range(0.1..10.0),
            rng.random_range(0.0..60.0),
            rng.random_range(0.0..2.0),
        );
        let gen = h * c(0.0, -1.0);
        let t = rng.random_range(0.1..3.0);
        let psi = Vector3::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let got = integrate_linear(&gen, &psi, t, IntegratorOptions::default()).unwrap();
        let want = (gen * c(t, 0.0)).exp() * psi;
        assert!((got - want).camax() <= 1e-9);
    }
}

#[test]
fn random_skew_hermitian_generator() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let mut h = Matrix3::<C64>::zeros();
        for r in 0..3 {
            h[(r, r)] = c(rng.random_range(-5.0..5.0), 0.0);
            for col in r + 1..3 {
                let z = c(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
                h[(r, col)] = z;
                h[(col, r)] = z.conj();
            }
        }
        let gen = h * c(0.0, -1.0);
        let psi = Vector3::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0));
        let got = integrate_linear(&gen, &psi, 1.3, IntegratorOptions::default()).unwrap();
        let want = (gen * c(1.3, 0.0)).exp() * psi;
        assert!((got - want).camax() <= 1e-9);
        assert!((got.norm() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn same_mode_norm_is_conserved_without_decay() {
    let p = OdeParams {
        n_atoms: 400.0,
        rabi: 0.5,
        rabi_transfer: 1.0,
        shift: 2.0 * std::f64::consts::PI * 20.0,
        decay: 0.0,
        order: 1,
    };
    let a = same_mode_amplitudes(&p, IntegratorOptions::default()).unwrap();
    assert!((a.norm() - 1.0).abs() <= 1e-10);
}

fn samples(decay: f64) -> Vec<f64> {
    let h = ladder_hamiltonian(3.0, 4.0, 25.0, decay);
    let psi = Vector3::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    integrate_sampled(&(h * c(0.0, -1.0)), &psi, 5.0, 100, IntegratorOptions::default())
        .unwrap()
        .iter()
        .map(|v| v.norm_squared())
        .collect()
}

#[test]
fn norm_conserved_over_samples() {
    for n in samples(0.0) {
        assert!((n - 1.0).abs() <= 1e-10, "{n}");
    }
}

#[test]
fn damping_is_monotone() {
    let s = samples(0.3);
    assert!(s.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(s[99] < 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn two_level_population_is_bounded(
        n in 1.0f64..1000.0,
        rabi in 0.01f64..5.0,
        shift in 0.0f64..100.0,
        decay in 0.0f64..1.0,
    ) {
        let p = OdeParams { n_atoms: n, rabi, rabi_transfer: 1.0, shift, decay, order: 1 };
        let a = cross_mode_amplitudes(&p, IntegratorOptions::default()).unwrap();
        prop_assert!(a.norm_squared() <= 1.0 + 1e-10);
    }
}
