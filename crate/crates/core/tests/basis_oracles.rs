//! Oracle checks of the basis kernels against exact arithmetic and
//! quadrature, plus the whole-basis invariants.

mod common;

use common::{adaptive_simpson, random_simplex};
use mable_aft_core::{basis_vectors, beta_density, beta_survival, BernsteinModel, SimRng};

/// C(m, j) in exact integer arithmetic.
fn binomial_exact(m: u32, j: u32) -> u128 {
    let j = j.min(m - j);
    let mut c: u128 = 1;
    for i in 0..j {
        c = c * (m - i) as u128 / (i + 1) as u128;
    }
    c
}

#[test]
fn high_degree_density_matches_exact_binomial_formula() {
    // m = 60, j = 30, u = 1/2: (m+1) C(60,30) 2^{-60} with every factor
    // exactly representable
    let exact = 61.0 * binomial_exact(60, 30) as f64 * (0.5f64).powi(60);
    let got = beta_density(60, 30, 0.5).unwrap();
    assert!(
        ((got - exact) / exact).abs() < 1e-12,
        "log-space evaluation {got} vs exact {exact}"
    );

    // an asymmetric case: m = 45, j = 10, u = 0.2
    let exact = 46.0 * binomial_exact(45, 10) as f64 * (0.2f64).powi(10) * (0.8f64).powi(35);
    let got = beta_density(45, 10, 0.2).unwrap();
    assert!(((got - exact) / exact).abs() < 1e-12);
}

#[test]
fn survival_matches_quadrature_of_density() {
    // beta_survival(m, j, u) = 1 - integral of beta_density over [0, u]
    for &(m, j, u) in &[
        (10usize, 4usize, 0.3f64),
        (1, 0, 0.5),
        (7, 7, 0.9),
        (25, 3, 0.12),
        (30, 15, 0.5),
        (30, 29, 0.97),
    ] {
        let integral =
            adaptive_simpson(&|t| beta_density(m, j, t).unwrap(), 0.0, u, 1e-12);
        let got = beta_survival(m, j, u).unwrap();
        assert!(
            (got - (1.0 - integral)).abs() < 1e-8,
            "m={m} j={j} u={u}: {got} vs quadrature {}",
            1.0 - integral
        );
    }
}

#[test]
fn mixture_density_integrates_to_one() {
    let mut rng = SimRng::new(2024);
    for &(m, tau) in &[(8usize, 12.0f64), (3, 1.0), (15, 2.5)] {
        let p = random_simplex(&mut rng, m);
        let model = BernsteinModel::new(m, tau, p).unwrap();
        let total = adaptive_simpson(&|t| model.density(t).unwrap(), 0.0, tau, 1e-11);
        assert!((total - 1.0).abs() < 1e-8, "m={m} tau={tau}: integral {total}");
    }
}

#[test]
fn mixture_survival_agrees_with_density_integral() {
    let mut rng = SimRng::new(7);
    let m = 6;
    let tau = 2.0;
    let model = BernsteinModel::new(m, tau, random_simplex(&mut rng, m)).unwrap();
    for &t in &[0.3, 1.1, 1.9] {
        let integral = adaptive_simpson(&|s| model.density(s).unwrap(), 0.0, t, 1e-11);
        let got = model.survival(t).unwrap();
        assert!(
            (got - (1.0 - integral)).abs() < 1e-8,
            "t={t}: survival {got} vs 1 - integral {}",
            1.0 - integral
        );
    }
}

#[test]
fn mixture_survival_nonincreasing_on_dense_grid() {
    let mut rng = SimRng::new(99);
    for &m in &[3usize, 12, 25] {
        let tau = 5.0;
        let model = BernsteinModel::new(m, tau, random_simplex(&mut rng, m)).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=1000 {
            let t = tau * i as f64 / 1000.0;
            let s = model.survival(t).unwrap();
            assert!(s <= prev + 1e-12, "m={m}: survival increased at t={t}");
            assert!((0.0..=1.0).contains(&s));
            prev = s;
        }
    }
}

#[test]
fn density_basis_sums_to_m_plus_one_up_to_degree_fifty() {
    for m in 0..=50usize {
        for i in 0..=25 {
            let u = i as f64 / 25.0;
            let (dens, _) = basis_vectors(m, u).unwrap();
            let sum: f64 = dens.iter().sum();
            let rel = (sum - (m + 1) as f64).abs() / (m + 1) as f64;
            assert!(rel < 1e-9, "m={m} u={u}: sum {sum}");
        }
    }
}

#[test]
fn mixture_derivatives_match_central_differences() {
    let mut rng = SimRng::new(31);
    let m = 12;
    let tau = 1.0;
    let model = BernsteinModel::new(m, tau, random_simplex(&mut rng, m)).unwrap();
    let h = 1e-5;
    for i in 1..20 {
        let t = i as f64 / 20.0;
        let (f, f1, f2) = model.density_derivatives(t).unwrap();
        let fp = model.density(t + h).unwrap();
        let fm = model.density(t - h).unwrap();
        let fd1 = (fp - fm) / (2.0 * h);
        let fd2 = (fp - 2.0 * f + fm) / (h * h);
        assert!(
            (f1 - fd1).abs() <= 1e-5 * f1.abs().max(1.0),
            "t={t}: f' {f1} vs fd {fd1}"
        );
        assert!(
            (f2 - fd2).abs() <= 1e-3 * f2.abs().max(10.0),
            "t={t}: f'' {f2} vs fd {fd2}"
        );
    }
}

#[test]
fn uniform_weights_have_zero_derivative() {
    let model = BernsteinModel::uniform(9, 3.0);
    for &t in &[0.2, 1.5, 2.8] {
        let (f, f1, f2) = model.density_derivatives(t).unwrap();
        assert!((f - 1.0 / 3.0).abs() < 1e-12);
        assert!(f1.abs() < 1e-10);
        assert!(f2.abs() < 1e-9);
    }
}
