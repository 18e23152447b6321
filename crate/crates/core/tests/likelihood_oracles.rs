//! Finite-difference oracles for every analytic derivative of the
//! loglikelihood, plus its structural identities (self-normalization,
//! concavity in the weights, semidefiniteness).

mod common;

use common::{random_dataset, random_gamma, random_simplex};
use mable_aft_core::linalg::sym_eigenvalues;
use mable_aft_core::{grad_gamma, hessian_gamma, hessian_p, loglik, psi, Dataset, SimRng};

fn fd_psi(data: &Dataset, gamma: &[f64], p: &[f64], h: f64) -> Vec<f64> {
    let n = data.len() as f64;
    (0..p.len())
        .map(|j| {
            let mut pp = p.to_vec();
            pp[j] += h;
            let up = loglik(data, gamma, &pp).unwrap();
            pp[j] = p[j] - h;
            let dn = loglik(data, gamma, &pp).unwrap();
            (up - dn) / (2.0 * h * n)
        })
        .collect()
}

#[test]
fn psi_matches_finite_differences_of_loglik() {
    let mut rng = SimRng::new(501);
    for _ in 0..10 {
        let data = random_dataset(&mut rng, 4, 2);
        let m = 3;
        let gamma = random_gamma(&mut rng, 2, 0.3);
        let p = random_simplex(&mut rng, m);
        let analytic = psi(&data, &gamma, &p).unwrap();
        let numeric = fd_psi(&data, &gamma, &p, 1e-6);
        for (a, b) in analytic.iter().zip(&numeric) {
            assert!(
                (a - b).abs() <= 1e-6 * a.abs().max(1.0),
                "psi {a} vs finite difference {b}"
            );
        }
    }
}

#[test]
fn hessian_p_matches_finite_differences_of_psi() {
    let mut rng = SimRng::new(502);
    for _ in 0..5 {
        let data = random_dataset(&mut rng, 6, 2);
        let m = 3;
        let n = data.len() as f64;
        let gamma = random_gamma(&mut rng, 2, 0.3);
        let p = random_simplex(&mut rng, m);
        let analytic = hessian_p(&data, &gamma, &p).unwrap();
        let h = 1e-6;
        for k in 0..=m {
            let mut pp = p.clone();
            pp[k] += h;
            let up = psi(&data, &gamma, &pp).unwrap();
            pp[k] = p[k] - h;
            let dn = psi(&data, &gamma, &pp).unwrap();
            for j in 0..=m {
                // psi is the gradient divided by n
                let numeric = n * (up[j] - dn[j]) / (2.0 * h);
                let a = analytic[(j, k)];
                assert!(
                    (a - numeric).abs() <= 1e-5 * a.abs().max(1.0),
                    "H_p[{j},{k}] {a} vs {numeric}"
                );
            }
        }
    }
}

#[test]
fn hessian_p_is_symmetric_negative_semidefinite() {
    let mut rng = SimRng::new(503);
    for _ in 0..10 {
        let data = random_dataset(&mut rng, 8, 2);
        let m = 4;
        let gamma = random_gamma(&mut rng, 2, 0.3);
        let p = random_simplex(&mut rng, m);
        let h = hessian_p(&data, &gamma, &p).unwrap();
        assert!(h.asymmetry() <= 1e-12);
        let eigs = sym_eigenvalues(&h);
        assert!(
            *eigs.last().unwrap() <= 1e-10,
            "largest eigenvalue {} not nonpositive",
            eigs.last().unwrap()
        );
    }
}

#[test]
fn gamma_gradient_matches_finite_differences() {
    let mut rng = SimRng::new(504);
    for _ in 0..10 {
        let data = random_dataset(&mut rng, 5, 2);
        let m = 4;
        let gamma = random_gamma(&mut rng, 2, 0.3);
        let p = random_simplex(&mut rng, m);
        let analytic = grad_gamma(&data, &gamma, &p).unwrap();
        let h = 1e-6;
        for k in 0..2 {
            let mut g = gamma.clone();
            g[k] += h;
            let up = loglik(&data, &g, &p).unwrap();
            g[k] = gamma[k] - h;
            let dn = loglik(&data, &g, &p).unwrap();
            let numeric = (up - dn) / (2.0 * h);
            assert!(
                (analytic[k] - numeric).abs() <= 1e-5 * analytic[k].abs().max(1.0),
                "grad[{k}] {} vs {numeric}",
                analytic[k]
            );
        }
    }
}

#[test]
fn gamma_hessian_matches_finite_differences_of_gradient() {
    let mut rng = SimRng::new(505);
    for _ in 0..10 {
        let data = random_dataset(&mut rng, 5, 2);
        let m = 4;
        let gamma = random_gamma(&mut rng, 2, 0.3);
        let p = random_simplex(&mut rng, m);
        let analytic = hessian_gamma(&data, &gamma, &p).unwrap();
        assert!(analytic.asymmetry() <= 1e-10);
        let h = 1e-6;
        for k in 0..2 {
            let mut g = gamma.clone();
            g[k] += h;
            let up = grad_gamma(&data, &g, &p).unwrap();
            g[k] = gamma[k] - h;
            let dn = grad_gamma(&data, &g, &p).unwrap();
            for j in 0..2 {
                let numeric = (up[j] - dn[j]) / (2.0 * h);
                let a = analytic[(j, k)];
                assert!(
                    (a - numeric).abs() <= 1e-4 * a.abs().max(1.0),
                    "H[{j},{k}] {a} vs {numeric}"
                );
            }
        }
    }
}

#[test]
fn loglik_is_concave_along_simplex_segments() {
    let mut rng = SimRng::new(506);
    for _ in 0..20 {
        let data = random_dataset(&mut rng, 8, 2);
        let m = 5;
        let gamma = random_gamma(&mut rng, 2, 0.3);
        let p = random_simplex(&mut rng, m);
        let q = random_simplex(&mut rng, m);
        let lambda = rng.uniform_in(0.05, 0.95);
        let mix: Vec<f64> =
            p.iter().zip(&q).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let lp = loglik(&data, &gamma, &p).unwrap();
        let lq = loglik(&data, &gamma, &q).unwrap();
        let lmix = loglik(&data, &gamma, &mix).unwrap();
        assert!(
            lmix >= lambda * lp + (1.0 - lambda) * lq - 1e-10,
            "concavity violated: {lmix} < {}",
            lambda * lp + (1.0 - lambda) * lq
        );
    }
}

#[test]
fn weighted_psi_identity_holds_on_random_instances() {
    let mut rng = SimRng::new(507);
    for _ in 0..20 {
        let data = random_dataset(&mut rng, 10, 2);
        let m = 6;
        let gamma = random_gamma(&mut rng, 2, 0.3);
        let p = random_simplex(&mut rng, m);
        let psi_vec = psi(&data, &gamma, &p).unwrap();
        let weighted: f64 = p.iter().zip(&psi_vec).map(|(a, b)| a * b).sum();
        assert!((weighted - 1.0).abs() <= 1e-10, "sum p_j Psi_j = {weighted}");
    }
}
