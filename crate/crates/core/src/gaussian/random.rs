//! Seeded generators of random symplectic transformations and random
//! physical covariance matrices, used by property tests and available for
//! fuzzing. Symplectic matrices are built as products of exact elementary
//! operations (phase rotations, beamsplitters, single-mode squeezers), so
//! symplecticity holds to machine precision without matrix exponentials.

use nalgebra::DMatrix;
use rand::Rng;

use crate::gaussian::CovarianceMatrix;

fn apply_phase(s: &mut DMatrix<f64>, mode: usize, theta: f64) {
    let (c, sn) = (theta.cos(), theta.sin());
    let n = s.ncols();
    for j in 0..n {
        let x = s[(2 * mode, j)];
        let p = s[(2 * mode + 1, j)];
        s[(2 * mode, j)] = c * x + sn * p;
        s[(2 * mode + 1, j)] = -sn * x + c * p;
    }
}

fn apply_squeeze(s: &mut DMatrix<f64>, mode: usize, r: f64) {
    let n = s.ncols();
    for j in 0..n {
        s[(2 * mode, j)] *= (-r).exp();
        s[(2 * mode + 1, j)] *= r.exp();
    }
}

fn apply_beamsplitter(s: &mut DMatrix<f64>, a: usize, b: usize, theta: f64) {
    let (c, sn) = (theta.cos(), theta.sin());
    let n = s.ncols();
    for q in 0..2 {
        for j in 0..n {
            let ra = s[(2 * a + q, j)];
            let rb = s[(2 * b + q, j)];
            s[(2 * a + q, j)] = c * ra + sn * rb;
            s[(2 * b + q, j)] = -sn * ra + c * rb;
        }
    }
}

/// Random 2N x 2N symplectic matrix: 3N rounds of a random phase rotation,
/// a random beamsplitter (when N >= 2), and a moderate random squeezer.
pub fn random_symplectic<R: Rng + ?Sized>(n_modes: usize, rng: &mut R) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for _ in 0..3 * n_modes.max(1) {
        let i = rng.gen_range(0..n_modes);
        apply_phase(&mut s, i, rng.gen_range(0.0..std::f64::consts::TAU));
        if n_modes >= 2 {
            let mut j = rng.gen_range(0..n_modes);
            while j == i {
                j = rng.gen_range(0..n_modes);
            }
            apply_beamsplitter(&mut s, i, j, rng.gen_range(0.0..std::f64::consts::TAU));
        }
        apply_squeeze(&mut s, i, rng.gen_range(-0.6..0.6));
    }
    s
}

/// Random physical N-mode covariance matrix S D S^T with symplectic S and
/// thermal core D = diag(nu_i, nu_i), nu_i in [1, 2.5]. Physical by
/// construction: its symplectic spectrum is exactly the drawn nu_i.
pub fn random_physical_cm<R: Rng + ?Sized>(n_modes: usize, rng: &mut R) -> CovarianceMatrix {
    let nus: Vec<f64> = (0..n_modes).map(|_| rng.gen_range(1.0..2.5)).collect();
    williamson_state(&nus, rng)
}

/// Random pure N-mode covariance matrix S S^T (all symplectic eigenvalues 1).
pub fn random_pure_cm<R: Rng + ?Sized>(n_modes: usize, rng: &mut R) -> CovarianceMatrix {
    williamson_state(&vec![1.0; n_modes], rng)
}

fn williamson_state<R: Rng + ?Sized>(nus: &[f64], rng: &mut R) -> CovarianceMatrix {
    let n = nus.len();
    let s = random_symplectic(n, rng);
    let mut d = DMatrix::zeros(2 * n, 2 * n);
    for (i, &nu) in nus.iter().enumerate() {
        d[(2 * i, 2 * i)] = nu;
        d[(2 * i + 1, 2 * i + 1)] = nu;
    }
    let sigma = &s * d * s.transpose();
    let sigma = 0.5 * (&sigma + sigma.transpose());
    CovarianceMatrix::from_matrix(sigma, None, &crate::Tolerances::default())
        .expect("symmetrized congruence of a diagonal matrix")
}
