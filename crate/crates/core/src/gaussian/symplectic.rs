use nalgebra::DMatrix;

use super::jacobi;
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Symplectic form for `n_modes` modes in x1,p1,x2,p2,... ordering:
/// block-diagonal with [[0,1],[-1,0]] per mode. Satisfies O^2 = -I, O^T = -O.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Smallest eigenvalue of a symmetric matrix.
pub(crate) fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    jacobi::eigenvalues(m)[0]
}

/// Symplectic spectrum of a symmetric (near-)positive-definite matrix:
/// the N moduli of the eigenvalues of i*Omega*sigma, which come in +/- nu
/// pairs, each reported once and sorted ascending.
///
/// Computed through a factorization sigma = W W^T: K = W^T Omega W is
/// antisymmetric and similar to Omega*sigma, so M = K^T K is symmetric PSD
/// carrying each nu^2 twice. W is the Cholesky factor when sigma is
/// numerically positive definite, else the eigenvalue square root with
/// negatives inside psd_slack clamped to zero. Symmetric eigenvalues come
/// from the Jacobi solver: the pairing gate below reads differences of
/// near-equal eigenvalues, which demands machine-accurate spectra on the
/// clustered input this crate produces.
///
/// Rejects matrices whose smallest symmetric eigenvalue falls below
/// -psd_slack, and spectra whose nu^2 duplicates fail to line up within
/// pairing_residue relative to the largest eigenvalue of M. A large residue
/// means sigma was far from symmetric PSD, so the +/- pairing structure
/// never existed.
pub fn symplectic_eigenvalues(sigma: &DMatrix<f64>, tol: &Tolerances) -> Result<Vec<f64>> {
    let (rows, cols) = sigma.shape();
    if rows != cols || rows % 2 != 0 || rows == 0 {
        return Err(Error::BadDimension { rows, cols });
    }
    let n = rows / 2;

    let w = match sigma.clone().cholesky() {
        Some(ch) => ch.unpack(),
        None => {
            // Indefinite, or semidefinite within slack: decide which by
            // eigenvalue, and build the square root from the clamped
            // spectrum when the state is merely grazing the boundary.
            let (vals, vecs) = jacobi::eigen(sigma);
            let min_eig = vals[0];
            if min_eig < -tol.psd_slack {
                return Err(Error::NotPositiveDefinite { min_eig });
            }
            let sqrt_vals =
                nalgebra::DVector::from_iterator(rows, vals.iter().map(|l| l.max(0.0).sqrt()));
            &vecs * DMatrix::from_diagonal(&sqrt_vals) * vecs.transpose()
        }
    };

    let k = w.transpose() * symplectic_form(n) * &w;
    // Exact arithmetic makes K antisymmetric; enforcing it keeps the nu^2
    // duplicates in M aligned to machine precision.
    let k = 0.5 * (&k - k.transpose());
    let mut m = k.transpose() * &k;
    for r in 0..rows {
        for c in 0..r {
            let v = 0.5 * (m[(r, c)] + m[(c, r)]);
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
    }

    let squares: Vec<f64> = jacobi::eigenvalues(&m)
        .into_iter()
        .map(|v| v.max(0.0))
        .collect();
    let scale = squares[rows - 1].max(1.0);

    let mut spectrum = Vec::with_capacity(n);
    for k in 0..n {
        let lo = squares[2 * k];
        let hi = squares[2 * k + 1];
        let residue = (hi - lo) / scale;
        if residue > tol.pairing_residue {
            return Err(Error::DegenerateSpectrum {
                residue,
                tol: tol.pairing_residue,
            });
        }
        spectrum.push((0.5 * (lo + hi)).sqrt());
    }
    Ok(spectrum)
}
