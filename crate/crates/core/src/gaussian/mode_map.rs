use nalgebra::DMatrix;

use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Orthonormal linear resolution change on modes.
///
/// Stores an M x N mode-coefficient matrix L with orthonormal rows
/// (L L^T = I within tolerance); x and p quadratures transform with the same
/// real coefficients, so the quadrature-space action is the 2M x 2N lift of
/// L. Orthonormal rows map vacuum to vacuum and preserve physicality.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMap {
    coeffs: DMatrix<f64>,
}

impl ModeMap {
    /// Wrap a coefficient matrix, rejecting non-orthonormal rows.
    pub fn new(coeffs: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        if coeffs.nrows() == 0 || coeffs.ncols() == 0 || coeffs.nrows() > coeffs.ncols() {
            return Err(Error::BadPartition(format!(
                "mode map must be M x N with 1 <= M <= N, got {} x {}",
                coeffs.nrows(),
                coeffs.ncols()
            )));
        }
        let gram = &coeffs * coeffs.transpose();
        let max_dev = (&gram - DMatrix::<f64>::identity(gram.nrows(), gram.ncols())).amax();
        if max_dev > tol.orthonormality {
            return Err(Error::BadModeMap {
                max_dev,
                tol: tol.orthonormality,
            });
        }
        Ok(Self { coeffs })
    }

    /// Identity map on N modes.
    pub fn identity(n_modes: usize) -> Self {
        Self {
            coeffs: DMatrix::identity(n_modes, n_modes),
        }
    }

    /// One output mode per group: the normalized equal-weight combination
    /// (coefficient 1/sqrt(k) for a k-mode group) of that group's inputs.
    /// Groups must be nonempty and pairwise disjoint; inputs not listed in
    /// any group are dropped by the map.
    pub fn merge_groups(groups: &[Vec<usize>], n_modes: usize) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::BadPartition("no groups to merge".into()));
        }
        let mut seen = vec![false; n_modes];
        let mut coeffs = DMatrix::zeros(groups.len(), n_modes);
        for (g, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::BadPartition(format!("group {g} is empty")));
            }
            let w = 1.0 / (group.len() as f64).sqrt();
            for &m in group {
                if m >= n_modes {
                    return Err(Error::BadPartition(format!(
                        "mode index {m} out of range for {n_modes} modes"
                    )));
                }
                if seen[m] {
                    return Err(Error::BadPartition(format!(
                        "mode {m} appears in more than one group"
                    )));
                }
                seen[m] = true;
                coeffs[(g, m)] = w;
            }
        }
        Ok(Self { coeffs })
    }

    pub fn n_inputs(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    /// Quadrature-space lift: 2M x 2N, identical coefficients on x and p.
    pub fn lift(&self) -> DMatrix<f64> {
        let (m, n) = self.coeffs.shape();
        let mut lift = DMatrix::zeros(2 * m, 2 * n);
        for a in 0..m {
            for b in 0..n {
                let c = self.coeffs[(a, b)];
                lift[(2 * a, 2 * b)] = c;
                lift[(2 * a + 1, 2 * b + 1)] = c;
            }
        }
        lift
    }
}
