use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gaussian::cm::CovarianceMatrix;
use crate::gaussian::jacobi;
use crate::gaussian::symplectic::min_symmetric_eigenvalue;

/// Ordered bipartition: steering party m, steered party n.
///
/// Both sides are nonempty and disjoint; mode order within a party is
/// preserved as given (block gathering follows it). The parties need not
/// cover all modes of the state they are applied to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    steering: Vec<usize>,
    steered: Vec<usize>,
}

impl Bipartition {
    pub fn new(steering: Vec<usize>, steered: Vec<usize>) -> Result<Self> {
        if steering.is_empty() || steered.is_empty() {
            return Err(Error::BadPartition("both parties must be nonempty".into()));
        }
        for (i, m) in steering.iter().enumerate() {
            if steering[..i].contains(m) {
                return Err(Error::BadPartition(format!(
                    "duplicate mode {m} in steering party"
                )));
            }
        }
        for (i, m) in steered.iter().enumerate() {
            if steered[..i].contains(m) {
                return Err(Error::BadPartition(format!(
                    "duplicate mode {m} in steered party"
                )));
            }
        }
        if let Some(m) = steering.iter().find(|m| steered.contains(m)) {
            return Err(Error::BadPartition(format!(
                "mode {m} appears in both parties"
            )));
        }
        Ok(Self { steering, steered })
    }

    /// Steering party (party m).
    pub fn steering(&self) -> &[usize] {
        &self.steering
    }

    /// Steered party (party n).
    pub fn steered(&self) -> &[usize] {
        &self.steered
    }

    /// The same partition with the roles of the parties exchanged.
    pub fn flipped(&self) -> Self {
        Self {
            steering: self.steered.clone(),
            steered: self.steering.clone(),
        }
    }

    /// Check all indices address modes of an N-mode state.
    pub fn check_modes(&self, n_modes: usize) -> Result<()> {
        for &m in self.steering.iter().chain(self.steered.iter()) {
            if m >= n_modes {
                return Err(Error::BadPartition(format!(
                    "mode index {m} out of range for {n_modes} modes"
                )));
            }
        }
        Ok(())
    }

    /// Human-readable "m -> n" rendering, using labels when available.
    pub fn describe(&self, labels: Option<&[String]>) -> String {
        let side = |modes: &[usize]| {
            modes
                .iter()
                .map(|&m| match labels {
                    Some(l) if m < l.len() => l[m].clone(),
                    _ => m.to_string(),
                })
                .collect::<Vec<_>>()
                .join(",")
        };
        format!("{} -> {}", side(&self.steering), side(&self.steered))
    }
}

/// The three blocks of a covariance matrix recast for one bipartition:
/// `steering` (2m x 2m), `steered` (2n x 2n), and the cross-correlation
/// block `cross` (2m x 2n). Reassembling [[M, C], [C^T, N]] and permuting
/// back reproduces the source rows and columns exactly.
#[derive(Debug, Clone)]
pub struct BipartiteBlocks {
    pub steering: DMatrix<f64>,
    pub steered: DMatrix<f64>,
    pub cross: DMatrix<f64>,
}

/// Gather the bipartite blocks of `cm`, rows and columns ordered as the
/// partition lists its modes.
pub fn split_blocks(cm: &CovarianceMatrix, part: &Bipartition) -> Result<BipartiteBlocks> {
    part.check_modes(cm.n_modes())?;
    let e = cm.entries();

    let gather = |rows: &[usize], cols: &[usize]| {
        let mut out = DMatrix::zeros(2 * rows.len(), 2 * cols.len());
        for (a, &ma) in rows.iter().enumerate() {
            for (b, &mb) in cols.iter().enumerate() {
                for qa in 0..2 {
                    for qb in 0..2 {
                        out[(2 * a + qa, 2 * b + qb)] = e[(2 * ma + qa, 2 * mb + qb)];
                    }
                }
            }
        }
        out
    };

    Ok(BipartiteBlocks {
        steering: gather(part.steering(), part.steering()),
        steered: gather(part.steered(), part.steered()),
        cross: gather(part.steering(), part.steered()),
    })
}

/// Schur complement of the steering party: N - C^T M^{-1} C.
///
/// M must be positive definite with condition number at most
/// `max_condition`; an ill-conditioned M is an error, never a silent
/// regularization. The result is symmetrized and checked positive
/// semidefinite within `psd_slack`.
pub fn schur_complement(blocks: &BipartiteBlocks, tol: &Tolerances) -> Result<DMatrix<f64>> {
    let m = &blocks.steering;
    let evals = jacobi::eigenvalues(m);
    let min_eig = evals[0];
    let max_eig = evals[evals.len() - 1];
    if min_eig <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eig });
    }
    let cond = max_eig / min_eig;
    if cond > tol.max_condition {
        return Err(Error::IllConditioned {
            cond,
            max_cond: tol.max_condition,
        });
    }

    let minv_c = match m.clone().cholesky() {
        Some(ch) => ch.solve(&blocks.cross),
        // min_eig > 0 and cond <= max_condition make failure here a
        // last-ulp event; the eigenbasis solve covers it all the same.
        None => {
            let (vals, vecs) = jacobi::eigen(m);
            let mut scaled = vecs.transpose() * &blocks.cross;
            for (i, lambda) in vals.iter().enumerate() {
                scaled.row_mut(i).scale_mut(1.0 / lambda);
            }
            &vecs * scaled
        }
    };

    let schur = &blocks.steered - blocks.cross.transpose() * minv_c;
    let schur = 0.5 * (&schur + schur.transpose());

    let min_schur = min_symmetric_eigenvalue(&schur);
    if min_schur < -tol.psd_slack {
        return Err(Error::NotPositiveDefinite { min_eig: min_schur });
    }
    Ok(schur)
}
