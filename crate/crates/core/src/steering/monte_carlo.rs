use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comb::{simulate_cm, CombModel};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gaussian::Bipartition;
use crate::steering::quantifier::steering;

/// Monte Carlo uncertainty of a steering value under squeezing noise.
///
/// Bit-reproducible for a fixed (seed, n_samples): each sample draws from
/// its own counter-derived substream, so thread count cannot reorder draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyEstimate {
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator) over accepted samples.
    pub std: f64,
    /// Accepted sample count.
    pub n_samples: usize,
    pub n_unphysical_rejected: usize,
    pub seed: u64,
}

/// Propagate per-eigenmode squeezing uncertainty (s.d. in dB) through the
/// simulator into a steering value.
///
/// Each sample perturbs every eigenmode's squeezing by an independent
/// Gaussian draw, rebuilds the covariance matrix, and evaluates steering.
/// Draws pushing a squeezing magnitude past the 20 dB model bound or
/// producing a covariance matrix that fails validation are rejected and
/// counted, never clipped (clipping would bias the estimate).
///
/// `noise_db` is either one s.d. broadcast to all eigenmodes or one entry
/// per eigenmode.
pub fn monte_carlo_uncertainty(
    model: &CombModel,
    partition: &Bipartition,
    noise_db: &[f64],
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<UncertaintyEstimate> {
    model.validate()?;
    if n_samples < 2 {
        return Err(Error::BadArgument(format!(
            "need at least 2 Monte Carlo samples, got {n_samples}"
        )));
    }
    let k = model.eigenmodes.len();
    let sds: Vec<f64> = match noise_db.len() {
        1 => vec![noise_db[0]; k],
        len if len == k => noise_db.to_vec(),
        len => {
            return Err(Error::BadArgument(format!(
                "noise list has {len} entries for {k} eigenmodes (need 1 or {k})"
            )))
        }
    };
    if let Some(bad) = sds.iter().find(|s| !s.is_finite() || **s < 0.0) {
        return Err(Error::BadArgument(format!(
            "noise s.d. must be nonnegative, got {bad}"
        )));
    }
    let normals: Vec<Normal<f64>> = sds
        .iter()
        .map(|&sd| Normal::new(0.0, sd).expect("nonnegative finite s.d."))
        .collect();

    let values: Vec<Option<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut perturbed = model.clone();
            for (spec, normal) in perturbed.eigenmodes.iter_mut().zip(&normals) {
                spec.squeezing_db += normal.sample(&mut rng);
            }
            if perturbed
                .eigenmodes
                .iter()
                .any(|s| s.squeezing_db.abs() > 20.0)
            {
                return None;
            }
            let cm = simulate_cm(&perturbed, tol).ok()?;
            if !cm.validate(tol).is_valid() {
                return None;
            }
            steering(&cm, partition, tol).ok().map(|r| r.value)
        })
        .collect();

    let accepted: Vec<f64> = values.iter().copied().flatten().collect();
    let n_rejected = n_samples - accepted.len();
    if accepted.len() < 2 {
        return Err(Error::TooFewSamples {
            accepted: accepted.len(),
            requested: n_samples,
        });
    }

    // Centered two-pass: shifting by the first sample keeps the mean exact
    // (and the variance exactly zero) when every accepted value coincides.
    let n = accepted.len() as f64;
    let shift = accepted[0];
    let mean = shift + accepted.iter().map(|v| v - shift).sum::<f64>() / n;
    let var = accepted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(UncertaintyEstimate {
        mean,
        std: var.sqrt(),
        n_samples: accepted.len(),
        n_unphysical_rejected: n_rejected,
        seed,
    })
}
