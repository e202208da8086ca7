use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gaussian::{schur_complement, split_blocks, symplectic_eigenvalues, Bipartition, CovarianceMatrix};

/// Steerability of one bipartition, in nats.
///
/// `spectrum` holds the conditional symplectic eigenvalues (of the Schur
/// complement over the steering party), ascending; `value` is
/// `max(0, -sum ln nu_i)` over the entries below 1 and is recomputable from
/// `spectrum` within 1e-12.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteeringResult {
    pub partition: Bipartition,
    pub spectrum: Vec<f64>,
    pub value: f64,
    pub steerable: bool,
}

/// Steerability value from a conditional symplectic spectrum.
pub fn steering_from_spectrum(spectrum: &[f64]) -> f64 {
    let s: f64 = spectrum
        .iter()
        .filter(|nu| **nu < 1.0)
        .map(|nu| -nu.ln())
        .sum();
    s.max(0.0)
}

/// Evaluate how strongly the steering party conditions the steered party
/// below vacuum noise: Schur complement of the steering party's block,
/// then the symplectic spectrum of the conditional state.
pub fn steering(
    cm: &CovarianceMatrix,
    partition: &Bipartition,
    tol: &Tolerances,
) -> Result<SteeringResult> {
    let blocks = split_blocks(cm, partition)?;
    let schur = schur_complement(&blocks, tol)?;
    let spectrum = symplectic_eigenvalues(&schur, tol)?;
    let value = steering_from_spectrum(&spectrum);
    Ok(SteeringResult {
        partition: partition.clone(),
        steerable: value > tol.steer_epsilon,
        spectrum,
        value,
    })
}

/// Which way a pair of steering values points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringDirection {
    NoSteering,
    OneWayForward,
    OneWayBackward,
    TwoWay,
}

impl std::fmt::Display for SteeringDirection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SteeringDirection::NoSteering => "no-steering",
            SteeringDirection::OneWayForward => "one-way-forward",
            SteeringDirection::OneWayBackward => "one-way-backward",
            SteeringDirection::TwoWay => "two-way",
        };
        f.write_str(s)
    }
}

/// Classify a (forward, backward) pair of steering values, thresholded at
/// `steer_epsilon`. Swapping the arguments swaps Forward and Backward.
pub fn classify_direction(
    g_forward: f64,
    g_backward: f64,
    tol: &Tolerances,
) -> Result<SteeringDirection> {
    if g_forward < 0.0 || g_backward < 0.0 {
        return Err(Error::BadArgument(format!(
            "steering values must be nonnegative, got ({g_forward}, {g_backward})"
        )));
    }
    let fwd = g_forward > tol.steer_epsilon;
    let bwd = g_backward > tol.steer_epsilon;
    Ok(match (fwd, bwd) {
        (false, false) => SteeringDirection::NoSteering,
        (true, false) => SteeringDirection::OneWayForward,
        (false, true) => SteeringDirection::OneWayBackward,
        (true, true) => SteeringDirection::TwoWay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn pair(a: usize, b: usize) -> Bipartition {
        Bipartition::new(vec![a], vec![b]).unwrap()
    }

    #[test]
    fn vacuum_has_no_steering() {
        let cm = CovarianceMatrix::vacuum(2);
        let r = steering(&cm, &pair(0, 1), &tol()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(!r.steerable);
    }

    #[test]
    fn tmsv_steers_both_ways_at_ln_cosh_2r() {
        let r = 0.5;
        let cm = CovarianceMatrix::two_mode_squeezed(r);
        let expected = (2.0 * r).cosh().ln(); // 0.433780830...
        let fwd = steering(&cm, &pair(0, 1), &tol()).unwrap();
        let bwd = steering(&cm, &pair(1, 0), &tol()).unwrap();
        assert_abs_diff_eq!(fwd.value, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(bwd.value, expected, epsilon = 1e-9);
        assert!(fwd.steerable && bwd.steerable);
        // Conditional spectrum of the TMSV is 1/cosh(2r), once.
        assert_eq!(fwd.spectrum.len(), 1);
        assert_abs_diff_eq!(fwd.spectrum[0], 1.0 / (2.0 * r).cosh(), epsilon = 1e-12);
    }

    #[test]
    fn tmsv_oracle_grid() {
        for k in 1..=15 {
            let r = 0.1 * k as f64;
            let cm = CovarianceMatrix::two_mode_squeezed(r);
            let expected = (2.0 * r).cosh().ln();
            for part in [pair(0, 1), pair(1, 0)] {
                let got = steering(&cm, &part, &tol()).unwrap().value;
                assert_abs_diff_eq!(got, expected, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn value_recomputable_from_spectrum() {
        let cm = CovarianceMatrix::two_mode_squeezed(0.9);
        let r = steering(&cm, &pair(0, 1), &tol()).unwrap();
        assert_abs_diff_eq!(r.value, steering_from_spectrum(&r.spectrum), epsilon = 1e-12);
    }

    #[test]
    fn product_of_single_mode_states_never_steers() {
        // Squeezed mode (rotated) x thermal mode x vacuum: block-diagonal CM.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let singles: Vec<_> = (0..3)
                .map(|_| crate::gaussian::random::random_physical_cm(1, &mut rng))
                .collect();
            let mut entries = DMatrix::zeros(6, 6);
            for (i, s) in singles.iter().enumerate() {
                entries
                    .view_mut((2 * i, 2 * i), (2, 2))
                    .copy_from(s.entries());
            }
            let cm = CovarianceMatrix::from_matrix(entries, None, &tol()).unwrap();
            for part in [
                pair(0, 1),
                pair(2, 0),
                Bipartition::new(vec![0, 1], vec![2]).unwrap(),
                Bipartition::new(vec![2], vec![0, 1]).unwrap(),
            ] {
                let r = steering(&cm, &part, &tol()).unwrap();
                assert!(
                    r.value <= 1e-12,
                    "product state steered: {} -> {}",
                    r.value,
                    part.describe(None)
                );
            }
        }
    }

    #[test]
    fn direction_classification() {
        let t = tol();
        assert_eq!(
            classify_direction(0.1382, 0.0, &t).unwrap(),
            SteeringDirection::OneWayForward
        );
        assert_eq!(
            classify_direction(0.0, 0.1382, &t).unwrap(),
            SteeringDirection::OneWayBackward
        );
        assert_eq!(
            classify_direction(0.0, 0.0, &t).unwrap(),
            SteeringDirection::NoSteering
        );
        assert_eq!(
            classify_direction(0.433781, 0.433781, &t).unwrap(),
            SteeringDirection::TwoWay
        );
        assert!(classify_direction(-0.1, 0.0, &t).is_err());
    }

    #[test]
    fn steering_party_extension_is_monotone() {
        // Discarding steering-party modes is local: G^{m->n} <= G^{m'->n}
        // for m inside m'.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let t = tol();
        for _ in 0..15 {
            let cm = crate::gaussian::random::random_physical_cm(4, &mut rng);
            let small = Bipartition::new(vec![0], vec![3]).unwrap();
            let large = Bipartition::new(vec![0, 1, 2], vec![3]).unwrap();
            let g_small = steering(&cm, &small, &t).unwrap().value;
            let g_large = steering(&cm, &large, &t).unwrap().value;
            assert!(
                g_small <= g_large + 1e-9,
                "monotonicity violated: {g_small} > {g_large}"
            );
        }
    }
}
