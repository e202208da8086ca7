use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gaussian::{Bipartition, CovarianceMatrix};
use crate::steering::quantifier::steering;

/// The monogamy relations the auditor can check.
///
/// * `TypeI` — two single modes cannot both steer the same single mode:
///   min(G(i->k), G(j->k)) = 0.
/// * `TypeII` — the same statement with multimode steering parties and an
///   arbitrary steered party; violating it is a legal, reportable outcome.
/// * `Ckw` — collective bound: G(i1..im -> j) >= sum_k G(ik -> j) for
///   singleton steering groups (many-to-one), or the mirrored one-to-many
///   form G(i -> j1..jn) >= sum_k G(i -> jk).
/// * `TypeIvSteeredSum` — group-to-group bound against the per-steered-mode
///   sum: G(I -> J) - sum_{j in J} G(I -> j).
/// * `TypeIvSteeringSum` — group-to-group against the per-steering-mode
///   sum: G(I -> J) - sum_{i in I} G(i -> J); can be violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonogamyRelation {
    TypeI,
    TypeII,
    Ckw,
    TypeIvSteeredSum,
    TypeIvSteeringSum,
}

impl std::fmt::Display for MonogamyRelation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MonogamyRelation::TypeI => "type-i",
            MonogamyRelation::TypeII => "type-ii",
            MonogamyRelation::Ckw => "ckw",
            MonogamyRelation::TypeIvSteeredSum => "type-iv-steered-sum",
            MonogamyRelation::TypeIvSteeringSum => "type-iv-steering-sum",
        })
    }
}

/// Mode groups under audit: one or more steering groups and one steered
/// group. Which arities are admissible depends on the relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonogamyConfig {
    pub steering_groups: Vec<Vec<usize>>,
    pub steered: Vec<usize>,
}

impl MonogamyConfig {
    /// All groups mutually disjoint, nonempty, within range.
    fn check(&self, n_modes: usize) -> Result<()> {
        if self.steering_groups.is_empty() {
            return Err(Error::BadPartition("no steering groups".into()));
        }
        let mut seen = vec![false; n_modes];
        let mut mark = |modes: &[usize]| -> Result<()> {
            if modes.is_empty() {
                return Err(Error::BadPartition("empty group".into()));
            }
            for &m in modes {
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
            }
            Ok(())
        };
        for g in &self.steering_groups {
            mark(g)?;
        }
        mark(&self.steered)
    }

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
        let groups = self
            .steering_groups
            .iter()
            .map(|g| side(g))
            .collect::<Vec<_>>()
            .join(" ; ");
        format!("{} -> {}", groups, side(&self.steered))
    }
}

/// Outcome of one monogamy audit. `margin = lhs - rhs`;
/// `satisfied` iff the margin is above -steer_epsilon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonogamyReport {
    pub relation: MonogamyRelation,
    pub configuration: MonogamyConfig,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
}

fn g(cm: &CovarianceMatrix, from: &[usize], to: &[usize], tol: &Tolerances) -> Result<f64> {
    let part = Bipartition::new(from.to_vec(), to.to_vec())?;
    Ok(steering(cm, &part, tol)?.value)
}

/// Audit one monogamy relation on one configuration of mode groups.
///
/// Violations are reported, not errors; only configurations whose arity
/// does not fit the relation are rejected.
pub fn audit_monogamy(
    cm: &CovarianceMatrix,
    relation: MonogamyRelation,
    config: &MonogamyConfig,
    tol: &Tolerances,
) -> Result<MonogamyReport> {
    config.check(cm.n_modes())?;
    let groups = &config.steering_groups;
    let steered = &config.steered;

    let (lhs, rhs) = match relation {
        MonogamyRelation::TypeI => {
            if groups.len() != 2 || groups.iter().any(|g| g.len() != 1) || steered.len() != 1 {
                return Err(Error::BadPartition(
                    "type-i needs two single-mode steering groups and a single steered mode"
                        .into(),
                ));
            }
            let g1 = g(cm, &groups[0], steered, tol)?;
            let g2 = g(cm, &groups[1], steered, tol)?;
            (0.0, g1.min(g2))
        }
        MonogamyRelation::TypeII => {
            if groups.len() != 2 {
                return Err(Error::BadPartition(
                    "type-ii needs exactly two steering groups".into(),
                ));
            }
            let g1 = g(cm, &groups[0], steered, tol)?;
            let g2 = g(cm, &groups[1], steered, tol)?;
            (0.0, g1.min(g2))
        }
        MonogamyRelation::Ckw => {
            if groups.len() >= 2 {
                // Many-to-one: singleton steering groups, single steered mode.
                if groups.iter().any(|g| g.len() != 1) || steered.len() != 1 {
                    return Err(Error::BadPartition(
                        "many-to-one ckw needs singleton steering groups and a single steered mode"
                            .into(),
                    ));
                }
                let union: Vec<usize> = groups.iter().flatten().copied().collect();
                let lhs = g(cm, &union, steered, tol)?;
                let mut rhs = 0.0;
                for grp in groups {
                    rhs += g(cm, grp, steered, tol)?;
                }
                (lhs, rhs)
            } else {
                // One-to-many mirror: one singleton group, multimode steered.
                if groups[0].len() != 1 {
                    return Err(Error::BadPartition(
                        "one-to-many ckw needs a singleton steering group".into(),
                    ));
                }
                let lhs = g(cm, &groups[0], steered, tol)?;
                let mut rhs = 0.0;
                for &j in steered {
                    rhs += g(cm, &groups[0], &[j], tol)?;
                }
                (lhs, rhs)
            }
        }
        MonogamyRelation::TypeIvSteeredSum => {
            if groups.len() != 1 {
                return Err(Error::BadPartition(
                    "type-iv needs exactly one steering group".into(),
                ));
            }
            let lhs = g(cm, &groups[0], steered, tol)?;
            let mut rhs = 0.0;
            for &j in steered {
                rhs += g(cm, &groups[0], &[j], tol)?;
            }
            (lhs, rhs)
        }
        MonogamyRelation::TypeIvSteeringSum => {
            if groups.len() != 1 {
                return Err(Error::BadPartition(
                    "type-iv needs exactly one steering group".into(),
                ));
            }
            let lhs = g(cm, &groups[0], steered, tol)?;
            let mut rhs = 0.0;
            for &i in &groups[0] {
                rhs += g(cm, &[i], steered, tol)?;
            }
            (lhs, rhs)
        }
    };

    let margin = lhs - rhs;
    Ok(MonogamyReport {
        relation,
        configuration: config.clone(),
        lhs,
        rhs,
        margin,
        satisfied: margin >= -tol.steer_epsilon,
    })
}

/// Enumerate audit configurations for a sweep.
///
/// Type-I/II: every unordered pair of single modes steering every
/// `steered_size`-mode group of the rest. CKW: every single steered mode
/// against all other modes as singleton steering groups. Type-IV: every
/// steering group of up to 2 modes against every disjoint steered group of
/// `steered_size` modes. The list is truncated at `cap` configurations.
pub fn sweep_configs(
    n_modes: usize,
    relation: MonogamyRelation,
    steered_size: usize,
    cap: usize,
) -> Vec<MonogamyConfig> {
    let mut out = Vec::new();
    let subsets = |size: usize, excluded: &[usize]| -> Vec<Vec<usize>> {
        let pool: Vec<usize> = (0..n_modes).filter(|m| !excluded.contains(m)).collect();
        let mut acc = Vec::new();
        let mut stack = vec![(0usize, Vec::<usize>::new())];
        while let Some((start, cur)) = stack.pop() {
            if cur.len() == size {
                acc.push(cur);
                continue;
            }
            for i in start..pool.len() {
                let mut next = cur.clone();
                next.push(pool[i]);
                stack.push((i + 1, next));
            }
        }
        acc.sort();
        acc
    };

    match relation {
        MonogamyRelation::TypeI | MonogamyRelation::TypeII => {
            let steered_size = if relation == MonogamyRelation::TypeI {
                1
            } else {
                steered_size
            };
            for i in 0..n_modes {
                for j in (i + 1)..n_modes {
                    for steered in subsets(steered_size, &[i, j]) {
                        out.push(MonogamyConfig {
                            steering_groups: vec![vec![i], vec![j]],
                            steered,
                        });
                        if out.len() >= cap {
                            return out;
                        }
                    }
                }
            }
        }
        MonogamyRelation::Ckw => {
            for k in 0..n_modes {
                let others: Vec<Vec<usize>> =
                    (0..n_modes).filter(|&m| m != k).map(|m| vec![m]).collect();
                if others.len() >= 2 {
                    out.push(MonogamyConfig {
                        steering_groups: others,
                        steered: vec![k],
                    });
                    if out.len() >= cap {
                        return out;
                    }
                }
            }
        }
        MonogamyRelation::TypeIvSteeredSum | MonogamyRelation::TypeIvSteeringSum => {
            for group_size in 1..=2usize {
                for group in subsets(group_size, &[]) {
                    for steered in subsets(steered_size, &group) {
                        out.push(MonogamyConfig {
                            steering_groups: vec![group.clone()],
                            steered,
                        });
                        if out.len() >= cap {
                            return out;
                        }
                    }
                }
            }
        }
    }
    out
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

    #[test]
    fn type_i_on_vacuum_is_satisfied_with_zero_margin() {
        let cm = CovarianceMatrix::vacuum(3);
        let config = MonogamyConfig {
            steering_groups: vec![vec![0], vec![1]],
            steered: vec![2],
        };
        let report = audit_monogamy(&cm, MonogamyRelation::TypeI, &config, &tol()).unwrap();
        assert!(report.satisfied);
        assert_eq!(report.margin, 0.0);
        assert_eq!(report.lhs, 0.0);
    }

    #[test]
    fn type_i_holds_on_random_physical_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let t = tol();
        for _ in 0..40 {
            let cm = crate::gaussian::random::random_physical_cm(4, &mut rng);
            for config in sweep_configs(4, MonogamyRelation::TypeI, 1, usize::MAX) {
                let report = audit_monogamy(&cm, MonogamyRelation::TypeI, &config, &t).unwrap();
                assert!(
                    report.satisfied,
                    "type-i violated: {} margin {}",
                    report.configuration.describe(None),
                    report.margin
                );
            }
        }
    }

    #[test]
    fn ckw_on_tmsv_with_spectator_has_nonnegative_margin() {
        // TMSV on {0,1}, vacuum spectator mode 2. One-to-many ckw from 0.
        let tmsv = CovarianceMatrix::two_mode_squeezed(0.5);
        let mut entries = DMatrix::<f64>::identity(6, 6);
        entries.view_mut((0, 0), (4, 4)).copy_from(tmsv.entries());
        let cm = CovarianceMatrix::from_matrix(entries, None, &tol()).unwrap();
        let config = MonogamyConfig {
            steering_groups: vec![vec![0]],
            steered: vec![1, 2],
        };
        let report = audit_monogamy(&cm, MonogamyRelation::Ckw, &config, &tol()).unwrap();
        assert!(report.satisfied);
        // G(0 -> {1,2}) >= G(0->1) + G(0->2), and G(0->2) = 0.
        assert_abs_diff_eq!(report.rhs, 1.0f64.cosh().ln(), epsilon = 1e-9);
        assert!(report.margin >= -1e-9);
    }

    #[test]
    fn arity_mismatches_are_rejected() {
        let cm = CovarianceMatrix::vacuum(4);
        let t = tol();
        // Type-I with a 2-mode steering group.
        let bad = MonogamyConfig {
            steering_groups: vec![vec![0, 1], vec![2]],
            steered: vec![3],
        };
        assert!(audit_monogamy(&cm, MonogamyRelation::TypeI, &bad, &t).is_err());
        // Type-IV with two steering groups.
        let bad = MonogamyConfig {
            steering_groups: vec![vec![0], vec![1]],
            steered: vec![2],
        };
        assert!(audit_monogamy(&cm, MonogamyRelation::TypeIvSteeredSum, &bad, &t).is_err());
        // Overlapping groups.
        let bad = MonogamyConfig {
            steering_groups: vec![vec![0], vec![0]],
            steered: vec![2],
        };
        assert!(audit_monogamy(&cm, MonogamyRelation::TypeII, &bad, &t).is_err());
    }

    #[test]
    fn sweep_sizes_are_sane() {
        // 4 modes, type-ii, 2-mode steered: C(4,2) pairs x C(2,2) = 6.
        let configs = sweep_configs(4, MonogamyRelation::TypeII, 2, usize::MAX);
        assert_eq!(configs.len(), 6);
        // Type-I: C(4,2) pairs x 2 remaining singles = 12.
        let configs = sweep_configs(4, MonogamyRelation::TypeI, 1, usize::MAX);
        assert_eq!(configs.len(), 12);
        // Cap truncates.
        let configs = sweep_configs(4, MonogamyRelation::TypeI, 1, 5);
        assert_eq!(configs.len(), 5);
        // CKW: one config per steered mode.
        let configs = sweep_configs(4, MonogamyRelation::Ckw, 1, usize::MAX);
        assert_eq!(configs.len(), 4);
        assert_eq!(configs[0].steering_groups.len(), 3);
    }
}
