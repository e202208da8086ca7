use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::Result;
use crate::gaussian::CovarianceMatrix;
use crate::steering::enumerate::{enumerate_bipartitions, EnumerationMode};
use crate::steering::quantifier::steering;

/// Whisker convention for the per-split-size box statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WhiskerRule {
    /// Tukey whiskers: most extreme data within factor * IQR beyond the
    /// quartiles (factor 1.5 covers roughly 99% of normal data).
    IqrFactor(f64),
    /// Fixed percentiles, e.g. (1.5, 98.5) to cover 97% of the data.
    Percentiles(f64, f64),
}

impl Default for WhiskerRule {
    fn default() -> Self {
        WhiskerRule::IqrFactor(1.5)
    }
}

/// Options for a steering-spectrum sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub mode: EnumerationMode,
    /// Partition-count guard; None uses the default cap.
    pub cap: Option<u64>,
    pub whisker: WhiskerRule,
}

impl SpectrumOptions {
    pub fn new(mode: EnumerationMode) -> Self {
        Self {
            mode,
            cap: None,
            whisker: WhiskerRule::default(),
        }
    }
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self::new(EnumerationMode::Full)
    }
}

/// One partition's outcome in a sweep. Failures are recorded per partition
/// (`value` None, `error` set) without aborting the scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionValue {
    pub steering: Vec<usize>,
    pub steered: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    pub steerable: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Five-number summary plus mean and whisker bounds for one group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
}

/// Box statistics for all partitions sharing a (steering size, steered size)
/// split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupStats {
    pub steering_size: usize,
    pub steered_size: usize,
    pub stats: BoxStats,
}

/// Full sweep over enumerated bipartitions: per-partition values in
/// canonical order plus per-split-size box statistics. Built by a
/// deterministic parallel map, so serial and parallel runs agree exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteeringSpectrumReport {
    pub n_modes: usize,
    pub mode: EnumerationMode,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub labels: Option<Vec<String>>,
    pub partitions: Vec<PartitionValue>,
    pub groups: Vec<GroupStats>,
    pub steerable_count: u64,
    pub error_count: u64,
}

impl SteeringSpectrumReport {
    /// Largest steering value in the sweep, with its partition index.
    pub fn max_value(&self) -> Option<(usize, f64)> {
        self.partitions
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.value.map(|v| (i, v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Linear-interpolation percentile of sorted data, p in [0, 100].
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (p / 100.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] + (sorted[hi.min(n - 1)] - sorted[lo]) * frac
}

/// Box statistics of a value set; None when empty. Quartiles use linear
/// interpolation; whiskers clamp to the most extreme datum inside the rule's
/// bounds (Tukey style) or to the requested percentiles.
pub fn box_stats(values: &[f64], rule: &WhiskerRule) -> Option<BoxStats> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = percentile(&sorted, 25.0);
    let median = percentile(&sorted, 50.0);
    let q3 = percentile(&sorted, 75.0);
    let min = sorted[0];
    let max = *sorted.last().expect("nonempty");
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    let (whisker_low, whisker_high) = match rule {
        WhiskerRule::IqrFactor(f) => {
            let iqr = q3 - q1;
            let lo_bound = q1 - f * iqr;
            let hi_bound = q3 + f * iqr;
            let lo = sorted
                .iter()
                .copied()
                .find(|v| *v >= lo_bound)
                .unwrap_or(min);
            let hi = sorted
                .iter()
                .rev()
                .copied()
                .find(|v| *v <= hi_bound)
                .unwrap_or(max);
            (lo, hi)
        }
        WhiskerRule::Percentiles(lo_p, hi_p) => {
            (percentile(&sorted, *lo_p), percentile(&sorted, *hi_p))
        }
    };
    Some(BoxStats {
        count: sorted.len(),
        min,
        q1,
        median,
        q3,
        max,
        mean,
        whisker_low,
        whisker_high,
    })
}

/// Sweep the steering quantifier over every enumerated bipartition.
///
/// Per-partition errors (e.g. an ill-conditioned steering block) are
/// recorded in the row and counted, never fatal: one bad partition must not
/// destroy a 65 534-entry scan.
pub fn steering_spectrum(
    cm: &CovarianceMatrix,
    opts: &SpectrumOptions,
    tol: &Tolerances,
) -> Result<SteeringSpectrumReport> {
    let partitions = enumerate_bipartitions(cm.n_modes(), opts.mode, opts.cap)?;

    // Indexed parallel map; collect preserves enumeration order, so the
    // report is identical for any thread count.
    let rows: Vec<PartitionValue> = partitions
        .par_iter()
        .map(|part| match steering(cm, part, tol) {
            Ok(r) => PartitionValue {
                steering: part.steering().to_vec(),
                steered: part.steered().to_vec(),
                value: Some(r.value),
                steerable: r.steerable,
                error: None,
            },
            Err(e) => PartitionValue {
                steering: part.steering().to_vec(),
                steered: part.steered().to_vec(),
                value: None,
                steerable: false,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let steerable_count = rows.iter().filter(|r| r.steerable).count() as u64;
    let error_count = rows.iter().filter(|r| r.error.is_some()).count() as u64;

    let mut grouped: std::collections::BTreeMap<(usize, usize), Vec<f64>> =
        std::collections::BTreeMap::new();
    for row in &rows {
        if let Some(v) = row.value {
            grouped
                .entry((row.steering.len(), row.steered.len()))
                .or_default()
                .push(v);
        }
    }
    let groups = grouped
        .into_iter()
        .filter_map(|((m, n), values)| {
            box_stats(&values, &opts.whisker).map(|stats| GroupStats {
                steering_size: m,
                steered_size: n,
                stats,
            })
        })
        .collect();

    Ok(SteeringSpectrumReport {
        n_modes: cm.n_modes(),
        mode: opts.mode,
        labels: cm.labels().map(<[String]>::to_vec),
        partitions: rows,
        groups,
        steerable_count,
        error_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Bipartition;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn vacuum_spectrum_is_all_zero() {
        let cm = CovarianceMatrix::vacuum(4);
        let report =
            steering_spectrum(&cm, &SpectrumOptions::new(EnumerationMode::Full), &tol()).unwrap();
        assert_eq!(report.partitions.len(), 14);
        assert_eq!(report.steerable_count, 0);
        assert!(report.partitions.iter().all(|p| p.value == Some(0.0)));
        // Every box collapses at zero.
        for g in &report.groups {
            assert_eq!(g.stats.min, 0.0);
            assert_eq!(g.stats.max, 0.0);
            assert_eq!(g.stats.median, 0.0);
        }
    }

    #[test]
    fn group_counts_sum_to_enumeration_count() {
        let cm = CovarianceMatrix::vacuum(5);
        let report =
            steering_spectrum(&cm, &SpectrumOptions::new(EnumerationMode::Full), &tol()).unwrap();
        let total: usize = report.groups.iter().map(|g| g.stats.count).sum();
        assert_eq!(total, 30); // 2^5 - 2
    }

    #[test]
    fn embedded_tmsv_only_steers_across_its_own_modes() {
        // TMSV on modes {0,1}, vacuum on {2,3}; disjoint-pairs sweep.
        let tmsv = CovarianceMatrix::two_mode_squeezed(0.5);
        let mut entries = DMatrix::<f64>::identity(8, 8);
        entries.view_mut((0, 0), (4, 4)).copy_from(tmsv.entries());
        let cm = CovarianceMatrix::from_matrix(entries, None, &tol()).unwrap();
        let report = steering_spectrum(
            &cm,
            &SpectrumOptions::new(EnumerationMode::DisjointPairs),
            &tol(),
        )
        .unwrap();
        assert_eq!(report.partitions.len(), 50);
        for row in &report.partitions {
            let crosses = (row.steering.contains(&0) && row.steered.contains(&1))
                || (row.steering.contains(&1) && row.steered.contains(&0));
            assert_eq!(
                row.steerable, crosses,
                "partition {:?} -> {:?}",
                row.steering, row.steered
            );
        }
    }

    #[test]
    fn box_stats_match_hand_computation() {
        // Odd-length data with a known five-number summary.
        let values = [1.0, 2.0, 3.0, 4.0, 100.0];
        let s = box_stats(&values, &WhiskerRule::IqrFactor(1.5)).unwrap();
        assert_eq!(s.count, 5);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.q1, 2.0);
        assert_eq!(s.median, 3.0);
        assert_eq!(s.q3, 4.0);
        assert_eq!(s.max, 100.0);
        assert_abs_diff_eq!(s.mean, 22.0, epsilon = 1e-12);
        // Tukey fences: [2 - 3, 4 + 3] = [-1, 7]; whiskers clamp to data.
        assert_eq!(s.whisker_low, 1.0);
        assert_eq!(s.whisker_high, 4.0);
    }

    #[test]
    fn percentile_whiskers() {
        let values: Vec<f64> = (0..101).map(f64::from).collect();
        let s = box_stats(&values, &WhiskerRule::Percentiles(1.5, 98.5)).unwrap();
        assert_abs_diff_eq!(s.whisker_low, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.whisker_high, 98.5, epsilon = 1e-12);
    }

    #[test]
    fn parallel_and_serial_reports_are_identical() {
        let tmsv = CovarianceMatrix::two_mode_squeezed(0.7);
        let mut entries = DMatrix::<f64>::identity(12, 12);
        entries.view_mut((0, 0), (4, 4)).copy_from(tmsv.entries());
        let cm = CovarianceMatrix::from_matrix(entries, None, &tol()).unwrap();
        let opts = SpectrumOptions::new(EnumerationMode::Full);

        let serial_pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial = serial_pool.install(|| steering_spectrum(&cm, &opts, &tol()).unwrap());
        let parallel = steering_spectrum(&cm, &opts, &tol()).unwrap();
        assert_eq!(
            serde_json::to_string(&serial).unwrap(),
            serde_json::to_string(&parallel).unwrap()
        );
    }

    #[test]
    fn max_value_points_at_the_strongest_partition() {
        let cm = CovarianceMatrix::two_mode_squeezed(0.5);
        let report =
            steering_spectrum(&cm, &SpectrumOptions::new(EnumerationMode::Full), &tol()).unwrap();
        let (idx, v) = report.max_value().unwrap();
        assert_abs_diff_eq!(v, 1.0f64.cosh().ln(), epsilon = 1e-9);
        let row = &report.partitions[idx];
        let part = Bipartition::new(row.steering.clone(), row.steered.clone()).unwrap();
        assert_eq!(part.steering().len(), 1);
    }
}
