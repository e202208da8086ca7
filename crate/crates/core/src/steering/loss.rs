use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::steering::spectrum::{steering_spectrum, PartitionValue, SpectrumOptions};

/// One step of a mode-loss scan: the prefix of removed labels, and the full
/// steering spectrum of the surviving modes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossStep {
    pub removed: Vec<String>,
    pub remaining_modes: usize,
    pub steerable_count: u64,
    /// Largest steering value among the surviving partitions (0 when none).
    pub max_value: f64,
    pub partitions: Vec<PartitionValue>,
}

/// Steering robustness against losing modes one by one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossScanReport {
    pub removal_sequence: Vec<String>,
    pub steps: Vec<LossStep>,
}

/// Remove the labeled modes in order; after each removal, sweep the full
/// bipartition spectrum of what remains and count steerable partitions.
///
/// The scan proceeds over strictly growing prefixes of `removal_sequence`,
/// so step k has dropped the first k labels. The matrix must carry labels
/// and keep at least 2 modes at the deepest step.
pub fn loss_scan(
    cm: &CovarianceMatrix,
    removal_sequence: &[String],
    opts: &SpectrumOptions,
    tol: &Tolerances,
) -> Result<LossScanReport> {
    let labels = cm.labels().ok_or(Error::MissingLabels)?.to_vec();
    if removal_sequence.is_empty() {
        return Err(Error::BadArgument("empty removal sequence".into()));
    }
    for (i, l) in removal_sequence.iter().enumerate() {
        if !labels.contains(l) {
            return Err(Error::UnknownLabel(l.clone()));
        }
        if removal_sequence[..i].contains(l) {
            return Err(Error::BadArgument(format!(
                "label {l:?} removed twice in the sequence"
            )));
        }
    }
    if cm.n_modes() < removal_sequence.len() + 2 {
        return Err(Error::BadArgument(format!(
            "removing {} of {} modes leaves fewer than 2",
            removal_sequence.len(),
            cm.n_modes()
        )));
    }

    let mut steps = Vec::with_capacity(removal_sequence.len());
    for k in 1..=removal_sequence.len() {
        let removed: Vec<String> = removal_sequence[..k].to_vec();
        let keep: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| !removed.contains(l))
            .map(|(i, _)| i)
            .collect();
        let sub = cm.select_modes(&keep)?;
        let report = steering_spectrum(&sub, opts, tol)?;
        let max_value = report
            .partitions
            .iter()
            .filter_map(|p| p.value)
            .fold(0.0f64, f64::max);
        steps.push(LossStep {
            removed,
            remaining_modes: sub.n_modes(),
            steerable_count: report.steerable_count,
            max_value,
            partitions: report.partitions,
        });
    }

    Ok(LossScanReport {
        removal_sequence: removal_sequence.to_vec(),
        steps,
    })
}
