//! The steering quantifier and the analyses built on it.

mod enumerate;
mod loss;
mod monogamy;
mod monte_carlo;
mod quantifier;
mod spectrum;

pub use enumerate::{enumerate_bipartitions, partition_count, EnumerationMode, DEFAULT_PARTITION_CAP};
pub use loss::{loss_scan, LossScanReport, LossStep};
pub use monogamy::{
    audit_monogamy, sweep_configs, MonogamyConfig, MonogamyRelation, MonogamyReport,
};
pub use monte_carlo::{monte_carlo_uncertainty, UncertaintyEstimate};
pub use quantifier::{
    classify_direction, steering, steering_from_spectrum, SteeringDirection, SteeringResult,
};
pub use spectrum::{
    box_stats, steering_spectrum, BoxStats, GroupStats, PartitionValue, SpectrumOptions,
    SteeringSpectrumReport, WhiskerRule,
};
