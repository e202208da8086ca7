//! Shared state builders for the benchmarks: one shipped multimode model,
//! simulated at the requested resolution, split into spectral halves.

use std::path::PathBuf;

use combsteer_core::comb::simulate_cm;
use combsteer_core::io::load_model;
use combsteer_core::{Bipartition, CombModel, CovarianceMatrix, Tolerances};

pub fn default_model() -> CombModel {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join("default_comb.model.json");
    load_model(&path).expect("shipped model fixture loads")
}

pub fn simulated_state(n_pixels: usize) -> CovarianceMatrix {
    let mut model = default_model();
    model.n_pixels = n_pixels;
    simulate_cm(&model, &Tolerances::default()).expect("shipped model simulates")
}

/// Low half steers high half.
pub fn half_split(n_modes: usize) -> Bipartition {
    Bipartition::new(
        (0..n_modes / 2).collect(),
        (n_modes / 2..n_modes).collect(),
    )
    .expect("halves are disjoint and nonempty")
}
