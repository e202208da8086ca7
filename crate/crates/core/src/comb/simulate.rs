use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::comb::model::{pixel_labels, CombModel, SqueezingPhase};
use crate::comb::profiles::pixel_overlap_matrix;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gaussian::{Bipartition, CovarianceMatrix, ModeMap};
use crate::steering::{steering_spectrum, SpectrumOptions, SteeringSpectrumReport};

/// Squeezed and antisqueezed variances of one eigenmode, in the (x, p)
/// order fixed by its phase flag.
fn quadrature_variances(db: f64, excess: f64, phase: SqueezingPhase) -> (f64, f64) {
    let squeezed = 10f64.powf(db / 10.0);
    let anti = 10f64.powf((-db + excess) / 10.0);
    match phase {
        SqueezingPhase::Zero => (squeezed, anti),
        SqueezingPhase::HalfPi => (anti, squeezed),
    }
}

/// I + C^T diag(s - 1) C: pixel-block variance of eigenmodes with
/// per-mode variance s projected through overlaps C, with the unmeasured
/// remainder of every band mode left at vacuum.
fn pixel_block(overlaps: &DMatrix<f64>, variances: &[f64]) -> DMatrix<f64> {
    let p = overlaps.ncols();
    let mut scaled = overlaps.clone();
    for (k, &s) in variances.iter().enumerate() {
        for b in 0..p {
            scaled[(k, b)] *= s - 1.0;
        }
    }
    DMatrix::identity(p, p) + overlaps.transpose() * scaled
}

/// Builds the covariance matrix of the comb model in its pixel basis.
///
/// Eigenmode variances are diagonal (squeezed/antisqueezed per the phase
/// flag), projected onto flat-top band modes; uniform detection efficiency
/// mixes in vacuum last. Output carries the band labels of the model's
/// resolution and is validated before being returned.
pub fn simulate_cm(model: &CombModel, tol: &Tolerances) -> Result<CovarianceMatrix> {
    let overlaps = pixel_overlap_matrix(model)?;
    let p = model.n_pixels;
    let excess = model.antisqueezing_excess_db;
    let mut sx = Vec::with_capacity(model.eigenmodes.len());
    let mut sp = Vec::with_capacity(model.eigenmodes.len());
    for spec in &model.eigenmodes {
        let (x, pq) = quadrature_variances(spec.squeezing_db, excess, spec.phase);
        sx.push(x);
        sp.push(pq);
    }
    let x_block = pixel_block(&overlaps, &sx);
    let p_block = pixel_block(&overlaps, &sp);

    let mut sigma = DMatrix::zeros(2 * p, 2 * p);
    for a in 0..p {
        for b in 0..p {
            sigma[(2 * a, 2 * b)] = x_block[(a, b)];
            sigma[(2 * a + 1, 2 * b + 1)] = p_block[(a, b)];
        }
    }
    let eta = model.efficiency;
    sigma *= eta;
    for i in 0..2 * p {
        sigma[(i, i)] += 1.0 - eta;
    }

    let cm = CovarianceMatrix::from_matrix(sigma, Some(pixel_labels(p)?), tol)?;
    let verdict = cm.validate(tol);
    if !verdict.is_valid() {
        // Unreachable for a valid model: the construction is a convex mix
        // of vacuum with a PSD-shifted identity. Kept as a hard gate.
        return Err(Error::BadModel(format!(
            "simulated covariance matrix failed validation: {verdict}"
        )));
    }
    Ok(cm)
}

/// One partition's steering value under the full model vs the reduced
/// single-eigenmode model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionDelta {
    pub steering: Vec<usize>,
    pub steered: Vec<usize>,
    pub full_value: f64,
    pub reduced_value: f64,
    /// full_value - reduced_value.
    pub delta: f64,
}

/// Paired steering spectra of a model and its most-squeezed single
/// eigenmode, with per-partition differences.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolutionComparison {
    /// Order of the eigenmode kept in the reduced model.
    pub kept_order: u32,
    pub full: SteeringSpectrumReport,
    pub reduced: SteeringSpectrumReport,
    pub deltas: Vec<PartitionDelta>,
}

/// Sweeps the model's steering spectrum against a reduced model that keeps
/// only the most-squeezed eigenmode (minimum squeezing_db; first wins ties).
///
/// Quantifies how much of the multipixel steering structure survives when
/// the mode content collapses to one squeezer at unchanged squeezing level.
pub fn single_eigenmode_comparison(
    model: &CombModel,
    opts: &SpectrumOptions,
    tol: &Tolerances,
) -> Result<ResolutionComparison> {
    model.validate()?;
    if model.eigenmodes.is_empty() {
        return Err(Error::BadModel(
            "single-eigenmode comparison needs at least one eigenmode".into(),
        ));
    }
    let mut keep = 0;
    for (i, spec) in model.eigenmodes.iter().enumerate() {
        if spec.squeezing_db < model.eigenmodes[keep].squeezing_db {
            keep = i;
        }
    }
    let mut reduced_model = model.clone();
    reduced_model.eigenmodes = vec![model.eigenmodes[keep].clone()];

    let full = steering_spectrum(&simulate_cm(model, tol)?, opts, tol)?;
    let reduced = steering_spectrum(&simulate_cm(&reduced_model, tol)?, opts, tol)?;

    let deltas = full
        .partitions
        .iter()
        .zip(&reduced.partitions)
        .filter_map(|(f, r)| match (f.value, r.value) {
            (Some(fv), Some(rv)) => Some(PartitionDelta {
                steering: f.steering.clone(),
                steered: f.steered.clone(),
                full_value: fv,
                reduced_value: rv,
                delta: fv - rv,
            }),
            _ => None,
        })
        .collect();

    Ok(ResolutionComparison {
        kept_order: model.eigenmodes[keep].order,
        full,
        reduced,
        deltas,
    })
}

/// Simulates at 16 pixels, then merges only the named coarse bands back to
/// band resolution, leaving every other pixel fine.
///
/// `coarse_bands` are 4-pixel band labels (A..D); `fine_pixels` are
/// 16-pixel labels. The two parties must not touch the same spectral band.
/// Returns the mixed-resolution state and, when both parties are nonempty,
/// the coarse -> fine bipartition over its modes (flip it for the reverse
/// direction). Pixels in neither party stay in the state but outside the
/// partition.
pub fn asymmetric_resolution_cm(
    model: &CombModel,
    coarse_bands: &[String],
    fine_pixels: &[String],
    tol: &Tolerances,
) -> Result<(CovarianceMatrix, Option<Bipartition>)> {
    let labels4 = pixel_labels(4)?;
    let labels16 = pixel_labels(16)?;

    let mut coarse_idx: Vec<usize> = Vec::new();
    for label in coarse_bands {
        let band = labels4
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| {
                Error::BadArgument(format!(
                    "unknown coarse band {label:?} (expected one of A, B, C, D)"
                ))
            })?;
        if coarse_idx.contains(&band) {
            return Err(Error::BadArgument(format!(
                "coarse band {label} listed twice"
            )));
        }
        coarse_idx.push(band);
    }
    let mut fine_idx: Vec<usize> = Vec::new();
    for label in fine_pixels {
        let pixel = labels16
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| {
                Error::BadArgument(format!(
                    "unknown fine pixel {label:?} (expected a 16-pixel label like a11)"
                ))
            })?;
        if fine_idx.contains(&pixel) {
            return Err(Error::BadArgument(format!(
                "fine pixel {label} listed twice"
            )));
        }
        if coarse_idx.contains(&(pixel / 4)) {
            return Err(Error::BadArgument(format!(
                "fine pixel {label} lies inside coarse band {}",
                labels4[pixel / 4]
            )));
        }
        fine_idx.push(pixel);
    }

    let mut fine_model = model.clone();
    fine_model.n_pixels = 16;
    let cm16 = simulate_cm(&fine_model, tol)?;

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut steering_modes: Vec<usize> = Vec::new();
    let mut steered_modes: Vec<usize> = Vec::new();
    for band in 0..4 {
        if coarse_idx.contains(&band) {
            steering_modes.push(groups.len());
            groups.push((band * 4..band * 4 + 4).collect());
            labels.push(labels4[band].clone());
        } else {
            for pixel in band * 4..band * 4 + 4 {
                if fine_idx.contains(&pixel) {
                    steered_modes.push(groups.len());
                }
                groups.push(vec![pixel]);
                labels.push(labels16[pixel].clone());
            }
        }
    }
    let map = ModeMap::merge_groups(&groups, 16)?;
    let mixed = cm16.apply_mode_map(&map, Some(labels))?;
    let partition = if steering_modes.is_empty() || steered_modes.is_empty() {
        None
    } else {
        Some(Bipartition::new(steering_modes, steered_modes)?)
    };
    Ok((mixed, partition))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::model::GridSpec;
    use crate::comb::profiles::eigenmode_profiles;
    use crate::comb::profiles::test_support::{default_fixture, single_mode};
    use crate::gaussian::symplectic_eigenvalues;
    use crate::steering::steering;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn zero_eigenmodes_give_labeled_vacuum() {
        let mut model = default_fixture(4);
        model.eigenmodes.clear();
        let cm = simulate_cm(&model, &tol()).unwrap();
        assert_eq!(cm.n_modes(), 4);
        assert_eq!(cm.labels().unwrap(), ["A", "B", "C", "D"]);
        let identity = DMatrix::<f64>::identity(8, 8);
        assert_eq!(cm.entries(), &identity);
        let verdict = cm.validate(&tol());
        assert!(verdict.is_valid());
        assert!(verdict.pure);
    }

    #[test]
    fn rank_one_update_shapes_the_x_block() {
        // One squeezed eigenmode only perturbs the identity along a single
        // direction: exactly one x eigenvalue drops below 1, bounded by the
        // squeezed variance.
        let model = single_mode(-5.0, 0.0, 1.0, 4);
        let cm = simulate_cm(&model, &tol()).unwrap();
        let x = DMatrix::from_fn(4, 4, |a, b| cm.entries()[(2 * a, 2 * b)]);
        let eigs = crate::gaussian::jacobi::eigenvalues(&x);
        let floor = 10f64.powf(-0.5);
        let below: Vec<f64> = eigs.iter().copied().filter(|&e| e < 1.0 - 1e-12).collect();
        assert_eq!(below.len(), 1);
        assert!(below[0] >= floor - 1e-12);

        let p = DMatrix::from_fn(4, 4, |a, b| cm.entries()[(2 * a + 1, 2 * b + 1)]);
        let peigs = crate::gaussian::jacobi::eigenvalues(&p);
        let above: Vec<f64> = peigs.iter().copied().filter(|&e| e > 1.0 + 1e-12).collect();
        assert_eq!(above.len(), 1);
        assert!(above[0] <= 10f64.powf(0.5) + 1e-12);
    }

    #[test]
    fn multimode_fixture_reproduces_pinned_band_steering() {
        let cm = simulate_cm(&default_fixture(4), &tol()).unwrap();
        let c_to_ab = steering(&cm, &Bipartition::new(vec![2], vec![0, 1]).unwrap(), &tol())
            .unwrap()
            .value;
        let d_to_ab = steering(&cm, &Bipartition::new(vec![3], vec![0, 1]).unwrap(), &tol())
            .unwrap()
            .value;
        let cd_to_ab = steering(
            &cm,
            &Bipartition::new(vec![2, 3], vec![0, 1]).unwrap(),
            &tol(),
        )
        .unwrap()
        .value;
        assert_abs_diff_eq!(c_to_ab, 0.861977644, epsilon = 1e-6);
        assert_abs_diff_eq!(d_to_ab, 0.015136175, epsilon = 1e-6);
        assert_abs_diff_eq!(cd_to_ab, 0.880397390, epsilon = 1e-6);
    }

    #[test]
    fn coarsening_a_fine_simulation_matches_direct_simulation() {
        let fine = simulate_cm(&default_fixture(16), &tol()).unwrap();
        let groups: Vec<Vec<usize>> = (0..4).map(|b| (4 * b..4 * b + 4).collect()).collect();
        let map = ModeMap::merge_groups(&groups, 16).unwrap();
        let labels = pixel_labels(4).unwrap();
        let coarse = fine.apply_mode_map(&map, Some(labels)).unwrap();
        let direct = simulate_cm(&default_fixture(4), &tol()).unwrap();
        let max_dev = (coarse.entries() - direct.entries()).amax();
        assert!(max_dev < 1e-9, "max deviation {max_dev:e}");
    }

    #[test]
    fn lossless_zero_excess_state_extends_to_a_pure_state() {
        // Appending the band-mode remainder to the squeezed eigenmodes must
        // recover a pure global state: build an orthonormal basis spanning
        // flat-tops and eigenmodes, express the eigenmode variances there,
        // and check every symplectic eigenvalue is 1.
        let mut model = default_fixture(8);
        model.eigenmodes.truncate(4);
        model.efficiency = 1.0;
        model.antisqueezing_excess_db = 0.0;
        let q = eigenmode_profiles(&model).unwrap();
        let step = model.grid.step();
        let samples = model.grid.samples;
        let per = samples / model.n_pixels;
        let band_height = 1.0 / (per as f64 * step).sqrt();

        let mut basis: Vec<Vec<f64>> = Vec::new();
        for b in 0..model.n_pixels {
            let mut row = vec![0.0; samples];
            for item in row.iter_mut().skip(b * per).take(per) {
                *item = band_height;
            }
            basis.push(row);
        }
        for k in 0..q.nrows() {
            let mut row: Vec<f64> = q.row(k).iter().copied().collect();
            for _ in 0..2 {
                for prev in &basis {
                    let overlap: f64 =
                        row.iter().zip(prev).map(|(a, b)| a * b).sum::<f64>() * step;
                    for (r, p) in row.iter_mut().zip(prev) {
                        *r -= overlap * p;
                    }
                }
            }
            let norm = (row.iter().map(|v| v * v).sum::<f64>() * step).sqrt();
            assert!(norm > 1e-6, "eigenmode {k} inside flat-top span");
            for r in row.iter_mut() {
                *r /= norm;
            }
            basis.push(row);
        }

        let dim = basis.len();
        let mut coords = DMatrix::zeros(dim, q.nrows());
        for (a, row) in basis.iter().enumerate() {
            for k in 0..q.nrows() {
                coords[(a, k)] =
                    row.iter().zip(q.row(k).iter()).map(|(x, y)| x * y).sum::<f64>() * step;
            }
        }
        let mut sx = Vec::new();
        let mut sp = Vec::new();
        for spec in &model.eigenmodes {
            let (x, p) = quadrature_variances(spec.squeezing_db, 0.0, spec.phase);
            sx.push(x);
            sp.push(p);
        }
        let x_ext = {
            let mut scaled = coords.clone();
            for k in 0..sx.len() {
                for a in 0..dim {
                    scaled[(a, k)] *= sx[k] - 1.0;
                }
            }
            DMatrix::identity(dim, dim) + scaled * coords.transpose()
        };
        let p_ext = {
            let mut scaled = coords.clone();
            for k in 0..sp.len() {
                for a in 0..dim {
                    scaled[(a, k)] *= sp[k] - 1.0;
                }
            }
            DMatrix::identity(dim, dim) + scaled * coords.transpose()
        };
        let mut sigma = DMatrix::zeros(2 * dim, 2 * dim);
        for a in 0..dim {
            for b in 0..dim {
                sigma[(2 * a, 2 * b)] = x_ext[(a, b)];
                sigma[(2 * a + 1, 2 * b + 1)] = p_ext[(a, b)];
            }
        }
        let nus = symplectic_eigenvalues(&sigma, &tol()).unwrap();
        for nu in &nus {
            assert!((nu - 1.0).abs() < 1e-8, "symplectic eigenvalue {nu}");
        }

        // The pixel corner of the extended state is exactly the simulator's
        // output at unit efficiency.
        let cm = simulate_cm(&model, &tol()).unwrap();
        for a in 0..model.n_pixels {
            for b in 0..model.n_pixels {
                assert_abs_diff_eq!(
                    x_ext[(a, b)],
                    cm.entries()[(2 * a, 2 * b)],
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn all_coarse_merge_equals_direct_band_simulation() {
        let model = default_fixture(16);
        let labels: Vec<String> = ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect();
        let (cm, partition) = asymmetric_resolution_cm(&model, &labels, &[], &tol()).unwrap();
        assert!(partition.is_none());
        let direct = simulate_cm(&default_fixture(4), &tol()).unwrap();
        let max_dev = (cm.entries() - direct.entries()).amax();
        assert!(max_dev < 1e-9, "max deviation {max_dev:e}");
        assert_eq!(cm.labels().unwrap(), ["A", "B", "C", "D"]);
    }

    #[test]
    fn mixed_resolution_layout_and_labels() {
        let model = single_mode(-10.0, 1.0, 0.95, 16);
        let coarse = vec!["B".to_string(), "C".to_string()];
        let fine: Vec<String> = ["a11", "a12", "a21", "a22", "d11", "d12", "d21", "d22"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let (cm, partition) = asymmetric_resolution_cm(&model, &coarse, &fine, &tol()).unwrap();
        assert_eq!(cm.n_modes(), 10);
        assert_eq!(
            cm.labels().unwrap(),
            ["a11", "a12", "a21", "a22", "B", "C", "d11", "d12", "d21", "d22"]
        );
        let part = partition.unwrap();
        assert_eq!(part.steering(), [4, 5]);
        assert_eq!(part.steered(), [0, 1, 2, 3, 6, 7, 8, 9]);
    }

    #[test]
    fn party_touching_a_coarse_band_rejected() {
        let model = single_mode(-10.0, 1.0, 0.95, 16);
        let err = asymmetric_resolution_cm(
            &model,
            &["B".to_string()],
            &["b11".to_string()],
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::BadArgument(msg) if msg.contains("band B")));

        assert!(asymmetric_resolution_cm(&model, &["E".to_string()], &[], &tol()).is_err());
        assert!(
            asymmetric_resolution_cm(&model, &[], &["q99".to_string()], &tol()).is_err()
        );
    }

    #[test]
    fn vacuum_mixed_resolution_shows_no_steering_either_way() {
        let mut model = default_fixture(16);
        model.eigenmodes.clear();
        let coarse = vec!["B".to_string(), "C".to_string()];
        let fine: Vec<String> = ["a11", "a12", "d21", "d22"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let (cm, partition) = asymmetric_resolution_cm(&model, &coarse, &fine, &tol()).unwrap();
        let part = partition.unwrap();
        let fwd = steering(&cm, &part, &tol()).unwrap().value;
        let bwd = steering(&cm, &part.flipped(), &tol()).unwrap().value;
        assert_eq!(fwd, 0.0);
        assert_eq!(bwd, 0.0);
    }

    #[test]
    fn comparison_on_single_mode_model_is_a_fixed_point() {
        let model = single_mode(-9.0, 1.0, 0.95, 4);
        let opts = SpectrumOptions::default();
        let cmp = single_eigenmode_comparison(&model, &opts, &tol()).unwrap();
        assert_eq!(cmp.kept_order, 0);
        assert_eq!(cmp.deltas.len(), cmp.full.partitions.len());
        for d in &cmp.deltas {
            assert_eq!(d.full_value, d.reduced_value);
            assert_eq!(d.delta, 0.0);
        }
    }

    #[test]
    fn comparison_keeps_the_most_squeezed_eigenmode() {
        let mut model = default_fixture(4);
        // Most negative squeezing sits at order 0 (-9.0 dB) in the fixture;
        // make order 3 more squeezed and check it wins.
        model.eigenmodes[3].squeezing_db = -12.0;
        let opts = SpectrumOptions::default();
        let cmp = single_eigenmode_comparison(&model, &opts, &tol()).unwrap();
        assert_eq!(cmp.kept_order, 3);

        let mut reduced_model = model.clone();
        reduced_model.eigenmodes = vec![model.eigenmodes[3].clone()];
        let direct = steering_spectrum(
            &simulate_cm(&reduced_model, &tol()).unwrap(),
            &opts,
            &tol(),
        )
        .unwrap();
        for (a, b) in cmp.reduced.partitions.iter().zip(&direct.partitions) {
            assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn comparison_requires_an_eigenmode() {
        let mut model = default_fixture(4);
        model.eigenmodes.clear();
        let err =
            single_eigenmode_comparison(&model, &SpectrumOptions::default(), &tol()).unwrap_err();
        assert!(matches!(err, Error::BadModel(_)));
    }

    #[test]
    fn grid_support_must_fit_band_count() {
        let mut model = single_mode(-5.0, 0.0, 1.0, 16);
        model.grid = GridSpec {
            samples: 64,
            support: [-1.0, 1.0],
        };
        assert!(matches!(
            simulate_cm(&model, &tol()),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn efficiency_mixes_toward_vacuum() {
        let lossless = simulate_cm(&single_mode(-9.0, 1.0, 1.0, 4), &tol()).unwrap();
        let lossy = simulate_cm(&single_mode(-9.0, 1.0, 0.5, 4), &tol()).unwrap();
        let mut expected = lossless.entries() * 0.5;
        for i in 0..8 {
            expected[(i, i)] += 0.5;
        }
        let max_dev = (lossy.entries() - &expected).amax();
        assert!(max_dev < 1e-14);
    }

    #[test]
    fn widths_outside_containment_surface_through_simulate() {
        let mut model = single_mode(-5.0, 0.0, 1.0, 4);
        model.eigenmodes[0].width = 0.6;
        assert!(matches!(
            simulate_cm(&model, &tol()),
            Err(Error::ProfileNotContained { .. })
        ));
    }
}
