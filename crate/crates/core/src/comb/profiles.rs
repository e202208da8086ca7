use nalgebra::{DMatrix, DVector};

use crate::comb::model::CombModel;
use crate::error::{Error, Result};

/// Profile mass allowed outside the spectral support.
const CONTAINMENT_LIMIT: f64 = 1e-6;

/// Trapezoid points per tail in the containment integral.
const TAIL_POINTS: usize = 20_001;

/// Physicists' Hermite polynomial by forward recurrence.
fn hermite(order: u32, x: f64) -> f64 {
    let mut h0 = 1.0;
    if order == 0 {
        return h0;
    }
    let mut h1 = 2.0 * x;
    for k in 1..order {
        let next = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = next;
    }
    h1
}

/// L2-normalized Hermite-Gauss profile value at `xi`.
fn profile_value(order: u32, width: f64, xi: f64) -> f64 {
    // 2^o * o! stays below 1e32 for o <= 24, safely inside f64 range.
    let scale: f64 = (1..=order).fold(1.0, |acc, k| acc * 2.0 * k as f64);
    let norm = 1.0 / (scale * width * std::f64::consts::PI.sqrt()).sqrt();
    let t = xi / width;
    hermite(order, t) * (-t * t / 2.0).exp() * norm
}

/// Trapezoid rule over [a, b] with TAIL_POINTS samples.
fn trapezoid_mass(order: u32, width: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / (TAIL_POINTS - 1) as f64;
    let mut sum = 0.0;
    for i in 0..TAIL_POINTS {
        let y = profile_value(order, width, a + i as f64 * h).powi(2);
        let w = if i == 0 || i == TAIL_POINTS - 1 { 0.5 } else { 1.0 };
        sum += w * y;
    }
    sum * h
}

/// Profile mass outside [lo, hi]. The integration extent covers the
/// classically allowed region (oscillatory span ~ w*sqrt(2o+1)) plus a wide
/// Gaussian skirt; mass beyond it is negligible against the 1e-6 limit.
fn tail_mass(order: u32, width: f64, lo: f64, hi: f64) -> f64 {
    let ext = 3.0 * width * ((2 * order + 1) as f64).sqrt() + 8.0 * width;
    trapezoid_mass(order, width, -ext, lo) + trapezoid_mass(order, width, hi, ext)
}

/// Samples each eigenmode profile on the grid and orthonormalizes the set.
///
/// Rows are Hermite-Gauss profiles made mutually orthonormal with respect
/// to the grid inner product sum(u*v)*step by two-pass Gram-Schmidt.
/// Profiles of different widths overlap, so orthonormalization does real
/// work; processing follows eigenmode list order.
pub fn eigenmode_profiles(model: &CombModel) -> Result<DMatrix<f64>> {
    model.validate()?;
    let [lo, hi] = model.grid.support;
    for spec in &model.eigenmodes {
        let mass = tail_mass(spec.order, spec.width, lo, hi);
        if mass > CONTAINMENT_LIMIT {
            return Err(Error::ProfileNotContained {
                order: spec.order,
                width: spec.width,
                mass,
            });
        }
    }

    let points = model.grid.points();
    let step = model.grid.step();
    let mut rows: Vec<DVector<f64>> = model
        .eigenmodes
        .iter()
        .map(|spec| {
            DVector::from_iterator(
                points.len(),
                points
                    .iter()
                    .map(|&xi| profile_value(spec.order, spec.width, xi)),
            )
        })
        .collect();

    for i in 0..rows.len() {
        let mut v = rows[i].clone();
        for _ in 0..2 {
            for j in 0..i {
                let overlap = v.dot(&rows[j]) * step;
                v.axpy(-overlap, &rows[j], 1.0);
            }
        }
        let norm = (v.dot(&v) * step).sqrt();
        if norm < 1e-8 {
            return Err(Error::BadModel(format!(
                "eigenmode {} is numerically dependent on earlier profiles",
                model.eigenmodes[i].order
            )));
        }
        v /= norm;
        rows[i] = v;
    }

    let n = points.len();
    Ok(DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]))
}

/// Overlap of every eigenmode with every normalized flat-top band mode.
///
/// Band b is the indicator of its equal-width interval, L2-normalized on
/// the grid; entry (k, b) = sum over the band of profile k, times
/// step/sqrt(band_samples*step).
pub fn pixel_overlap_matrix(model: &CombModel) -> Result<DMatrix<f64>> {
    let profiles = eigenmode_profiles(model)?;
    let step = model.grid.step();
    let per = model.grid.samples / model.n_pixels;
    let band_norm = (per as f64 * step).sqrt();
    let mut overlaps = DMatrix::zeros(profiles.nrows(), model.n_pixels);
    for k in 0..profiles.nrows() {
        for b in 0..model.n_pixels {
            let seg: f64 = (b * per..(b + 1) * per).map(|i| profiles[(k, i)]).sum();
            overlaps[(k, b)] = seg * step / band_norm;
        }
    }
    Ok(overlaps)
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::comb::model::{CombModel, EigenmodeSpec, GridSpec, SqueezingPhase};

    /// Widths with comfortable containment headroom per profile order.
    pub const SAFE_WIDTHS: [f64; 12] = [
        0.2871, 0.2533, 0.2315, 0.2155, 0.2028, 0.1924, 0.1836, 0.1761, 0.1695, 0.1636, 0.1584,
        0.1537,
    ];

    /// The multimode fixture used across tests: 12 eigenmodes with squeezed
    /// quadrature alternating by order parity.
    pub fn default_fixture(n_pixels: usize) -> CombModel {
        let eigenmodes = (0..12)
            .map(|k| EigenmodeSpec {
                order: k as u32,
                squeezing_db: -9.0 + 0.25 * k as f64,
                width: SAFE_WIDTHS[k],
                phase: if k % 2 == 0 {
                    SqueezingPhase::Zero
                } else {
                    SqueezingPhase::HalfPi
                },
            })
            .collect();
        CombModel {
            eigenmodes,
            n_pixels,
            grid: GridSpec::default(),
            efficiency: 0.95,
            antisqueezing_excess_db: 1.0,
        }
    }

    /// Single-eigenmode model: order 0 at the widest safe width.
    pub fn single_mode(squeezing_db: f64, excess: f64, efficiency: f64, n_pixels: usize) -> CombModel {
        CombModel {
            eigenmodes: vec![EigenmodeSpec {
                order: 0,
                squeezing_db,
                width: SAFE_WIDTHS[0],
                phase: SqueezingPhase::Zero,
            }],
            n_pixels,
            grid: GridSpec::default(),
            efficiency,
            antisqueezing_excess_db: excess,
        }
    }
}
