use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which quadrature of an eigenmode is squeezed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SqueezingPhase {
    /// x squeezed, p antisqueezed.
    #[default]
    #[serde(rename = "0")]
    Zero,
    /// p squeezed, x antisqueezed.
    #[serde(rename = "pi/2")]
    HalfPi,
}

/// One squeezed spectral eigenmode of the comb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenmodeSpec {
    /// Hermite-Gauss profile order.
    pub order: u32,
    /// Negative = squeezed below shot noise; magnitude capped at 20 dB.
    pub squeezing_db: f64,
    /// Profile scale in normalized frequency units.
    pub width: f64,
    #[serde(default)]
    pub phase: SqueezingPhase,
}

/// Frequency grid the profiles are sampled on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// [lo, hi] spectral support; pixel bands tile this interval.
    #[serde(default = "default_support")]
    pub support: [f64; 2],
}

fn default_samples() -> usize {
    1024
}

fn default_support() -> [f64; 2] {
    [-1.0, 1.0]
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            support: default_support(),
        }
    }
}

impl GridSpec {
    /// Sample spacing.
    pub fn step(&self) -> f64 {
        (self.support[1] - self.support[0]) / self.samples as f64
    }

    /// Midpoint-rule sample positions.
    pub fn points(&self) -> Vec<f64> {
        let d = self.step();
        (0..self.samples)
            .map(|i| self.support[0] + (i as f64 + 0.5) * d)
            .collect()
    }
}

/// Full comb description: eigenmodes, measurement resolution, and loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombModel {
    pub eigenmodes: Vec<EigenmodeSpec>,
    /// Spectral-pixel count: 4, 8, or 16.
    pub n_pixels: usize,
    #[serde(default)]
    pub grid: GridSpec,
    /// Uniform detection efficiency in (0, 1].
    pub efficiency: f64,
    /// Extra antisqueezing per eigenmode in dB (impurity knob), >= 0.
    #[serde(default)]
    pub antisqueezing_excess_db: f64,
}

/// Profile order cap: keeps Hermite recurrences and containment scans in a
/// regime that is well-tested numerically.
pub const MAX_ORDER: u32 = 24;

impl CombModel {
    /// Checks every structural invariant except profile containment, which
    /// `eigenmode_profiles` verifies against the actual grid.
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.n_pixels, 4 | 8 | 16) {
            return Err(Error::BadModel(format!(
                "n_pixels must be 4, 8, or 16, got {}",
                self.n_pixels
            )));
        }
        let [lo, hi] = self.grid.support;
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::BadModel(format!(
                "support must be a finite interval [lo, hi] with lo < hi, got [{lo}, {hi}]"
            )));
        }
        if self.grid.samples < 16 * self.n_pixels {
            return Err(Error::GridTooCoarse {
                samples: self.grid.samples,
                n_pixels: self.n_pixels,
            });
        }
        if self.grid.samples % self.n_pixels != 0 {
            return Err(Error::BadModel(format!(
                "grid samples {} must divide evenly into {} pixel bands",
                self.grid.samples, self.n_pixels
            )));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::BadModel(format!(
                "efficiency must lie in (0, 1], got {}",
                self.efficiency
            )));
        }
        if !self.antisqueezing_excess_db.is_finite() || self.antisqueezing_excess_db < 0.0 {
            return Err(Error::BadModel(format!(
                "antisqueezing excess must be nonnegative, got {}",
                self.antisqueezing_excess_db
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for spec in &self.eigenmodes {
            if spec.order > MAX_ORDER {
                return Err(Error::BadModel(format!(
                    "eigenmode order {} exceeds the supported maximum {MAX_ORDER}",
                    spec.order
                )));
            }
            if !spec.squeezing_db.is_finite() || spec.squeezing_db.abs() > 20.0 {
                return Err(Error::BadModel(format!(
                    "squeezing must satisfy |dB| <= 20, got {}",
                    spec.squeezing_db
                )));
            }
            if !spec.width.is_finite() || spec.width <= 0.0 {
                return Err(Error::BadModel(format!(
                    "profile width must be positive, got {}",
                    spec.width
                )));
            }
            if !seen.insert(spec.order) {
                return Err(Error::BadModel(format!(
                    "duplicate eigenmode order {}",
                    spec.order
                )));
            }
        }
        Ok(())
    }

    /// Pixel-band labels for this model's resolution.
    pub fn pixel_labels(&self) -> Result<Vec<String>> {
        pixel_labels(self.n_pixels)
    }
}

/// Band labels by resolution: A..D at 4, a1..d2 at 8, a11..d22 at 16.
/// Subdivision is hierarchical: band B splits into {b1, b2}, b1 into
/// {b11, b12}.
pub fn pixel_labels(n_pixels: usize) -> Result<Vec<String>> {
    let letters_4 = ["A", "B", "C", "D"];
    let letters = ["a", "b", "c", "d"];
    let labels = match n_pixels {
        4 => letters_4.iter().map(|s| s.to_string()).collect(),
        8 => (0..8)
            .map(|i| format!("{}{}", letters[i / 2], i % 2 + 1))
            .collect(),
        16 => (0..16)
            .map(|i| {
                let suffix = ["11", "12", "21", "22"][i % 4];
                format!("{}{}", letters[i / 4], suffix)
            })
            .collect(),
        other => {
            return Err(Error::BadModel(format!(
                "no pixel-label scheme for {other} bands (supported: 4, 8, 16)"
            )))
        }
    };
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_model() -> CombModel {
        CombModel {
            eigenmodes: vec![EigenmodeSpec {
                order: 0,
                squeezing_db: -5.0,
                width: 0.2871,
                phase: SqueezingPhase::Zero,
            }],
            n_pixels: 4,
            grid: GridSpec::default(),
            efficiency: 1.0,
            antisqueezing_excess_db: 0.0,
        }
    }

    #[test]
    fn minimal_json_fills_defaults() {
        let json = r#"{
            "eigenmodes": [{"order": 0, "squeezing_db": -5.0, "width": 0.2871}],
            "n_pixels": 4,
            "efficiency": 1.0
        }"#;
        let model: CombModel = serde_json::from_str(json).unwrap();
        assert_eq!(model.grid.samples, 1024);
        assert_eq!(model.grid.support, [-1.0, 1.0]);
        assert_eq!(model.eigenmodes[0].phase, SqueezingPhase::Zero);
        assert_eq!(model.antisqueezing_excess_db, 0.0);
        assert!(model.validate().is_ok());
    }

    #[test]
    fn phase_serializes_as_angle_strings() {
        let json = serde_json::to_string(&SqueezingPhase::HalfPi).unwrap();
        assert_eq!(json, "\"pi/2\"");
        let back: SqueezingPhase = serde_json::from_str("\"0\"").unwrap();
        assert_eq!(back, SqueezingPhase::Zero);
    }

    #[test]
    fn unknown_model_fields_rejected() {
        let json = r#"{
            "eigenmodes": [], "n_pixels": 4, "efficiency": 1.0, "bogus": 3
        }"#;
        assert!(serde_json::from_str::<CombModel>(json).is_err());
    }

    #[test]
    fn structural_invariants_enforced() {
        let mut m = base_model();
        m.n_pixels = 5;
        assert!(matches!(m.validate(), Err(Error::BadModel(_))));

        let mut m = base_model();
        m.efficiency = 0.0;
        assert!(m.validate().is_err());
        m.efficiency = 1.2;
        assert!(m.validate().is_err());

        let mut m = base_model();
        m.antisqueezing_excess_db = -0.5;
        assert!(m.validate().is_err());

        let mut m = base_model();
        m.eigenmodes[0].squeezing_db = -21.0;
        assert!(m.validate().is_err());

        let mut m = base_model();
        m.eigenmodes[0].width = 0.0;
        assert!(m.validate().is_err());

        let mut m = base_model();
        m.eigenmodes.push(m.eigenmodes[0].clone());
        assert!(matches!(m.validate(), Err(Error::BadModel(msg)) if msg.contains("duplicate")));

        let mut m = base_model();
        m.eigenmodes[0].order = 25;
        assert!(m.validate().is_err());
    }

    #[test]
    fn grid_constraints_enforced() {
        let mut m = base_model();
        m.n_pixels = 16;
        m.grid.samples = 255;
        assert!(matches!(m.validate(), Err(Error::GridTooCoarse { .. })));

        let mut m = base_model();
        m.grid.samples = 1025;
        assert!(matches!(m.validate(), Err(Error::BadModel(_))));

        let mut m = base_model();
        m.grid.support = [1.0, -1.0];
        assert!(m.validate().is_err());
    }

    #[test]
    fn label_schemes_match_band_hierarchy() {
        assert_eq!(pixel_labels(4).unwrap(), ["A", "B", "C", "D"]);
        let l8 = pixel_labels(8).unwrap();
        assert_eq!(l8[0], "a1");
        assert_eq!(l8[7], "d2");
        let l16 = pixel_labels(16).unwrap();
        assert_eq!(l16[0], "a11");
        assert_eq!(l16[5], "b12");
        assert_eq!(l16[15], "d22");
        assert_eq!(
            l16.iter().collect::<std::collections::BTreeSet<_>>().len(),
            16
        );
        assert!(pixel_labels(5).is_err());
    }

    #[test]
    fn midpoint_grid_spans_support() {
        let g = GridSpec {
            samples: 4,
            support: [-1.0, 1.0],
        };
        assert_eq!(g.step(), 0.5);
        assert_eq!(g.points(), vec![-0.75, -0.25, 0.25, 0.75]);
    }
}
