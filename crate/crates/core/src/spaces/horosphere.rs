use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discretizer::{Metric, PointCloud};
use crate::error::{param, Result};
use crate::scalar::Real;
use crate::seed::Seed;

/// A horosphere `{y = height}` in the upper half-space model of constant
/// curvature `-a^2`, sampled over the coordinate box `[-extent, extent]^(n-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorosphereParams {
    /// Ambient dimension.
    pub n: usize,
    pub a: f64,
    pub height: f64,
    pub extent: f64,
    pub count: usize,
    pub seed: u64,
}

impl HorosphereParams {
    /// Induced length of a unit coordinate step on this horosphere.
    pub fn scale(&self) -> f64 {
        1.0 / (self.a * self.height)
    }

    /// The same horosphere pushed `t` units along the geodesic flow toward
    /// the point at infinity: height `height * exp(-a t)`.
    pub fn flowed(&self, t: f64) -> Self {
        HorosphereParams {
            height: self.height * (-self.a * t).exp(),
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        if !(2..=5).contains(&self.n) {
            return param(format!("ambient dimension must be in 2..=5, got {}", self.n));
        }
        if !(self.a > 0.0 && self.height > 0.0 && self.extent > 0.0) {
            return param("a, height and extent must be positive");
        }
        if self.count < 100 {
            return param(format!("count must be at least 100, got {}", self.count));
        }
        Ok(())
    }
}

/// Uniform seeded sample of the horosphere with its exact intrinsic
/// (flat) metric and the induced area measure split evenly over the points.
pub fn horosphere_cloud<T: Real>(p: &HorosphereParams) -> Result<PointCloud<T>> {
    p.validate()?;
    let dim = p.n - 1;
    let mut rng = Seed::new(p.seed).child("horosphere").rng();
    let coords: Vec<T> = (0..p.count * dim)
        .map(|_| T::lit(rng.gen_range(-p.extent..=p.extent)))
        .collect();
    let scale = p.scale();
    let area = (2.0 * p.extent * scale).powi(dim as i32);
    let weights = vec![T::lit(area / p.count as f64); p.count];
    PointCloud::new(
        dim,
        coords,
        Some(weights),
        Metric::Horospherical { scale: T::lit(scale) },
    )
}
