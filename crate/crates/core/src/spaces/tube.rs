use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discretizer::{PointCloud, TestFunction};
use crate::error::{param, Result};
use crate::mmgraph::MMGraph;
use crate::scalar::Real;
use crate::seed::Seed;

/// Surface of the `tube_radius`-neighbourhood of the rectangular antenna
/// with arms `|m| <= arm_extent` on rows `|n| <= spine_extent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeSurfaceSpec {
    pub tube_radius: f64,
    pub arm_extent: i64,
    pub spine_extent: i64,
    /// Sample points per unit area.
    pub density: f64,
    pub seed: u64,
}

impl TubeSurfaceSpec {
    /// Link length of the auxiliary graph that carries the metric.
    pub fn link_radius(&self) -> f64 {
        2.5 / self.density.sqrt()
    }

    fn validate(&self) -> Result<()> {
        if !(self.tube_radius > 0.0 && self.tube_radius < 0.25) {
            return param(format!("tube radius must lie in (0, 1/4), got {}", self.tube_radius));
        }
        if self.arm_extent < 1 || self.spine_extent < 1 {
            return param("extents must be >= 1");
        }
        if !(self.density > 0.0) {
            return param("density must be positive");
        }
        if self.link_radius() >= 1.0 - 2.0 * self.tube_radius {
            return param("density too low: links would jump between neighbouring tubes");
        }
        Ok(())
    }
}

/// The antenna edge whose cylinder a sample point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TubeAxis {
    Spine,
    Row(i64),
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    axis: TubeAxis,
    /// Start of the unit segment along its axis (`y` on the spine, `x` on rows).
    start: i64,
}

impl Segment {
    fn point(&self, along: f64, angle: f64, r: f64) -> [f64; 3] {
        let (c, s) = (r * angle.cos(), r * angle.sin());
        match self.axis {
            TubeAxis::Spine => [c, along, s],
            TubeAxis::Row(n) => [along, n as f64 + c, s],
        }
    }

    fn endpoints(&self) -> [[i64; 2]; 2] {
        match self.axis {
            TubeAxis::Spine => [[0, self.start], [0, self.start + 1]],
            TubeAxis::Row(n) => [[self.start, n], [self.start + 1, n]],
        }
    }
}

/// Sampled tube surface with per-point bookkeeping.
#[derive(Debug, Clone)]
pub struct TubeSurface<T> {
    pub spec: TubeSurfaceSpec,
    pub cloud: PointCloud<T>,
    pub axis: Vec<TubeAxis>,
    /// Position along the axis of the carrying cylinder.
    pub along: Vec<f64>,
    pub angle: Vec<f64>,
    segment: Vec<u32>,
    segments: Vec<Segment>,
}

/// Relative error of the sample-graph metric against the exact flat metric
/// of a single cylinder, on pairs away from the junctions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricErrorReport {
    pub pairs: usize,
    pub max_relative: f64,
    pub mean_relative: f64,
}

fn distance_to_antenna(p: [f64; 3], arm: f64, spine: f64) -> f64 {
    let [x, y, z] = p;
    let dy = (y.abs() - spine).max(0.0);
    let mut best = (x * x + dy * dy + z * z).sqrt();
    let dx = (x.abs() - arm).max(0.0);
    let n0 = y.round();
    for n in [n0 - 1.0, n0, n0 + 1.0] {
        if n.abs() <= spine {
            let e = y - n;
            best = best.min((dx * dx + e * e + z * z).sqrt());
        }
    }
    best
}

/// Seeded uniform sample of the tube surface, stored segment by segment in
/// order along each axis. The metric is shortest paths
/// over links shorter than [`TubeSurfaceSpec::link_radius`]; points swallowed
/// by a neighbouring cylinder near a junction are discarded.
pub fn tube_surface_cloud<T: Real>(spec: &TubeSurfaceSpec) -> Result<TubeSurface<T>> {
    spec.validate()?;
    let (a, s, r) = (spec.arm_extent, spec.spine_extent, spec.tube_radius);
    let mut segments = Vec::new();
    for start in -s..s {
        segments.push(Segment {
            axis: TubeAxis::Spine,
            start,
        });
    }
    for n in -s..=s {
        for start in -a..a {
            segments.push(Segment {
                axis: TubeAxis::Row(n),
                start,
            });
        }
    }
    let per_segment = (spec.density * 2.0 * PI * r).round().max(1.0) as usize;
    let mut rng = Seed::new(spec.seed).child("tube-surface").rng();
    let mut coords = Vec::new();
    let (mut axis, mut along, mut angle, mut segment) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (k, seg) in segments.iter().enumerate() {
        let mut draws: Vec<(f64, f64)> = (0..per_segment)
            .map(|_| (seg.start as f64 + rng.gen::<f64>(), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        draws.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t, th) in draws {
            let p = seg.point(t, th, r);
            if distance_to_antenna(p, a as f64, s as f64) < r * (1.0 - 1e-9) {
                continue;
            }
            coords.extend(p.iter().map(|&x| T::lit(x)));
            axis.push(seg.axis);
            along.push(t);
            angle.push(th);
            segment.push(k as u32);
        }
    }
    let weights = vec![T::lit(1.0 / spec.density); axis.len()];
    let cloud = PointCloud::with_link_graph(3, coords, Some(weights), T::lit(spec.link_radius()))?;
    Ok(TubeSurface {
        spec: *spec,
        cloud,
        axis,
        along,
        angle,
        segment,
        segments,
    })
}

impl<T: Real> TubeSurface<T> {
    /// The lifted antenna height: the `y` coordinate on the spine and the row
    /// index on each arm, with its exact surface gradient norm.
    pub fn height_field(&self) -> TestFunction<T> {
        let (values, gradient_norms) = self
            .axis
            .iter()
            .zip(&self.along)
            .map(|(ax, &t)| match ax {
                TubeAxis::Spine => (T::lit(t), T::one()),
                TubeAxis::Row(n) => (T::lit(*n as f64), T::zero()),
            })
            .unzip();
        TestFunction {
            name: "antenna-height".into(),
            values,
            gradient_norms,
        }
    }

    /// For every vertex of the matching rectangular antenna graph, the sample
    /// point nearest to it among the cylinders of its incident edges.
    pub fn vertex_map(&self, g: &MMGraph<T>) -> Result<Vec<usize>> {
        let mut best: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); g.vertex_count()];
        for i in 0..self.cloud.len() {
            let seg = self.segments[self.segment[i] as usize];
            let p = self.cloud.point(i);
            for [m, n] in seg.endpoints() {
                let Some(v) = g.vertex_at([m, n, 0]) else {
                    return param(format!("graph has no vertex at ({m}, {n})"));
                };
                let d = (p[0].as_f64() - m as f64).hypot(p[1].as_f64() - n as f64).hypot(p[2].as_f64());
                if d < best[v.0].0 {
                    best[v.0] = (d, i);
                }
            }
        }
        if let Some(v) = best.iter().position(|b| b.1 == usize::MAX) {
            return param(format!("vertex {v} has no sample point nearby"));
        }
        Ok(best.into_iter().map(|b| b.1).collect())
    }

    /// Compares the sample-graph metric with the flat cylinder metric on
    /// seeded same-cylinder pairs, each point at least `r` from the segment
    /// ends and the pair at least two links apart.
    pub fn metric_error(&self, pairs: usize, seed: u64) -> MetricErrorReport {
        let r = self.spec.tube_radius;
        let interior: Vec<usize> = (0..self.cloud.len())
            .filter(|&i| {
                let seg = self.segments[self.segment[i] as usize];
                let u = self.along[i] - seg.start as f64;
                u >= r && u <= 1.0 - r
            })
            .collect();
        let mut rng = Seed::new(seed).child("tube-metric-error").rng();
        let sources = ((pairs as f64).sqrt().ceil() as usize).clamp(1, interior.len().max(1));
        let mut errors = Vec::new();
        if interior.is_empty() {
            return MetricErrorReport {
                pairs: 0,
                max_relative: 0.0,
                mean_relative: 0.0,
            };
        }
        for k in sample(&mut rng, interior.len(), sources) {
            let i = interior[k];
            let d = self.cloud.distances_from(i);
            for &j in &interior {
                if errors.len() >= pairs || j == i || self.segment[j] != self.segment[i] {
                    continue;
                }
                let dth = (self.angle[i] - self.angle[j]).abs();
                let arc = r * dth.min(2.0 * PI - dth);
                let flat = (self.along[i] - self.along[j]).hypot(arc);
                if flat < 2.0 * self.spec.link_radius() {
                    continue;
                }
                errors.push((d[j].as_f64() - flat).abs() / flat);
            }
        }
        let n = errors.len();
        MetricErrorReport {
            pairs: n,
            max_relative: errors.iter().cloned().fold(0.0, f64::max),
            mean_relative: if n == 0 { 0.0 } else { errors.iter().sum::<f64>() / n as f64 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{antenna_graph, AntennaSpec};

    fn small() -> TubeSurfaceSpec {
        TubeSurfaceSpec {
            tube_radius: 0.15,
            arm_extent: 2,
            spine_extent: 2,
            density: 150.0,
            seed: 11,
        }
    }

    #[test]
    fn points_sit_on_the_surface() {
        let tube = tube_surface_cloud::<f64>(&small()).unwrap();
        for i in 0..tube.cloud.len() {
            let p = tube.cloud.point(i);
            let d = distance_to_antenna([p[0], p[1], p[2]], 2.0, 2.0);
            assert!((d - 0.15).abs() < 1e-9, "point {i} at distance {d}");
        }
    }

    #[test]
    fn deterministic_from_seed() {
        let a = tube_surface_cloud::<f64>(&small()).unwrap();
        let b = tube_surface_cloud::<f64>(&small()).unwrap();
        assert_eq!(a.cloud.coords(), b.cloud.coords());
        let c = tube_surface_cloud::<f64>(&TubeSurfaceSpec { seed: 12, ..small() }).unwrap();
        assert_ne!(a.cloud.coords(), c.cloud.coords());
    }

    #[test]
    fn parameter_guards() {
        assert!(tube_surface_cloud::<f64>(&TubeSurfaceSpec { tube_radius: 0.25, ..small() }).is_err());
        assert!(tube_surface_cloud::<f64>(&TubeSurfaceSpec { density: 4.0, ..small() }).is_err());
    }

    #[test]
    fn vertex_map_lands_near_vertices() {
        let tube = tube_surface_cloud::<f64>(&small()).unwrap();
        let g = antenna_graph::<f64>(&AntennaSpec::rect(2, 2)).unwrap();
        let phi = tube.vertex_map(&g).unwrap();
        for v in g.vertices() {
            let c = g.coord(v).unwrap();
            let p = tube.cloud.point(phi[v.0]);
            let d = (p[0] - c[0] as f64).hypot(p[1] - c[1] as f64).hypot(p[2]);
            assert!(d < 0.3, "vertex {c:?} mapped {d} away");
        }
    }

    #[test]
    fn height_field_follows_axes() {
        let tube = tube_surface_cloud::<f64>(&small()).unwrap();
        let f = tube.height_field();
        for i in 0..tube.cloud.len() {
            match tube.axis[i] {
                TubeAxis::Spine => assert_eq!((f.values[i], f.gradient_norms[i]), (tube.along[i], 1.0)),
                TubeAxis::Row(n) => assert_eq!((f.values[i], f.gradient_norms[i]), (n as f64, 0.0)),
            }
        }
    }
}
