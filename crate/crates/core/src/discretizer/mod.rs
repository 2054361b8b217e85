//! Epsilon-discretization of sampled metric measure spaces.
//!
//! A net is a maximal `eps`-separated subset of the sample; the net graph
//! joins net points at distance `< 2 eps` and weighs each net point by the
//! sample mass of its open `eps`-ball.

mod cloud;
pub mod io;
mod rough;
mod smoothing;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::mmgraph::MMGraph;
use crate::scalar::Real;
use crate::seed::Seed;

pub use cloud::{Metric, PointCloud, SampleGraph};
pub use rough::{rough_isometry_check, RoughIsometryCert};
pub use io::{MetricChoice, RawPoints};
pub use smoothing::{smooth_field, smoothing_gradient_bound, SmoothingConstants, TestFunction};

/// Order in which the greedy pass visits sample points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetOrder {
    /// Sample order.
    Index,
    /// Seeded shuffle of the sample.
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetConfig<T> {
    pub epsilon: T,
    pub order: NetOrder,
}

impl<T: Real> NetConfig<T> {
    pub fn new(epsilon: T, ordering_seed: u64) -> Self {
        NetConfig {
            epsilon,
            order: NetOrder::Shuffled(ordering_seed),
        }
    }

    pub fn index_order(epsilon: T) -> Self {
        NetConfig {
            epsilon,
            order: NetOrder::Index,
        }
    }
}

/// Net points as sample indices, in selection order. Net-graph vertex `v`
/// is sample point `points[v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Net<T> {
    pub epsilon: T,
    pub points: Vec<usize>,
}

impl<T> Net<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Greedy maximal `eps`-separated subset of the sample.
///
/// Each visited point not yet within distance `< eps` of a chosen point is
/// chosen, so the output is `eps`-separated and covers the sample with open
/// `eps`-balls.
pub fn build_net<T: Real>(cloud: &PointCloud<T>, cfg: &NetConfig<T>) -> Result<Net<T>> {
    if !(cfg.epsilon > T::zero()) {
        return param("epsilon must be positive");
    }
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    if let NetOrder::Shuffled(seed) = cfg.order {
        order.shuffle(&mut Seed::new(seed).child("net-order").rng());
    }
    let mut covered = vec![false; cloud.len()];
    let mut points = Vec::new();
    for i in order {
        if covered[i] {
            continue;
        }
        points.push(i);
        for (j, _) in cloud.within(i, cfg.epsilon, true) {
            covered[j] = true;
        }
    }
    Ok(Net {
        epsilon: cfg.epsilon,
        points,
    })
}

/// Minimum pairwise distance between net points and the covering radius of
/// the net on the sample, by exhaustive scan. Test and audit helper.
pub fn audit_net<T: Real>(cloud: &PointCloud<T>, net: &Net<T>) -> (T, T) {
    let mut min_sep = T::infinity();
    for (a, &p) in net.points.iter().enumerate() {
        let d = cloud.distances_from(p);
        for &q in &net.points[a + 1..] {
            if d[q] < min_sep {
                min_sep = d[q];
            }
        }
    }
    let cover = cloud
        .distance_to_set(&net.points)
        .into_iter()
        .fold(T::zero(), |m, d| if d > m { d } else { m });
    (min_sep, cover)
}

fn net_lookup<T: Real>(cloud: &PointCloud<T>, net: &Net<T>) -> Result<Vec<u32>> {
    let mut slot = vec![u32::MAX; cloud.len()];
    for (v, &p) in net.points.iter().enumerate() {
        if p >= cloud.len() {
            return param(format!("net point {p} outside the cloud"));
        }
        if slot[p] != u32::MAX {
            return param(format!("net point {p} listed twice"));
        }
        slot[p] = v as u32;
    }
    Ok(slot)
}

/// The graph structure of a net: `xi ~ eta` iff `0 < d(xi, eta) < 2 eps`,
/// with `mu(xi)` the sample weight within distance `< eps` of `xi`.
pub fn net_graph<T: Real>(cloud: &PointCloud<T>, net: &Net<T>) -> Result<MMGraph<T>> {
    if net.is_empty() {
        return param("empty net");
    }
    let slot = net_lookup(cloud, net)?;
    let eps = net.epsilon;
    let two_eps = eps + eps;
    let mut edges = Vec::new();
    let mut measure = Vec::with_capacity(net.len());
    for (v, &p) in net.points.iter().enumerate() {
        let mut mass = T::zero();
        for (j, d) in cloud.within(p, two_eps, true) {
            if d < eps {
                mass += cloud.weight(j);
            }
            let w = slot[j];
            if w != u32::MAX && (w as usize) > v && d > T::zero() {
                edges.push((v, w as usize));
            }
        }
        measure.push(mass);
    }
    MMGraph::from_edges(
        net.len(),
        &edges,
        Some(measure),
        format!("net(eps={}, {} points)", eps, net.len()),
    )
    .map_err(|e| match e {
        Error::Disconnected { components, sizes } => Error::Construction(format!(
            "net graph is disconnected: {components} components with sizes {sizes:?}"
        )),
        other => other,
    })
}

/// Largest number of other net points whose `r`-balls meet the `r`-ball of
/// a given net point, as witnessed on the sample (`d(xi, eta) < 2r`).
pub fn covering_multiplicity<T: Real>(cloud: &PointCloud<T>, net: &Net<T>, r: T) -> Result<usize> {
    if !(r > T::zero()) {
        return param("multiplicity radius must be positive");
    }
    let slot = net_lookup(cloud, net)?;
    let mut best = 0;
    for &p in &net.points {
        let count = cloud
            .within(p, r + r, true)
            .into_iter()
            .filter(|&(j, _)| j != p && slot[j] != u32::MAX)
            .count();
        best = best.max(count);
    }
    Ok(best)
}
