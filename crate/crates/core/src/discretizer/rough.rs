use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::mmgraph::{MMGraph, VertexId};
use crate::scalar::Real;
use crate::seed::Seed;

use super::PointCloud;

/// Fitted constants of a rough isometry `phi: X -> Y` from a graph to a
/// sample. Graph distances are scaled by `scale` before comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoughIsometryCert<T> {
    /// Every sample point lies within `c1` of the image.
    pub c1: T,
    /// Bi-Lipschitz constant up to additive `c1`.
    pub c2: T,
    /// Two-sided mass comparison of corresponding `c1`-balls.
    pub c3: T,
    pub scale: T,
    pub sampled_pairs: usize,
    pub exhaustive: bool,
    pub pass: bool,
}

/// Fits the smallest constants `(c1, c2, c3)`, each `c2, c3 >= 1`, for which
///
/// * `Y` is covered by closed `c1`-balls around `phi(X)`;
/// * `d/c2 - c1 <= rho <= c2 d + c1` for the sampled pairs, with `d` the
///   sample distance and `rho = scale * hops`;
/// * `mu(B(x, c1)) / c3 <= nu(B(phi x, c1)) <= c3 mu(B(x, c1))` for every `x`.
///
/// Pairs are exhaustive when `|X|(|X|-1)/2 <= pair_budget`; otherwise about
/// `sqrt(pair_budget)` seeded sources each get a seeded set of targets.
pub fn rough_isometry_check<T: Real>(
    cloud: &PointCloud<T>,
    g: &MMGraph<T>,
    phi: &[usize],
    scale: T,
    pair_budget: usize,
    seed: u64,
) -> Result<RoughIsometryCert<T>> {
    let n = g.vertex_count();
    if phi.len() != n {
        return param(format!("map has {} entries for {n} vertices", phi.len()));
    }
    if let Some(&bad) = phi.iter().find(|&&p| p >= cloud.len()) {
        return param(format!("map target {bad} outside the cloud"));
    }
    if pair_budget == 0 {
        return param("pair budget must be positive");
    }
    if !(scale > T::zero()) {
        return param("scale must be positive");
    }

    let cover = cloud
        .distance_to_set(phi)
        .into_iter()
        .fold(T::zero(), |m, d| if d > m { d } else { m });
    let c1 = if cover > T::zero() {
        cover
    } else {
        scale * T::lit(1e-9)
    };

    let total_pairs = n * n.saturating_sub(1) / 2;
    let exhaustive = total_pairs <= pair_budget;
    let mut rng = Seed::new(seed).child("rough-isometry").rng();
    let plan: Vec<(usize, Vec<usize>)> = if exhaustive {
        (0..n).map(|s| (s, ((s + 1)..n).collect())).collect()
    } else {
        let sources = ((pair_budget as f64).sqrt().ceil() as usize).clamp(1, n);
        let per = (pair_budget / sources).clamp(1, n - 1);
        sample(&mut rng, n, sources)
            .into_iter()
            .map(|s| {
                let targets = sample(&mut rng, n - 1, per)
                    .into_iter()
                    .map(|t| if t >= s { t + 1 } else { t })
                    .collect();
                (s, targets)
            })
            .collect()
    };

    let mut c2 = T::one();
    let mut sampled = 0usize;
    for (s, targets) in &plan {
        let hops = g.distances_from(VertexId(*s), None)?;
        let dy = cloud.distances_from(phi[*s]);
        for &t in targets {
            let rho = T::from_count(hops[t].expect("graph is connected") as usize) * scale;
            let d = dy[phi[t]];
            sampled += 1;
            let upper = if d > T::zero() {
                (rho - c1) / d
            } else if rho > c1 {
                T::infinity()
            } else {
                T::zero()
            };
            let lower = d / (rho + c1);
            c2 = c2.max(upper).max(lower);
        }
    }

    let mut c3 = T::one();
    let hop_radius = c1 / scale;
    for x in g.vertices() {
        let mu = g.ball(x, hop_radius)?.total_mass;
        let nu: T = cloud
            .within(phi[x.0], c1, false)
            .into_iter()
            .map(|(j, _)| cloud.weight(j))
            .sum();
        c3 = c3.max(mu / nu).max(nu / mu);
    }

    let pass = c1.is_finite() && c2.is_finite() && c3.is_finite();
    Ok(RoughIsometryCert {
        c1,
        c2,
        c3,
        scale,
        sampled_pairs: sampled,
        exhaustive,
        pass,
    })
}
