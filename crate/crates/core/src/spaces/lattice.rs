use rand::Rng as _;

use crate::error::{param, Error, Result};
use crate::mmgraph::{Coord, MMGraph};
use crate::scalar::Real;
use crate::seed::Seed;

/// `Z^d` (nearest-neighbor) restricted to the l1 ball `|x|_1 <= max_radius`,
/// so balls at the origin are exact up to `max_radius`.
pub fn grid_graph<T: Real>(dim: usize, max_radius: i64) -> Result<MMGraph<T>> {
    if !(1..=3).contains(&dim) {
        return param(format!("grid dimension must be 1, 2 or 3, got {dim}"));
    }
    if max_radius < 1 {
        return param("grid max_radius must be >= 1");
    }
    let r = max_radius;
    let span = |k: usize| if k < dim { -r..=r } else { 0..=0 };
    let mut coords: Vec<Coord> = Vec::new();
    for x in span(0) {
        for y in span(1) {
            for z in span(2) {
                if x.abs() + y.abs() + z.abs() <= r {
                    coords.push([x, y, z]);
                }
            }
        }
    }
    let index: std::collections::HashMap<Coord, usize> =
        coords.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut edges = Vec::with_capacity(coords.len() * dim);
    let mut frontier = vec![false; coords.len()];
    for (i, c) in coords.iter().enumerate() {
        frontier[i] = c.iter().map(|v| v.abs()).sum::<i64>() == r;
        for axis in 0..dim {
            let mut next = *c;
            next[axis] += 1;
            if let Some(&j) = index.get(&next) {
                edges.push((i, j));
            }
        }
    }
    MMGraph::from_edges(coords.len(), &edges, None, format!("Z^{dim}(l1 <= {r})"))?
        .with_frontier(frontier)?
        .with_coords(coords)
}

/// Rooted `branching`-ary tree of the given depth (root = vertex 0).
/// Leaves are marked as frontier: they are the truncation of an infinite tree.
pub fn tree_graph<T: Real>(branching: usize, depth: usize) -> Result<MMGraph<T>> {
    if branching < 2 {
        return param("tree branching must be >= 2");
    }
    let mut level_start = vec![0usize];
    let mut count = 1usize;
    let mut width = 1usize;
    for _ in 0..depth {
        width = width
            .checked_mul(branching)
            .ok_or_else(|| Error::Parameter("tree too large".into()))?;
        level_start.push(count);
        count += width;
    }
    if count > 50_000_000 {
        return param("tree too large");
    }
    let mut edges = Vec::with_capacity(count.saturating_sub(1));
    for v in 1..count {
        edges.push(((v - 1) / branching, v));
    }
    let leaves_from = *level_start.last().unwrap();
    let frontier = (0..count).map(|v| depth > 0 && v >= leaves_from).collect();
    MMGraph::from_edges(count, &edges, None, format!("tree(b={branching}, depth={depth})"))?
        .with_frontier(frontier)
}

/// Random geometric graph on the unit square, restricted to its largest
/// connected component.
#[derive(Debug, Clone)]
pub struct RandomGeometricGraph<T> {
    pub graph: MMGraph<T>,
    pub positions: Vec<[f64; 2]>,
}

pub fn random_geometric_graph<T: Real>(count: usize, radius: f64, seed: u64) -> Result<RandomGeometricGraph<T>> {
    if count == 0 || !(radius > 0.0) {
        return param("random geometric graph needs count >= 1 and radius > 0");
    }
    let mut rng = Seed::new(seed).child("rgg").rng();
    let pts: Vec<[f64; 2]> = (0..count).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();

    // bucket grid with cell = radius
    let cells = (1.0 / radius).ceil().max(1.0) as usize;
    let cell_of = |p: &[f64; 2]| {
        let cx = ((p[0] / radius) as usize).min(cells - 1);
        let cy = ((p[1] / radius) as usize).min(cells - 1);
        (cx, cy)
    };
    let mut buckets = vec![Vec::new(); cells * cells];
    for (i, p) in pts.iter().enumerate() {
        let (cx, cy) = cell_of(p);
        buckets[cy * cells + cx].push(i);
    }
    let mut edges = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        let (cx, cy) = cell_of(p);
        for ny in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
            for nx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
                for &j in &buckets[ny * cells + nx] {
                    if j > i {
                        let q = &pts[j];
                        let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                        if d2 < radius * radius {
                            edges.push((i, j));
                        }
                    }
                }
            }
        }
    }

    // largest component via union-find
    let mut parent: Vec<usize> = (0..count).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in &edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut size = vec![0usize; count];
    for v in 0..count {
        let r = find(&mut parent, v);
        size[r] += 1;
    }
    let root = (0..count).max_by_key(|&r| (size[r], std::cmp::Reverse(r))).unwrap();
    let mut relabel = vec![usize::MAX; count];
    let mut positions = Vec::new();
    for v in 0..count {
        if find(&mut parent, v) == root {
            relabel[v] = positions.len();
            positions.push(pts[v]);
        }
    }
    let kept: Vec<(usize, usize)> = edges
        .into_iter()
        .filter(|&(a, _)| relabel[a] != usize::MAX)
        .map(|(a, b)| (relabel[a], relabel[b]))
        .collect();
    let graph = MMGraph::from_edges(
        positions.len(),
        &kept,
        None,
        format!("rgg(n={count}, r={radius}, seed={seed})"),
    )?;
    Ok(RandomGeometricGraph { graph, positions })
}
