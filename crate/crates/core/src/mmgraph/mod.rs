//! Finite metric measured graphs and the discrete calculus on them.
//!
//! A graph carries the combinatorial (hop) metric and a positive vertex
//! measure. Balls are closed: `B(p, R) = { x : rho(p, x) <= R }`.

mod field;
pub mod io;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::scalar::Real;

pub use field::ScalarField;

const UNREACHED: u32 = u32::MAX;

/// Dense vertex index in `[0, |V|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i)
    }
}

/// Integer lattice coordinates attached to generated graphs (antenna, grids).
pub type Coord = [i64; 3];

/// Connected, undirected, unit-edge-length graph with a positive measure.
#[derive(Debug, Clone)]
pub struct MMGraph<T> {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    measure: Vec<T>,
    label: String,
    /// Vertices whose neighbor list is clipped by truncating an infinite space.
    frontier: Vec<bool>,
    coords: Option<Vec<Coord>>,
    coord_index: HashMap<Coord, u32>,
}

/// Closed combinatorial ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball<T> {
    pub center: VertexId,
    pub radius: T,
    /// Members in breadth-first order (center first).
    pub members: Vec<VertexId>,
    /// Hop distance of each member from the center, parallel to `members`.
    pub distances: Vec<u32>,
    pub total_mass: T,
}

impl<T> Ball<T> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Boolean membership mask over all `vertex_count` vertices.
    pub fn mask(&self, vertex_count: usize) -> Vec<bool> {
        let mut m = vec![false; vertex_count];
        for v in &self.members {
            m[v.0] = true;
        }
        m
    }
}

impl<T: Real> MMGraph<T> {
    /// Builds a graph from an undirected edge list.
    ///
    /// Duplicate edges are merged. Self-loops, out-of-range endpoints,
    /// non-positive measures and disconnected inputs are rejected. When
    /// `measure` is `None` the counting measure is used.
    pub fn from_edges(
        vertex_count: usize,
        edges: &[(usize, usize)],
        measure: Option<Vec<T>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if vertex_count >= UNREACHED as usize {
            return Err(Error::InvalidGraph("too many vertices".into()));
        }
        let measure = match measure {
            Some(m) => {
                if m.len() != vertex_count {
                    return Err(Error::InvalidGraph(format!(
                        "measure has {} entries for {} vertices",
                        m.len(),
                        vertex_count
                    )));
                }
                if let Some(i) = m.iter().position(|w| !(w.is_finite() && *w > T::zero())) {
                    return Err(Error::InvalidGraph(format!(
                        "measure of vertex {i} is not positive: {}",
                        m[i]
                    )));
                }
                m
            }
            None => vec![T::one(); vertex_count],
        };

        let mut degree = vec![0usize; vertex_count];
        for &(a, b) in edges {
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::InvalidVertex(a.max(b), vertex_count));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..vertex_count].to_vec();
        let mut targets = vec![0u32; offsets[vertex_count]];
        for &(a, b) in edges {
            targets[fill[a]] = b as u32;
            fill[a] += 1;
            targets[fill[b]] = a as u32;
            fill[b] += 1;
        }
        // sort + dedup each adjacency list, then compact
        let mut compact_offsets = Vec::with_capacity(vertex_count + 1);
        compact_offsets.push(0);
        let mut write = 0;
        for v in 0..vertex_count {
            let (s, e) = (offsets[v], offsets[v + 1]);
            targets[s..e].sort_unstable();
            let mut last = None;
            for i in s..e {
                let t = targets[i];
                if last != Some(t) {
                    targets[write] = t;
                    write += 1;
                    last = Some(t);
                }
            }
            compact_offsets.push(write);
        }
        targets.truncate(write);

        let g = MMGraph {
            offsets: compact_offsets,
            targets,
            measure,
            label: label.into(),
            frontier: vec![false; vertex_count],
            coords: None,
            coord_index: HashMap::new(),
        };
        g.check_connected()?;
        Ok(g)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.vertex_count();
        let mut comp = vec![UNREACHED; n];
        let mut sizes = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..n {
            if comp[s] != UNREACHED {
                continue;
            }
            let id = sizes.len() as u32;
            comp[s] = id;
            queue.push_back(s);
            let mut size = 0;
            while let Some(v) = queue.pop_front() {
                size += 1;
                for &w in self.neighbor_slice(v) {
                    if comp[w as usize] == UNREACHED {
                        comp[w as usize] = id;
                        queue.push_back(w as usize);
                    }
                }
            }
            sizes.push(size);
        }
        if sizes.len() > 1 {
            return Err(Error::Disconnected {
                components: sizes.len(),
                sizes,
            });
        }
        Ok(())
    }

    /// Marks vertices whose neighborhoods are clipped by truncation.
    pub fn with_frontier(mut self, frontier: Vec<bool>) -> Result<Self> {
        if frontier.len() != self.vertex_count() {
            return Err(Error::InvalidGraph("frontier mask length mismatch".into()));
        }
        self.frontier = frontier;
        Ok(self)
    }

    /// Attaches lattice coordinates (unused axes set to zero).
    pub fn with_coords(mut self, coords: Vec<Coord>) -> Result<Self> {
        if coords.len() != self.vertex_count() {
            return Err(Error::InvalidGraph("coordinate list length mismatch".into()));
        }
        let mut index = HashMap::with_capacity(coords.len());
        for (i, c) in coords.iter().enumerate() {
            if index.insert(*c, i as u32).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate coordinate {c:?}")));
            }
        }
        self.coords = Some(coords);
        self.coord_index = index;
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Replaces the measure, keeping the topology.
    pub fn with_measure(mut self, measure: Vec<T>) -> Result<Self> {
        if measure.len() != self.vertex_count() {
            return Err(Error::InvalidGraph("measure length mismatch".into()));
        }
        if measure.iter().any(|w| !(w.is_finite() && *w > T::zero())) {
            return Err(Error::InvalidGraph("measure must be positive".into()));
        }
        self.measure = measure;
        Ok(self)
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.measure.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn measure(&self, v: VertexId) -> T {
        self.measure[v.0]
    }

    pub fn measures(&self) -> &[T] {
        &self.measure
    }

    pub fn is_frontier(&self, v: VertexId) -> bool {
        self.frontier[v.0]
    }

    pub fn has_frontier(&self) -> bool {
        self.frontier.iter().any(|&f| f)
    }

    pub fn coord(&self, v: VertexId) -> Option<Coord> {
        self.coords.as_ref().map(|c| c[v.0])
    }

    pub fn vertex_at(&self, c: Coord) -> Option<VertexId> {
        self.coord_index.get(&c).map(|&i| VertexId(i as usize))
    }

    #[inline]
    fn neighbor_slice(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.neighbor_slice(v.0).iter().map(|&w| VertexId(w as usize))
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v.0 + 1] - self.offsets[v.0]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_count()).map(VertexId)
    }

    /// Iterates each undirected edge once as `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertex_count()).flat_map(move |a| {
            self.neighbor_slice(a)
                .iter()
                .filter(move |&&b| (b as usize) > a)
                .map(move |&b| (VertexId(a), VertexId(b as usize)))
        })
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v.0 < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::InvalidVertex(v.0, self.vertex_count()))
        }
    }

    /// Hop distances from `source`, stopping after `max_hops` layers.
    /// Unreached vertices get `None`.
    pub fn distances_from(&self, source: VertexId, max_hops: Option<usize>) -> Result<Vec<Option<u32>>> {
        self.check_vertex(source)?;
        let raw = self.bfs(source, max_hops.map(|h| h.min(UNREACHED as usize - 1) as u32));
        Ok(raw.into_iter().map(|d| (d != UNREACHED).then_some(d)).collect())
    }

    fn bfs(&self, source: VertexId, max_hops: Option<u32>) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[source.0] = 0;
        queue.push_back(source.0);
        while let Some(v) = queue.pop_front() {
            let d = dist[v];
            if max_hops.is_some_and(|m| d >= m) {
                continue;
            }
            for &w in self.neighbor_slice(v) {
                if dist[w as usize] == UNREACHED {
                    dist[w as usize] = d + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        dist
    }

    /// Minimum edge count over paths `x -> y`; `None` when unreachable.
    pub fn shortest_path_distance(&self, x: VertexId, y: VertexId) -> Result<Option<usize>> {
        Ok(self.shortest_path(x, y)?.map(|p| p.len() - 1))
    }

    /// One breadth-first shortest path from `x` to `y`, endpoints included.
    pub fn shortest_path(&self, x: VertexId, y: VertexId) -> Result<Option<Vec<VertexId>>> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        if x == y {
            return Ok(Some(vec![x]));
        }
        let n = self.vertex_count();
        let mut parent = vec![UNREACHED; n];
        parent[x.0] = x.0 as u32;
        let mut queue = VecDeque::from([x.0]);
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbor_slice(v) {
                let w = w as usize;
                if parent[w] == UNREACHED {
                    parent[w] = v as u32;
                    if w == y.0 {
                        let mut path = vec![y];
                        let mut cur = w;
                        while cur != x.0 {
                            cur = parent[cur] as usize;
                            path.push(VertexId(cur));
                        }
                        path.reverse();
                        return Ok(Some(path));
                    }
                    queue.push_back(w);
                }
            }
        }
        Ok(None)
    }

    /// Closed ball `{ x : rho(center, x) <= radius }`.
    pub fn ball(&self, center: VertexId, radius: T) -> Result<Ball<T>> {
        self.check_vertex(center)?;
        if !(radius >= T::zero()) {
            return param(format!("ball radius must be >= 0, got {radius}"));
        }
        let hops = hop_limit(radius);
        let mut seen = vec![false; self.vertex_count()];
        let mut members = vec![center];
        let mut distances = vec![0u32];
        seen[center.0] = true;
        let mut head = 0;
        while head < members.len() {
            let v = members[head].0;
            let d = distances[head];
            head += 1;
            if d >= hops {
                continue;
            }
            for &w in self.neighbor_slice(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    members.push(VertexId(w as usize));
                    distances.push(d + 1);
                }
            }
        }
        let total_mass = members.iter().map(|&v| self.measure(v)).sum();
        Ok(Ball {
            center,
            radius,
            members,
            distances,
            total_mass,
        })
    }

    /// Mass of each BFS layer around `center`, up to `max_hops` (inclusive).
    /// Entry `k` holds the mass of the sphere at distance exactly `k`; the
    /// vector is shorter when the graph is exhausted.
    pub fn layer_masses(&self, center: VertexId, max_hops: usize) -> Result<Vec<T>> {
        self.check_vertex(center)?;
        let dist = self.bfs(center, Some(max_hops.min(UNREACHED as usize - 1) as u32));
        let mut layers: Vec<T> = Vec::new();
        for (v, &d) in dist.iter().enumerate() {
            if d == UNREACHED {
                continue;
            }
            let d = d as usize;
            if layers.len() <= d {
                layers.resize(d + 1, T::zero());
            }
            layers[d] += self.measure[v];
        }
        Ok(layers)
    }

    /// Whether every vertex of `ball` has its full (unclipped) neighborhood.
    pub fn ball_is_complete(&self, ball: &Ball<T>) -> bool {
        ball.members.iter().all(|&v| !self.frontier[v.0])
    }

    /// Length of the discrete gradient, `(sum_{y~x} |u(y) - u(x)|^2)^{1/2}`.
    pub fn gradient_length(&self, u: &ScalarField<T>, x: VertexId) -> T {
        let ux = u[x];
        self.neighbor_slice(x.0)
            .iter()
            .map(|&y| {
                let d = u.values()[y as usize] - ux;
                d * d
            })
            .sum::<T>()
            .sqrt()
    }

    /// Measure-weighted average of `u` over the ball.
    pub fn field_average(&self, u: &ScalarField<T>, ball: &Ball<T>) -> Result<T> {
        if ball.is_empty() || ball.total_mass <= T::zero() {
            return Err(Error::Domain("average over an empty ball".into()));
        }
        let s: T = ball.members.iter().map(|&v| self.measure(v) * u[v]).sum();
        Ok(s / ball.total_mass)
    }

    /// `(sum_{x in set} |u(x)|^sigma mu(x))^{1/sigma}`.
    pub fn lp_norm_on_set(&self, u: &ScalarField<T>, set: &[VertexId], sigma: T) -> Result<T> {
        if !(sigma >= T::one()) {
            return param(format!("sigma must be >= 1, got {sigma}"));
        }
        let s: T = set.iter().map(|&v| u[v].abs().powf(sigma) * self.measure(v)).sum();
        Ok(s.powf(T::one() / sigma))
    }
}

/// Number of whole hops covered by a real radius (closed ball convention).
pub(crate) fn hop_limit<T: Real>(radius: T) -> u32 {
    let f = radius.floor();
    if f >= T::lit((UNREACHED - 1) as f64) {
        UNREACHED - 1
    } else {
        f.to_u32().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests;
