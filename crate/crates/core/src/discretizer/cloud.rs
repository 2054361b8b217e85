use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use crate::error::{param, Error, Result};
use crate::mmgraph::MMGraph;
use crate::scalar::Real;

const MAX_DIM: usize = 4;
type CellKey = [i64; MAX_DIM];

/// Distance oracle attached to a point cloud.
#[derive(Debug, Clone)]
pub enum Metric<T> {
    /// Plain Euclidean distance between coordinate tuples.
    Euclidean,
    /// Intrinsic distance on a horosphere of a constant-curvature half-space
    /// model: coordinate distance times `scale` (= 1 / (a * height)).
    Horospherical { scale: T },
    /// Shortest-path distance on an auxiliary weighted graph over the sample.
    SampleGraph(SampleGraph<T>),
}

impl<T> Metric<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Horospherical { .. } => "horospherical",
            Metric::SampleGraph(_) => "tube-graph-ambient",
        }
    }
}

/// Weighted undirected graph over sample indices (CSR).
#[derive(Debug, Clone)]
pub struct SampleGraph<T> {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    lengths: Vec<T>,
}

impl<T: Real> SampleGraph<T> {
    fn from_weighted_edges(n: usize, edges: &[(usize, usize, T)]) -> Self {
        let mut deg = vec![0usize; n];
        for &(a, b, _) in edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets[..n].to_vec();
        let mut targets = vec![0u32; offsets[n]];
        let mut lengths = vec![T::zero(); offsets[n]];
        for &(a, b, w) in edges {
            targets[fill[a]] = b as u32;
            lengths[fill[a]] = w;
            fill[a] += 1;
            targets[fill[b]] = a as u32;
            lengths[fill[b]] = w;
            fill[b] += 1;
        }
        SampleGraph {
            offsets,
            targets,
            lengths,
        }
    }

    /// Hop metric of an existing graph (unit edge lengths).
    pub fn from_graph(g: &MMGraph<T>) -> Self {
        let edges: Vec<(usize, usize, T)> = g.edges().map(|(a, b)| (a.0, b.0, T::one())).collect();
        Self::from_weighted_edges(g.vertex_count(), &edges)
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    fn is_connected(&self) -> bool {
        let n = self.offsets.len() - 1;
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut q = VecDeque::from([0usize]);
        let mut count = 1;
        while let Some(v) = q.pop_front() {
            for &w in &self.targets[self.offsets[v]..self.offsets[v + 1]] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    q.push_back(w as usize);
                }
            }
        }
        count == n
    }

    /// Dijkstra from `sources`, settling vertices in distance order and
    /// skipping paths longer than `limit`. The visitor returns `false` to stop.
    fn dijkstra(&self, sources: &[usize], limit: Option<T>, mut visit: impl FnMut(usize, T) -> bool) {
        let mut dist: HashMap<usize, T> = HashMap::new();
        let mut settled: HashSet<usize> = HashSet::new();
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist.insert(s, T::zero());
            heap.push(HeapItem(T::zero(), s));
        }
        while let Some(HeapItem(d, v)) = heap.pop() {
            if !settled.insert(v) {
                continue;
            }
            if !visit(v, d) {
                return;
            }
            for k in self.offsets[v]..self.offsets[v + 1] {
                let w = self.targets[k] as usize;
                let nd = d + self.lengths[k];
                if limit.is_some_and(|l| nd > l) || settled.contains(&w) {
                    continue;
                }
                if dist.get(&w).is_none_or(|&old| nd < old) {
                    dist.insert(w, nd);
                    heap.push(HeapItem(nd, w));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct HeapItem<T>(T, usize);

impl<T: Real> PartialEq for HeapItem<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for HeapItem<T> {}
impl<T: Real> PartialOrd for HeapItem<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for HeapItem<T> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Uniform bucket grid over coordinates.
#[derive(Debug, Clone)]
struct GridIndex {
    cell: f64,
    buckets: HashMap<CellKey, Vec<u32>>,
}

impl GridIndex {
    fn build<T: Real>(dim: usize, coords: &[T], cell: f64) -> Self {
        let mut buckets: HashMap<CellKey, Vec<u32>> = HashMap::new();
        for (i, p) in coords.chunks(dim).enumerate() {
            buckets.entry(Self::key(p, cell)).or_default().push(i as u32);
        }
        GridIndex { cell, buckets }
    }

    fn key<T: Real>(p: &[T], cell: f64) -> CellKey {
        let mut k = [0i64; MAX_DIM];
        for (slot, x) in k.iter_mut().zip(p) {
            *slot = (x.as_f64() / cell).floor() as i64;
        }
        k
    }

    /// Candidate indices within coordinate radius `r` of `p` (superset).
    fn candidates<T: Real>(&self, dim: usize, p: &[T], r: f64, mut f: impl FnMut(usize)) {
        let reach = (r / self.cell).ceil();
        let cube = (2.0 * reach + 1.0).powi(dim as i32);
        if !reach.is_finite() || cube > self.buckets.len() as f64 {
            for bucket in self.buckets.values() {
                for &i in bucket {
                    f(i as usize);
                }
            }
            return;
        }
        let reach = reach as i64;
        let center = Self::key(p, self.cell);
        let mut offset = [0i64; MAX_DIM];
        for d in 0..dim {
            offset[d] = -reach;
        }
        loop {
            let mut k = center;
            for d in 0..dim {
                k[d] += offset[d];
            }
            if let Some(bucket) = self.buckets.get(&k) {
                for &i in bucket {
                    f(i as usize);
                }
            }
            // odometer increment
            let mut d = 0;
            loop {
                if d == dim {
                    return;
                }
                offset[d] += 1;
                if offset[d] > reach {
                    offset[d] = -reach;
                    d += 1;
                } else {
                    break;
                }
            }
        }
    }
}

/// Finite sample of a metric measure space.
#[derive(Debug, Clone)]
pub struct PointCloud<T> {
    dim: usize,
    coords: Vec<T>,
    weights: Vec<T>,
    metric: Metric<T>,
    index: GridIndex,
}

fn default_cell<T: Real>(dim: usize, coords: &[T]) -> f64 {
    let n = coords.len() / dim.max(1);
    if n == 0 {
        return 1.0;
    }
    let mut vol = 1.0;
    for d in 0..dim {
        let (lo, hi) = coords
            .iter()
            .skip(d)
            .step_by(dim)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x.as_f64()), hi.max(x.as_f64()))
            });
        vol *= (hi - lo).max(1e-9);
    }
    let spacing = (vol / n as f64).powf(1.0 / dim as f64);
    (2.0 * spacing).max(1e-9)
}

impl<T: Real> PointCloud<T> {
    /// Builds a cloud with a coordinate metric. `weights = None` gives unit
    /// weights.
    pub fn new(dim: usize, coords: Vec<T>, weights: Option<Vec<T>>, metric: Metric<T>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return param(format!("point dimension must be in 1..={MAX_DIM}, got {dim}"));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return param("coordinate list is empty or not a multiple of the dimension");
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return param("non-finite coordinate");
        }
        let n = coords.len() / dim;
        let weights = match weights {
            Some(w) => {
                if w.len() != n {
                    return param(format!("{} weights for {n} points", w.len()));
                }
                if w.iter().any(|x| !(x.is_finite() && *x > T::zero())) {
                    return param("weights must be positive");
                }
                w
            }
            None => vec![T::one(); n],
        };
        if let Metric::Horospherical { scale } = &metric {
            if !(*scale > T::zero()) {
                return param("horospherical scale must be positive");
            }
        }
        if let Metric::SampleGraph(sg) = &metric {
            if sg.offsets.len() != n + 1 {
                return param("sample graph size does not match the cloud");
            }
        }
        let index = GridIndex::build(dim, &coords, default_cell(dim, &coords));
        Ok(PointCloud {
            dim,
            coords,
            weights,
            metric,
            index,
        })
    }

    /// Cloud whose metric is the shortest-path distance over links shorter
    /// than `link_radius` (Euclidean link lengths).
    pub fn with_link_graph(dim: usize, coords: Vec<T>, weights: Option<Vec<T>>, link_radius: T) -> Result<Self> {
        let mut cloud = Self::new(dim, coords, weights, Metric::Euclidean)?;
        if !(link_radius > T::zero()) {
            return param("link radius must be positive");
        }
        let n = cloud.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for (j, d) in cloud.coordinate_within(i, link_radius, true) {
                if j > i {
                    edges.push((i, j, d));
                }
            }
        }
        let sg = SampleGraph::from_weighted_edges(n, &edges);
        if !sg.is_connected() {
            return Err(Error::Construction(
                "sample too sparse: auxiliary link graph is disconnected".into(),
            ));
        }
        cloud.metric = Metric::SampleGraph(sg);
        Ok(cloud)
    }

    /// The vertex set of `g` with its hop metric and measure as weights.
    pub fn from_graph(g: &MMGraph<T>) -> Result<Self> {
        let coords: Vec<T> = (0..g.vertex_count()).map(T::from_count).collect();
        Self::new(
            1,
            coords,
            Some(g.measures().to_vec()),
            Metric::SampleGraph(SampleGraph::from_graph(g)),
        )
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn weight(&self, i: usize) -> T {
        self.weights[i]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }

    pub fn metric(&self) -> &Metric<T> {
        &self.metric
    }

    fn coord_scale(&self) -> T {
        match &self.metric {
            Metric::Horospherical { scale } => *scale,
            _ => T::one(),
        }
    }

    fn coord_distance(&self, i: usize, j: usize) -> T {
        let s: T = self
            .point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (*a - *b) * (*a - *b))
            .sum();
        s.sqrt() * self.coord_scale()
    }

    fn coordinate_within(&self, i: usize, r: T, strict: bool) -> Vec<(usize, T)> {
        let scale = self.coord_scale();
        let mut out = Vec::new();
        self.index
            .candidates(self.dim, self.point(i), (r / scale).as_f64(), |j| {
                let d = self.coord_distance(i, j);
                if d < r || (!strict && d == r) {
                    out.push((j, d));
                }
            });
        out.sort_unstable_by_key(|&(j, _)| j);
        out
    }

    pub fn distance(&self, i: usize, j: usize) -> T {
        match &self.metric {
            Metric::SampleGraph(sg) => {
                if i == j {
                    return T::zero();
                }
                let mut found = T::infinity();
                sg.dijkstra(&[i], None, |v, d| {
                    if v == j {
                        found = d;
                        return false;
                    }
                    true
                });
                found
            }
            _ => self.coord_distance(i, j),
        }
    }

    /// Points at distance `< r` (`strict`) or `<= r` from point `i`, sorted
    /// by index, with their distances.
    pub fn within(&self, i: usize, r: T, strict: bool) -> Vec<(usize, T)> {
        match &self.metric {
            Metric::SampleGraph(sg) => {
                let mut out = Vec::new();
                sg.dijkstra(&[i], Some(r), |v, d| {
                    if d < r || (!strict && d == r) {
                        out.push((v, d));
                    }
                    true
                });
                out.sort_unstable_by_key(|&(j, _)| j);
                out
            }
            _ => self.coordinate_within(i, r, strict),
        }
    }

    /// Distances from point `i` to every point.
    pub fn distances_from(&self, i: usize) -> Vec<T> {
        match &self.metric {
            Metric::SampleGraph(sg) => {
                let mut dist = vec![T::infinity(); self.len()];
                sg.dijkstra(&[i], None, |v, d| {
                    dist[v] = d;
                    true
                });
                dist
            }
            _ => (0..self.len()).map(|j| self.coord_distance(i, j)).collect(),
        }
    }

    /// Distance from every point to the nearest member of `set`.
    pub fn distance_to_set(&self, set: &[usize]) -> Vec<T> {
        let mut dist = vec![T::infinity(); self.len()];
        if set.is_empty() {
            return dist;
        }
        match &self.metric {
            Metric::SampleGraph(sg) => {
                sg.dijkstra(set, None, |v, d| {
                    dist[v] = d;
                    true
                });
            }
            _ => {
                let coords: Vec<T> = set.iter().flat_map(|&s| self.point(s).iter().copied()).collect();
                let sub = GridIndex::build(self.dim, &coords, default_cell(self.dim, &coords));
                let scale = self.coord_scale();
                for (i, slot) in dist.iter_mut().enumerate() {
                    let p = self.point(i);
                    let mut r = sub.cell;
                    loop {
                        let mut best = T::infinity();
                        sub.candidates(self.dim, p, r, |k| {
                            let d = self.coord_distance(i, set[k]);
                            if d < best {
                                best = d;
                            }
                        });
                        // a hit inside the scanned radius is the true nearest
                        if best.is_finite() && (best / scale).as_f64() <= r {
                            *slot = best;
                            break;
                        }
                        r *= 2.0;
                    }
                }
            }
        }
        dist
    }
}
