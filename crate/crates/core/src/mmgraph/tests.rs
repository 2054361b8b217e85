use super::*;
use crate::spaces::{antenna_graph, antenna_height_field, AntennaSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn antenna() -> MMGraph<f64> {
    antenna_graph(&AntennaSpec::diamond(40)).unwrap()
}

fn at(g: &MMGraph<f64>, m: i64, n: i64) -> VertexId {
    g.vertex_at([m, n, 0]).unwrap()
}

fn p3() -> MMGraph<f64> {
    MMGraph::from_edges(3, &[(0, 1), (1, 2)], None, "P3").unwrap()
}

/// Random connected graph: a random tree plus `extra` random chords.
fn random_graph(seed: u64, n: usize, extra: usize) -> MMGraph<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.push((a, b));
        }
    }
    let mu = (0..n).map(|_| rng.gen_range(0.25..4.0)).collect();
    MMGraph::from_edges(n, &edges, Some(mu), "random").unwrap()
}

/// Floyd–Warshall all-pairs hop distances.
fn all_pairs(g: &MMGraph<f64>) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (a, b) in g.edges() {
        d[a.0][b.0] = 1;
        d[b.0][a.0] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

#[test]
fn antenna_distances() {
    let g = antenna();
    let o = at(&g, 0, 0);
    assert_eq!(g.shortest_path_distance(o, o).unwrap(), Some(0));
    assert_eq!(g.shortest_path_distance(at(&g, 3, 2), at(&g, -1, 5)).unwrap(), Some(7));
    assert_eq!(g.shortest_path_distance(at(&g, 2, 4), at(&g, 5, 4)).unwrap(), Some(3));
}

#[test]
fn antenna_distance_formula_scope() {
    let g = antenna_graph::<f64>(&AntennaSpec::rect(6, 6)).unwrap();
    for a in g.vertices() {
        let [m, n, _] = g.coord(a).unwrap();
        let dist = g.distances_from(a, None).unwrap();
        for b in g.vertices() {
            let [m2, n2, _] = g.coord(b).unwrap();
            let expect = if n != n2 || m * m2 <= 0 {
                m.abs() + m2.abs() + (n - n2).abs()
            } else {
                (m - m2).abs()
            };
            assert_eq!(dist[b.0], Some(expect as u32), "({m},{n}) -> ({m2},{n2})");
        }
    }
}

#[test]
fn antenna_edges_and_degrees() {
    let g = antenna();
    assert!(!g.neighbors(at(&g, 2, 1)).any(|w| w == at(&g, 2, 2)));
    assert_eq!(g.degree(at(&g, 0, 0)), 4);
    assert_eq!(g.degree(at(&g, 5, 3)), 2);
}

#[test]
fn antenna_balls() {
    let g = antenna();
    let o = at(&g, 0, 0);
    let b0 = g.ball(o, 0.0).unwrap();
    assert_eq!((b0.members.clone(), b0.total_mass), (vec![o], 1.0));
    let b1 = g.ball(o, 1.0).unwrap();
    let mut got: Vec<Coord> = b1.members.iter().map(|&v| g.coord(v).unwrap()).collect();
    got.sort();
    assert_eq!(got, vec![[-1, 0, 0], [0, -1, 0], [0, 0, 0], [0, 1, 0], [1, 0, 0]]);
    let b10 = g.ball(o, 10.0).unwrap();
    assert_eq!(b10.len(), 221);
    assert_eq!(b10.total_mass, 221.0);
    assert_eq!(g.ball(o, 10.9).unwrap().len(), 221);
    assert!(g.ball(o, -1.0).is_err());
}

#[test]
fn averages() {
    let g = antenna();
    let o = at(&g, 0, 0);
    let c = ScalarField::constant(&g, 2.5);
    let u = antenna_height_field(&g);
    for r in [0.0, 3.0, 12.0] {
        let b = g.ball(o, r).unwrap();
        assert_eq!(g.field_average(&c, &b).unwrap(), 2.5);
        assert_eq!(g.field_average(&u, &b).unwrap(), 0.0);
    }
    let p = p3();
    let u = ScalarField::new(&p, vec![-1.0, 0.0, 1.0]).unwrap();
    assert_eq!(g.field_average(&c, &g.ball(o, 2.0).unwrap()).unwrap(), 2.5);
    assert_eq!(p.field_average(&u, &p.ball(VertexId(1), 1.0).unwrap()).unwrap(), 0.0);
    let empty = Ball {
        center: VertexId(0),
        radius: 0.0,
        members: vec![],
        distances: vec![],
        total_mass: 0.0,
    };
    assert!(matches!(p.field_average(&u, &empty), Err(Error::Domain(_))));
}

#[test]
fn gradients() {
    let g = antenna();
    let u = antenna_height_field(&g);
    assert_eq!(g.gradient_length(&u, at(&g, 0, 0)), 2f64.sqrt());
    assert_eq!(g.gradient_length(&u, at(&g, 5, 3)), 0.0);
    let c = ScalarField::constant(&g, -4.0);
    assert!(g.vertices().all(|v| g.gradient_length(&c, v) == 0.0));
}

#[test]
fn norms() {
    let p = p3();
    let all: Vec<VertexId> = p.vertices().collect();
    let zero = ScalarField::constant(&p, 0.0);
    assert_eq!(p.lp_norm_on_set(&zero, &all, 1.5).unwrap(), 0.0);
    let u = ScalarField::new(&p, vec![-1.0, 0.0, 1.0]).unwrap();
    assert!((p.lp_norm_on_set(&u, &all, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert!(matches!(p.lp_norm_on_set(&u, &all, 0.5), Err(Error::Parameter(_))));

    let g = random_graph(5, 50, 30);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let v = ScalarField::new(&g, (0..g.vertex_count()).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
    let set: Vec<VertexId> = g.vertices().step_by(3).collect();
    let mut oracle = 0.0;
    for &x in &set {
        oracle += v[x].abs() * g.measure(x);
    }
    assert!((g.lp_norm_on_set(&v, &set, 1.0).unwrap() - oracle).abs() < 1e-12);
}

#[test]
fn construction_errors() {
    assert!(matches!(
        MMGraph::<f64>::from_edges(4, &[(0, 1), (2, 3)], None, "split"),
        Err(Error::Disconnected { components: 2, .. })
    ));
    assert!(MMGraph::<f64>::from_edges(2, &[(0, 0), (0, 1)], None, "loop").is_err());
    assert!(MMGraph::<f64>::from_edges(2, &[(0, 1)], Some(vec![1.0, 0.0]), "mass").is_err());
    assert!(MMGraph::<f64>::from_edges(2, &[(0, 2)], None, "range").is_err());
    let g = p3();
    assert!(matches!(g.ball(VertexId(3), 1.0), Err(Error::InvalidVertex(3, 3))));
    assert!(ScalarField::new(&g, vec![1.0]).is_err());
}

#[test]
fn adjacency_is_symmetric_and_deduplicated() {
    let g = MMGraph::<f64>::from_edges(3, &[(0, 1), (1, 0), (1, 2), (0, 1)], None, "dup").unwrap();
    assert_eq!(g.edge_count(), 2);
    for x in g.vertices() {
        for y in g.neighbors(x) {
            assert!(g.neighbors(y).any(|z| z == x));
            assert_ne!(x, y);
        }
    }
}

#[test]
fn works_in_single_precision() {
    let g = antenna_graph::<f32>(&AntennaSpec::diamond(12)).unwrap();
    let o = g.vertex_at([0, 0, 0]).unwrap();
    assert_eq!(g.ball(o, 4.0).unwrap().total_mass, 41.0f32);
    let u = antenna_height_field(&g);
    assert!((g.gradient_length(&u, o) - 2f32.sqrt()).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn metric_axioms(seed in 0u64..10_000, n in 2usize..120, extra in 0usize..200) {
        let g = random_graph(seed, n, extra);
        let reference = all_pairs(&g);
        for x in 0..n {
            let d = g.distances_from(VertexId(x), None).unwrap();
            for y in 0..n {
                let dxy = d[y].unwrap() as usize;
                prop_assert_eq!(dxy, reference[x][y]);
                prop_assert_eq!(dxy == 0, x == y);
                prop_assert_eq!(reference[x][y], reference[y][x]);
            }
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let (x, y, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            prop_assert!(reference[x][z] <= reference[x][y] + reference[y][z]);
            let path = g.shortest_path(VertexId(x), VertexId(y)).unwrap().unwrap();
            prop_assert_eq!(path.len() - 1, reference[x][y]);
            prop_assert!(path.windows(2).all(|w| g.neighbors(w[0]).any(|v| v == w[1])));
        }
    }

    #[test]
    fn ball_monotonicity(seed in 0u64..10_000, r1 in 0.0f64..6.0, dr in 0.0f64..6.0) {
        let g = random_graph(seed, 80, 40);
        let p = VertexId(seed as usize % 80);
        let small = g.ball(p, r1).unwrap();
        let large = g.ball(p, r1 + dr).unwrap();
        let mask = large.mask(g.vertex_count());
        prop_assert!(small.members.iter().all(|v| mask[v.0]));
        prop_assert!(small.total_mass <= large.total_mass);
        let sum: f64 = large.members.iter().map(|&v| g.measure(v)).sum();
        prop_assert!((sum - large.total_mass).abs() < 1e-9);
    }

    #[test]
    fn gradient_vanishes_only_for_constants(seed in 0u64..10_000, bump in 0usize..40) {
        let g = random_graph(seed, 40, 20);
        let mut values = vec![1.5; 40];
        values[bump] = 2.0;
        let u = ScalarField::new(&g, values).unwrap();
        prop_assert!(g.vertices().any(|v| g.gradient_length(&u, v) > 0.0));
    }

    #[test]
    fn average_is_nearly_minimal(seed in 0u64..10_000, tau in -5.0f64..5.0, sigma in 1.0f64..4.0, r in 0.0f64..4.0) {
        let g = random_graph(seed, 60, 30);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let u = ScalarField::new(&g, (0..g.vertex_count()).map(|_| rng.gen_range(-3.0..3.0)).collect()).unwrap();
        let b = g.ball(VertexId(0), r).unwrap();
        let mean = g.field_average(&u, &b).unwrap();
        let dev = |c: f64| -> f64 { b.members.iter().map(|&x| (u[x] - c).abs().powf(sigma) * g.measure(x)).sum() };
        prop_assert!(dev(mean) <= 2f64.powf(sigma) * dev(tau) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn path_steps_of_the_growth_bound(seed in 0u64..10_000, r in 1.0f64..5.0) {
        let g = random_graph(seed, 90, 60);
        let p = VertexId(seed as usize % 90);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let u = ScalarField::new(&g, (0..g.vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let inner = g.ball(p, r).unwrap();
        let outer = g.ball(p, 3.0 * r).unwrap().mask(g.vertex_count());
        for &x in inner.members.iter().take(12) {
            for &y in inner.members.iter().rev().take(12) {
                let path = g.shortest_path(x, y).unwrap().unwrap();
                prop_assert!(((path.len() - 1) as f64) <= 6.0 * r);
                prop_assert!(path.iter().all(|v| outer[v.0]));
                let along: f64 = path.iter().map(|&v| g.gradient_length(&u, v)).sum();
                prop_assert!((u[x] - u[y]).abs() <= along + 1e-12);
            }
        }
    }
}
