use super::*;
use crate::growth::GrowthClass;
use crate::spaces::{antenna_graph, antenna_height_field, antenna_oracles, AntennaSpec};
use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;

fn cfg(sigma: f64, beta: f64, outer: f64) -> PoincareConfig<f64> {
    PoincareConfig::new(sigma, beta, outer, 1.0).unwrap()
}

fn path3() -> MMGraph<f64> {
    MMGraph::from_edges(3, &[(0, 1), (1, 2)], None, "P3").unwrap()
}

fn antenna(radius: i64) -> (MMGraph<f64>, ScalarField<f64>, VertexId) {
    let g = antenna_graph::<f64>(&AntennaSpec::guarded_for_radius(radius)).unwrap();
    let u = antenna_height_field(&g);
    let o = g.vertex_at([0, 0, 0]).unwrap();
    (g, u, o)
}

fn random_connected(seed: u64, n: usize) -> MMGraph<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..n {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.push((a.min(b), a.max(b)));
        }
    }
    let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    MMGraph::from_edges(n, &edges, Some(mu), format!("random-{seed}")).unwrap()
}

/// Dense reference built from scratch with nalgebra: same functional,
/// variables are every vertex within one hop of the gradient ball.
fn nalgebra_reference(g: &MMGraph<f64>, p: VertexId, r: f64, outer: f64) -> f64 {
    let dist = g.distances_from(p, None).unwrap();
    let hops = |x: f64| x.floor() as u32;
    let vars: Vec<usize> = (0..g.vertex_count())
        .filter(|&v| dist[v].unwrap() <= hops(outer * r) + 1)
        .collect();
    let idx = |v: usize| vars.iter().position(|&w| w == v);
    let n = vars.len();
    let mut num = DMatrix::<f64>::zeros(n, n);
    let mut den = DMatrix::<f64>::zeros(n, n);
    let inner: Vec<usize> = vars.iter().copied().filter(|&v| dist[v].unwrap() <= hops(r)).collect();
    let mass: f64 = inner.iter().map(|&v| g.measure(VertexId(v))).sum();
    for &a in &inner {
        let ia = idx(a).unwrap();
        num[(ia, ia)] += g.measure(VertexId(a));
        for &b in &inner {
            num[(ia, idx(b).unwrap())] -= g.measure(VertexId(a)) * g.measure(VertexId(b)) / mass;
        }
    }
    for &x in vars.iter().filter(|&&v| dist[v].unwrap() <= hops(outer * r)) {
        let mu = g.measure(VertexId(x));
        for y in g.neighbors(VertexId(x)) {
            let (i, j) = (idx(x).unwrap(), idx(y.0).unwrap());
            den[(i, i)] += mu;
            den[(j, j)] += mu;
            den[(i, j)] -= mu;
            den[(j, i)] -= mu;
        }
    }
    let pin = idx(p.0).unwrap();
    let keep: Vec<usize> = (0..n).filter(|&k| k != pin).collect();
    let num = num.select_rows(&keep).select_columns(&keep);
    let den = den.select_rows(&keep).select_columns(&keep);
    let l = den.cholesky().unwrap().l();
    let linv = l.try_inverse().unwrap();
    let s = &linv * num * linv.transpose();
    let s = (&s + s.transpose()) * 0.5;
    s.symmetric_eigen().eigenvalues.max()
}

#[test]
fn constant_field_has_zero_ratio() {
    let (g, _, o) = antenna(4);
    let u = ScalarField::constant(&g, 3.5);
    let rec = poincare_ratio(&g, &u, o, 4.0, &cfg(1.0, 0.0, 3.0)).unwrap();
    assert_eq!(rec.numerator, 0.0);
    assert_eq!(rec.denominator, 0.0);
    assert_eq!(rec.ratio, Ratio::Finite(0.0));
}

#[test]
fn antenna_ratio_matches_closed_forms() {
    let (g, u, o) = antenna(10);
    let rec = poincare_ratio(&g, &u, o, 10.0, &cfg(1.0, 0.0, 1.0)).unwrap();
    let oracle = antenna_oracles(10, 1.0, 0.0, 1.0).unwrap();
    assert_eq!(oracle.numerator, 770.0);
    assert_relative_eq!(rec.numerator, 770.0, max_relative = 1e-12);
    assert_relative_eq!(rec.denominator, 21.0 * 2f64.sqrt(), max_relative = 1e-12);
    assert_relative_eq!(rec.denominator, oracle.gradient_mass, max_relative = 1e-12);
}

#[test]
fn ratio_rejects_clipped_gradient_ball() {
    let g = antenna_graph::<f64>(&AntennaSpec::diamond(20)).unwrap();
    let u = antenna_height_field(&g);
    let o = g.vertex_at([0, 0, 0]).unwrap();
    assert!(poincare_ratio(&g, &u, o, 10.0, &cfg(1.0, 0.0, 3.0)).is_err());
    assert!(poincare_ratio(&g, &u, o, 6.0, &cfg(1.0, 0.0, 3.0)).is_ok());
}

#[test]
fn zero_gradient_mass_is_flagged() {
    assert_eq!(quotient(1.0, 0.0), Ratio::Infinite);
    assert_eq!(quotient(0.0, 0.0), Ratio::Finite(0.0));
    assert_eq!(quotient(1.0, 4.0), Ratio::Finite(0.25));
}

#[test]
fn config_bounds() {
    assert!(PoincareConfig::new(0.5, 0.0, 1.0, 1.0).is_err());
    assert!(PoincareConfig::new(1.0, -1.0, 1.0, 1.0).is_err());
    assert!(PoincareConfig::new(1.0, 0.0, 0.9, 1.0).is_err());
    assert!(PoincareConfig::new(1.0, 0.0, 1.0, 0.0).is_err());
}

fn hand_fit(alpha: f64, v_prime: f64, r0: f64) -> GrowthFit<f64> {
    GrowthFit {
        alpha_hat: alpha,
        v_prime,
        r0_prime: r0,
        r_max: 1e9,
        residual: 0.0,
        residual_exponential: 0.0,
        growth_class: GrowthClass::Polynomial,
    }
}

#[test]
fn theorem_example_on_the_antenna() {
    let (g, u, o) = antenna(10);
    let m = theorem_graph_bound(&g, &u, o, 10.0, 1.0, &hand_fit(2.0, 3.0, 3.0)).unwrap();
    assert_relative_eq!(m.lhs, 770.0, max_relative = 1e-12);
    let oracle = antenna_oracles(10, 1.0, 0.0, 3.0).unwrap();
    assert_relative_eq!(oracle.gradient_mass, 61.0 * 2f64.sqrt(), max_relative = 1e-12);
    assert_relative_eq!(m.rhs, 3.0 * 100.0 * 61.0 * 2f64.sqrt(), max_relative = 1e-12);
    assert!(m.margin >= 0.0);
    assert!(m.growth_hypothesis_holds);
    assert!(m.lhs <= m.path_bound && m.path_bound <= m.rhs);
}

#[test]
fn theorem_guards() {
    let (g, u, o) = antenna(10);
    assert!(theorem_graph_bound(&g, &u, o, 2.0, 1.0, &hand_fit(2.0, 3.0, 3.0)).is_err());
    let small = antenna_graph::<f64>(&AntennaSpec::diamond(25)).unwrap();
    let u = antenna_height_field(&small);
    let o = small.vertex_at([0, 0, 0]).unwrap();
    assert!(theorem_graph_bound(&small, &u, o, 10.0, 1.0, &hand_fit(2.0, 3.0, 3.0)).is_err());
    let constant = ScalarField::constant(&g, 1.0);
    let m = theorem_graph_bound(&g, &constant, g.vertex_at([0, 0, 0]).unwrap(), 10.0, 2.0, &hand_fit(2.0, 3.0, 3.0))
        .unwrap();
    assert_eq!(m.lhs, 0.0);
    assert!(m.margin >= 0.0);
}

#[test]
fn p3_constant_is_one_half() {
    let g = path3();
    let res = optimal_constant_quadratic(&g, VertexId(1), 1.0, 1.0).unwrap();
    assert_eq!(res.method, Method::EigenExact);
    assert!((res.value - 0.5).abs() < 1e-9);
    let w = res.witness.values();
    let scale = w[2];
    assert!((w[0] + scale).abs() < 1e-9 * scale.abs() && w[1].abs() < 1e-9 * scale.abs());
}

#[test]
fn single_vertex_ball_has_zero_constant() {
    let g = MMGraph::<f64>::from_edges(1, &[], None, "point").unwrap();
    let res = optimal_constant_quadratic(&g, VertexId(0), 3.0, 2.0).unwrap();
    assert_eq!(res.value, 0.0);
    let p = path3();
    assert_eq!(optimal_constant_quadratic(&p, VertexId(0), 0.5, 1.0).unwrap().value, 0.0);
}

#[test]
fn antenna_ball_matches_power_reference() {
    let (g, _, o) = antenna(8);
    let exact = optimal_constant_quadratic(&g, o, 8.0, 1.0).unwrap();
    let reference = optimal_constant_power_reference(&g, o, 8.0, 1.0).unwrap();
    assert!(((exact.value - reference.value) / reference.value).abs() < 1e-9);
}

#[test]
fn small_graphs_match_nalgebra() {
    for seed in 0..30u64 {
        let n = 3 + (seed as usize % 10);
        let g = random_connected(seed, n);
        let p = VertexId(seed as usize % n);
        let (r, outer) = (1.0 + (seed % 3) as f64, 1.0 + (seed % 2) as f64);
        let exact = optimal_constant_quadratic(&g, p, r, outer).unwrap();
        let oracle = nalgebra_reference(&g, p, r, outer);
        assert!(((exact.value - oracle) / oracle).abs() < 1e-9, "seed {seed}: {} vs {oracle}", exact.value);
    }
}

#[test]
fn witness_is_a_local_maximum() {
    let (g, _, o) = antenna(4);
    let res = optimal_constant_quadratic(&g, o, 4.0, 2.0).unwrap();
    let c = PoincareConfig::new(2.0, 0.0, 2.0, 1.0).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let perturbed =
            ScalarField::from_vec(res.witness.values().iter().map(|w| w + 1e-3 * rng.gen_range(-1.0..1.0)).collect());
        let v = poincare_ratio(&g, &perturbed, o, 4.0, &c).unwrap().ratio.finite().unwrap();
        assert!(v <= res.value * (1.0 + 1e-9));
    }
}

#[test]
fn search_reaches_the_exact_value_at_sigma_two() {
    for seed in 0..6u64 {
        let g = random_connected(100 + seed, 8 + seed as usize);
        let exact = optimal_constant_quadratic(&g, VertexId(0), 2.0, 1.0).unwrap();
        let found = optimal_constant_search(&g, VertexId(0), 2.0, &cfg(2.0, 0.0, 1.0), 20_000, seed).unwrap();
        assert_eq!(found.method, Method::SearchLowerBound);
        assert!(found.value >= (1.0 - 1e-6) * exact.value, "{} vs {}", found.value, exact.value);
        assert!(found.value <= exact.value * (1.0 + 1e-9));
    }
}

#[test]
fn search_improves_on_the_antenna_witness() {
    let (g, u, o) = antenna(10);
    let c = cfg(1.0, 0.0, 1.0);
    let found = optimal_constant_search_with_starts(&g, o, 10.0, &c, 200, 5, std::slice::from_ref(&u)).unwrap();
    assert!(found.value >= 770.0 / (21.0 * 2f64.sqrt()) * (1.0 - 1e-12));
    let again = poincare_ratio(&g, &found.witness, o, 10.0, &c).unwrap();
    assert!((again.ratio.finite().unwrap() - found.value).abs() <= 1e-9 * found.value);
}

fn doubling_radii() -> Vec<f64> {
    (4..=9).map(|k| f64::from(1u32 << k)).collect()
}

#[test]
fn antenna_divergence_slopes() {
    let (g, u, o) = antenna(512);
    let radii = doubling_radii();
    let probe = divergence_probe(&g, &u, o, &radii, &cfg(1.0, 1.0, 1.0), 2.0).unwrap();
    assert!((probe.numerator_slope - 3.0).abs() < 0.1);
    assert!((probe.denominator_slope - 1.0).abs() < 0.05);
    assert_eq!(probe.expected_slope, 1.0);
    assert!((probe.ratio_slope - 1.0).abs() < 0.1);
    assert!(probe.diverges);

    let bounded = divergence_probe(&g, &u, o, &radii, &cfg(1.0, 2.0, 1.0), 2.0).unwrap();
    assert!(bounded.ratio_slope.abs() < 0.1);
    assert!(!bounded.diverges);

    let quadratic = divergence_probe(&g, &u, o, &radii, &cfg(2.0, 2.0, 1.0), 2.0).unwrap();
    assert!((quadratic.ratio_slope - 1.0).abs() < 0.1);
    assert!(quadratic.diverges);
}

#[test]
fn divergence_probe_needs_four_radii() {
    let (g, u, o) = antenna(8);
    assert!(divergence_probe(&g, &u, o, &[1.0, 2.0, 4.0], &cfg(1.0, 1.0, 1.0), 2.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn affine_changes_leave_ratios_unchanged(
        seed in 0u64..1000,
        a in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        b in -10.0f64..10.0,
        sigma in 1.0f64..3.0,
    ) {
        let g = random_connected(seed, 10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let u = ScalarField::from_vec((0..10).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let c = cfg(sigma, 1.0, 2.0);
        let base = poincare_ratio(&g, &u, VertexId(0), 1.0, &c).unwrap();
        let moved = poincare_ratio(&g, &u.affine(a, b), VertexId(0), 1.0, &c).unwrap();
        let k = a.abs().powf(sigma);
        prop_assert!((moved.numerator - k * base.numerator).abs() <= 1e-9 * (1.0 + k * base.numerator));
        prop_assert!((moved.denominator - k * base.denominator).abs() <= 1e-9 * (1.0 + k * base.denominator));
        if let (Ratio::Finite(x), Ratio::Finite(y)) = (base.ratio, moved.ratio) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x));
        }
    }
}
