use mmpoincare::discretizer::io::{parse_point_cloud, write_point_cloud};
use mmpoincare::discretizer::{build_net, net_graph, MetricChoice, NetConfig};
use mmpoincare::growth::{doubling_constants, fit_growth, volume_curve};
use mmpoincare::mmgraph::io::{parse_edge_list, write_edge_list};
use mmpoincare::mmgraph::{ScalarField, VertexId};
use mmpoincare::poincare::{
    constant_ledger, poincare_ratio, theorem_graph_bound, LedgerInputs, LocalPoincare, PoincareConfig, SmoothingSource,
};
use mmpoincare::spaces::{grid_graph, random_geometric_graph};
use mmpoincare::{Error, Graph};
use rand::{Rng, SeedableRng};

#[test]
fn cloud_file_to_net_graph_and_back() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
    let mut text = String::from("# square sample\n");
    for _ in 0..2000 {
        text.push_str(&format!("{} {}\n", rng.gen::<f64>(), rng.gen::<f64>()));
    }
    let cloud = parse_point_cloud::<f64>(&text)
        .unwrap()
        .into_cloud(MetricChoice::Euclidean)
        .unwrap();
    let reparsed = parse_point_cloud::<f64>(&write_point_cloud(&cloud))
        .unwrap()
        .into_cloud(MetricChoice::Euclidean)
        .unwrap();
    assert_eq!(cloud.coords(), reparsed.coords());

    let net = build_net(&cloud, &NetConfig::new(0.08, 7)).unwrap();
    let g = net_graph(&cloud, &net).unwrap();
    let back: Graph = parse_edge_list(&write_edge_list(&g), "reloaded").unwrap();
    assert_eq!(back.vertex_count(), g.vertex_count());
    assert!(back.edges().eq(g.edges()));
    assert_eq!(back.measures(), g.measures());
    let (d1, d2) = (
        g.distances_from(VertexId(0), None).unwrap(),
        back.distances_from(VertexId(0), None).unwrap(),
    );
    assert_eq!(d1, d2);
}

#[test]
fn measured_growth_feeds_the_theorem_and_the_ledger() {
    let g: Graph = grid_graph(2, 3 * 16 + 1).unwrap();
    let o = g.vertex_at([0, 0, 0]).unwrap();
    let radii: Vec<f64> = (1..=16).map(f64::from).collect();
    let fit = fit_growth(&volume_curve(&g, o, &radii).unwrap(), (2.0, 16.0)).unwrap();
    let u = ScalarField::from_fn(&g, |v| {
        let c = g.coord(v).unwrap();
        (0.3 * c[0] as f64).sin() + 0.1 * c[1] as f64
    });
    for r in [2.0, 5.0, 16.0] {
        let m = theorem_graph_bound(&g, &u, o, r, 2.0, &fit).unwrap();
        assert!(m.lhs <= m.path_bound && m.path_bound <= m.rhs * (1.0 + 1e-12));
    }
    let ledger = constant_ledger(&LedgerInputs {
        n: 2,
        kappa: 0.0,
        epsilon: 0.5,
        sigma: 2.0,
        beta: fit.alpha_hat + 1.0,
        r0: 1.0,
        r1: fit.r0_prime,
        v_prime: fit.v_prime,
        outer_factor: 3.0,
        local_poincare: Some(LocalPoincare::buser()),
        smoothing: SmoothingSource::anchored(3.0, 0.5),
    })
    .unwrap();
    assert!(ledger.check().iter().all(|c| c.holds));
    assert_eq!(ledger.c_dprime, 4.0 * 3.0 * 4.0 + 5.0);
}

#[test]
fn random_geometric_graphs_have_bounded_doubling() {
    let rgg = random_geometric_graph::<f64>(3000, 0.04, 17).unwrap();
    let g = &rgg.graph;
    let centers: Vec<VertexId> = g.vertices().step_by(97).collect();
    let report = doubling_constants(g, &centers, &[1.0, 2.0, 4.0]).unwrap();
    for &(_, c) in &report.entries {
        assert!((1.0..=64.0).contains(&c));
    }
}

#[test]
fn clipped_balls_are_refused() {
    let g: Graph = grid_graph(2, 10).unwrap();
    let o = g.vertex_at([0, 0, 0]).unwrap();
    let u = ScalarField::from_fn(&g, |v| v.0 as f64);
    let cfg = PoincareConfig::new(1.0, 0.0, 3.0, 1.0).unwrap();
    assert!(poincare_ratio(&g, &u, o, 3.0, &cfg).is_ok());
    assert!(matches!(poincare_ratio(&g, &u, o, 4.0, &cfg), Err(Error::Parameter(_))));
}
