use mmpoincare::discretizer::{
    build_net, net_graph, rough_isometry_check, smoothing_gradient_bound, NetConfig, TestFunction,
};
use mmpoincare::growth::{fit_growth, volume_curve, GrowthClass, VolumeCurve};
use mmpoincare::mmgraph::{ScalarField, VertexId};
use mmpoincare::poincare::{divergence_probe, PoincareConfig};
use mmpoincare::spaces::*;
use mmpoincare::Graph;
use proptest::prelude::*;

fn ball_count(g: &Graph, v: VertexId, r: f64) -> usize {
    g.ball(v, r).unwrap().len()
}

#[test]
fn antenna_volumes_up_to_a_third_of_the_truncation() {
    let g: Graph = antenna_graph(&AntennaSpec::diamond(90)).unwrap();
    let o = g.vertex_at([0, 0, 0]).unwrap();
    let layers = g.layer_masses(o, 30).unwrap();
    let mut v = 0.0;
    for (r, m) in layers.iter().enumerate() {
        v += m;
        let r = r as f64;
        assert_eq!(v, 2.0 * r * r + 2.0 * r + 1.0);
    }
}

#[test]
fn antenna_construction_rule() {
    let g: Graph = antenna_graph(&AntennaSpec::diamond(12)).unwrap();
    let at = |m, n| g.vertex_at([m, n, 0]).unwrap();
    assert!(!g.neighbors(at(2, 1)).any(|w| w == at(2, 2)));
    assert_eq!(g.degree(at(0, 0)), 4);
    assert_eq!(g.degree(at(5, 3)), 2);
    let vertical = g
        .edges()
        .filter(|&(a, b)| g.coord(a).unwrap()[0] == g.coord(b).unwrap()[0])
        .all(|(a, _)| g.coord(a).unwrap()[0] == 0);
    assert!(vertical);
    assert!(g.measures().iter().all(|&m| m == 1.0));
    assert!(antenna_graph::<f64>(&AntennaSpec::diamond(0)).is_err());
}

#[test]
fn antenna_oracle_values() {
    let o = antenna_oracles(10, 1.0, 0.0, 1.0).unwrap();
    assert_eq!(o.numerator, 770.0);
    assert!((o.gradient_mass - 21.0 * 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(o.volume, 221);
    assert!(antenna_oracles(0, 1.0, 0.0, 1.0).is_err());

    let g: Graph = antenna_graph(&AntennaSpec::guarded_for_radius(20)).unwrap();
    let u = antenna_height_field(&g);
    let origin = g.vertex_at([0, 0, 0]).unwrap();
    for r in 1..=20 {
        let ball = g.ball(origin, r as f64).unwrap();
        assert_eq!(g.field_average(&u, &ball).unwrap(), 0.0);
    }
}

#[test]
fn antenna_integral_comparison_tracks_the_numerator() {
    for sigma in [1.0, 2.0, 3.0] {
        let o = antenna_oracles(2000, sigma, 0.0, 1.0).unwrap();
        let ratio = o.numerator / o.integral_comparison;
        assert!((ratio - 2.0).abs() < 0.01, "sigma {sigma}: {ratio}");
    }
}

#[test]
fn grid_and_tree_volumes() {
    let z2: Graph = grid_graph(2, 10).unwrap();
    assert_eq!(ball_count(&z2, z2.vertex_at([0, 0, 0]).unwrap(), 10.0), 221);
    let z1: Graph = grid_graph(1, 40).unwrap();
    for r in 0..=40 {
        assert_eq!(ball_count(&z1, z1.vertex_at([0, 0, 0]).unwrap(), r as f64), 2 * r + 1);
    }
    let z3: Graph = grid_graph(3, 12).unwrap();
    for r in 0..=12i64 {
        let octahedral = (2 * r + 1) * (2 * r * r + 2 * r + 3) / 3;
        assert_eq!(ball_count(&z3, z3.vertex_at([0, 0, 0]).unwrap(), r as f64) as i64, octahedral);
    }
    let tree: Graph = tree_graph(2, 10).unwrap();
    for r in 0..=10u32 {
        assert_eq!(ball_count(&tree, VertexId(0), r as f64), (1usize << (r + 1)) - 1);
    }
    assert!(grid_graph::<f64>(4, 3).is_err());
    assert!(tree_graph::<f64>(1, 3).is_err());
}

#[test]
fn random_geometric_graphs_are_reproducible() {
    let a = random_geometric_graph::<f64>(800, 0.08, 4).unwrap();
    let b = random_geometric_graph::<f64>(800, 0.08, 4).unwrap();
    assert_eq!(a.positions, b.positions);
    assert!(a.graph.edges().eq(b.graph.edges()));
    for (x, y) in a.graph.edges() {
        let (p, q) = (a.positions[x.0], a.positions[y.0]);
        assert!((p[0] - q[0]).hypot(p[1] - q[1]) < 0.08);
    }
}

#[test]
fn horosphere_examples() {
    let p = HorosphereParams {
        n: 3,
        a: 1.0,
        height: 1.0,
        extent: 5.0,
        count: 100,
        seed: 1,
    };
    assert_eq!(p.scale(), 1.0);
    let moved = p.flowed(1.0);
    assert!((moved.scale() - 1f64.exp()).abs() < 1e-12);
    let cloud = horosphere_cloud::<f64>(&p).unwrap();
    let again = horosphere_cloud::<f64>(&p).unwrap();
    assert_eq!(cloud.coords(), again.coords());
}

/// Net graph of the tube around a large antenna, with the net points on
/// the spine near the origin.
fn tube_net() -> (TubeSurface<f64>, mmpoincare::discretizer::Net<f64>, Graph, Vec<VertexId>) {
    let spec = TubeSurfaceSpec {
        tube_radius: 0.15,
        arm_extent: 50,
        spine_extent: 50,
        density: 60.0,
        seed: 2,
    };
    let tube = tube_surface_cloud::<f64>(&spec).unwrap();
    let net = build_net(&tube.cloud, &NetConfig::index_order(0.5)).unwrap();
    let g = net_graph(&tube.cloud, &net).unwrap();
    let centers = (0..net.len())
        .filter(|&v| {
            let p = net.points[v];
            tube.axis[p] == TubeAxis::Spine && tube.along[p].abs() < 3.0
        })
        .map(VertexId)
        .collect();
    (tube, net, g, centers)
}

#[test]
fn tube_surface_growth_and_divergence() {
    let (tube, net, g, centers) = tube_net();
    assert!(centers.len() >= 8);

    let radii: Vec<f64> = (1..=56).map(|r| r as f64).collect();
    let mut mean = vec![0.0; radii.len()];
    for &c in &centers {
        for (m, (_, v)) in mean.iter_mut().zip(volume_curve(&g, c, &radii).unwrap().samples) {
            *m += v / centers.len() as f64;
        }
    }
    let curve = VolumeCurve::from_samples(radii.iter().copied().zip(mean).collect()).unwrap();
    let fit = fit_growth(&curve, (16.0, 56.0)).unwrap();
    assert_eq!(fit.growth_class, GrowthClass::Polynomial);
    assert!((fit.alpha_hat - 2.0).abs() <= 0.15, "alpha {}", fit.alpha_hat);

    let h = tube.height_field();
    let u = ScalarField::from_vec(net.points.iter().map(|&p| h.values[p]).collect());
    let (sigma, beta) = (1.0, 1.0);
    let cfg = PoincareConfig::new(sigma, beta, 1.0, 1.0).unwrap();
    let probe = divergence_probe(&g, &u, centers[centers.len() / 2], &[8.0, 12.0, 16.0, 24.0, 32.0, 48.0], &cfg, 2.0)
        .unwrap();
    let expected = 2.0 + sigma - 1.0 - beta;
    assert!((probe.ratio_slope - expected).abs() <= 0.25, "slope {}", probe.ratio_slope);
}

#[test]
fn tube_surface_matches_the_antenna_roughly() {
    let spec = TubeSurfaceSpec {
        tube_radius: 0.15,
        arm_extent: 3,
        spine_extent: 3,
        density: 150.0,
        seed: 5,
    };
    let tube = tube_surface_cloud::<f64>(&spec).unwrap();
    let g: Graph = antenna_graph(&AntennaSpec::rect(3, 3)).unwrap();
    let phi = tube.vertex_map(&g).unwrap();
    let cert = rough_isometry_check(&tube.cloud, &g, &phi, 1.0, 10_000, 1).unwrap();
    assert!(cert.pass);
    assert!(cert.c2 <= 4.0);

    let report = tube.metric_error(2000, 3);
    assert!(report.pairs > 100);
    assert!(report.mean_relative < 0.1, "{report:?}");
}

#[test]
fn tube_smoothing_holds_at_the_anchored_dilation() {
    let spec = TubeSurfaceSpec {
        tube_radius: 0.15,
        arm_extent: 6,
        spine_extent: 6,
        density: 100.0,
        seed: 9,
    };
    let tube = tube_surface_cloud::<f64>(&spec).unwrap();
    let eps = 0.5;
    let net = build_net(&tube.cloud, &NetConfig::index_order(eps)).unwrap();
    let g = net_graph(&tube.cloud, &net).unwrap();
    let height = tube.height_field();
    let constant = TestFunction {
        name: "constant".into(),
        values: vec![1.0; tube.cloud.len()],
        gradient_norms: vec![0.0; tube.cloud.len()],
    };
    let centers: Vec<VertexId> = g.vertices().step_by(23).collect();
    for sigma in [1.0, 2.0] {
        let k = smoothing_gradient_bound(
            &tube.cloud,
            &g,
            &net,
            &[height.clone(), constant.clone()],
            sigma,
            &centers,
            &[1.0, 2.0, 4.0],
        )
        .unwrap();
        assert_eq!(k.tprime_emp, 1.0 + 6.0 * eps);
        assert!(k.t_emp.is_finite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn horosphere_flow_scaling(seed in 0u64..1000, t in -2.0f64..2.0, a in 0.3f64..3.0, n in 2usize..=5) {
        let p = HorosphereParams { n, a, height: 1.3, extent: 3.0, count: 120, seed };
        let base = horosphere_cloud::<f64>(&p).unwrap();
        let moved = horosphere_cloud::<f64>(&p.flowed(t)).unwrap();
        let factor = (a * t).exp();
        for i in 0..20 {
            let j = (i * 7 + 3) % 120;
            let d = base.distance(i, j);
            if d > 0.0 {
                prop_assert!((moved.distance(i, j) / (factor * d) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn antenna_ball_volume_closed_form(r in 0i64..60) {
        let g: Graph = antenna_graph(&AntennaSpec::guarded_for_radius(r.max(1))).unwrap();
        let o = g.vertex_at([0, 0, 0]).unwrap();
        prop_assert_eq!(ball_count(&g, o, r as f64) as i64, 2 * r * r + 2 * r + 1);
    }
}
