use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mmpoincare::discretizer::io::parse_point_cloud;
use mmpoincare::discretizer::{build_net, net_graph, rough_isometry_check, Net, NetConfig, NetOrder, PointCloud};
use mmpoincare::growth::{fit_growth, volume_curve};
use mmpoincare::mmgraph::io::parse_edge_list;
use mmpoincare::mmgraph::{MMGraph, ScalarField, VertexId};
use mmpoincare::poincare::{
    constant_ledger, divergence_probe, optimal_constant_quadratic, optimal_constant_search, poincare_ratio_curve,
    theorem_graph_bound, LedgerInputs, Method, PoincareConfig, Ratio,
};
use mmpoincare::spaces::{
    antenna_graph, antenna_height_field, grid_graph, horosphere_cloud, random_geometric_graph, tree_graph,
    tube_surface_cloud, AntennaSpec, HorosphereParams, TubeSurface, TubeSurfaceSpec,
};
use mmpoincare::Seed;
use rand::Rng;

use crate::config::{AnalysisConfig, Center, ExperimentConfig, FieldConfig, RoughTarget, SpaceConfig};
use crate::report::RowSink;

/// A generated space: a graph, plus the sample it discretizes when the
/// space is a point cloud.
struct Space {
    graph: MMGraph<f64>,
    cloud: Option<(PointCloud<f64>, Net<f64>)>,
    tube: Option<TubeSurface<f64>>,
    /// Coordinates per graph vertex, for coordinate fields and centering.
    coords: Option<Vec<Vec<f64>>>,
}

fn lattice_coords(g: &MMGraph<f64>) -> Option<Vec<Vec<f64>>> {
    g.vertices()
        .map(|v| g.coord(v).map(|c| c.iter().map(|&x| x as f64).collect()))
        .collect()
}

fn read(base: &Path, path: &Path) -> Result<String> {
    let full = base.join(path);
    std::fs::read_to_string(&full).with_context(|| format!("reading {}", full.display()))
}

fn build_space(cfg: &ExperimentConfig, base: &Path, seed: Seed) -> Result<Space> {
    let space = cfg.space.as_ref().ok_or_else(|| anyhow!("no space configured"))?;
    let graph_space = |graph: MMGraph<f64>| Space {
        coords: lattice_coords(&graph),
        graph,
        cloud: None,
        tube: None,
    };
    let (cloud, tube) = match space {
        SpaceConfig::Antenna { max_radius } => return Ok(graph_space(antenna_graph(&AntennaSpec::diamond(*max_radius))?)),
        SpaceConfig::Grid { dim, max_radius } => return Ok(graph_space(grid_graph(*dim, *max_radius)?)),
        SpaceConfig::Tree { branching, depth } => return Ok(graph_space(tree_graph(*branching, *depth)?)),
        SpaceConfig::RandomGeometric { count, radius } => {
            let rgg = random_geometric_graph(*count, *radius, seed.child("space").0)?;
            return Ok(Space {
                coords: Some(rgg.positions.iter().map(|p| p.to_vec()).collect()),
                graph: rgg.graph,
                cloud: None,
                tube: None,
            });
        }
        SpaceConfig::EdgeList { path } => {
            let g = parse_edge_list(&read(base, path)?, &path.display().to_string())?;
            return Ok(graph_space(g));
        }
        SpaceConfig::Horosphere {
            n,
            a,
            height,
            extent,
            count,
        } => {
            let p = HorosphereParams {
                n: *n,
                a: *a,
                height: *height,
                extent: *extent,
                count: *count,
                seed: seed.child("space").0,
            };
            (horosphere_cloud(&p)?, None)
        }
        SpaceConfig::TubeSurface {
            tube_radius,
            arm_extent,
            spine_extent,
            density,
        } => {
            let spec = TubeSurfaceSpec {
                tube_radius: *tube_radius,
                arm_extent: *arm_extent,
                spine_extent: *spine_extent,
                density: *density,
                seed: seed.child("space").0,
            };
            let tube = tube_surface_cloud(&spec)?;
            (tube.cloud.clone(), Some(tube))
        }
        SpaceConfig::PointCloud { path, metric } => (parse_point_cloud(&read(base, path)?)?.into_cloud(*metric)?, None),
    };
    let settings = cfg.net.ok_or_else(|| anyhow!("point-cloud spaces need a net configuration"))?;
    let order = settings
        .order
        .unwrap_or(NetOrder::Shuffled(seed.child("net-order").0));
    let net = build_net(
        &cloud,
        &NetConfig {
            epsilon: settings.epsilon,
            order,
        },
    )?;
    let graph = net_graph(&cloud, &net)?;
    let coords = net.points.iter().map(|&p| cloud.point(p).to_vec()).collect();
    Ok(Space {
        graph,
        cloud: Some((cloud, net)),
        tube,
        coords: Some(coords),
    })
}

fn center(space: &Space, c: Center) -> Result<VertexId> {
    let g = &space.graph;
    match c {
        Center::Vertex(v) => {
            g.check_vertex(VertexId(v))?;
            Ok(VertexId(v))
        }
        Center::Origin => {
            if let Some(v) = g.vertex_at([0, 0, 0]) {
                return Ok(v);
            }
            let Some(coords) = &space.coords else {
                return Ok(VertexId(0));
            };
            let norm = |v: usize| coords[v].iter().map(|x| x * x).sum::<f64>();
            Ok(VertexId(
                (0..coords.len())
                    .min_by(|&a, &b| norm(a).total_cmp(&norm(b)))
                    .unwrap_or(0),
            ))
        }
    }
}

fn field(space: &Space, f: FieldConfig, seed: Seed) -> Result<ScalarField<f64>> {
    let g = &space.graph;
    match f {
        FieldConfig::AntennaHeight => {
            if let Some(tube) = &space.tube {
                let h = tube.height_field();
                let (_, net) = space.cloud.as_ref().expect("tube spaces carry a net");
                return Ok(ScalarField::from_vec(net.points.iter().map(|&p| h.values[p]).collect()));
            }
            if g.vertices().any(|v| g.coord(v).is_none()) {
                bail!("antenna-height needs a space with lattice coordinates");
            }
            Ok(antenna_height_field(g))
        }
        FieldConfig::Coordinate { axis } => {
            let coords = space
                .coords
                .as_ref()
                .ok_or_else(|| anyhow!("this space has no coordinates"))?;
            if coords.iter().any(|c| axis >= c.len()) {
                bail!("coordinate axis {axis} out of range");
            }
            Ok(ScalarField::from_vec(coords.iter().map(|c| c[axis]).collect()))
        }
        FieldConfig::Random => {
            let mut rng = seed.child("field").rng();
            Ok(ScalarField::from_vec(
                (0..g.vertex_count()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            ))
        }
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::EigenExact => "eigen-exact",
        Method::SearchLowerBound => "search-lower-bound",
        Method::PowerReference => "power-reference",
    }
}

fn ratio_value(r: Ratio<f64>) -> crate::report::Value {
    match r {
        Ratio::Finite(x) => x.into(),
        Ratio::Infinite => "inf".into(),
    }
}

/// Runs one experiment, appending rows to `sink`. Rows written before an
/// error are kept by the caller.
pub fn execute(cfg: &ExperimentConfig, base: &Path, sink: &mut RowSink) -> Result<()> {
    let seed = Seed::new(cfg.seed);
    if let AnalysisConfig::Ledger {
        n,
        kappa,
        epsilon,
        sigma,
        beta,
        r0,
        r1,
        v_prime,
        outer_factor,
        local_poincare,
        smoothing,
    } = &cfg.analysis
    {
        let l = constant_ledger(&LedgerInputs {
            n: *n,
            kappa: *kappa,
            epsilon: *epsilon,
            sigma: *sigma,
            beta: *beta,
            r0: *r0,
            r1: *r1,
            v_prime: *v_prime,
            outer_factor: *outer_factor,
            local_poincare: *local_poincare,
            smoothing: *smoothing,
        })?;
        let p = format!("n={n};kappa={kappa};eps={epsilon};sigma={sigma};beta={beta}");
        sink.push(p.as_str(), "local_poincare", l.local_poincare_name.as_str());
        for (name, v) in [
            ("m_eps", l.m_eps),
            ("t", l.t),
            ("tprime", l.tprime),
            ("c_local", l.c_local),
            ("c1", l.c1),
            ("c2", l.c2),
            ("c3", l.c3),
            ("c_graph", l.c_graph),
            ("c4", l.c4),
            ("c5", l.c5),
            ("r1_big", l.r1_big),
            ("k1", l.k1),
            ("k2", l.k2),
            ("k", l.k),
            ("c_dprime", l.c_dprime),
        ] {
            sink.push(p.as_str(), name, v);
        }
        for c in l.check() {
            sink.check(p.as_str(), &format!("recheck_{}", c.field), if c.holds { "ok" } else { "mismatch" }, c.holds);
        }
        return Ok(());
    }

    let space = build_space(cfg, base, seed)?;
    let g = &space.graph;
    sink.push("", "vertices", g.vertex_count());
    sink.push("", "edges", g.edge_count());

    match &cfg.analysis {
        AnalysisConfig::Growth {
            radii,
            fit_range,
            center: c,
            expect_alpha,
        } => {
            let p = center(&space, *c)?;
            let curve = volume_curve(g, p, radii)?;
            for (r, v) in &curve.samples {
                sink.push(format!("R={r}"), "volume", *v);
            }
            if let Some(e) = curve.exact_up_to {
                sink.push("", "exact_up_to", e);
            }
            let fit = fit_growth(&curve, *fit_range)?;
            let fp = format!("fit={}..{}", fit_range.0, fit_range.1);
            sink.push(fp.as_str(), "alpha_hat", fit.alpha_hat);
            sink.push(fp.as_str(), "v_prime", fit.v_prime);
            sink.push(fp.as_str(), "r0_prime", fit.r0_prime);
            sink.push(fp.as_str(), "residual", fit.residual);
            sink.push(fp.as_str(), "residual_exponential", fit.residual_exponential);
            sink.push(fp.as_str(), "growth_class", fit.growth_class.name());
            if let Some((lo, hi)) = expect_alpha {
                let ok = (*lo..=*hi).contains(&fit.alpha_hat);
                sink.check(format!("{fp};expect={lo}..{hi}"), "alpha_in_range", fit.alpha_hat, ok);
            }
        }
        AnalysisConfig::PoincareRatio {
            sigma,
            beta,
            outer_factor,
            r0,
            radii,
            field: f,
            center: c,
        } => {
            let pc = PoincareConfig::new(*sigma, *beta, *outer_factor, *r0)?;
            let u = field(&space, *f, seed)?;
            let p = center(&space, *c)?;
            for rec in poincare_ratio_curve(g, &u, p, radii, &pc)? {
                let params = format!("R={};sigma={sigma};beta={beta};C={outer_factor}", rec.radius);
                sink.push(params.as_str(), "numerator", rec.numerator);
                sink.push(params.as_str(), "denominator", rec.denominator);
                sink.push(params.as_str(), "ratio", ratio_value(rec.ratio));
            }
        }
        AnalysisConfig::OptimalConstant {
            radii,
            outer_factor,
            sigma,
            search_iters,
            center: c,
        } => {
            let p = center(&space, *c)?;
            for (i, &r) in radii.iter().enumerate() {
                let res = if *sigma == 2.0 {
                    optimal_constant_quadratic(g, p, r, *outer_factor)?
                } else {
                    let pc = PoincareConfig::new(*sigma, 0.0, *outer_factor, r.clamp(f64::MIN_POSITIVE, 1.0))?;
                    optimal_constant_search(g, p, r, &pc, *search_iters, seed.child("search").nth(i as u64).0)?
                };
                let params = format!("R={r};sigma={sigma};C={outer_factor}");
                sink.push(params.as_str(), "optimal_constant", res.value);
                sink.push(params.as_str(), "method", method_name(res.method));
            }
        }
        AnalysisConfig::VerifyTheorem {
            sigmas,
            radii,
            fit_range,
            fields,
            center: c,
        } => {
            let p = center(&space, *c)?;
            let fit = fit_growth(&volume_curve(g, p, radii)?, *fit_range)?;
            sink.push("", "alpha_hat", fit.alpha_hat);
            sink.push("", "v_prime", fit.v_prime);
            sink.push("", "r0_prime", fit.r0_prime);
            let usable: Vec<f64> = radii
                .iter()
                .copied()
                .filter(|&r| r >= fit.r0_prime && r <= fit.r_max)
                .collect();
            if usable.is_empty() {
                bail!("no radius lies in [R0', Rmax] = [{}, {}]", fit.r0_prime, fit.r_max);
            }
            let mut violations = 0usize;
            for k in 0..*fields {
                let u = field(&space, FieldConfig::Random, seed.child("theorem").nth(k as u64))?;
                for &sigma in sigmas {
                    for &r in &usable {
                        let m = theorem_graph_bound(g, &u, p, r, sigma, &fit)?;
                        let ok = m.margin >= 0.0 && m.growth_hypothesis_holds;
                        violations += usize::from(!ok);
                        sink.check(format!("field={k};R={r};sigma={sigma}"), "margin", m.margin, ok);
                    }
                }
            }
            sink.check("", "violations", violations, violations == 0);
        }
        AnalysisConfig::Divergence {
            sigma,
            beta,
            outer_factor,
            alpha,
            radii,
            field: f,
            slope_tolerance,
            center: c,
        } => {
            let pc = PoincareConfig::new(*sigma, *beta, *outer_factor, 1.0f64.min(radii[0]).max(f64::MIN_POSITIVE))?;
            let u = field(&space, *f, seed)?;
            let p = center(&space, *c)?;
            let probe = divergence_probe(g, &u, p, radii, &pc, *alpha)?;
            for rec in &probe.records {
                sink.push(format!("R={}", rec.radius), "ratio", ratio_value(rec.ratio));
            }
            let params = format!("sigma={sigma};beta={beta};alpha={alpha};C={outer_factor}");
            sink.push(params.as_str(), "numerator_slope", probe.numerator_slope);
            sink.push(params.as_str(), "denominator_slope", probe.denominator_slope);
            sink.push(params.as_str(), "expected_slope", probe.expected_slope);
            sink.push(params.as_str(), "diverges", if probe.diverges { "true" } else { "false" });
            let ok = (probe.ratio_slope - probe.expected_slope).abs() <= *slope_tolerance;
            sink.check(
                format!("{params};tolerance={slope_tolerance}"),
                "ratio_slope",
                probe.ratio_slope,
                ok,
            );
        }
        AnalysisConfig::RoughIsometry { pair_budget, target } => {
            let (cloud, net) = space
                .cloud
                .as_ref()
                .ok_or_else(|| anyhow!("rough-isometry needs a point-cloud space"))?;
            let pairs_seed = seed.child("pairs").0;
            let cert = match target {
                RoughTarget::Net => rough_isometry_check(cloud, g, &net.points, net.epsilon, *pair_budget, pairs_seed)?,
                RoughTarget::Antenna => {
                    let tube = space.tube.as_ref().expect("validated: tube-surface space");
                    let ag = antenna_graph(&AntennaSpec::rect(tube.spec.arm_extent, tube.spec.spine_extent))?;
                    let phi = tube.vertex_map(&ag)?;
                    rough_isometry_check(cloud, &ag, &phi, 1.0, *pair_budget, pairs_seed)?
                }
            };
            let params = format!("target={target:?};scale={}", cert.scale).to_lowercase();
            sink.push(params.as_str(), "c1", cert.c1);
            sink.push(params.as_str(), "c2", cert.c2);
            sink.push(params.as_str(), "c3", cert.c3);
            sink.push(params.as_str(), "sampled_pairs", cert.sampled_pairs);
            sink.push(params.as_str(), "exhaustive", if cert.exhaustive { "true" } else { "false" });
            sink.check(params.as_str(), "rough_isometry", if cert.pass { "pass" } else { "fail" }, cert.pass);
        }
        AnalysisConfig::Ledger { .. } => unreachable!("handled above"),
    }
    Ok(())
}
