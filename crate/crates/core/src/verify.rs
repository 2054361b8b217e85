//! Fixed-seed acceptance suites. Each criterion builds its own inputs, runs
//! the library against independent references and reports a single
//! pass/fail outcome together with its wall-clock time.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::discretizer::{
    audit_net, build_net, covering_multiplicity, net_graph, rough_isometry_check, Metric, NetConfig, PointCloud,
};
use crate::error::{param, Error, Result};
use crate::growth::{fit_growth, volume_curve, GrowthClass, GrowthFit, VolumeCurve};
use crate::mmgraph::{MMGraph, ScalarField, VertexId};
use crate::poincare::{
    constant_ledger, divergence_probe, log_log_slope, multiplicity_bound, optimal_constant_power_reference,
    optimal_constant_quadratic, optimal_constant_search, poincare_ratio_curve, theorem_graph_bound, LedgerInputs,
    LocalPoincare, PoincareConfig, SmoothingSource,
};
use crate::seed::Seed;
use crate::spaces::{
    antenna_graph, antenna_height_field, antenna_oracles, grid_graph, horosphere_cloud, random_geometric_graph,
    tree_graph, tube_surface_cloud, AntennaSpec, HorosphereParams, TubeSurfaceSpec,
};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Antenna,
    Theorem,
    Net,
    Spectral,
    Horosphere,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["antenna", "theorem", "net", "spectral", "horosphere", "all"];

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "antenna" => Suite::Antenna,
            "theorem" => Suite::Theorem,
            "net" => Suite::Net,
            "spectral" => Suite::Spectral,
            "horosphere" => Suite::Horosphere,
            "all" => Suite::All,
            other => {
                return Err(Error::Configuration(format!(
                    "unknown suite '{other}'; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Antenna => "antenna",
            Suite::Theorem => "theorem",
            Suite::Net => "net",
            Suite::Spectral => "spectral",
            Suite::Horosphere => "horosphere",
            Suite::All => "all",
        }
    }

    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Antenna => &[1, 2, 3],
            Suite::Theorem => &[4, 7, 9],
            Suite::Net => &[5, 10],
            Suite::Spectral => &[6],
            Suite::Horosphere => &[8],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
        }
    }
}

/// Title and time budget (seconds) of each criterion.
pub fn criterion_info(id: u8) -> Option<(&'static str, f64)> {
    Some(match id {
        1 => ("antenna exact volumes", 5.0),
        2 => ("antenna slopes", 30.0),
        3 => ("sharpness divergence", 30.0),
        4 => ("polynomial-growth bound", 180.0),
        5 => ("net invariants", 120.0),
        6 => ("spectral reference", 60.0),
        7 => ("growth classification", 60.0),
        8 => ("horosphere model", 120.0),
        9 => ("ledger determinism", 1.0),
        10 => ("rough-isometry audits", 120.0),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    /// The numerical checks held and the run finished within budget.
    pub pass: bool,
    pub checks_passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<26} {}  {:.2}s/{:.0}s  {}",
            self.id,
            self.title,
            if self.pass { "PASS" } else { "FAIL" },
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

/// Runs one criterion. Library errors count as failures.
pub fn run_criterion(id: u8, seed: u64) -> Result<CriterionOutcome> {
    let (title, budget) = criterion_info(id).ok_or_else(|| Error::Parameter(format!("no criterion {id}")))?;
    let seed = Seed::new(seed).child("verify").nth(id as u64);
    let start = Instant::now();
    let result = match id {
        1 => antenna_volumes(),
        2 => antenna_slopes(),
        3 => sharpness(),
        4 => theorem_bound(seed),
        5 => net_invariants(seed),
        6 => spectral(seed),
        7 => growth_classes(),
        8 => horosphere(seed),
        9 => ledger(),
        _ => rough_audits(seed),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (checks_passed, mut detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if seconds > budget {
        detail.push_str("; over time budget");
    }
    Ok(CriterionOutcome {
        id,
        title: title.to_string(),
        pass: checks_passed && seconds <= budget,
        checks_passed,
        detail,
        seconds,
        budget_seconds: budget,
    })
}

/// Runs the criteria of a suite in order, calling `report` after each.
pub fn run_suite(suite: Suite, seed: u64, mut report: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
    suite
        .criteria()
        .iter()
        .map(|&id| {
            let out = run_criterion(id, seed).expect("suite criteria exist");
            report(&out);
            out
        })
        .collect()
}

type Check = Result<(bool, String)>;

fn origin(g: &MMGraph<f64>) -> Result<VertexId> {
    g.vertex_at([0, 0, 0])
        .ok_or_else(|| Error::Construction(format!("'{}' has no origin", g.label())))
}

fn doubling(from: f64, to: f64) -> Vec<f64> {
    std::iter::successors(Some(from), |r| Some(r * 2.0))
        .take_while(|&r| r <= to)
        .collect()
}

fn antenna_volumes() -> Check {
    const RMAX: usize = 1000;
    let g = antenna_graph::<f64>(&AntennaSpec::rect(RMAX as i64, RMAX as i64))?;
    let layers = g.layer_masses(origin(&g)?, RMAX)?;
    let mut acc = 0u64;
    let mut mismatches = 0;
    for (r, m) in layers.iter().enumerate() {
        acc += *m as u64;
        let r = r as u64;
        if acc != 2 * r * r + 2 * r + 1 {
            mismatches += 1;
        }
    }
    let ok = mismatches == 0 && layers.len() == RMAX + 1;
    Ok((ok, format!("{} radii, {mismatches} mismatches, V(1000) = {acc}", layers.len())))
}

fn antenna_slopes() -> Check {
    let radii = doubling(16.0, 512.0);
    let g = antenna_graph::<f64>(&AntennaSpec::diamond(2 * 512 + 1))?;
    let u = antenna_height_field(&g);
    let o = origin(&g)?;
    let mut ok = true;
    let mut detail = String::new();
    for outer in [1.0, 2.0] {
        for sigma in [1.0, 2.0, 3.0] {
            let cfg = PoincareConfig::new(sigma, 0.0, outer, 1.0)?;
            let recs = poincare_ratio_curve(&g, &u, o, &radii, &cfg)?;
            for r in &recs {
                let oracle = antenna_oracles(r.radius as i64, sigma, 0.0, outer)?;
                ok &= (r.numerator - oracle.numerator).abs() <= 1e-9 * oracle.numerator;
                ok &= (r.denominator - oracle.gradient_mass).abs() <= 1e-9 * oracle.gradient_mass;
            }
            let num = log_log_slope(&recs.iter().map(|r| (r.radius, r.numerator)).collect::<Vec<_>>())?;
            let den = log_log_slope(&recs.iter().map(|r| (r.radius, r.denominator)).collect::<Vec<_>>())?;
            ok &= (num - (sigma + 2.0)).abs() <= 0.1 && (den - 1.0).abs() <= 0.05;
            let _ = write!(detail, "C={outer} s={sigma}: {num:.3}/{den:.3}; ");
        }
    }
    Ok((ok, detail.trim_end_matches("; ").to_string()))
}

fn sharpness() -> Check {
    let alpha = 2.0;
    let radii = doubling(64.0, 512.0);
    let g = antenna_graph::<f64>(&AntennaSpec::diamond(2 * 512 + 1))?;
    let u = antenna_height_field(&g);
    let o = origin(&g)?;
    let mut ok = true;
    let mut detail = String::new();
    for outer in [1.0, 2.0] {
        for sigma in [1.0, 2.0, 3.0] {
            let grow = PoincareConfig::new(sigma, alpha + sigma - 2.0, outer, 1.0)?;
            let flat = PoincareConfig::new(sigma, alpha + sigma - 1.0, outer, 1.0)?;
            let pg = divergence_probe(&g, &u, o, &radii, &grow, alpha)?;
            let pf = divergence_probe(&g, &u, o, &radii, &flat, alpha)?;
            let rg: Vec<f64> = pg.records.iter().filter_map(|r| r.ratio.finite()).collect();
            let rf: Vec<f64> = pf.records.iter().filter_map(|r| r.ratio.finite()).collect();
            let min_factor = rg.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
            let band = rf.iter().cloned().fold(0.0, f64::max) / rf.iter().cloned().fold(f64::INFINITY, f64::min);
            ok &= rg.len() == radii.len() && rf.len() == radii.len();
            ok &= min_factor >= 1.8 && band <= 1.5 && pg.diverges && !pf.diverges;
            let _ = write!(detail, "C={outer} s={sigma}: x{min_factor:.3}, band {band:.3}; ");
        }
    }
    Ok((ok, detail.trim_end_matches("; ").to_string()))
}

/// Volume envelope: at each radius the largest ball mass over `centers`.
fn envelope(g: &MMGraph<f64>, centers: &[VertexId], radii: &[f64]) -> Result<VolumeCurve<f64>> {
    let mut best = vec![0.0f64; radii.len()];
    for &c in centers {
        let curve = volume_curve(g, c, radii)?;
        for (b, (_, v)) in best.iter_mut().zip(&curve.samples) {
            *b = b.max(*v);
        }
    }
    VolumeCurve::from_samples(radii.iter().copied().zip(best).collect())
}

struct TheoremCase {
    graph: MMGraph<f64>,
    centers: Vec<VertexId>,
    rmax: usize,
    /// Smooth coordinate per vertex for low-frequency fields.
    coordinates: Vec<[f64; 3]>,
}

fn lattice_case(graph: MMGraph<f64>, rmax: usize, near: i64, seed: Seed) -> Result<TheoremCase> {
    let mut rng = seed.child("centers").rng();
    let near_origin: Vec<VertexId> = graph
        .vertices()
        .filter(|&v| graph.coord(v).is_some_and(|c| c.iter().map(|x| x.abs()).sum::<i64>() <= near))
        .collect();
    let mut centers = vec![origin(&graph)?];
    for _ in 0..5 {
        centers.push(near_origin[rng.gen_range(0..near_origin.len())]);
    }
    let coordinates = graph
        .vertices()
        .map(|v| {
            let c = graph.coord(v).unwrap_or([0, 0, 0]);
            [c[0] as f64, c[1] as f64, c[2] as f64]
        })
        .collect();
    Ok(TheoremCase {
        graph,
        centers,
        rmax,
        coordinates,
    })
}

fn theorem_cases(seed: Seed) -> Result<Vec<(String, TheoremCase)>> {
    let mut cases = Vec::new();
    let near = 6;
    cases.push((
        "antenna".to_string(),
        lattice_case(antenna_graph(&AntennaSpec::diamond(3 * 24 + near + 1))?, 24, near, seed.child("antenna"))?,
    ));
    cases.push((
        "Z2".to_string(),
        lattice_case(grid_graph(2, 3 * 24 + near + 1)?, 24, near, seed.child("z2"))?,
    ));
    cases.push((
        "Z3".to_string(),
        lattice_case(grid_graph(3, 3 * 10 + near + 1)?, 10, near, seed.child("z3"))?,
    ));
    for k in 0..20u64 {
        let s = seed.child("rgg").nth(k);
        let rgg = random_geometric_graph::<f64>(1500, 0.06, s.0)?;
        let mut rng = s.child("centers").rng();
        let n = rgg.graph.vertex_count();
        let centers = sample(&mut rng, n, 6).into_iter().map(VertexId).collect();
        let coordinates = rgg.positions.iter().map(|p| [p[0], p[1], 0.0]).collect();
        cases.push((
            format!("rgg{k}"),
            TheoremCase {
                graph: rgg.graph,
                centers,
                rmax: 8,
                coordinates,
            },
        ));
    }
    Ok(cases)
}

/// Random field: i.i.d. uniform values, or a random low-frequency wave in
/// the vertex coordinates plus small noise.
fn random_field(case: &TheoremCase, rng: &mut impl Rng, smooth: bool) -> ScalarField<f64> {
    let n = case.graph.vertex_count();
    if !smooth {
        return ScalarField::from_vec((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    let k: [f64; 3] = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
    let scale = if case.rmax <= 8 { 20.0 } else { 1.0 };
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    ScalarField::from_vec(
        case.coordinates
            .iter()
            .map(|c| (scale * (k[0] * c[0] + k[1] * c[1] + k[2] * c[2]) + phase).sin() + 0.01 * rng.gen_range(-1.0..1.0))
            .collect(),
    )
}

fn theorem_bound(seed: Seed) -> Check {
    const FIELDS: usize = 200;
    let sigmas = [1.0, 1.5, 2.0, 3.0];
    let mut violations = 0;
    let mut evaluations = 0;
    let mut worst = f64::INFINITY;
    let mut detail = String::new();
    for (name, case) in theorem_cases(seed.child("cases"))? {
        let radii: Vec<f64> = (1..=case.rmax).map(|r| r as f64).collect();
        let curve = envelope(&case.graph, &case.centers, &radii)?;
        let fit: GrowthFit<f64> = fit_growth(&curve, (1.0, case.rmax as f64))?;
        let usable: Vec<f64> = radii.iter().copied().filter(|&r| r >= fit.r0_prime).collect();
        if usable.is_empty() {
            return param(format!("{name}: no radius at or beyond R0' = {}", fit.r0_prime));
        }
        let mut rng = seed.child(&name).rng();
        for i in 0..FIELDS {
            let u = random_field(&case, &mut rng, i % 2 == 1);
            let p = case.centers[rng.gen_range(0..case.centers.len())];
            let r = usable[rng.gen_range(0..usable.len())];
            let sigma = sigmas[rng.gen_range(0..sigmas.len())];
            let m = theorem_graph_bound(&case.graph, &u, p, r, sigma, &fit)?;
            evaluations += 1;
            if !(m.margin >= 0.0) || !m.growth_hypothesis_holds {
                violations += 1;
            }
            worst = worst.min(m.margin / m.rhs);
        }
        if case.rmax > 8 {
            let _ = write!(detail, "{name} alpha {:.3}; ", fit.alpha_hat);
        }
    }
    let _ = write!(
        detail,
        "{evaluations} fields, {violations} violations, min relative margin {worst:.3e}"
    );
    Ok((violations == 0 && evaluations == 23 * FIELDS, detail))
}

fn uniform_box(rng: &mut impl Rng, dim: usize, count: usize, side: f64) -> Result<PointCloud<f64>> {
    let coords = (0..dim * count).map(|_| rng.gen_range(0.0..side)).collect();
    let w = side.powi(dim as i32) / count as f64;
    PointCloud::new(dim, coords, Some(vec![w; count]), Metric::Euclidean)
}

fn net_invariants(seed: Seed) -> Check {
    let mut clouds: Vec<(String, PointCloud<f64>, Option<u32>, f64)> = Vec::new();
    let mut rng = seed.child("clouds").rng();
    for k in 0..30u64 {
        let dim = 1 + (k as usize % 3);
        let count = rng.gen_range(500..3000);
        let eps = rng.gen_range(0.05..0.3);
        let cloud = uniform_box(&mut rng, dim, count, 2.0)?;
        clouds.push((format!("box{dim}d-{k}"), cloud, Some(dim as u32), eps));
    }
    for k in 0..15u64 {
        let n = 2 + (k as usize % 3);
        let p = HorosphereParams {
            n,
            a: rng.gen_range(0.5..2.0),
            height: rng.gen_range(0.5..2.0),
            extent: 2.0,
            count: rng.gen_range(500..2500),
            seed: seed.child("horosphere").nth(k).0,
        };
        let eps = rng.gen_range(0.1..0.5) * p.scale();
        clouds.push((format!("horosphere-n{n}-{k}"), horosphere_cloud(&p)?, None, eps));
    }
    for k in 0..5u64 {
        let spec = TubeSurfaceSpec {
            tube_radius: 0.15,
            arm_extent: 2,
            spine_extent: 2,
            density: 150.0,
            seed: seed.child("tube").nth(k).0,
        };
        let eps = rng.gen_range(0.3..0.6);
        clouds.push((format!("tube-{k}"), tube_surface_cloud::<f64>(&spec)?.cloud, None, eps));
    }
    let mut failures = Vec::new();
    let mut worst_mult = 0usize;
    for (k, (name, cloud, dim, eps)) in clouds.iter().enumerate() {
        let net = build_net(cloud, &NetConfig::new(*eps, seed.child("order").nth(k as u64).0))?;
        let (sep, cover) = audit_net(cloud, &net);
        let mut ok = sep >= *eps && cover < *eps;
        if let Some(n) = dim {
            let m = covering_multiplicity(cloud, &net, 3.0 * eps)?;
            worst_mult = worst_mult.max(m);
            ok &= (m as f64) <= multiplicity_bound(*n, 0.0, *eps)?;
        }
        if !ok {
            failures.push(name.clone());
        }
    }
    Ok((
        failures.is_empty(),
        format!(
            "{} clouds, {} failures {:?}, largest Euclidean multiplicity {worst_mult}",
            clouds.len(),
            failures.len(),
            failures
        ),
    ))
}

fn small_random_graph(seed: Seed, n: usize) -> Result<MMGraph<f64>> {
    let mut rng = seed.rng();
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    for _ in 0..n {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.push((a, b));
        }
    }
    let mu = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    MMGraph::from_edges(n, &edges, Some(mu), format!("small-{n}"))
}

fn spectral(seed: Seed) -> Check {
    let p3 = MMGraph::<f64>::from_edges(3, &[(0, 1), (1, 2)], None, "P3")?;
    let res = optimal_constant_quadratic(&p3, VertexId(1), 1.0, 1.0)?;
    let w = res.witness.values();
    let s = w[2];
    let mut ok = (res.value - 0.5).abs() < 1e-9 && (w[0] + s).abs() < 1e-9 * s.abs() && w[1].abs() < 1e-9 * s.abs();
    let mut worst_rel = 0.0f64;
    for k in 0..30u64 {
        let n = 3 + (k as usize % 10);
        let g = small_random_graph(seed.child("graphs").nth(k), n)?;
        let p = VertexId(k as usize % n);
        let (r, outer) = (1.0 + (k % 3) as f64, 1.0 + (k % 2) as f64);
        let exact = optimal_constant_quadratic(&g, p, r, outer)?.value;
        let reference = optimal_constant_power_reference(&g, p, r, outer)?.value;
        let rel = if reference == 0.0 { exact.abs() } else { ((exact - reference) / reference).abs() };
        worst_rel = worst_rel.max(rel);
    }
    ok &= worst_rel <= 1e-9;
    let mut worst_search = f64::INFINITY;
    let cfg = PoincareConfig::new(2.0, 0.0, 1.0, 1.0)?;
    for k in 0..6u64 {
        let g = small_random_graph(seed.child("search").nth(k), 8 + k as usize)?;
        let exact = optimal_constant_quadratic(&g, VertexId(0), 2.0, 1.0)?.value;
        let found = optimal_constant_search(&g, VertexId(0), 2.0, &cfg, 20_000, seed.nth(k).0)?.value;
        worst_search = worst_search.min(found / exact);
    }
    ok &= worst_search >= 1.0 - 1e-6;
    Ok((
        ok,
        format!(
            "P3 {:.12}, worst relative gap {worst_rel:.2e}, search/exact >= {worst_search:.9}",
            res.value
        ),
    ))
}

fn fit_at_origin(g: &MMGraph<f64>, range: (f64, f64)) -> Result<GrowthFit<f64>> {
    let o = g.vertex_at([0, 0, 0]).unwrap_or(VertexId(0));
    let radii: Vec<f64> = (1..=range.1 as usize).map(|r| r as f64).collect();
    fit_growth(&volume_curve(g, o, &radii)?, range)
}

fn growth_classes() -> Check {
    let z2 = fit_at_origin(&grid_graph(2, 128)?, (16.0, 128.0))?;
    let z3 = fit_at_origin(&grid_graph(3, 64)?, (16.0, 64.0))?;
    let tree = fit_at_origin(&tree_graph(2, 18)?, (1.0, 16.0))?;
    let antenna = fit_at_origin(&antenna_graph(&AntennaSpec::diamond(128))?, (16.0, 128.0))?;
    let within = |f: &GrowthFit<f64>, lo: f64, hi: f64| f.growth_class == GrowthClass::Polynomial && (lo..=hi).contains(&f.alpha_hat);
    let ok = within(&z2, 1.95, 2.05)
        && within(&z3, 2.9, 3.1)
        && tree.growth_class == GrowthClass::Exponential
        && within(&antenna, 1.95, 2.05);
    Ok((
        ok,
        format!(
            "Z2 {:.3}, Z3 {:.3}, tree {}, antenna {:.3}",
            z2.alpha_hat,
            z3.alpha_hat,
            tree.growth_class.name(),
            antenna.alpha_hat
        ),
    ))
}

fn horosphere(seed: Seed) -> Check {
    let params = HorosphereParams {
        n: 3,
        a: 1.0,
        height: 1.0,
        extent: 14.0,
        count: 80_000,
        seed: seed.child("cloud").0,
    };
    let cloud = horosphere_cloud::<f64>(&params)?;
    let eps = 0.25;
    let net = build_net(&cloud, &NetConfig::new(eps, seed.child("order").0))?;
    let g = net_graph(&cloud, &net)?;
    let norm = |v: usize| cloud.point(net.points[v]).iter().map(|x| x * x).sum::<f64>().sqrt();
    let centers: Vec<VertexId> = (0..net.len()).filter(|&v| norm(v) < 2.0).map(VertexId).take(16).collect();
    if centers.is_empty() {
        return Err(Error::Construction("no net point near the middle of the box".into()));
    }
    let radii: Vec<f64> = (1..=24).map(|r| r as f64).collect();
    let mut mean = vec![0.0; radii.len()];
    for &c in &centers {
        for (m, (_, v)) in mean.iter_mut().zip(volume_curve(&g, c, &radii)?.samples) {
            *m += v / centers.len() as f64;
        }
    }
    let curve = VolumeCurve::from_samples(radii.iter().copied().zip(mean).collect())?;
    let fit = fit_growth(&curve, (6.0, 24.0))?;
    let mut ok = (1.9..=2.1).contains(&fit.alpha_hat);

    let mut worst = 0.0f64;
    let mut rng = seed.child("pairs").rng();
    let small = HorosphereParams { count: 500, ..params };
    let base = horosphere_cloud::<f64>(&small)?;
    for t in [-1.5, -0.5, 0.25, 1.0, 2.0] {
        let moved = horosphere_cloud::<f64>(&small.flowed(t))?;
        let factor = (small.a * t).exp();
        for _ in 0..200 {
            let (i, j) = (rng.gen_range(0..small.count), rng.gen_range(0..small.count));
            let d0 = base.distance(i, j);
            if d0 > 0.0 {
                worst = worst.max((moved.distance(i, j) / (factor * d0) - 1.0).abs());
            }
        }
    }
    ok &= worst <= 1e-9;
    Ok((
        ok,
        format!(
            "net of {} points, alpha {:.3} over {} centers, scaling error {worst:.1e}",
            net.len(),
            fit.alpha_hat,
            centers.len()
        ),
    ))
}

fn ledger() -> Check {
    let inputs = LedgerInputs {
        n: 2,
        kappa: 0.0,
        epsilon: 1.0,
        sigma: 1.0,
        beta: 2.0,
        r0: 1.0,
        r1: 3.0,
        v_prime: 3.0,
        outer_factor: 3.0,
        local_poincare: Some(LocalPoincare::buser()),
        smoothing: SmoothingSource::PlugIn { t: 2.0, tprime: 7.0 },
    };
    let a = constant_ledger(&inputs)?;
    let b = constant_ledger(&inputs)?;
    let checks = a.check();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.holds).map(|c| c.field).collect();
    let mult_ok = [0.01, 0.5, 1.0, 7.0].iter().all(|&e| multiplicity_bound(2, 0.0, e).ok() == Some(1024.0));
    let ok = a.c_dprime == 89.0 && a == b && failed.is_empty() && mult_ok;
    Ok((
        ok,
        format!(
            "C'' = {}, {} equalities rechecked, failed {failed:?}, multiplicity 1024: {mult_ok}",
            a.c_dprime,
            checks.len()
        ),
    ))
}

fn rough_audits(seed: Seed) -> Check {
    let spec = TubeSurfaceSpec {
        tube_radius: 0.15,
        arm_extent: 4,
        spine_extent: 4,
        density: 150.0,
        seed: seed.child("tube").0,
    };
    let tube = tube_surface_cloud::<f64>(&spec)?;
    let g = antenna_graph::<f64>(&AntennaSpec::rect(spec.arm_extent, spec.spine_extent))?;
    let phi = tube.vertex_map(&g)?;
    let a = rough_isometry_check(&tube.cloud, &g, &phi, 1.0, 20_000, seed.child("tube-pairs").0)?;

    let mut rng = seed.child("square").rng();
    let square = uniform_box(&mut rng, 2, 10_000, 1.0)?;
    let eps = 0.05;
    let net = build_net(&square, &NetConfig::new(eps, seed.child("order").0))?;
    let ng = net_graph(&square, &net)?;
    let b = rough_isometry_check(&square, &ng, &net.points, eps, 20_000, seed.child("square-pairs").0)?;
    let ok = a.pass && b.pass && a.c2 <= 4.0 && b.c2 <= 4.0;
    Ok((
        ok,
        format!(
            "tube/antenna c = ({:.3}, {:.3}, {:.3}); square/net c = ({:.3}, {:.3}, {:.3})",
            a.c1, a.c2, a.c3, b.c1, b.c2, b.c3
        ),
    ))
}
