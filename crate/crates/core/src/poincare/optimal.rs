use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::mmgraph::{MMGraph, ScalarField, VertexId};
use crate::scalar::Real;
use crate::seed::Seed;

use super::eigen::{symmetric_eigen, Dense};
use super::{poincare_ratio, PoincareConfig, Ratio};

/// Largest number of free variables accepted by the dense solvers.
const DENSE_LIMIT: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact largest generalized eigenvalue (`sigma = 2`).
    EigenExact,
    /// Best value found by multistart ascent; a lower bound only.
    SearchLowerBound,
    /// Matrix-squaring power iteration, used as an independent cross-check.
    PowerReference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalConstantResult<T> {
    pub value: T,
    pub witness: ScalarField<T>,
    pub method: Method,
}

/// The variables that influence the functional at `(p, R, C')`: the gradient
/// ball and its outer neighbours.
struct Problem<T> {
    vars: Vec<VertexId>,
    /// `(var, mu)` for the inner ball.
    inner: Vec<(usize, T)>,
    /// `(var, mu, neighbour vars)` for the gradient ball.
    outer: Vec<(usize, T, Vec<usize>)>,
    inner_mass: T,
}

impl<T: Real> Problem<T> {
    fn new(g: &MMGraph<T>, p: VertexId, radius: T, outer_factor: T) -> Result<Self> {
        if !(radius >= T::zero()) || !(outer_factor >= T::one()) {
            return param("radius must be >= 0 and outer factor >= 1");
        }
        let inner_ball = g.ball(p, radius)?;
        let outer_ball = g.ball(p, outer_factor * radius)?;
        if !g.ball_is_complete(&outer_ball) {
            return param("gradient ball reaches the truncation boundary; enlarge the graph");
        }
        let mut slot = vec![usize::MAX; g.vertex_count()];
        let mut vars = Vec::new();
        fn intern(v: VertexId, slot: &mut [usize], vars: &mut Vec<VertexId>) -> usize {
            if slot[v.0] == usize::MAX {
                slot[v.0] = vars.len();
                vars.push(v);
            }
            slot[v.0]
        }
        for &x in &outer_ball.members {
            intern(x, &mut slot, &mut vars);
        }
        let mut outer = Vec::with_capacity(outer_ball.len());
        for &x in &outer_ball.members {
            let nb: Vec<usize> = g.neighbors(x).map(|y| intern(y, &mut slot, &mut vars)).collect();
            outer.push((slot[x.0], g.measure(x), nb));
        }
        let inner: Vec<(usize, T)> = inner_ball.members.iter().map(|&x| (slot[x.0], g.measure(x))).collect();
        Ok(Problem {
            vars,
            inner,
            outer,
            inner_mass: inner_ball.total_mass,
        })
    }

    fn field(&self, g: &MMGraph<T>, x: &[T]) -> ScalarField<T> {
        let mut values = vec![T::zero(); g.vertex_count()];
        for (k, v) in self.vars.iter().enumerate() {
            values[v.0] = x[k];
        }
        ScalarField::from_vec(values)
    }

    fn numerator(&self, x: &[T], sigma: T) -> T {
        let mean = self.inner.iter().map(|&(i, m)| x[i] * m).sum::<T>() / self.inner_mass;
        self.inner.iter().map(|&(i, m)| (x[i] - mean).abs().powf(sigma) * m).sum()
    }

    fn denominator(&self, x: &[T], sigma: T) -> T {
        self.outer
            .iter()
            .map(|(i, m, nb)| {
                let s: T = nb.iter().map(|&j| (x[j] - x[*i]) * (x[j] - x[*i])).sum();
                s.sqrt().powf(sigma) * *m
            })
            .sum()
    }

    fn numerator_gradient(&self, x: &[T], sigma: T, out: &mut [T]) {
        let mean = self.inner.iter().map(|&(i, m)| x[i] * m).sum::<T>() / self.inner_mass;
        let mut weighted = T::zero();
        for &(i, m) in &self.inner {
            let e = x[i] - mean;
            let s = e.abs().powf(sigma - T::one()) * e.signum();
            let s = if e == T::zero() { T::zero() } else { s };
            out[i] += sigma * m * s;
            weighted += m * s;
        }
        for &(i, m) in &self.inner {
            out[i] -= sigma * m / self.inner_mass * weighted;
        }
    }

    fn denominator_gradient(&self, x: &[T], sigma: T, out: &mut [T]) {
        for (i, m, nb) in &self.outer {
            let s: T = nb.iter().map(|&j| (x[j] - x[*i]) * (x[j] - x[*i])).sum();
            if s == T::zero() {
                continue;
            }
            let coef = sigma * *m * s.sqrt().powf(sigma - T::lit(2.0));
            for &j in nb {
                let d = x[j] - x[*i];
                out[j] += coef * d;
                out[*i] -= coef * d;
            }
        }
    }

    /// Dense forms of numerator and denominator at `sigma = 2` over all
    /// variables except `pinned`.
    fn quadratic_forms(&self, pinned: usize) -> (Dense<T>, Dense<T>, Vec<usize>) {
        let n = self.vars.len();
        let keep: Vec<usize> = (0..n).filter(|&k| k != pinned).collect();
        let mut pos = vec![usize::MAX; n];
        for (a, &k) in keep.iter().enumerate() {
            pos[k] = a;
        }
        let m = keep.len();
        let mut num = Dense::zeros(m);
        for &(i, mu) in &self.inner {
            if pos[i] != usize::MAX {
                num.add(pos[i], pos[i], mu);
            }
        }
        for &(i, mi) in &self.inner {
            for &(j, mj) in &self.inner {
                if pos[i] != usize::MAX && pos[j] != usize::MAX {
                    num.add(pos[i], pos[j], -mi * mj / self.inner_mass);
                }
            }
        }
        let mut den = Dense::zeros(m);
        for (i, mu, nb) in &self.outer {
            for &j in nb {
                let (a, b) = (pos[*i], pos[j]);
                if a != usize::MAX {
                    den.add(a, a, *mu);
                }
                if b != usize::MAX {
                    den.add(b, b, *mu);
                }
                if a != usize::MAX && b != usize::MAX {
                    den.add(a, b, -*mu);
                    den.add(b, a, -*mu);
                }
            }
        }
        (num, den, keep)
    }
}

fn constant_result<T: Real>(g: &MMGraph<T>, method: Method) -> OptimalConstantResult<T> {
    OptimalConstantResult {
        value: T::zero(),
        witness: ScalarField::constant(g, T::one()),
        method,
    }
}

fn reevaluate<T: Real>(
    g: &MMGraph<T>,
    p: VertexId,
    radius: T,
    cfg: &PoincareConfig<T>,
    witness: &ScalarField<T>,
) -> Result<T> {
    let cfg = PoincareConfig {
        r0: radius.min(cfg.r0).max(T::min_positive_value()),
        ..*cfg
    };
    match poincare_ratio(g, witness, p, radius, &cfg)?.ratio {
        Ratio::Finite(v) => Ok(v),
        Ratio::Infinite => param("witness has zero gradient mass"),
    }
}

fn sigma_two<T: Real>(outer_factor: T) -> PoincareConfig<T> {
    PoincareConfig {
        sigma: T::lit(2.0),
        beta: T::zero(),
        outer_factor,
        r0: T::min_positive_value(),
    }
}

/// Exact optimal constant of the `sigma = 2`, `beta = 0` inequality at
/// `(p, R, C')`: the largest generalized eigenvalue of the numerator form
/// against the gradient form, over fields on the gradient ball and its
/// outer neighbours with `u(p) = 0` removing the constants.
pub fn optimal_constant_quadratic<T: Real>(
    g: &MMGraph<T>,
    p: VertexId,
    radius: T,
    outer_factor: T,
) -> Result<OptimalConstantResult<T>> {
    let prob = Problem::new(g, p, radius, outer_factor)?;
    if prob.inner.len() < 2 {
        return Ok(constant_result(g, Method::EigenExact));
    }
    if prob.vars.len() > DENSE_LIMIT {
        return param(format!(
            "{} variables exceed the dense solver limit of {DENSE_LIMIT}",
            prob.vars.len()
        ));
    }
    let (num, den, keep) = prob.quadratic_forms(0);
    let l = den
        .cholesky()
        .ok_or_else(|| crate::error::Error::Domain("gradient form is not positive definite".into()))?;
    let s = l.congruence_inverse(&num);
    let (vals, vecs) = symmetric_eigen(&s);
    let top = vals.len() - 1;
    if !(vals[top] > T::zero()) {
        return Ok(constant_result(g, Method::EigenExact));
    }
    let y: Vec<T> = (0..s.n).map(|i| vecs.at(i, top)).collect();
    let z = l.solve_upper_transpose(&y);
    let mut x = vec![T::zero(); prob.vars.len()];
    for (a, &k) in keep.iter().enumerate() {
        x[k] = z[a];
    }
    normalize(&mut x);
    let witness = prob.field(g, &x);
    let value = reevaluate(g, p, radius, &sigma_two(outer_factor), &witness)?;
    Ok(OptimalConstantResult {
        value,
        witness,
        method: Method::EigenExact,
    })
}

/// Independent `sigma = 2` reference: pins a different vertex, inverts the
/// gradient form by Gauss–Jordan elimination and extracts the dominant
/// eigenvector of `D^{-1} N` by repeated matrix squaring.
pub fn optimal_constant_power_reference<T: Real>(
    g: &MMGraph<T>,
    p: VertexId,
    radius: T,
    outer_factor: T,
) -> Result<OptimalConstantResult<T>> {
    let prob = Problem::new(g, p, radius, outer_factor)?;
    if prob.inner.len() < 2 {
        return Ok(constant_result(g, Method::PowerReference));
    }
    if prob.vars.len() > DENSE_LIMIT {
        return param(format!(
            "{} variables exceed the dense solver limit of {DENSE_LIMIT}",
            prob.vars.len()
        ));
    }
    let pinned = prob.vars.len() - 1;
    let (num, den, keep) = prob.quadratic_forms(pinned);
    let n = num.n;
    let inv = gauss_jordan_inverse(&den)
        .ok_or_else(|| crate::error::Error::Domain("gradient form is singular".into()))?;
    let mut a = matmul(&inv, &num);
    for _ in 0..60 {
        let sq = matmul(&a, &a);
        let scale = sq.a.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        if !(scale > T::zero()) {
            return Ok(constant_result(g, Method::PowerReference));
        }
        a = Dense {
            n,
            a: sq.a.into_iter().map(|x| x / scale).collect(),
        };
    }
    let col = (0..n)
        .max_by(|&i, &j| {
            let ni: T = (0..n).map(|r| a.at(r, i) * a.at(r, i)).sum();
            let nj: T = (0..n).map(|r| a.at(r, j) * a.at(r, j)).sum();
            ni.partial_cmp(&nj).expect("finite")
        })
        .expect("nonempty");
    let mut x = vec![T::zero(); prob.vars.len()];
    for (r, &k) in keep.iter().enumerate() {
        x[k] = a.at(r, col);
    }
    normalize(&mut x);
    let witness = prob.field(g, &x);
    let value = reevaluate(g, p, radius, &sigma_two(outer_factor), &witness)?;
    Ok(OptimalConstantResult {
        value,
        witness,
        method: Method::PowerReference,
    })
}

fn matmul<T: Real>(a: &Dense<T>, b: &Dense<T>) -> Dense<T> {
    let n = a.n;
    let mut c = Dense::zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a.at(i, k);
            if aik == T::zero() {
                continue;
            }
            for j in 0..n {
                c.a[i * n + j] += aik * b.a[k * n + j];
            }
        }
    }
    c
}

fn gauss_jordan_inverse<T: Real>(m: &Dense<T>) -> Option<Dense<T>> {
    let n = m.n;
    let mut a = m.clone();
    let mut inv = Dense::zeros(n);
    for i in 0..n {
        inv.a[i * n + i] = T::one();
    }
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a.at(i, c).abs().partial_cmp(&a.at(j, c).abs()).expect("finite"))?;
        if a.at(piv, c) == T::zero() {
            return None;
        }
        for j in 0..n {
            a.a.swap(c * n + j, piv * n + j);
            inv.a.swap(c * n + j, piv * n + j);
        }
        let d = a.at(c, c);
        for j in 0..n {
            a.a[c * n + j] /= d;
            inv.a[c * n + j] /= d;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = a.at(r, c);
            if f == T::zero() {
                continue;
            }
            for j in 0..n {
                let (pa, pi) = (a.a[c * n + j], inv.a[c * n + j]);
                a.a[r * n + j] -= f * pa;
                inv.a[r * n + j] -= f * pi;
            }
        }
    }
    Some(inv)
}

/// Centers and rescales to unit Euclidean norm.
fn normalize<T: Real>(x: &mut [T]) {
    let mean = x.iter().copied().sum::<T>() / T::from_count(x.len().max(1));
    for v in x.iter_mut() {
        *v -= mean;
    }
    let norm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
    if norm > T::zero() {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
}

fn log_objective<T: Real>(prob: &Problem<T>, x: &[T], sigma: T) -> Option<(T, T, T)> {
    let n = prob.numerator(x, sigma);
    let d = prob.denominator(x, sigma);
    if n > T::zero() && d > T::zero() {
        Some((n.ln() - d.ln(), n, d))
    } else {
        None
    }
}

/// Gradient ascent on `ln N - ln D` with step adaptation and backtracking;
/// returns the improved point (never worse than the start).
fn ascend<T: Real>(prob: &Problem<T>, start: Vec<T>, sigma: T, iters: usize) -> Option<(T, Vec<T>)> {
    let mut x = start;
    normalize(&mut x);
    let (mut f, mut n, mut d) = log_objective(prob, &x, sigma)?;
    let mut step = T::lit(0.1);
    let mut grad = vec![T::zero(); x.len()];
    let mut gn = vec![T::zero(); x.len()];
    let mut gd = vec![T::zero(); x.len()];
    let mut trial = vec![T::zero(); x.len()];
    let tiny = T::lit(1e-16);
    for _ in 0..iters {
        gn.iter_mut().for_each(|v| *v = T::zero());
        gd.iter_mut().for_each(|v| *v = T::zero());
        prob.numerator_gradient(&x, sigma, &mut gn);
        prob.denominator_gradient(&x, sigma, &mut gd);
        for k in 0..x.len() {
            grad[k] = gn[k] / n - gd[k] / d;
        }
        let gnorm = grad.iter().map(|v| *v * *v).sum::<T>().sqrt();
        if !(gnorm > tiny) {
            break;
        }
        let mut accepted = false;
        while step > tiny {
            for k in 0..x.len() {
                trial[k] = x[k] + step * grad[k] / gnorm;
            }
            normalize(&mut trial);
            match log_objective(prob, &trial, sigma) {
                Some((ft, nt, dt)) if ft > f => {
                    std::mem::swap(&mut x, &mut trial);
                    (f, n, d) = (ft, nt, dt);
                    step *= T::lit(1.5);
                    accepted = true;
                    break;
                }
                _ => step *= T::lit(0.5),
            }
        }
        if !accepted {
            break;
        }
    }
    Some((f, x))
}

/// [`optimal_constant_search_with_starts`] without caller-supplied starts.
pub fn optimal_constant_search<T: Real>(
    g: &MMGraph<T>,
    p: VertexId,
    radius: T,
    cfg: &PoincareConfig<T>,
    iters: usize,
    seed: u64,
) -> Result<OptimalConstantResult<T>> {
    optimal_constant_search_with_starts(g, p, radius, cfg, iters, seed, &[])
}

/// Lower bound on the optimal constant `sup N / (R^beta D)` for general
/// `sigma`, by ascent from the coordinate fields (when the graph has
/// coordinates), the distance to `p`, four seeded random fields and any
/// `extra_starts`.
pub fn optimal_constant_search_with_starts<T: Real>(
    g: &MMGraph<T>,
    p: VertexId,
    radius: T,
    cfg: &PoincareConfig<T>,
    iters: usize,
    seed: u64,
    extra_starts: &[ScalarField<T>],
) -> Result<OptimalConstantResult<T>> {
    cfg.validate()?;
    let prob = Problem::new(g, p, radius, cfg.outer_factor)?;
    let mut starts: Vec<Vec<T>> = Vec::new();
    if prob.vars.iter().all(|&v| g.coord(v).is_some()) {
        for axis in 0..3 {
            let s: Vec<T> = prob
                .vars
                .iter()
                .map(|&v| T::lit(g.coord(v).expect("checked")[axis] as f64))
                .collect();
            starts.push(s);
        }
    }
    let dist = g.distances_from(p, None)?;
    starts.push(
        prob.vars
            .iter()
            .map(|&v| T::from_count(dist[v.0].unwrap_or(0) as usize))
            .collect(),
    );
    let mut rng = Seed::new(seed).child("poincare-search").rng();
    for _ in 0..4 {
        starts.push(prob.vars.iter().map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect());
    }
    for f in extra_starts {
        if f.len() != g.vertex_count() {
            return param("extra start has the wrong length");
        }
        starts.push(prob.vars.iter().map(|&v| f[v]).collect());
    }

    let mut best: Option<(T, Vec<T>)> = None;
    for s in starts {
        if let Some((f, x)) = ascend(&prob, s, cfg.sigma, iters) {
            if best.as_ref().is_none_or(|b| f > b.0) {
                best = Some((f, x));
            }
        }
    }
    let Some((_, x)) = best else {
        return Ok(constant_result(g, Method::SearchLowerBound));
    };
    let witness = prob.field(g, &x);
    let value = reevaluate(g, p, radius, cfg, &witness)?;
    Ok(OptimalConstantResult {
        value,
        witness,
        method: Method::SearchLowerBound,
    })
}
