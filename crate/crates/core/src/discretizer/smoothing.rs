use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::mmgraph::{MMGraph, ScalarField, VertexId};
use crate::scalar::Real;

use super::{Net, PointCloud};

/// Sample values of a test function together with its exact gradient norm
/// at every sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction<T> {
    pub name: String,
    pub values: Vec<T>,
    pub gradient_norms: Vec<T>,
}

/// Empirical constants of the smoothing gradient comparison
/// `|| delta psi~ ||_{sigma, B(x,R)} <= T || grad psi ||_{sigma, B(x, T' R)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConstants<T> {
    pub t_emp: T,
    pub tprime_emp: T,
    pub evaluations: usize,
}

/// Ball means of `psi` over the open `eps`-balls around the net points,
/// using the sample weights.
pub fn smooth_field<T: Real>(cloud: &PointCloud<T>, psi: &[T], net: &Net<T>) -> Result<ScalarField<T>> {
    if psi.len() != cloud.len() {
        return param(format!("{} values for {} sample points", psi.len(), cloud.len()));
    }
    let mut out = Vec::with_capacity(net.len());
    for &p in &net.points {
        let (mut num, mut den) = (T::zero(), T::zero());
        for (j, _) in cloud.within(p, net.epsilon, true) {
            num += psi[j] * cloud.weight(j);
            den += cloud.weight(j);
        }
        if !(den > T::zero()) {
            return Err(Error::Construction(format!(
                "no sample points within {} of net point {p}",
                net.epsilon
            )));
        }
        out.push(num / den);
    }
    Ok(ScalarField::from_vec(out))
}

/// Grid of dilation factors tried, smallest first.
fn tprime_grid<T: Real>(eps: T) -> [T; 2] {
    let base = T::one() + T::lit(6.0) * eps;
    [base, base + base]
}

/// Smallest dilation `T'` from the grid `{1 + 6 eps, 2 (1 + 6 eps)}` for
/// which every tested instance has a finite ratio, with the largest such
/// ratio as `T`. Graph balls use hop radius `R`; sample balls are closed of
/// radius `T' R`. Left sides at rounding level count as zero.
#[allow(clippy::too_many_arguments)]
pub fn smoothing_gradient_bound<T: Real>(
    cloud: &PointCloud<T>,
    g: &MMGraph<T>,
    net: &Net<T>,
    fields: &[TestFunction<T>],
    sigma: T,
    centers: &[VertexId],
    radii: &[T],
) -> Result<SmoothingConstants<T>> {
    if sigma < T::one() {
        return param("sigma must be at least 1");
    }
    if g.vertex_count() != net.len() {
        return param("graph does not match the net");
    }
    if radii.iter().any(|r| !(*r > T::zero())) {
        return param("radii must be positive");
    }
    for c in centers {
        g.check_vertex(*c)?;
    }
    let mut lhs_all = Vec::new();
    for f in fields {
        if f.values.len() != cloud.len() || f.gradient_norms.len() != cloud.len() {
            return param(format!("test function '{}' has the wrong length", f.name));
        }
        let smoothed = smooth_field(cloud, &f.values, net)?;
        let grad: Vec<T> = g.vertices().map(|v| g.gradient_length(&smoothed, v)).collect();
        let roundoff = f.values.iter().fold(T::zero(), |m, x| m.max(x.abs())) * T::epsilon() * T::lit(64.0);
        let mut rows = Vec::new();
        for &c in centers {
            for &r in radii {
                let ball = g.ball(c, r)?;
                let lhs: T = ball
                    .members
                    .iter()
                    .map(|&z| grad[z.0].powf(sigma) * g.measure(z))
                    .sum();
                let lhs = lhs.powf(sigma.recip());
                let lhs = if lhs <= roundoff * ball.total_mass.powf(sigma.recip()) {
                    T::zero()
                } else {
                    lhs
                };
                rows.push((c, r, lhs));
            }
        }
        lhs_all.push(rows);
    }

    let mut worst = String::new();
    for tp in tprime_grid(net.epsilon) {
        let mut t_max = T::zero();
        let mut evaluations = 0;
        let mut feasible = true;
        for (f, rows) in fields.iter().zip(&lhs_all) {
            for &(c, r, lhs) in rows {
                evaluations += 1;
                if lhs == T::zero() {
                    continue;
                }
                let rhs: T = cloud
                    .within(net.points[c.0], tp * r, false)
                    .into_iter()
                    .map(|(j, _)| f.gradient_norms[j].powf(sigma) * cloud.weight(j))
                    .sum();
                let rhs = rhs.powf(sigma.recip());
                if rhs > T::zero() {
                    t_max = t_max.max(lhs / rhs);
                } else {
                    feasible = false;
                    worst = format!(
                        "field '{}', center {}, R = {r}, T' = {tp}: lhs {lhs} against zero gradient mass",
                        f.name, c.0
                    );
                }
            }
        }
        if feasible {
            return Ok(SmoothingConstants {
                t_emp: t_max,
                tprime_emp: tp,
                evaluations,
            });
        }
    }
    Err(Error::BoundSearch(worst))
}
