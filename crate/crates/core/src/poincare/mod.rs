//! Discrete Poincaré functionals on metric measure graphs: ratios, the
//! polynomial-growth bound, optimal constants, sharpness probes and the
//! manifold-to-graph constant chain.

mod eigen;
mod ledger;
mod optimal;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::growth::GrowthFit;
use crate::mmgraph::{Ball, MMGraph, ScalarField, VertexId};
use crate::scalar::Real;

pub use ledger::{
    constant_ledger, multiplicity_bound, ConstantLedger, LedgerCheck, LedgerInputs, LocalPoincare, SmoothingSource,
};
pub use optimal::{
    optimal_constant_power_reference, optimal_constant_quadratic, optimal_constant_search,
    optimal_constant_search_with_starts, Method, OptimalConstantResult,
};

/// Parameters of a `(sigma, beta, sigma)` Poincaré inequality
/// `sum_{B(p,R)} |u - u_R|^sigma mu <= C R^beta sum_{B(p, C' R)} (delta u)^sigma mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareConfig<T> {
    pub sigma: T,
    pub beta: T,
    /// The dilation `C'` of the gradient ball.
    pub outer_factor: T,
    /// Smallest admissible radius.
    pub r0: T,
}

impl<T: Real> PoincareConfig<T> {
    pub fn new(sigma: T, beta: T, outer_factor: T, r0: T) -> Result<Self> {
        let cfg = PoincareConfig {
            sigma,
            beta,
            outer_factor,
            r0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= T::one()) {
            return param(format!("sigma must be >= 1, got {}", self.sigma));
        }
        if !(self.beta >= T::zero()) {
            return param(format!("beta must be >= 0, got {}", self.beta));
        }
        if !(self.outer_factor >= T::one()) {
            return param(format!("outer factor must be >= 1, got {}", self.outer_factor));
        }
        if !(self.r0 > T::zero()) {
            return param(format!("r0 must be positive, got {}", self.r0));
        }
        Ok(())
    }
}

/// Quotient that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ratio<T> {
    Finite(T),
    /// Zero gradient mass under a nonconstant field.
    Infinite,
}

impl<T: Real> Ratio<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Ratio::Finite(x) => Some(x),
            Ratio::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Ratio::Infinite)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord<T> {
    pub radius: T,
    /// `sum_{B(p,R)} |u - u_R|^sigma mu`.
    pub numerator: T,
    /// `sum_{B(p, C' R)} (delta u)^sigma mu`.
    pub denominator: T,
    /// `numerator / (R^beta denominator)`.
    pub ratio: Ratio<T>,
}

fn quotient<T: Real>(num: T, den: T) -> Ratio<T> {
    if num == T::zero() {
        Ratio::Finite(T::zero())
    } else if den == T::zero() {
        Ratio::Infinite
    } else {
        Ratio::Finite(num / den)
    }
}

fn ensure_complete<T: Real>(g: &MMGraph<T>, ball: &Ball<T>, what: &str) -> Result<()> {
    if g.ball_is_complete(ball) {
        Ok(())
    } else {
        param(format!(
            "{what} B({}, {}) reaches the truncation boundary of '{}'; enlarge the graph",
            ball.center.0,
            ball.radius,
            g.label()
        ))
    }
}

fn check_field<T: Real>(g: &MMGraph<T>, u: &ScalarField<T>) -> Result<()> {
    if u.len() != g.vertex_count() {
        return param(format!("field has {} values for {} vertices", u.len(), g.vertex_count()));
    }
    Ok(())
}

/// `sum_{B} |u - u_B|^sigma mu`.
pub(crate) fn deviation_mass<T: Real>(g: &MMGraph<T>, u: &ScalarField<T>, ball: &Ball<T>, sigma: T) -> Result<T> {
    let mean = g.field_average(u, ball)?;
    Ok(ball
        .members
        .iter()
        .map(|&x| (u[x] - mean).abs().powf(sigma) * g.measure(x))
        .sum())
}

/// `sum_{B} (delta u)^sigma mu`.
pub(crate) fn gradient_mass<T: Real>(g: &MMGraph<T>, u: &ScalarField<T>, ball: &Ball<T>, sigma: T) -> T {
    ball.members
        .iter()
        .map(|&x| g.gradient_length(u, x).powf(sigma) * g.measure(x))
        .sum()
}

/// Numerator, gradient mass and normalized ratio of the Poincaré inequality
/// at `(p, R)`. The gradient ball must be clear of the truncation boundary.
pub fn poincare_ratio<T: Real>(
    g: &MMGraph<T>,
    u: &ScalarField<T>,
    p: VertexId,
    radius: T,
    cfg: &PoincareConfig<T>,
) -> Result<RatioRecord<T>> {
    cfg.validate()?;
    check_field(g, u)?;
    if radius < cfg.r0 {
        return param(format!("radius {radius} is below r0 = {}", cfg.r0));
    }
    let inner = g.ball(p, radius)?;
    let outer = g.ball(p, cfg.outer_factor * radius)?;
    ensure_complete(g, &outer, "gradient ball")?;
    let numerator = deviation_mass(g, u, &inner, cfg.sigma)?;
    let denominator = gradient_mass(g, u, &outer, cfg.sigma);
    let ratio = quotient(numerator, radius.powf(cfg.beta) * denominator);
    Ok(RatioRecord {
        radius,
        numerator,
        denominator,
        ratio,
    })
}

/// Ratio records over many radii, evaluated in parallel.
pub fn poincare_ratio_curve<T: Real>(
    g: &MMGraph<T>,
    u: &ScalarField<T>,
    p: VertexId,
    radii: &[T],
    cfg: &PoincareConfig<T>,
) -> Result<Vec<RatioRecord<T>>> {
    radii.par_iter().map(|&r| poincare_ratio(g, u, p, r, cfg)).collect()
}

/// Both sides of the polynomial-growth Poincaré bound
/// `sum_{B(p,R)} |u - u_R|^sigma mu <= 6^(sigma-1) v' R^(alpha+sigma-1) sum_{B(p,3R)} (delta u)^sigma mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremMargin<T> {
    pub radius: T,
    pub lhs: T,
    /// `(6R)^(sigma-1) mu(B(p,R)) sum_{B(p,3R)} (delta u)^sigma mu`, the bound
    /// before the growth hypothesis is applied.
    pub path_bound: T,
    pub rhs: T,
    pub margin: T,
    /// Whether `mu(B(p,R)) <= v' R^alpha` holds at this center.
    pub growth_hypothesis_holds: bool,
}

/// Evaluates the polynomial-growth bound with `(alpha, v', R0')` from `fit`.
///
/// Requires `R0' <= R <= fit.r_max` and an untruncated `B(p, 3R)`.
pub fn theorem_graph_bound<T: Real>(
    g: &MMGraph<T>,
    u: &ScalarField<T>,
    p: VertexId,
    radius: T,
    sigma: T,
    fit: &GrowthFit<T>,
) -> Result<TheoremMargin<T>> {
    check_field(g, u)?;
    if !(sigma >= T::one()) {
        return param(format!("sigma must be >= 1, got {sigma}"));
    }
    if radius < fit.r0_prime {
        return param(format!("radius {radius} is below the growth onset {}", fit.r0_prime));
    }
    if radius > fit.r_max {
        return param(format!("radius {radius} exceeds the fitted range (up to {})", fit.r_max));
    }
    let three = T::lit(3.0);
    let inner = g.ball(p, radius)?;
    let outer = g.ball(p, three * radius)?;
    ensure_complete(g, &outer, "gradient ball")?;
    let lhs = deviation_mass(g, u, &inner, sigma)?;
    let grad = gradient_mass(g, u, &outer, sigma);
    let six = T::lit(6.0);
    let path_bound = (six * radius).powf(sigma - T::one()) * inner.total_mass * grad;
    let rhs = six.powf(sigma - T::one()) * fit.v_prime * radius.powf(fit.alpha_hat + sigma - T::one()) * grad;
    Ok(TheoremMargin {
        radius,
        lhs,
        path_bound,
        rhs,
        margin: rhs - lhs,
        growth_hypothesis_holds: inner.total_mass <= fit.bound(radius) * (T::one() + T::lit(1e-12)),
    })
}

/// Log-log slopes of a Poincaré ratio family over increasing radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceProbe<T> {
    pub records: Vec<RatioRecord<T>>,
    pub numerator_slope: T,
    pub denominator_slope: T,
    pub ratio_slope: T,
    /// `alpha + sigma - 1 - beta`.
    pub expected_slope: T,
    pub diverges: bool,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope<T: Real>(points: &[(T, T)]) -> Result<T> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > T::zero() && y > T::zero())) {
        return Err(Error::Domain("log-log slope needs at least two positive points".into()));
    }
    let n = T::from_count(points.len());
    let mx = points.iter().map(|p| p.0.ln()).sum::<T>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<T>() / n;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for &(x, y) in points {
        let (dx, dy) = (x.ln() - mx, y.ln() - my);
        sxx += dx * dx;
        sxy += dx * dy;
    }
    Ok(sxy / sxx)
}

/// Measures how the Poincaré ratio of `u` scales with `R`. Divergence is
/// affirmed when `alpha + sigma - 1 - beta > 0` and the ratio slope is at
/// least that value minus `0.2`.
pub fn divergence_probe<T: Real>(
    g: &MMGraph<T>,
    u: &ScalarField<T>,
    p: VertexId,
    radii: &[T],
    cfg: &PoincareConfig<T>,
    alpha: T,
) -> Result<DivergenceProbe<T>> {
    if radii.len() < 4 {
        return param(format!("need at least 4 radii, got {}", radii.len()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return param("radii must be strictly increasing");
    }
    let records = poincare_ratio_curve(g, u, p, radii, cfg)?;
    let mut ratios = Vec::with_capacity(records.len());
    for r in &records {
        match r.ratio {
            Ratio::Finite(x) => ratios.push((r.radius, x)),
            Ratio::Infinite => {
                return Err(Error::Domain(format!("infinite ratio at R = {}", r.radius)));
            }
        }
    }
    let numerator_slope = log_log_slope(&records.iter().map(|r| (r.radius, r.numerator)).collect::<Vec<_>>())?;
    let denominator_slope = log_log_slope(&records.iter().map(|r| (r.radius, r.denominator)).collect::<Vec<_>>())?;
    let ratio_slope = log_log_slope(&ratios)?;
    let expected_slope = alpha + cfg.sigma - T::one() - cfg.beta;
    let diverges = expected_slope > T::zero() && ratio_slope >= expected_slope - T::lit(0.2);
    Ok(DivergenceProbe {
        records,
        numerator_slope,
        denominator_slope,
        ratio_slope,
        expected_slope,
        diverges,
    })
}

#[cfg(test)]
mod tests;
