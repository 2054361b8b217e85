//! Volume growth: ball-mass curves, power-law fits and doubling constants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretizer::PointCloud;
use crate::error::{param, Error, Result};
use crate::mmgraph::{hop_limit, MMGraph, VertexId};
use crate::scalar::Real;

/// Ball masses `mu(B(center, R))` at increasing radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeCurve<T> {
    pub samples: Vec<(T, T)>,
    /// Largest radius whose ball is unaffected by truncation; `None` when no
    /// truncated vertex was reached.
    pub exact_up_to: Option<T>,
}

impl<T: Real> VolumeCurve<T> {
    pub fn from_samples(samples: Vec<(T, T)>) -> Result<Self> {
        check_sorted(samples.iter().map(|s| s.0))?;
        Ok(VolumeCurve {
            samples,
            exact_up_to: None,
        })
    }

    pub fn radii(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    pub fn volumes(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    fn assert_monotone(&self) -> Result<()> {
        if self.samples.windows(2).any(|w| w[1].1 < w[0].1) {
            return Err(Error::Construction("volume curve is not nondecreasing".into()));
        }
        Ok(())
    }
}

fn check_sorted<T: Real>(radii: impl Iterator<Item = T>) -> Result<()> {
    let mut prev = T::zero();
    for r in radii {
        if !(r >= prev) {
            return param("radii must be nonnegative and sorted ascending");
        }
        prev = r;
    }
    Ok(())
}

/// Ball masses around `center` at every requested radius, from one
/// breadth-first sweep.
pub fn volume_curve<T: Real>(g: &MMGraph<T>, center: VertexId, radii: &[T]) -> Result<VolumeCurve<T>> {
    check_sorted(radii.iter().copied())?;
    let max_hops = radii.last().map_or(0, |&r| hop_limit(r) as usize);
    let layers = g.layer_masses(center, max_hops)?;
    let mut cumulative = Vec::with_capacity(layers.len());
    let mut acc = T::zero();
    for m in layers {
        acc += m;
        cumulative.push(acc);
    }
    let samples = radii
        .iter()
        .map(|&r| {
            let k = (hop_limit(r) as usize).min(cumulative.len() - 1);
            (r, cumulative[k])
        })
        .collect();
    let exact_up_to = if g.has_frontier() {
        let dist = g.distances_from(center, Some(max_hops))?;
        g.vertices()
            .filter(|&v| g.is_frontier(v))
            .filter_map(|v| dist[v.0])
            .min()
            .map(|d| T::from_count(d as usize))
    } else {
        None
    };
    let curve = VolumeCurve { samples, exact_up_to };
    curve.assert_monotone()?;
    Ok(curve)
}

/// Weight of closed sample balls around sample point `center`.
pub fn cloud_volume_curve<T: Real>(cloud: &PointCloud<T>, center: usize, radii: &[T]) -> Result<VolumeCurve<T>> {
    check_sorted(radii.iter().copied())?;
    if center >= cloud.len() {
        return param(format!("center {center} outside the cloud"));
    }
    let d = cloud.distances_from(center);
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite distances"));
    let mut samples = Vec::with_capacity(radii.len());
    let (mut k, mut acc) = (0, T::zero());
    for &r in radii {
        while k < order.len() && d[order[k]] <= r {
            acc += cloud.weight(order[k]);
            k += 1;
        }
        samples.push((r, acc));
    }
    Ok(VolumeCurve {
        samples,
        exact_up_to: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClass {
    Polynomial,
    Exponential,
    Undetermined,
}

impl GrowthClass {
    pub fn name(self) -> &'static str {
        match self {
            GrowthClass::Polynomial => "polynomial",
            GrowthClass::Exponential => "exponential",
            GrowthClass::Undetermined => "undetermined",
        }
    }
}

/// Power-law fit `V(R) ~ v' R^alpha` over a radius range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit<T> {
    pub alpha_hat: T,
    /// Largest `V(R) / R^alpha_hat` over the fitted range.
    pub v_prime: T,
    /// Smallest sampled radius from which `V(R) <= v' R^alpha_hat` holds at
    /// every sample up to `r_max`.
    pub r0_prime: T,
    /// Upper end of the fitted range; the bound is certified only below it.
    pub r_max: T,
    /// Residual sum of squares of `log V` against `log R`.
    pub residual: T,
    /// Residual sum of squares of `log V` against `R`.
    pub residual_exponential: T,
    pub growth_class: GrowthClass,
}

impl<T: Real> GrowthFit<T> {
    /// `v' R^alpha_hat`.
    pub fn bound(&self, r: T) -> T {
        self.v_prime * r.powf(self.alpha_hat)
    }
}

/// Least-squares line `y = a + b x`; returns `(a, b, rss)`.
fn least_squares<T: Real>(xs: &[T], ys: &[T]) -> (T, T, T) {
    let n = T::from_count(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let (mut sxx, mut sxy) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let b = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    let a = my - b * mx;
    let rss = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let e = y - a - b * x;
            e * e
        })
        .sum();
    (a, b, rss)
}

/// Fits `log V` against `log R` on `rmin <= R <= rmax` and compares with an
/// exponential fit of `log V` against `R`; a class is declared only when
/// its residual is at most half the other's.
pub fn fit_growth<T: Real>(curve: &VolumeCurve<T>, fit_range: (T, T)) -> Result<GrowthFit<T>> {
    let (rmin, rmax) = fit_range;
    if !(rmin > T::zero() && rmax >= rmin) {
        return param("fit range must satisfy 0 < Rmin <= Rmax");
    }
    let in_range: Vec<(T, T)> = curve
        .samples
        .iter()
        .copied()
        .filter(|&(r, _)| r >= rmin && r <= rmax)
        .collect();
    if in_range.len() < 5 {
        return param(format!("need at least 5 samples in range, found {}", in_range.len()));
    }
    if in_range.iter().any(|&(_, v)| !(v > T::zero())) {
        return param("volumes in the fit range must be positive");
    }
    let log_r: Vec<T> = in_range.iter().map(|s| s.0.ln()).collect();
    let r: Vec<T> = in_range.iter().map(|s| s.0).collect();
    let log_v: Vec<T> = in_range.iter().map(|s| s.1.ln()).collect();
    let (_, alpha_hat, residual) = least_squares(&log_r, &log_v);
    let (_, _, residual_exponential) = least_squares(&r, &log_v);
    let two = T::lit(2.0);
    let growth_class = if two * residual_exponential < residual {
        GrowthClass::Exponential
    } else if two * residual < residual_exponential {
        GrowthClass::Polynomial
    } else {
        GrowthClass::Undetermined
    };

    let v_prime = in_range
        .iter()
        .map(|&(r, v)| v / r.powf(alpha_hat))
        .fold(T::zero(), T::max);
    let slack = T::one() + T::lit(1e-12);
    let holds = |&(r, v): &(T, T)| r <= T::zero() || v <= v_prime * r.powf(alpha_hat) * slack;
    let mut r0_prime = rmin;
    for (i, s) in curve.samples.iter().enumerate() {
        if s.0 > rmin {
            break;
        }
        let tail_ok = curve.samples[i..]
            .iter()
            .take_while(|t| t.0 <= rmax)
            .all(holds);
        if s.0 > T::zero() && tail_ok {
            r0_prime = s.0;
            break;
        }
    }
    Ok(GrowthFit {
        alpha_hat,
        v_prime,
        r0_prime,
        r_max: rmax,
        residual,
        residual_exponential,
        growth_class,
    })
}

/// Per-radius doubling constants `C_r = max_x mu(B(x, 2r)) / mu(B(x, r))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport<T> {
    pub entries: Vec<(T, T)>,
}

impl<T: Real> DoublingReport<T> {
    pub fn constant_at(&self, r: T) -> Option<T> {
        self.entries.iter().find(|e| e.0 == r).map(|e| e.1)
    }
}

fn doubling_from_curves<T: Real>(radii: &[T], curves: Vec<Vec<(T, T)>>) -> DoublingReport<T> {
    let entries = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let c = curves
                .iter()
                .map(|c| c[2 * k + 1].1 / c[2 * k].1)
                .fold(T::one(), T::max);
            (r, c)
        })
        .collect();
    DoublingReport { entries }
}

fn paired_radii<T: Real>(radii: &[T]) -> Result<Vec<T>> {
    if radii.iter().any(|&r| !(r > T::zero())) {
        return param("doubling radii must be positive");
    }
    let mut all: Vec<T> = radii.iter().flat_map(|&r| [r, r + r]).collect();
    all.sort_by(|a, b| a.partial_cmp(b).expect("finite radii"));
    all.dedup();
    Ok(all)
}

fn lookup<T: Real>(curve: &VolumeCurve<T>, radii: &[T]) -> Vec<(T, T)> {
    radii
        .iter()
        .flat_map(|&r| {
            let at = |x: T| {
                curve
                    .samples
                    .iter()
                    .find(|s| s.0 == x)
                    .expect("radius was requested")
                    .1
            };
            [(r, at(r)), (r + r, at(r + r))]
        })
        .collect()
}

/// Doubling constants of the graph over the given centers; the sweeps for
/// distinct centers run in parallel.
pub fn doubling_constants<T: Real>(g: &MMGraph<T>, centers: &[VertexId], radii: &[T]) -> Result<DoublingReport<T>> {
    let all = paired_radii(radii)?;
    let curves = centers
        .par_iter()
        .map(|&c| volume_curve(g, c, &all).map(|curve| lookup(&curve, radii)))
        .collect::<Result<Vec<_>>>()?;
    Ok(doubling_from_curves(radii, curves))
}

/// Doubling constants of a sample over the given center points.
pub fn cloud_doubling_constants<T: Real>(
    cloud: &PointCloud<T>,
    centers: &[usize],
    radii: &[T],
) -> Result<DoublingReport<T>> {
    let all = paired_radii(radii)?;
    let curves = centers
        .par_iter()
        .map(|&c| cloud_volume_curve(cloud, c, &all).map(|curve| lookup(&curve, radii)))
        .collect::<Result<Vec<_>>>()?;
    Ok(doubling_from_curves(radii, curves))
}

/// Bishop–Gromov doubling constant `2^n exp(2 (n-1) sqrt(kappa) r)` for
/// Ricci curvature bounded below by `-(n-1) kappa`.
pub fn bishop_gromov_doubling<T: Real>(n: u32, kappa: T, r: T) -> Result<T> {
    if n < 1 {
        return param("dimension must be >= 1");
    }
    if !(kappa >= T::zero()) || !(r > T::zero()) {
        return param("kappa must be >= 0 and r > 0");
    }
    let two = T::lit(2.0);
    Ok(two.powi(n as i32) * (two * T::from_count(n as usize - 1) * kappa.sqrt() * r).exp())
}
