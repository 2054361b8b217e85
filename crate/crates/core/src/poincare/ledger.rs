use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::growth::bishop_gromov_doubling;
use crate::scalar::Real;

/// Product of Bishop–Gromov doubling constants over the radii
/// `13 eps / 2, 13 eps / 4, ..., 13 eps / 32`: an upper bound on the
/// multiplicity of the covering of an `eps`-discretization.
pub fn multiplicity_bound<T: Real>(n: u32, kappa: T, epsilon: T) -> Result<T> {
    if !(epsilon > T::zero()) {
        return param("epsilon must be positive");
    }
    let mut prod = T::one();
    let base = T::lit(13.0) * epsilon;
    for k in 1..=5 {
        prod *= bishop_gromov_doubling(n, kappa, base / T::lit(f64::from(1u32 << k)))?;
    }
    Ok(prod)
}

/// Local Poincaré constant `C(n, sigma, R)` on balls of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LocalPoincare<T> {
    /// `2^n exp((n - 1) k R) R^sigma` with `k = sqrt(kappa)`, or `k = kappa`
    /// when `sqrt_kappa` is false.
    Buser { sqrt_kappa: bool },
    /// A fixed constant for every radius.
    Constant { value: T },
}

impl<T: Real> LocalPoincare<T> {
    pub fn buser() -> Self {
        LocalPoincare::Buser { sqrt_kappa: true }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LocalPoincare::Buser { sqrt_kappa: true } => "buser-sqrt-kappa",
            LocalPoincare::Buser { sqrt_kappa: false } => "buser-kappa",
            LocalPoincare::Constant { .. } => "constant",
        }
    }

    pub fn eval(&self, n: u32, kappa: T, sigma: T, r: T) -> T {
        match *self {
            LocalPoincare::Buser { sqrt_kappa } => {
                let k = if sqrt_kappa { kappa.sqrt() } else { kappa };
                T::lit(2.0).powi(n as i32) * (T::from_count(n as usize - 1) * k * r).exp() * r.powf(sigma)
            }
            LocalPoincare::Constant { value } => value,
        }
    }
}

/// Where the smoothing constants `(T, T')` come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SmoothingSource<T> {
    /// Measured on a sample by `smoothing_gradient_bound`.
    Empirical { t: T, tprime: T },
    /// Supplied by hand.
    PlugIn { t: T, tprime: T },
}

impl<T: Real> SmoothingSource<T> {
    fn values(&self) -> (T, T) {
        match *self {
            SmoothingSource::Empirical { t, tprime } | SmoothingSource::PlugIn { t, tprime } => (t, tprime),
        }
    }

    /// Plug-in with `T' = 1 + 6 eps`.
    pub fn anchored(t: T, epsilon: T) -> Self {
        SmoothingSource::PlugIn {
            t,
            tprime: T::one() + T::lit(6.0) * epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerInputs<T> {
    pub n: u32,
    pub kappa: T,
    pub epsilon: T,
    pub sigma: T,
    pub beta: T,
    pub r0: T,
    /// Onset of the discrete inequality; in practice the measured `R0'`.
    pub r1: T,
    pub v_prime: T,
    /// Outer dilation `C'` of the discrete inequality.
    pub outer_factor: T,
    pub local_poincare: Option<LocalPoincare<T>>,
    pub smoothing: SmoothingSource<T>,
}

/// Every constant of the chain transferring a discrete Poincaré inequality
/// back to the manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantLedger<T> {
    pub inputs: LedgerInputs<T>,
    pub local_poincare_name: String,
    pub m_eps: T,
    pub t: T,
    pub tprime: T,
    pub c_local: T,
    pub c1: T,
    pub c2: T,
    pub c3: T,
    /// `6^(sigma-1) v'`.
    pub c_graph: T,
    pub c4: T,
    pub c5: T,
    pub r1_big: T,
    pub k1: T,
    pub k2: T,
    pub k: T,
    pub c_dprime: T,
}

/// Result of recomputing one defining equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerCheck {
    pub field: &'static str,
    pub holds: bool,
}

const K1_GRID: usize = 1024;

fn sup_on_interval<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T) -> T {
    if lo > hi {
        return T::zero();
    }
    (0..=K1_GRID)
        .map(|i| lo + (hi - lo) * T::from_count(i) / T::from_count(K1_GRID))
        .map(f)
        .fold(T::zero(), T::max)
}

/// Evaluates the constant chain. Fails with a configuration error when no
/// local Poincaré plug-in is given.
pub fn constant_ledger<T: Real>(inputs: &LedgerInputs<T>) -> Result<ConstantLedger<T>> {
    let lp = inputs
        .local_poincare
        .ok_or_else(|| Error::Configuration("no local Poincaré plug-in supplied".into()))?;
    let LedgerInputs {
        n,
        kappa,
        epsilon,
        sigma,
        beta,
        r0,
        r1,
        v_prime,
        outer_factor,
        ..
    } = *inputs;
    if n < 1 || !(kappa >= T::zero()) || !(epsilon > T::zero()) {
        return param("need n >= 1, kappa >= 0, epsilon > 0");
    }
    if !(sigma >= T::one()) || !(beta >= T::zero()) || !(r0 > T::zero()) {
        return param("need sigma >= 1, beta >= 0, r0 > 0");
    }
    let (t, tprime) = inputs.smoothing.values();
    let two = T::lit(2.0);
    let m_eps = multiplicity_bound(n, kappa, epsilon)?;
    let c_local = lp.eval(n, kappa, sigma, epsilon);
    let c1 = two.powf(sigma - T::one()) * c_local;
    let c2 = c1 * m_eps;
    let c3 = T::lit(4.0);
    let c_graph = T::lit(6.0).powf(sigma - T::one()) * v_prime;
    let c4 = two.powf(sigma - T::one()) * c_graph * t.powf(sigma) * c3.powf(beta);
    let c5 = c2.max(c4);
    let r1_big = epsilon.max(r1);
    let k1 = sup_on_interval(|r| lp.eval(n, kappa, sigma, r), r0, r1_big) / r0.powf(beta);
    let k2 = two.powf(sigma) * (c5 / epsilon.powf(beta) + c5);
    let k = k1.max(k2);
    let c_dprime = T::lit(4.0) * outer_factor * tprime + T::lit(5.0);
    Ok(ConstantLedger {
        inputs: *inputs,
        local_poincare_name: lp.name().to_string(),
        m_eps,
        t,
        tprime,
        c_local,
        c1,
        c2,
        c3,
        c_graph,
        c4,
        c5,
        r1_big,
        k1,
        k2,
        k,
        c_dprime,
    })
}

impl<T: Real> ConstantLedger<T> {
    /// Recomputes every defining equality from the stored fields.
    pub fn check(&self) -> Vec<LedgerCheck> {
        let i = &self.inputs;
        let two = T::lit(2.0);
        let lp = i.local_poincare.expect("ledger was built with a plug-in");
        let rows = [
            ("m_eps", multiplicity_bound(i.n, i.kappa, i.epsilon).ok() == Some(self.m_eps)),
            ("c1", self.c1 == two.powf(i.sigma - T::one()) * lp.eval(i.n, i.kappa, i.sigma, i.epsilon)),
            ("c2", self.c2 == self.c1 * self.m_eps),
            ("c3", self.c3 == T::lit(4.0)),
            ("c_graph", self.c_graph == T::lit(6.0).powf(i.sigma - T::one()) * i.v_prime),
            (
                "c4",
                self.c4 == two.powf(i.sigma - T::one()) * self.c_graph * self.t.powf(i.sigma) * self.c3.powf(i.beta),
            ),
            ("c5", self.c5 == self.c2.max(self.c4)),
            ("r1_big", self.r1_big == i.epsilon.max(i.r1)),
            (
                "k1",
                self.k1 == sup_on_interval(|r| lp.eval(i.n, i.kappa, i.sigma, r), i.r0, self.r1_big) / i.r0.powf(i.beta),
            ),
            ("k2", self.k2 == two.powf(i.sigma) * (self.c5 / i.epsilon.powf(i.beta) + self.c5)),
            ("k", self.k == self.k1.max(self.k2)),
            ("c_dprime", self.c_dprime == T::lit(4.0) * i.outer_factor * self.tprime + T::lit(5.0)),
        ];
        rows.into_iter().map(|(field, holds)| LedgerCheck { field, holds }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn inputs() -> LedgerInputs<f64> {
        LedgerInputs {
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
            smoothing: SmoothingSource::anchored(2.0, 1.0),
        }
    }

    #[test]
    fn multiplicity_examples() {
        for eps in [0.01, 1.0, 40.0] {
            assert_eq!(multiplicity_bound(2, 0.0, eps).unwrap(), 1024.0);
            assert_eq!(multiplicity_bound(1, 0.0, eps).unwrap(), 32.0);
        }
        let oracle: f64 = (1..=5).map(|k| 4.0 * (2.0 * 13.0 / 2f64.powi(k)).exp()).product();
        assert_relative_eq!(multiplicity_bound(2, 1.0, 1.0).unwrap(), oracle, max_relative = 1e-12);
    }

    #[test]
    fn c_double_prime_is_89() {
        let l = constant_ledger(&inputs()).unwrap();
        assert_eq!(l.tprime, 7.0);
        assert_eq!(l.c_dprime, 89.0);
    }

    #[test]
    fn k2_at_unit_epsilon_and_sigma_one() {
        let l = constant_ledger(&inputs()).unwrap();
        assert_eq!(l.k2, 4.0 * l.c5);
    }

    #[test]
    fn full_record() {
        let l = constant_ledger(&inputs()).unwrap();
        // 2^2 * 1 * eps^1 = 4 at eps = 1.
        assert_eq!(l.c_local, 4.0);
        assert_eq!(l.c1, 4.0);
        assert_eq!(l.c2, 4096.0);
        assert_eq!(l.c_graph, 3.0);
        assert_eq!(l.c4, 3.0 * 2.0 * 16.0);
        assert_eq!(l.c5, 4096.0);
        assert_eq!(l.r1_big, 3.0);
        assert_eq!(l.k1, 12.0);
        assert_eq!(l.k2, 16384.0);
        assert_eq!(l.k, 16384.0);
        assert!(l.check().iter().all(|c| c.holds));
    }

    #[test]
    fn missing_plug_in_is_a_configuration_error() {
        let err = constant_ledger(&LedgerInputs {
            local_poincare: None,
            ..inputs()
        })
        .unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }

    #[test]
    fn kappa_convention_is_selectable() {
        let a = LocalPoincare::Buser { sqrt_kappa: true }.eval(3, 4.0, 1.0, 1.0);
        let b = LocalPoincare::Buser { sqrt_kappa: false }.eval(3, 4.0, 1.0, 1.0);
        assert_relative_eq!(a, 8.0 * 4f64.exp(), max_relative = 1e-12);
        assert_relative_eq!(b, 8.0 * 8f64.exp(), max_relative = 1e-12);
    }
}
