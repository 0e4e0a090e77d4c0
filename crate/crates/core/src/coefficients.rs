//! Memory weights of the explicit time discretization of the Caputo
//! derivative: Grunwald-Letnikov, the L1-type quadrature (Liu), and their
//! distributed-order mixtures.
//!
//! Every variant is written in the unified form
//!
//! ```text
//! D u(t_n) ~ a(tau) (u^n - sum_{m=1}^{n} c_m u^{n-m} - gamma_n u^0)
//! ```
//!
//! with nonnegative `c_m` and `gamma_n + sum_{m=1}^{n} c_m = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::TimeMeasure;
use crate::special::gamma;

/// Which single-order quadrature the memory weights come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Gl,
    Liu,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gl" => Ok(Variant::Gl),
            "liu" => Ok(Variant::Liu),
            other => Err(Error::InvalidParameter(format!(
                "unknown variant {other:?}; use gl or liu"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Gl,
    Liu,
    DistributedGl,
    DistributedLiu,
}

/// Fractional time order: a single `beta` or a mixing measure over `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeOrder {
    Single(f64),
    Distributed(TimeMeasure),
}

/// A time discretization: the order (or order measure) and the quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeScheme {
    pub order: TimeOrder,
    pub variant: Variant,
}

const MASS_TOL: f64 = 1e-12;

impl TimeScheme {
    pub fn gl(beta: f64) -> Result<Self> {
        check_beta(beta, Variant::Gl)?;
        Ok(Self {
            order: TimeOrder::Single(beta),
            variant: Variant::Gl,
        })
    }

    pub fn liu(beta: f64) -> Result<Self> {
        check_beta(beta, Variant::Liu)?;
        Ok(Self {
            order: TimeOrder::Single(beta),
            variant: Variant::Liu,
        })
    }

    pub fn single(beta: f64, variant: Variant) -> Result<Self> {
        match variant {
            Variant::Gl => Self::gl(beta),
            Variant::Liu => Self::liu(beta),
        }
    }

    /// Distributed-order scheme. The measure must be a probability measure:
    /// the unified form only conserves mass when `mu` has unit total mass.
    pub fn distributed(mu: TimeMeasure, variant: Variant) -> Result<Self> {
        let mass = mu.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "time measure must have unit mass for the distributed scheme, got {mass}"
            )));
        }
        for (beta, _) in mu.components() {
            check_beta(beta, variant)?;
        }
        Ok(Self {
            order: TimeOrder::Distributed(mu),
            variant,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        match (&self.order, self.variant) {
            (TimeOrder::Single(_), Variant::Gl) => SchemeKind::Gl,
            (TimeOrder::Single(_), Variant::Liu) => SchemeKind::Liu,
            (TimeOrder::Distributed(_), Variant::Gl) => SchemeKind::DistributedGl,
            (TimeOrder::Distributed(_), Variant::Liu) => SchemeKind::DistributedLiu,
        }
    }

    /// `(beta, weight)` pairs; a single order is a unit point mass.
    pub fn components(&self) -> Vec<(f64, f64)> {
        match &self.order {
            TimeOrder::Single(beta) => vec![(*beta, 1.0)],
            TimeOrder::Distributed(mu) => mu.components().collect(),
        }
    }

    /// Smallest order in the scheme; it controls the stable time step.
    pub fn beta_min(&self) -> f64 {
        self.components().iter().map(|&(b, _)| b).fold(f64::INFINITY, f64::min)
    }

    /// Prefactor `a(tau)`.
    pub fn a_tau(&self, tau: f64) -> f64 {
        self.components()
            .iter()
            .fold(0.0, |acc, &(beta, w)| acc + w * prefactor(beta, tau, self.variant))
    }

    /// Weight `c_1` of the previous layer.
    pub fn c1(&self) -> f64 {
        self.components()
            .iter()
            .fold(0.0, |acc, &(beta, w)| acc + w * first_weight(beta, self.variant))
    }

    /// Largest `tau` with `Q(h) / a(tau) <= c_1`, i.e. with a nonnegative
    /// center jump weight. For a single order this is `(beta / Q)^{1/beta}`
    /// (GL) or `((2 - 2^{1-beta}) / (Gamma(2-beta) Q))^{1/beta}` (Liu).
    pub fn stability_bound(&self, q_total: f64) -> f64 {
        let parts = self.components();
        if let [(beta, w)] = parts.as_slice() {
            let g = match self.variant {
                Variant::Gl => 1.0,
                Variant::Liu => gamma(2.0 - beta),
            };
            let c1 = w * first_weight(*beta, self.variant);
            return (w * c1 / (g * q_total)).powf(1.0 / beta);
        }
        // a(tau) is decreasing in tau; bisect a(tau) c_1 = Q in log tau
        let c1 = self.c1();
        let f = |log_tau: f64| self.a_tau(log_tau.exp()) * c1 - q_total;
        let (mut lo, mut hi) = (-200.0f64, 50.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo.exp()
    }

    /// Coefficient table for `horizon` steps of size `tau`.
    pub fn table(&self, horizon: usize, tau: f64) -> Result<CoefficientTable> {
        if horizon < 1 {
            return Err(Error::InvalidParameter("coefficient horizon must be at least 1".into()));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau = {tau} must be positive")));
        }
        let mut c = vec![0.0; horizon];
        let mut g = vec![0.0; horizon + 1];
        for (beta, w) in self.components() {
            let (cb, gb) = match self.variant {
                Variant::Gl => gl_weights(beta, horizon),
                Variant::Liu => liu_weights(beta, horizon),
            };
            for (acc, v) in c.iter_mut().zip(&cb) {
                *acc += w * v;
            }
            for (acc, v) in g.iter_mut().zip(&gb) {
                *acc += w * v;
            }
        }
        Ok(CoefficientTable {
            kind: self.kind(),
            order: self.order.clone(),
            horizon,
            tau,
            a_tau: self.a_tau(tau),
            c,
            gamma: g,
        })
    }
}

fn check_beta(beta: f64, variant: Variant) -> Result<()> {
    let ok = match variant {
        Variant::Gl => beta > 0.0 && beta <= 1.0,
        Variant::Liu => beta > 0.0 && beta < 1.0,
    };
    if ok {
        Ok(())
    } else {
        let range = if variant == Variant::Gl { "(0, 1]" } else { "(0, 1)" };
        Err(Error::InvalidParameter(format!(
            "beta = {beta} must lie in {range} for {variant:?}"
        )))
    }
}

fn prefactor(beta: f64, tau: f64, variant: Variant) -> f64 {
    match variant {
        Variant::Gl => tau.powf(-beta),
        Variant::Liu => tau.powf(-beta) / gamma(2.0 - beta),
    }
}

fn first_weight(beta: f64, variant: Variant) -> f64 {
    match variant {
        Variant::Gl => beta,
        Variant::Liu => 2.0 - 2f64.powf(1.0 - beta),
    }
}

/// GL weights `c_l = |binom(beta, l)|` for `l = 1..=n` and
/// `gamma_n = sum_{l=0}^{n} (-1)^l binom(beta, l) = 1 - sum_{l=1}^{n} c_l`.
fn gl_weights(beta: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut c = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n + 1);
    g.push(1.0);
    let mut cl = beta;
    for l in 1..=n {
        c.push(cl);
        g.push(g[l - 1] - cl);
        cl *= (l as f64 - beta) / (l as f64 + 1.0);
    }
    (c, g)
}

/// L1 weights `gamma_m = (m+1)^{1-beta} - m^{1-beta}`, `c_k = gamma_{k-1} - gamma_k`.
fn liu_weights(beta: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let p = 1.0 - beta;
    let g: Vec<f64> = (0..=n)
        .map(|m| {
            if m == 0 {
                1.0
            } else {
                let m = m as f64;
                m.powf(p) * (p * (1.0 / m).ln_1p()).exp_m1()
            }
        })
        .collect();
    let c = (1..=n).map(|k| g[k - 1] - g[k]).collect();
    (c, g)
}

/// Memory weights for a fixed horizon and step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub kind: SchemeKind,
    pub order: TimeOrder,
    pub horizon: usize,
    pub tau: f64,
    pub a_tau: f64,
    /// `c_1 ..= c_n`
    c: Vec<f64>,
    /// `gamma_0 ..= gamma_n`
    gamma: Vec<f64>,
}

impl CoefficientTable {
    /// `c_l` for `1 <= l <= horizon`.
    pub fn c(&self, l: usize) -> f64 {
        assert!(l >= 1 && l <= self.horizon, "c index {l} outside 1..={}", self.horizon);
        self.c[l - 1]
    }

    /// `gamma_n` for `0 <= n <= horizon`.
    pub fn gamma(&self, n: usize) -> f64 {
        self.gamma[n]
    }

    pub fn c_values(&self) -> &[f64] {
        &self.c
    }

    pub fn gamma_values(&self) -> &[f64] {
        &self.gamma
    }

    pub fn c1(&self) -> f64 {
        self.c[0]
    }

    /// Weight on the initial layer when producing layer `n + 1` from
    /// layers `0..=n`. The first step uses `gamma_1 = 1 - c_1` because at
    /// `n = 0` the previous layer and the initial layer coincide.
    pub fn origin_weight(&self, n: usize) -> f64 {
        self.gamma[n.max(1)]
    }

    /// `c_2 ..= c_n`, the weights on layers `n - 1, ..., 1` when producing
    /// layer `n + 1`.
    pub fn memory_weights(&self, n: usize) -> &[f64] {
        if n < 2 {
            &[]
        } else {
            &self.c[1..n]
        }
    }

    /// Approximate Caputo derivative at `t_n` from samples `f(t_0), ..., f(t_n)`.
    pub fn caputo_apply(&self, samples: &[f64]) -> Result<f64> {
        if samples.is_empty() || samples.len() > self.horizon + 1 {
            return Err(Error::InvalidParameter(format!(
                "expected between 1 and {} samples, got {}",
                self.horizon + 1,
                samples.len()
            )));
        }
        let n = samples.len() - 1;
        let f0 = samples[0];
        // differences against f(t_0) keep constants exact
        let mut acc = samples[n] - f0;
        for m in 1..=n {
            acc -= self.c[m - 1] * (samples[n - m] - f0);
        }
        Ok(self.a_tau * acc)
    }
}

pub fn gl_coefficients(beta: f64, n: usize, tau: f64) -> Result<CoefficientTable> {
    TimeScheme::gl(beta)?.table(n, tau)
}

pub fn liu_coefficients(beta: f64, n: usize, tau: f64) -> Result<CoefficientTable> {
    TimeScheme::liu(beta)?.table(n, tau)
}

pub fn distributed_coefficients(mu: &TimeMeasure, variant: Variant, n: usize, tau: f64) -> Result<CoefficientTable> {
    TimeScheme::distributed(mu.clone(), variant)?.table(n, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::recip_gamma;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn gl_beta_one_is_markovian() {
        let t = gl_coefficients(1.0, 5, 0.1).unwrap();
        assert_eq!(t.c_values(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(t.gamma(0), 1.0);
        for n in 1..=5 {
            assert_eq!(t.gamma(n), 0.0);
        }
    }

    #[test]
    fn gl_half_small_horizon() {
        let t = gl_coefficients(0.5, 2, 0.1).unwrap();
        assert_eq!(t.c(1), 0.5);
        assert_eq!(t.c(2), 0.125);
        assert_eq!(t.gamma(1), 0.5);
        assert_eq!(t.gamma(2), 0.375);
        let t = gl_coefficients(0.5, 1, 0.1).unwrap();
        assert_eq!(t.gamma(0), 1.0);
        assert_relative_eq!(t.a_tau, 0.1f64.powf(-0.5));
    }

    #[test]
    fn gl_rejections() {
        assert!(gl_coefficients(0.0, 3, 0.1).is_err());
        assert!(gl_coefficients(1.5, 3, 0.1).is_err());
        assert!(gl_coefficients(0.5, 0, 0.1).is_err());
        assert!(gl_coefficients(0.5, 3, 0.0).is_err());
    }

    #[test]
    fn gl_recurrence_matches_gamma_quotients() {
        for &beta in &[0.1, 0.5, 0.9] {
            let t = gl_coefficients(beta, 50, 1.0).unwrap();
            for l in 1..=50 {
                // binom(beta, l) = Gamma(beta+1) / (Gamma(l+1) Gamma(beta-l+1))
                let direct = (gamma(beta + 1.0) * recip_gamma(beta - l as f64 + 1.0) / gamma(l as f64 + 1.0)).abs();
                assert_relative_eq!(t.c(l), direct, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn gl_gamma_matches_alternating_sum() {
        let beta = 0.3;
        let t = gl_coefficients(beta, 40, 1.0).unwrap();
        let mut binom = 1.0;
        let mut sum = 1.0;
        for l in 1..=40 {
            binom *= (beta - (l - 1) as f64) / l as f64;
            sum += if l % 2 == 0 { binom } else { -binom };
            assert_abs_diff_eq!(t.gamma(l), sum, epsilon = 1e-14);
        }
    }

    #[test]
    fn gl_partial_sums_approach_one() {
        let t = gl_coefficients(0.5, 10_000, 1.0).unwrap();
        let total: f64 = t.c_values().iter().sum();
        assert!(t.gamma(10_000) < 0.006);
        assert_abs_diff_eq!(total, 1.0 - t.gamma(10_000), epsilon = 1e-12);
        assert!(total < 1.0);
    }

    #[test]
    fn liu_examples() {
        let t = liu_coefficients(0.5, 1, 0.1).unwrap();
        assert_eq!(t.gamma(0), 1.0);
        assert_relative_eq!(t.gamma(1), 2f64.sqrt() - 1.0, max_relative = 1e-14);
        assert_relative_eq!(t.c(1), 2.0 - 2f64.sqrt(), max_relative = 1e-14);
        let t = liu_coefficients(0.5, 2, 0.1).unwrap();
        assert_relative_eq!(t.gamma(2), 3f64.sqrt() - 2f64.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(t.c(2), 0.0963764, max_relative = 1e-6);
        assert_relative_eq!(t.a_tau, 0.1f64.powf(-0.5) / gamma(1.5), max_relative = 1e-14);
        assert!(liu_coefficients(1.0, 3, 0.1).is_err());
        assert!(liu_coefficients(0.0, 3, 0.1).is_err());
    }

    #[test]
    fn liu_monotone_and_positive() {
        for i in 1..20 {
            let beta = i as f64 * 0.05;
            let t = liu_coefficients(beta, 300, 1.0).unwrap();
            for m in 1..=300 {
                assert!(t.gamma(m) < t.gamma(m - 1));
                assert!(t.c(m) > 0.0);
                let sum: f64 = t.c_values()[..m].iter().sum();
                assert_abs_diff_eq!(t.gamma(m) + sum, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn distributed_point_mass_reduces_bitwise() {
        let mu = TimeMeasure::point(0.5).unwrap();
        let d = distributed_coefficients(&mu, Variant::Gl, 20, 0.01).unwrap();
        let s = gl_coefficients(0.5, 20, 0.01).unwrap();
        assert_eq!(d.c_values(), s.c_values());
        assert_eq!(d.gamma_values(), s.gamma_values());
        assert_eq!(d.a_tau, s.a_tau);
        assert_eq!(d.kind, SchemeKind::DistributedGl);
        let ds = TimeScheme::distributed(mu, Variant::Gl).unwrap();
        assert_eq!(
            ds.stability_bound(3.7),
            TimeScheme::gl(0.5).unwrap().stability_bound(3.7)
        );
    }

    #[test]
    fn distributed_two_atoms() {
        let mu = TimeMeasure::atomic(&[(0.25, 0.5), (0.75, 0.5)]).unwrap();
        let d = distributed_coefficients(&mu, Variant::Gl, 5, 0.1).unwrap();
        assert_abs_diff_eq!(d.c1(), 0.5, epsilon = 1e-15);
        let expected_a = 0.5 * 0.1f64.powf(-0.25) + 0.5 * 0.1f64.powf(-0.75);
        assert_relative_eq!(d.a_tau, expected_a, max_relative = 1e-14);
    }

    #[test]
    fn distributed_beta_one_and_rejections() {
        let mu = TimeMeasure::point(1.0).unwrap();
        let d = distributed_coefficients(&mu, Variant::Gl, 3, 0.1).unwrap();
        assert_eq!(d.c_values(), &[1.0, 0.0, 0.0]);
        assert_eq!(&d.gamma_values()[1..], &[0.0, 0.0, 0.0]);
        assert!(distributed_coefficients(&mu, Variant::Liu, 3, 0.1).is_err());
        let heavy = TimeMeasure::atomic(&[(0.5, 2.0)]).unwrap();
        assert!(distributed_coefficients(&heavy, Variant::Gl, 3, 0.1).is_err());
    }

    #[test]
    fn distributed_stability_bound_saturates() {
        let mu = TimeMeasure::atomic(&[(0.3, 0.4), (0.8, 0.6)]).unwrap();
        for variant in [Variant::Gl, Variant::Liu] {
            let s = TimeScheme::distributed(mu.clone(), variant).unwrap();
            let q = 12.5;
            let tau = s.stability_bound(q);
            assert_relative_eq!(s.a_tau(tau) * s.c1(), q, max_relative = 1e-12);
        }
    }

    #[test]
    fn origin_and_memory_weights() {
        let t = gl_coefficients(0.5, 4, 1.0).unwrap();
        assert_eq!(t.origin_weight(0), t.gamma(1));
        assert_eq!(t.origin_weight(3), t.gamma(3));
        assert!(t.memory_weights(1).is_empty());
        assert_eq!(t.memory_weights(3), &[t.c(2), t.c(3)]);
        for n in 0..4 {
            let total = t.origin_weight(n) + t.c1() + t.memory_weights(n).iter().sum::<f64>();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn caputo_constant_is_exactly_zero() {
        let t = gl_coefficients(0.4, 10, 0.1).unwrap();
        assert_eq!(t.caputo_apply(&[3.25; 11]).unwrap(), 0.0);
        assert!(t.caputo_apply(&[1.0; 12]).is_err());
        assert!(t.caputo_apply(&[]).is_err());
    }

    #[test]
    fn caputo_beta_one_is_backward_difference() {
        for &n in &[4usize, 10, 37] {
            let tau = 1.0 / n as f64;
            let t = gl_coefficients(1.0, n, tau).unwrap();
            let f: Vec<f64> = (0..=n).map(|i| (i as f64 * tau).powi(2)).collect();
            assert_relative_eq!(t.caputo_apply(&f).unwrap(), 2.0 - tau, max_relative = 1e-12);
        }
    }

    /// Closed form: Caputo derivative of `t` is `t^{1-beta} / Gamma(2-beta)`.
    fn caputo_errors(variant: Variant, beta: f64) -> Vec<f64> {
        let exact = 1.0 / gamma(2.0 - beta);
        [64usize, 128, 256]
            .iter()
            .map(|&n| {
                let tau = 1.0 / n as f64;
                let t = TimeScheme::single(beta, variant).unwrap().table(n, tau).unwrap();
                let f: Vec<f64> = (0..=n).map(|i| i as f64 * tau).collect();
                (t.caputo_apply(&f).unwrap() - exact).abs()
            })
            .collect()
    }

    #[test]
    fn caputo_gl_first_order() {
        let e = caputo_errors(Variant::Gl, 0.5);
        let order = (e[0] / e[1]).log2();
        let order2 = (e[1] / e[2]).log2();
        assert!((0.8..=1.2).contains(&order), "order {order}");
        assert!((0.8..=1.2).contains(&order2), "order {order2}");
        let t = gl_coefficients(0.5, 256, 1.0 / 256.0).unwrap();
        let f: Vec<f64> = (0..=256).map(|i| i as f64 / 256.0).collect();
        assert_abs_diff_eq!(
            t.caputo_apply(&f).unwrap(),
            2.0 / std::f64::consts::PI.sqrt(),
            epsilon = 5e-3
        );
    }

    #[test]
    fn caputo_liu_exact_for_linear() {
        // the L1 quadrature is exact on piecewise linear functions
        let e = caputo_errors(Variant::Liu, 0.5);
        assert!(e.iter().all(|&x| x < 1e-12), "{e:?}");
    }

    proptest! {
        #[test]
        fn gl_identity_and_positivity(beta in 0.01f64..0.99, n in 1usize..400) {
            let t = gl_coefficients(beta, n, 1.0).unwrap();
            let tail: f64 = t.c_values()[1..].iter().sum();
            prop_assert!((t.gamma(n) + tail - (1.0 - t.c1())).abs() <= 1e-12);
            prop_assert!(t.c_values().iter().all(|&c| c > 0.0));
            for m in 1..=n {
                prop_assert!(t.gamma(m) < t.gamma(m - 1));
            }
        }

        #[test]
        fn distributed_linear_in_measure(b1 in 0.05f64..1.0, b2 in 0.05f64..1.0,
                                         w in 0.05f64..0.95, n in 1usize..60) {
            let mu = TimeMeasure::atomic(&[(b1, w), (b2, 1.0 - w)]).unwrap();
            let mix = distributed_coefficients(&mu, Variant::Gl, n, 0.01).unwrap();
            let t1 = gl_coefficients(b1, n, 0.01).unwrap();
            let t2 = gl_coefficients(b2, n, 0.01).unwrap();
            for l in 1..=n {
                prop_assert!((mix.c(l) - (w * t1.c(l) + (1.0 - w) * t2.c(l))).abs() <= 1e-12);
                prop_assert!((mix.gamma(l) - (w * t1.gamma(l) + (1.0 - w) * t2.gamma(l))).abs() <= 1e-12);
            }
            let a = w * t1.a_tau + (1.0 - w) * t2.a_tau;
            prop_assert!((mix.a_tau - a).abs() <= 1e-12 * a);
        }
    }
}
