//! Gamma function, the hypersingular normalizing constant, and the
//! one-parameter Mittag-Leffler function on the nonpositive real axis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use statrs::function::gamma::{gamma, ln_gamma};

/// `1 / Gamma(y)`, exact zero at the poles `y = 0, -1, -2, ...`.
pub fn recip_gamma(y: f64) -> f64 {
    if y <= 0.0 && y == y.round() {
        return 0.0;
    }
    if y < 0.5 {
        (PI * y).sin() * gamma(1.0 - y) / PI
    } else {
        1.0 / gamma(y)
    }
}

/// Normalizing constant of the hypersingular operator of order `alpha` in
/// dimension `dim`, chosen so that its symbol is `-|xi|^alpha`.
pub fn b_alpha(alpha: f64, dim: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 2)")));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let d = dim as f64;
    let num = alpha * gamma(alpha / 2.0) * gamma((d + alpha) / 2.0) * (alpha * PI / 2.0).sin();
    let den = 2f64.powf(2.0 - alpha) * PI.powf(1.0 + d / 2.0);
    Ok(num / den)
}

/// Evaluation policy for [`mittag_leffler`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlConfig {
    /// Largest `|z|` for which the power series is considered.
    pub series_cutoff: f64,
    /// Maximum number of terms of the asymptotic expansion.
    pub asymptotic_terms: usize,
    pub target_rel_err: f64,
}

impl Default for MlConfig {
    fn default() -> Self {
        Self {
            series_cutoff: 5.0,
            asymptotic_terms: 100,
            target_rel_err: 1e-8,
        }
    }
}

impl MlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_cutoff > 0.0) {
            return Err(Error::InvalidParameter("series_cutoff must be positive".into()));
        }
        if self.asymptotic_terms == 0 {
            return Err(Error::InvalidParameter("asymptotic_terms must be positive".into()));
        }
        if !(self.target_rel_err > 0.0 && self.target_rel_err <= 1e-6) {
            return Err(Error::InvalidParameter("target_rel_err must lie in (0, 1e-6]".into()));
        }
        Ok(())
    }
}

/// Which evaluation route produced a Mittag-Leffler value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlRoute {
    Exact,
    Series,
    Asymptotic,
    Integral,
}

/// `E_beta(z)` for `0 < beta <= 1` and `z <= 0`.
pub fn mittag_leffler(beta: f64, z: f64, cfg: &MlConfig) -> Result<f64> {
    mittag_leffler_traced(beta, z, cfg).map(|(v, _)| v)
}

/// Like [`mittag_leffler`], also reporting the route taken.
pub fn mittag_leffler_traced(beta: f64, z: f64, cfg: &MlConfig) -> Result<(f64, MlRoute)> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must lie in (0, 1]")));
    }
    if !(z <= 0.0) {
        return Err(Error::InvalidParameter(format!("argument z = {z} must be nonpositive")));
    }
    if z == 0.0 {
        return Ok((1.0, MlRoute::Exact));
    }
    if beta == 1.0 {
        return Ok((z.exp(), MlRoute::Exact));
    }
    let x = -z;
    let target = cfg.target_rel_err;
    let floor = lower_bound(beta, x);

    if x <= cfg.series_cutoff && series_peak(beta, x) * TERM_REL_ERR <= 0.1 * target * floor {
        return Ok((ml_series(beta, z), MlRoute::Series));
    }
    let (value, err) = ml_asymptotic(beta, z, cfg.asymptotic_terms);
    if value > 0.0 && err <= 0.1 * target * value {
        return Ok((value, MlRoute::Asymptotic));
    }
    Ok((ml_integral(beta, z, target), MlRoute::Integral))
}

/// Relative accuracy of a single series term, set by the Lanczos log-gamma.
const TERM_REL_ERR: f64 = 2e-13;

/// `1 / (1 + Gamma(1 - beta) x) <= E_beta(-x)` for `0 < beta < 1`, `x >= 0`.
fn lower_bound(beta: f64, x: f64) -> f64 {
    1.0 / (1.0 + gamma(1.0 - beta) * x)
}

/// Largest term magnitude `x^k / Gamma(1 + beta k)` of the power series.
fn series_peak(beta: f64, x: f64) -> f64 {
    let lnx = x.ln();
    let mut best = 0.0f64;
    let mut k = 0usize;
    loop {
        let lt = k as f64 * lnx - ln_gamma(1.0 + beta * k as f64);
        best = best.max(lt);
        if k > 0 && lt < best - 40.0 {
            return best.exp();
        }
        if k > 100_000 || best > 700.0 {
            return f64::INFINITY;
        }
        k += 1;
    }
}

/// Power series `sum_k z^k / Gamma(1 + beta k)`, summed until terms are
/// negligible. Accurate only while the largest term stays moderate.
pub fn ml_series(beta: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    let x = z.abs();
    let lnx = x.ln();
    let sign = z.signum();
    let mut sum = 1.0;
    let mut peak = 0.0f64;
    for k in 1..200_000usize {
        let kf = k as f64;
        let lt = kf * lnx - ln_gamma(1.0 + beta * kf);
        peak = peak.max(lt);
        let mag = lt.exp();
        sum += if k % 2 == 1 { sign * mag } else { mag };
        if lt < peak - 40.0 && mag < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Optimally truncated asymptotic expansion
/// `E_beta(z) ~ -sum_{k>=1} z^{-k} / Gamma(1 - beta k)` for `z -> -inf`.
/// Returns the value and the magnitude of the first omitted nonzero term.
pub fn ml_asymptotic(beta: f64, z: f64, max_terms: usize) -> (f64, f64) {
    let x = -z;
    let mut sum = 0.0;
    let mut last_mag = f64::INFINITY;
    for k in 1..=max_terms {
        let rg = recip_gamma(1.0 - beta * k as f64);
        if rg == 0.0 {
            continue;
        }
        // -z^{-k} = -(-1)^k x^{-k}
        let mag = (x.powi(-(k as i32)) * rg).abs();
        if !mag.is_finite() || mag > last_mag {
            return (sum, last_mag);
        }
        let term = -(if k % 2 == 0 { 1.0 } else { -1.0 }) * x.powi(-(k as i32)) * rg;
        sum += term;
        last_mag = mag;
    }
    (sum, last_mag)
}

/// `E_beta(-x) = int_0^inf exp(-r x^{1/beta}) K_beta(r) dr` with the
/// positive spectral density
/// `K_beta(r) = sin(beta pi) r^{beta-1} / (pi (r^{2 beta} + 2 r^beta cos(beta pi) + 1))`,
/// integrated by the trapezoidal rule after `r = e^u x^{-1/beta}`.
/// Valid for `0 < beta < 1`.
pub fn ml_integral(beta: f64, z: f64, target_rel_err: f64) -> f64 {
    let x = -z;
    if x == 0.0 {
        return 1.0;
    }
    let (s, c) = (beta * PI).sin_cos();
    let tol = 1e-3 * target_rel_err * lower_bound(beta, x);
    // y = r^beta = e^{beta u} / x; integrand in u:
    // exp(-e^u) (s / pi) y / (y^2 + 2 y c + 1)
    let integrand = |u: f64| {
        let y = (beta * u - x.ln()).exp();
        (-u.exp()).exp() * (s / PI) * y / ((y + c) * (y + c) + s * s)
    };
    // left tail ~ (s / (pi beta)) y_lo, added in closed form
    let y_lo = tol * PI * beta / s;
    let u_lo = (y_lo.ln() + x.ln()) / beta;
    let u_hi = 46f64.ln();
    // the integrand is analytic in |Im u| < min(pi (1 - beta) / beta, pi / 2)
    let strip = 0.9 * (PI * (1.0 - beta) / beta).min(PI / 2.0);
    let step = 2.0 * PI * strip / ((1.0 / tol).ln() + 3.0);
    let n = ((u_hi - u_lo) / step).ceil().max(16.0) as usize;
    let du = (u_hi - u_lo) / n as f64;
    let mut sum = 0.5 * (integrand(u_lo) + integrand(u_hi));
    for i in 1..n {
        sum += integrand(u_lo + i as f64 * du);
    }
    let left_tail = (s / (PI * beta)) * (beta * u_lo - x.ln()).exp();
    sum * du + left_tail
}
