//! Lattice jump weights of the hypersingular operator on `h Z^d`.
//!
//! `d_k = 2 sum_i w_i b(alpha_i, d) h^{-alpha_i} |k|^{-(d + alpha_i)}` for
//! `0 < |k| <= K`, and the one-step probabilities are `q_k = d_k / a(tau)`
//! with `q_0 = c_1 - sum_{k != 0} q_k`.

use serde::Serialize;

use crate::coefficients::{TimeScheme, Variant};
use crate::error::{Error, Result};
use crate::measures::SpectralMeasure;
use crate::special::b_alpha;

/// Largest admissible tail-to-total ratio when none is given.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 0.1;

/// Values of `q_0` in `(-ROUNDING_SLACK, 0)` are treated as zero so that
/// a step exactly at the stability bound is accepted.
const ROUNDING_SLACK: f64 = 1e-13;

pub fn default_trunc_k(dim: usize) -> usize {
    match dim {
        1 => 64,
        2 => 32,
        _ => 16,
    }
}

/// Lattice offset, padded with zeros beyond the dimension.
pub type Site = [i64; 3];

/// Visits every `k != 0` with `|k| <= trunc_k` in the half space
/// `k > 0` (lexicographic on the first nonzero coordinate), in a fixed order.
fn for_each_half_ball(dim: usize, trunc_k: usize, mut f: impl FnMut(Site, i64)) {
    let kk = trunc_k as i64;
    let r2max = kk * kk;
    let span = |active: bool| if active { -kk..=kk } else { 0..=0 };
    for k0 in span(true) {
        for k1 in span(dim >= 2) {
            for k2 in span(dim >= 3) {
                let k = [k0, k1, k2];
                let lead = k.iter().copied().find(|&c| c != 0);
                if !matches!(lead, Some(c) if c > 0) {
                    continue;
                }
                let r2 = k0 * k0 + k1 * k1 + k2 * k2;
                if r2 <= r2max {
                    f(k, r2);
                }
            }
        }
    }
}

/// Neumaier summation; keeps `q_0 + sum q_k = c_1` at the ulp level for
/// kernels with many small weights.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn dot(k: &Site, xi: &[f64]) -> f64 {
    k.iter().zip(xi).map(|(&a, &b)| a as f64 * b).sum()
}

fn surface_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    }
}

/// Upper estimate of `sum_{|k| > K} |k|^{-(d + alpha)}` by the integral over
/// `|x| > K - sqrt(d)/2`.
fn tail_sum_bound(dim: usize, alpha: f64, trunc_k: usize) -> f64 {
    let r = trunc_k as f64 - 0.5 * (dim as f64).sqrt();
    surface_area(dim) * r.powf(-alpha) / alpha
}

fn check_grid(dim: usize, h: f64, trunc_k: usize) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!("dimension {dim} not in 1..=3")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("h = {h} must be positive")));
    }
    if trunc_k < 8 {
        return Err(Error::InvalidParameter(format!(
            "truncation radius {trunc_k} must be at least 8"
        )));
    }
    Ok(())
}

fn check_xi(dim: usize, xi: &[f64]) -> Result<()> {
    if xi.len() != dim {
        return Err(Error::InvalidParameter(format!(
            "frequency has {} components, lattice dimension is {dim}",
            xi.len()
        )));
    }
    Ok(())
}

/// Spatial part of the kernel: the weights `d_k`, independent of time.
#[derive(Debug, Clone)]
pub struct JumpWeights {
    dim: usize,
    h: f64,
    trunc_k: usize,
    /// `(k, d_k)` over the half ball; `d_{-k} = d_k`.
    half: Vec<(Site, f64)>,
    q_total: f64,
    tail_estimate: f64,
}

impl JumpWeights {
    /// Truncates at radius `trunc_k` and fails when the estimated tail of
    /// `Q(h)` exceeds `tail_tolerance` times the retained part.
    pub fn build(rho: &SpectralMeasure, dim: usize, h: f64, trunc_k: usize, tail_tolerance: f64) -> Result<Self> {
        check_grid(dim, h, trunc_k)?;
        let parts: Vec<(f64, f64)> = rho
            .components()
            .map(|(alpha, w)| Ok((alpha, 2.0 * w * b_alpha(alpha, dim)? * h.powf(-alpha))))
            .collect::<Result<_>>()?;
        let mut half = Vec::new();
        let mut sum = 0.0;
        for_each_half_ball(dim, trunc_k, |k, r2| {
            let r = (r2 as f64).sqrt();
            let v: f64 = parts.iter().map(|&(alpha, c)| c * r.powf(-(dim as f64 + alpha))).sum();
            sum += v;
            half.push((k, v));
        });
        let q_total = 2.0 * sum;
        let tail_estimate: f64 = parts
            .iter()
            .map(|&(alpha, c)| c * tail_sum_bound(dim, alpha, trunc_k))
            .sum();
        let ratio = tail_estimate / q_total;
        if ratio > tail_tolerance {
            return Err(Error::TruncationTooCoarse {
                tail: tail_estimate,
                ratio,
                tolerance: tail_tolerance,
            });
        }
        Ok(Self {
            dim,
            h,
            trunc_k,
            half,
            q_total,
            tail_estimate,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn trunc_k(&self) -> usize {
        self.trunc_k
    }

    /// Truncated `Q(h) = sum_{k != 0} d_k`.
    pub fn q_total(&self) -> f64 {
        self.q_total
    }

    /// Estimated `sum_{|k| > K} d_k`.
    pub fn tail_estimate(&self) -> f64 {
        self.tail_estimate
    }

    pub fn half_entries(&self) -> &[(Site, f64)] {
        &self.half
    }

    /// `d_k` for an arbitrary offset (zero outside the ball, `-Q` at the origin).
    pub fn d(&self, k: &[i64]) -> f64 {
        let mut key = [0i64; 3];
        key[..k.len()].copy_from_slice(k);
        if key == [0; 3] {
            return -self.q_total;
        }
        let neg = key.map(|c| -c);
        self.half
            .iter()
            .find(|(s, _)| *s == key || *s == neg)
            .map_or(0.0, |&(_, v)| v)
    }

    /// `d_hat(h xi) = sum_k d_k e^{i k h xi}`; real, nonpositive, zero at `xi = 0`.
    pub fn symbol(&self, xi: &[f64]) -> Result<f64> {
        check_xi(self.dim, xi)?;
        let hx: Vec<f64> = xi.iter().map(|x| x * self.h).collect();
        let s: f64 = self.half.iter().map(|(k, v)| v * (dot(k, &hx).cos() - 1.0)).sum();
        Ok(2.0 * s)
    }
}

/// Time-dependent one-step weights `q_k` for a fixed `tau`.
#[derive(Debug, Clone)]
pub struct LatticeKernel {
    jumps: JumpWeights,
    tau: f64,
    a_tau: f64,
    c1: f64,
    q0: f64,
    tau_max: f64,
    /// `q_k` aligned with `jumps.half`.
    q_half: Vec<f64>,
}

impl LatticeKernel {
    /// Always constructible; an unstable `tau` leaves `q_0 < 0`, which
    /// `check_stability` and every consumer refuse.
    pub fn new(jumps: JumpWeights, scheme: &TimeScheme, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau = {tau} must be positive")));
        }
        let a_tau = scheme.a_tau(tau);
        let c1 = scheme.c1();
        let q_half: Vec<f64> = jumps.half.iter().map(|&(_, v)| v / a_tau).collect();
        let mut q0 = c1 - 2.0 * compensated_sum(q_half.iter().copied());
        if q0 < 0.0 && q0 > -ROUNDING_SLACK * c1 {
            q0 = 0.0;
        }
        let tau_max = scheme.stability_bound(jumps.q_total);
        Ok(Self {
            jumps,
            tau,
            a_tau,
            c1,
            q0,
            tau_max,
            q_half,
        })
    }

    pub fn jumps(&self) -> &JumpWeights {
        &self.jumps
    }

    pub fn dim(&self) -> usize {
        self.jumps.dim
    }

    pub fn h(&self) -> f64 {
        self.jumps.h
    }

    pub fn trunc_k(&self) -> usize {
        self.jumps.trunc_k
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn a_tau(&self) -> f64 {
        self.a_tau
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn q_total(&self) -> f64 {
        self.jumps.q_total
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn is_stable(&self) -> bool {
        self.q0 >= 0.0
    }

    pub fn check_stability(&self) -> Result<()> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(Error::StabilityViolation {
                q0: self.q0,
                tau: self.tau,
                tau_max: self.tau_max,
            })
        }
    }

    /// `(k, q_k)` over the half ball, `q_{-k} = q_k`.
    pub fn half_weights(&self) -> impl Iterator<Item = (Site, f64)> + '_ {
        self.jumps.half.iter().map(|(k, _)| *k).zip(self.q_half.iter().copied())
    }

    pub fn q(&self, k: &[i64]) -> f64 {
        if k.iter().all(|&c| c == 0) {
            self.q0
        } else {
            self.jumps.d(k) / self.a_tau
        }
    }

    /// `q_hat(h xi) = sum_k q_k e^{i k h xi}`, which equals `c_1 + d_hat / a(tau)`.
    pub fn cf(&self, xi: &[f64]) -> Result<f64> {
        check_xi(self.dim(), xi)?;
        let hx: Vec<f64> = xi.iter().map(|x| x * self.h()).collect();
        let s: f64 = self
            .jumps
            .half
            .iter()
            .zip(&self.q_half)
            .map(|((k, _), q)| q * dot(k, &hx).cos())
            .sum();
        Ok(self.q0 + 2.0 * s)
    }

    /// Full table `p_k = q_k`, `p_0 = c_1 - Q(h)/a(tau)`, in the order
    /// origin, then `k, -k` pairs. Refuses an unstable kernel.
    pub fn markov_probabilities(&self) -> Result<Vec<(Vec<i64>, f64)>> {
        self.check_stability()?;
        let d = self.dim();
        let mut out = Vec::with_capacity(2 * self.q_half.len() + 1);
        out.push((vec![0; d], self.q0));
        for (k, q) in self.half_weights() {
            out.push((k[..d].to_vec(), q));
            out.push((k[..d].iter().map(|c| -c).collect(), q));
        }
        Ok(out)
    }

    pub fn summary(&self) -> KernelSummary {
        KernelSummary {
            dim: self.dim(),
            h: self.h(),
            tau: self.tau,
            trunc_k: self.trunc_k(),
            a_tau: self.a_tau,
            c1: self.c1,
            q0: self.q0,
            q_total: self.q_total(),
            tail_estimate: self.jumps.tail_estimate,
            tau_max: self.tau_max,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSummary {
    pub dim: usize,
    pub h: f64,
    pub tau: f64,
    pub trunc_k: usize,
    pub a_tau: f64,
    pub c1: f64,
    pub q0: f64,
    pub q_total: f64,
    pub tail_estimate: f64,
    pub tau_max: f64,
}

/// Single-order GL kernel with the default tail tolerance.
pub fn build_kernel(
    rho: &SpectralMeasure,
    dim: usize,
    h: f64,
    tau: f64,
    beta: f64,
    trunc_k: usize,
) -> Result<LatticeKernel> {
    let jumps = JumpWeights::build(rho, dim, h, trunc_k, DEFAULT_TAIL_TOLERANCE)?;
    LatticeKernel::new(jumps, &TimeScheme::gl(beta)?, tau)
}

/// `d_hat(h xi)` of a built kernel.
pub fn kernel_cf(kernel: &LatticeKernel, xi: &[f64]) -> Result<f64> {
    kernel.jumps.symbol(xi)
}

/// Largest stable `tau` for the given spatial weights and time scheme.
pub fn stability_bound(jumps: &JumpWeights, scheme: &TimeScheme) -> f64 {
    scheme.stability_bound(jumps.q_total)
}

/// Single-order bound from `Q(h)` alone.
pub fn stability_bound_from_q(q_total: f64, beta: f64, variant: Variant) -> Result<f64> {
    Ok(TimeScheme::single(beta, variant)?.stability_bound(q_total))
}

/// Characteristic function of the single-order sequence
/// `p_k = b(alpha) h^{-alpha} |k|^{-(d + alpha)}` balanced at the origin;
/// tends to `-|xi|^alpha / 2` as `h -> 0`.
pub fn p_hat(alpha: f64, dim: usize, h: f64, xi: &[f64], trunc_k: usize) -> Result<f64> {
    check_grid(dim, h, trunc_k)?;
    check_xi(dim, xi)?;
    let c = b_alpha(alpha, dim)? * h.powf(-alpha);
    let hx: Vec<f64> = xi.iter().map(|x| x * h).collect();
    let expo = -(dim as f64 + alpha);
    let mut s = 0.0;
    let mut total = 0.0;
    for_each_half_ball(dim, trunc_k, |k, r2| {
        let w = (r2 as f64).sqrt().powf(expo);
        total += w;
        s += w * (dot(&k, &hx).cos() - 1.0);
    });
    let ratio = tail_sum_bound(dim, alpha, trunc_k) / (2.0 * total);
    if ratio > DEFAULT_TAIL_TOLERANCE {
        return Err(Error::TruncationTooCoarse {
            tail: c * tail_sum_bound(dim, alpha, trunc_k),
            ratio,
            tolerance: DEFAULT_TAIL_TOLERANCE,
        });
    }
    Ok(2.0 * c * s)
}
