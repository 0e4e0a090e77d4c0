//! Reference solutions: the exact characteristic function
//! `E_beta(Psi(xi) t^beta)`, its FFT inversion to a density in one
//! dimension, and the Laplace-domain objects of the convergence proof.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::SpectralMeasure;
use crate::special::{mittag_leffler, MlConfig};

/// Tail tolerance of [`discrete_laplace_cf`].
pub const LAPLACE_TAIL_TOLERANCE: f64 = 1e-10;

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("t = {t} must be positive")))
    }
}

/// `E_beta(Psi(xi) t^beta)`.
pub fn exact_cf(rho: &SpectralMeasure, beta: f64, t: f64, xi: &[f64], cfg: &MlConfig) -> Result<f64> {
    check_time(t)?;
    mittag_leffler(beta, rho.psi(xi) * t.powf(beta), cfg)
}

/// Exact characteristic function sampled on a radial frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSolution {
    pub beta: f64,
    pub rho: SpectralMeasure,
    pub t: f64,
    pub xi_grid: Vec<f64>,
    pub cf_values: Vec<f64>,
}

pub fn spectral_solution(
    rho: &SpectralMeasure,
    beta: f64,
    t: f64,
    xi_grid: &[f64],
    cfg: &MlConfig,
) -> Result<SpectralSolution> {
    let cf_values = xi_grid
        .iter()
        .map(|&x| exact_cf(rho, beta, t, &[x], cfg))
        .collect::<Result<_>>()?;
    Ok(SpectralSolution {
        beta,
        rho: rho.clone(),
        t,
        xi_grid: xi_grid.to_vec(),
        cf_values,
    })
}

/// Controls of the FFT inversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DensityConfig {
    /// Largest admissible transform value at the frequency cutoff; `None`
    /// selects 1e-12 for `beta = 1` and 1e-8 otherwise.
    pub cf_cutoff: Option<f64>,
    /// Internal period as a multiple of the largest `|x|` requested.
    pub period_factor: f64,
    pub min_modes: usize,
    pub max_modes: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self {
            cf_cutoff: None,
            period_factor: 128.0,
            min_modes: 1 << 12,
            max_modes: 1 << 22,
        }
    }
}

/// Density on the requested grid together with the internal FFT layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityResult {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    /// `sum f dx` over the full internal period.
    pub internal_mass: f64,
    pub xi_max: f64,
    pub modes: usize,
    /// internal points per requested grid spacing
    pub oversampling: usize,
    pub internal_dx: f64,
    pub min_density: f64,
    pub warnings: Vec<String>,
    #[serde(skip)]
    internal: Vec<f64>,
}

impl DensityResult {
    /// Density at internal index `m` (taken modulo the period).
    pub fn internal_value(&self, m: i64) -> f64 {
        let n = self.internal.len() as i64;
        self.internal[m.rem_euclid(n) as usize]
    }
}

/// Inverts a radial, decreasing characteristic function `phi(|xi|)` in one
/// dimension on a uniform grid symmetric about 0 that contains 0.
fn invert_radial(
    phi: &dyn Fn(f64) -> Result<f64>,
    cutoff: f64,
    x_grid: &[f64],
    cfg: &DensityConfig,
) -> Result<DensityResult> {
    let (dx, idx) = grid_indices(x_grid)?;
    let x_max = x_grid.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let period = cfg.period_factor * x_max;

    // smallest xi with phi(xi) <= cutoff
    let mut hi = 1.0;
    while phi(hi)? > cutoff {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::Aliasing {
                value: phi(hi)?,
                tolerance: cutoff,
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if phi(mid)? > cutoff {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xi_max = hi;

    let r = ((xi_max * dx / PI).ceil() as usize).max(1);
    let dx_int = dx / r as f64;
    let needed = ((period / dx_int).ceil() as usize).max(cfg.min_modes);
    let modes = needed.next_power_of_two();
    if modes > cfg.max_modes {
        // best reachable cutoff with the allowed number of modes
        let dx_cap = (period / cfg.max_modes as f64).max(dx_int);
        return Err(Error::Aliasing {
            value: phi(PI / dx_cap)?,
            tolerance: cutoff,
        });
    }
    let dxi = 2.0 * PI / (modes as f64 * dx_int);

    let half = modes / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); modes];
    for k in 0..=half {
        let v = phi(k as f64 * dxi)?;
        buf[k] = Complex64::new(v, 0.0);
        if k > 0 && k < half {
            buf[modes - k] = Complex64::new(v, 0.0);
        }
    }
    FftPlanner::new().plan_fft_forward(modes).process(&mut buf);
    let scale = dxi / (2.0 * PI);
    let internal: Vec<f64> = buf.iter().map(|z| z.re * scale).collect();
    let internal_mass = internal.iter().sum::<f64>() * dx_int;
    let min_density = internal.iter().copied().fold(f64::INFINITY, f64::min);
    let mut warnings = Vec::new();
    if min_density < -1e-9 {
        warnings.push(format!("negative ringing down to {min_density:.3e}"));
    }
    let density = idx
        .iter()
        .map(|&i| internal[(i * r as i64).rem_euclid(modes as i64) as usize])
        .collect();
    Ok(DensityResult {
        x: x_grid.to_vec(),
        density,
        internal_mass,
        xi_max,
        modes,
        oversampling: r,
        internal_dx: dx_int,
        min_density,
        warnings,
        internal,
    })
}

/// Spacing and integer indices of a uniform grid with a node at 0.
fn grid_indices(x_grid: &[f64]) -> Result<(f64, Vec<i64>)> {
    if x_grid.len() < 3 {
        return Err(Error::InvalidParameter("x grid needs at least three points".into()));
    }
    let dx = x_grid[1] - x_grid[0];
    if !(dx > 0.0) {
        return Err(Error::InvalidParameter("x grid must be increasing".into()));
    }
    let idx: Vec<i64> = x_grid.iter().map(|x| (x / dx).round() as i64).collect();
    let uniform = x_grid
        .iter()
        .zip(&idx)
        .all(|(x, &i)| (x - i as f64 * dx).abs() <= 1e-9 * dx.max(x.abs()));
    let symmetric = idx[0] == -idx[idx.len() - 1];
    if !uniform || !symmetric {
        return Err(Error::InvalidParameter(
            "x grid must be uniform, symmetric about 0, and contain 0".into(),
        ));
    }
    Ok((dx, idx))
}

/// Uniform grid `-x_max, ..., x_max` with `2 m + 1` points.
pub fn symmetric_grid(x_max: f64, m: usize) -> Vec<f64> {
    let dx = x_max / m as f64;
    (-(m as i64)..=m as i64).map(|i| i as f64 * dx).collect()
}

/// Density of the `beta = 1` process at time `t` by inversion of `e^{t Psi}`.
pub fn green_function_beta1(
    rho: &SpectralMeasure,
    t: f64,
    x_grid: &[f64],
    cfg: &DensityConfig,
) -> Result<DensityResult> {
    check_time(t)?;
    let phi = |r: f64| Ok((t * rho.psi_radial(r)).exp());
    invert_radial(&phi, cfg.cf_cutoff.unwrap_or(1e-12), x_grid, cfg)
}

/// Density of the time-fractional process at time `t` by inversion of
/// `E_beta(Psi t^beta)`.
pub fn frac_density(
    rho: &SpectralMeasure,
    beta: f64,
    t: f64,
    x_grid: &[f64],
    cfg: &DensityConfig,
    ml: &MlConfig,
) -> Result<DensityResult> {
    check_time(t)?;
    let tb = t.powf(beta);
    let phi = |r: f64| mittag_leffler(beta, rho.psi_radial(r) * tb, ml);
    let default = if beta == 1.0 { 1e-12 } else { 1e-8 };
    invert_radial(&phi, cfg.cf_cutoff.unwrap_or(default), x_grid, cfg)
}

/// `s^{beta-1} / (s^beta - psi)`, the Laplace transform in time of
/// `E_beta(psi t^beta)`.
pub fn laplace_symbol(beta: f64, psi: f64, s: f64) -> Result<f64> {
    if !(s > 0.0) || psi > 0.0 || !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "laplace symbol needs s > 0, psi <= 0, beta in (0, 1]; got s = {s}, psi = {psi}, beta = {beta}"
        )));
    }
    if beta == 1.0 {
        return Ok(1.0 / (s - psi));
    }
    Ok(s.powf(beta - 1.0) / (s.powf(beta) - psi))
}

/// `tau sum_{n=0}^{N-1} U^{n+1} e^{-s n tau}` for `U^0 ..= U^N`.
pub fn discrete_laplace_cf(values: &[f64], tau: f64, s: f64) -> Result<f64> {
    if values.len() < 2 || !(tau > 0.0) || !(s > 0.0) {
        return Err(Error::InvalidParameter(
            "need at least two values and positive tau, s".into(),
        ));
    }
    let n = values.len() - 1;
    let tail = (-s * tau * n as f64).exp();
    if tail >= LAPLACE_TAIL_TOLERANCE {
        return Err(Error::LaplaceTail {
            tail,
            tolerance: LAPLACE_TAIL_TOLERANCE,
        });
    }
    let decay = (-s * tau).exp();
    let mut weight = 1.0;
    let mut sum = 0.0;
    for &u in &values[1..] {
        sum += u * weight;
        weight *= decay;
    }
    Ok(tau * sum)
}
