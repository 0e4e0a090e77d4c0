//! Explicit non-Markovian recursion on a bounded lattice window:
//!
//! ```text
//! u^{n+1}_j = g_n u^0_j + sum_{m=2}^{n} c_m u^{n+1-m}_j + sum_k q_k u^n_{j-k}
//! ```
//!
//! where `g_n` is the origin weight of the coefficient table. Mass pushed
//! beyond the window is booked in a per-layer loss account that obeys the
//! same recursion, so `sum_j u^n_j + loss_n = 1` for every layer.

use num_complex::Complex64;

use crate::coefficients::CoefficientTable;
use crate::error::{Error, Result};
use crate::kernel::LatticeKernel;

const MATCH_TOL: f64 = 1e-12;

/// Half-width of the window for a run to time `t_final`; it scales like the
/// stable displacement `t^{beta/alpha}`.
pub fn default_window(dim: usize, h: f64, t_final: f64, alpha_min: f64, beta: f64) -> usize {
    let spread = t_final.powf(beta / alpha_min);
    if dim == 1 {
        ((20.0 * spread / h).ceil() as usize).max(200)
    } else {
        ((5.0 * spread / h).ceil() as usize).max(20)
    }
}

/// All layers `u^0 ..= u^n` on the window `|j|_inf <= J`, row-major with the
/// last axis contiguous.
#[derive(Debug, Clone)]
pub struct GridLayerHistory {
    dim: usize,
    h: f64,
    tau: f64,
    window: usize,
    layers: Vec<Vec<f64>>,
    losses: Vec<f64>,
}

impl GridLayerHistory {
    /// Discrete delta at the origin.
    pub fn init(dim: usize, h: f64, tau: f64, window: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("dimension {dim} not in 1..=3")));
        }
        if window < 1 {
            return Err(Error::InvalidParameter("window half-width must be at least 1".into()));
        }
        if !(h > 0.0 && tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "h = {h} and tau = {tau} must be positive"
            )));
        }
        let side = 2 * window + 1;
        let mut u0 = vec![0.0; side.pow(dim as u32)];
        let center = u0.len() / 2;
        u0[center] = 1.0;
        Ok(Self {
            dim,
            h,
            tau,
            window,
            layers: vec![u0],
            losses: vec![0.0],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn side(&self) -> usize {
        2 * self.window + 1
    }

    /// Index `n` of the newest layer.
    pub fn current_step(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn layer(&self, n: usize) -> &[f64] {
        &self.layers[n]
    }

    pub fn last(&self) -> &[f64] {
        self.layers.last().expect("history always holds u^0")
    }

    pub fn layers(&self) -> &[Vec<f64>] {
        &self.layers
    }

    pub fn boundary_loss(&self, n: usize) -> f64 {
        self.losses[n]
    }

    pub fn boundary_mass_lost(&self) -> f64 {
        *self.losses.last().expect("history always holds u^0")
    }

    pub fn mass(&self, n: usize) -> f64 {
        self.layers[n].iter().sum()
    }

    /// `max_n |sum_j u^n_j + loss_n - 1|`.
    pub fn max_mass_drift(&self) -> f64 {
        (0..self.layers.len())
            .map(|n| (self.mass(n) + self.losses[n] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.layers.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// Lattice site of a flat index.
    pub fn site(&self, idx: usize) -> Vec<i64> {
        let side = self.side();
        let mut rest = idx;
        let mut out = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            out[a] = (rest % side) as i64 - self.window as i64;
            rest /= side;
        }
        out
    }

    /// Value of layer `n` at a site, zero outside the window.
    pub fn value(&self, n: usize, site: &[i64]) -> f64 {
        let j = self.window as i64;
        if site.len() != self.dim || site.iter().any(|c| c.abs() > j) {
            return 0.0;
        }
        let side = self.side() as i64;
        let idx = site.iter().fold(0i64, |acc, &c| acc * side + c + j);
        self.layers[n][idx as usize]
    }

    fn check_inputs(&self, coeffs: &CoefficientTable, kernel: &LatticeKernel) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= MATCH_TOL * a.abs().max(b.abs());
        if kernel.dim() != self.dim || !close(kernel.h(), self.h) {
            return Err(Error::Mismatch(format!(
                "kernel (d = {}, h = {}) does not match grid (d = {}, h = {})",
                kernel.dim(),
                kernel.h(),
                self.dim,
                self.h
            )));
        }
        if !close(kernel.tau(), self.tau) || !close(coeffs.tau, self.tau) {
            return Err(Error::Mismatch(format!(
                "time steps differ: grid {}, kernel {}, coefficients {}",
                self.tau,
                kernel.tau(),
                coeffs.tau
            )));
        }
        if !close(kernel.c1(), coeffs.c1()) || !close(kernel.a_tau(), coeffs.a_tau) {
            return Err(Error::Mismatch(
                "kernel and coefficients come from different time orders".into(),
            ));
        }
        kernel.check_stability()
    }

    /// Appends `u^{n+1}`.
    pub fn step(&mut self, coeffs: &CoefficientTable, kernel: &LatticeKernel) -> Result<()> {
        self.check_inputs(coeffs, kernel)?;
        self.step_unchecked(coeffs, kernel)
    }

    fn step_unchecked(&mut self, coeffs: &CoefficientTable, kernel: &LatticeKernel) -> Result<()> {
        let n = self.current_step();
        if coeffs.horizon < n.max(1) {
            return Err(Error::HistoryMissing {
                horizon: coeffs.horizon,
                step: n,
            });
        }
        let (mut next, step_loss) = self.convolve(kernel);
        let memory = coeffs.memory_weights(n);
        let mut loss = kernel.c1() * self.losses[n];
        for (i, &c) in memory.iter().enumerate() {
            let src = n - 1 - i;
            for (t, &v) in next.iter_mut().zip(&self.layers[src]) {
                *t += c * v;
            }
            loss += c * self.losses[src];
        }
        let center = next.len() / 2;
        next[center] += coeffs.origin_weight(n);
        self.layers.push(next);
        self.losses.push(loss + step_loss);
        Ok(())
    }

    /// Appends `n_steps` layers; inputs are validated before the first one.
    pub fn run(&mut self, coeffs: &CoefficientTable, kernel: &LatticeKernel, n_steps: usize) -> Result<()> {
        if n_steps == 0 {
            return Ok(());
        }
        self.check_inputs(coeffs, kernel)?;
        let last = self.current_step() + n_steps - 1;
        if coeffs.horizon < last.max(1) {
            return Err(Error::HistoryMissing {
                horizon: coeffs.horizon,
                step: last,
            });
        }
        for _ in 0..n_steps {
            self.step_unchecked(coeffs, kernel)?;
        }
        Ok(())
    }

    /// `sum_k q_k u^n_{j-k}` on the window, and the mass sent outside it.
    fn convolve(&self, kernel: &LatticeKernel) -> (Vec<f64>, f64) {
        let u = self.last();
        let d = self.dim;
        let w = self.side();
        let kk = kernel.trunc_k();
        let p = w + 2 * kk;
        let pstride: Vec<usize> = (0..d).map(|a| p.pow((d - 1 - a) as u32)).collect();

        let mut pad = vec![0.0; p.pow(d as u32)];
        let rows = w.pow(d as u32 - 1);
        let row_base = |r: usize| -> usize {
            // padded index of the first entry of window row r
            let mut rest = r;
            let mut base = kk;
            for a in (0..d - 1).rev() {
                base += (rest % w + kk) * pstride[a];
                rest /= w;
            }
            base
        };
        for r in 0..rows {
            let b = row_base(r);
            pad[b..b + w].copy_from_slice(&u[r * w..(r + 1) * w]);
        }

        let taps: Vec<(usize, f64)> = kernel
            .half_weights()
            .map(|(k, q)| {
                let off: i64 = (0..d).map(|a| k[a] * pstride[a] as i64).sum();
                (off as usize, q)
            })
            .collect();

        let q0 = kernel.q0();
        let mut out: Vec<f64> = u.iter().map(|&v| q0 * v).collect();
        for r in 0..rows {
            let b = row_base(r);
            let dst = &mut out[r * w..(r + 1) * w];
            for &(off, q) in &taps {
                let lo = &pad[b - off..b - off + w];
                let hi = &pad[b + off..b + off + w];
                for ((t, &x), &y) in dst.iter_mut().zip(lo).zip(hi) {
                    *t += q * (x + y);
                }
            }
        }
        (out, self.outflow(kernel, u))
    }

    /// Mass of `q * u` landing outside the window.
    fn outflow(&self, kernel: &LatticeKernel, u: &[f64]) -> f64 {
        let j = self.window as i64;
        let kk = kernel.trunc_k() as i64;
        if self.dim == 1 {
            // suffix[m] = sum_{k >= m} q_k for 1 <= m <= K
            let mut suffix = vec![0.0; kk as usize + 2];
            let q: Vec<f64> = kernel.half_weights().map(|(_, q)| q).collect();
            for m in (1..=kk as usize).rev() {
                suffix[m] = suffix[m + 1] + q[m - 1];
            }
            let tail = |m: i64| if m > kk { 0.0 } else { suffix[m.max(1) as usize] };
            return u
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v != 0.0)
                .map(|(idx, &v)| {
                    let i = idx as i64 - j;
                    v * (tail(j - i + 1) + tail(j + i + 1))
                })
                .sum();
        }
        let taps: Vec<([i64; 3], f64)> = kernel.half_weights().collect();
        let mut lost = 0.0;
        for (idx, &v) in u.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let s = self.site(idx);
            if s.iter().all(|c| c.abs() + kk <= j) {
                continue;
            }
            let outside = |sign: i64, k: &[i64; 3]| s.iter().zip(k).any(|(&c, &o)| (c + sign * o).abs() > j);
            let mut out = 0.0;
            for (k, q) in &taps {
                if outside(1, k) {
                    out += q;
                }
                if outside(-1, k) {
                    out += q;
                }
            }
            lost += v * out;
        }
        lost
    }

    /// `sum_j u^n_j e^{i h j . xi}`.
    pub fn cf(&self, n: usize, xi: &[f64]) -> Result<Complex64> {
        grid_cf(self, n, xi)
    }
}

pub fn init_grid(dim: usize, h: f64, tau: f64, window: usize) -> Result<GridLayerHistory> {
    GridLayerHistory::init(dim, h, tau, window)
}

/// Characteristic function of layer `n`; equals its mass at `xi = 0`.
pub fn grid_cf(grid: &GridLayerHistory, n: usize, xi: &[f64]) -> Result<Complex64> {
    if xi.len() != grid.dim {
        return Err(Error::InvalidParameter(format!(
            "frequency has {} components, grid dimension is {}",
            xi.len(),
            grid.dim
        )));
    }
    let j = grid.window as i64;
    let w = grid.side();
    // per-axis phase tables
    let phases: Vec<Vec<Complex64>> = xi
        .iter()
        .map(|&x| {
            (-j..=j)
                .map(|i| Complex64::from_polar(1.0, grid.h * i as f64 * x))
                .collect()
        })
        .collect();
    let layer = &grid.layers[n];
    let last = &phases[grid.dim - 1];
    let rows = w.pow(grid.dim as u32 - 1);
    let mut total = Complex64::new(0.0, 0.0);
    for r in 0..rows {
        let mut lead = Complex64::new(1.0, 0.0);
        let mut rest = r;
        for a in (0..grid.dim - 1).rev() {
            lead *= phases[a][rest % w];
            rest /= w;
        }
        let row: Complex64 = layer[r * w..(r + 1) * w].iter().zip(last).map(|(&v, e)| e * v).sum();
        total += lead * row;
    }
    Ok(total)
}

/// Scalar form of the recursion for a loss-free lattice:
/// `U^{n+1} = g_n + sum_{m=2}^{n} c_m U^{n+1-m} + q_hat U^n`, `U^0 = 1`.
pub fn cf_recursion(coeffs: &CoefficientTable, q_hat: f64, n_steps: usize) -> Result<Vec<f64>> {
    if n_steps > 0 && coeffs.horizon < (n_steps - 1).max(1) {
        return Err(Error::HistoryMissing {
            horizon: coeffs.horizon,
            step: n_steps - 1,
        });
    }
    let mut u = Vec::with_capacity(n_steps + 1);
    u.push(1.0);
    for n in 0..n_steps {
        let mut next = q_hat * u[n] + coeffs.origin_weight(n);
        for (i, &c) in coeffs.memory_weights(n).iter().enumerate() {
            next += c * u[n - 1 - i];
        }
        u.push(next);
    }
    Ok(u)
}
