//! Refinement studies: for each `h` build the kernel, couple `tau` to the
//! stability bound, run the lattice scheme to `t_final`, and compare with the
//! exact characteristic function, the `beta = 1` density, or Monte Carlo.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientTable, TimeOrder, TimeScheme, Variant};
use crate::error::{Error, Result};
use crate::kernel::{default_trunc_k, JumpWeights, LatticeKernel, DEFAULT_TAIL_TOLERANCE};
use crate::measures::{SpectralMeasure, TimeMeasure};
use crate::reference::{exact_cf, green_function_beta1, DensityConfig};
use crate::sampler::{sample_ensemble, BranchCounts};
use crate::scheme::{cf_recursion, default_window, init_grid, GridLayerHistory};
use crate::special::MlConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// How `tau` follows `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TauRule {
    Explicit {
        tau: f64,
    },
    /// `tau <= fraction * tau_max(h)`, shrunk so that an integer number of
    /// steps reaches `t_final`.
    FractionOfBound {
        fraction: f64,
    },
}

impl Default for TauRule {
    fn default() -> Self {
        TauRule::FractionOfBound { fraction: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub rho: SpectralMeasure,
    pub beta: Option<f64>,
    pub mu: Option<TimeMeasure>,
    pub variant: Variant,
    pub dim: usize,
    pub h_list: Vec<f64>,
    pub tau_rule: TauRule,
    pub t_final: Option<f64>,
    pub n_steps: Option<usize>,
    /// Frequencies along the first axis.
    pub xi_probes: Vec<f64>,
    pub n_walkers: usize,
    pub master_seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Fixed lattice truncation radius; overrides `kernel_range`.
    pub trunc_k: Option<usize>,
    /// Truncation radius in space units, `K = ceil(kernel_range / h)`.
    pub kernel_range: Option<f64>,
    pub tail_tolerance: f64,
    /// Window half-width in space units, `J = ceil(window_range / h)`.
    pub window_range: Option<f64>,
    /// Half-width of the density comparison interval.
    pub x_window: f64,
    pub ml: MlConfig,
    pub density: DensityConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rho: SpectralMeasure::point(1.0).expect("valid default measure"),
            beta: None,
            mu: None,
            variant: Variant::Gl,
            dim: 1,
            h_list: vec![0.4, 0.2, 0.1],
            tau_rule: TauRule::default(),
            t_final: None,
            n_steps: None,
            xi_probes: vec![0.5, 1.0, 2.0],
            n_walkers: 0,
            master_seed: 0,
            output_dir: None,
            trunc_k: None,
            kernel_range: None,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
            window_range: None,
            x_window: 10.0,
            ml: MlConfig::default(),
            density: DensityConfig::default(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(invalid(format!("dimension {} not in 1..=3", self.dim)));
        }
        if self.h_list.is_empty() {
            return Err(invalid("h_list is empty"));
        }
        if self.h_list.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(invalid("every h must be positive"));
        }
        if self.h_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("h_list must be strictly decreasing"));
        }
        match self.tau_rule {
            TauRule::Explicit { tau } if !(tau > 0.0 && tau.is_finite()) => {
                return Err(invalid(format!("explicit tau = {tau} must be positive")));
            }
            TauRule::FractionOfBound { fraction } if !(fraction > 0.0 && fraction <= 1.0) => {
                return Err(invalid(format!("fraction_of_bound = {fraction} must lie in (0, 1]")));
            }
            _ => {}
        }
        if self.t_final.is_some() && self.n_steps.is_some() {
            return Err(invalid("give either t_final or n_steps, not both"));
        }
        if let Some(t) = self.t_final {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(format!("t_final = {t} must be positive")));
            }
        }
        if self.xi_probes.is_empty() {
            return Err(invalid("xi_probes is empty"));
        }
        if self.xi_probes.iter().any(|x| !x.is_finite()) {
            return Err(invalid("xi_probes must be finite"));
        }
        if self.beta.is_some() && self.mu.is_some() {
            return Err(invalid("give either beta or mu, not both"));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(invalid("tail_tolerance must be positive"));
        }
        if let Some(r) = self.kernel_range {
            if !(r > 0.0) {
                return Err(invalid("kernel_range must be positive"));
            }
        }
        if let Some(r) = self.window_range {
            if !(r > 0.0) {
                return Err(invalid("window_range must be positive"));
            }
        }
        self.ml.validate()?;
        self.time_scheme().map(|_| ())
    }

    /// Time scheme from `beta` (default 0.5) or from `mu`.
    pub fn time_scheme(&self) -> Result<TimeScheme> {
        match &self.mu {
            Some(mu) => TimeScheme::distributed(mu.clone(), self.variant),
            None => TimeScheme::single(self.beta.unwrap_or(0.5), self.variant),
        }
    }

    pub fn horizon_time(&self) -> f64 {
        self.t_final.unwrap_or(1.0)
    }

    pub fn trunc_for(&self, h: f64) -> usize {
        match (self.trunc_k, self.kernel_range) {
            (Some(k), _) => k,
            (None, Some(r)) => ((r / h).ceil() as usize).max(8),
            (None, None) => default_trunc_k(self.dim),
        }
    }
}

/// Everything needed to run one refinement level.
#[derive(Debug, Clone)]
pub struct Level {
    pub h: f64,
    pub tau: f64,
    pub tau_max: f64,
    pub n_steps: usize,
    pub t_final: f64,
    pub window: usize,
    pub kernel: LatticeKernel,
    pub coeffs: CoefficientTable,
}

/// Builds the kernel, time step, and coefficients for one `h`. `tau_cap`
/// replaces the kernel stability bound as the reference for the fraction
/// rule when given.
pub fn prepare_level(
    config: &ExperimentConfig,
    scheme: &TimeScheme,
    h: f64,
    tau_cap: Option<&dyn Fn(&JumpWeights) -> f64>,
) -> Result<Level> {
    let jumps = JumpWeights::build(&config.rho, config.dim, h, config.trunc_for(h), config.tail_tolerance)?;
    let tau_max = scheme.stability_bound(jumps.q_total());
    let reference = tau_cap.map_or(tau_max, |f| f(&jumps));
    let (tau, n_steps) = match (config.tau_rule, config.n_steps) {
        (TauRule::Explicit { tau }, Some(n)) => (tau, n),
        (TauRule::Explicit { tau }, None) => (tau, (config.horizon_time() / tau).round().max(1.0) as usize),
        (TauRule::FractionOfBound { fraction }, Some(n)) => (fraction * reference, n),
        (TauRule::FractionOfBound { fraction }, None) => {
            let t = config.horizon_time();
            let n = (t / (fraction * reference) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            (t / n as f64, n)
        }
    };
    let kernel = LatticeKernel::new(jumps, scheme, tau)?;
    kernel.check_stability()?;
    let coeffs = scheme.table(n_steps.max(1), tau)?;
    let t_final = n_steps as f64 * tau;
    let beta_max = scheme.components().iter().map(|&(b, _)| b).fold(0.0, f64::max);
    let window = match config.window_range {
        Some(r) => ((r / h).ceil() as usize).max(1),
        None => default_window(config.dim, h, t_final, config.rho.alpha_min(), beta_max),
    };
    Ok(Level {
        h,
        tau,
        tau_max,
        n_steps,
        t_final,
        window,
        kernel,
        coeffs,
    })
}

impl Level {
    pub fn run_grid(&self) -> Result<GridLayerHistory> {
        let mut grid = init_grid(self.kernel.dim(), self.h, self.tau, self.window)?;
        grid.run(&self.coeffs, &self.kernel, self.n_steps)?;
        Ok(grid)
    }
}

fn probe(dim: usize, xi: f64) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[0] = xi;
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub h: f64,
    pub tau: f64,
    pub tau_max: f64,
    pub n_steps: usize,
    pub t_final: f64,
    pub trunc_k: usize,
    pub window: usize,
    /// `sup_xi |grid_cf - exact_cf|`, when an exact transform exists.
    pub cf_error: Option<f64>,
    pub density_sup_error: Option<f64>,
    pub density_l1_error: Option<f64>,
    pub mass_drift: f64,
    pub boundary_loss: f64,
    pub min_value: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub h: f64,
    pub n_walkers: usize,
    pub n_steps: usize,
    /// `sup_xi |ecf - lattice cf|`
    pub ecf_vs_scheme: f64,
    pub ecf_vs_exact: Option<f64>,
    pub density_sup_error: Option<f64>,
    /// `4 / sqrt(N)`
    pub tolerance: f64,
    pub passed: bool,
    pub branch_jump: u64,
    pub branch_memory: u64,
    pub branch_origin: u64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub experiment: String,
    pub oracle: String,
    pub rows: Vec<LevelRow>,
    pub mc: Vec<McRow>,
    pub errors_decreasing: bool,
    pub flags: Vec<String>,
    pub config: ExperimentConfig,
}

impl ConvergenceReport {
    /// Zeroes the wall-clock columns; the rest is a function of the config.
    pub fn without_timings(mut self) -> Self {
        for r in &mut self.rows {
            r.runtime_s = 0.0;
        }
        for r in &mut self.mc {
            r.runtime_s = 0.0;
        }
        self
    }

    /// Error column driving the decrease check.
    pub fn primary_errors(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.density_sup_error.or(r.cf_error))
            .collect()
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Single order that admits the closed-form transform, if any.
fn exact_order(scheme: &TimeScheme) -> Option<f64> {
    match &scheme.order {
        TimeOrder::Single(b) => Some(*b),
        TimeOrder::Distributed(mu) => mu.as_single_order(),
    }
}

fn cf_error(config: &ExperimentConfig, grid: &GridLayerHistory, beta: f64, t: f64) -> Result<f64> {
    let n = grid.current_step();
    let mut worst = 0.0f64;
    for &xi in &config.xi_probes {
        let p = probe(config.dim, xi);
        let z = grid.cf(n, &p)?;
        let exact = exact_cf(&config.rho, beta, t, &p, &config.ml)?;
        worst = worst.max((z - exact).norm());
    }
    Ok(worst)
}

fn level_row(level: &Level, grid: &GridLayerHistory, started: Instant) -> LevelRow {
    LevelRow {
        h: level.h,
        tau: level.tau,
        tau_max: level.tau_max,
        n_steps: level.n_steps,
        t_final: level.t_final,
        trunc_k: level.kernel.trunc_k(),
        window: level.window,
        cf_error: None,
        density_sup_error: None,
        density_l1_error: None,
        mass_drift: grid.max_mass_drift(),
        boundary_loss: grid.boundary_mass_lost(),
        min_value: grid.min_value(),
        runtime_s: started.elapsed().as_secs_f64(),
    }
}

/// Walkers on the given level, compared with the loss-free lattice CF and,
/// when available, the exact CF.
fn monte_carlo(config: &ExperimentConfig, level: &Level, beta: Option<f64>) -> Result<McRow> {
    let started = Instant::now();
    let n = config.n_walkers;
    let ens = sample_ensemble(n, level.n_steps, &level.coeffs, &level.kernel, config.master_seed)?;
    let mut vs_scheme = 0.0f64;
    let mut vs_exact: Option<f64> = None;
    for &xi in &config.xi_probes {
        let p = probe(config.dim, xi);
        let ecf = ens.cf(level.n_steps, level.h, &p)?;
        let lattice = cf_recursion(&level.coeffs, level.kernel.cf(&p)?, level.n_steps)?[level.n_steps];
        vs_scheme = vs_scheme.max((ecf - lattice).norm());
        if let Some(b) = beta {
            let e = (ecf - exact_cf(&config.rho, b, level.t_final, &p, &config.ml)?).norm();
            vs_exact = Some(vs_exact.map_or(e, |v: f64| v.max(e)));
        }
    }
    let tolerance = 4.0 / (n as f64).sqrt();
    let BranchCounts { jump, memory, origin } = ens.branch_counts;
    Ok(McRow {
        h: level.h,
        n_walkers: n,
        n_steps: level.n_steps,
        ecf_vs_scheme: vs_scheme,
        ecf_vs_exact: vs_exact,
        density_sup_error: None,
        tolerance,
        passed: vs_scheme <= tolerance,
        branch_jump: jump,
        branch_memory: memory,
        branch_origin: origin,
        runtime_s: started.elapsed().as_secs_f64(),
    })
}

fn run_pipeline(config: &ExperimentConfig, scheme: &TimeScheme, experiment: &str) -> Result<ConvergenceReport> {
    config.validate()?;
    let beta = exact_order(scheme);
    let mut rows = Vec::new();
    let mut finest = None;
    for &h in &config.h_list {
        let started = Instant::now();
        let level = prepare_level(config, scheme, h, None)?;
        let grid = level.run_grid()?;
        let mut row = level_row(&level, &grid, started);
        if let Some(b) = beta {
            row.cf_error = Some(cf_error(config, &grid, b, level.t_final)?);
        }
        row.runtime_s = started.elapsed().as_secs_f64();
        rows.push(row);
        finest = Some(level);
    }
    let mut flags = Vec::new();
    let mut mc = Vec::new();
    if config.n_walkers > 0 {
        let level = finest.expect("h_list is nonempty");
        let row = monte_carlo(config, &level, beta)?;
        if !row.passed {
            flags.push("mc_disagrees_with_scheme".into());
        }
        mc.push(row);
    }
    let oracle = if beta.is_some() {
        "exact_cf"
    } else {
        flags.push("mixed_mu_without_exact_transform: validated by scheme/Monte Carlo agreement only".into());
        if config.n_walkers == 0 {
            flags.push("no_validation: set n_walkers for a mixed mu".into());
        }
        "scheme_vs_mc"
    };
    let mut report = ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        experiment: experiment.into(),
        oracle: oracle.into(),
        rows,
        mc,
        errors_decreasing: true,
        flags,
        config: config.clone(),
    };
    let errs = report.primary_errors();
    report.errors_decreasing = strictly_decreasing(&errs);
    if errs.len() > 1 && !report.errors_decreasing {
        report.flags.push("error_not_decreasing".into());
    }
    Ok(report)
}

/// CF refinement study against `E_beta(Psi t^beta)`.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    run_pipeline(config, &config.time_scheme()?, "convergence")
}

/// Same pipeline with the distributed-order coefficients of `mu`.
pub fn run_distributed_order(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let mu = config
        .mu
        .clone()
        .ok_or_else(|| invalid("the distributed-order experiment needs a time measure mu"))?;
    let scheme = TimeScheme::distributed(mu, config.variant)?;
    run_pipeline(config, &scheme, "distributed_order")
}

/// `sigma(tau, h) = 2 tau Q(h)`.
pub fn sigma(tau: f64, q_total: f64) -> f64 {
    2.0 * tau * q_total
}

/// Markovian (`beta = 1`) study: grid and walkers against the density
/// obtained by inverting `e^{t Psi}`. The fraction rule applies to the
/// bound `sigma <= 1`.
pub fn run_theorem2(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let scheme = config.time_scheme()?;
    if exact_order(&scheme) != Some(1.0) {
        return Err(invalid("the Markovian experiment requires beta = 1"));
    }
    let cap = |j: &JumpWeights| 1.0 / (2.0 * j.q_total());
    let mut rows = Vec::new();
    let mut mc = Vec::new();
    let mut finest = None;
    for &h in &config.h_list {
        let started = Instant::now();
        let level = prepare_level(config, &scheme, h, Some(&cap))?;
        let s = sigma(level.tau, level.kernel.q_total());
        if s > 1.0 {
            return Err(invalid(format!("sigma(tau, h) = {s:.4} exceeds 1 at h = {h}")));
        }
        let m = (config.x_window / h).floor() as usize;
        let mut level = level;
        level.window = level.window.max(m);
        let grid = level.run_grid()?;
        let mut row = level_row(&level, &grid, started);
        row.cf_error = Some(cf_error(config, &grid, 1.0, level.t_final)?);
        if config.dim == 1 {
            let (sup, l1) = density_errors(config, &level, |j| grid.value(grid.current_step(), &[j]) / h)?;
            row.density_sup_error = Some(sup);
            row.density_l1_error = Some(l1);
        }
        row.runtime_s = started.elapsed().as_secs_f64();
        rows.push(row);
        finest = Some(level);
    }
    if config.n_walkers > 0 {
        let level = finest.expect("h_list is nonempty");
        let mut row = monte_carlo(config, &level, Some(1.0))?;
        if config.dim == 1 {
            let ens = sample_ensemble(
                config.n_walkers,
                level.n_steps,
                &level.coeffs,
                &level.kernel,
                config.master_seed,
            )?;
            let counts = ens.counts(level.n_steps);
            let nw = config.n_walkers as f64;
            let (sup, _) = density_errors(config, &level, |j| {
                *counts.get(&vec![j]).unwrap_or(&0) as f64 / (nw * level.h)
            })?;
            row.density_sup_error = Some(sup);
        }
        mc.push(row);
    }
    let mut report = ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        experiment: "theorem2".into(),
        oracle: "green_function".into(),
        rows,
        mc,
        errors_decreasing: true,
        flags: Vec::new(),
        config: config.clone(),
    };
    let errs = report.primary_errors();
    report.errors_decreasing = strictly_decreasing(&errs);
    if errs.len() > 1 && !report.errors_decreasing {
        report.flags.push("error_not_decreasing".into());
    }
    Ok(report)
}

/// Sup and L1 errors of a lattice density against the `beta = 1` density on
/// `|x| <= x_window`.
fn density_errors(config: &ExperimentConfig, level: &Level, value: impl Fn(i64) -> f64) -> Result<(f64, f64)> {
    let h = level.h;
    let m = (config.x_window / h).floor() as i64;
    let x: Vec<f64> = (-m..=m).map(|j| j as f64 * h).collect();
    let g = green_function_beta1(&config.rho, level.t_final, &x, &config.density)?;
    let mut sup = 0.0f64;
    let mut l1 = 0.0;
    for (i, j) in (-m..=m).enumerate() {
        let e = (value(j) - g.density[i]).abs();
        sup = sup.max(e);
        l1 += e * h;
    }
    Ok((sup, l1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            h_list: vec![0.4, 0.2],
            t_final: Some(0.5),
            kernel_range: Some(20.0),
            window_range: Some(10.0),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn validation() {
        assert!(base().validate().is_ok());
        let mut c = base();
        c.xi_probes.clear();
        assert!(c.validate().is_err());
        let mut c = base();
        c.h_list = vec![0.1, 0.2];
        assert!(c.validate().is_err());
        let mut c = base();
        c.tau_rule = TauRule::FractionOfBound { fraction: 1.2 };
        assert!(c.validate().is_err());
        let mut c = base();
        c.beta = Some(1.0);
        c.variant = Variant::Liu;
        assert!(c.validate().is_err());
        let mut c = base();
        c.n_steps = Some(3);
        assert!(c.validate().is_err());
    }

    #[test]
    fn tau_coupling_hits_t_final() {
        let c = base();
        let scheme = c.time_scheme().unwrap();
        let level = prepare_level(&c, &scheme, 0.2, None).unwrap();
        assert!(level.tau <= 0.9 * level.tau_max);
        assert!((level.t_final - 0.5).abs() < 1e-12);
        assert!(level.kernel.q0() >= 0.0);
    }

    #[test]
    fn explicit_unstable_tau_is_refused() {
        let mut c = base();
        c.tau_rule = TauRule::Explicit { tau: 0.5 };
        let err = run_convergence(&c).unwrap_err();
        assert!(matches!(err, Error::StabilityViolation { .. }));
    }

    #[test]
    fn report_is_reproducible() {
        let mut c = base();
        c.n_walkers = 500;
        c.master_seed = 9;
        let a = run_convergence(&c).unwrap().without_timings();
        let b = run_convergence(&c).unwrap().without_timings();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2);
        assert_eq!(a.mc.len(), 1);
        assert!(a
            .rows
            .iter()
            .all(|r| r.mass_drift <= 1e-12 && r.cf_error.unwrap() >= 0.0));
        let json = serde_json::to_string(&a).unwrap();
        let back: ConvergenceReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn point_mass_mu_matches_single_beta() {
        let mut c = base();
        c.beta = Some(0.5);
        let single = run_convergence(&c).unwrap().without_timings();
        c.beta = None;
        c.mu = Some(TimeMeasure::point(0.5).unwrap());
        let dist = run_distributed_order(&c).unwrap().without_timings();
        assert_eq!(single.rows, dist.rows);
        assert_eq!(dist.oracle, "exact_cf");
    }

    #[test]
    fn liu_rejects_beta_one_atom() {
        let mut c = base();
        c.mu = Some(TimeMeasure::atomic(&[(1.0, 0.5), (0.5, 0.5)]).unwrap());
        c.variant = Variant::Liu;
        assert!(run_distributed_order(&c).is_err());
    }

    #[test]
    fn theorem2_sigma_guard() {
        let mut c = base();
        c.beta = Some(1.0);
        let r = run_theorem2(&c).unwrap();
        assert!(r.rows.iter().all(|row| row.density_sup_error.is_some()));
        let jumps = JumpWeights::build(&c.rho, 1, 0.4, c.trunc_for(0.4), c.tail_tolerance).unwrap();
        c.tau_rule = TauRule::Explicit {
            tau: 1.01 / (2.0 * jumps.q_total()),
        };
        c.h_list = vec![0.4];
        assert!(run_theorem2(&c).is_err());
        c.beta = Some(0.5);
        c.tau_rule = TauRule::default();
        assert!(run_theorem2(&c).is_err());
    }

    #[test]
    fn config_json_defaults() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"beta": 0.7, "h_list": [0.5, 0.25]}"#).unwrap();
        assert_eq!(c.beta, Some(0.7));
        assert_eq!(c.tau_rule, TauRule::FractionOfBound { fraction: 0.9 });
        let c: ExperimentConfig = serde_json::from_str(r#"{"tau_rule": {"kind": "explicit", "tau": 0.001}}"#).unwrap();
        assert_eq!(c.tau_rule, TauRule::Explicit { tau: 0.001 });
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
