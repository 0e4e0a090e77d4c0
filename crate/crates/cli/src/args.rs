use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use ctrw::coefficients::Variant;
use ctrw::harness::{ExperimentConfig, TauRule};
use ctrw::measures::{SpectralMeasure, TimeMeasure};
use serde::de::DeserializeOwned;

pub const OUTPUT_DIR_ENV: &str = "CTRW_OUTPUT_DIR";

/// Experiment parameters shared by every subcommand. Flags override the
/// values read from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// JSON file with the spatial mixing measure.
    #[arg(long, global = true, conflicts_with = "alpha")]
    pub rho: Option<PathBuf>,
    /// Single stable index, shorthand for a point-mass spatial measure.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Single fractional time order.
    #[arg(long, global = true, conflicts_with = "mu")]
    pub beta: Option<f64>,
    /// JSON file with the time-order measure.
    #[arg(long, global = true)]
    pub mu: Option<PathBuf>,
    #[arg(long, global = true)]
    pub variant: Option<Variant>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Lattice spacings, comma separated and strictly decreasing.
    #[arg(long, global = true, value_delimiter = ',')]
    pub h: Option<Vec<f64>>,
    /// Time step, or `auto` for the fraction rule.
    #[arg(long, global = true)]
    pub tau: Option<String>,
    /// Fraction of the stability bound used by `--tau auto`.
    #[arg(long, global = true)]
    pub fraction: Option<f64>,
    #[arg(long, global = true, conflicts_with = "steps")]
    pub t_final: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Frequency probes along the first axis, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub xi: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub walkers: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, conflicts_with = "kernel_range")]
    pub trunc_k: Option<usize>,
    /// Kernel truncation radius in space units.
    #[arg(long, global = true)]
    pub kernel_range: Option<f64>,
    #[arg(long, global = true)]
    pub tail_tolerance: Option<f64>,
    /// Grid half-width in space units.
    #[arg(long, global = true)]
    pub window_range: Option<f64>,
    /// Half-width of density outputs and comparisons.
    #[arg(long, global = true)]
    pub x_window: Option<f64>,
    /// Transform value accepted at the frequency cutoff of density inversions.
    #[arg(long, global = true)]
    pub cf_cutoff: Option<f64>,
    /// Output directory; falls back to the config, then $CTRW_OUTPUT_DIR, then `.`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

impl CommonArgs {
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let mut c: ExperimentConfig = match &self.config {
            Some(p) => read_json(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(p) = &self.rho {
            c.rho = read_json::<SpectralMeasure>(p)?;
        }
        if let Some(a) = self.alpha {
            c.rho = SpectralMeasure::point(a)?;
        }
        if let Some(b) = self.beta {
            c.beta = Some(b);
            c.mu = None;
        }
        if let Some(p) = &self.mu {
            c.mu = Some(read_json::<TimeMeasure>(p)?);
            c.beta = None;
        }
        if let Some(v) = self.variant {
            c.variant = v;
        }
        if let Some(d) = self.dim {
            c.dim = d;
        }
        if let Some(h) = &self.h {
            c.h_list = h.clone();
        }
        match self.tau.as_deref() {
            None => {
                if let Some(f) = self.fraction {
                    c.tau_rule = TauRule::FractionOfBound { fraction: f };
                }
            }
            Some("auto") => {
                let fraction = self.fraction.unwrap_or(0.9);
                c.tau_rule = TauRule::FractionOfBound { fraction };
            }
            Some(s) => {
                let tau: f64 = s
                    .parse()
                    .with_context(|| format!("--tau expects a number or `auto`, got `{s}`"))?;
                c.tau_rule = TauRule::Explicit { tau };
            }
        }
        if let Some(t) = self.t_final {
            c.t_final = Some(t);
            c.n_steps = None;
        }
        if let Some(n) = self.steps {
            c.n_steps = Some(n);
            c.t_final = None;
        }
        if let Some(xi) = &self.xi {
            c.xi_probes = xi.clone();
        }
        if let Some(n) = self.walkers {
            c.n_walkers = n;
        }
        if let Some(s) = self.seed {
            c.master_seed = s;
        }
        if let Some(k) = self.trunc_k {
            c.trunc_k = Some(k);
            c.kernel_range = None;
        }
        if let Some(r) = self.kernel_range {
            c.kernel_range = Some(r);
            c.trunc_k = None;
        }
        if let Some(t) = self.tail_tolerance {
            c.tail_tolerance = t;
        }
        if let Some(r) = self.window_range {
            c.window_range = Some(r);
        }
        if let Some(x) = self.x_window {
            c.x_window = x;
        }
        if let Some(v) = self.cf_cutoff {
            c.density.cf_cutoff = Some(v);
        }
        c.output_dir = Some(self.output_dir(c.output_dir.clone()));
        c.validate()?;
        Ok(c)
    }

    fn output_dir(&self, from_config: Option<PathBuf>) -> PathBuf {
        self.out
            .clone()
            .or(from_config)
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}
