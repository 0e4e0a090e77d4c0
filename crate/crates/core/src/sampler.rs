//! Monte Carlo walkers whose one-step law is the lattice recursion read as a
//! mixture: with probability `c_1` jump by `k` (weights `q_k / c_1`), with
//! probability `c_m` (`2 <= m <= n`) return to the position held at time
//! `n + 1 - m`, and otherwise return to the starting site.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::coefficients::CoefficientTable;
use crate::error::{Error, Result};
use crate::kernel::LatticeKernel;

/// How often each branch was taken over all walkers and steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BranchCounts {
    pub jump: u64,
    pub memory: u64,
    pub origin: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Jump,
    Memory(usize),
    Origin,
}

/// Precomputed draw tables shared by all walkers.
pub struct StepSampler<'a> {
    coeffs: &'a CoefficientTable,
    dim: usize,
    c1: f64,
    alias: WeightedAliasIndex<f64>,
    /// offsets in alias order: origin, then `k, -k` pairs
    offsets: Vec<[i64; 3]>,
    /// `memory_cdf[i] = c_2 + ... + c_{i+2}`
    memory_cdf: Vec<f64>,
}

impl<'a> StepSampler<'a> {
    pub fn new(coeffs: &'a CoefficientTable, kernel: &LatticeKernel) -> Result<Self> {
        kernel.check_stability()?;
        if (kernel.c1() - coeffs.c1()).abs() > 1e-12 * coeffs.c1() {
            return Err(Error::Mismatch(
                "kernel and coefficients come from different time orders".into(),
            ));
        }
        let mut weights = vec![kernel.q0()];
        let mut offsets = vec![[0i64; 3]];
        for (k, q) in kernel.half_weights() {
            weights.extend([q, q]);
            offsets.extend([k, k.map(|c| -c)]);
        }
        let alias =
            WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidParameter(format!("jump table: {e}")))?;
        let mut memory_cdf = Vec::with_capacity(coeffs.horizon.saturating_sub(1));
        let mut acc = 0.0;
        for &c in &coeffs.c_values()[1..] {
            acc += c;
            memory_cdf.push(acc);
        }
        Ok(Self {
            coeffs,
            dim: kernel.dim(),
            c1: coeffs.c1(),
            alias,
            offsets,
            memory_cdf,
        })
    }

    /// Branch for the step producing position `n + 1`.
    pub fn draw_branch<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Branch {
        let u: f64 = rng.random();
        if u < self.c1 {
            return Branch::Jump;
        }
        let v = u - self.c1;
        if n >= 2 {
            let cdf = &self.memory_cdf[..n - 1];
            if v < cdf[n - 2] {
                let i = cdf.partition_point(|&x| x <= v);
                return Branch::Memory(i + 2);
            }
        }
        Branch::Origin
    }

    pub fn draw_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> [i64; 3] {
        self.offsets[self.alias.sample(rng)]
    }
}

/// Appends the position at time `step_n + 1` to a flat path holding
/// positions `0..=step_n`, and returns the branch taken.
pub fn advance_walker<R: Rng + ?Sized>(
    path: &mut Vec<i64>,
    step_n: usize,
    sampler: &StepSampler<'_>,
    rng: &mut R,
) -> Result<Branch> {
    let d = sampler.dim;
    if path.len() != (step_n + 1) * d {
        return Err(Error::InvalidParameter(format!(
            "path holds {} coordinates, expected {} for step {step_n}",
            path.len(),
            (step_n + 1) * d
        )));
    }
    if sampler.coeffs.horizon < step_n.max(1) {
        return Err(Error::HistoryMissing {
            horizon: sampler.coeffs.horizon,
            step: step_n,
        });
    }
    let branch = sampler.draw_branch(step_n, rng);
    match branch {
        Branch::Jump => {
            let k = sampler.draw_jump(rng);
            for a in 0..d {
                let x = path[step_n * d + a];
                path.push(x + k[a]);
            }
        }
        Branch::Memory(m) => {
            let src = (step_n + 1 - m) * d;
            for a in 0..d {
                path.push(path[src + a]);
            }
        }
        Branch::Origin => {
            for a in 0..d {
                path.push(path[a]);
            }
        }
    }
    Ok(branch)
}

/// Generator of walker `index`: ChaCha8 keyed by the master seed, with
/// the walker index as stream id.
pub fn walker_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Independent walker paths started at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerEnsemble {
    pub n_walkers: usize,
    pub master_seed: u64,
    pub dim: usize,
    pub current_step: usize,
    /// flat paths, `(current_step + 1) * dim` coordinates each
    pub paths: Vec<Vec<i64>>,
    pub branch_counts: BranchCounts,
}

impl WalkerEnsemble {
    pub fn position(&self, walker: usize, step: usize) -> &[i64] {
        &self.paths[walker][step * self.dim..(step + 1) * self.dim]
    }

    /// Occupation counts at `step`, keyed by site.
    pub fn counts(&self, step: usize) -> BTreeMap<Vec<i64>, u64> {
        let mut out = BTreeMap::new();
        for w in 0..self.n_walkers {
            *out.entry(self.position(w, step).to_vec()).or_insert(0) += 1;
        }
        out
    }

    /// `(1/N) sum_w e^{i h S_step . xi}`.
    pub fn cf(&self, step: usize, h: f64, xi: &[f64]) -> Result<Complex64> {
        if xi.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "frequency has {} components, walkers live in dimension {}",
                xi.len(),
                self.dim
            )));
        }
        if self.n_walkers == 0 {
            return Err(Error::InvalidParameter("empty ensemble".into()));
        }
        let sum: Complex64 = (0..self.n_walkers)
            .map(|w| {
                let phase: f64 = self.position(w, step).iter().zip(xi).map(|(&s, &x)| s as f64 * x).sum();
                Complex64::from_polar(1.0, h * phase)
            })
            .sum();
        Ok(sum / self.n_walkers as f64)
    }
}

/// Runs `n_walkers` paths for `n_steps` steps; bit-reproducible from the seed.
pub fn sample_ensemble(
    n_walkers: usize,
    n_steps: usize,
    coeffs: &CoefficientTable,
    kernel: &LatticeKernel,
    master_seed: u64,
) -> Result<WalkerEnsemble> {
    if n_walkers == 0 {
        return Err(Error::InvalidParameter("need at least one walker".into()));
    }
    let sampler = StepSampler::new(coeffs, kernel)?;
    if n_steps > 0 && coeffs.horizon < (n_steps - 1).max(1) {
        return Err(Error::HistoryMissing {
            horizon: coeffs.horizon,
            step: n_steps - 1,
        });
    }
    let d = kernel.dim();
    let mut counts = BranchCounts::default();
    let mut paths = Vec::with_capacity(n_walkers);
    for w in 0..n_walkers {
        let mut rng = walker_rng(master_seed, w as u64);
        let mut path = Vec::with_capacity((n_steps + 1) * d);
        path.resize(d, 0);
        for n in 0..n_steps {
            match advance_walker(&mut path, n, &sampler, &mut rng)? {
                Branch::Jump => counts.jump += 1,
                Branch::Memory(_) => counts.memory += 1,
                Branch::Origin => counts.origin += 1,
            }
        }
        paths.push(path);
    }
    Ok(WalkerEnsemble {
        n_walkers,
        master_seed,
        dim: d,
        current_step: n_steps,
        paths,
        branch_counts: counts,
    })
}

/// Empirical characteristic function of the final positions.
pub fn empirical_cf(ensemble: &WalkerEnsemble, h: f64, xi: &[f64]) -> Result<Complex64> {
    ensemble.cf(ensemble.current_step, h, xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test of `observed` against cell probabilities `probs`. Cells
/// with expected count below 5 are pooled together with the residual mass
/// `1 - sum(probs)`; a pool still below 5 joins the smallest regular cell.
pub fn chi_square(observed: &[u64], probs: &[f64], unassigned: u64) -> Result<ChiSquareTest> {
    if observed.len() != probs.len() {
        return Err(Error::InvalidParameter(
            "observed and probability cells differ in length".into(),
        ));
    }
    let n = observed.iter().sum::<u64>() + unassigned;
    if n == 0 {
        return Err(Error::InvalidParameter("no observations".into()));
    }
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pool_obs = unassigned as f64;
    let mut pool_exp = (1.0 - probs.iter().sum::<f64>()).max(0.0) * nf;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * nf;
        if e >= 5.0 {
            cells.push((o as f64, e));
        } else {
            pool_obs += o as f64;
            pool_exp += e;
        }
    }
    if pool_exp >= 5.0 {
        cells.push((pool_obs, pool_exp));
    } else if pool_obs > 0.0 || pool_exp > 0.0 {
        let smallest = cells
            .iter_mut()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::InvalidParameter("too few observations for a chi-square test".into()))?;
        smallest.0 += pool_obs;
        smallest.1 += pool_exp;
    }
    if cells.len() < 2 {
        return Err(Error::InvalidParameter(
            "chi-square test needs at least two cells".into(),
        ));
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}
