//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use ctrw::coefficients::{distributed_coefficients, gl_coefficients, liu_coefficients, TimeScheme, Variant};
use ctrw::harness::{prepare_level, run_convergence, run_distributed_order, ExperimentConfig, TauRule};
use ctrw::kernel::{p_hat, JumpWeights, LatticeKernel, DEFAULT_TAIL_TOLERANCE};
use ctrw::measures::{SpectralMeasure, TimeMeasure};
use ctrw::reference::{discrete_laplace_cf, laplace_symbol};
use ctrw::sampler::{chi_square, sample_ensemble, StepSampler};
use ctrw::scheme::{cf_recursion, init_grid};
use ctrw::special::{mittag_leffler, MlConfig};
use statrs::function::erf::erfc;

type Check = fn() -> Result<(bool, String), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn coefficient_identities() -> Result<(bool, String), String> {
    let mut worst = 0.0f64;
    let mut ok = true;
    for &beta in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        for table in [
            gl_coefficients(beta, 500, 0.01).map_err(err)?,
            liu_coefficients(beta, 500, 0.01).map_err(err)?,
        ] {
            let c = table.c_values();
            ok &= c.iter().all(|&x| x > 0.0);
            ok &= decreasing(&table.gamma_values()[1..]);
            let c1 = table.c1();
            for n in 1..=500 {
                let s: f64 = c[1..n].iter().sum();
                worst = worst.max((table.gamma(n) + s - (1.0 - c1)).abs());
            }
        }
    }
    Ok((ok && worst <= 1e-12, format!("max identity residual {worst:.2e}")))
}

fn lattice_symbol_limit() -> Result<(bool, String), String> {
    let hs = [0.4, 0.2, 0.1, 0.05];
    let mut ok = true;
    let mut details = Vec::new();
    for &(alpha, dim) in &[(0.5, 1usize), (1.0, 1), (1.5, 1), (1.0, 2)] {
        let range: f64 = if dim == 1 { 4.0e5 } else { 400.0 };
        let xi: Vec<f64> = if dim == 1 { vec![1.0] } else { vec![0.6, 0.8] };
        let errs = hs
            .iter()
            .map(|&h| p_hat(alpha, dim, h, &xi, (range / h) as usize).map(|v| (v + 0.5).abs()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        ok &= decreasing(&errs) && errs[3] < 0.02;
        details.push(format!("a={alpha},d={dim}:{}", fmt(&errs)));
    }
    Ok((ok, details.join(" ")))
}

fn mixture_symbol_limit() -> Result<(bool, String), String> {
    let rho = SpectralMeasure::atomic(&[(0.5, 0.3), (1.5, 0.7)]).map_err(err)?;
    let xi = [1.0];
    let psi = rho.psi(&xi);
    let errs = [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&h| {
            let j = JumpWeights::build(&rho, 1, h, (4.0e5 / h) as usize, DEFAULT_TAIL_TOLERANCE)?;
            Ok(((j.symbol(&xi)? - psi) / psi).abs())
        })
        .collect::<ctrw::Result<Vec<_>>>()
        .map_err(err)?;
    Ok((
        decreasing(&errs) && errs[3] < 0.03,
        format!("relative errors {}", fmt(&errs)),
    ))
}

fn conservation() -> Result<(bool, String), String> {
    let rho = SpectralMeasure::point(1.0).map_err(err)?;
    let mut drift = 0.0f64;
    let mut min = f64::INFINITY;
    for &beta in &[0.5, 1.0] {
        let scheme = TimeScheme::gl(beta).map_err(err)?;
        let jumps = JumpWeights::build(&rho, 1, 0.2, 64, DEFAULT_TAIL_TOLERANCE).map_err(err)?;
        let tau = 0.9 * scheme.stability_bound(jumps.q_total());
        let kernel = LatticeKernel::new(jumps, &scheme, tau).map_err(err)?;
        let coeffs = scheme.table(500, tau).map_err(err)?;
        // narrow window so that boundary accounting is exercised
        let mut grid = init_grid(1, 0.2, tau, 40).map_err(err)?;
        grid.run(&coeffs, &kernel, 500).map_err(err)?;
        drift = drift.max(grid.max_mass_drift());
        min = min.min(grid.min_value());
    }
    Ok((
        drift <= 1e-12 && min >= 0.0,
        format!("mass drift {drift:.2e}, min u {min:.2e}"),
    ))
}

fn stability_boundary() -> Result<(bool, String), String> {
    let rho = SpectralMeasure::point(1.0).map_err(err)?;
    let scheme = TimeScheme::gl(0.5).map_err(err)?;
    let jumps = JumpWeights::build(&rho, 1, 0.2, 64, DEFAULT_TAIL_TOLERANCE).map_err(err)?;
    let tau_max = scheme.stability_bound(jumps.q_total());
    let coeffs = scheme.table(10, 1.05 * tau_max).map_err(err)?;
    let over = LatticeKernel::new(jumps.clone(), &scheme, 1.05 * tau_max).map_err(err)?;
    let mut grid = init_grid(1, 0.2, 1.05 * tau_max, 50).map_err(err)?;
    let scheme_refuses = matches!(grid.step(&coeffs, &over), Err(ctrw::Error::StabilityViolation { .. }));
    let sampler_refuses = matches!(
        StepSampler::new(&coeffs, &over),
        Err(ctrw::Error::StabilityViolation { .. })
    ) && sample_ensemble(10, 5, &coeffs, &over, 1).is_err();
    let at = LatticeKernel::new(jumps, &scheme, tau_max).map_err(err)?;
    let q0 = at.q0();
    Ok((
        scheme_refuses && sampler_refuses && q0.abs() <= 1e-12,
        format!("refused: scheme {scheme_refuses}, sampler {sampler_refuses}; p0 at tau_max = {q0:.2e}"),
    ))
}

fn markovian_density() -> Result<(bool, String), String> {
    let config = ExperimentConfig {
        beta: Some(1.0),
        h_list: vec![0.2, 0.1, 0.05],
        t_final: Some(1.0),
        kernel_range: Some(200.0),
        window_range: Some(50.0),
        ..ExperimentConfig::default()
    };
    let scheme = config.time_scheme().map_err(err)?;
    let cap = |j: &JumpWeights| 1.0 / (2.0 * j.q_total());
    let mut errs = Vec::new();
    for &h in &config.h_list {
        let level = prepare_level(&config, &scheme, h, Some(&cap)).map_err(err)?;
        let t = level.t_final;
        let grid = level.run_grid().map_err(err)?;
        let n = grid.current_step();
        let m = (10.0 / h).round() as i64;
        let e = (-m..=m)
            .map(|j| {
                let x = j as f64 * h;
                (grid.value(n, &[j]) / h - t / (PI * (t * t + x * x))).abs()
            })
            .fold(0.0, f64::max);
        errs.push(e);
    }
    Ok((
        decreasing(&errs) && errs[2] < 0.01,
        format!("sup density errors {}", fmt(&errs)),
    ))
}

fn cf_convergence() -> Result<(bool, String), String> {
    let config = ExperimentConfig {
        beta: Some(0.5),
        h_list: vec![0.2, 0.1, 0.05],
        t_final: Some(1.0),
        xi_probes: vec![0.5, 1.0, 2.0],
        kernel_range: Some(100.0),
        window_range: Some(50.0),
        ..ExperimentConfig::default()
    };
    let e1 = mittag_leffler(0.5, -1.0, &MlConfig::default()).map_err(err)?;
    let report = run_convergence(&config).map_err(err)?;
    let errs: Vec<f64> = report.rows.iter().map(|r| r.cf_error.unwrap_or(f64::NAN)).collect();
    Ok((
        decreasing(&errs) && errs[2] < 0.02 && (e1 - 0.4275836).abs() < 1e-7,
        format!("sup cf errors {}; E_0.5(-1) = {e1:.7}", fmt(&errs)),
    ))
}

fn law_equivalence() -> Result<(bool, String), String> {
    let n_walkers = 100_000;
    let steps = 50;
    let (h, trunc) = (0.4, 64);
    let rho = SpectralMeasure::point(1.0).map_err(err)?;
    let scheme = TimeScheme::gl(0.5).map_err(err)?;
    let jumps = JumpWeights::build(&rho, 1, h, trunc, DEFAULT_TAIL_TOLERANCE).map_err(err)?;
    let tau = 0.9 * scheme.stability_bound(jumps.q_total());
    let kernel = LatticeKernel::new(jumps, &scheme, tau).map_err(err)?;
    let coeffs = scheme.table(steps, tau).map_err(err)?;
    // a window of steps * K sites loses no mass
    let mut grid = init_grid(1, h, tau, steps * trunc).map_err(err)?;
    grid.run(&coeffs, &kernel, steps).map_err(err)?;
    let ens = sample_ensemble(n_walkers, steps, &coeffs, &kernel, 20_240_917).map_err(err)?;
    let counts = ens.counts(steps);
    let layer = grid.last();
    let observed: Vec<u64> = (0..layer.len())
        .map(|i| *counts.get(&grid.site(i)).unwrap_or(&0))
        .collect();
    let unassigned = n_walkers as u64 - observed.iter().sum::<u64>();
    let test = chi_square(&observed, layer, unassigned).map_err(err)?;
    let tol = 4.0 / (n_walkers as f64).sqrt();
    let mut worst = 0.0f64;
    for xi in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let ecf = ens.cf(steps, h, &[xi]).map_err(err)?;
        let gcf = grid.cf(steps, &[xi]).map_err(err)?;
        worst = worst.max((ecf - gcf).norm());
    }
    Ok((
        test.p_value > 0.001 && worst <= tol,
        format!(
            "chi2 = {:.1} on {} dof, p = {:.3}; max |ecf - cf| = {worst:.2e} (tol {tol:.2e})",
            test.statistic, test.dof, test.p_value
        ),
    ))
}

fn mittag_leffler_oracles() -> Result<(bool, String), String> {
    let cfg = MlConfig::default();
    let mut e_exp = 0.0f64;
    for i in 0..=300 {
        let x = i as f64 * 0.1;
        let v = mittag_leffler(1.0, -x, &cfg).map_err(err)?;
        e_exp = e_exp.max((v / (-x).exp() - 1.0).abs());
    }
    let mut e_erfc = 0.0f64;
    for i in 0..=500 {
        let x = i as f64 * 0.01;
        let v = mittag_leffler(0.5, -x, &cfg).map_err(err)?;
        let oracle = (x * x).exp() * erfc(x);
        e_erfc = e_erfc.max((v / oracle - 1.0).abs());
    }
    Ok((
        e_exp <= 1e-8 && e_erfc <= 1e-7,
        format!("rel err vs exp {e_exp:.2e}, vs erfc {e_erfc:.2e}"),
    ))
}

fn discrete_laplace() -> Result<(bool, String), String> {
    let (beta, xi, s) = (0.5, 1.0, 1.0);
    let rho = SpectralMeasure::point(1.0).map_err(err)?;
    let scheme = TimeScheme::gl(beta).map_err(err)?;
    let target = laplace_symbol(beta, rho.psi(&[xi]), s).map_err(err)?;
    let mut errs = Vec::new();
    for h in [0.2, 0.1, 0.05] {
        let jumps = JumpWeights::build(&rho, 1, h, (100.0 / h) as usize, DEFAULT_TAIL_TOLERANCE).map_err(err)?;
        let tau = 0.9 * scheme.stability_bound(jumps.q_total());
        let kernel = LatticeKernel::new(jumps, &scheme, tau).map_err(err)?;
        // e^{-s tau N} below 1e-11
        let n = (26.0 / (s * tau)).ceil() as usize;
        let coeffs = scheme.table(n, tau).map_err(err)?;
        let u = cf_recursion(&coeffs, kernel.cf(&[xi]).map_err(err)?, n).map_err(err)?;
        errs.push((discrete_laplace_cf(&u, tau, s).map_err(err)? - target).abs());
    }
    Ok((
        decreasing(&errs) && errs[2] < 0.05,
        format!("laplace errors {}", fmt(&errs)),
    ))
}

fn distributed_reduction() -> Result<(bool, String), String> {
    let beta = 0.5;
    let point = TimeMeasure::point(beta).map_err(err)?;
    let mut bitwise = true;
    for (variant, single) in [
        (Variant::Gl, gl_coefficients(beta, 400, 0.01).map_err(err)?),
        (Variant::Liu, liu_coefficients(beta, 400, 0.01).map_err(err)?),
    ] {
        let dist = distributed_coefficients(&point, variant, 400, 0.01).map_err(err)?;
        bitwise &= dist.c_values() == single.c_values() && dist.gamma_values() == single.gamma_values();
    }

    let base = ExperimentConfig {
        h_list: vec![0.2],
        t_final: Some(1.0),
        kernel_range: Some(20.0),
        window_range: Some(10.0),
        ..ExperimentConfig::default()
    };
    let single_cfg = ExperimentConfig {
        beta: Some(beta),
        ..base.clone()
    };
    let dist_cfg = ExperimentConfig {
        mu: Some(point),
        ..base.clone()
    };
    let a = prepare_level(&single_cfg, &single_cfg.time_scheme().map_err(err)?, 0.2, None).map_err(err)?;
    let b = prepare_level(&dist_cfg, &dist_cfg.time_scheme().map_err(err)?, 0.2, None).map_err(err)?;
    let (ga, gb) = (a.run_grid().map_err(err)?, b.run_grid().map_err(err)?);
    let layer_diff = ga
        .layers()
        .iter()
        .zip(gb.layers())
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max);

    let mixed = ExperimentConfig {
        mu: Some(TimeMeasure::atomic(&[(0.3, 0.5), (0.8, 0.5)]).map_err(err)?),
        h_list: vec![0.4, 0.2],
        t_final: Some(0.5),
        kernel_range: Some(20.0),
        window_range: Some(10.0),
        xi_probes: vec![0.5, 1.0, 2.0, 4.0],
        n_walkers: 40_000,
        master_seed: 7,
        tau_rule: TauRule::FractionOfBound { fraction: 0.9 },
        ..ExperimentConfig::default()
    };
    let report = run_distributed_order(&mixed).map_err(err)?;
    let mc = &report.mc[0];
    Ok((
        bitwise && layer_diff <= 1e-12 && mc.passed,
        format!(
            "coefficients bitwise {bitwise}, max layer diff {layer_diff:.1e}; mixed mu |ecf - cf| = {:.2e} (tol {:.2e})",
            mc.ecf_vs_scheme, mc.tolerance
        ),
    ))
}

fn main() -> ExitCode {
    let checks: [(usize, &str, f64, Check); 11] = [
        (1, "coefficient identities", 1.0, coefficient_identities),
        (2, "lattice symbol limit", 30.0, lattice_symbol_limit),
        (3, "mixture symbol limit", 30.0, mixture_symbol_limit),
        (4, "conservation and positivity", 60.0, conservation),
        (5, "stability boundary", 1.0, stability_boundary),
        (6, "markovian density convergence", 120.0, markovian_density),
        (7, "characteristic function convergence", 180.0, cf_convergence),
        (8, "sampler and scheme law", 120.0, law_equivalence),
        (9, "mittag-leffler evaluator", 1.0, mittag_leffler_oracles),
        (10, "discrete laplace limit", 120.0, discrete_laplace),
        (11, "distributed-order reduction", 180.0, distributed_reduction),
    ];
    let mut failures = 0;
    for (id, name, budget, check) in checks {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        let (passed, detail) = match outcome {
            Ok((ok, detail)) => (ok && secs < budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        let verdict = if passed { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict} {name}: {detail} ({secs:.2} s of {budget} s)");
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
