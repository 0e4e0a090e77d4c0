use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use ctrw::coefficients::{TimeOrder, Variant};
use ctrw::harness::{
    prepare_level, run_convergence, run_distributed_order, run_theorem2, ConvergenceReport, ExperimentConfig,
};
use ctrw::reference::{frac_density, green_function_beta1, spectral_solution, symmetric_grid};
use ctrw::sampler::sample_ensemble;
use serde::Serialize;
use serde_json::json;

use crate::args::CommonArgs;
use crate::Command;

pub fn run(common: &CommonArgs, command: &Command) -> Result<()> {
    let config = common.experiment()?;
    let out = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    match command {
        Command::Coeffs { horizon } => coeffs(&config, &out, *horizon),
        Command::Kernel => kernel(&config, &out),
        Command::Solve => solve(&config, &out),
        Command::Sample => sample(&config, &out),
        Command::Reference { points } => reference(&config, &out, *points),
        Command::Converge => report(&out, "converge", run_convergence(&config)?),
        Command::Theorem2 => report(&out, "theorem2", run_theorem2(&config)?),
        Command::Distorder => report(&out, "distorder", run_distributed_order(&config)?),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

fn site_header(dim: usize, prefix: &str) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}{i}")).collect()
}

fn coeffs(config: &ExperimentConfig, out: &Path, horizon: Option<usize>) -> Result<()> {
    let scheme = config.time_scheme()?;
    let level = prepare_level(config, &scheme, config.h_list[0], None)?;
    let n = horizon.or(config.n_steps).unwrap_or(50);
    let table = scheme.table(n, level.tau)?;
    let mut w = csv_writer(&out.join("coeffs.csv"))?;
    w.write_record(["l", "c_l", "gamma_l"])?;
    w.write_record(["0".to_string(), String::new(), table.gamma(0).to_string()])?;
    for l in 1..=n {
        w.write_record([l.to_string(), table.c(l).to_string(), table.gamma(l).to_string()])?;
    }
    w.flush()?;
    println!("wrote {}", out.join("coeffs.csv").display());
    write_json(&out.join("coeffs.json"), &table)
}

fn kernel(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let scheme = config.time_scheme()?;
    let level = prepare_level(config, &scheme, config.h_list[0], None)?;
    let k = &level.kernel;
    let q = k.q_total();
    let bound = |variant: Variant| {
        let mut s = scheme.clone();
        s.variant = variant;
        match &s.order {
            TimeOrder::Single(b) if variant == Variant::Liu && *b >= 1.0 => None,
            TimeOrder::Distributed(mu) if variant == Variant::Liu && mu.beta_max() >= 1.0 => None,
            _ => Some(s.stability_bound(q)),
        }
    };
    let dim = k.dim();
    let mut w = csv_writer(&out.join("kernel.csv"))?;
    let mut header = site_header(dim, "k");
    header.push("q".into());
    w.write_record(&header)?;
    for (site, p) in k.markov_probabilities()? {
        let mut rec: Vec<String> = site.iter().map(i64::to_string).collect();
        rec.push(p.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    println!("wrote {}", out.join("kernel.csv").display());
    println!(
        "tau_max: gl = {:?}, liu = {:?}",
        bound(Variant::Gl),
        bound(Variant::Liu)
    );
    write_json(
        &out.join("kernel.json"),
        &json!({
            "summary": k.summary(),
            "tau_max_gl": bound(Variant::Gl),
            "tau_max_liu": bound(Variant::Liu),
        }),
    )
}

fn solve(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let scheme = config.time_scheme()?;
    let level = prepare_level(config, &scheme, config.h_list[0], None)?;
    let grid = level.run_grid()?;
    let n = grid.current_step();
    let dim = grid.dim();
    let mut w = csv_writer(&out.join("solve_layer.csv"))?;
    let mut header = site_header(dim, "j");
    header.extend(site_header(dim, "x"));
    header.push("u".into());
    w.write_record(&header)?;
    for (idx, &u) in grid.last().iter().enumerate() {
        let site = grid.site(idx);
        let mut rec: Vec<String> = site.iter().map(i64::to_string).collect();
        rec.extend(site.iter().map(|&j| (j as f64 * level.h).to_string()));
        rec.push(u.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    println!("wrote {}", out.join("solve_layer.csv").display());
    write_json(
        &out.join("solve.json"),
        &json!({
            "kernel": level.kernel.summary(),
            "n_steps": n,
            "t_final": level.t_final,
            "window": level.window,
            "mass": grid.mass(n),
            "mass_drift": grid.max_mass_drift(),
            "boundary_loss": grid.boundary_mass_lost(),
            "min_value": grid.min_value(),
            "runtime_s": started.elapsed().as_secs_f64(),
            "config": config,
        }),
    )
}

fn sample(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    if config.n_walkers == 0 {
        anyhow::bail!(ctrw::Error::InvalidParameter("sample needs --walkers > 0".into()));
    }
    let scheme = config.time_scheme()?;
    let level = prepare_level(config, &scheme, config.h_list[0], None)?;
    let ens = sample_ensemble(
        config.n_walkers,
        level.n_steps,
        &level.coeffs,
        &level.kernel,
        config.master_seed,
    )?;
    let dim = config.dim;
    let nw = config.n_walkers as f64;
    let mut w = csv_writer(&out.join("sample_histogram.csv"))?;
    let mut header = site_header(dim, "j");
    header.extend(site_header(dim, "x"));
    header.extend(["count".to_string(), "frequency".to_string()]);
    w.write_record(&header)?;
    for (site, count) in ens.counts(level.n_steps) {
        let mut rec: Vec<String> = site.iter().map(i64::to_string).collect();
        rec.extend(site.iter().map(|&j| (j as f64 * level.h).to_string()));
        rec.push(count.to_string());
        rec.push((count as f64 / nw).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    println!("wrote {}", out.join("sample_histogram.csv").display());
    write_json(
        &out.join("sample.json"),
        &json!({
            "master_seed": config.master_seed,
            "n_walkers": config.n_walkers,
            "n_steps": level.n_steps,
            "tau": level.tau,
            "h": level.h,
            "branch_counts": ens.branch_counts,
            "runtime_s": started.elapsed().as_secs_f64(),
        }),
    )
}

fn reference(config: &ExperimentConfig, out: &Path, points: usize) -> Result<()> {
    let beta = match (&config.mu, config.beta) {
        (Some(mu), _) => mu
            .as_single_order()
            .ok_or_else(|| ctrw::Error::InvalidParameter("the exact transform needs a single time order".into()))?,
        (None, b) => b.unwrap_or(0.5),
    };
    let t = config.horizon_time();
    let sol = spectral_solution(&config.rho, beta, t, &config.xi_probes, &config.ml)?;
    let mut w = csv_writer(&out.join("reference_cf.csv"))?;
    w.write_record(["xi", "cf"])?;
    for (xi, v) in sol.xi_grid.iter().zip(&sol.cf_values) {
        w.write_record([xi.to_string(), v.to_string()])?;
    }
    w.flush()?;
    println!("wrote {}", out.join("reference_cf.csv").display());
    if config.dim != 1 {
        println!("density output is one-dimensional; skipped for dim = {}", config.dim);
        return write_json(
            &out.join("reference.json"),
            &json!({ "beta": beta, "t": t, "rho": config.rho }),
        );
    }
    let x = symmetric_grid(config.x_window, points.max(1));
    let dens = if beta == 1.0 {
        green_function_beta1(&config.rho, t, &x, &config.density)?
    } else {
        frac_density(&config.rho, beta, t, &x, &config.density, &config.ml)?
    };
    for warning in &dens.warnings {
        eprintln!("warning: {warning}");
    }
    let mut w = csv_writer(&out.join("reference_density.csv"))?;
    w.write_record(["x", "density"])?;
    for (x, g) in dens.x.iter().zip(&dens.density) {
        w.write_record([x.to_string(), g.to_string()])?;
    }
    w.flush()?;
    println!("wrote {}", out.join("reference_density.csv").display());
    write_json(
        &out.join("reference.json"),
        &json!({ "beta": beta, "t": t, "rho": config.rho, "density": dens }),
    )
}

fn report(out: &Path, name: &str, report: ConvergenceReport) -> Result<()> {
    write_rows(&out.join(format!("{name}_rows.csv")), &report.rows)?;
    if !report.mc.is_empty() {
        write_rows(&out.join(format!("{name}_mc.csv")), &report.mc)?;
    }
    for flag in &report.flags {
        eprintln!("flag: {flag}");
    }
    write_json(&out.join(format!("{name}_report.json")), &report)
}
