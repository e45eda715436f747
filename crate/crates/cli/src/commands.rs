use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use hilung::cavity::CavityProblem;
use hilung::krylov::{fgmres, GmresParams, PrecondOperator};
use hilung::mlilu::{factorize, FactorParams, MultilevelFactor};
use hilung::nonlinear::{hilung, Regime, SolverConfig};
use hilung::sparse::market::{read_matrix, read_vector, write_matrix, write_vector};
use hilung::sparse::vector::{dot, norm2};
use serde_json::json;

use crate::overrides;
use crate::{CavityArgs, FactorStatsArgs, LinsolveArgs};

/// Invalid input, reported with exit status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn write_summary(dir: &Path, value: &serde_json::Value) -> Result<()> {
    let path = dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn factor_params(alpha: f64, droptol: f64, set: &[String]) -> Result<FactorParams> {
    let mut p = FactorParams::with_thresholds(alpha, droptol);
    for item in set {
        let (k, v) = overrides::split(item).map_err(usage)?;
        overrides::apply_factor(&mut p, k, v).map_err(usage)?;
    }
    p.validate().map_err(|e| usage(e.to_string()))?;
    Ok(p)
}

fn solver_config(args: &CavityArgs) -> Result<SolverConfig> {
    let mut cfg = SolverConfig {
        sigma: args.sigma,
        regime: args.regime.unwrap_or_else(|| Regime::for_reynolds(args.re)),
        ..SolverConfig::default()
    };
    for item in &args.set {
        let (k, v) = overrides::split(item).map_err(usage)?;
        overrides::apply_solver(&mut cfg, k, v).map_err(usage)?;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn read_matrix_arg(path: &Path) -> Result<hilung::sparse::CsrMatrix> {
    let a = read_matrix(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
    if !a.is_square() {
        return Err(usage(format!("{} is {}×{}, not square", path.display(), a.nrows(), a.ncols())));
    }
    Ok(a)
}

fn read_vector_arg(path: &Path, n: usize, what: &str) -> Result<Vec<f64>> {
    let v = read_vector(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
    if v.len() != n {
        return Err(usage(format!("{what} {} has length {}, matrix has {n} rows", path.display(), v.len())));
    }
    Ok(v)
}

pub fn cavity(args: &CavityArgs) -> Result<bool> {
    let cfg = solver_config(args)?;
    let dir = &args.output.output_dir;
    prepare_dir(dir)?;
    let start = Instant::now();

    let prob = CavityProblem::new(args.level, args.re, args.lid).map_err(|e| usage(e.to_string()))?;
    let x0 = prob.stokes_initial_guess().context("solving the Stokes problem for the initial guess")?;
    let (x, report) = hilung(&prob, &x0, &cfg)?;
    let wall = start.elapsed().as_secs_f64();

    report.write_csv(dir.join("convergence.csv"))?;
    prob.write_solution_csv(&x, dir.join("solution.csv"))?;
    if args.export_operators {
        let zero = vec![0.0; prob.n_unknowns()];
        let rhs: Vec<f64> = prob.stokes_residual(&zero).iter().map(|v| -v).collect();
        write_matrix(prob.stokes_operator(), dir.join("stokes.mtx"))?;
        write_vector(&rhs, dir.join("stokes_rhs.mtx"))?;
        write_matrix(&prob.oseen_operator(&x), dir.join("oseen.mtx"))?;
        write_matrix(&prob.newton_operator(&x), dir.join("jacobian.mtx"))?;
        write_vector(&prob.null_vector(), dir.join("null.mtx"))?;
    }

    let relative = report.final_norm_f / report.norm_f0;
    write_summary(
        dir,
        &json!({
            "command": "cavity",
            "level": args.level,
            "re": args.re,
            "lid": args.lid.to_string(),
            "regime": cfg.regime.to_string(),
            "sigma": cfg.sigma,
            "unknowns": prob.n_unknowns(),
            "converged": report.converged,
            "nonlinear_iterations": report.nonlinear_iterations(),
            "total_gmres": report.total_gmres,
            "factorizations": report.factorizations,
            "initial_residual_norm": report.norm_f0,
            "final_residual_norm": report.final_norm_f,
            "relative_residual": relative,
            "failure": report.failure,
            "wall_time_s": wall,
        }),
    )?;
    println!(
        "level={} re={} unknowns={} converged={} nonlinear_iterations={} total_gmres={} factorizations={} relative_residual={:.3e} wall_time_s={:.3}",
        args.level,
        args.re,
        prob.n_unknowns(),
        report.converged,
        report.nonlinear_iterations(),
        report.total_gmres,
        report.factorizations,
        relative,
        wall
    );
    if let Some(why) = &report.failure {
        eprintln!("not converged: {why}");
    }
    Ok(report.converged)
}

pub fn linsolve(args: &LinsolveArgs) -> Result<bool> {
    let params = factor_params(args.alpha, args.droptol, &args.set)?;
    let gmres = GmresParams {
        restart: args.restart,
        max_iters: args.max_iters,
        rtol: args.rtol,
    };
    gmres.validate().map_err(|e| usage(e.to_string()))?;
    if args.refine == 0 {
        return Err(usage("--refine must be at least 1"));
    }
    let a = read_matrix_arg(&args.matrix)?;
    let n = a.nrows();
    let b = match &args.rhs {
        Some(path) => read_vector_arg(path, n, "right-hand side")?,
        None => a.spmv(&vec![1.0; n])?,
    };
    let null = match &args.null {
        Some(path) => {
            let mut q = read_vector_arg(path, n, "null vector")?;
            let norm = norm2(&q);
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(usage(format!("null vector {} has norm {norm}", path.display())));
            }
            q.iter_mut().for_each(|v| *v /= norm);
            Some(q)
        }
        None => None,
    };
    let dir = &args.output.output_dir;
    prepare_dir(dir)?;

    let start = Instant::now();
    let m = factorize(&a, &params)?;
    let pre = PrecondOperator::new(&m, &a, null.as_deref(), args.refine)?;
    let (x, report) = fgmres(&a, &pre, &b, &gmres)?;
    let wall = start.elapsed().as_secs_f64();

    write_vector(&x, dir.join("solution.mtx"))?;
    report.write_csv(dir.join("residual.csv"))?;
    m.write_stats_csv(dir.join("factor_stats.csv"))?;
    let r: Vec<f64> = a.spmv(&x)?.iter().zip(&b).map(|(ax, bi)| bi - ax).collect();
    let b_norm = norm2(&b);
    let null_component = null.as_ref().map(|q| dot(q, &r).abs() / if b_norm > 0.0 { b_norm } else { 1.0 });
    write_summary(
        dir,
        &json!({
            "command": "linsolve",
            "matrix": args.matrix.display().to_string(),
            "n": n,
            "nnz": a.nnz(),
            "converged": report.converged,
            "iterations": report.iterations,
            "relative_residual": report.final_relres,
            "breakdown": report.breakdown,
            "levels": m.levels().len(),
            "total_nnz": m.total_nnz(),
            "perturbed": m.is_perturbed(),
            "null_component": null_component,
            "wall_time_s": wall,
        }),
    )?;
    println!(
        "n={} nnz={} converged={} iterations={} relative_residual={:.3e} levels={} total_nnz={} wall_time_s={:.3}",
        n,
        a.nnz(),
        report.converged,
        report.iterations,
        report.final_relres,
        m.levels().len(),
        m.total_nnz(),
        wall
    );
    Ok(report.converged)
}

fn print_stats(m: &MultilevelFactor) {
    println!("level,n,n_b,static_deferred,dynamic_deferred,nnz_l,nnz_u,nnz_schur");
    for s in m.stats() {
        println!(
            "{},{},{},{},{},{},{},{}",
            s.level, s.n, s.n_b, s.static_deferred, s.dynamic_deferred, s.nnz_l, s.nnz_u, s.nnz_schur
        );
    }
}

pub fn factor_stats(args: &FactorStatsArgs) -> Result<bool> {
    let params = factor_params(args.alpha, args.droptol, &args.set)?;
    let a = read_matrix_arg(&args.matrix)?;
    let dir = &args.output.output_dir;
    prepare_dir(dir)?;

    let start = Instant::now();
    let m = factorize(&a, &params)?;
    let wall = start.elapsed().as_secs_f64();
    m.write_stats_csv(dir.join("factor_stats.csv"))?;
    write_summary(
        dir,
        &json!({
            "command": "factor-stats",
            "matrix": args.matrix.display().to_string(),
            "n": a.nrows(),
            "nnz": a.nnz(),
            "levels": m.levels().len(),
            "dense_tail": m.dense_tail().dim(),
            "total_nnz": m.total_nnz(),
            "fill_ratio": m.total_nnz() as f64 / a.nnz().max(1) as f64,
            "perturbed": m.is_perturbed(),
            "wall_time_s": wall,
        }),
    )?;
    print_stats(&m);
    Ok(true)
}
