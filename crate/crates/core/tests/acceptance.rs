//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.

mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{frobenius_diff, random_saddle, random_sparse, random_vector, rel_err, rng};
use hilung::cavity::{CavityProblem, LidProfile};
use hilung::krylov::{apply_precond, eta_newton, fgmres, GmresParams, IdentityPreconditioner, PrecondOperator};
use hilung::mlilu::{factorize, FactorParams};
use hilung::nonlinear::{armijo_damp, hilung, refactor_needed, NonlinearReport, Phase, Regime, SolverConfig};
use hilung::sparse::vector::{dot, norm2, norm_inf};

fn verdict(id: &str, ok: bool, detail: String) {
    println!("{} {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id}: {detail}");
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

struct CavityRun {
    report: NonlinearReport,
    csv: String,
    elapsed: Duration,
}

fn cavity_run(level: u32, re: f64, refine_newton: usize) -> CavityRun {
    let start = Instant::now();
    let prob = CavityProblem::new(level, re, LidProfile::Standard).unwrap();
    let cfg = SolverConfig {
        sigma: 1e-5,
        regime: Regime::for_reynolds(re),
        refine_newton,
        ..SolverConfig::default()
    };
    let x0 = prob.stokes_initial_guess().unwrap();
    let (_, report) = hilung(&prob, &x0, &cfg).unwrap();
    let mut buf = Vec::new();
    report.write_csv_to(&mut buf).unwrap();
    CavityRun {
        report,
        csv: String::from_utf8(buf).unwrap(),
        elapsed: start.elapsed(),
    }
}

fn moderate(level: u32) -> &'static CavityRun {
    static L5: OnceLock<CavityRun> = OnceLock::new();
    static L6: OnceLock<CavityRun> = OnceLock::new();
    match level {
        5 => L5.get_or_init(|| cavity_run(5, 200.0, 2)),
        6 => L6.get_or_init(|| cavity_run(6, 200.0, 2)),
        _ => unreachable!(),
    }
}

fn high_re(refine_newton: usize) -> &'static CavityRun {
    static K1: OnceLock<CavityRun> = OnceLock::new();
    static K2: OnceLock<CavityRun> = OnceLock::new();
    match refine_newton {
        1 => K1.get_or_init(|| cavity_run(6, 1000.0, 1)),
        2 => K2.get_or_init(|| cavity_run(6, 1000.0, 2)),
        _ => unreachable!(),
    }
}

#[test]
fn c1_exact_factorization_oracle() {
    let start = Instant::now();
    let mut worst_err = 0.0f64;
    let mut worst_iters = 0usize;
    let mut all_converged = true;
    for case in 0..20u64 {
        let mut r = rng(1000 + case);
        let a = if case < 5 {
            let np = 10 + 5 * case as usize;
            random_saddle(3 * np, np, &mut r)
        } else {
            let n = 20 + 12 * (case as usize - 5);
            random_sparse(n, 5, &mut r)
        };
        let n = a.nrows();
        assert!(n <= 200);
        let params = FactorParams {
            alpha: n as f64,
            droptol: 0.0,
            ..FactorParams::default()
        };
        let m = factorize(&a, &params).unwrap();
        worst_err = worst_err.max(frobenius_diff(&a, &m.reassemble()) / a.frobenius_norm());
        let b = random_vector(n, &mut r);
        let gp = GmresParams {
            restart: 30,
            max_iters: 30,
            rtol: 1e-12,
        };
        let (_, rep) = fgmres(&a, &m, &b, &gp).unwrap();
        worst_iters = worst_iters.max(rep.iterations);
        all_converged &= rep.converged;
    }
    let elapsed = start.elapsed();
    verdict(
        "c1 exact factorization",
        worst_err <= 1e-10 && worst_iters <= 2 && all_converged && within(elapsed, 10),
        format!("max reassembly error {worst_err:.2e}, max FGMRES iterations {worst_iters}, {elapsed:.2?}"),
    );
}

#[test]
fn c2_jacobian_consistency() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for level in [4, 5] {
        for re in [100.0, 1000.0] {
            let p = CavityProblem::new(level, re, LidProfile::Standard).unwrap();
            let mut r = rng(level as u64 * 10_000 + re as u64);
            let x = random_vector(p.n_unknowns(), &mut r);
            let f = p.residual(&x);
            let j = p.newton_operator(&x);
            for _ in 0..10 {
                let s = random_vector(p.n_unknowns(), &mut r);
                let h = 1e-7 * norm2(&x) / norm2(&s);
                let xs: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + h * b).collect();
                let fd: Vec<f64> = p.residual(&xs).iter().zip(&f).map(|(a, b)| (a - b) / h).collect();
                worst = worst.max(rel_err(&fd, &j.spmv(&s).unwrap()));
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "c2 Jacobian consistency",
        worst <= 1e-5 && within(elapsed, 30),
        format!("max relative finite-difference error {worst:.2e} over 40 directions, {elapsed:.2?}"),
    );
}

#[test]
fn c3_null_space_identities() {
    let start = Instant::now();
    let mut worst_op = 0.0f64;
    let mut worst_proj = 0.0f64;
    for level in 4..=6 {
        let p = CavityProblem::new(level, 200.0, LidProfile::Standard).unwrap();
        let q = p.null_vector();
        let x = random_vector(p.n_unknowns(), &mut rng(level as u64));
        for j in [p.newton_operator(&x), p.oseen_operator(&x)] {
            let jq = j.spmv(&q).unwrap();
            worst_op = worst_op.max(norm_inf(&jq) / j.inf_norm());
        }
        let j = p.newton_operator(&x);
        let m = factorize(&p.oseen_operator(&x), &FactorParams::default()).unwrap();
        for k in [1, 2] {
            let pre = PrecondOperator::new(&m, &j, Some(&q), k).unwrap();
            let v = random_vector(p.n_unknowns(), &mut rng(100 + level as u64));
            let z = apply_precond(&pre, &v);
            worst_proj = worst_proj.max(dot(&q, &z).abs() / norm2(&z));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        "c3 null-space identities",
        worst_op <= 1e-12 && worst_proj <= 1e-12 && within(elapsed, 30),
        format!("max ‖Jq‖∞/‖J‖∞ {worst_op:.2e}, max |qᵀz|/‖z‖ {worst_proj:.2e}, {elapsed:.2?}"),
    );
}

#[test]
fn c4_moderate_reynolds_cavity() {
    let mut ok = true;
    let mut detail = Vec::new();
    let mut total = Duration::ZERO;
    for level in [5, 6] {
        let run = moderate(level);
        let rep = &run.report;
        ok &= rep.converged && rep.nonlinear_iterations() <= 12 && rep.total_gmres <= 120;
        total += run.elapsed;
        detail.push(format!(
            "level {level}: converged {}, {} nonlinear, {} FGMRES",
            rep.converged,
            rep.nonlinear_iterations(),
            rep.total_gmres
        ));
    }
    verdict(
        "c4 cavity Re 200",
        ok && within(total, 300),
        format!("{}, {total:.2?}", detail.join("; ")),
    );
}

#[test]
fn c5_high_reynolds_cavity() {
    let run = high_re(2);
    let rep = &run.report;
    verdict(
        "c5 cavity Re 1000",
        rep.converged && rep.nonlinear_iterations() <= 20 && rep.total_gmres <= 400 && within(run.elapsed, 900),
        format!(
            "level 6: converged {}, {} nonlinear, {} FGMRES, {:.2?}",
            rep.converged,
            rep.nonlinear_iterations(),
            rep.total_gmres,
            run.elapsed
        ),
    );
}

/// Checks the Picard-to-Newton switch using only the convergence CSV.
fn switch_is_consistent(csv: &str) -> Result<usize, String> {
    let mut lines = csv.lines();
    if lines.next() != Some("step,phase,normF,eta,gmres_iters,refactorized,omega") {
        return Err("unexpected header".into());
    }
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let norm0: f64 = rows.first().ok_or("empty history")?[2].parse().map_err(|_| "bad normF")?;
    let mut switch = None;
    for (k, row) in rows.iter().enumerate() {
        let norm: f64 = row[2].parse().map_err(|_| "bad normF")?;
        let expect_newton = switch.is_some() || norm <= 0.05 * norm0;
        if expect_newton && switch.is_none() {
            switch = Some(k);
        }
        let phase = row[1];
        if phase != if expect_newton { "newton" } else { "picard" } {
            return Err(format!("step {k} has phase {phase} at normF {norm:e}"));
        }
    }
    let k = switch.ok_or("no Newton step recorded")?;
    if rows[k][5] != "true" {
        return Err(format!("first Newton step {k} did not refactorize"));
    }
    Ok(k)
}

#[test]
fn c6_hot_start_switch() {
    let runs = [("level 5 Re 200", moderate(5)), ("level 6 Re 200", moderate(6)), ("level 6 Re 1000", high_re(2))];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, run) in runs {
        match switch_is_consistent(&run.csv) {
            Ok(k) => detail.push(format!("{name}: switch at step {k}")),
            Err(e) => {
                ok = false;
                detail.push(format!("{name}: {e}"));
            }
        }
    }
    verdict("c6 hot-start switch", ok, detail.join("; "));
}

#[test]
fn c7_factor_growth() {
    let start = Instant::now();
    let params = FactorParams::with_thresholds(5.0, 0.01);
    let mut ratios = Vec::new();
    for level in 4..=6 {
        let p = CavityProblem::new(level, 200.0, LidProfile::Standard).unwrap();
        let x0 = p.stokes_initial_guess().unwrap();
        let a = p.oseen_operator(&x0);
        let m = factorize(&a, &params).unwrap();
        ratios.push(m.total_nnz() as f64 / a.nnz() as f64);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    let elapsed = start.elapsed();
    verdict(
        "c7 factor growth",
        hi <= 2.0 * lo && within(elapsed, 300),
        format!("total_nnz/nnz at levels 4-6: {ratios:.2?}, spread {:.2}, {elapsed:.2?}", hi / lo),
    );
}

#[test]
fn c8_iterative_refinement() {
    let (k1, k2) = (high_re(1), high_re(2));
    let n1 = k1.report.gmres_in_phase(Phase::Newton);
    let n2 = k2.report.gmres_in_phase(Phase::Newton);
    let elapsed = k1.elapsed + k2.elapsed;
    verdict(
        "c8 iterative refinement",
        k2.report.converged && n2 <= n1 && within(elapsed, 1800),
        format!("Newton-phase FGMRES with K=2: {n2}, with K=1: {n1}, {elapsed:.2?}"),
    );
}

#[test]
fn c9_forcing_and_damping_units() {
    let start = Instant::now();
    let mut failures = Vec::new();

    let eta_cases = [
        (eta_newton(0.3, 1.0, 0.1, 0.3, 1e-6, 1.0), 0.9 * 0.3 * 0.3),
        (eta_newton(0.5, 0.5, 0.1, 0.3, 1e-6, 1.0), 0.3),
        (eta_newton(1e-6, 1e-5, 0.1, 0.3, 1e-6, 1.0), 0.3),
    ];
    for (k, (got, want)) in eta_cases.iter().enumerate() {
        if got != want {
            failures.push(format!("eta example {k}: {got} != {want}"));
        }
    }

    let f = |x: &[f64]| x.to_vec();
    match armijo_damp(f, &[1.0], &[-1.0], 1.0, 1e-4, 20) {
        Ok(d) if d.omega == 1.0 && d.x == [0.0] => {}
        other => failures.push(format!("full step: {other:?}")),
    }
    match armijo_damp(f, &[1.0], &[-4.0], 1.0, 1e-4, 20) {
        Ok(d) if d.omega == 0.25 && d.x == [0.0] => {}
        other => failures.push(format!("halving trace: {other:?}")),
    }

    let cfg = SolverConfig::default();
    let x_prev = [1.0, 0.0];
    let mut table = 0;
    for iters in [19, 20] {
        for s in [[0.1, 0.0], [0.9, 0.0]] {
            for first in [false, true] {
                let want = iters >= 20 || s[0] >= 0.8 || first;
                if refactor_needed(iters, &s, &x_prev, first, &cfg) != want {
                    failures.push(format!("truth table ({iters}, {s:?}, {first})"));
                }
                table += 1;
            }
        }
    }
    if !refactor_needed(0, &[1e-3], &[0.0], false, &cfg) {
        failures.push("zero previous iterate".into());
    }
    if refactor_needed(0, &[0.0], &[1.0], false, &cfg) {
        failures.push("zero increment".into());
    }
    // sanity: the identity preconditioner is a no-op for FGMRES on I
    let (_, rep) = fgmres(
        &hilung::sparse::CsrMatrix::identity(3),
        &IdentityPreconditioner,
        &[1.0, 2.0, 3.0],
        &GmresParams::default(),
    )
    .unwrap();
    if rep.iterations != 1 {
        failures.push(format!("identity FGMRES took {} iterations", rep.iterations));
    }

    let elapsed = start.elapsed();
    verdict(
        "c9 forcing and damping units",
        failures.is_empty() && within(elapsed, 1),
        if failures.is_empty() {
            format!("3 forcing examples, 2 damping traces, {table}-case truth table exact, {elapsed:.2?}")
        } else {
            failures.join("; ")
        },
    );
}
