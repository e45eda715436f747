use crate::error::{Error, Result};
use crate::krylov::{eta_newton, fgmres, GmresParams, PrecondOperator};
use crate::mlilu::{factorize, MultilevelFactor};
use crate::nonlinear::{NonlinearProblem, NonlinearReport, Phase, SolverConfig, StepRecord};
use crate::sparse::vector::norm2;

/// Whether the preconditioner has to be rebuilt before a step.
///
/// True when the previous step needed at least `refactor_iters` FGMRES
/// iterations, when the previous increment was large relative to the previous
/// iterate (`‖s‖ ≥ ε‖x‖`, so a zero iterate always triggers) or at the first
/// Newton step.
pub fn refactor_needed(
    prev_gmres_iters: usize,
    s_prev: &[f64],
    x_prev: &[f64],
    first_newton: bool,
    cfg: &SolverConfig,
) -> bool {
    prev_gmres_iters >= cfg.refactor_iters
        || norm2(s_prev) >= cfg.epsilon * norm2(x_prev)
        || first_newton
}

/// Accepted point of the backtracking line search.
#[derive(Debug, Clone, PartialEq)]
pub struct Damping {
    pub omega: f64,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub norm_f: f64,
}

/// Armijo backtracking: the first `ω ∈ {1, 1/2, 1/4, …}` with
/// `‖F(x + ω s)‖ ≤ (1 - θω)‖F(x)‖`. Each trial point is `x + ω s` for the
/// original direction `s`.
pub fn armijo_damp<F>(
    residual: F,
    x: &[f64],
    s: &[f64],
    norm_f: f64,
    theta: f64,
    max_halvings: usize,
) -> Result<Damping>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut omega = 1.0;
    let mut last_norm = f64::NAN;
    for _ in 0..=max_halvings {
        let trial: Vec<f64> = x.iter().zip(s).map(|(xi, si)| xi + omega * si).collect();
        let f = residual(&trial);
        let norm = norm2(&f);
        // NaN never satisfies the decrease test
        if norm <= (1.0 - theta * omega) * norm_f {
            return Ok(Damping {
                omega,
                x: trial,
                f,
                norm_f: norm,
            });
        }
        last_norm = norm;
        omega *= 0.5;
    }
    Err(Error::LineSearchFailed {
        halvings: max_halvings,
        last_norm,
    })
}

/// Inexact Newton–Krylov solve of `F(x) = 0` from `x0`.
///
/// Picard (fixed-point operator) steps run until `‖F‖ ≤ β‖F(x₀)‖`, Newton
/// steps afterwards. The multilevel factor of the sparsifier is reused across
/// steps unless a refactorization trigger fires. Each step solves
/// `J s ≈ -F` by FGMRES to the forcing tolerance, then damps the step.
/// FGMRES non-convergence is tolerated; a failed line search ends the run
/// with `converged = false`.
pub fn hilung<P>(prob: &P, x0: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, NonlinearReport)>
where
    P: NonlinearProblem + ?Sized,
{
    cfg.validate()?;
    let n = prob.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x0.len() });
    }
    let null = prob.null_basis();

    let mut x = x0.to_vec();
    let mut f = prob.residual(&x);
    let norm_f0 = norm2(&f);
    if !norm_f0.is_finite() {
        return Err(Error::InvalidParameter("residual at the initial guess is not finite".into()));
    }
    let mut norm = norm_f0;
    let mut x_prev = vec![0.0; n];
    let mut s_prev = vec![1.0; n];
    let mut factor: Option<MultilevelFactor> = None;
    let mut prev_iters = 0usize;
    let mut norm_prev: Option<f64> = None;
    let mut eta_prev = cfg.eta_picard;
    let mut had_newton = false;
    let mut steps = Vec::new();
    let mut total_gmres = 0usize;
    let mut factorizations = 0usize;
    let mut failure = None;

    while norm > cfg.sigma * norm_f0 {
        if steps.len() >= cfg.max_nonlinear {
            failure = Some(format!("no convergence within {} nonlinear steps", cfg.max_nonlinear));
            break;
        }
        let newton = norm <= cfg.beta * norm_f0;
        let first_newton = newton && !had_newton;
        let j = prob.operator(&x, newton);

        let refactorized =
            factor.is_none() || refactor_needed(prev_iters, &s_prev, &x_prev, first_newton, cfg);
        if refactorized {
            let js = prob.sparsifier(&x, newton);
            factor = Some(factorize(&js, &cfg.factor_params(newton))?);
            factorizations += 1;
        }
        let m = factor.as_ref().expect("factor built on the first step");

        let eta = match (newton, norm_prev) {
            (false, _) => cfg.eta_picard,
            (true, Some(np)) => eta_newton(norm, np, eta_prev, cfg.eta_max, cfg.sigma, norm_f0),
            (true, None) => cfg.eta_max,
        };
        let refine = if newton { cfg.refine_newton } else { cfg.refine_picard };
        let pre = PrecondOperator::new(m, &j, null.as_deref(), refine)?;
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let params = GmresParams {
            restart: cfg.restart,
            max_iters: cfg.max_gmres,
            rtol: eta,
        };
        let (s, lin) = fgmres(&j, &pre, &rhs, &params)?;
        total_gmres += lin.iterations;

        let mut record = StepRecord {
            step: steps.len(),
            phase: if newton { Phase::Newton } else { Phase::Picard },
            norm_f: norm,
            eta,
            gmres_iters: lin.iterations,
            gmres_relres: lin.final_relres,
            refactorized,
            omega: 0.0,
        };
        match armijo_damp(|y| prob.residual(y), &x, &s, norm, cfg.theta, cfg.max_halvings) {
            Ok(step) => {
                record.omega = step.omega;
                steps.push(record);
                s_prev = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
                x_prev = std::mem::replace(&mut x, step.x);
                f = step.f;
                norm_prev = Some(norm);
                norm = step.norm_f;
            }
            Err(e) => {
                steps.push(record);
                failure = Some(format!("step {}: {e}", steps.len() - 1));
                break;
            }
        }
        prev_iters = lin.iterations;
        eta_prev = eta;
        had_newton |= newton;
    }

    let converged = failure.is_none() && norm <= cfg.sigma * norm_f0;
    Ok((
        x,
        NonlinearReport {
            steps,
            norm_f0,
            final_norm_f: norm,
            converged,
            total_gmres,
            factorizations,
            failure,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CsrMatrix;

    #[test]
    fn full_step_accepted() {
        let d = armijo_damp(|x| x.to_vec(), &[1.0], &[-1.0], 1.0, 1e-4, 20).unwrap();
        assert_eq!(d.omega, 1.0);
        assert_eq!(d.x, vec![0.0]);
    }

    #[test]
    fn overshoot_is_halved_twice() {
        let d = armijo_damp(|x| x.to_vec(), &[1.0], &[-4.0], 1.0, 1e-4, 20).unwrap();
        assert_eq!(d.omega, 0.25);
        assert_eq!(d.x, vec![0.0]);
        assert_eq!(d.norm_f, 0.0);
    }

    #[test]
    fn zero_direction_exhausts_halvings() {
        let err = armijo_damp(|x| x.to_vec(), &[1.0], &[0.0], 1.0, 1e-4, 20).unwrap_err();
        assert!(matches!(err, Error::LineSearchFailed { halvings: 20, .. }));
    }

    #[test]
    fn refactor_truth_table() {
        let cfg = SolverConfig::default();
        let x = [1.0, 0.0];
        let small = [0.1, 0.0];
        let large = [0.9, 0.0];
        for iters_hit in [false, true] {
            for step_large in [false, true] {
                for first_newton in [false, true] {
                    let iters = if iters_hit { 20 } else { 19 };
                    let s = if step_large { &large } else { &small };
                    let expected = iters_hit || step_large || first_newton;
                    assert_eq!(
                        refactor_needed(iters, s, &x, first_newton, &cfg),
                        expected,
                        "{iters_hit} {step_large} {first_newton}"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_previous_iterate_triggers() {
        let cfg = SolverConfig::default();
        assert!(refactor_needed(0, &[1e-30], &[0.0], false, &cfg));
        assert!(!refactor_needed(0, &[0.0], &[1.0], false, &cfg));
    }

    struct Linear {
        a: CsrMatrix,
        b: Vec<f64>,
    }

    impl NonlinearProblem for Linear {
        fn dim(&self) -> usize {
            self.b.len()
        }
        fn residual(&self, x: &[f64]) -> Vec<f64> {
            let ax = self.a.spmv(x).unwrap();
            ax.iter().zip(&self.b).map(|(p, q)| p - q).collect()
        }
        fn operator(&self, _x: &[f64], _newton: bool) -> CsrMatrix {
            self.a.clone()
        }
    }

    #[test]
    fn linear_problem_takes_one_step() {
        let n = 20;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.2));
            }
        }
        let prob = Linear {
            a: CsrMatrix::from_triplets(n, n, &t).unwrap(),
            b: (0..n).map(|i| 1.0 + i as f64).collect(),
        };
        let cfg = SolverConfig {
            alpha_picard: Some(n as f64),
            droptol_picard: Some(0.0),
            eta_picard: 1e-12,
            sigma: 1e-10,
            ..Default::default()
        };
        let (_, rep) = hilung(&prob, &vec![0.0; n], &cfg).unwrap();
        assert!(rep.converged, "{rep:?}");
        assert_eq!(rep.nonlinear_iterations(), 1);
    }
}
