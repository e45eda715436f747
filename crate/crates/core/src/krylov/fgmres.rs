use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::krylov::{LinearOperator, Preconditioner};
use crate::sparse::vector::{dot, norm2};

#[derive(Debug, Clone, PartialEq)]
pub struct GmresParams {
    pub restart: usize,
    pub max_iters: usize,
    pub rtol: f64,
}

impl Default for GmresParams {
    fn default() -> Self {
        Self {
            restart: 30,
            max_iters: 200,
            rtol: 1e-6,
        }
    }
}

impl GmresParams {
    pub fn validate(&self) -> Result<()> {
        if self.restart == 0 {
            return Err(Error::InvalidParameter("restart must be at least 1".into()));
        }
        if self.max_iters < self.restart {
            return Err(Error::InvalidParameter(format!(
                "max_iters ({}) must be at least the restart length ({})",
                self.max_iters, self.restart
            )));
        }
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(Error::InvalidParameter(format!("rtol must lie in (0, 1), got {}", self.rtol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovReport {
    pub iterations: usize,
    /// `‖b - A x‖ / ‖b‖` recomputed from the returned iterate.
    pub final_relres: f64,
    pub converged: bool,
    /// Set when Arnoldi stopped on a vanishing basis vector; the iterate is the
    /// minimizer over the subspace built so far.
    pub breakdown: bool,
    /// Relative residual estimates; entry `k` belongs to iteration `k`.
    pub residual_history: Vec<f64>,
}

impl KrylovReport {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "iteration,relres")?;
        for (k, r) in self.residual_history.iter().enumerate() {
            writeln!(out, "{k},{r:.16e}")?;
        }
        out.flush()?;
        Ok(())
    }
}

fn residual(a: &dyn LinearOperator, b: &[f64], x: &[f64], scratch: &mut [f64]) -> Vec<f64> {
    a.apply(x, scratch);
    b.iter().zip(scratch.iter()).map(|(bi, ai)| bi - ai).collect()
}

/// Right-preconditioned flexible GMRES(m) from a zero initial guess.
///
/// Every preconditioned direction is kept, so the preconditioner may change
/// between applications. The true residual is recomputed at each restart and
/// decides convergence.
pub fn fgmres(
    a: &dyn LinearOperator,
    p: &dyn Preconditioner,
    b: &[f64],
    params: &GmresParams,
) -> Result<(Vec<f64>, KrylovReport)> {
    params.validate()?;
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((
            x,
            KrylovReport {
                iterations: 0,
                final_relres: 0.0,
                converged: true,
                breakdown: false,
                residual_history: vec![0.0],
            },
        ));
    }

    let m = params.restart;
    let target = params.rtol * bnorm;
    let breakdown_tol = 1e3 * f64::EPSILON * bnorm;
    let mut scratch = vec![0.0; n];
    let mut history = vec![1.0];
    let mut total = 0usize;
    let mut breakdown = false;
    let mut r = b.to_vec();
    let mut beta = bnorm;

    let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
    // column-major Hessenberg, column j has j + 2 entries
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];

    loop {
        v.clear();
        z.clear();
        h.clear();
        g.iter_mut().for_each(|e| *e = 0.0);
        g[0] = beta;
        v.push(r.iter().map(|e| e / beta).collect());

        let mut k = 0;
        while k < m && total < params.max_iters {
            let zj = p.apply(&v[k]);
            let mut w = vec![0.0; n];
            a.apply(&zj, &mut w);
            z.push(zj);
            total += 1;

            let mut col = vec![0.0; k + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi);
                col[i] = hij;
                for (we, ve) in w.iter_mut().zip(vi) {
                    *we -= hij * ve;
                }
            }
            let hnext = norm2(&w);
            col[k + 1] = hnext;

            for i in 0..k {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let rho = col[k].hypot(col[k + 1]);
            if rho == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = col[k] / rho;
                sn[k] = col[k + 1] / rho;
            }
            col[k] = rho;
            col[k + 1] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            h.push(col);
            k += 1;
            history.push(g[k].abs() / bnorm);

            if hnext < breakdown_tol {
                breakdown = true;
                break;
            }
            if g[k].abs() <= target {
                break;
            }
            v.push(w.iter().map(|e| e / hnext).collect());
        }

        // back substitution on the rotated triangle
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[j][i] * y[j]).sum();
            let rii = h[i][i];
            y[i] = if rii.abs() > f64::MIN_POSITIVE { (g[i] - s) / rii } else { 0.0 };
        }
        for (yi, zi) in y.iter().zip(&z) {
            for (xe, ze) in x.iter_mut().zip(zi) {
                *xe += yi * ze;
            }
        }

        r = residual(a, b, &x, &mut scratch);
        beta = norm2(&r);
        if beta <= target || breakdown || total >= params.max_iters || k == 0 {
            break;
        }
    }

    let converged = beta <= target;
    let report = KrylovReport {
        iterations: total,
        final_relres: beta / bnorm,
        converged,
        breakdown,
        residual_history: history,
    };
    Ok((x, report))
}
