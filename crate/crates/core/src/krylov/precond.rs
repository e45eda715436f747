use crate::error::{Error, Result};
use crate::krylov::{LinearOperator, Preconditioner};
use crate::mlilu::MultilevelFactor;
use crate::sparse::vector::{dot, norm2};

/// Stationary refinement around a multilevel factor with optional projection
/// off a null direction:
///
/// `z₀ = 0`, `z_n = z_{n-1} + Π M⁻¹ (v - J z_{n-1})`, `Π = I - q qᵀ`.
pub struct PrecondOperator<'a> {
    factor: &'a MultilevelFactor,
    op: &'a dyn LinearOperator,
    null: Option<&'a [f64]>,
    steps: usize,
}

impl<'a> PrecondOperator<'a> {
    /// `null` must have unit 2-norm; `steps` must be at least 1.
    pub fn new(
        factor: &'a MultilevelFactor,
        op: &'a dyn LinearOperator,
        null: Option<&'a [f64]>,
        steps: usize,
    ) -> Result<Self> {
        let n = factor.nrows();
        if op.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: op.dim() });
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("refinement steps must be at least 1".into()));
        }
        if let Some(q) = null {
            if q.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: q.len() });
            }
            let norm = norm2(q);
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "null vector must have unit norm, found {norm}"
                )));
            }
        }
        Ok(Self { factor, op, null, steps })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn project(&self, w: &mut [f64]) {
        if let Some(q) = self.null {
            let c = dot(q, w);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
    }
}

/// Returns `z_K` of the refinement sequence.
pub fn apply_precond(p: &PrecondOperator<'_>, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    assert_eq!(n, p.factor.nrows(), "vector length");
    let mut z = p.factor.solve(v);
    p.project(&mut z);
    let mut jz = vec![0.0; n];
    for _ in 1..p.steps {
        p.op.apply(&z, &mut jz);
        let r: Vec<f64> = v.iter().zip(&jz).map(|(a, b)| a - b).collect();
        let mut dz = p.factor.solve(&r);
        p.project(&mut dz);
        for (zi, d) in z.iter_mut().zip(&dz) {
            *zi += d;
        }
    }
    z
}

impl Preconditioner for PrecondOperator<'_> {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        apply_precond(self, v)
    }
}
