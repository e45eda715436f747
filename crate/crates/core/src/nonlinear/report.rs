use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Picard,
    Newton,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Picard => "picard",
            Phase::Newton => "newton",
        })
    }
}

/// One outer step. `norm_f` is the residual norm at the start of the step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub phase: Phase,
    pub norm_f: f64,
    pub eta: f64,
    pub gmres_iters: usize,
    pub gmres_relres: f64,
    pub refactorized: bool,
    /// Accepted damping factor; 0 when the line search failed.
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearReport {
    pub steps: Vec<StepRecord>,
    pub norm_f0: f64,
    pub final_norm_f: f64,
    pub converged: bool,
    pub total_gmres: usize,
    pub factorizations: usize,
    /// Reason the run stopped early, if it did.
    pub failure: Option<String>,
}

impl NonlinearReport {
    pub fn nonlinear_iterations(&self) -> usize {
        self.steps.len()
    }

    /// FGMRES iterations summed over the steps of one phase.
    pub fn gmres_in_phase(&self, phase: Phase) -> usize {
        self.steps.iter().filter(|s| s.phase == phase).map(|s| s.gmres_iters).sum()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_csv_to(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "step,phase,normF,eta,gmres_iters,refactorized,omega")?;
        for s in &self.steps {
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{},{},{:.16e}",
                s.step, s.phase, s.norm_f, s.eta, s.gmres_iters, s.refactorized, s.omega
            )?;
        }
        Ok(())
    }
}
