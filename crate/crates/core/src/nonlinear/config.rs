use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mlilu::FactorParams;

/// Threshold schedule family for the factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regime {
    #[default]
    LowRe,
    HighRe,
}

impl Regime {
    /// `LowRe` below Reynolds number 200.
    pub fn for_reynolds(re: f64) -> Self {
        if re < 200.0 {
            Regime::LowRe
        } else {
            Regime::HighRe
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::LowRe => "low_re",
            Regime::HighRe => "high_re",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low_re" | "low" => Ok(Regime::LowRe),
            "high_re" | "high" => Ok(Regime::HighRe),
            other => Err(Error::InvalidParameter(format!("unknown regime `{other}`"))),
        }
    }
}

/// Control parameters of the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Relative nonlinear tolerance on `‖F‖`.
    pub sigma: f64,
    pub eta_max: f64,
    /// Forcing term used throughout the Picard phase.
    pub eta_picard: f64,
    /// Newton starts once `‖F‖ ≤ beta·‖F(x₀)‖`.
    pub beta: f64,
    /// Refactor when the previous increment satisfies `‖s‖ ≥ epsilon·‖x‖`.
    pub epsilon: f64,
    pub regime: Regime,
    pub alpha_picard: Option<f64>,
    pub alpha_newton: Option<f64>,
    pub droptol_picard: Option<f64>,
    pub droptol_newton: Option<f64>,
    /// FGMRES restart length.
    pub restart: usize,
    /// FGMRES iteration cap per nonlinear step.
    pub max_gmres: usize,
    /// Refactor when the previous step needed at least this many FGMRES iterations.
    pub refactor_iters: usize,
    /// Armijo sufficient-decrease constant.
    pub theta: f64,
    pub refine_picard: usize,
    pub refine_newton: usize,
    pub max_nonlinear: usize,
    pub max_halvings: usize,
    /// Remaining factorization controls; alpha and droptol are set per phase.
    pub factor: FactorParams,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma: 1e-6,
            eta_max: 0.3,
            eta_picard: 0.3,
            beta: 0.05,
            epsilon: 0.8,
            regime: Regime::LowRe,
            alpha_picard: None,
            alpha_newton: None,
            droptol_picard: None,
            droptol_newton: None,
            restart: 30,
            max_gmres: 200,
            refactor_iters: 20,
            theta: 1e-4,
            refine_picard: 1,
            refine_newton: 2,
            max_nonlinear: 100,
            max_halvings: 20,
            factor: FactorParams::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.sigma) {
            return bad(format!("sigma must lie in (0, 1), got {}", self.sigma));
        }
        if !open_unit(self.beta) {
            return bad(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !open_unit(self.eta_max) {
            return bad(format!("eta_max must lie in (0, 1), got {}", self.eta_max));
        }
        if !open_unit(self.eta_picard) {
            return bad(format!("eta_picard must lie in (0, 1), got {}", self.eta_picard));
        }
        if !(self.theta > 0.0 && self.theta < 0.5) {
            return bad(format!("theta must lie in (0, 0.5), got {}", self.theta));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        let counts = [
            ("restart", self.restart),
            ("max_gmres", self.max_gmres),
            ("refactor_iters", self.refactor_iters),
            ("refine_picard", self.refine_picard),
            ("refine_newton", self.refine_newton),
            ("max_nonlinear", self.max_nonlinear),
            ("max_halvings", self.max_halvings),
        ];
        for (name, v) in counts {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.max_gmres < self.restart {
            return bad(format!(
                "max_gmres ({}) must be at least restart ({})",
                self.max_gmres, self.restart
            ));
        }
        for (a, d) in [
            adapt_thresholds(false, self.regime, self),
            adapt_thresholds(true, self.regime, self),
        ] {
            FactorParams::with_thresholds(a, d).validate()?;
        }
        self.factor.validate()
    }

    /// Factorization parameters for the given phase.
    pub fn factor_params(&self, newton: bool) -> FactorParams {
        let (alpha, droptol) = adapt_thresholds(newton, self.regime, self);
        FactorParams {
            alpha,
            droptol,
            ..self.factor.clone()
        }
    }
}

/// `(alpha, droptol)` for a phase: `(2, 0.02)` / `(2, 0.01)` at low Reynolds
/// number and `(5, 0.01)` / `(5, 0.001)` at high Reynolds number for
/// Picard / Newton, unless overridden in `cfg`.
pub fn adapt_thresholds(newton: bool, regime: Regime, cfg: &SolverConfig) -> (f64, f64) {
    let (alpha, droptol) = match (regime, newton) {
        (Regime::LowRe, false) => (2.0, 0.02),
        (Regime::LowRe, true) => (2.0, 0.01),
        (Regime::HighRe, false) => (5.0, 0.01),
        (Regime::HighRe, true) => (5.0, 0.001),
    };
    let (alpha_o, droptol_o) = if newton {
        (cfg.alpha_newton, cfg.droptol_newton)
    } else {
        (cfg.alpha_picard, cfg.droptol_picard)
    };
    (alpha_o.unwrap_or(alpha), droptol_o.unwrap_or(droptol))
}
