//! Multilevel Crout incomplete LU with static and dynamic deferring.

mod crout;
mod dense;
mod equilibrate;
mod multilevel;
mod ordering;

pub use crout::{crout_ilu_level, LevelFactor};
pub use dense::DenseLu;
pub use equilibrate::equilibrate;
pub use multilevel::{factorize, ml_solve, LevelStats, MultilevelFactor};
pub use ordering::{reorder, static_defer};

use crate::error::{Error, Result};

/// Controls for [`factorize`].
#[derive(Debug, Clone, PartialEq)]
pub struct FactorParams {
    /// Fill cap factor: a column of L (row of U) keeps at most `ceil(alpha * budget)` entries.
    pub alpha: f64,
    /// Inverse-based drop tolerance.
    pub droptol: f64,
    /// Bound on the incremental estimates of `‖L⁻¹‖` and `‖U⁻¹‖` before a pivot is deferred.
    pub cond_thresh: f64,
    /// Static deferral threshold relative to the largest scaled diagonal.
    pub diag_thresh: f64,
    /// Pivots below this magnitude (after scaling) are deferred.
    pub pivot_floor: f64,
    /// Lower bound on the per-row/column cap.
    pub min_retained: usize,
    /// Schur size at or below which the recursion ends in a dense LU.
    /// `None` picks `min(2000, ceil(sqrt(n)))`.
    pub dense_switch: Option<usize>,
    pub max_levels: usize,
}

impl Default for FactorParams {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            droptol: 0.02,
            cond_thresh: 5.0,
            diag_thresh: 1e-2,
            pivot_floor: 1e-10,
            min_retained: 5,
            dense_switch: None,
            max_levels: 30,
        }
    }
}

impl FactorParams {
    pub fn with_thresholds(alpha: f64, droptol: f64) -> Self {
        Self {
            alpha,
            droptol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.alpha >= 1.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must be >= 1, got {}", self.alpha));
        }
        if !(0.0..1.0).contains(&self.droptol) {
            return bad(format!("droptol must lie in [0, 1), got {}", self.droptol));
        }
        if !(self.cond_thresh > 1.0) {
            return bad(format!("cond_thresh must exceed 1, got {}", self.cond_thresh));
        }
        if !(self.diag_thresh > 0.0 && self.diag_thresh < 1.0) {
            return bad(format!("diag_thresh must lie in (0, 1), got {}", self.diag_thresh));
        }
        if !(self.pivot_floor >= 0.0) {
            return bad(format!("pivot_floor must be nonnegative, got {}", self.pivot_floor));
        }
        if self.dense_switch == Some(0) {
            return bad("dense_switch must be at least 1".into());
        }
        if self.max_levels == 0 {
            return bad("max_levels must be at least 1".into());
        }
        Ok(())
    }

    /// Dense switch size for a top-level matrix of dimension `n`.
    pub fn dense_switch_for(&self, n: usize) -> usize {
        self.dense_switch
            .unwrap_or_else(|| ((n as f64).sqrt().ceil() as usize).clamp(1, 2000))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_parameters_are_valid() {
        FactorParams::default().validate().unwrap();
    }

    #[test]
    fn invalid_parameters_rejected() {
        let p = FactorParams { alpha: 0.5, ..Default::default() };
        assert!(p.validate().is_err());
        let p = FactorParams { droptol: 1.0, ..Default::default() };
        assert!(p.validate().is_err());
        let p = FactorParams { dense_switch: Some(0), ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn dense_switch_formula() {
        let p = FactorParams::default();
        assert_eq!(p.dense_switch_for(100), 10);
        assert_eq!(p.dense_switch_for(2211), 48);
        assert_eq!(p.dense_switch_for(1_000_000), 1000);
        assert_eq!(p.dense_switch_for(100_000_000), 2000);
    }
}
