use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

const MAX_SWEEPS: usize = 10;
/// Sweeps stop once every row and column norm lies within this factor of 1.
const TARGET_RATIO: f64 = 1.05;

/// Iterative row/column infinity-norm scaling.
///
/// Returns `(Dr, Dc)` such that every row and column of `Dr·A·Dc` has an
/// infinity norm close to 1 (within `[1/2, 2]` after at most ten sweeps).
pub fn equilibrate(a: &CsrMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    for i in 0..a.nrows() {
        if a.row_nnz(i) == 0 {
            return Err(Error::EmptyLine { kind: "row", index: i });
        }
    }
    let mut col_seen = vec![false; a.ncols()];
    for &j in a.col_indices() {
        col_seen[j] = true;
    }
    if let Some(j) = col_seen.iter().position(|&s| !s) {
        return Err(Error::EmptyLine { kind: "column", index: j });
    }
    Ok(equilibrate_lenient(a))
}

/// Same scaling, but rows or columns without a nonzero value keep a unit scale.
pub(crate) fn equilibrate_lenient(a: &CsrMatrix) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (a.nrows(), a.ncols());
    let mut dr = vec![1.0; m];
    let mut dc = vec![1.0; n];
    let mut row_max = vec![0.0f64; m];
    let mut col_max = vec![0.0f64; n];
    for _ in 0..MAX_SWEEPS {
        row_max.iter_mut().for_each(|v| *v = 0.0);
        col_max.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let s = (dr[i] * v * dc[j]).abs();
                row_max[i] = row_max[i].max(s);
                col_max[j] = col_max[j].max(s);
            }
        }
        let within = |x: f64| x == 0.0 || (x <= TARGET_RATIO && x >= 1.0 / TARGET_RATIO);
        if row_max.iter().chain(&col_max).all(|&x| within(x)) {
            break;
        }
        for (d, &r) in dr.iter_mut().zip(&row_max) {
            if r > 0.0 {
                *d /= r.sqrt();
            }
        }
        for (d, &c) in dc.iter_mut().zip(&col_max) {
            if c > 0.0 {
                *d /= c.sqrt();
            }
        }
    }
    (dr, dc)
}

/// `Dr·A·Dc` with the original pattern.
pub(crate) fn apply_scaling(a: &CsrMatrix, dr: &[f64], dc: &[f64]) -> CsrMatrix {
    let mut out = a.clone();
    let offsets = a.row_offsets().to_vec();
    let cols = a.col_indices().to_vec();
    let vals = out.values_mut();
    for i in 0..a.nrows() {
        for k in offsets[i]..offsets[i + 1] {
            vals[k] *= dr[i] * dc[cols[k]];
        }
    }
    out
}
