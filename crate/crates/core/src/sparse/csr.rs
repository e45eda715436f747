use crate::error::{Error, Result};
use crate::sparse::Permutation;

/// Compressed-row sparse matrix.
///
/// Column indices are strictly increasing inside each row. Explicitly stored
/// zeros are kept, so assembled patterns stay fixed when values change.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays after validating every structural invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidStructure("row_offsets[0] must be 0".into()));
        }
        if col_indices.len() != values.len() || row_offsets[nrows] != col_indices.len() {
            return Err(Error::InvalidStructure(format!(
                "row_offsets[nrows] = {}, but {} column indices and {} values",
                row_offsets[nrows],
                col_indices.len(),
                values.len()
            )));
        }
        for i in 0..nrows {
            let (start, end) = (row_offsets[i], row_offsets[i + 1]);
            if start > end {
                return Err(Error::InvalidStructure(format!("row_offsets decreases at row {i}")));
            }
            let cols = &col_indices[start..end];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidStructure(format!(
                    "row {i}: column indices not strictly increasing"
                )));
            }
            if let Some(&last) = cols.last() {
                if last >= ncols {
                    return Err(Error::InvalidStructure(format!(
                        "row {i}: column index {last} out of range for {ncols} columns"
                    )));
                }
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Internal constructor for arrays already known to be valid.
    pub(crate) fn from_parts_unchecked(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_offsets.len(), nrows + 1);
        debug_assert_eq!(row_offsets[nrows], col_indices.len());
        Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Assembles from `(row, col, value)` triplets. Duplicates are summed and zero
    /// sums are kept as explicit entries.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidStructure(format!(
                    "triplet ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let slot = next[r];
            cols[slot] = c;
            vals[slot] = v;
            next[r] += 1;
        }

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_unstable_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                if col_indices.len() > row_offsets[i] && *col_indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self::from_parts_unchecked(nrows, ncols, row_offsets, col_indices, values))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_parts_unchecked(n, n, (0..=n).collect(), (0..n).collect(), vec![1.0; n])
    }

    /// A matrix with no stored entries.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_parts_unchecked(nrows, ncols, vec![0; nrows + 1], Vec::new(), Vec::new())
    }

    /// Builds from a row-major dense array, storing only nonzero entries.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            assert_eq!(row.len(), ncols, "ragged dense input");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self::from_parts_unchecked(nrows, ncols, row_offsets, col_indices, values)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    /// Stored value at `(i, j)`, or `None` when the entry is not in the pattern.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|k| vals[k])
    }

    /// Iterates over all stored `(row, col, value)` entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i).unwrap_or(0.0))
            .collect()
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` into a preallocated buffer. Panics on dimension mismatch.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols, "spmv: x has wrong length");
        assert_eq!(y.len(), self.nrows, "spmv: y has wrong length");
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `y = Aᵀ x`.
    pub fn spmv_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "spmv_transpose: x has wrong length");
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (rc, rv) = self.row(i);
            for (&j, &v) in rc.iter().zip(rv) {
                let slot = next[j];
                cols[slot] = i;
                vals[slot] = v;
                next[j] += 1;
            }
        }
        CsrMatrix::from_parts_unchecked(self.ncols, self.nrows, counts, cols, vals)
    }

    /// Pattern of `A + Aᵀ` without the diagonal, as adjacency lists.
    pub fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        assert!(self.is_square(), "adjacency requires a square matrix");
        let n = self.nrows;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j, _) in self.triplets() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute stored value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + beta * other`, over the union of both patterns.
    pub fn add_scaled(&self, other: &CsrMatrix, beta: f64) -> Result<CsrMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.nrows * self.ncols,
                found: other.nrows * other.ncols,
            });
        }
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(col_indices.capacity());
        for i in 0..self.nrows {
            let (ac, av) = self.row(i);
            let (bc, bv) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                let take_a = q >= bc.len() || (p < ac.len() && ac[p] <= bc[q]);
                let take_b = p >= ac.len() || (q < bc.len() && bc[q] <= ac[p]);
                if take_a && take_b {
                    col_indices.push(ac[p]);
                    values.push(av[p] + beta * bv[q]);
                    p += 1;
                    q += 1;
                } else if take_a {
                    col_indices.push(ac[p]);
                    values.push(av[p]);
                    p += 1;
                } else {
                    col_indices.push(bc[q]);
                    values.push(beta * bv[q]);
                    q += 1;
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(CsrMatrix::from_parts_unchecked(
            self.nrows,
            self.ncols,
            row_offsets,
            col_indices,
            values,
        ))
    }

    /// Symmetric permutation `B = P A Pᵀ`, i.e. `B[i][j] = A[P(i)][P(j)]`.
    pub fn permute_symmetric(&self, p: &Permutation) -> CsrMatrix {
        let ones = vec![1.0; self.nrows];
        permute_scale_unchecked(self, p, p, &ones, &ones)
    }

    /// Extracts the block with the given (already sorted or not) row and column index sets.
    /// `col_map[j]` gives the new column of old column `j`, or `usize::MAX` to skip it.
    pub fn select(&self, rows: &[usize], col_map: &[usize], ncols: usize) -> CsrMatrix {
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for &r in rows {
            scratch.clear();
            let (cols, vals) = self.row(r);
            for (&j, &v) in cols.iter().zip(vals) {
                let nj = col_map[j];
                if nj != usize::MAX {
                    scratch.push((nj, v));
                }
            }
            scratch.sort_unstable_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        CsrMatrix::from_parts_unchecked(rows.len(), ncols, row_offsets, col_indices, values)
    }
}

/// Permuted and scaled copy `B[i][j] = Dr[P(i)] · A[P(i)][Q(j)] · Dc[Q(j)]`, where
/// `P(i)` is the original row placed at position `i` (likewise `Q(j)` for columns).
pub fn permute_scale(
    a: &CsrMatrix,
    p: &Permutation,
    q: &Permutation,
    dr: &[f64],
    dc: &[f64],
) -> Result<CsrMatrix> {
    if p.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: p.len(),
        });
    }
    if q.len() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            found: q.len(),
        });
    }
    if dr.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: dr.len(),
        });
    }
    if dc.len() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            found: dc.len(),
        });
    }
    for (index, &value) in dr.iter().chain(dc).enumerate() {
        if !(value > 0.0) {
            let index = if index < dr.len() { index } else { index - dr.len() };
            return Err(Error::NonPositiveScaling { index, value });
        }
    }
    Ok(permute_scale_unchecked(a, p, q, dr, dc))
}

pub(crate) fn permute_scale_unchecked(
    a: &CsrMatrix,
    p: &Permutation,
    q: &Permutation,
    dr: &[f64],
    dc: &[f64],
) -> CsrMatrix {
    let mut row_offsets = Vec::with_capacity(a.nrows() + 1);
    let mut col_indices = Vec::with_capacity(a.nnz());
    let mut values = Vec::with_capacity(a.nnz());
    row_offsets.push(0);
    let mut scratch: Vec<(usize, f64)> = Vec::new();
    for i in 0..a.nrows() {
        let old_row = p.old_of(i);
        let (cols, vals) = a.row(old_row);
        scratch.clear();
        scratch.extend(
            cols.iter()
                .zip(vals)
                .map(|(&c, &v)| (q.new_of(c), dr[old_row] * v * dc[c])),
        );
        scratch.sort_unstable_by_key(|&(c, _)| c);
        for &(c, v) in &scratch {
            col_indices.push(c);
            values.push(v);
        }
        row_offsets.push(col_indices.len());
    }
    CsrMatrix::from_parts_unchecked(a.nrows(), a.ncols(), row_offsets, col_indices, values)
}
