use crate::sparse::CsrMatrix;

/// Dense LU with partial pivoting, `P·A = L·U`, stored in place row-major.
///
/// A pivot below `1e3·ε·max|a_ij|` is replaced by a floor of that size with the
/// pivot's sign and the factor is marked perturbed instead of failing.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    /// `rows[k]` is the original row placed at position `k`.
    rows: Vec<usize>,
    perturbed: bool,
}

impl DenseLu {
    pub fn factor(a: &CsrMatrix) -> Self {
        let n = a.nrows();
        let mut lu = vec![0.0; n * n];
        for (i, j, v) in a.triplets() {
            lu[i * n + j] = v;
        }
        Self::factor_dense(n, lu)
    }

    /// Factors a row-major `n × n` array.
    pub fn factor_dense(n: usize, mut lu: Vec<f64>) -> Self {
        assert_eq!(lu.len(), n * n);
        let max = lu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = 1e3 * f64::EPSILON * if max > 0.0 { max } else { 1.0 };
        let mut rows: Vec<usize> = (0..n).collect();
        let mut perturbed = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                rows.swap(k, p);
            }
            if !(pmax >= floor) {
                let sign = if lu[k * n + k] < 0.0 { -1.0 } else { 1.0 };
                lu[k * n + k] = sign * floor;
                perturbed = true;
            }
            let pivot = lu[k * n + k];
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let krow = &head[k * n..];
            for i in 0..n - k - 1 {
                let row = &mut tail[i * n..(i + 1) * n];
                let f = row[k] / pivot;
                row[k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        row[j] -= f * krow[j];
                    }
                }
            }
        }
        Self {
            n,
            lu,
            rows,
            perturbed,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_perturbed(&self) -> bool {
        self.perturbed
    }

    pub fn nnz(&self) -> usize {
        self.n * self.n
    }

    /// Diagonal of `U` in elimination order.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.lu[k * self.n + k]).collect()
    }

    /// Overwrites `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.rows.iter().map(|&r| b[r]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&y[..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s: f64 = row[i + 1..].iter().zip(&y[i + 1..]).map(|(u, v)| u * v).sum();
            y[i] = (y[i] - s) / row[i];
        }
        b.copy_from_slice(&y);
    }

    /// Dense `Pᵀ·L·U`.
    pub fn reassemble(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..=i.min(j) {
                    let l = if k == i { 1.0 } else { self.lu[i * n + k] };
                    s += l * self.lu[k * n + j];
                }
                out[self.rows[i]][j] = s;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        let a = CsrMatrix::from_dense(&[vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]]);
        let lu = DenseLu::factor(&a);
        assert!(!lu.is_perturbed());
        let x = [1.0, -2.0, 0.5];
        let mut b = a.spmv(&x).unwrap();
        lu.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-14);
        }
        let m = lu.reassemble();
        for (r, row) in a.to_dense().iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                assert!((m[r][c] - v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_matrix_is_perturbed_not_failed() {
        let lu = DenseLu::factor(&CsrMatrix::zeros(3, 3));
        assert!(lu.is_perturbed());
        let mut b = vec![1.0, 2.0, 3.0];
        lu.solve_in_place(&mut b);
        assert!(b.iter().all(|v| v.is_finite()));
    }
}
