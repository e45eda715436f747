use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mlilu::crout::{crout_ilu_level, LevelFactor};
use crate::mlilu::dense::DenseLu;
use crate::mlilu::equilibrate::{apply_scaling, equilibrate_lenient};
use crate::mlilu::ordering::{reorder, static_defer};
use crate::mlilu::FactorParams;
use crate::sparse::CsrMatrix;

/// Chain of ILU levels closed by a dense LU of the last Schur complement.
#[derive(Debug, Clone)]
pub struct MultilevelFactor {
    n: usize,
    levels: Vec<LevelFactor>,
    schur_nnz: Vec<usize>,
    tail: DenseLu,
    total_nnz: usize,
    dense_switch: usize,
}

/// Per-level counts, one row of the statistics CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelStats {
    pub level: usize,
    pub n: usize,
    pub n_b: usize,
    pub static_deferred: usize,
    pub dynamic_deferred: usize,
    pub nnz_l: usize,
    pub nnz_u: usize,
    pub nnz_schur: usize,
}

/// Multilevel factorization of a square matrix.
///
/// Each level equilibrates, reorders, statically defers small diagonals and
/// runs Crout elimination; the Schur complement becomes the next level. At
/// least one ILU level is built. Recursion stops once the Schur size is at most
/// the dense switch, the level limit is reached or a level makes no progress.
pub fn factorize(a: &CsrMatrix, params: &FactorParams) -> Result<MultilevelFactor> {
    params.validate()?;
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let n = a.nrows();
    let switch = params.dense_switch_for(n);
    let top_row_nnz: Vec<usize> = (0..n).map(|i| a.row_nnz(i)).collect();
    let mut top_col_nnz = vec![0usize; n];
    for &j in a.col_indices() {
        top_col_nnz[j] += 1;
    }

    let mut levels = Vec::new();
    let mut schur_nnz = Vec::new();
    let mut top: Vec<usize> = (0..n).collect();
    let mut current = a.clone();
    let tail = loop {
        let m = current.nrows();
        if m == 0 {
            break DenseLu::factor_dense(0, Vec::new());
        }
        if levels.len() >= params.max_levels || (!levels.is_empty() && m <= switch) {
            break DenseLu::factor(&current);
        }
        let (dr, dc) = equilibrate_lenient(&current);
        let scaled = apply_scaling(&current, &dr, &dc);
        let rcm = reorder(&scaled);
        let reordered = scaled.permute_symmetric(&rcm);
        let (defer, kept) = static_defer(&reordered, params.diag_thresh);
        let prepared = reordered.permute_symmetric(&defer);
        let pre = rcm.then(&defer);
        let br: Vec<usize> = (0..m).map(|i| top_row_nnz[top[pre.old_of(i)]]).collect();
        let bc: Vec<usize> = (0..m).map(|i| top_col_nnz[top[pre.old_of(i)]]).collect();

        let (mut level, schur) = crout_ilu_level(&prepared, kept, params, &br, &bc);
        if level.n_b == 0 {
            break DenseLu::factor(&current);
        }
        level.perm = pre.then(&level.perm);
        level.dr = dr;
        level.dc = dc;
        top = (level.n_b..m).map(|k| top[level.perm.old_of(k)]).collect();
        schur_nnz.push(schur.nnz());
        levels.push(level);
        current = schur;
    };

    let total_nnz = levels
        .iter()
        .map(|l| l.l.nnz() + l.u.nnz() + l.n_b)
        .sum::<usize>()
        + tail.nnz();
    Ok(MultilevelFactor {
        n,
        levels,
        schur_nnz,
        tail,
        total_nnz,
        dense_switch: switch,
    })
}

/// Applies the multilevel factor: returns `M⁻¹ v`.
pub fn ml_solve(m: &MultilevelFactor, v: &[f64]) -> Vec<f64> {
    m.solve(v)
}

impl MultilevelFactor {
    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> &[LevelFactor] {
        &self.levels
    }

    pub fn dense_tail(&self) -> &DenseLu {
        &self.tail
    }

    pub fn total_nnz(&self) -> usize {
        self.total_nnz
    }

    pub fn dense_switch(&self) -> usize {
        self.dense_switch
    }

    /// True when the dense tail needed a pivot perturbation.
    pub fn is_perturbed(&self) -> bool {
        self.tail.is_perturbed()
    }

    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "right-hand side length");
        self.solve_level(0, v)
    }

    fn solve_level(&self, k: usize, v: &[f64]) -> Vec<f64> {
        let Some(level) = self.levels.get(k) else {
            let mut x = v.to_vec();
            self.tail.solve_in_place(&mut x);
            return x;
        };
        let (n, n_b) = (level.n, level.n_b);
        let mut t: Vec<f64> = (0..n)
            .map(|i| {
                let old = level.perm.old_of(i);
                level.dr[old] * v[old]
            })
            .collect();

        // forward: [L_B 0; L_E I]
        for i in 0..n {
            let (cols, vals) = level.l.row(i);
            let s: f64 = cols.iter().zip(vals).map(|(&j, &l)| l * t[j]).sum();
            t[i] -= s;
        }
        for (ti, di) in t[..n_b].iter_mut().zip(&level.d) {
            *ti /= di;
        }
        let z2 = self.solve_level(k + 1, &t[n_b..]);
        t[n_b..].copy_from_slice(&z2);
        // backward: [U_B U_F; 0 I]
        for i in (0..n_b).rev() {
            let (cols, vals) = level.u.row(i);
            let s: f64 = cols.iter().zip(vals).map(|(&j, &u)| u * t[j]).sum();
            t[i] -= s;
        }

        let mut x = vec![0.0; n];
        for (new, &zi) in t.iter().enumerate() {
            let old = level.perm.old_of(new);
            x[old] = level.dc[old] * zi;
        }
        x
    }

    /// Dense matrix represented by the factor, with all permutations and
    /// scalings undone. Intended for small test problems.
    pub fn reassemble(&self) -> Vec<Vec<f64>> {
        self.reassemble_level(0)
    }

    fn reassemble_level(&self, k: usize) -> Vec<Vec<f64>> {
        let Some(level) = self.levels.get(k) else {
            return self.tail.reassemble();
        };
        let (n, n_b) = (level.n, level.n_b);
        let mut b = vec![vec![0.0; n]; n];
        let schur = self.reassemble_level(k + 1);
        for (i, row) in schur.iter().enumerate() {
            b[n_b + i][n_b..].copy_from_slice(row);
        }
        // row i of L·D·U
        let mut lrow = vec![0.0; n_b];
        for i in 0..n {
            lrow.iter_mut().for_each(|v| *v = 0.0);
            let (cols, vals) = level.l.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                lrow[j] = v;
            }
            if i < n_b {
                lrow[i] = 1.0;
            }
            for (kk, &lik) in lrow.iter().enumerate() {
                if lik == 0.0 {
                    continue;
                }
                let f = lik * level.d[kk];
                b[i][kk] += f;
                let (cols, vals) = level.u.row(kk);
                for (&j, &u) in cols.iter().zip(vals) {
                    b[i][j] += f * u;
                }
            }
        }
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            let pi = level.perm.old_of(i);
            for j in 0..n {
                let pj = level.perm.old_of(j);
                a[pi][pj] = b[i][j] / (level.dr[pi] * level.dc[pj]);
            }
        }
        a
    }

    pub fn stats(&self) -> Vec<LevelStats> {
        self.levels
            .iter()
            .zip(&self.schur_nnz)
            .enumerate()
            .map(|(k, (l, &nnz_schur))| LevelStats {
                level: k + 1,
                n: l.n,
                n_b: l.n_b,
                static_deferred: l.static_deferred,
                dynamic_deferred: l.dynamic_deferred,
                nnz_l: l.l.nnz(),
                nnz_u: l.u.nnz(),
                nnz_schur,
            })
            .collect()
    }

    /// Writes one row per ILU level.
    pub fn write_stats_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "level,n,n_b,static_deferred,dynamic_deferred,nnz_l,nnz_u,nnz_schur")?;
        for s in self.stats() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.level, s.n, s.n_b, s.static_deferred, s.dynamic_deferred, s.nnz_l, s.nnz_u, s.nnz_schur
            )?;
        }
        out.flush()?;
        Ok(())
    }
}
