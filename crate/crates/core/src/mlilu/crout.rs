use crate::mlilu::FactorParams;
use crate::sparse::{CsrMatrix, Permutation};

/// One level of the multilevel factorization.
///
/// With `B = P·(Dr·A·Dc)·Pᵀ` (rows and columns gathered by `perm`), the level
/// satisfies `B ≈ [L_B; L_E]·D·[U_B U_F] + [0 0; 0 S]` where `S` is handed to
/// the next level.
#[derive(Debug, Clone)]
pub struct LevelFactor {
    pub n: usize,
    pub n_b: usize,
    /// `n × n_b`, strictly lower in its leading block, unit diagonal not stored.
    pub l: CsrMatrix,
    pub d: Vec<f64>,
    /// `n_b × n`, strictly upper in its leading block, unit diagonal not stored.
    pub u: CsrMatrix,
    pub perm: Permutation,
    pub dr: Vec<f64>,
    pub dc: Vec<f64>,
    pub static_deferred: usize,
    pub dynamic_deferred: usize,
    /// Entry cap applied to each column of L, by pivot position.
    pub l_caps: Vec<usize>,
    /// Entry cap applied to each row of U, by pivot position.
    pub u_caps: Vec<usize>,
}

/// Sparse accumulator over `0..n`.
struct Accumulator {
    values: Vec<f64>,
    used: Vec<bool>,
    indices: Vec<usize>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
            used: vec![false; n],
            indices: Vec::new(),
        }
    }

    #[inline]
    fn add(&mut self, i: usize, v: f64) {
        if !self.used[i] {
            self.used[i] = true;
            self.indices.push(i);
        }
        self.values[i] += v;
    }

    fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Removes and returns every stored entry except `skip`, and resets.
    fn drain_except(&mut self, skip: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.indices.len());
        for &i in &self.indices {
            if i != skip {
                out.push((i, self.values[i]));
            }
            self.values[i] = 0.0;
            self.used[i] = false;
        }
        self.indices.clear();
        out
    }

    fn clear(&mut self) {
        for &i in &self.indices {
            self.values[i] = 0.0;
            self.used[i] = false;
        }
        self.indices.clear();
    }
}

/// Inverse-based dropping followed by the fill cap. Keeps the largest entries.
fn sparsify(entries: &mut Vec<(usize, f64)>, kappa: f64, droptol: f64, cap: usize) {
    entries.retain(|&(_, v)| v.abs() * kappa > droptol);
    if entries.len() > cap {
        entries.select_nth_unstable_by(cap, |a, b| b.1.abs().total_cmp(&a.1.abs()));
        entries.truncate(cap);
    }
    entries.sort_unstable_by_key(|e| e.0);
}

fn cap_for(alpha: f64, budget: usize, floor: usize) -> usize {
    ((alpha * budget as f64).ceil() as usize).max(floor)
}

/// Largest-magnitude-growth step of the incremental inverse-norm estimator.
#[inline]
fn estimator_step(xi: f64) -> f64 {
    if xi >= 0.0 {
        -1.0 - xi
    } else {
        1.0 - xi
    }
}

/// Crout elimination of one level.
///
/// Candidates are the first `n_lead` indices of `a`, tried in order; the rest
/// are deferred unconditionally. A candidate is dynamically deferred when the
/// estimated growth of `‖L⁻¹‖` or `‖U⁻¹‖` would exceed `cond_thresh` or when its
/// pivot is below `pivot_floor`. The budgets give, per local index, the nnz of
/// the corresponding row and column of the original matrix.
///
/// The returned factor has identity scalings and `perm` set to the elimination
/// order (accepted pivots first, then trailing indices ascending). The Schur
/// complement is indexed in that trailing order.
pub fn crout_ilu_level(
    a: &CsrMatrix,
    n_lead: usize,
    params: &FactorParams,
    budget_row: &[usize],
    budget_col: &[usize],
) -> (LevelFactor, CsrMatrix) {
    let n = a.nrows();
    assert!(a.is_square(), "Crout elimination needs a square matrix");
    assert!(n_lead <= n);
    assert_eq!(budget_row.len(), n);
    assert_eq!(budget_col.len(), n);
    let at = a.transpose();

    const NONE: usize = usize::MAX;
    let mut pos = vec![NONE; n];
    let mut pivots: Vec<usize> = Vec::new();
    let mut d: Vec<f64> = Vec::new();
    // by pivot position
    let mut urow: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut lcol: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut l_caps = Vec::new();
    let mut u_caps = Vec::new();
    // by local index: (pivot position, value)
    let mut lrow: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut ucol: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut xi_l = vec![0.0f64; n];
    let mut xi_u = vec![0.0f64; n];
    let mut acc = Accumulator::new(n);
    let mut dynamic_deferred = 0usize;

    for c in 0..n_lead {
        let kappa_l = 1.0 + xi_l[c].abs();
        let kappa_u = 1.0 + xi_u[c].abs();
        if kappa_l.max(kappa_u) > params.cond_thresh {
            dynamic_deferred += 1;
            continue;
        }

        // row c of D·U, including the pivot
        let (cols, vals) = a.row(c);
        for (&j, &v) in cols.iter().zip(vals) {
            if pos[j] == NONE {
                acc.add(j, v);
            }
        }
        for &(k, lck) in &lrow[c] {
            let f = lck * d[k];
            for &(j, ukj) in &urow[k] {
                if pos[j] == NONE {
                    acc.add(j, -f * ukj);
                }
            }
        }
        let pivot = acc.get(c);
        if !(pivot.abs() >= params.pivot_floor) || !pivot.is_finite() {
            acc.clear();
            dynamic_deferred += 1;
            continue;
        }
        let mut u_entries = acc.drain_except(c);

        // column c of L·D
        let (rows, vals) = at.row(c);
        for (&i, &v) in rows.iter().zip(vals) {
            if pos[i] == NONE && i != c {
                acc.add(i, v);
            }
        }
        for &(k, ukc) in &ucol[c] {
            let f = ukc * d[k];
            for &(i, lik) in &lcol[k] {
                if pos[i] == NONE && i != c {
                    acc.add(i, -f * lik);
                }
            }
        }
        let mut l_entries = acc.drain_except(c);

        let inv = 1.0 / pivot;
        u_entries.iter_mut().for_each(|e| e.1 *= inv);
        l_entries.iter_mut().for_each(|e| e.1 *= inv);
        let u_cap = cap_for(params.alpha, budget_row[c], params.min_retained);
        let l_cap = cap_for(params.alpha, budget_col[c], params.min_retained);
        sparsify(&mut u_entries, kappa_u, params.droptol, u_cap);
        sparsify(&mut l_entries, kappa_l, params.droptol, l_cap);

        let k = pivots.len();
        pos[c] = k;
        pivots.push(c);
        d.push(pivot);

        let x_l = estimator_step(xi_l[c]);
        for &(i, l) in &l_entries {
            xi_l[i] += l * x_l;
            lrow[i].push((k, l));
        }
        let x_u = estimator_step(xi_u[c]);
        for &(j, u) in &u_entries {
            xi_u[j] += u * x_u;
            ucol[j].push((k, u));
        }
        lcol.push(l_entries);
        urow.push(u_entries);
        l_caps.push(l_cap);
        u_caps.push(u_cap);
        // row c of L and column c of U are complete
        lrow[c] = Vec::new();
        ucol[c] = Vec::new();
    }

    let n_b = pivots.len();
    let trailing: Vec<usize> = (0..n).filter(|&i| pos[i] == NONE).collect();
    let mut final_pos = pos.clone();
    for (r, &i) in trailing.iter().enumerate() {
        final_pos[i] = n_b + r;
    }

    let mut l_trip = Vec::new();
    for (k, col) in lcol.iter().enumerate() {
        for &(i, v) in col {
            l_trip.push((final_pos[i], k, v));
        }
    }
    let mut u_trip = Vec::new();
    for (k, row) in urow.iter().enumerate() {
        for &(j, v) in row {
            u_trip.push((k, final_pos[j], v));
        }
    }
    let l = CsrMatrix::from_triplets(n, n_b, &l_trip).expect("indices in range");
    let u = CsrMatrix::from_triplets(n_b, n, &u_trip).expect("indices in range");

    // S = C - L_E·D·U_F over trailing indices
    let n_s = trailing.len();
    let mut s_offsets = Vec::with_capacity(n_s + 1);
    let mut s_cols = Vec::new();
    let mut s_vals = Vec::new();
    s_offsets.push(0);
    for &r in &trailing {
        let (cols, vals) = a.row(r);
        for (&j, &v) in cols.iter().zip(vals) {
            if pos[j] == NONE {
                acc.add(j, v);
            }
        }
        for &(k, lrk) in &lrow[r] {
            let f = lrk * d[k];
            for &(j, ukj) in &urow[k] {
                if pos[j] == NONE {
                    acc.add(j, -f * ukj);
                }
            }
        }
        let mut row: Vec<(usize, f64)> = acc
            .drain_except(NONE)
            .into_iter()
            .map(|(j, v)| (final_pos[j] - n_b, v))
            .collect();
        row.sort_unstable_by_key(|e| e.0);
        for (j, v) in row {
            s_cols.push(j);
            s_vals.push(v);
        }
        s_offsets.push(s_cols.len());
    }
    let schur = CsrMatrix::from_parts_unchecked(n_s, n_s, s_offsets, s_cols, s_vals);

    let mut order = pivots;
    order.extend_from_slice(&trailing);
    let factor = LevelFactor {
        n,
        n_b,
        l,
        d,
        u,
        perm: Permutation::from_new_to_old(order).expect("elimination order is a permutation"),
        dr: vec![1.0; n],
        dc: vec![1.0; n],
        static_deferred: n - n_lead,
        dynamic_deferred,
        l_caps,
        u_caps,
    };
    (factor, schur)
}
