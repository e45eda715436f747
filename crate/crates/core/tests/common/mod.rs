//! Seeded random fixtures shared by the integration suites.
#![allow(dead_code)]

use hilung::sparse::CsrMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random sparse matrix with about `per_row` off-diagonal entries per row and
/// a diagonal of random sign whose size is comparable to the off-diagonal mass,
/// so it is not diagonally dominant but almost surely nonsingular.
pub fn random_sparse(n: usize, per_row: usize, rng: &mut ChaCha8Rng) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..n {
        let mut mass = 0.0;
        for _ in 0..per_row {
            let j = rng.random_range(0..n);
            if j != i {
                let v: f64 = rng.random_range(-1.0..1.0);
                mass += v.abs();
                t.push((i, j, v));
            }
        }
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        t.push((i, i, sign * (0.3 + rng.random_range(0.2..1.0) * mass)));
    }
    CsrMatrix::from_triplets(n, n, &t).unwrap()
}

/// Nonsingular saddle-point matrix `[[A, Bᵀ], [B, 0]]` with a positive-real `A`
/// (`nv × nv`) and a row-echelon, hence full-rank, `B` (`np × nv`, `2·np ≤ nv`).
pub fn random_saddle(nv: usize, np: usize, rng: &mut ChaCha8Rng) -> CsrMatrix {
    assert!(2 * np <= nv);
    let mut t = Vec::new();
    let mut row_mass = vec![0.0; nv];
    let mut col_mass = vec![0.0; nv];
    for i in 0..nv {
        for _ in 0..4 {
            let j = rng.random_range(0..nv);
            if j != i {
                let v: f64 = rng.random_range(-1.0..1.0);
                row_mass[i] += v.abs();
                col_mass[j] += v.abs();
                t.push((i, j, v));
            }
        }
    }
    for i in 0..nv {
        t.push((i, i, 1.0 + row_mass[i] + col_mass[i]));
    }
    for r in 0..np {
        let lead = 2 * r;
        let mut entries = vec![(lead, 1.0 + rng.random_range(0.0..1.0))];
        for _ in 0..3 {
            let j = rng.random_range(lead + 1..nv);
            entries.push((j, rng.random_range(-1.0..1.0)));
        }
        for (j, v) in entries {
            t.push((nv + r, j, v));
            t.push((j, nv + r, v));
        }
    }
    CsrMatrix::from_triplets(nv + np, nv + np, &t).unwrap()
}

pub fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn frobenius_diff(a: &CsrMatrix, dense: &[Vec<f64>]) -> f64 {
    let ad = a.to_dense();
    ad.iter()
        .zip(dense)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| (x - y).powi(2)))
        .sum::<f64>()
        .sqrt()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}
