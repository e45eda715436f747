//! Static orderings applied before elimination: the fill-reducing symmetric
//! ordering and the static deferral of small diagonals.

use std::collections::VecDeque;

use crate::sparse::{CsrMatrix, Permutation};

/// Stable partition moving every index with a small diagonal behind the rest.
///
/// Index `i` is deferred when `|a_ii| < diag_thresh · max_j |a_jj|` or when
/// `a_ii` is zero. Returns the permutation and the number of kept (leading) indices.
pub fn static_defer(a: &CsrMatrix, diag_thresh: f64) -> (Permutation, usize) {
    let diag = a.diagonal();
    let max = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let small = |d: f64| d == 0.0 || d.abs() < diag_thresh * max;
    let mut order: Vec<usize> = (0..diag.len()).filter(|&i| !small(diag[i])).collect();
    let kept = order.len();
    order.extend((0..diag.len()).filter(|&i| small(diag[i])));
    (
        Permutation::from_new_to_old(order).expect("partition of 0..n"),
        kept,
    )
}

/// Reverse Cuthill–McKee ordering on the pattern of `A + Aᵀ`.
///
/// Components are ordered by their smallest index and each one is started from
/// a pseudo-peripheral node. Isolated nodes keep their position, so a diagonal
/// matrix yields the identity.
pub fn reorder(a: &CsrMatrix) -> Permutation {
    let n = a.nrows();
    let adj = a.symmetric_adjacency();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = vec![usize::MAX; n];

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        if degree[seed] == 0 {
            visited[seed] = true;
            order.push(seed);
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree, &mut level);

        let comp_start = order.len();
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        let mut neighbours: Vec<usize> = Vec::new();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            neighbours.clear();
            neighbours.extend(adj[v].iter().copied().filter(|&w| !visited[w]));
            neighbours.sort_unstable_by_key(|&w| (degree[w], w));
            for &w in &neighbours {
                visited[w] = true;
                queue.push_back(w);
            }
        }
        order[comp_start..].reverse();
    }
    Permutation::from_new_to_old(order).expect("RCM visits every node once")
}

/// BFS level structure rooted at `root`; returns (eccentricity, nodes of the last level).
fn level_structure(root: usize, adj: &[Vec<usize>], level: &mut [usize]) -> (usize, Vec<usize>) {
    let mut touched = vec![root];
    level[root] = 0;
    let mut head = 0;
    while head < touched.len() {
        let v = touched[head];
        head += 1;
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                touched.push(w);
            }
        }
    }
    let ecc = level[*touched.last().unwrap()];
    let last: Vec<usize> = touched.iter().copied().filter(|&v| level[v] == ecc).collect();
    for &v in &touched {
        level[v] = usize::MAX;
    }
    (ecc, last)
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize], level: &mut [usize]) -> usize {
    // begin from a minimum-degree node of the component
    let mut comp = vec![seed];
    level[seed] = 0;
    let mut head = 0;
    while head < comp.len() {
        let v = comp[head];
        head += 1;
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = 0;
                comp.push(w);
            }
        }
    }
    for &v in &comp {
        level[v] = usize::MAX;
    }
    let mut root = *comp.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
    let (mut ecc, mut last) = level_structure(root, adj, level);
    loop {
        let candidate = *last.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        let (cand_ecc, cand_last) = level_structure(candidate, adj, level);
        if cand_ecc > ecc {
            root = candidate;
            ecc = cand_ecc;
            last = cand_last;
        } else {
            return root;
        }
    }
}
