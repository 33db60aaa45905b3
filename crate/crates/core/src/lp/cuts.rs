//! Separation of the spanning-tree cut constraints via Stoer-Wagner.

use super::SEPARATION_TOL;
use crate::model::Instance;

#[derive(Debug, Clone, PartialEq)]
pub enum SeparationResult {
    /// Every cut carries mass at least `1 - tol`; `min_cut_value` is the global
    /// minimum (infinite for a single node).
    AllSatisfied { min_cut_value: f64 },
    /// `side` is one shore of a minimum cut, `edges` its crossing edges, and
    /// `violation = 1 - mass`.
    Violated {
        side: Vec<usize>,
        edges: Vec<usize>,
        violation: f64,
    },
}

/// Global minimum cut of an undirected multigraph with nonnegative weights.
///
/// Returns the cut value and one shore, normalized to the smaller side (the
/// side containing node 0 on ties). For `n < 2` the value is infinite and the
/// shore empty.
pub fn min_cut(n: usize, edges: &[(usize, usize)], weights: &[f64]) -> (f64, Vec<usize>) {
    if n < 2 {
        return (f64::INFINITY, Vec::new());
    }
    let mut w = vec![vec![0.0; n]; n];
    for (&(a, b), &x) in edges.iter().zip(weights) {
        if a != b {
            w[a][b] += x;
            w[b][a] += x;
        }
    }
    let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    let mut best_side = Vec::new();
    let mut key = vec![0.0; n];
    let mut added = vec![false; n];

    while active.len() > 1 {
        for &v in &active {
            key[v] = 0.0;
            added[v] = false;
        }
        let (mut prev, mut last) = (active[0], active[0]);
        for step in 0..active.len() {
            let mut sel = usize::MAX;
            for &v in &active {
                if !added[v] && (sel == usize::MAX || key[v] > key[sel]) {
                    sel = v;
                }
            }
            added[sel] = true;
            if step + 1 == active.len() && key[sel] < best {
                best = key[sel];
                best_side = members[sel].clone();
            }
            prev = last;
            last = sel;
            for &v in &active {
                if !added[v] {
                    key[v] += w[sel][v];
                }
            }
        }
        // Merge `last` into `prev`.
        for v in 0..n {
            w[prev][v] += w[last][v];
            w[v][prev] = w[prev][v];
        }
        w[prev][prev] = 0.0;
        let moved = std::mem::take(&mut members[last]);
        members[prev].extend(moved);
        active.retain(|&v| v != last);
    }

    let mut in_side = vec![false; n];
    for &v in &best_side {
        in_side[v] = true;
    }
    let size = best_side.len();
    if 2 * size > n || (2 * size == n && !in_side[0]) {
        best_side = (0..n).filter(|&v| !in_side[v]).collect();
    } else {
        best_side.sort_unstable();
    }
    (best, best_side)
}

pub(crate) fn separate(n: usize, edges: &[(usize, usize)], x: &[f64]) -> SeparationResult {
    let (value, side) = min_cut(n, edges, x);
    if value >= 1.0 - SEPARATION_TOL {
        return SeparationResult::AllSatisfied { min_cut_value: value };
    }
    let mut in_side = vec![false; n];
    for &v in &side {
        in_side[v] = true;
    }
    let crossing: Vec<usize> = (0..edges.len())
        .filter(|&e| in_side[edges[e].0] != in_side[edges[e].1])
        .collect();
    let mass: f64 = crossing.iter().map(|&e| x[e]).sum();
    SeparationResult::Violated {
        side,
        edges: crossing,
        violation: 1.0 - mass,
    }
}

/// Finds a cut constraint `sum_{delta(S)} x >= 1` violated by `x`, if any.
pub fn separate_spanning_cuts(instance: &Instance, x: &[f64]) -> SeparationResult {
    separate(instance.num_nodes(), instance.edges(), x)
}
