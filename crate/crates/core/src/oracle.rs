//! Exhaustive exact solvers, used as ground truth at small scale.
//!
//! Both enumerate feasible solutions with exact integer (scaled) costs and a
//! branch-and-bound cutoff; exceeding the node limit is an error, never a
//! guess.

use crate::error::{Error, Result};
use crate::graph::DisjointSets;
use crate::model::{evaluate, DiscreteSolution, Instance, Kind};

/// Default search-node limit.
pub const DEFAULT_LIMIT: u64 = 1_000_000;

struct Search<'a> {
    instance: &'a Instance,
    costs: &'a [Vec<i64>],
    limit: u64,
    visited: u64,
    best: Option<(i128, Vec<usize>)>,
}

impl Search<'_> {
    fn tick(&mut self) -> Result<()> {
        self.visited += 1;
        if self.visited > self.limit {
            return Err(Error::LimitExceeded { limit: self.limit });
        }
        Ok(())
    }

    fn bounded(&self, partial: &[i128]) -> bool {
        match &self.best {
            Some((b, _)) => partial.iter().any(|v| v >= b),
            None => false,
        }
    }

    fn offer(&mut self, partial: &[i128], set: &[usize]) {
        let worst = partial.iter().copied().max().unwrap_or(0);
        if self.best.as_ref().is_none_or(|(b, _)| worst < *b) {
            self.best = Some((worst, set.to_vec()));
        }
    }

    fn add(&self, partial: &mut [i128], e: usize, sign: i128) {
        for (xi, p) in partial.iter_mut().enumerate() {
            *p += sign * self.costs[xi][e] as i128;
        }
    }
}

/// Exact min-max optimum by enumeration of simple paths or spanning trees.
pub fn brute_force_opt(instance: &Instance, limit: u64) -> Result<DiscreteSolution> {
    let mut search = Search {
        instance,
        costs: instance.scaled_costs(),
        limit,
        visited: 0,
        best: None,
    };
    let mut partial = vec![0i128; instance.num_scenarios()];
    match instance.kind() {
        Kind::ShortestPath { source, target } => {
            let mut out: Vec<Vec<usize>> = vec![Vec::new(); instance.num_nodes()];
            for (e, &(a, _)) in instance.edges().iter().enumerate() {
                out[a].push(e);
            }
            let mut on_path = vec![false; instance.num_nodes()];
            on_path[source] = true;
            let mut path = Vec::new();
            paths(
                &mut search,
                &out,
                &mut on_path,
                &mut path,
                &mut partial,
                source,
                target,
            )?;
        }
        Kind::SpanningTree => {
            let mut chosen = Vec::new();
            trees(
                &mut search,
                &DisjointSets::new(instance.num_nodes()),
                0,
                &mut chosen,
                &mut partial,
            )?;
        }
    }
    match search.best {
        Some((_, set)) => evaluate(instance, &set),
        None => Err(Error::NoFeasibleL("no feasible solution exists".into())),
    }
}

fn paths(
    s: &mut Search<'_>,
    out: &[Vec<usize>],
    on_path: &mut [bool],
    path: &mut Vec<usize>,
    partial: &mut [i128],
    v: usize,
    target: usize,
) -> Result<()> {
    s.tick()?;
    if s.bounded(partial) {
        return Ok(());
    }
    if v == target {
        s.offer(partial, path);
        return Ok(());
    }
    for &e in &out[v] {
        let w = s.instance.edges()[e].1;
        if on_path[w] {
            continue;
        }
        on_path[w] = true;
        path.push(e);
        s.add(partial, e, 1);
        paths(s, out, on_path, path, partial, w, target)?;
        s.add(partial, e, -1);
        path.pop();
        on_path[w] = false;
    }
    Ok(())
}

/// Deletion/contraction over edges in id order; `sets` holds the components
/// of the edges chosen so far.
fn trees(
    s: &mut Search<'_>,
    sets: &DisjointSets,
    next: usize,
    chosen: &mut Vec<usize>,
    partial: &mut [i128],
) -> Result<()> {
    s.tick()?;
    if s.bounded(partial) {
        return Ok(());
    }
    let n = s.instance.num_nodes();
    if chosen.len() == n - 1 {
        s.offer(partial, chosen);
        return Ok(());
    }
    let edges = s.instance.edges();
    // Remaining edges must still be able to connect everything.
    let mut reach = sets.clone();
    for &(a, b) in &edges[next..] {
        reach.union(a, b);
    }
    if reach.count() != 1 {
        return Ok(());
    }
    let Some(e) = (next..edges.len()).find(|&e| {
        let mut probe = sets.clone();
        !probe.same(edges[e].0, edges[e].1)
    }) else {
        return Ok(());
    };
    let (a, b) = edges[e];
    let mut with = sets.clone();
    with.union(a, b);
    chosen.push(e);
    s.add(partial, e, 1);
    trees(s, &with, e + 1, chosen, partial)?;
    s.add(partial, e, -1);
    chosen.pop();
    trees(s, sets, e + 1, chosen, partial)
}

/// Calls `visit` on every spanning tree (sorted edge ids); fails past `limit` trees.
pub fn for_each_spanning_tree(
    instance: &Instance,
    limit: u64,
    mut visit: impl FnMut(&[usize]),
) -> Result<u64> {
    fn rec(
        edges: &[(usize, usize)],
        n: usize,
        sets: &DisjointSets,
        next: usize,
        chosen: &mut Vec<usize>,
        count: &mut u64,
        limit: u64,
        visit: &mut dyn FnMut(&[usize]),
    ) -> Result<()> {
        if chosen.len() == n - 1 {
            *count += 1;
            if *count > limit {
                return Err(Error::LimitExceeded { limit });
            }
            visit(chosen);
            return Ok(());
        }
        if next == edges.len() {
            return Ok(());
        }
        let (a, b) = edges[next];
        let mut with = sets.clone();
        if with.union(a, b) {
            chosen.push(next);
            rec(edges, n, &with, next + 1, chosen, count, limit, visit)?;
            chosen.pop();
        }
        let mut reach = sets.clone();
        for &(a, b) in &edges[next + 1..] {
            reach.union(a, b);
        }
        if reach.count() == 1 {
            rec(edges, n, sets, next + 1, chosen, count, limit, visit)?;
        }
        Ok(())
    }
    let mut count = 0;
    let n = instance.num_nodes();
    rec(
        instance.edges(),
        n,
        &DisjointSets::new(n),
        0,
        &mut Vec::new(),
        &mut count,
        limit,
        &mut visit,
    )?;
    Ok(count)
}

/// Calls `visit` on every simple s-t path (arc ids in order); fails past `limit` paths.
pub fn for_each_path(instance: &Instance, limit: u64, mut visit: impl FnMut(&[usize])) -> Result<u64> {
    let Kind::ShortestPath { source, target } = instance.kind() else {
        return Err(Error::InvalidInput(
            "path enumeration needs an sp instance".into(),
        ));
    };
    let n = instance.num_nodes();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(a, _)) in instance.edges().iter().enumerate() {
        out[a].push(e);
    }
    // Explicit stack of (node, next out-arc index).
    let mut on_path = vec![false; n];
    on_path[source] = true;
    let mut stack = vec![(source, 0usize)];
    let mut path: Vec<usize> = Vec::new();
    let mut count = 0u64;
    while let Some(&mut (v, ref mut i)) = stack.last_mut() {
        if v == target {
            count += 1;
            if count > limit {
                return Err(Error::LimitExceeded { limit });
            }
            visit(&path);
        }
        if v != target && *i < out[v].len() {
            let e = out[v][*i];
            *i += 1;
            let w = instance.edges()[e].1;
            if !on_path[w] {
                on_path[w] = true;
                path.push(e);
                stack.push((w, 0));
            }
        } else {
            on_path[v] = false;
            stack.pop();
            path.pop();
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::model::Cost;

    fn c(v: i64) -> Cost {
        Cost::from_integer(v)
    }

    #[test]
    fn single_edge() {
        let inst = Instance::new(
            "e",
            Kind::ShortestPath { source: 0, target: 1 },
            2,
            vec![(0, 1)],
            vec![vec![c(4)]],
        )
        .unwrap();
        let sol = brute_force_opt(&inst, DEFAULT_LIMIT).unwrap();
        assert_eq!(sol.edges, vec![0]);
        assert_eq!(sol.max_cost, c(4));
    }

    #[test]
    fn gap_optima() {
        assert_eq!(
            brute_force_opt(&gen::gen_gap_sp(0).unwrap(), DEFAULT_LIMIT)
                .unwrap()
                .max_cost,
            c(2)
        );
        assert_eq!(
            brute_force_opt(&gen::gen_gap_mst(2).unwrap(), DEFAULT_LIMIT)
                .unwrap()
                .max_cost,
            c(2)
        );
    }

    #[test]
    fn triangle_with_one_scenario_per_edge() {
        let inst = Instance::new(
            "tri",
            Kind::SpanningTree,
            3,
            vec![(0, 1), (1, 2), (0, 2)],
            vec![
                vec![c(1), c(0), c(0)],
                vec![c(0), c(1), c(0)],
                vec![c(0), c(0), c(1)],
            ],
        )
        .unwrap();
        // Any tree uses two edges, each charged in its own scenario only.
        assert_eq!(brute_force_opt(&inst, DEFAULT_LIMIT).unwrap().max_cost, c(1));
    }

    #[test]
    fn enumeration_counts() {
        // K_4 has 16 spanning trees (Cayley).
        let k4 = Instance::new(
            "k4",
            Kind::SpanningTree,
            4,
            vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
            vec![vec![c(1); 6]],
        )
        .unwrap();
        assert_eq!(for_each_spanning_tree(&k4, 100, |_| {}).unwrap(), 16);
        assert_eq!(
            for_each_spanning_tree(&gen::gen_gap_mst(3).unwrap(), 10_000, |_| {}).unwrap(),
            1728
        );
        assert_eq!(
            for_each_path(&gen::gen_gap_sp(0).unwrap(), 100, |_| {}).unwrap(),
            4
        );
        assert!(matches!(
            for_each_spanning_tree(&k4, 3, |_| {}),
            Err(Error::LimitExceeded { limit: 3 })
        ));
    }

    #[test]
    fn limit_is_a_refusal() {
        let inst = gen::gen_gap_mst(3).unwrap();
        assert!(matches!(
            brute_force_opt(&inst, 5),
            Err(Error::LimitExceeded { limit: 5 })
        ));
    }
}
