//! Post-processing of fractional s-t flows: cycle cancelling and merging of
//! series arcs.

use crate::error::{Error, Result};
use crate::graph::find_directed_cycle;
use crate::model::{Cost, Instance, Kind};

const ZERO: f64 = 1e-12;

fn support(x: &[f64]) -> Vec<usize> {
    (0..x.len()).filter(|&e| x[e] > ZERO).collect()
}

fn worst_cost(instance: &Instance, x: &[f64]) -> f64 {
    instance
        .float_costs()
        .iter()
        .map(|row| super::scenario_cost(row, x))
        .fold(0.0, f64::max)
}

/// Cancels directed cycles in the support of `x`: each cycle loses its
/// minimum flow, which zeroes at least one of its arcs. Costs are nonnegative,
/// so no scenario cost increases.
pub fn remove_cycles(instance: &Instance, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != instance.num_edges() {
        return Err(Error::InvalidInput(
            "flow vector length differs from edge count".into(),
        ));
    }
    let before = worst_cost(instance, x);
    let mut x: Vec<f64> = x.iter().map(|&v| if v > ZERO { v } else { 0.0 }).collect();
    let arcs = instance.edges();
    while let Some(cycle) = find_directed_cycle(instance.num_nodes(), arcs, &support(&x)) {
        let delta = cycle.iter().map(|&e| x[e]).fold(f64::INFINITY, f64::min);
        for &e in &cycle {
            x[e] -= delta;
            if x[e] <= ZERO {
                x[e] = 0.0;
            }
        }
        log::trace!("cancelled cycle {cycle:?} carrying {delta}");
    }
    let after = worst_cost(instance, &x);
    if after > before + 1e-9 {
        return Err(Error::Invariant(format!(
            "cycle removal raised the worst cost from {before} to {after}"
        )));
    }
    Ok(x)
}

/// Result of [`series_reduce`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesReduction {
    /// Support graph with every internal in/out-degree-1 node eliminated.
    pub instance: Instance,
    pub x: Vec<f64>,
    /// Original arcs (in path order) replaced by each reduced arc.
    pub arcs: Vec<Vec<usize>>,
    /// Original node id of each reduced node.
    pub nodes: Vec<usize>,
}

impl SeriesReduction {
    /// Expands reduced arc ids to original arc ids.
    pub fn expand(&self, reduced: &[usize]) -> Vec<usize> {
        reduced
            .iter()
            .flat_map(|&a| self.arcs[a].iter().copied())
            .collect()
    }
}

/// Restricts an acyclic s-t flow to its support and merges chains of arcs
/// through nodes with exactly one incoming and one outgoing support arc into
/// single arcs with summed costs.
pub fn series_reduce(instance: &Instance, x: &[f64]) -> Result<SeriesReduction> {
    let Kind::ShortestPath { source, target } = instance.kind() else {
        return Err(Error::InvalidInput(
            "series reduction needs an sp instance".into(),
        ));
    };
    if x.len() != instance.num_edges() {
        return Err(Error::InvalidInput(
            "flow vector length differs from edge count".into(),
        ));
    }
    let n = instance.num_nodes();
    let arcs = instance.edges();
    let active = support(x);
    if find_directed_cycle(n, arcs, &active).is_some() {
        return Err(Error::InvalidInput(
            "series reduction needs an acyclic support".into(),
        ));
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &e in &active {
        out[arcs[e].0].push(e);
        indeg[arcs[e].1] += 1;
    }
    let series = |v: usize| v != source && v != target && indeg[v] == 1 && out[v].len() == 1;

    let mut keep = vec![false; n];
    keep[source] = true;
    keep[target] = true;
    for &e in &active {
        let (a, b) = arcs[e];
        keep[a] |= !series(a);
        keep[b] |= !series(b);
    }
    let nodes: Vec<usize> = (0..n).filter(|&v| keep[v]).collect();
    let mut new_id = vec![usize::MAX; n];
    for (i, &v) in nodes.iter().enumerate() {
        new_id[v] = i;
    }

    let mut chains: Vec<Vec<usize>> = Vec::new();
    for &e in &active {
        if series(arcs[e].0) {
            continue;
        }
        let mut chain = vec![e];
        let mut head = arcs[e].1;
        while series(head) {
            let next = out[head][0];
            chain.push(next);
            head = arcs[next].1;
        }
        chains.push(chain);
    }

    let k = instance.num_scenarios();
    let mut new_arcs = Vec::with_capacity(chains.len());
    let mut costs: Vec<Vec<Cost>> = vec![Vec::with_capacity(chains.len()); k];
    let mut new_x = Vec::with_capacity(chains.len());
    for chain in &chains {
        let tail = arcs[chain[0]].0;
        let head = arcs[*chain.last().expect("chains are nonempty")].1;
        new_arcs.push((new_id[tail], new_id[head]));
        for (xi, row) in costs.iter_mut().enumerate() {
            row.push(chain.iter().map(|&e| instance.cost(xi, e)).sum());
        }
        new_x.push(x[chain[0]]);
    }
    let reduced = Instance::new(
        format!("{}-reduced", instance.name()),
        Kind::ShortestPath {
            source: new_id[source],
            target: new_id[target],
        },
        nodes.len(),
        new_arcs,
        costs,
    )?;
    Ok(SeriesReduction {
        instance: reduced,
        x: new_x,
        arcs: chains,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: i64) -> Cost {
        Cost::from_integer(v)
    }

    #[test]
    fn two_cycle_is_cancelled() {
        // s=0 -> a=1 -> t=2, plus a -> b=3 -> a with flow 0.3
        let inst = Instance::new(
            "cyc",
            Kind::ShortestPath { source: 0, target: 2 },
            4,
            vec![(0, 1), (1, 2), (1, 3), (3, 1)],
            vec![vec![c(1), c(1), c(0), c(0)]],
        )
        .unwrap();
        let x = remove_cycles(&inst, &[1.0, 1.0, 0.3, 0.3]).unwrap();
        assert_eq!(x, vec![1.0, 1.0, 0.0, 0.0]);
        let acyclic = remove_cycles(&inst, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(acyclic, vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn chain_becomes_one_arc() {
        let inst = Instance::new(
            "chain",
            Kind::ShortestPath { source: 0, target: 3 },
            4,
            vec![(0, 1), (1, 2), (2, 3)],
            vec![vec![c(1), c(2), c(3)], vec![c(4), c(0), Cost::new(1, 2)]],
        )
        .unwrap();
        let red = series_reduce(&inst, &[1.0; 3]).unwrap();
        assert_eq!(red.instance.num_nodes(), 2);
        assert_eq!(red.instance.edges(), &[(0, 1)]);
        assert_eq!(red.instance.cost(0, 0), c(6));
        assert_eq!(red.instance.cost(1, 0), Cost::new(9, 2));
        assert_eq!(red.expand(&[0]), vec![0, 1, 2]);
    }

    #[test]
    fn no_series_nodes_is_identity() {
        let inst = Instance::new(
            "diamond",
            Kind::ShortestPath { source: 0, target: 1 },
            2,
            vec![(0, 1), (0, 1)],
            vec![vec![c(1), c(2)]],
        )
        .unwrap();
        let red = series_reduce(&inst, &[0.5, 0.5]).unwrap();
        assert_eq!(red.instance.edges(), inst.edges());
        assert_eq!(red.arcs, vec![vec![0], vec![1]]);
        assert_eq!(red.x, vec![0.5, 0.5]);
    }
}
