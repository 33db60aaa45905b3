use num_rational::Rational64;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use super::rational::{format_cost, serialize_cost, Cost};
use super::{Instance, Kind};
use crate::error::{Error, Result};
use crate::graph::{forest_path, DisjointSets};

/// A path or spanning tree together with its exact per-scenario costs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteSolution {
    /// Sorted edge ids.
    pub edges: Vec<usize>,
    #[serde(serialize_with = "serialize_costs")]
    pub per_scenario_cost: Vec<Cost>,
    #[serde(serialize_with = "serialize_cost")]
    pub max_cost: Cost,
}

impl DiscreteSolution {
    pub fn max_cost_f64(&self) -> f64 {
        super::rational::to_f64(&self.max_cost)
    }
}

fn serialize_costs<S: Serializer>(cs: &[Cost], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(cs.iter().map(format_cost))
}

/// Checks that `edge_set` is a simple s-t path (SP) or a spanning tree (MST)
/// and computes its exact cost under every scenario.
pub fn evaluate(instance: &Instance, edge_set: &[usize]) -> Result<DiscreteSolution> {
    let m = instance.num_edges();
    let mut edges = edge_set.to_vec();
    edges.sort_unstable();
    if let Some(&bad) = edges.iter().find(|&&e| e >= m) {
        return Err(Error::InvalidInput(format!(
            "edge id {bad} out of range (m = {m})"
        )));
    }
    if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InfeasibleSet {
            reason: "duplicate edge".into(),
            witness: vec![w[0]],
        });
    }
    match instance.kind() {
        Kind::ShortestPath { source, target } => check_path(instance, &edges, source, target)?,
        Kind::SpanningTree => check_tree(instance, &edges)?,
    }

    let denom = instance.cost_denominator();
    let mut per_scenario_cost = Vec::with_capacity(instance.num_scenarios());
    for row in instance.scaled_costs() {
        let sum: i128 = edges.iter().map(|&e| row[e] as i128).sum();
        let sum = i64::try_from(sum).map_err(|_| Error::Overflow)?;
        per_scenario_cost.push(Rational64::new(sum, denom));
    }
    let max_cost = per_scenario_cost.iter().copied().max().unwrap_or_else(Cost::zero);
    Ok(DiscreteSolution {
        edges,
        per_scenario_cost,
        max_cost,
    })
}

fn infeasible(reason: impl Into<String>, witness: Vec<usize>) -> Error {
    Error::InfeasibleSet {
        reason: reason.into(),
        witness,
    }
}

fn check_path(instance: &Instance, edges: &[usize], source: usize, target: usize) -> Result<()> {
    let n = instance.num_nodes();
    let arcs = instance.edges();
    let mut out_arc: Vec<Option<usize>> = vec![None; n];
    let mut in_arc: Vec<Option<usize>> = vec![None; n];
    for &e in edges {
        let (a, b) = arcs[e];
        if let Some(prev) = out_arc[a] {
            return Err(infeasible(format!("node {a} branches"), vec![prev, e]));
        }
        if let Some(prev) = in_arc[b] {
            return Err(infeasible(format!("node {b} is entered twice"), vec![prev, e]));
        }
        out_arc[a] = Some(e);
        in_arc[b] = Some(e);
    }
    if let Some(e) = in_arc[source] {
        return Err(infeasible("arc enters the source", vec![e]));
    }
    if let Some(e) = out_arc[target] {
        return Err(infeasible("arc leaves the target", vec![e]));
    }
    // In/out degrees are now at most one, so following out-arcs from the source
    // cannot revisit a node (the source has no in-arc).
    let mut on_path = vec![false; instance.num_edges()];
    let mut v = source;
    let mut walked = Vec::new();
    while let Some(e) = out_arc[v] {
        on_path[e] = true;
        walked.push(e);
        v = arcs[e].1;
    }
    if v != target {
        return Err(infeasible(
            format!("path from the source stops at node {v}"),
            walked,
        ));
    }
    let leftover: Vec<usize> = edges.iter().copied().filter(|&e| !on_path[e]).collect();
    if leftover.is_empty() {
        return Ok(());
    }
    // Leftover arcs have in/out degree <= 1; a component whose every node has an
    // out-arc is a cycle.
    for &start in &leftover {
        let mut cycle = vec![start];
        let mut e = start;
        while let Some(next) = out_arc[arcs[e].1] {
            if next == start {
                return Err(infeasible("cycle", cycle));
            }
            if cycle.len() > edges.len() {
                break;
            }
            cycle.push(next);
            e = next;
        }
    }
    Err(infeasible("arcs disconnected from the path", leftover))
}

fn check_tree(instance: &Instance, edges: &[usize]) -> Result<()> {
    let n = instance.num_nodes();
    let arcs = instance.edges();
    let mut sets = DisjointSets::new(n);
    let mut accepted = Vec::with_capacity(edges.len());
    for &e in edges {
        let (a, b) = arcs[e];
        if !sets.union(a, b) {
            let mut cycle = forest_path(n, arcs, &accepted, a, b).unwrap_or_default();
            cycle.push(e);
            return Err(infeasible("cycle", cycle));
        }
        accepted.push(e);
    }
    if sets.count() != 1 {
        let labels = sets.labels();
        let isolated: Vec<usize> = (0..n).filter(|&v| labels[v] != labels[0]).collect();
        return Err(infeasible(
            format!(
                "not spanning: {} components; nodes {:?} unreachable from node 0",
                sets.count(),
                isolated
            ),
            Vec::new(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: i64) -> Cost {
        Cost::from_integer(v)
    }

    #[test]
    fn single_edge_costs() {
        let inst = Instance::new(
            "e",
            Kind::ShortestPath { source: 0, target: 1 },
            2,
            vec![(0, 1)],
            vec![vec![c(3)], vec![c(7)]],
        )
        .unwrap();
        let sol = evaluate(&inst, &[0]).unwrap();
        assert_eq!(sol.per_scenario_cost, vec![c(3), c(7)]);
        assert_eq!(sol.max_cost, c(7));
    }

    fn five_node_graph() -> Instance {
        // 0-1-2-3-4 path plus chords 0-2 and 2-4
        let edges = vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 2), (2, 4)];
        Instance::new("g", Kind::SpanningTree, 5, edges, vec![vec![c(1); 6]]).unwrap()
    }

    #[test]
    fn tree_cycle_witness() {
        let inst = five_node_graph();
        match evaluate(&inst, &[0, 1, 3, 4]) {
            Err(Error::InfeasibleSet { reason, mut witness }) => {
                assert_eq!(reason, "cycle");
                witness.sort();
                assert_eq!(witness, vec![0, 1, 4]);
            }
            other => panic!("expected a cycle, got {other:?}"),
        }
        assert!(evaluate(&inst, &[0, 1, 2]).is_err());
        assert_eq!(evaluate(&inst, &[0, 1, 2, 3]).unwrap().max_cost, c(4));
    }

    #[test]
    fn path_witnesses() {
        let arcs = vec![(0, 1), (1, 2), (2, 3), (3, 1), (0, 2), (2, 4)];
        let inst = Instance::new(
            "p",
            Kind::ShortestPath { source: 0, target: 4 },
            5,
            arcs,
            vec![vec![c(1); 6]],
        )
        .unwrap();
        assert_eq!(evaluate(&inst, &[4, 5]).unwrap().max_cost, c(2));
        // path 0->2->4 plus the 2-cycle is rejected: node 2 branches
        assert!(evaluate(&inst, &[4, 5, 2]).is_err());
        match evaluate(&inst, &[0, 1, 5, 2]) {
            Err(Error::InfeasibleSet { witness, .. }) => assert!(!witness.is_empty()),
            other => panic!("{other:?}"),
        }
        match evaluate(&inst, &[0]) {
            Err(Error::InfeasibleSet { witness, .. }) => assert_eq!(witness, vec![0]),
            other => panic!("{other:?}"),
        }
        assert!(evaluate(&inst, &[4, 4, 5]).is_err());
        assert!(matches!(evaluate(&inst, &[9]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn detached_cycle_is_reported() {
        // 0->1 is the path; 2->3->2 is a separate zero-cost loop
        let arcs = vec![(0, 1), (2, 3), (3, 2)];
        let inst = Instance::new(
            "c",
            Kind::ShortestPath { source: 0, target: 1 },
            4,
            arcs,
            vec![vec![c(0); 3]],
        )
        .unwrap();
        match evaluate(&inst, &[0, 1, 2]) {
            Err(Error::InfeasibleSet { reason, mut witness }) => {
                assert_eq!(reason, "cycle");
                witness.sort();
                assert_eq!(witness, vec![1, 2]);
            }
            other => panic!("{other:?}"),
        }
    }
}
