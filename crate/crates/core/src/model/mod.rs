//! Instances, discrete solutions and the canonical JSON instance format.

mod json;
pub mod rational;
mod solution;

pub use json::parse_instance;
pub use rational::Cost;
pub use solution::{evaluate, DiscreteSolution};

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::DisjointSets;

/// Problem kind. Shortest-path instances are directed and carry terminals;
/// spanning-tree instances are undirected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    ShortestPath { source: usize, target: usize },
    SpanningTree,
}

impl Kind {
    pub fn tag(&self) -> &'static str {
        match self {
            Kind::ShortestPath { .. } => "sp",
            Kind::SpanningTree => "mst",
        }
    }
}

/// A min-max instance: a graph with `K` cost scenarios over its edges.
///
/// Edge `e` is `edges()[e]`; for shortest-path instances it is the arc
/// `(tail, head)`. Parallel edges are allowed, self-loops are not.
/// Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    kind: Kind,
    n: usize,
    edges: Vec<(usize, usize)>,
    scenarios: Vec<Vec<Cost>>,
    // Common denominator of all costs and the costs scaled by it.
    denom: i64,
    scaled: Vec<Vec<i64>>,
    float: Vec<Vec<f64>>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        kind: Kind,
        n: usize,
        edges: Vec<(usize, usize)>,
        scenarios: Vec<Vec<Cost>>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::parse("n", "node count must be positive"));
        }
        for (id, &(a, b)) in edges.iter().enumerate() {
            for endpoint in [a, b] {
                if endpoint >= n {
                    return Err(Error::parse(
                        format!("edges[{id}]"),
                        format!("dangling endpoint {endpoint} (n = {n})"),
                    ));
                }
            }
            if a == b {
                return Err(Error::parse(format!("edges[{id}]"), "self-loop"));
            }
        }
        if scenarios.is_empty() {
            return Err(Error::parse("scenarios", "at least one scenario required"));
        }
        for (xi, row) in scenarios.iter().enumerate() {
            if row.len() != edges.len() {
                return Err(Error::parse(
                    format!("scenarios[{xi}]"),
                    format!("expected {} costs, found {}", edges.len(), row.len()),
                ));
            }
            if let Some(e) = row.iter().position(|c| c.is_negative()) {
                return Err(Error::parse(format!("scenarios[{xi}][{e}]"), "negative cost"));
            }
        }
        match kind {
            Kind::ShortestPath { source, target } => {
                if source >= n {
                    return Err(Error::parse("s", format!("node {source} out of range")));
                }
                if target >= n {
                    return Err(Error::parse("t", format!("node {target} out of range")));
                }
                if source == target {
                    return Err(Error::parse("t", "source and target coincide"));
                }
            }
            Kind::SpanningTree => {
                let mut sets = DisjointSets::new(n);
                for &(a, b) in &edges {
                    sets.union(a, b);
                }
                if sets.count() != 1 {
                    return Err(Error::parse("edges", "graph is disconnected"));
                }
            }
        }

        let mut denom: i64 = 1;
        for c in scenarios.iter().flatten() {
            let d = *c.denom();
            denom = denom
                .checked_mul(d / denom.gcd(&d))
                .ok_or_else(|| Error::parse("scenarios", "cost denominators too large"))?;
        }
        let mut scaled = Vec::with_capacity(scenarios.len());
        for (xi, row) in scenarios.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (e, c) in row.iter().enumerate() {
                let v = c
                    .numer()
                    .checked_mul(denom / *c.denom())
                    .ok_or_else(|| Error::parse(format!("scenarios[{xi}][{e}]"), "cost too large"))?;
                out.push(v);
            }
            scaled.push(out);
        }
        let float = scenarios
            .iter()
            .map(|row| row.iter().map(rational::to_f64).collect())
            .collect();

        Ok(Instance {
            name: name.into(),
            kind,
            n,
            edges,
            scenarios,
            denom,
            scaled,
            float,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn is_shortest_path(&self) -> bool {
        matches!(self.kind, Kind::ShortestPath { .. })
    }

    /// `(source, target)` for shortest-path instances.
    pub fn terminals(&self) -> Option<(usize, usize)> {
        match self.kind {
            Kind::ShortestPath { source, target } => Some((source, target)),
            Kind::SpanningTree => None,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_scenarios(&self) -> usize {
        self.scenarios.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn scenarios(&self) -> &[Vec<Cost>] {
        &self.scenarios
    }

    pub fn cost(&self, scenario: usize, edge: usize) -> Cost {
        self.scenarios[scenario][edge]
    }

    /// Costs as `f64`, indexed `[scenario][edge]`.
    pub fn float_costs(&self) -> &[Vec<f64>] {
        &self.float
    }

    /// Costs multiplied by [`Instance::cost_denominator`], exact integers.
    pub fn scaled_costs(&self) -> &[Vec<i64>] {
        &self.scaled
    }

    pub fn cost_denominator(&self) -> i64 {
        self.denom
    }

    /// Largest cost of `edge` over all scenarios.
    pub fn max_cost(&self, edge: usize) -> Cost {
        self.scenarios
            .iter()
            .map(|row| row[edge])
            .max()
            .unwrap_or_else(Cost::zero)
    }

    /// Same instance with a different name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Instance {
            name: name.into(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        json::to_json(self)
    }
}
