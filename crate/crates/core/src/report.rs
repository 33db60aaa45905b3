use serde::Serialize;

use crate::lp::LpStats;
use crate::model::rational::to_f64;
use crate::model::Cost;

/// Per-round statistics of the shortest-path algorithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpRound {
    /// Shortest s-t distance under the 0/1 arc lengths before the round.
    pub path_length: usize,
    /// Fractional mass of each cut-set before normalization.
    pub cutset_mass: Vec<f64>,
    /// Components of the selected-arc subgraph (reduced graph) before and after.
    pub components_before: usize,
    pub components_after: usize,
    /// Whether the selected arcs still form an undirected forest.
    pub forest: bool,
}

/// Per-round statistics of the deterministic spanning-tree algorithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MstRound {
    /// Nodes of the contracted graph.
    pub nodes: usize,
    /// Size of the independent set found.
    pub independent: usize,
    /// Average degree of the simple contracted graph.
    pub avg_degree: f64,
    /// `1 + avg_degree`.
    pub alpha: f64,
    pub components_after: usize,
}

/// Trace of one solver run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub algorithm: String,
    pub rounds: usize,
    /// Original edge ids selected in each round (round 0 first where applicable).
    pub selections: Vec<Vec<usize>>,
    #[serde(serialize_with = "crate::model::rational::serialize_cost")]
    pub l_star: Cost,
    pub l_star_f64: f64,
    #[serde(serialize_with = "crate::model::rational::serialize_cost")]
    pub max_cost: Cost,
    pub max_cost_f64: f64,
    pub ratio: f64,
    pub rng_seed: Option<u64>,
    pub millis: u64,
    /// Log-potential values along each rounding call's decision sequence.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub potential_traces: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sp_rounds: Vec<SpRound>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mst_rounds: Vec<MstRound>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub lp: LpStats,
}

/// `max_cost / l_star`; 1 when both are zero and infinite when only `l_star` is.
pub fn ratio(max_cost: &Cost, l_star: &Cost) -> f64 {
    if *l_star.numer() == 0 {
        if *max_cost.numer() == 0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        to_f64(&(max_cost / l_star))
    }
}

impl RunReport {
    pub fn new(algorithm: impl Into<String>, l_star: Cost, max_cost: Cost) -> Self {
        RunReport {
            algorithm: algorithm.into(),
            rounds: 0,
            selections: Vec::new(),
            l_star,
            l_star_f64: to_f64(&l_star),
            max_cost,
            max_cost_f64: to_f64(&max_cost),
            ratio: ratio(&max_cost, &l_star),
            rng_seed: None,
            millis: 0,
            potential_traces: Vec::new(),
            sp_rounds: Vec::new(),
            mst_rounds: Vec::new(),
            warnings: Vec::new(),
            lp: LpStats::default(),
        }
    }
}
