//! Min-max spanning tree: deterministic rounding driven by independent sets of
//! the contracted forest, and randomized coin-flip rounding.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::DisjointSets;
use crate::lp::{self, LpConfig};
use crate::model::rational::to_f64;
use crate::model::{evaluate, DiscreteSolution, Instance, Kind};
use crate::report::{MstRound, RunReport};
use crate::rounding::{round_rs_deterministic, round_si_deterministic, GroupedFractional};

/// Edges with `x` at or below this are dropped from the support.
const SUPPORT_TOL: f64 = 1e-9;

/// Multigraph obtained by contracting each component of the current forest.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedGraph {
    /// Component id of every original node.
    pub component: Vec<usize>,
    pub nodes: usize,
    /// Edges between distinct components, as component pairs.
    pub edges: Vec<(usize, usize)>,
    /// Original edge id of each contracted edge.
    pub original: Vec<usize>,
}

impl ContractedGraph {
    /// Contracts `forest` components; only `support` edges are kept, and
    /// edges inside a component are dropped.
    pub fn new(instance: &Instance, forest: &mut DisjointSets, support: &[usize]) -> Self {
        let component = forest.labels();
        let mut edges = Vec::new();
        let mut original = Vec::new();
        for &e in support {
            let (a, b) = instance.edges()[e];
            if component[a] != component[b] {
                edges.push((component[a], component[b]));
                original.push(e);
            }
        }
        ContractedGraph {
            component,
            nodes: forest.count(),
            edges,
            original,
        }
    }

    /// Neighbor lists of the underlying simple graph, sorted.
    pub fn simple_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.nodes];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    pub fn average_degree(&self) -> f64 {
        let total: usize = self.simple_adjacency().iter().map(Vec::len).sum();
        total as f64 / self.nodes as f64
    }
}

/// Greedy independent set: repeatedly take a node of minimum current degree
/// (lowest id on ties) and delete it with its neighbors.
pub fn independent_set_min(graph: &ContractedGraph) -> Vec<usize> {
    let adj = graph.simple_adjacency();
    let mut alive = vec![true; graph.nodes];
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut set = Vec::new();
    loop {
        let pick = (0..graph.nodes)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (degree[v], v));
        let Some(v) = pick else { break };
        set.push(v);
        let mut removed = vec![v];
        removed.extend(adj[v].iter().copied().filter(|&w| alive[w]));
        for &r in &removed {
            alive[r] = false;
        }
        for &r in &removed {
            for &w in &adj[r] {
                if alive[w] {
                    degree[w] -= 1;
                }
            }
        }
    }
    set.sort_unstable();
    set
}

/// Cap on the number of contraction rounds: `4 ceil(log2 n) + 8`.
pub fn round_cap(n: usize) -> usize {
    4 * (n.max(1) as f64).log2().ceil() as usize + 8
}

fn support_of(x: &[f64]) -> Vec<usize> {
    (0..x.len()).filter(|&e| x[e] > SUPPORT_TOL).collect()
}

fn expect_tree(instance: &Instance) -> Result<()> {
    match instance.kind() {
        Kind::SpanningTree => Ok(()),
        Kind::ShortestPath { .. } => Err(Error::InvalidInput(
            "spanning-tree solver needs an mst instance".into(),
        )),
    }
}

fn finish(report: &mut RunReport, solution: &DiscreteSolution, start: Instant) {
    let base = RunReport::new(report.algorithm.clone(), report.l_star, solution.max_cost);
    report.max_cost = base.max_cost;
    report.max_cost_f64 = base.max_cost_f64;
    report.ratio = base.ratio;
    report.millis = start.elapsed().as_millis() as u64;
}

/// Deterministic algorithm: round `p = n - 1` elements from the fractional
/// tree, keep the acyclic part, then repeatedly contract, pick an independent
/// set of components, and round one outgoing edge per chosen component.
///
/// `report.rounds` counts contraction rounds; `selections[0]` is round 0.
pub fn solve_mst_deterministic(
    instance: &Instance,
    config: &LpConfig,
) -> Result<(DiscreteSolution, RunReport)> {
    let start = Instant::now();
    expect_tree(instance)?;
    let (frac, stats) = lp::minimize_l(instance, config)?;
    let l_star = frac.bound;
    let bound = to_f64(&l_star);
    let n = instance.num_nodes();
    let mut report = RunReport::new("mst-det", l_star, l_star);
    report.lp = stats;
    let support = support_of(&frac.x);
    let local_costs: Vec<Vec<f64>> = instance
        .float_costs()
        .iter()
        .map(|row| support.iter().map(|&e| row[e]).collect())
        .collect();

    let mut forest = DisjointSets::new(n);
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    if n > 1 {
        let local_x: Vec<f64> = support.iter().map(|&e| frac.x[e].min(1.0)).collect();
        let gf = GroupedFractional::si(n - 1, local_x, bound);
        let out = round_si_deterministic(&gf, &local_costs)?;
        let mut added = Vec::new();
        for &i in &out.chosen {
            let e = support[i];
            let (a, b) = instance.edges()[e];
            if forest.union(a, b) {
                added.push(e);
            }
        }
        tree.extend(&added);
        report.selections.push(added);
        report.potential_traces.push(out.potential);
    }

    let cap = round_cap(n);
    while forest.count() > 1 {
        if report.rounds >= cap {
            return Err(Error::RoundCap { cap });
        }
        let graph = ContractedGraph::new(instance, &mut forest, &support);
        let independent = independent_set_min(&graph);
        let avg_degree = graph.average_degree();
        let alpha = 1.0 + avg_degree;
        if (independent.len() as f64) < graph.nodes as f64 / alpha - 1e-9 {
            return Err(Error::Invariant(format!(
                "independent set of size {} below {} / {alpha}",
                independent.len(),
                graph.nodes
            )));
        }
        let mut in_set = vec![false; graph.nodes];
        for &v in &independent {
            in_set[v] = true;
        }
        // Element space: support edges (local index); groups delta(i).
        let mut local_of = vec![usize::MAX; instance.num_edges()];
        for (i, &e) in support.iter().enumerate() {
            local_of[e] = i;
        }
        let mut group_of_node = vec![usize::MAX; graph.nodes];
        for (g, &v) in independent.iter().enumerate() {
            group_of_node[v] = g;
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); independent.len()];
        let mut owner = vec![usize::MAX; support.len()];
        for (ce, &(a, b)) in graph.edges.iter().enumerate() {
            for v in [a, b] {
                if in_set[v] {
                    let local = local_of[graph.original[ce]];
                    if owner[local] != usize::MAX {
                        return Err(Error::Invariant(format!(
                            "edge {} lies in two groups",
                            graph.original[ce]
                        )));
                    }
                    owner[local] = group_of_node[v];
                    groups[group_of_node[v]].push(local);
                }
            }
        }
        let mut x = vec![0.0; support.len()];
        for (g, group) in groups.iter().enumerate() {
            let mass: f64 = group.iter().map(|&i| frac.x[support[i]]).sum();
            if mass < 0.99 {
                return Err(Error::Invariant(format!(
                    "component {} has outgoing mass {mass} < 0.99",
                    independent[g]
                )));
            }
            for &i in group {
                x[i] = frac.x[support[i]] / mass;
            }
        }
        let gf = GroupedFractional::rs(groups, x, bound);
        let out = round_rs_deterministic(&gf, &local_costs)?;
        let mut added = Vec::new();
        for &i in &out.chosen {
            let e = support[i];
            let (a, b) = instance.edges()[e];
            if !forest.union(a, b) {
                return Err(Error::Invariant(format!("edge {e} closes a cycle")));
            }
            added.push(e);
        }
        tree.extend(&added);
        report.rounds += 1;
        report.mst_rounds.push(MstRound {
            nodes: graph.nodes,
            independent: independent.len(),
            avg_degree,
            alpha,
            components_after: forest.count(),
        });
        log::debug!(
            "round {}: |U| = {}, |I| = {}, added {added:?}",
            report.rounds,
            graph.nodes,
            independent.len()
        );
        report.selections.push(added);
        report.potential_traces.push(out.potential);
    }

    let solution = evaluate(instance, &tree)?;
    finish(&mut report, &solution, start);
    Ok((solution, report))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoinMode {
    /// `k_hat = ceil((40 + gamma) ln n)`, one attempt.
    Analytic { gamma: f64 },
    /// Caller-chosen number of flips, with up to `retries` extra attempts.
    Practical { k_hat: usize, retries: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinConfig {
    pub mode: CoinMode,
    pub seed: u64,
}

/// `ceil((40 + gamma) ln n)`, checked against `ln(2 n^2 K)`.
pub fn analytic_k_hat(n: usize, k: usize, gamma: f64) -> Result<usize> {
    if !(gamma >= 0.0) {
        return Err(Error::Range(format!("gamma = {gamma} must be nonnegative")));
    }
    let nf = n as f64;
    let k_hat = ((40.0 + gamma) * nf.ln()).ceil();
    let need = (2.0 * nf * nf * k as f64).ln();
    if k_hat <= need {
        return Err(Error::Range(format!(
            "k_hat = {k_hat} must exceed ln(2 n^2 K) = {need:.3}; increase gamma"
        )));
    }
    Ok(k_hat as usize)
}

/// Per-scenario threshold on the normalized cost of the included edges:
/// `k_hat + (e - 1) sqrt(k_hat ln(2 n^2 K))`.
pub fn cost_threshold(n: usize, k: usize, k_hat: usize) -> f64 {
    let kh = k_hat as f64;
    kh + (std::f64::consts::E - 1.0) * (kh * (2.0 * (n * n) as f64 * k as f64).ln()).sqrt()
}

/// One round of coin flipping.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinTrial {
    /// Edges with at least one head, sorted.
    pub included: Vec<usize>,
    pub connected: bool,
    /// Spanning tree extracted from the included edges when connected.
    pub tree: Option<Vec<usize>>,
    /// Cost of all included edges per scenario, with costs divided by `L*`.
    pub included_cost: Vec<f64>,
}

/// Flips an `x_e`-coin `k_hat` times for every edge and extracts a spanning
/// tree (Kruskal by worst-case cost, then id) when the result is connected.
pub fn coin_trial(
    instance: &Instance,
    x: &[f64],
    l_star: f64,
    k_hat: usize,
    rng: &mut ChaCha8Rng,
) -> CoinTrial {
    let mut included = Vec::new();
    for (e, &p) in x.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        if (0..k_hat).any(|_| rng.gen::<f64>() < p) {
            included.push(e);
        }
    }
    let included_cost = instance
        .float_costs()
        .iter()
        .map(|row| {
            let total: f64 = included.iter().map(|&e| row[e]).sum();
            if l_star > 0.0 {
                total / l_star
            } else {
                total
            }
        })
        .collect();
    let mut order = included.clone();
    order.sort_by(|&a, &b| instance.max_cost(a).cmp(&instance.max_cost(b)).then(a.cmp(&b)));
    let mut sets = DisjointSets::new(instance.num_nodes());
    let mut tree = Vec::new();
    for e in order {
        let (a, b) = instance.edges()[e];
        if sets.union(a, b) {
            tree.push(e);
        }
    }
    let connected = sets.count() == 1;
    CoinTrial {
        included,
        connected,
        tree: connected.then_some(tree),
        included_cost,
    }
}

/// [`coin_trial`] with a fresh generator seeded from `seed`.
pub fn coin_trial_seeded(instance: &Instance, x: &[f64], l_star: f64, k_hat: usize, seed: u64) -> CoinTrial {
    coin_trial(instance, x, l_star, k_hat, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Randomized algorithm: coin-flip rounding of the optimal fractional tree.
pub fn solve_mst_randomized(
    instance: &Instance,
    coin: &CoinConfig,
    config: &LpConfig,
) -> Result<(DiscreteSolution, RunReport)> {
    let start = Instant::now();
    expect_tree(instance)?;
    let n = instance.num_nodes();
    let k = instance.num_scenarios();
    let (k_hat, attempts) = match coin.mode {
        CoinMode::Analytic { gamma } => (analytic_k_hat(n, k, gamma)?, 1),
        CoinMode::Practical { k_hat, retries } => {
            if k_hat == 0 {
                return Err(Error::Range("k_hat must be positive".into()));
            }
            (k_hat, retries + 1)
        }
    };
    let (frac, stats) = lp::minimize_l(instance, config)?;
    let mut report = RunReport::new("mst-rand", frac.bound, frac.bound);
    report.lp = stats;
    report.rng_seed = Some(coin.seed);
    if (k as f64) > (n as f64).powi(4) {
        report.warnings.push(format!(
            "K = {k} exceeds n^4; the analysis assumes K polynomial in n"
        ));
    }
    let x: Vec<f64> = frac
        .x
        .iter()
        .map(|&v| if v > SUPPORT_TOL { v } else { 0.0 })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(coin.seed);
    for attempt in 1..=attempts {
        let trial = coin_trial(instance, &x, frac.bound_f64(), k_hat, &mut rng);
        report.rounds = attempt;
        if let Some(tree) = trial.tree {
            report.selections.push(tree.clone());
            let solution = evaluate(instance, &tree)?;
            finish(&mut report, &solution, start);
            return Ok((solution, report));
        }
        log::info!("attempt {attempt}: included edges disconnected");
    }
    Err(Error::Disconnected { attempts })
}
