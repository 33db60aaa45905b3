//! Min-max shortest path: the layered cut-set rounding algorithm and the
//! average-cost baseline.
//!
//! The algorithm solves the relaxation, turns the optimal flow into an acyclic
//! one, merges series arcs, and then repeatedly selects arcs (giving them
//! length 0) by rounding one-per-cut-set problems built from the distance
//! layers of the current 0/1 lengths, until the shortest s-t path has few
//! unselected arcs left.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::DisjointSets;
use crate::lp::{self, LpConfig};
use crate::model::rational::to_f64;
use crate::model::{evaluate, DiscreteSolution, Instance, Kind};
use crate::report::{RunReport, SpRound};
use crate::rounding::{log_ratio_factor, round_rs_deterministic, GroupedFractional};

/// Round threshold `ceil(sqrt(n ln K / ln ln K))` with `K` clamped to at least 3.
pub fn threshold(n: usize, k: usize) -> usize {
    let kk = k.max(3) as f64;
    ((n as f64) * kk.ln() / kk.ln().ln()).sqrt().ceil() as usize
}

/// Arc lengths 0 (selected) / 1 over a graph, with 0-1 BFS distances.
#[derive(Debug, Clone)]
pub struct LabeledDag {
    pub n: usize,
    pub arcs: Vec<(usize, usize)>,
    pub selected: Vec<bool>,
    pub source: usize,
    pub target: usize,
    /// Distance from the source; `usize::MAX` when unreachable.
    pub dist: Vec<usize>,
}

impl LabeledDag {
    pub fn new(n: usize, arcs: Vec<(usize, usize)>, source: usize, target: usize) -> Self {
        let selected = vec![false; arcs.len()];
        let mut dag = LabeledDag {
            n,
            arcs,
            selected,
            source,
            target,
            dist: Vec::new(),
        };
        dag.relabel();
        dag
    }

    fn length(&self, e: usize) -> usize {
        usize::from(!self.selected[e])
    }

    /// 0-1 BFS from `from` along arcs (or against them when `reverse`).
    fn distances(&self, from: usize, reverse: bool) -> Vec<usize> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (e, &(a, b)) in self.arcs.iter().enumerate() {
            if reverse {
                adj[b].push(e);
            } else {
                adj[a].push(e);
            }
        }
        let mut dist = vec![usize::MAX; self.n];
        dist[from] = 0;
        let mut deque = VecDeque::from([from]);
        while let Some(v) = deque.pop_front() {
            for &e in &adj[v] {
                let w = if reverse { self.arcs[e].0 } else { self.arcs[e].1 };
                let d = dist[v] + self.length(e);
                if d < dist[w] {
                    dist[w] = d;
                    if self.length(e) == 0 {
                        deque.push_front(w);
                    } else {
                        deque.push_back(w);
                    }
                }
            }
        }
        dist
    }

    pub fn relabel(&mut self) {
        self.dist = self.distances(self.source, false);
    }

    /// Current shortest s-t length `l_P`.
    pub fn path_length(&self) -> usize {
        self.dist[self.target]
    }

    /// Among shortest s-t paths, the one with the lexicographically smallest
    /// arc-id sequence.
    pub fn shortest_path(&self) -> Option<Vec<usize>> {
        let to_target = self.distances(self.target, true);
        if to_target[self.source] == usize::MAX {
            return None;
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (e, &(a, _)) in self.arcs.iter().enumerate() {
            out[a].push(e);
        }
        let mut path = Vec::new();
        let mut v = self.source;
        while v != self.target {
            let e = out[v]
                .iter()
                .copied()
                .find(|&e| {
                    let w = self.arcs[e].1;
                    to_target[w] != usize::MAX && self.length(e) + to_target[w] == to_target[v]
                })
                .expect("a node on a shortest path has a continuing arc");
            path.push(e);
            v = self.arcs[e].1;
            if path.len() > self.arcs.len() {
                return None;
            }
        }
        Some(path)
    }
}

/// Cut-sets `E_i = {(u, v) unselected : d(u) = i - 1, d(v) = i}` for `i = 1..=l_P`.
pub fn extract_cutsets(dag: &LabeledDag) -> Vec<Vec<usize>> {
    let lp = dag.path_length();
    let mut sets = vec![Vec::new(); lp];
    for (e, &(a, b)) in dag.arcs.iter().enumerate() {
        if dag.selected[e] {
            continue;
        }
        let (du, dv) = (dag.dist[a], dag.dist[b]);
        if du != usize::MAX && dv == du + 1 && dv <= lp {
            sets[du].push(e);
        }
    }
    sets
}

/// Runs the layered rounding algorithm.
pub fn solve_sp(instance: &Instance, config: &LpConfig) -> Result<(DiscreteSolution, RunReport)> {
    let start = Instant::now();
    let Kind::ShortestPath { .. } = instance.kind() else {
        return Err(Error::InvalidInput("sp-alg1 needs an sp instance".into()));
    };
    let (frac, stats) = lp::minimize_l(instance, config)?;
    let l_star = frac.bound;
    let flow = lp::remove_cycles(instance, &frac.x)?;
    let red = lp::series_reduce(instance, &flow)?;
    let rinst = &red.instance;
    let (rs, rt) = rinst.terminals().expect("reduced instance keeps its terminals");
    let costs = rinst.float_costs();
    let mut dag = LabeledDag::new(rinst.num_nodes(), rinst.edges().to_vec(), rs, rt);

    let n = instance.num_nodes();
    let k = instance.num_scenarios();
    let l_hat = threshold(n, k);
    let mut report = RunReport::new("sp-alg1", l_star, l_star);
    report.lp = stats;
    let mut components = DisjointSets::new(rinst.num_nodes());
    let mut forest = true;

    while dag.path_length() > l_hat {
        if report.rounds > rinst.num_edges() {
            return Err(Error::Invariant("selection rounds do not terminate".into()));
        }
        let path_length = dag.path_length();
        let groups = extract_cutsets(&dag);
        let mut x = vec![0.0; rinst.num_edges()];
        let mut masses = Vec::with_capacity(groups.len());
        for (i, group) in groups.iter().enumerate() {
            let mass: f64 = group.iter().map(|&e| red.x[e]).sum();
            if mass < 0.99 {
                return Err(Error::Invariant(format!(
                    "cut-set {} has mass {mass} < 0.99",
                    i + 1
                )));
            }
            for &e in group {
                x[e] = red.x[e] / mass;
            }
            masses.push(mass);
        }
        let gf = GroupedFractional::rs(groups, x, to_f64(&l_star));
        let out = round_rs_deterministic(&gf, costs)?;
        let before = components.count();
        for &e in &out.chosen {
            dag.selected[e] = true;
            let (a, b) = dag.arcs[e];
            forest &= components.union(a, b);
        }
        dag.relabel();
        report.sp_rounds.push(SpRound {
            path_length,
            cutset_mass: masses,
            components_before: before,
            components_after: components.count(),
            forest,
        });
        report.selections.push(red.expand(&out.chosen));
        report.potential_traces.push(out.potential);
        report.rounds += 1;
        log::debug!(
            "round {}: l_P = {path_length}, selected {:?}",
            report.rounds,
            out.chosen
        );
    }

    let path = dag
        .shortest_path()
        .ok_or_else(|| Error::Invariant("no s-t path in the reduced support".into()))?;
    let unselected = path.iter().filter(|&&e| !dag.selected[e]).count();
    if unselected > l_hat {
        return Err(Error::Invariant(format!(
            "final path has {unselected} unselected arcs > {l_hat}"
        )));
    }
    let solution = evaluate(instance, &red.expand(&path))?;
    finish(&mut report, &solution, start);
    Ok((solution, report))
}

fn finish(report: &mut RunReport, solution: &DiscreteSolution, start: Instant) {
    let l_star = report.l_star;
    let base = RunReport::new(report.algorithm.clone(), l_star, solution.max_cost);
    report.max_cost = base.max_cost;
    report.max_cost_f64 = base.max_cost_f64;
    report.ratio = base.ratio;
    report.millis = start.elapsed().as_millis() as u64;
}

/// Dijkstra on the summed (equivalently averaged) scenario costs, computed
/// exactly on scaled integers. Ties go to the smaller node id.
pub fn solve_sp_average_baseline(instance: &Instance) -> Result<DiscreteSolution> {
    let Kind::ShortestPath { source, target } = instance.kind() else {
        return Err(Error::InvalidInput("sp-avg needs an sp instance".into()));
    };
    let n = instance.num_nodes();
    let weight: Vec<i128> = (0..instance.num_edges())
        .map(|e| instance.scaled_costs().iter().map(|row| row[e] as i128).sum())
        .collect();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(a, _)) in instance.edges().iter().enumerate() {
        out[a].push(e);
    }
    let mut dist = vec![i128::MAX; n];
    let mut via = vec![usize::MAX; n];
    let mut done = vec![false; n];
    dist[source] = 0;
    let mut heap = BinaryHeap::from([Reverse((0i128, source))]);
    while let Some(Reverse((d, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &e in &out[v] {
            let w = instance.edges()[e].1;
            let nd = d + weight[e];
            if nd < dist[w] {
                dist[w] = nd;
                via[w] = e;
                heap.push(Reverse((nd, w)));
            }
        }
    }
    if dist[target] == i128::MAX {
        return Err(Error::NoFeasibleL(format!("no path from {source} to {target}")));
    }
    let mut path = Vec::new();
    let mut v = target;
    while v != source {
        let e = via[v];
        path.push(e);
        v = instance.edges()[e].0;
    }
    path.reverse();
    evaluate(instance, &path)
}

/// Wraps the baseline in a report against `L*`.
pub fn solve_sp_average(instance: &Instance, config: &LpConfig) -> Result<(DiscreteSolution, RunReport)> {
    let start = Instant::now();
    let (frac, stats) = lp::minimize_l(instance, config)?;
    let solution = solve_sp_average_baseline(instance)?;
    let mut report = RunReport::new("sp-avg", frac.bound, solution.max_cost);
    report.lp = stats;
    report.selections.push(solution.edges.clone());
    finish(&mut report, &solution, start);
    Ok((solution, report))
}

/// Upper bound used to sanity-check the algorithm at desk scale:
/// `l_hat + 4 (n / l_hat) (1 + ln K / ln ln K)` times the optimum.
pub fn ratio_bound(n: usize, k: usize) -> f64 {
    let l_hat = threshold(n, k) as f64;
    l_hat + 4.0 * (n as f64 / l_hat) * log_ratio_factor(k)
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
    fn chain_cutsets() {
        let mut dag = LabeledDag::new(4, vec![(0, 1), (1, 2), (2, 3)], 0, 3);
        assert_eq!(extract_cutsets(&dag), vec![vec![0], vec![1], vec![2]]);
        dag.selected[1] = true;
        dag.relabel();
        assert_eq!(extract_cutsets(&dag), vec![vec![0], vec![2]]);
        assert_eq!(dag.shortest_path(), Some(vec![0, 1, 2]));
    }

    #[test]
    fn lexicographic_tie_break() {
        // Two parallel routes 0->1->3 (arcs 0, 2) and 0->2->3 (arcs 1, 3).
        let dag = LabeledDag::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3)], 0, 3);
        assert_eq!(dag.shortest_path(), Some(vec![0, 2]));
    }

    #[test]
    fn forced_edge() {
        let inst = Instance::new(
            "e",
            Kind::ShortestPath { source: 0, target: 1 },
            2,
            vec![(0, 1)],
            vec![vec![c(3)], vec![c(7)]],
        )
        .unwrap();
        let (sol, report) = solve_sp(&inst, &LpConfig::default()).unwrap();
        assert_eq!(sol.edges, vec![0]);
        assert_eq!(report.rounds, 0);
        assert_eq!(report.ratio, 1.0);
    }

    #[test]
    fn gap_level0_path() {
        let inst = gen::gen_gap_sp(0).unwrap();
        let (sol, report) = solve_sp(&inst, &LpConfig::default()).unwrap();
        assert_eq!(sol.max_cost, c(2));
        assert_eq!(report.l_star, c(1));
        assert_eq!(report.ratio, 2.0);
    }

    #[test]
    fn baseline_is_exact_for_one_scenario() {
        let inst = Instance::new(
            "one",
            Kind::ShortestPath { source: 0, target: 2 },
            3,
            vec![(0, 1), (1, 2), (0, 2)],
            vec![vec![c(1), c(1), c(3)]],
        )
        .unwrap();
        assert_eq!(solve_sp_average_baseline(&inst).unwrap().edges, vec![0, 1]);
    }
}
