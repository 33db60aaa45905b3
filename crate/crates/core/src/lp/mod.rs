//! The relaxation LP(L): scenario budget rows, the path or spanning-tree
//! polytope, and variables fixed to zero outside `E(L)`.
//!
//! Shortest-path models use flow conservation rows. Spanning-tree models use
//! a cardinality row plus cut constraints that are separated lazily with a
//! global minimum cut.

mod cuts;
mod flow;
pub mod simplex;

pub use cuts::{min_cut, separate_spanning_cuts, SeparationResult};
pub use flow::{remove_cycles, series_reduce, SeriesReduction};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::rational::{approx_rational, format_cost, to_f64};
use crate::model::{Cost, Instance, Kind};
use simplex::{LinearProgram, LpOutcome, PivotEvent, Relation, Row, SimplexOptions};

/// Absolute tolerance on row residuals.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// A cut is reported as violated when its mass is below `1 - SEPARATION_TOL`.
pub const SEPARATION_TOL: f64 = 1e-7;

/// Constraint family added on demand during the solve.
#[derive(Debug, Clone, PartialEq)]
pub enum LazyFamily {
    None,
    /// `sum_{e in delta(S)} x_e >= 1` for every proper nonempty node set `S`.
    SpanningCuts {
        n: usize,
        edges: Vec<(usize, usize)>,
    },
}

/// A linear program over one variable per edge, optionally followed by the
/// bound `L` as an extra variable that is minimized.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub num_edges: usize,
    /// Index of the `L` variable in minimize-L models.
    pub bound_var: Option<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lazy: LazyFamily,
}

impl LpModel {
    pub fn num_vars(&self) -> usize {
        self.lower.len()
    }

    /// Largest violation of an explicit row or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x));
        let bounds = (0..self.num_vars()).map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

/// A point of LP(L) together with the bound it certifies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionalSolution {
    pub x: Vec<f64>,
    #[serde(serialize_with = "crate::model::rational::serialize_cost")]
    pub bound: Cost,
    /// Scenarios whose cost under `x` is within tolerance of the bound.
    pub tight_scenarios: Vec<usize>,
}

impl FractionalSolution {
    fn new(instance: &Instance, x: Vec<f64>, bound: Cost) -> Self {
        let l = to_f64(&bound);
        let tight_scenarios = instance
            .float_costs()
            .iter()
            .enumerate()
            .filter(|(_, row)| scenario_cost(row, &x) >= l - 1e-7)
            .map(|(xi, _)| xi)
            .collect();
        FractionalSolution {
            x,
            bound,
            tight_scenarios,
        }
    }

    pub fn bound_f64(&self) -> f64 {
        to_f64(&self.bound)
    }

    /// Largest scenario cost of `x`.
    pub fn max_scenario_cost(&self, instance: &Instance) -> f64 {
        instance
            .float_costs()
            .iter()
            .map(|row| scenario_cost(row, &self.x))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn scenario_cost(row: &[f64], x: &[f64]) -> f64 {
    row.iter().zip(x).map(|(c, v)| c * v).sum()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LpConfig {
    /// Maximum number of generated cuts per solve; default `10 * m * n`.
    pub cut_cap: Option<usize>,
    pub max_simplex_iterations: Option<usize>,
    /// Record pivots, cuts and solves in [`LpStats::trace`].
    pub trace: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Solve {
        budget: Option<f64>,
        rows: usize,
        status: &'static str,
    },
    Pivot(PivotEvent),
    Cut {
        side: Vec<usize>,
        edges: Vec<usize>,
        violation: f64,
    },
    Bound {
        value: String,
        breakpoint: bool,
    },
}

/// Counters for one or more LP solves.
#[derive(Debug, Clone, Default, Serialize)]
pub struct LpStats {
    pub solves: usize,
    pub pivots: usize,
    pub cuts: usize,
    #[serde(skip)]
    pub trace: Vec<TraceEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<f64>),
    Infeasible,
}

/// `E(L)`: edges whose cost is at most `level` in every scenario.
pub fn edge_filter(instance: &Instance, level: &Cost) -> Vec<usize> {
    (0..instance.num_edges())
        .filter(|&e| instance.max_cost(e) <= *level)
        .collect()
}

fn allowed_mask(instance: &Instance, level: &Cost) -> Vec<bool> {
    let mut mask = vec![false; instance.num_edges()];
    for e in edge_filter(instance, level) {
        mask[e] = true;
    }
    mask
}

/// Variables, bounds and scenario rows. `budget = None` adds `L` as a variable.
fn base_model(instance: &Instance, allowed: &[bool], budget: Option<f64>, min_bound: f64) -> LpModel {
    let m = instance.num_edges();
    let mut lower = vec![0.0; m];
    let mut upper: Vec<f64> = allowed.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
    let mut objective = vec![0.0; m];
    let bound_var = budget.is_none().then_some(m);
    if budget.is_none() {
        lower.push(min_bound);
        upper.push(f64::INFINITY);
        objective.push(1.0);
    }
    let mut rows = Vec::new();
    for row in instance.float_costs() {
        let mut coeffs: Vec<(usize, f64)> = (0..m)
            .filter(|&e| allowed[e] && row[e] != 0.0)
            .map(|e| (e, row[e]))
            .collect();
        match budget {
            Some(l) => {
                if !coeffs.is_empty() {
                    rows.push(Row::new(coeffs, Relation::Le, l));
                }
            }
            None => {
                coeffs.push((m, -1.0));
                rows.push(Row::new(coeffs, Relation::Le, 0.0));
            }
        }
    }
    LpModel {
        num_edges: m,
        bound_var,
        lower,
        upper,
        objective,
        rows,
        lazy: LazyFamily::None,
    }
}

fn add_structure(instance: &Instance, model: &mut LpModel) {
    let m = instance.num_edges();
    let n = instance.num_nodes();
    match instance.kind() {
        Kind::ShortestPath { source, target } => {
            let mut balance: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
            for (e, &(a, b)) in instance.edges().iter().enumerate() {
                // Arcs into the source or out of the target only carry circulations.
                if b == source || a == target {
                    model.upper[e] = 0.0;
                }
                if model.upper[e] == 0.0 {
                    continue;
                }
                balance[a].push((e, 1.0));
                balance[b].push((e, -1.0));
            }
            for (v, coeffs) in balance.into_iter().enumerate() {
                if v == source || v == target {
                    continue;
                }
                if !coeffs.is_empty() {
                    model.rows.push(Row::new(coeffs, Relation::Eq, 0.0));
                }
            }
            let out_s: Vec<(usize, f64)> = (0..m)
                .filter(|&e| instance.edges()[e].0 == source && model.upper[e] > 0.0)
                .map(|e| (e, 1.0))
                .collect();
            let in_t: Vec<(usize, f64)> = (0..m)
                .filter(|&e| instance.edges()[e].1 == target && model.upper[e] > 0.0)
                .map(|e| (e, 1.0))
                .collect();
            model.rows.push(Row::new(out_s, Relation::Eq, 1.0));
            model.rows.push(Row::new(in_t, Relation::Eq, 1.0));
        }
        Kind::SpanningTree => {
            let all: Vec<(usize, f64)> = (0..m)
                .filter(|&e| model.upper[e] > 0.0)
                .map(|e| (e, 1.0))
                .collect();
            model.rows.push(Row::new(all, Relation::Eq, (n - 1) as f64));
            model.lazy = LazyFamily::SpanningCuts {
                n,
                edges: instance.edges().to_vec(),
            };
        }
    }
}

/// LP(L) for a shortest-path instance.
pub fn build_sp_model(instance: &Instance, level: &Cost) -> Result<LpModel> {
    if !instance.is_shortest_path() {
        return Err(Error::InvalidInput(
            "shortest-path model needs an sp instance".into(),
        ));
    }
    Ok(build_model(instance, level))
}

/// LP(L) for a spanning-tree instance; cut rows are added lazily.
pub fn build_mst_model(instance: &Instance, level: &Cost) -> Result<LpModel> {
    if instance.is_shortest_path() {
        return Err(Error::InvalidInput(
            "spanning-tree model needs an mst instance".into(),
        ));
    }
    Ok(build_model(instance, level))
}

/// LP(L) for either kind.
pub fn build_model(instance: &Instance, level: &Cost) -> LpModel {
    let mut model = base_model(instance, &allowed_mask(instance, level), Some(to_f64(level)), 0.0);
    add_structure(instance, &mut model);
    model
}

/// "Minimize L" over LP with edges restricted to `E(filter)` and `L >= min_bound`.
fn build_min_bound_model(instance: &Instance, filter: &Cost, min_bound: f64) -> LpModel {
    let mut model = base_model(instance, &allowed_mask(instance, filter), None, min_bound);
    add_structure(instance, &mut model);
    model
}

/// Solves `model`, separating lazy rows until none is violated.
fn solve_model(model: &LpModel, config: &LpConfig, stats: &mut LpStats) -> Result<LpOutcome> {
    let opts = SimplexOptions {
        feasibility_tol: FEASIBILITY_TOL,
        max_iterations: config.max_simplex_iterations,
    };
    let mut rows = model.rows.clone();
    let cap = config
        .cut_cap
        .unwrap_or_else(|| 10 * model.num_edges.max(1) * model.lazy_nodes().max(1));
    let mut generated = 0usize;
    loop {
        let lp = LinearProgram {
            lower: &model.lower,
            upper: &model.upper,
            objective: &model.objective,
            rows: &rows,
        };
        let mut pivots = Vec::new();
        let outcome = simplex::solve(&lp, &opts, config.trace.then_some(&mut pivots), &mut stats.pivots)?;
        stats.solves += 1;
        if config.trace {
            stats.trace.extend(pivots.into_iter().map(TraceEvent::Pivot));
            stats.trace.push(TraceEvent::Solve {
                budget: if model.bound_var.is_some() {
                    None
                } else {
                    model.rows.first().map(|r| r.rhs)
                },
                rows: rows.len(),
                status: match outcome {
                    LpOutcome::Optimal { .. } => "optimal",
                    LpOutcome::Infeasible => "infeasible",
                },
            });
        }
        let LpOutcome::Optimal { x, objective } = outcome else {
            return Ok(LpOutcome::Infeasible);
        };
        let LazyFamily::SpanningCuts { n, edges } = &model.lazy else {
            return Ok(LpOutcome::Optimal { x, objective });
        };
        match cuts::separate(*n, edges, &x[..model.num_edges]) {
            SeparationResult::AllSatisfied { .. } => return Ok(LpOutcome::Optimal { x, objective }),
            SeparationResult::Violated {
                side,
                edges: cut,
                violation,
            } => {
                generated += 1;
                stats.cuts += 1;
                if generated > cap {
                    return Err(Error::CutCap { cap });
                }
                log::debug!("cut {generated}: |S| = {}, violation {violation:.3e}", side.len());
                rows.push(Row::new(
                    cut.iter().map(|&e| (e, 1.0)).collect(),
                    Relation::Ge,
                    1.0,
                ));
                if config.trace {
                    stats.trace.push(TraceEvent::Cut {
                        side,
                        edges: cut,
                        violation,
                    });
                }
            }
        }
    }
}

impl LpModel {
    fn lazy_nodes(&self) -> usize {
        match &self.lazy {
            LazyFamily::None => 1,
            LazyFamily::SpanningCuts { n, .. } => *n,
        }
    }
}

/// Feasibility of `model` (including its lazy family).
pub fn solve_feasibility(model: &LpModel, config: &LpConfig, stats: &mut LpStats) -> Result<Feasibility> {
    match solve_model(model, config, stats)? {
        LpOutcome::Optimal { x, .. } => Ok(Feasibility::Feasible(x)),
        LpOutcome::Infeasible => Ok(Feasibility::Infeasible),
    }
}

/// Computes `L*`, the smallest `L` for which LP(L) is feasible, with an
/// optimal point.
///
/// `E(L)` only changes at the distinct values `b_1 < ... < b_q` of
/// `max_xi c_e`. A binary search finds the first feasible breakpoint `b_j`
/// (with `b_{q+1} = infinity`); then `L*` lies in `(b_{j-1}, b_j]`, and
/// minimizing `L` with edges restricted to `E(b_{j-1})` decides whether it is
/// interior or equal to `b_j`. Below `b_1` no edge is allowed, so `j = 1`
/// gives `L* = b_1`.
pub fn minimize_l(instance: &Instance, config: &LpConfig) -> Result<(FractionalSolution, LpStats)> {
    let mut stats = LpStats::default();
    let m = instance.num_edges();
    if m == 0 {
        // Single-node spanning tree.
        return Ok((
            FractionalSolution::new(instance, Vec::new(), Cost::from_integer(0)),
            stats,
        ));
    }
    let mut breakpoints: Vec<Cost> = (0..m).map(|e| instance.max_cost(e)).collect();
    breakpoints.sort();
    breakpoints.dedup();

    let feasible_at = |j: usize, stats: &mut LpStats| -> Result<bool> {
        let model = build_model(instance, &breakpoints[j]);
        Ok(matches!(
            solve_feasibility(&model, config, stats)?,
            Feasibility::Feasible(_)
        ))
    };
    // Smallest feasible breakpoint, or `q` if LP(b_q) is still infeasible
    // (then L* lies above every breakpoint).
    let q = breakpoints.len();
    let (mut lo, mut hi) = (0usize, q);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible_at(mid, &mut stats)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let j = lo;

    if j > 0 {
        let prev = breakpoints[j - 1];
        let model = build_min_bound_model(instance, &prev, to_f64(&prev));
        if let LpOutcome::Optimal { x, objective } = solve_model(&model, config, &mut stats)? {
            if j == q || objective < to_f64(&breakpoints[j]) - 1e-9 {
                let mut l_star = approx_rational(objective, 1_000_000);
                if l_star < prev {
                    l_star = prev;
                }
                log::debug!("L* = {} (interior, {objective})", format_cost(&l_star));
                if config.trace {
                    stats.trace.push(TraceEvent::Bound {
                        value: format_cost(&l_star),
                        breakpoint: false,
                    });
                }
                let x = clean(x, m);
                return Ok((FractionalSolution::new(instance, x, l_star), stats));
            }
        }
    }
    if j == q {
        return Err(Error::NoFeasibleL(match instance.kind() {
            Kind::ShortestPath { source, target } => format!("no path from {source} to {target}"),
            Kind::SpanningTree => "relaxation infeasible with every edge allowed".into(),
        }));
    }
    let b_j = breakpoints[j];

    let model = build_min_bound_model(instance, &b_j, 0.0);
    let x = match solve_model(&model, config, &mut stats)? {
        LpOutcome::Optimal { x, .. } => x,
        LpOutcome::Infeasible => {
            return Err(Error::Invariant(format!(
                "LP({}) feasible but its minimize-L form is not",
                format_cost(&b_j)
            )))
        }
    };
    log::debug!("L* = {} (breakpoint {j})", format_cost(&b_j));
    if config.trace {
        stats.trace.push(TraceEvent::Bound {
            value: format_cost(&b_j),
            breakpoint: true,
        });
    }
    Ok((FractionalSolution::new(instance, clean(x, m), b_j), stats))
}

/// Drops the `L` column and snaps values within tolerance of 0 or 1.
fn clean(mut x: Vec<f64>, m: usize) -> Vec<f64> {
    x.truncate(m);
    for v in &mut x {
        if v.abs() < 1e-12 {
            *v = 0.0;
        } else if (*v - 1.0).abs() < 1e-12 {
            *v = 1.0;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    fn c(v: i64) -> Cost {
        Cost::from_integer(v)
    }

    #[test]
    fn filter_extremes() {
        let inst = gen::gen_gap_mst(2).unwrap();
        assert_eq!(edge_filter(&inst, &c(1)).len(), 8);
        assert_eq!(edge_filter(&inst, &c(0)).len(), 4);
        let sp = Instance::new(
            "x",
            Kind::ShortestPath { source: 0, target: 1 },
            2,
            vec![(0, 1)],
            vec![vec![c(3)], vec![c(7)]],
        )
        .unwrap();
        assert!(edge_filter(&sp, &c(0)).is_empty());
        assert_eq!(edge_filter(&sp, &c(7)), vec![0]);
    }

    #[test]
    fn forced_edge_bound() {
        let sp = Instance::new(
            "x",
            Kind::ShortestPath { source: 0, target: 1 },
            2,
            vec![(0, 1)],
            vec![vec![c(3)], vec![c(7)]],
        )
        .unwrap();
        let (sol, _) = minimize_l(&sp, &LpConfig::default()).unwrap();
        assert_eq!(sol.bound, c(7));
        assert_eq!(sol.x, vec![1.0]);
        assert_eq!(sol.tight_scenarios, vec![1]);
    }

    #[test]
    fn bound_never_drops_below_first_breakpoint() {
        // Half of each parallel arc would cost 1/2, but E(1/2) is empty.
        let sp = Instance::new(
            "par",
            Kind::ShortestPath { source: 0, target: 1 },
            2,
            vec![(0, 1), (0, 1)],
            vec![vec![c(1), c(0)], vec![c(0), c(1)]],
        )
        .unwrap();
        let (sol, _) = minimize_l(&sp, &LpConfig::default()).unwrap();
        assert_eq!(sol.bound, c(1));
    }

    #[test]
    fn bound_above_every_breakpoint() {
        // Two 3-arc routes, each charged 1 per arc by its own scenario: x = 1/2, L* = 3/2.
        let sp = Instance::new(
            "routes",
            Kind::ShortestPath { source: 0, target: 5 },
            6,
            vec![(0, 1), (1, 2), (2, 5), (0, 3), (3, 4), (4, 5)],
            vec![
                vec![c(1), c(1), c(1), c(0), c(0), c(0)],
                vec![c(0), c(0), c(0), c(1), c(1), c(1)],
            ],
        )
        .unwrap();
        let (sol, _) = minimize_l(&sp, &LpConfig::default()).unwrap();
        assert_eq!(sol.bound, Cost::new(3, 2));
        assert!(sol.x.iter().all(|&v| (v - 0.5).abs() < 1e-9));
        assert_eq!(sol.tight_scenarios, vec![0, 1]);
    }

    #[test]
    fn unreachable_target() {
        let sp = Instance::new(
            "x",
            Kind::ShortestPath { source: 0, target: 2 },
            3,
            vec![(0, 1), (2, 1)],
            vec![vec![c(1), c(1)]],
        )
        .unwrap();
        assert!(matches!(
            minimize_l(&sp, &LpConfig::default()),
            Err(Error::NoFeasibleL(_))
        ));
    }

    #[test]
    fn circulation_through_terminals_is_excluded() {
        // Without fixing arcs into s / out of t, the cycle s->a->s plus t->b->t
        // would satisfy both terminal rows at cost 0.
        let sp = Instance::new(
            "circ",
            Kind::ShortestPath { source: 0, target: 1 },
            4,
            vec![(0, 2), (2, 0), (1, 3), (3, 1), (0, 1)],
            vec![vec![c(0), c(0), c(0), c(0), c(5)]],
        )
        .unwrap();
        let (sol, _) = minimize_l(&sp, &LpConfig::default()).unwrap();
        assert_eq!(sol.bound, c(5));
    }

    #[test]
    fn triangle_zero_cost_tree() {
        let tri = Instance::new(
            "tri",
            Kind::SpanningTree,
            3,
            vec![(0, 1), (1, 2), (0, 2)],
            vec![vec![c(0); 3]],
        )
        .unwrap();
        let model = build_mst_model(&tri, &c(0)).unwrap();
        let third = vec![2.0 / 3.0; 3];
        assert!(model.max_violation(&third) < 1e-12);
        let mut stats = LpStats::default();
        match solve_feasibility(&model, &LpConfig::default(), &mut stats).unwrap() {
            Feasibility::Feasible(x) => assert!((x.iter().sum::<f64>() - 2.0).abs() < 1e-9),
            Feasibility::Infeasible => panic!("triangle infeasible"),
        }
    }

    #[test]
    fn empty_model_is_feasible() {
        let model = LpModel {
            num_edges: 2,
            bound_var: None,
            lower: vec![0.0, 0.25],
            upper: vec![1.0, 1.0],
            objective: vec![0.0, 0.0],
            rows: Vec::new(),
            lazy: LazyFamily::None,
        };
        let mut stats = LpStats::default();
        assert_eq!(
            solve_feasibility(&model, &LpConfig::default(), &mut stats).unwrap(),
            Feasibility::Feasible(vec![0.0, 0.25])
        );
    }

    #[test]
    fn cut_cap_is_reported() {
        let inst = gen::gen_gap_mst(3).unwrap();
        let model = build_mst_model(&inst, &c(1)).unwrap();
        let cfg = LpConfig {
            cut_cap: Some(0),
            ..LpConfig::default()
        };
        let mut stats = LpStats::default();
        // The cardinality row alone admits disconnected points, so a cut is needed.
        let res = solve_feasibility(&model, &cfg, &mut stats);
        assert!(matches!(res, Err(Error::CutCap { cap: 0 })) || stats.cuts == 0);
    }
}
