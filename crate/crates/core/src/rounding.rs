//! Rounding for the two selection problems used as subroutines:
//! pick exactly `p` elements (SI), or exactly one element per group (RS).
//!
//! The deterministic variants walk the decisions in order and pick, at each
//! step, the option minimizing the pessimistic estimator
//! `Phi = sum_xi prod_i m_i(xi)`, where `m_i(xi)` is the expected value of
//! `exp(t * c^xi / L)` for decision `i` under the fractional distribution and
//! `t = ln(1 + ln K / ln ln K)`. Everything is kept in the log domain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Mass below this counts as zero probability.
const TINY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// Choose exactly `p` elements.
    Si(usize),
    /// Choose exactly one element per group.
    Rs,
}

/// A fractional selection: `x[e]` for every element, grouped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupedFractional {
    pub groups: Vec<Vec<usize>>,
    pub x: Vec<f64>,
    pub mode: Mode,
    /// The bound `L` the fractional solution certifies.
    pub bound: f64,
}

impl GroupedFractional {
    pub fn rs(groups: Vec<Vec<usize>>, x: Vec<f64>, bound: f64) -> Self {
        GroupedFractional {
            groups,
            x,
            mode: Mode::Rs,
            bound,
        }
    }

    /// A single group containing every element.
    pub fn si(p: usize, x: Vec<f64>, bound: f64) -> Self {
        GroupedFractional {
            groups: vec![(0..x.len()).collect()],
            x,
            mode: Mode::Si(p),
            bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionOutcome {
    /// Sorted element ids.
    pub chosen: Vec<usize>,
    pub per_scenario_cost: Vec<f64>,
    pub max_cost: f64,
    /// `ln Phi` before the first decision and after each one.
    pub potential: Vec<f64>,
}

/// Estimator exponent `t` for `k` scenarios (clamped to at least 3).
pub fn exponent(k: usize) -> f64 {
    let k = k.max(3) as f64;
    (1.0 + k.ln() / k.ln().ln()).ln()
}

/// `1 + ln K / ln ln K` with `K` clamped to at least 3.
pub fn log_ratio_factor(k: usize) -> f64 {
    let k = k.max(3) as f64;
    1.0 + k.ln() / k.ln().ln()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|&a| (a - max).exp()).sum::<f64>().ln()
}

fn validate(gf: &GroupedFractional, costs: &[Vec<f64>]) -> Result<()> {
    let n = gf.x.len();
    if costs.is_empty() {
        return Err(Error::InvalidInput("at least one scenario required".into()));
    }
    if let Some(row) = costs.iter().find(|r| r.len() < n) {
        return Err(Error::InvalidInput(format!(
            "cost row has {} entries, need {n}",
            row.len()
        )));
    }
    if let Some(e) = (0..n).find(|&e| !(gf.x[e] >= -1e-9 && gf.x[e] <= 1.0 + 1e-9)) {
        return Err(Error::InvalidInput(format!(
            "x[{e}] = {} outside [0, 1]",
            gf.x[e]
        )));
    }
    let mut seen = vec![false; n];
    for (i, group) in gf.groups.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::InvalidInput(format!("group {i} is empty")));
        }
        for &e in group {
            if e >= n {
                return Err(Error::InvalidInput(format!(
                    "group {i} references element {e} of {n}"
                )));
            }
            if seen[e] {
                return Err(Error::InvalidInput(format!("element {e} appears in two groups")));
            }
            seen[e] = true;
        }
        if gf.mode == Mode::Rs {
            let mass: f64 = group.iter().map(|&e| gf.x[e]).sum();
            if (mass - 1.0).abs() > 1e-9 * group.len() as f64 {
                return Err(Error::InvalidInput(format!(
                    "group {i} has mass {mass}, expected 1"
                )));
            }
        }
    }
    if let Mode::Si(p) = gf.mode {
        if gf.groups.len() != 1 {
            return Err(Error::InvalidInput("SI rounding takes a single group".into()));
        }
        if p > gf.groups[0].len() {
            return Err(Error::Range(format!(
                "p = {p} exceeds the {} elements",
                gf.groups[0].len()
            )));
        }
        let mass: f64 = gf.groups[0].iter().map(|&e| gf.x[e]).sum();
        if (mass - p as f64).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "fractional mass {mass} differs from p = {p}"
            )));
        }
    }
    Ok(())
}

fn outcome(mut chosen: Vec<usize>, costs: &[Vec<f64>], potential: Vec<f64>) -> SelectionOutcome {
    chosen.sort_unstable();
    let per_scenario_cost: Vec<f64> = costs
        .iter()
        .map(|row| chosen.iter().map(|&e| row[e]).sum())
        .collect();
    let max_cost = per_scenario_cost.iter().copied().fold(0.0, f64::max);
    SelectionOutcome {
        chosen,
        per_scenario_cost,
        max_cost,
        potential,
    }
}

fn worst(costs: &[Vec<f64>], e: usize) -> f64 {
    costs.iter().map(|row| row[e]).fold(0.0, f64::max)
}

/// Orders candidates by worst cost, then larger `x`, then id.
fn cheapest_first(costs: &[Vec<f64>], x: &[f64], items: &mut [usize]) {
    items.sort_by(|&a, &b| {
        worst(costs, a)
            .total_cmp(&worst(costs, b))
            .then((x[b] > TINY).cmp(&(x[a] > TINY)))
            .then(x[b].total_cmp(&x[a]))
            .then(a.cmp(&b))
    });
}

/// `true` if `(val, x, id)` should replace the incumbent: lower value, then
/// larger probability, then lower id.
fn better(val: f64, x: f64, id: usize, best: Option<(f64, f64, usize)>) -> bool {
    match best {
        None => true,
        Some((bv, bx, bid)) => {
            let eps = 1e-12 * (1.0 + bv.abs());
            if val < bv - eps {
                true
            } else if val > bv + eps {
                false
            } else if x != bx {
                x > bx
            } else {
                id < bid
            }
        }
    }
}

fn check_step(before: f64, after: f64) -> Result<()> {
    if after > before + 1e-9 * (1.0 + before.abs()) {
        return Err(Error::Invariant(format!(
            "estimator increased from {before} to {after}"
        )));
    }
    Ok(())
}

/// Deterministic one-per-group rounding by conditional expectations.
pub fn round_rs_deterministic(gf: &GroupedFractional, costs: &[Vec<f64>]) -> Result<SelectionOutcome> {
    if gf.mode != Mode::Rs {
        return Err(Error::InvalidInput("expected an RS instance".into()));
    }
    validate(gf, costs)?;
    if gf.bound <= TINY {
        let chosen = gf
            .groups
            .iter()
            .map(|g| {
                let mut g = g.clone();
                cheapest_first(costs, &gf.x, &mut g);
                g[0]
            })
            .collect();
        return Ok(outcome(chosen, costs, Vec::new()));
    }

    let t = exponent(costs.len());
    let scale = t / gf.bound;
    let k = costs.len();
    // log m_i(xi) per group and the running log-products.
    let mut log_m = vec![vec![0.0; k]; gf.groups.len()];
    let mut sum = vec![0.0; k];
    for (i, group) in gf.groups.iter().enumerate() {
        for xi in 0..k {
            let terms: Vec<f64> = group
                .iter()
                .filter(|&&e| gf.x[e] > TINY)
                .map(|&e| gf.x[e].ln() + scale * costs[xi][e])
                .collect();
            log_m[i][xi] = log_sum_exp(&terms);
            sum[xi] += log_m[i][xi];
        }
    }
    let mut phi = log_sum_exp(&sum);
    let mut potential = vec![phi];
    let mut chosen = Vec::with_capacity(gf.groups.len());
    let mut trial = vec![0.0; k];
    for (i, group) in gf.groups.iter().enumerate() {
        let mut best: Option<(f64, f64, usize)> = None;
        for &e in group.iter().filter(|&&e| gf.x[e] > TINY) {
            for xi in 0..k {
                trial[xi] = sum[xi] - log_m[i][xi] + scale * costs[xi][e];
            }
            let val = log_sum_exp(&trial);
            if better(val, gf.x[e], e, best) {
                best = Some((val, gf.x[e], e));
            }
        }
        let (val, _, e) = best.expect("validated groups carry positive mass");
        check_step(phi, val)?;
        for xi in 0..k {
            sum[xi] += scale * costs[xi][e] - log_m[i][xi];
        }
        phi = val;
        potential.push(phi);
        chosen.push(e);
    }
    Ok(outcome(chosen, costs, potential))
}

/// Deterministic `p`-element rounding: per-element conditional expectations
/// for independent inclusion with probability `x_e`, then a greedy repair of
/// the cardinality guided by the same estimator.
pub fn round_si_deterministic(gf: &GroupedFractional, costs: &[Vec<f64>]) -> Result<SelectionOutcome> {
    let Mode::Si(p) = gf.mode else {
        return Err(Error::InvalidInput("expected an SI instance".into()));
    };
    validate(gf, costs)?;
    let elements = &gf.groups[0];
    let x = &gf.x;
    if gf.bound <= TINY {
        let mut order = elements.clone();
        cheapest_first(costs, x, &mut order);
        order.truncate(p);
        return Ok(outcome(order, costs, Vec::new()));
    }

    let t = exponent(costs.len());
    let scale = t / gf.bound;
    let k = costs.len();
    // log(1 - x + x e^{a}) for an undecided element.
    let log_m = |e: usize, xi: usize| -> f64 {
        let a = scale * costs[xi][e];
        let p = x[e].clamp(0.0, 1.0);
        if p <= TINY {
            0.0
        } else {
            log_sum_exp(&[(1.0 - p).max(0.0).ln(), p.ln() + a])
        }
    };
    let mut sum = vec![0.0; k];
    for &e in elements {
        for (xi, s) in sum.iter_mut().enumerate() {
            *s += log_m(e, xi);
        }
    }
    let mut phi = log_sum_exp(&sum);
    let mut potential = vec![phi];
    let mut inside = vec![false; x.len()];
    let mut with_in = vec![0.0; k];
    let mut with_out = vec![0.0; k];
    for &e in elements {
        for xi in 0..k {
            let base = sum[xi] - log_m(e, xi);
            with_in[xi] = base + scale * costs[xi][e];
            with_out[xi] = base;
        }
        let (v_in, v_out) = (log_sum_exp(&with_in), log_sum_exp(&with_out));
        let take = if x[e] <= TINY {
            false
        } else if x[e] >= 1.0 - TINY {
            true
        } else if (v_in - v_out).abs() <= 1e-12 * (1.0 + v_out.abs()) {
            x[e] >= 0.5
        } else {
            v_in < v_out
        };
        let val = if take { v_in } else { v_out };
        check_step(phi, val)?;
        sum.copy_from_slice(if take { &with_in } else { &with_out });
        inside[e] = take;
        phi = val;
        potential.push(phi);
    }

    let mut chosen: Vec<usize> = elements.iter().copied().filter(|&e| inside[e]).collect();
    let mut trial = vec![0.0; k];
    while chosen.len() > p {
        let mut best: Option<(f64, f64, usize)> = None;
        for &e in &chosen {
            for xi in 0..k {
                trial[xi] = sum[xi] - scale * costs[xi][e];
            }
            // Prefer dropping the least likely element on ties.
            if better(log_sum_exp(&trial), -x[e], e, best) {
                best = Some((log_sum_exp(&trial), -x[e], e));
            }
        }
        let (_, _, e) = best.expect("chosen is nonempty");
        for xi in 0..k {
            sum[xi] -= scale * costs[xi][e];
        }
        inside[e] = false;
        chosen.retain(|&c| c != e);
    }
    while chosen.len() < p {
        let any_positive = elements.iter().any(|&e| !inside[e] && x[e] > TINY);
        let mut best: Option<(f64, f64, usize)> = None;
        for &e in elements
            .iter()
            .filter(|&&e| !inside[e] && (x[e] > TINY || !any_positive))
        {
            for xi in 0..k {
                trial[xi] = sum[xi] + scale * costs[xi][e];
            }
            if better(log_sum_exp(&trial), x[e], e, best) {
                best = Some((log_sum_exp(&trial), x[e], e));
            }
        }
        let (_, _, e) = best.expect("p does not exceed the element count");
        for xi in 0..k {
            sum[xi] += scale * costs[xi][e];
        }
        inside[e] = true;
        chosen.push(e);
    }
    Ok(outcome(chosen, costs, potential))
}

/// Independent sampling of one element per group with probabilities `x`.
pub fn round_rs_randomized(
    gf: &GroupedFractional,
    costs: &[Vec<f64>],
    seed: u64,
) -> Result<SelectionOutcome> {
    if gf.mode != Mode::Rs {
        return Err(Error::InvalidInput("expected an RS instance".into()));
    }
    validate(gf, costs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = gf
        .groups
        .iter()
        .map(|group| {
            let total: f64 = group.iter().map(|&e| gf.x[e].max(0.0)).sum();
            let mut u = rng.gen::<f64>() * total;
            let mut pick = None;
            for &e in group.iter().filter(|&&e| gf.x[e] > 0.0) {
                pick = Some(e);
                if u < gf.x[e] {
                    break;
                }
                u -= gf.x[e];
            }
            pick.expect("validated groups carry positive mass")
        })
        .collect();
    Ok(outcome(chosen, costs, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_groups_are_forced() {
        let gf = GroupedFractional::rs(vec![vec![0], vec![1], vec![2]], vec![1.0; 3], 3.0);
        let costs = vec![vec![1.0, 1.0, 1.0], vec![0.5, 2.0, 0.0]];
        let out = round_rs_deterministic(&gf, &costs).unwrap();
        assert_eq!(out.chosen, vec![0, 1, 2]);
        assert_eq!(out.max_cost, 3.0);
        assert_eq!(round_rs_randomized(&gf, &costs, 9).unwrap().chosen, vec![0, 1, 2]);
    }

    #[test]
    fn picks_zero_cost_elements() {
        let gf = GroupedFractional::rs(vec![vec![0, 1], vec![2, 3]], vec![1.0, 0.0, 1.0, 0.0], 1.0);
        let costs = vec![vec![0.0, 1.0, 0.0, 1.0]];
        let out = round_rs_deterministic(&gf, &costs).unwrap();
        assert_eq!(out.chosen, vec![0, 2]);
        assert_eq!(out.max_cost, 0.0);
    }

    #[test]
    fn spreads_load_across_scenarios() {
        // Two groups, each may load scenario 0 or 1; the estimator balances them.
        let gf = GroupedFractional::rs(vec![vec![0, 1], vec![2, 3]], vec![0.5; 4], 1.0);
        let costs = vec![vec![1.0, 0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0, 1.0]];
        let out = round_rs_deterministic(&gf, &costs).unwrap();
        assert_eq!(out.max_cost, 1.0);
        for w in out.potential.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn zero_bound_fallback() {
        let gf = GroupedFractional::rs(vec![vec![0, 1]], vec![0.5, 0.5], 0.0);
        let costs = vec![vec![0.0, 0.0]];
        assert_eq!(round_rs_deterministic(&gf, &costs).unwrap().chosen, vec![0]);
    }

    #[test]
    fn si_fixed_points() {
        let gf = GroupedFractional::si(2, vec![1.0, 0.0, 1.0, 0.0], 2.0);
        let costs = vec![vec![1.0, 0.0, 1.0, 0.0]];
        assert_eq!(round_si_deterministic(&gf, &costs).unwrap().chosen, vec![0, 2]);
        let all = GroupedFractional::si(3, vec![1.0; 3], 1.0);
        assert_eq!(
            round_si_deterministic(&all, &[vec![0.2, 0.3, 0.5]])
                .unwrap()
                .chosen,
            vec![0, 1, 2]
        );
    }

    #[test]
    fn si_cardinality_is_exact() {
        let gf = GroupedFractional::si(2, vec![0.5; 4], 1.0);
        let costs = vec![vec![1.0, 0.0, 0.5, 0.25], vec![0.0, 1.0, 0.5, 0.25]];
        let out = round_si_deterministic(&gf, &costs).unwrap();
        assert_eq!(out.chosen.len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        let empty = GroupedFractional::rs(vec![vec![]], vec![], 1.0);
        assert!(round_rs_deterministic(&empty, &[vec![]]).is_err());
        let too_many = GroupedFractional::si(3, vec![1.0, 1.0], 1.0);
        assert!(matches!(
            round_si_deterministic(&too_many, &[vec![0.0, 0.0]]),
            Err(Error::Range(_))
        ));
        let light = GroupedFractional::rs(vec![vec![0, 1]], vec![0.3, 0.3], 1.0);
        assert!(round_rs_deterministic(&light, &[vec![0.0, 0.0]]).is_err());
    }
}
