//! Bounded-variable primal simplex on a dense tableau.
//!
//! Two phases: phase 1 minimizes the sum of artificial variables, phase 2 the
//! caller's objective with artificials fixed at zero. Pricing is Dantzig's rule
//! (lowest index on ties); after a run of degenerate pivots it switches to
//! Bland's rule until the objective moves again. At the end the basic values
//! are recomputed from the original columns to shed accumulated drift.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// One explicit constraint `sum coeffs (relation) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Row {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 if satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.relation {
            Relation::Le => (act - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - act).max(0.0),
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Phase-1 infeasibility above this is reported as infeasible.
    pub feasibility_tol: f64,
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feasibility_tol: 1e-9,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
}

/// One pivot or bound flip, for optional JSON-lines tracing.
#[derive(Debug, Clone, Serialize)]
pub struct PivotEvent {
    pub phase: u8,
    pub entering: usize,
    pub leaving: Option<usize>,
    pub step: f64,
    pub bland: bool,
}

const PRICE_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;

/// A linear program over `lower <= x <= upper` (bounds may be infinite).
#[derive(Debug, Clone, Copy)]
pub struct LinearProgram<'a> {
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub objective: &'a [f64],
    pub rows: &'a [Row],
}

struct Tableau {
    nrows: usize,
    ncols: usize,
    nvars: usize,
    first_artificial: usize,
    t: Vec<f64>,
    orig: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    beta: Vec<f64>,
    value: Vec<f64>,
    is_basic: Vec<bool>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram<'_>) -> Self {
        let nvars = lp.lower.len();
        let nrows = lp.rows.len();
        let nslack = lp.rows.iter().filter(|r| r.relation != Relation::Eq).count();

        let mut value: Vec<f64> = (0..nvars)
            .map(|j| {
                if lp.lower[j].is_finite() {
                    lp.lower[j]
                } else if lp.upper[j].is_finite() {
                    lp.upper[j]
                } else {
                    0.0
                }
            })
            .collect();

        // Decide per row whether the slack can start basic or an artificial is needed.
        let mut residual = Vec::with_capacity(nrows);
        let mut needs_art = Vec::with_capacity(nrows);
        for row in lp.rows {
            let r = row.rhs - row.activity(&value);
            let ok = match row.relation {
                Relation::Le => r >= 0.0,
                Relation::Ge => r <= 0.0,
                Relation::Eq => false,
            };
            residual.push(r);
            needs_art.push(!ok);
        }
        let nart = needs_art.iter().filter(|&&b| b).count();
        let ncols = nvars + nslack + nart;
        let first_artificial = nvars + nslack;

        let mut orig = vec![0.0; nrows * ncols];
        let mut basis = vec![0; nrows];
        let mut lo = lp.lower.to_vec();
        let mut hi = lp.upper.to_vec();
        lo.resize(ncols, 0.0);
        hi.resize(nvars, 0.0);
        hi.extend(std::iter::repeat_n(f64::INFINITY, nslack + nart));
        value.resize(ncols, 0.0);

        let mut sign = vec![1.0; nrows];
        let mut beta = vec![0.0; nrows];
        let (mut slack, mut art) = (nvars, first_artificial);
        for (i, row) in lp.rows.iter().enumerate() {
            let base = i * ncols;
            for &(j, a) in &row.coeffs {
                orig[base + j] += a;
            }
            let slack_col = match row.relation {
                Relation::Eq => None,
                Relation::Le => {
                    orig[base + slack] = 1.0;
                    slack += 1;
                    Some(slack - 1)
                }
                Relation::Ge => {
                    orig[base + slack] = -1.0;
                    slack += 1;
                    Some(slack - 1)
                }
            };
            let r = residual[i];
            if needs_art[i] {
                let s = if r >= 0.0 { 1.0 } else { -1.0 };
                orig[base + art] = s;
                sign[i] = s;
                basis[i] = art;
                beta[i] = r.abs();
                art += 1;
            } else {
                let col = slack_col.expect("inequality row has a slack");
                sign[i] = orig[base + col];
                basis[i] = col;
                beta[i] = r * sign[i];
            }
        }

        let mut t = orig.clone();
        for i in 0..nrows {
            if sign[i] < 0.0 {
                for v in &mut t[i * ncols..(i + 1) * ncols] {
                    *v = -*v;
                }
            }
        }
        let mut is_basic = vec![false; ncols];
        for &b in &basis {
            is_basic[b] = true;
        }
        Tableau {
            nrows,
            ncols,
            nvars,
            first_artificial,
            t,
            orig,
            rhs: lp.rows.iter().map(|r| r.rhs).collect(),
            basis,
            beta,
            value,
            is_basic,
            lo,
            hi,
            pivots: 0,
        }
    }

    fn run(
        &mut self,
        cost: &[f64],
        phase: u8,
        max_iter: usize,
        trace: &mut Option<&mut Vec<PivotEvent>>,
    ) -> Result<()> {
        let (nrows, ncols) = (self.nrows, self.ncols);
        let bland_after = 2 * (self.nvars + nrows) + 10;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let mut reduced = vec![0.0; ncols];
        loop {
            if self.pivots >= max_iter {
                return Err(Error::IterationLimit(max_iter));
            }
            reduced.copy_from_slice(cost);
            for i in 0..nrows {
                let cb = cost[self.basis[i]];
                if cb != 0.0 {
                    let row = &self.t[i * ncols..(i + 1) * ncols];
                    for (d, &a) in reduced.iter_mut().zip(row) {
                        *d -= cb * a;
                    }
                }
            }

            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..ncols {
                if self.is_basic[j] {
                    continue;
                }
                let d = reduced[j];
                let dir = if d < -PRICE_TOL && self.value[j] < self.hi[j] {
                    1.0
                } else if d > PRICE_TOL && self.value[j] > self.lo[j] {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((j, dir)) = entering else {
                return Ok(());
            };

            // Ratio test.
            let self_limit = if dir > 0.0 {
                self.hi[j] - self.value[j]
            } else {
                self.value[j] - self.lo[j]
            };
            let mut leave: Option<usize> = None;
            let mut theta = f64::INFINITY;
            let mut leave_alpha = 0.0;
            for i in 0..nrows {
                let alpha = self.t[i * ncols + j];
                let delta = -dir * alpha;
                let b = self.basis[i];
                let limit = if delta < -PIVOT_TOL && self.lo[b].is_finite() {
                    ((self.beta[i] - self.lo[b]) / -delta).max(0.0)
                } else if delta > PIVOT_TOL && self.hi[b].is_finite() {
                    ((self.hi[b] - self.beta[i]) / delta).max(0.0)
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some(cur) => {
                        if limit < theta - 1e-12 {
                            true
                        } else if limit <= theta + 1e-12 {
                            if bland {
                                b < self.basis[cur]
                            } else {
                                alpha.abs() > leave_alpha
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some(i);
                    theta = limit;
                    leave_alpha = alpha.abs();
                }
            }

            let flip = self_limit <= theta;
            let step = if flip { self_limit } else { theta };
            if !step.is_finite() {
                return Err(Error::Unbounded);
            }
            for i in 0..nrows {
                let alpha = self.t[i * ncols + j];
                self.beta[i] -= dir * alpha * step;
            }
            self.pivots += 1;
            if step <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > bland_after {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }

            if flip {
                self.value[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                if let Some(tr) = trace.as_deref_mut() {
                    tr.push(PivotEvent {
                        phase,
                        entering: j,
                        leaving: None,
                        step,
                        bland,
                    });
                }
                continue;
            }

            let r = leave.expect("finite step has a leaving row");
            let old = self.basis[r];
            let delta = -dir * self.t[r * ncols + j];
            self.value[old] = if delta < 0.0 { self.lo[old] } else { self.hi[old] };
            self.is_basic[old] = false;
            self.is_basic[j] = true;
            self.basis[r] = j;
            self.beta[r] = self.value[j] + dir * step;
            self.pivot(r, j);
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(PivotEvent {
                    phase,
                    entering: j,
                    leaving: Some(old),
                    step,
                    bland,
                });
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let ncols = self.ncols;
        let piv = self.t[r * ncols + j];
        let (before, rest) = self.t.split_at_mut(r * ncols);
        let (prow, after) = rest.split_at_mut(ncols);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        prow[j] = 1.0;
        for row in before
            .chunks_exact_mut(ncols)
            .chain(after.chunks_exact_mut(ncols))
        {
            let f = row[j];
            if f != 0.0 {
                for (v, &p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[j] = 0.0;
            }
        }
    }

    /// Recomputes basic values from the original columns: B x_B = b - N x_N.
    fn refresh_basic_values(&mut self) {
        let (m, ncols) = (self.nrows, self.ncols);
        if m == 0 {
            return;
        }
        let mut mat = vec![0.0; m * m];
        let mut rhs = self.rhs.clone();
        for i in 0..m {
            for (k, &b) in self.basis.iter().enumerate() {
                mat[i * m + k] = self.orig[i * ncols + b];
            }
            for j in 0..ncols {
                if !self.is_basic[j] {
                    rhs[i] -= self.orig[i * ncols + j] * self.value[j];
                }
            }
        }
        if let Some(sol) = dense_solve(&mut mat, &mut rhs, m) {
            for (i, v) in sol.into_iter().enumerate() {
                let b = self.basis[i];
                let mut v = v;
                if (v - self.lo[b]).abs() < 1e-11 {
                    v = self.lo[b];
                } else if (v - self.hi[b]).abs() < 1e-11 {
                    v = self.hi[b];
                }
                self.beta[i] = v;
            }
        }
    }

    fn structural_values(&self) -> Vec<f64> {
        let mut x = self.value[..self.nvars].to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.nvars {
                x[b] = self.beta[i];
            }
        }
        x
    }

    fn artificial_sum(&self) -> f64 {
        let mut s: f64 = (self.first_artificial..self.ncols)
            .filter(|&j| !self.is_basic[j])
            .map(|j| self.value[j])
            .sum();
        for (i, &b) in self.basis.iter().enumerate() {
            if b >= self.first_artificial {
                s += self.beta[i];
            }
        }
        s
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn dense_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let (p, max) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if max < 1e-12 {
            return None;
        }
        if p != col {
            for k in 0..n {
                a.swap(p * n + k, col * n + k);
            }
            b.swap(p, col);
        }
        let piv = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / piv;
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s -= a[r * n + k] * x[k];
        }
        x[r] = s / a[r * n + r];
    }
    Some(x)
}

/// Solves `lp`, returning an optimal vertex or `Infeasible`.
/// `pivots` receives the number of simplex iterations performed.
pub fn solve(
    lp: &LinearProgram<'_>,
    opts: &SimplexOptions,
    mut trace: Option<&mut Vec<PivotEvent>>,
    pivots: &mut usize,
) -> Result<LpOutcome> {
    let nvars = lp.lower.len();
    if lp.upper.len() != nvars || lp.objective.len() != nvars {
        return Err(Error::InvalidInput("bound/objective length mismatch".into()));
    }
    for row in lp.rows {
        if let Some(&(j, _)) = row.coeffs.iter().find(|&&(j, _)| j >= nvars) {
            return Err(Error::InvalidInput(format!(
                "row references variable {j} of {nvars}"
            )));
        }
    }
    if (0..nvars).any(|j| lp.lower[j] > lp.upper[j]) {
        return Ok(LpOutcome::Infeasible);
    }

    let mut tab = Tableau::build(lp);
    let max_iter = opts
        .max_iterations
        .unwrap_or(20_000 + 50 * (tab.nrows + tab.ncols));

    if tab.first_artificial < tab.ncols {
        let mut cost = vec![0.0; tab.ncols];
        for c in &mut cost[tab.first_artificial..] {
            *c = 1.0;
        }
        tab.run(&cost, 1, max_iter, &mut trace)?;
        tab.refresh_basic_values();
        let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if tab.artificial_sum() > opts.feasibility_tol * scale {
            *pivots += tab.pivots;
            return Ok(LpOutcome::Infeasible);
        }
        for j in tab.first_artificial..tab.ncols {
            tab.hi[j] = 0.0;
            if !tab.is_basic[j] {
                tab.value[j] = 0.0;
            }
        }
    }

    let mut cost = vec![0.0; tab.ncols];
    cost[..nvars].copy_from_slice(lp.objective);
    tab.run(&cost, 2, max_iter, &mut trace)?;
    tab.refresh_basic_values();
    *pivots += tab.pivots;

    let mut x = tab.structural_values();
    for (j, v) in x.iter_mut().enumerate() {
        if *v < lp.lower[j] {
            *v = lp.lower[j];
        }
        if *v > lp.upper[j] {
            *v = lp.upper[j];
        }
    }
    let objective = x.iter().zip(lp.objective).map(|(a, b)| a * b).sum();
    Ok(LpOutcome::Optimal { x, objective })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(lower: &[f64], upper: &[f64], obj: &[f64], rows: &[Row]) -> LpOutcome {
        let lp = LinearProgram {
            lower,
            upper,
            objective: obj,
            rows,
        };
        let mut p = 0;
        solve(&lp, &SimplexOptions::default(), None, &mut p).unwrap()
    }

    #[test]
    fn empty_model_returns_lower_bounds() {
        match run(&[0.0, 0.5], &[1.0, 1.0], &[0.0, 0.0], &[]) {
            LpOutcome::Optimal { x, .. } => assert_eq!(x, vec![0.0, 0.5]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_textbook_lp() {
        // max 3a + 2b  s.t. a + b <= 4, a + 3b <= 6, a <= 3
        let rows = vec![
            Row::new(vec![(0, 1.0), (1, 1.0)], Relation::Le, 4.0),
            Row::new(vec![(0, 1.0), (1, 3.0)], Relation::Le, 6.0),
        ];
        match run(&[0.0, 0.0], &[3.0, f64::INFINITY], &[-3.0, -2.0], &rows) {
            LpOutcome::Optimal { x, objective } => {
                assert!((x[0] - 3.0).abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
                assert!((objective + 11.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_and_ge_rows() {
        // min a + 2b + 3c s.t. a + b + c = 1, b + c >= 0.5
        let rows = vec![
            Row::new(vec![(0, 1.0), (1, 1.0), (2, 1.0)], Relation::Eq, 1.0),
            Row::new(vec![(1, 1.0), (2, 1.0)], Relation::Ge, 0.5),
        ];
        match run(&[0.0; 3], &[1.0; 3], &[1.0, 2.0, 3.0], &rows) {
            LpOutcome::Optimal { x, objective } => {
                assert!((objective - 1.5).abs() < 1e-9, "{x:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        let rows = vec![Row::new(vec![(0, 1.0), (1, 1.0)], Relation::Ge, 3.0)];
        assert_eq!(
            run(&[0.0, 0.0], &[1.0, 1.0], &[0.0, 0.0], &rows),
            LpOutcome::Infeasible
        );
    }

    #[test]
    fn detects_unboundedness() {
        let lp = LinearProgram {
            lower: &[0.0],
            upper: &[f64::INFINITY],
            objective: &[-1.0],
            rows: &[],
        };
        let mut p = 0;
        assert_eq!(
            solve(&lp, &SimplexOptions::default(), None, &mut p),
            Err(Error::Unbounded)
        );
    }

    #[test]
    fn degenerate_assignment_terminates() {
        // 3x3 assignment polytope, heavily degenerate.
        let mut rows = Vec::new();
        for i in 0..3 {
            rows.push(Row::new(
                (0..3).map(|j| (3 * i + j, 1.0)).collect(),
                Relation::Eq,
                1.0,
            ));
            rows.push(Row::new(
                (0..3).map(|j| (3 * j + i, 1.0)).collect(),
                Relation::Eq,
                1.0,
            ));
        }
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        match run(&[0.0; 9], &[1.0; 9], &cost, &rows) {
            LpOutcome::Optimal { objective, .. } => assert!((objective - 5.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }
}
