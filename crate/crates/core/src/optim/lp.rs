//! Dense two-phase simplex method.
//!
//! Problems are stated as `minimize cᵀx` subject to `A_ub x ≤ b_ub`,
//! `A_eq x = b_eq` and per-variable bounds, then rewritten into standard form
//! (`z ≥ 0`, slack and artificial columns) on a dense tableau. Pricing uses
//! the most negative reduced cost and falls back to Bland's rule while pivots
//! are degenerate, so the solver cannot cycle and is fully deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    ub_rows: Vec<Vec<f64>>,
    ub_rhs: Vec<f64>,
    eq_rows: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub point: Vec<f64>,
    pub value: f64,
}

impl LpProblem {
    /// Minimize `objective · x` with every variable in `[0, ∞)` until told otherwise.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            ub_rows: Vec::new(),
            ub_rhs: Vec::new(),
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.bounds[var] = (lower, upper);
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `row · x ≤ rhs`
    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.ub_rows.push(row);
        self.ub_rhs.push(rhs);
        self
    }

    /// `row · x ≥ rhs`
    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.add_le(row.into_iter().map(|v| -v).collect(), -rhs)
    }

    /// `row · x = rhs`
    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    pub fn inequalities(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.ub_rows.iter().map(Vec::as_slice).zip(self.ub_rhs.iter().copied())
    }

    pub fn equalities(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.eq_rows.iter().map(Vec::as_slice).zip(self.eq_rhs.iter().copied())
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        for row in self.ub_rows.iter().chain(&self.eq_rows) {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "constraint row has {} coefficients, problem has {n} variables",
                    row.len()
                )));
            }
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY || lo.is_nan() || hi.is_nan() {
                return Err(Error::Invariant(format!("variable {i} has bounds [{lo}, {hi}]")));
            }
        }
        let all_finite = self
            .objective
            .iter()
            .chain(self.ub_rows.iter().flatten())
            .chain(self.eq_rows.iter().flatten())
            .chain(&self.ub_rhs)
            .chain(&self.eq_rhs)
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Invariant("LP data must be finite".into()));
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let ub = self.inequalities().map(|(r, b)| (dot(r) - b).max(0.0));
        let eq = self.equalities().map(|(r, b)| (dot(r) - b).abs());
        let bounds = self
            .bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0));
        ub.chain(eq).chain(bounds).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// How an original variable is expressed through nonnegative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    Shift { lower: f64, col: usize },
    Flip { upper: f64, col: usize },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// `rows × (cols + 1)`, the last entry of each row is its right-hand side.
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    basis: Vec<usize>,
    /// Reduced costs followed by the negated objective value.
    cost: Vec<f64>,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let p = self.data[pr * w + pc];
        for v in &mut self.data[pr * w..(pr + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f != 0.0 {
                for (v, pv) in self.data[r * w..(r + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.data[r * w + pc] = 0.0;
            }
        }
        let f = self.cost[pc];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Sets the cost row to the reduced costs of `costs` under the current basis.
    fn price(&mut self, costs: &[f64]) {
        let w = self.width();
        let mut row = costs.to_vec();
        row.push(0.0);
        for r in 0..self.rows {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                for (v, t) in row.iter_mut().zip(&self.data[r * w..(r + 1) * w]) {
                    *v -= cb * t;
                }
            }
        }
        self.cost = row;
    }

    fn run(&mut self, allowed: &[bool], max_iter: usize) -> Result<Outcome> {
        let mut bland = false;
        for _ in 0..max_iter {
            let entering = if bland {
                (0..self.cols).find(|&j| allowed[j] && self.cost[j] < -COST_TOL)
            } else {
                (0..self.cols)
                    .filter(|&j| allowed[j] && self.cost[j] < -COST_TOL)
                    .min_by(|&a, &b| self.cost[a].total_cmp(&self.cost[b]))
            };
            let Some(col) = entering else {
                return Ok(Outcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, col);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                            if (tie && self.basis[r] < self.basis[lr]) || (!tie && ratio < lratio) {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((row, ratio)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            bland = ratio <= 1e-12;
            self.pivot(row, col);
        }
        Err(Error::NumericalFailure(format!("simplex exceeded {max_iter} pivots")))
    }
}

/// Solves the problem; infeasibility and unboundedness are reported in the status.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    problem.validate()?;
    let n = problem.num_vars();

    // variable substitution
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &problem.bounds {
        let map = if lo.is_finite() {
            if hi.is_finite() {
                extra_rows.push((ncols, hi - lo));
            }
            VarMap::Shift { lower: lo, col: ncols }
        } else if hi.is_finite() {
            VarMap::Flip { upper: hi, col: ncols }
        } else {
            ncols += 1;
            VarMap::Split {
                pos: ncols - 1,
                neg: ncols,
            }
        };
        ncols += 1;
        maps.push(map);
    }
    let nstruct = ncols;

    let substitute = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; nstruct];
        let mut rhs = rhs;
        for (a, map) in row.iter().zip(&maps) {
            match *map {
                VarMap::Shift { lower, col } => {
                    out[col] += a;
                    rhs -= a * lower;
                }
                VarMap::Flip { upper, col } => {
                    out[col] -= a;
                    rhs -= a * upper;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] += a;
                    out[neg] -= a;
                }
            }
        }
        (out, rhs)
    };

    // (coefficients, rhs, is_equality)
    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new();
    for (r, b) in problem.inequalities() {
        let (c, b) = substitute(r, b);
        rows.push((c, b, false));
    }
    for (col, width) in extra_rows {
        let mut c = vec![0.0; nstruct];
        c[col] = 1.0;
        rows.push((c, width, false));
    }
    for (r, b) in problem.equalities() {
        let (c, b) = substitute(r, b);
        rows.push((c, b, true));
    }
    let (mut cost, _) = substitute(&problem.objective, 0.0);

    let m = rows.len();
    let nslack = rows.iter().filter(|r| !r.2).count();
    let needs_art: Vec<bool> = rows.iter().map(|(_, b, eq)| *eq || *b < 0.0).collect();
    let nart = needs_art.iter().filter(|&&x| x).count();
    let cols = nstruct + nslack + nart;
    let width = cols + 1;
    let mut data = vec![0.0; m * width];
    let mut basis = vec![0; m];
    let mut slack = nstruct;
    let mut art = nstruct + nslack;
    for (i, (coef, b, eq)) in rows.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        let line = &mut data[i * width..(i + 1) * width];
        for (dst, c) in line.iter_mut().zip(coef) {
            *dst = sign * c;
        }
        line[cols] = sign * b;
        if !eq {
            line[slack] = sign;
            if !needs_art[i] {
                basis[i] = slack;
            }
            slack += 1;
        }
        if needs_art[i] {
            line[art] = 1.0;
            basis[i] = art;
            art += 1;
        }
    }
    let mut tab = Tableau {
        data,
        rows: m,
        cols,
        basis,
        cost: Vec::new(),
    };
    let max_iter = 50 * (m + cols) + 1000;
    let is_art = |j: usize| j >= nstruct + nslack;

    if nart > 0 {
        let phase1: Vec<f64> = (0..cols).map(|j| if is_art(j) { 1.0 } else { 0.0 }).collect();
        tab.price(&phase1);
        let allowed = vec![true; cols];
        tab.run(&allowed, max_iter)?;
        let infeasibility = -tab.cost[cols];
        let scale = 1.0 + rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
        if infeasibility > FEAS_TOL * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                point: Vec::new(),
                value: f64::NAN,
            });
        }
        // drive remaining artificials out of the basis; drop redundant rows
        let mut r = 0;
        while r < tab.rows {
            if is_art(tab.basis[r]) {
                let col = (0..nstruct + nslack)
                    .filter(|&j| tab.at(r, j).abs() > 1e-9)
                    .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()));
                match col {
                    Some(c) => tab.pivot(r, c),
                    None => {
                        let w = tab.width();
                        tab.data.drain(r * w..(r + 1) * w);
                        tab.basis.remove(r);
                        tab.rows -= 1;
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    cost.resize(cols, 0.0);
    tab.price(&cost);
    let allowed: Vec<bool> = (0..cols).map(|j| !is_art(j)).collect();
    if let Outcome::Unbounded = tab.run(&allowed, max_iter)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            point: Vec::new(),
            value: f64::NEG_INFINITY,
        });
    }

    let mut z = vec![0.0; cols];
    for r in 0..tab.rows {
        z[tab.basis[r]] = tab.rhs(r).max(0.0);
    }
    let point: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { lower, col } => lower + z[col],
            VarMap::Flip { upper, col } => upper - z[col],
            VarMap::Split { pos, neg } => z[pos] - z[neg],
        })
        .collect();
    let scale = 1.0
        + problem
            .ub_rhs
            .iter()
            .chain(&problem.eq_rhs)
            .map(|b| b.abs())
            .fold(0.0, f64::max);
    let violation = problem.max_violation(&point);
    if violation > FEAS_TOL * scale {
        return Err(Error::NumericalFailure(format!(
            "optimal point violates constraints by {violation:e}"
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: problem.evaluate(&point),
        point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn forced_equality() {
        let mut lp = LpProblem::new(vec![0.0]);
        lp.add_eq(vec![1.0], 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.point[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.value, 0.0);
    }

    #[test]
    fn single_lower_bound() {
        let mut lp = LpProblem::new(vec![1.0]);
        lp.set_bounds(0, 3.0, f64::INFINITY);
        assert_abs_diff_eq!(solve_lp(&lp).unwrap().value, 3.0, epsilon = 1e-12);

        let mut lp = LpProblem::new(vec![1.0]);
        lp.set_free(0).add_ge(vec![1.0], 3.0);
        assert_abs_diff_eq!(solve_lp(&lp).unwrap().value, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LpProblem::new(vec![1.0]);
        lp.add_le(vec![1.0], -1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LpProblem::new(vec![-1.0, 0.0]);
        lp.add_le(vec![-1.0, 1.0], 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  →  36 at (2, 6)
        let mut lp = LpProblem::new(vec![-3.0, -5.0]);
        lp.add_le(vec![1.0, 0.0], 4.0)
            .add_le(vec![0.0, 2.0], 12.0)
            .add_le(vec![3.0, 2.0], 18.0);
        let s = solve_lp(&lp).unwrap();
        assert_abs_diff_eq!(s.value, -36.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.point[0], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.point[1], 6.0, epsilon = 1e-10);
    }

    #[test]
    fn upper_only_and_boxed_variables() {
        // min -x + y with x ≤ 2 (no lower bound), 1 ≤ y ≤ 5, x - y ≥ -10
        let mut lp = LpProblem::new(vec![-1.0, 1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, 2.0)
            .set_bounds(1, 1.0, 5.0)
            .add_ge(vec![1.0, -1.0], -10.0);
        let s = solve_lp(&lp).unwrap();
        assert_abs_diff_eq!(s.value, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LpProblem::new(vec![1.0, 2.0]);
        lp.add_eq(vec![1.0, 1.0], 1.0).add_eq(vec![2.0, 2.0], 2.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under naive Dantzig pricing.
        let mut lp = LpProblem::new(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add_le(vec![0.25, -60.0, -0.04, 9.0], 0.0)
            .add_le(vec![0.5, -90.0, -0.02, 3.0], 0.0)
            .add_le(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.value, -0.05, epsilon = 1e-10);
    }

    #[test]
    fn mismatched_rows_rejected() {
        let mut lp = LpProblem::new(vec![1.0, 1.0]);
        lp.add_le(vec![1.0], 1.0);
        assert!(matches!(solve_lp(&lp), Err(Error::DimensionMismatch(_))));
    }
}
