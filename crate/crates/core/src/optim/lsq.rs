//! Constrained least squares on small dense designs.
//!
//! Both solvers are primal active-set methods working on the normal equations
//! `G = UᵀU`, `b = Uᵀy`. Sub-problems are solved by Cholesky and fall back to
//! an SVD least-squares solve when the passive columns are collinear.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights at or below this value do not count towards the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-6;

/// A fitted combination of agent columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentFit {
    pub weights: Vec<f64>,
    pub offset: f64,
    /// Mean squared error per item.
    pub objective: f64,
    pub support_size: usize,
}

impl AlignmentFit {
    fn from_weights(weights: Vec<f64>, objective: f64) -> Self {
        let support_size = weights.iter().filter(|&&w| w > SUPPORT_THRESHOLD).count();
        Self {
            weights,
            offset: 0.0,
            objective,
            support_size,
        }
    }
}

/// Normal equations of `min ‖Uw − y‖²`.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    pub gram: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl NormalEquations {
    /// Restricts the design to `items` (rows) and `agents` (columns).
    pub fn from_subset(design: &[Vec<f64>], target: &[f64], items: &[usize], agents: &[usize]) -> Self {
        let k = agents.len();
        let mut gram = DMatrix::zeros(k, k);
        let mut rhs = DVector::zeros(k);
        let mut row = vec![0.0; k];
        for &i in items {
            for (slot, &a) in row.iter_mut().zip(agents) {
                *slot = design[i][a];
            }
            let y = target[i];
            for p in 0..k {
                let up = row[p];
                if up == 0.0 {
                    continue;
                }
                rhs[p] += up * y;
                for q in p..k {
                    gram[(p, q)] += up * row[q];
                }
            }
        }
        for p in 0..k {
            for q in 0..p {
                gram[(p, q)] = gram[(q, p)];
            }
        }
        Self { gram, rhs }
    }

    pub fn new(design: &[Vec<f64>], target: &[f64]) -> Result<Self> {
        let agents = check_dims(design, target)?;
        let items: Vec<usize> = (0..target.len()).collect();
        let cols: Vec<usize> = (0..agents).collect();
        Ok(Self::from_subset(design, target, &items, &cols))
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Gradient of `½‖Uw − y‖²`.
    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let w = DVector::from_column_slice(w);
        (&self.gram * w - &self.rhs).iter().copied().collect()
    }

    fn scale(&self) -> f64 {
        self.rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()))
    }
}

fn check_dims(design: &[Vec<f64>], target: &[f64]) -> Result<usize> {
    if design.len() != target.len() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} items, target has {}",
            design.len(),
            target.len()
        )));
    }
    let agents = design.first().map(Vec::len).unwrap_or(0);
    if agents == 0 {
        return Err(Error::DimensionMismatch("design has no agent columns".into()));
    }
    if let Some(i) = design.iter().position(|r| r.len() != agents) {
        return Err(Error::DimensionMismatch(format!(
            "design row {i} has {} columns, expected {agents}",
            design[i].len()
        )));
    }
    Ok(agents)
}

/// Per-item mean squared error of `Uw` against `y`.
pub fn mse(design: &[Vec<f64>], weights: &[f64], target: &[f64]) -> f64 {
    mse_on(
        design,
        weights,
        target,
        &(0..target.len()).collect::<Vec<_>>(),
        &(0..weights.len()).collect::<Vec<_>>(),
    )
}

/// Mean squared error restricted to `items` and the `agents` columns.
pub fn mse_on(design: &[Vec<f64>], weights: &[f64], target: &[f64], items: &[usize], agents: &[usize]) -> f64 {
    if items.is_empty() {
        return 0.0;
    }
    let sse: f64 = items
        .iter()
        .map(|&i| {
            let pred: f64 = agents.iter().zip(weights).map(|(&a, w)| design[i][a] * w).sum();
            (pred - target[i]).powi(2)
        })
        .sum();
    sse / items.len() as f64
}

/// Solves `G_PP z = b_P`, or the bordered system with a sum-to-one row.
fn solve_passive(ne: &NormalEquations, passive: &[usize], sum_to_one: bool) -> Vec<f64> {
    let p = passive.len();
    let n = if sum_to_one { p + 1 } else { p };
    let mut m = DMatrix::zeros(n, n);
    let mut r = DVector::zeros(n);
    for (a, &i) in passive.iter().enumerate() {
        r[a] = ne.rhs[i];
        for (b, &j) in passive.iter().enumerate() {
            m[(a, b)] = ne.gram[(i, j)];
        }
    }
    if sum_to_one {
        for a in 0..p {
            m[(a, p)] = 1.0;
            m[(p, a)] = 1.0;
        }
        r[p] = 1.0;
    } else if let Some(chol) = m.clone().cholesky() {
        let z = chol.solve(&r);
        if z.iter().all(|v| v.is_finite()) {
            return z.iter().copied().collect();
        }
    }
    let lu = m.clone().lu();
    if let Some(z) = lu.solve(&r) {
        let resid = (&m * &z - &r).amax();
        if z.iter().all(|v| v.is_finite()) && resid <= 1e-9 * (1.0 + r.amax()) {
            return z.iter().take(p).copied().collect();
        }
    }
    let svd = m.svd(true, true);
    let z = svd.solve(&r, 1e-12).expect("SVD with vectors solves");
    z.iter().take(p).copied().collect()
}

/// Lawson–Hanson NNLS on prepared normal equations.
pub fn nnls_normal(ne: &NormalEquations) -> Result<Vec<f64>> {
    let n = ne.dim();
    let tol = 1e-12 * ne.scale();
    let mut w = vec![0.0; n];
    let mut passive = vec![false; n];
    // columns that failed to enter; retried once `w` moves
    let mut rejected = vec![false; n];
    let cap = 10 * n.max(1);
    for _ in 0..=cap {
        let grad = ne.gradient(&w);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && !rejected[j] && -grad[j] > tol)
            .max_by(|&a, &b| (-grad[a]).total_cmp(&-grad[b]));
        let Some(j) = candidate else {
            return Ok(w);
        };
        passive[j] = true;
        let mut first = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let z = scatter(n, &idx, &solve_passive(ne, &idx, false));
            if first && z[j] <= 0.0 {
                passive[j] = false;
                rejected[j] = true;
                break;
            }
            first = false;
            if idx.iter().all(|&i| z[i] > 0.0) {
                w = z;
                rejected.iter_mut().for_each(|r| *r = false);
                break;
            }
            step_towards(&mut w, &z, &idx);
            for &i in &idx {
                if w[i] <= 1e-15 {
                    w[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    Err(Error::NumericalFailure(format!(
        "NNLS did not converge within {cap} iterations"
    )))
}

fn scatter(n: usize, idx: &[usize], values: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; n];
    for (&i, v) in idx.iter().zip(values) {
        z[i] = *v;
    }
    z
}

/// Moves `w` towards `z` until the first passive coordinate reaches zero.
fn step_towards(w: &mut [f64], z: &[f64], idx: &[usize]) {
    let mut alpha = 1.0f64;
    for &i in idx {
        if z[i] <= 0.0 {
            let denom = w[i] - z[i];
            if denom > 0.0 {
                alpha = alpha.min(w[i] / denom);
            }
        }
    }
    let alpha = alpha.max(0.0);
    for &i in idx {
        w[i] += alpha * (z[i] - w[i]);
    }
}

/// Primal active-set solve of `min ½wᵀGw − bᵀw` over the probability simplex.
pub fn simplex_normal(ne: &NormalEquations) -> Result<Vec<f64>> {
    let n = ne.dim();
    if n == 0 {
        return Err(Error::DimensionMismatch("simplex fit needs at least one agent".into()));
    }
    let tol = 1e-12 * ne.scale().max(ne.gram.amax());
    let start = (0..n)
        .min_by(|&a, &b| {
            let fa = 0.5 * ne.gram[(a, a)] - ne.rhs[a];
            let fb = 0.5 * ne.gram[(b, b)] - ne.rhs[b];
            fa.total_cmp(&fb)
        })
        .expect("n >= 1");
    let mut w = vec![0.0; n];
    w[start] = 1.0;
    let mut passive = vec![false; n];
    passive[start] = true;
    let mut rejected = vec![false; n];
    let mut entering: Option<usize> = None;
    let cap = 10 * n;
    for _ in 0..=cap {
        let mut first = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let z = scatter(n, &idx, &solve_passive(ne, &idx, true));
            if let (true, Some(j)) = (first, entering) {
                if z[j] <= 0.0 {
                    passive[j] = false;
                    rejected[j] = true;
                    break;
                }
            }
            first = false;
            if idx.iter().all(|&i| z[i] > 0.0) {
                w = z;
                if entering.is_some() {
                    rejected.iter_mut().for_each(|r| *r = false);
                }
                break;
            }
            step_towards(&mut w, &z, &idx);
            let mut dropped = false;
            for &i in &idx {
                if w[i] <= 1e-15 && passive.iter().filter(|&&p| p).count() > 1 {
                    w[i] = 0.0;
                    passive[i] = false;
                    dropped = true;
                }
            }
            if !dropped {
                break;
            }
        }
        let total: f64 = w.iter().map(|v| v.max(0.0)).sum();
        for v in &mut w {
            *v = v.max(0.0) / total;
        }
        let grad = ne.gradient(&w);
        let support: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
        let nu = support.iter().map(|&i| grad[i]).sum::<f64>() / support.len() as f64;
        let candidate = (0..n)
            .filter(|&j| !passive[j] && !rejected[j] && grad[j] - nu < -tol)
            .min_by(|&a, &b| grad[a].total_cmp(&grad[b]));
        let Some(j) = candidate else {
            return Ok(w);
        };
        passive[j] = true;
        entering = Some(j);
    }
    Err(Error::NumericalFailure(format!(
        "simplex fit did not converge within {cap} iterations"
    )))
}

/// Least squares over `w ≥ 0`.
pub fn nnls(design: &[Vec<f64>], target: &[f64]) -> Result<AlignmentFit> {
    let ne = NormalEquations::new(design, target)?;
    let w = nnls_normal(&ne)?;
    let objective = mse(design, &w, target);
    Ok(AlignmentFit::from_weights(w, objective))
}

/// Least squares over the probability simplex.
pub fn simplex_fit(design: &[Vec<f64>], target: &[f64]) -> Result<AlignmentFit> {
    let ne = NormalEquations::new(design, target)?;
    let w = simplex_normal(&ne)?;
    let objective = mse(design, &w, target);
    Ok(AlignmentFit::from_weights(w, objective))
}

/// Best single agent and the unweighted mean of all agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    pub best_individual: (usize, f64),
    pub simple_average: f64,
}

pub fn least_squares_baselines(design: &[Vec<f64>], target: &[f64]) -> Result<Baselines> {
    let agents = check_dims(design, target)?;
    let items: Vec<usize> = (0..target.len()).collect();
    let cols: Vec<usize> = (0..agents).collect();
    Ok(baselines_on(design, target, &items, &cols))
}

/// Baselines restricted to `items` and the `agents` columns; the best
/// individual index is a position within `agents`.
pub fn baselines_on(design: &[Vec<f64>], target: &[f64], items: &[usize], agents: &[usize]) -> Baselines {
    let k = agents.len();
    let mut best = (0, f64::INFINITY);
    for (pos, &a) in agents.iter().enumerate() {
        let e = mse_on(design, &[1.0], target, items, &[a]);
        if e < best.1 {
            best = (pos, e);
        }
    }
    let uniform = vec![1.0 / k as f64; k];
    Baselines {
        best_individual: best,
        simple_average: mse_on(design, &uniform, target, items, agents),
    }
}
