use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ScoreMatrix;
use crate::error::{Error, Result};
use crate::optim::{baselines_on, mse_on, nnls_normal, simplex_normal, NormalEquations, SUPPORT_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    /// Sample standard deviation across permutations; 0 for one permutation.
    pub std: f64,
}

impl MetricStats {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

/// Fold-averaged metrics at one committee size, aggregated over permutations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord {
    pub k: usize,
    pub best_individual_mse: MetricStats,
    pub simple_average_mse: MetricStats,
    pub nnls_mse: MetricStats,
    pub simplex_mse: MetricStats,
    pub nnls_support: MetricStats,
    pub simplex_support: MetricStats,
    pub train_best_individual_mse: MetricStats,
    pub train_simple_average_mse: MetricStats,
    pub train_nnls_mse: MetricStats,
    pub train_simplex_mse: MetricStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub records: Vec<ScalingRecord>,
    pub permutations: usize,
    pub folds: usize,
    pub seed: u64,
    /// Permutation `p` was drawn from a generator seeded with `permutation_seeds[p]`.
    pub permutation_seeds: Vec<u64>,
}

/// Number of metrics tracked per (permutation, K).
const METRICS: usize = 10;

/// Fold-averaged metrics for one permutation at each K, in the field order of
/// [`ScalingRecord`].
fn run_permutation(scores: &ScoreMatrix, k_grid: &[usize], folds: usize, seed: u64) -> Result<Vec<[f64; METRICS]>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agents: Vec<usize> = (0..scores.num_agents()).collect();
    agents.shuffle(&mut rng);
    let mut items: Vec<usize> = (0..scores.num_items()).collect();
    items.shuffle(&mut rng);

    let n = items.len();
    let bounds: Vec<(usize, usize)> = (0..folds).map(|f| (f * n / folds, (f + 1) * n / folds)).collect();
    let design = scores.design();
    let target = scores.truth();

    k_grid
        .iter()
        .map(|&k| {
            let cols = &agents[..k];
            let mut acc = [0.0; METRICS];
            for &(lo, hi) in &bounds {
                let test = &items[lo..hi];
                let train: Vec<usize> = items[..lo].iter().chain(&items[hi..]).copied().collect();
                let ne = NormalEquations::from_subset(design, target, &train, cols);
                let w_nnls = nnls_normal(&ne)?;
                let w_simplex = simplex_normal(&ne)?;
                let base_train = baselines_on(design, target, &train, cols);
                let best = cols[base_train.best_individual.0];
                let uniform = vec![1.0 / k as f64; k];
                let support = |w: &[f64]| w.iter().filter(|&&v| v > SUPPORT_THRESHOLD).count() as f64;
                let row = [
                    mse_on(design, &[1.0], target, test, &[best]),
                    mse_on(design, &uniform, target, test, cols),
                    mse_on(design, &w_nnls, target, test, cols),
                    mse_on(design, &w_simplex, target, test, cols),
                    support(&w_nnls),
                    support(&w_simplex),
                    base_train.best_individual.1,
                    base_train.simple_average,
                    mse_on(design, &w_nnls, target, &train, cols),
                    mse_on(design, &w_simplex, target, &train, cols),
                ];
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v;
                }
            }
            Ok(acc.map(|v| v / folds as f64))
        })
        .collect()
}

/// Cross-validated alignment error as the number of agents grows.
///
/// Permutation `p` uses a generator seeded with `seed + p` to shuffle the
/// agents and, independently per permutation, the items; the shuffled items
/// are cut into `folds` contiguous blocks. For every K in `k_grid`, the
/// first K agents of the permutation are fitted on each training split and
/// scored on the held-out block.
pub fn k_scaling_experiment(
    scores: &ScoreMatrix,
    k_grid: &[usize],
    permutations: usize,
    folds: usize,
    seed: u64,
) -> Result<ScalingCurve> {
    if folds < 2 {
        return Err(Error::Domain(format!("at least 2 folds are required, got {folds}")));
    }
    if permutations == 0 {
        return Err(Error::Domain("at least one permutation is required".into()));
    }
    if let Some(&k) = k_grid.iter().find(|&&k| k == 0 || k > scores.num_agents()) {
        return Err(Error::Domain(format!("K = {k} is outside 1..={}", scores.num_agents())));
    }
    let n = scores.num_items();
    if let Some(fold) = (0..folds).find(|f| f * n / folds == (f + 1) * n / folds) {
        return Err(Error::InsufficientItems { items: n, folds, fold });
    }
    let mut grid = k_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();

    let seeds: Vec<u64> = (0..permutations as u64).map(|p| seed.wrapping_add(p)).collect();
    let runs: Vec<Vec<[f64; METRICS]>> = seeds
        .par_iter()
        .map(|&s| run_permutation(scores, &grid, folds, s))
        .collect::<Result<_>>()?;

    let records = grid
        .iter()
        .enumerate()
        .map(|(g, &k)| {
            let stats = |m: usize| MetricStats::of(&runs.iter().map(|r| r[g][m]).collect::<Vec<_>>());
            ScalingRecord {
                k,
                best_individual_mse: stats(0),
                simple_average_mse: stats(1),
                nnls_mse: stats(2),
                simplex_mse: stats(3),
                nnls_support: stats(4),
                simplex_support: stats(5),
                train_best_individual_mse: stats(6),
                train_simple_average_mse: stats(7),
                train_nnls_mse: stats(8),
                train_simplex_mse: stats(9),
            }
        })
        .collect();
    Ok(ScalingCurve {
        records,
        permutations,
        folds,
        seed,
        permutation_seeds: seeds,
    })
}
