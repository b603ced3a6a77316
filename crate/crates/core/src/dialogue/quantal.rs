use serde::{Deserialize, Serialize};

/// Logit choice probabilities `p(a) ∝ exp(λ μ_a)`.
pub fn quantal_response(belief: &[f64], lambda: f64) -> Vec<f64> {
    let max = belief.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = belief.iter().map(|m| (lambda * (m - max)).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Utility lost by responding quantally instead of picking the best action.
pub fn quantal_gap(belief: &[f64], lambda: f64) -> f64 {
    let best = belief.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let p = quantal_response(belief, lambda);
    let expected: f64 = p.iter().zip(belief).map(|(p, m)| p * m).sum();
    (best - expected).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCheck {
    /// `‖softmax(λu) − softmax(λu′)‖₁`.
    pub distance: f64,
    /// `exp(2λ‖u − u′‖∞) − 1`.
    pub bound: f64,
    pub holds: bool,
}

/// Compares how far two quantal responses move against the multiplicative
/// stability bound.
pub fn softmax_stability(u: &[f64], u_prime: &[f64], lambda: f64) -> StabilityCheck {
    assert_eq!(u.len(), u_prime.len(), "utility vectors must have equal length");
    let p = quantal_response(u, lambda);
    let q = quantal_response(u_prime, lambda);
    let distance: f64 = p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum();
    let sup = u.iter().zip(u_prime).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let bound = (2.0 * lambda * sup).exp_m1();
    StabilityCheck {
        distance,
        bound,
        holds: distance <= bound + 1e-12,
    }
}
