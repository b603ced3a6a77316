use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Corollary {
    Applicable { deficit: f64 },
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub num_actions: usize,
    pub rounds: f64,
    pub delta_conv: f64,
    pub lambda: f64,
    pub epsilon: f64,
    /// Agreement level reached after `rounds` rounds.
    pub zeta: f64,
    /// `10 ζ^{1/3}`, the per-action error once agreement holds.
    pub agreement_error: f64,
    pub estimation_error: f64,
    pub quantal_gap: f64,
    /// Total distance below the first-best utility.
    pub deficit: f64,
    /// `λ · 10 ζ^{1/3}`; the linearized form applies when this is at most 1/4.
    pub guard: f64,
    pub corollary: Corollary,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_delta(delta_conv: f64) -> Result<()> {
    if delta_conv > 0.0 && delta_conv < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "delta_conv must lie in (0, 1), got {delta_conv}"
        )))
    }
}

/// Utility guarantee for a straightforward-talking, quantal-responding Alice
/// after `rounds` rounds of conversation.
pub fn theorem_bounds(
    num_actions: usize,
    rounds: f64,
    delta_conv: f64,
    lambda: f64,
    epsilon: f64,
) -> Result<BoundReport> {
    if num_actions == 0 {
        return Err(Error::Domain("at least one action is required".into()));
    }
    positive("rounds", rounds)?;
    positive("lambda", lambda)?;
    check_delta(delta_conv)?;
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::Domain(format!(
            "epsilon must be nonnegative and finite, got {epsilon}"
        )));
    }
    let a = num_actions as f64;
    let zeta = (3.0 * a / (rounds * delta_conv)).sqrt();
    let agreement_error = 10.0 * zeta.cbrt();
    let estimation_error =
        2.0 * (agreement_error + delta_conv) + (4.0 * lambda * agreement_error).exp_m1() + delta_conv;
    let quantal_gap = a.ln() / lambda;
    let deficit = 2.0 * epsilon + estimation_error + quantal_gap;
    let guard = lambda * agreement_error;
    let corollary = if guard <= 0.25 {
        let linear = (20.0 + 40.0 * std::f64::consts::E * lambda) * zeta.cbrt();
        Corollary::Applicable {
            deficit: 2.0 * epsilon + linear + 3.0 * delta_conv + quantal_gap,
        }
    } else {
        Corollary::NotApplicable
    };
    Ok(BoundReport {
        num_actions,
        rounds,
        delta_conv,
        lambda,
        epsilon,
        zeta,
        agreement_error,
        estimation_error,
        quantal_gap,
        deficit,
        guard,
        corollary,
    })
}

/// Rounds after which straightforward conversation reaches `zeta`-agreement
/// with probability at least `1 − delta_conv`.
pub fn rounds_for_agreement(num_actions: usize, zeta: f64, delta_conv: f64) -> Result<f64> {
    if num_actions == 0 {
        return Err(Error::Domain("at least one action is required".into()));
    }
    positive("zeta", zeta)?;
    check_delta(delta_conv)?;
    Ok(3.0 * num_actions as f64 / (zeta * zeta * delta_conv))
}
