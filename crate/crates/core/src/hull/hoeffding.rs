use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_params(num_actions: usize, num_states: usize, epsilon: f64, delta: f64) -> Result<()> {
    if num_actions == 0 || num_states == 0 {
        return Err(Error::Domain("action and state counts must be at least 1".into()));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0,1), got {delta}")));
    }
    Ok(())
}

/// Smallest committee for which uniform weights are ε-aligned with
/// probability at least `1 − δ`: the least integer strictly above
/// `(ln(2|A||Y|) − ln δ) / (2ε²)`.
pub fn hoeffding_committee_size(num_actions: usize, num_states: usize, epsilon: f64, delta: f64) -> Result<usize> {
    check_params(num_actions, num_states, epsilon, delta)?;
    let cells = 2.0 * num_actions as f64 * num_states as f64;
    let x = (cells.ln() - delta.ln()) / (2.0 * epsilon * epsilon);
    Ok(x.floor() as usize + 1)
}

/// How simulated agents score each (action, state) cell around Alice's utility `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentModel {
    /// 1 with probability `u`, else 0.
    Bernoulli,
    /// `u` plus uniform noise of half-width `min(half_width, u, 1 − u)`.
    Uniform { half_width: f64 },
    /// Exactly `u`.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub num_actions: usize,
    pub num_states: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub model: AgentModel,
    /// Overrides the Hoeffding committee size.
    pub committee_size: Option<usize>,
}

impl ValidationConfig {
    pub fn new(num_actions: usize, num_states: usize, epsilon: f64, delta: f64, trials: usize, seed: u64) -> Self {
        Self {
            num_actions,
            num_states,
            epsilon,
            delta,
            trials,
            seed,
            model: AgentModel::Bernoulli,
            committee_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub committee_size: usize,
    pub trials: usize,
    pub failures: usize,
    pub failure_rate: f64,
    /// `δ + 3·sqrt(δ(1 − δ)/trials)`.
    pub threshold: f64,
}

/// Monte Carlo estimate of how often the uniform average of `k` random agents
/// misses Alice's utility by more than ε in sup norm.
///
/// Trial `t` draws a uniform random utility table and its agents from a
/// generator seeded by `seed + t`.
pub fn validate_alignment_probability(cfg: &ValidationConfig) -> Result<ValidationReport> {
    check_params(cfg.num_actions, cfg.num_states, cfg.epsilon, cfg.delta)?;
    if cfg.trials < 100 {
        return Err(Error::Domain(format!(
            "at least 100 trials are required, got {}",
            cfg.trials
        )));
    }
    if let AgentModel::Uniform { half_width } = cfg.model {
        if !(half_width.is_finite() && half_width >= 0.0) {
            return Err(Error::Domain(format!(
                "half width must be nonnegative, got {half_width}"
            )));
        }
    }
    let k = match cfg.committee_size {
        Some(0) => return Err(Error::Domain("committee size must be at least 1".into())),
        Some(k) => k,
        None => hoeffding_committee_size(cfg.num_actions, cfg.num_states, cfg.epsilon, cfg.delta)?,
    };
    let cells = cfg.num_actions * cfg.num_states;
    let failures = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(t as u64));
            let u: Vec<f64> = (0..cells).map(|_| rng.gen::<f64>()).collect();
            let mut sums = vec![0.0; cells];
            for _ in 0..k {
                for (s, &uc) in sums.iter_mut().zip(&u) {
                    *s += match cfg.model {
                        AgentModel::Bernoulli => f64::from(u8::from(rng.gen_bool(uc))),
                        AgentModel::Exact => uc,
                        AgentModel::Uniform { half_width } => {
                            let h = half_width.min(uc).min(1.0 - uc);
                            if h > 0.0 {
                                uc + Uniform::new_inclusive(-h, h).sample(&mut rng)
                            } else {
                                uc
                            }
                        }
                    };
                }
            }
            let gap = sums
                .iter()
                .zip(&u)
                .map(|(s, uc)| (s / k as f64 - uc).abs())
                .fold(0.0, f64::max);
            usize::from(gap > cfg.epsilon)
        })
        .sum::<usize>();
    let trials = cfg.trials as f64;
    Ok(ValidationReport {
        committee_size: k,
        trials: cfg.trials,
        failures,
        failure_rate: failures as f64 / trials,
        threshold: cfg.delta + 3.0 * (cfg.delta * (1.0 - cfg.delta) / trials).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn committee_size_formula() {
        assert_eq!(hoeffding_committee_size(3, 3, 0.1, 0.05).unwrap(), 295);
        let k1 = hoeffding_committee_size(4, 5, 0.05, 0.01).unwrap() as f64;
        let k2 = hoeffding_committee_size(4, 5, 0.1, 0.01).unwrap() as f64;
        assert!((k1 / k2 - 4.0).abs() < 0.01);
        // squaring |A||Y| adds ln(|A||Y|) to the numerator only
        let small = hoeffding_committee_size(3, 3, 0.1, 0.05).unwrap();
        let big = hoeffding_committee_size(9, 9, 0.1, 0.05).unwrap();
        assert!(((big - small) as f64 - 9f64.ln() / 0.02).abs() <= 1.0);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            hoeffding_committee_size(3, 3, 0.0, 0.05),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            hoeffding_committee_size(3, 3, 0.1, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            hoeffding_committee_size(0, 3, 0.1, 0.5),
            Err(Error::Domain(_))
        ));
        let cfg = ValidationConfig::new(3, 3, 0.1, 0.05, 10, 0);
        assert!(matches!(validate_alignment_probability(&cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn bounded_noise_below_epsilon_never_fails() {
        let mut cfg = ValidationConfig::new(3, 3, 0.2, 0.05, 200, 1);
        cfg.model = AgentModel::Uniform { half_width: 0.1 };
        cfg.committee_size = Some(1);
        assert_eq!(validate_alignment_probability(&cfg).unwrap().failures, 0);
        cfg.model = AgentModel::Exact;
        cfg.epsilon = 1e-9;
        assert_eq!(validate_alignment_probability(&cfg).unwrap().failures, 0);
    }
}
