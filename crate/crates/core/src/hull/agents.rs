use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::ScoreMatrix;
use crate::error::{Error, Result};

/// Mean-zero noise added to the truth before clamping to `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
    /// Gaussian with standard deviation `sigma`, truncated at three sigma.
    TruncatedGaussian { sigma: f64 },
}

impl NoiseModel {
    fn check(&self) -> Result<()> {
        let v = match *self {
            NoiseModel::Uniform { half_width } => half_width,
            NoiseModel::TruncatedGaussian { sigma } => sigma,
        };
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Domain(format!(
                "noise scale must be finite and nonnegative, got {v}"
            )));
        }
        Ok(())
    }

    /// Standard deviation of one draw.
    pub fn std_dev(&self) -> f64 {
        match *self {
            NoiseModel::Uniform { half_width } => half_width / 3f64.sqrt(),
            // truncation at 3σ trims the variance by under 3%
            NoiseModel::TruncatedGaussian { sigma } => sigma,
        }
    }
}

enum Sampler {
    Zero,
    Uniform(Uniform<f64>),
    Gaussian(Normal<f64>, f64),
}

impl Sampler {
    fn new(model: NoiseModel) -> Self {
        match model {
            NoiseModel::Uniform { half_width } if half_width > 0.0 => {
                Sampler::Uniform(Uniform::new_inclusive(-half_width, half_width))
            }
            NoiseModel::TruncatedGaussian { sigma } if sigma > 0.0 => {
                Sampler::Gaussian(Normal::new(0.0, sigma).expect("positive sigma"), 3.0 * sigma)
            }
            _ => Sampler::Zero,
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Zero => 0.0,
            Sampler::Uniform(u) => u.sample(rng),
            Sampler::Gaussian(n, cut) => loop {
                let x = n.sample(rng);
                if x.abs() <= *cut {
                    break x;
                }
            },
        }
    }
}

/// Generated agents with the realized mean offset of each from the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyAgents {
    pub scores: ScoreMatrix,
    pub bias: Vec<f64>,
}

/// Agents scoring `clamp(truth + noise)`, independent across agents and items.
///
/// Agents are generated in order from one seeded stream, item by item.
pub fn generate_noisy_agents(truth: &[f64], num_agents: usize, model: NoiseModel, seed: u64) -> Result<NoisyAgents> {
    model.check()?;
    if num_agents == 0 {
        return Err(Error::Domain("num_agents must be at least 1".into()));
    }
    let sampler = Sampler::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = truth.len();
    let mut design = vec![vec![0.0; num_agents]; n];
    let mut bias = vec![0.0; num_agents];
    for (a, b) in bias.iter_mut().enumerate() {
        for (row, &t) in design.iter_mut().zip(truth) {
            let v = (t + sampler.draw(&mut rng)).clamp(0.0, 1.0);
            row[a] = v;
            *b += v - t;
        }
        if n > 0 {
            *b /= n as f64;
        }
    }
    let scores = ScoreMatrix::new(
        (0..n).map(|i| format!("item{i}")).collect(),
        truth.to_vec(),
        (0..num_agents).map(|a| format!("agent{a}")).collect(),
        design,
    )?;
    Ok(NoisyAgents { scores, bias })
}
