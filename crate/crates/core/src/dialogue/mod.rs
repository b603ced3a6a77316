//! Multi-round conversations on a finite common prior.
//!
//! Alice privately sees `x_a`, every Bob sees the same `x_b`, and nobody sees
//! the state `y`. Beliefs are vectors of expected utilities, one per action.

mod bounds;
mod conversation;
mod quantal;
mod substitutes;

pub use bounds::{rounds_for_agreement, theorem_bounds, BoundReport, Corollary};
pub use conversation::{
    agreement_round, martingale_gaps, run_straightforward_conversation, sample_transcript, AliceRule, BobRule,
    ConstantAlice, ConstantBob, Conversation, Message, Speaker, StraightforwardAlice, StraightforwardBob, Transcript,
    MESSAGE_TOL,
};
pub use quantal::{quantal_gap, quantal_response, softmax_stability, StabilityCheck};
pub use substitutes::{
    info_substitutes_check, SubsetMode, SubstitutesReport, Witness, DEFAULT_SAMPLES, EXHAUSTIVE_CAP,
};

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::instance::{Matrix, INPUT_TOL};

/// A joint pmf over `(x_a, x_b, y)` and Alice's utility `alice_u[action][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJointPrior {
    x_a: Vec<String>,
    x_b: Vec<String>,
    y: Vec<String>,
    pmf: Vec<Vec<Vec<f64>>>,
    alice_u: Matrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorFile {
    x_a: Vec<Value>,
    x_b: Vec<Value>,
    y: Vec<Value>,
    pmf: Vec<Vec<Vec<f64>>>,
    alice_u: Matrix,
}

fn label(v: Value) -> String {
    match v {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

impl DiscreteJointPrior {
    pub fn new(
        x_a: Vec<String>,
        x_b: Vec<String>,
        y: Vec<String>,
        pmf: Vec<Vec<Vec<f64>>>,
        alice_u: Matrix,
    ) -> Result<Self> {
        for (name, v) in [("x_a", &x_a), ("x_b", &x_b), ("y", &y)] {
            if v.is_empty() {
                return Err(Error::schema(name, "at least one value is required"));
            }
        }
        if pmf.len() != x_a.len() {
            return Err(Error::schema(
                "pmf",
                format!("expected {} slices, found {}", x_a.len(), pmf.len()),
            ));
        }
        let mut total = 0.0;
        for (i, slice) in pmf.iter().enumerate() {
            if slice.len() != x_b.len() {
                return Err(Error::schema(
                    format!("pmf[{i}]"),
                    format!("expected {} rows", x_b.len()),
                ));
            }
            for (j, row) in slice.iter().enumerate() {
                if row.len() != y.len() {
                    return Err(Error::schema(
                        format!("pmf[{i}][{j}]"),
                        format!("expected {} entries", y.len()),
                    ));
                }
                for (k, &p) in row.iter().enumerate() {
                    if !(p.is_finite() && p >= 0.0) {
                        return Err(Error::Invariant(format!(
                            "pmf[{i}][{j}][{k}] = {p} is not a probability"
                        )));
                    }
                    total += p;
                }
            }
        }
        if (total - 1.0).abs() > INPUT_TOL {
            return Err(Error::Invariant(format!("pmf sums to {total}, expected 1")));
        }
        if alice_u.is_empty() {
            return Err(Error::schema("alice_u", "at least one action is required"));
        }
        for (a, row) in alice_u.iter().enumerate() {
            if row.len() != y.len() {
                return Err(Error::schema(
                    format!("alice_u[{a}]"),
                    format!("expected {} entries", y.len()),
                ));
            }
            if let Some(u) = row.iter().find(|u| !u.is_finite()) {
                return Err(Error::Invariant(format!("alice_u[{a}] contains {u}")));
            }
        }
        Ok(Self {
            x_a,
            x_b,
            y,
            pmf,
            alice_u,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let f: PriorFile = serde_json::from_str(text)
            .map_err(|e| Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        let labels = |v: Vec<Value>| v.into_iter().map(label).collect();
        Self::new(labels(f.x_a), labels(f.x_b), labels(f.y), f.pmf, f.alice_u)
    }

    pub fn to_json_string(&self) -> String {
        let labels = |v: &[String]| v.iter().cloned().map(Value::String).collect();
        let f = PriorFile {
            x_a: labels(&self.x_a),
            x_b: labels(&self.x_b),
            y: labels(&self.y),
            pmf: self.pmf.clone(),
            alice_u: self.alice_u.clone(),
        };
        serde_json::to_string_pretty(&f).expect("prior serializes")
    }

    pub fn x_a(&self) -> &[String] {
        &self.x_a
    }

    pub fn x_b(&self) -> &[String] {
        &self.x_b
    }

    pub fn y(&self) -> &[String] {
        &self.y
    }

    pub fn pmf(&self) -> &[Vec<Vec<f64>>] {
        &self.pmf
    }

    pub fn alice_u(&self) -> &Matrix {
        &self.alice_u
    }

    pub fn num_actions(&self) -> usize {
        self.alice_u.len()
    }

    pub fn p(&self, x_a: usize, x_b: usize) -> f64 {
        self.pmf[x_a][x_b].iter().sum()
    }

    /// Unnormalized state weights over the product set `sa × sb`.
    pub(crate) fn state_mass<'a>(
        &self,
        sa: impl IntoIterator<Item = &'a usize> + Clone,
        sb: impl IntoIterator<Item = &'a usize> + Clone,
    ) -> Vec<f64> {
        let mut mass = vec![0.0; self.y.len()];
        for &i in sa {
            for &j in sb.clone() {
                for (m, p) in mass.iter_mut().zip(&self.pmf[i][j]) {
                    *m += p;
                }
            }
        }
        mass
    }

    /// Expected utility of each action under unnormalized state weights, or
    /// `None` when the weights vanish.
    pub(crate) fn belief_from_mass(&self, mass: &[f64]) -> Option<Vec<f64>> {
        let total: f64 = mass.iter().sum();
        if total <= 0.0 {
            return None;
        }
        Some(
            self.alice_u
                .iter()
                .map(|row| row.iter().zip(mass).map(|(u, m)| u * m).sum::<f64>() / total)
                .collect(),
        )
    }

    /// `E[u(a, y) | x_a ∈ sa, x_b ∈ sb]` for every action.
    pub fn expected_utilities(&self, sa: &[usize], sb: &[usize]) -> Option<Vec<f64>> {
        self.belief_from_mass(&self.state_mass(sa, sb))
    }

    /// Beliefs given both feature values.
    pub fn full_information_belief(&self, x_a: usize, x_b: usize) -> Option<Vec<f64>> {
        self.expected_utilities(&[x_a], &[x_b])
    }
}

pub fn load_prior(path: impl AsRef<Path>) -> Result<DiscreteJointPrior> {
    DiscreteJointPrior::from_json_str(&std::fs::read_to_string(path)?)
}

pub fn save_prior(prior: &DiscreteJointPrior, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, prior.to_json_string())?;
    Ok(())
}

pub const PRIOR_NAMES: [&str; 4] = ["corr222", "xor222", "noisy332", "mixed332"];

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Prior from a state distribution and conditionally independent signals.
fn conditionally_independent(py: &[f64], pa: &[Vec<f64>], pb: &[Vec<f64>], alice_u: Matrix) -> DiscreteJointPrior {
    let (na, nb) = (pa[0].len(), pb[0].len());
    let pmf = (0..na)
        .map(|i| {
            (0..nb)
                .map(|j| py.iter().enumerate().map(|(y, p)| p * pa[y][i] * pb[y][j]).collect())
                .collect()
        })
        .collect();
    DiscreteJointPrior::new(labels("a", na), labels("b", nb), labels("y", py.len()), pmf, alice_u)
        .expect("fixture prior is valid")
}

/// Embedded conversation priors.
///
/// * `corr222`: a fair binary state seen through two independent noisy bits.
/// * `xor222`: two fair bits whose XOR is the state.
/// * `noisy332`: three-level noisy readings of a biased binary state.
/// * `mixed332`: an unstructured 3×3×2 pmf.
pub fn prior_fixture(name: &str) -> Result<DiscreteJointPrior> {
    let guess2 = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    match name {
        "corr222" => Ok(conditionally_independent(
            &[0.5, 0.5],
            &[vec![0.8, 0.2], vec![0.2, 0.8]],
            &[vec![0.7, 0.3], vec![0.3, 0.7]],
            guess2,
        )),
        "xor222" => {
            let pmf = (0..2)
                .map(|i| {
                    (0..2)
                        .map(|j| (0..2).map(|y| if (i ^ j) == y { 0.25 } else { 0.0 }).collect())
                        .collect()
                })
                .collect();
            DiscreteJointPrior::new(labels("a", 2), labels("b", 2), labels("y", 2), pmf, guess2)
        }
        "noisy332" => Ok(conditionally_independent(
            &[0.6, 0.4],
            &[vec![0.6, 0.3, 0.1], vec![0.1, 0.3, 0.6]],
            &[vec![0.5, 0.3, 0.2], vec![0.2, 0.3, 0.5]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.6]],
        )),
        "mixed332" => {
            let weights = [
                [[4.0, 1.0], [2.0, 3.0], [1.0, 0.0]],
                [[0.0, 2.0], [5.0, 1.0], [2.0, 2.0]],
                [[1.0, 3.0], [0.0, 1.0], [3.0, 4.0]],
            ];
            let total: f64 = weights.iter().flatten().flatten().sum();
            let pmf = weights
                .iter()
                .map(|s| s.iter().map(|r| r.iter().map(|w| w / total).collect()).collect())
                .collect();
            DiscreteJointPrior::new(
                labels("a", 3),
                labels("b", 3),
                labels("y", 2),
                pmf,
                vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.5, 0.55]],
            )
        }
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}
