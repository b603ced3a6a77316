use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DiscreteJointPrior;
use crate::error::{Error, Result};

/// Belief messages closer than this in sup norm are indistinguishable.
pub const MESSAGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    /// Rounds are numbered from 1.
    pub round: usize,
    pub speaker: Speaker,
    pub content: Vec<f64>,
}

/// One message history per Bob.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub histories: Vec<Vec<Message>>,
}

/// Alice's side: sees every history and sends one message to each Bob.
pub trait AliceRule {
    fn dim(&self) -> usize;
    fn messages(&self, x_a: usize, histories: &[Vec<Message>], rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>>;
}

/// A Bob's side: sees only his own history.
pub trait BobRule {
    fn dim(&self) -> usize;
    fn message(&self, x_b: usize, history: &[Message], rng: &mut ChaCha8Rng) -> Result<Vec<f64>>;
}

/// Runs the message loop: each round Alice writes to every Bob, then each Bob
/// answers on his own history. Stochastic rules draw from one generator
/// seeded with `seed`, in call order.
pub fn sample_transcript(
    alice: &dyn AliceRule,
    bobs: &[&dyn BobRule],
    x_a: usize,
    x_b: usize,
    rounds: usize,
    seed: u64,
) -> Result<Transcript> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histories: Vec<Vec<Message>> = vec![Vec::new(); bobs.len()];
    for round in 1..=rounds {
        let outgoing = alice.messages(x_a, &histories, &mut rng)?;
        if outgoing.len() != bobs.len() {
            return Err(Error::DimensionMismatch(format!(
                "Alice sent {} messages to {} Bobs",
                outgoing.len(),
                bobs.len()
            )));
        }
        for (h, content) in histories.iter_mut().zip(outgoing) {
            if content.len() != alice.dim() {
                return Err(Error::RuleDimensionMismatch {
                    expected: alice.dim(),
                    got: content.len(),
                });
            }
            h.push(Message {
                round,
                speaker: Speaker::Alice,
                content,
            });
        }
        for (h, bob) in histories.iter_mut().zip(bobs) {
            let content = bob.message(x_b, h, &mut rng)?;
            if content.len() != bob.dim() {
                return Err(Error::RuleDimensionMismatch {
                    expected: bob.dim(),
                    got: content.len(),
                });
            }
            h.push(Message {
                round,
                speaker: Speaker::Bob,
                content,
            });
        }
    }
    Ok(Transcript { histories })
}

/// Sends the same message every round.
#[derive(Debug, Clone)]
pub struct ConstantAlice {
    pub message: Vec<f64>,
    pub dim: usize,
}

impl AliceRule for ConstantAlice {
    fn dim(&self) -> usize {
        self.dim
    }

    fn messages(&self, _: usize, histories: &[Vec<Message>], _: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
        Ok(vec![self.message.clone(); histories.len()])
    }
}

#[derive(Debug, Clone)]
pub struct ConstantBob {
    pub message: Vec<f64>,
    pub dim: usize,
}

impl BobRule for ConstantBob {
    fn dim(&self) -> usize {
        self.dim
    }

    fn message(&self, _: usize, _: &[Message], _: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        Ok(self.message.clone())
    }
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= MESSAGE_TOL)
}

/// Alice values still consistent with her having sent `msg`.
fn refine_a(prior: &DiscreteJointPrior, sa: &[usize], sb: &[usize], msg: &[f64]) -> Vec<usize> {
    sa.iter()
        .copied()
        .filter(|&i| prior.expected_utilities(&[i], sb).is_some_and(|b| close(&b, msg)))
        .collect()
}

fn refine_b(prior: &DiscreteJointPrior, sa: &[usize], sb: &[usize], msg: &[f64]) -> Vec<usize> {
    sb.iter()
        .copied()
        .filter(|&j| prior.expected_utilities(sa, &[j]).is_some_and(|b| close(&b, msg)))
        .collect()
}

/// Feature sets consistent with a straightforward history, as seen by anyone
/// who reads it.
fn replay(prior: &DiscreteJointPrior, history: &[Message]) -> (Vec<usize>, Vec<usize>) {
    let mut sa: Vec<usize> = (0..prior.x_a().len()).collect();
    let mut sb: Vec<usize> = (0..prior.x_b().len()).collect();
    for m in history {
        match m.speaker {
            Speaker::Alice => sa = refine_a(prior, &sa, &sb, &m.content),
            Speaker::Bob => sb = refine_b(prior, &sa, &sb, &m.content),
        }
    }
    (sa, sb)
}

fn inconsistent() -> Error {
    Error::Invariant("history is inconsistent with the speaker's own features".into())
}

/// Reports `E[u | x_a, history]` to every Bob.
#[derive(Debug, Clone, Copy)]
pub struct StraightforwardAlice<'a> {
    pub prior: &'a DiscreteJointPrior,
}

impl AliceRule for StraightforwardAlice<'_> {
    fn dim(&self) -> usize {
        self.prior.num_actions()
    }

    fn messages(&self, x_a: usize, histories: &[Vec<Message>], _: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
        let mut sb: Vec<usize> = (0..self.prior.x_b().len()).collect();
        for h in histories {
            let (_, sbi) = replay(self.prior, h);
            sb.retain(|j| sbi.contains(j));
        }
        let belief = self.prior.expected_utilities(&[x_a], &sb).ok_or_else(inconsistent)?;
        Ok(vec![belief; histories.len()])
    }
}

/// Reports `E[u | x_b, history]`.
#[derive(Debug, Clone, Copy)]
pub struct StraightforwardBob<'a> {
    pub prior: &'a DiscreteJointPrior,
}

impl BobRule for StraightforwardBob<'_> {
    fn dim(&self) -> usize {
        self.prior.num_actions()
    }

    fn message(&self, x_b: usize, history: &[Message], _: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let (sa, _) = replay(self.prior, history);
        self.prior.expected_utilities(&sa, &[x_b]).ok_or_else(inconsistent)
    }
}

/// A straightforward conversation with its belief path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conversation {
    pub transcript: Transcript,
    /// `alice_beliefs[r]`: Alice's belief after round `r`; entry 0 is before
    /// any message.
    pub alice_beliefs: Vec<Vec<f64>>,
    pub bob_beliefs: Vec<Vec<f64>>,
    /// Feature values still consistent with the whole transcript.
    pub feasible_a: Vec<usize>,
    pub feasible_b: Vec<usize>,
}

impl Conversation {
    /// Sup-norm belief gap per round.
    pub fn gaps(&self) -> Vec<f64> {
        self.alice_beliefs
            .iter()
            .zip(&self.bob_beliefs)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            .collect()
    }
}

/// Both parties truthfully report their current belief each round, Alice first.
///
/// Every message pins the speaker's features down to the values that would
/// have produced it, so beliefs are computed by conditioning on the product
/// of the surviving feature sets.
pub fn run_straightforward_conversation(
    prior: &DiscreteJointPrior,
    x_a: usize,
    x_b: usize,
    rounds: usize,
) -> Result<Conversation> {
    if x_a >= prior.x_a().len() || x_b >= prior.x_b().len() {
        return Err(Error::DimensionMismatch(format!(
            "features ({x_a}, {x_b}) out of range"
        )));
    }
    if prior.p(x_a, x_b) <= 0.0 {
        return Err(Error::ZeroProbabilityFeatures { x_a, x_b });
    }
    let mut sa: Vec<usize> = (0..prior.x_a().len()).collect();
    let mut sb: Vec<usize> = (0..prior.x_b().len()).collect();
    let belief = |sa: &[usize], sb: &[usize]| prior.expected_utilities(sa, sb).expect("true features have mass");

    let mut alice = vec![belief(&[x_a], &sb)];
    let mut bob = vec![belief(&sa, &[x_b])];
    let mut history = Vec::with_capacity(2 * rounds);
    for round in 1..=rounds {
        let msg = alice.last().expect("nonempty").clone();
        sa = refine_a(prior, &sa, &sb, &msg);
        history.push(Message {
            round,
            speaker: Speaker::Alice,
            content: msg,
        });
        let reply = belief(&sa, &[x_b]);
        sb = refine_b(prior, &sa, &sb, &reply);
        history.push(Message {
            round,
            speaker: Speaker::Bob,
            content: reply.clone(),
        });
        bob.push(reply);
        alice.push(belief(&[x_a], &sb));
    }
    Ok(Conversation {
        transcript: Transcript {
            histories: vec![history],
        },
        alice_beliefs: alice,
        bob_beliefs: bob,
        feasible_a: sa,
        feasible_b: sb,
    })
}

/// First round at which the two belief paths are within `zeta` in sup norm.
pub fn agreement_round(alice: &[Vec<f64>], bob: &[Vec<f64>], zeta: f64) -> Result<Option<usize>> {
    if alice.len() != bob.len() {
        return Err(Error::DimensionMismatch(format!(
            "belief histories have {} and {} rounds",
            alice.len(),
            bob.len()
        )));
    }
    Ok(alice
        .iter()
        .zip(bob)
        .position(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= zeta)))
}

/// Largest change, per round, in the prior-expected belief of each party:
/// `(max_a |E μ_A^r − E μ_A^{r−1}|, same for Bob)` for `r = 1..=rounds`.
pub fn martingale_gaps(prior: &DiscreteJointPrior, rounds: usize) -> Result<Vec<(f64, f64)>> {
    let na = prior.num_actions();
    let mut ea = vec![vec![0.0; na]; rounds + 1];
    let mut eb = vec![vec![0.0; na]; rounds + 1];
    for i in 0..prior.x_a().len() {
        for j in 0..prior.x_b().len() {
            let p = prior.p(i, j);
            if p <= 0.0 {
                continue;
            }
            let c = run_straightforward_conversation(prior, i, j, rounds)?;
            for r in 0..=rounds {
                for a in 0..na {
                    ea[r][a] += p * c.alice_beliefs[r][a];
                    eb[r][a] += p * c.bob_beliefs[r][a];
                }
            }
        }
    }
    let step = |e: &[Vec<f64>], r: usize| {
        e[r].iter()
            .zip(&e[r - 1])
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    Ok((1..=rounds).map(|r| (step(&ea, r), step(&eb, r))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::prior_fixture;

    fn prior(pmf: Vec<Vec<Vec<f64>>>) -> DiscreteJointPrior {
        let (na, nb) = (pmf.len(), pmf[0].len());
        DiscreteJointPrior::new(
            (0..na).map(|i| i.to_string()).collect(),
            (0..nb).map(|i| i.to_string()).collect(),
            vec!["0".into(), "1".into()],
            pmf,
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap()
    }

    #[test]
    fn informative_bob_settles_it_in_one_round() {
        // x_b = y; x_a is a weak signal
        let p = prior(vec![
            vec![vec![0.3, 0.0], vec![0.0, 0.2]],
            vec![vec![0.2, 0.0], vec![0.0, 0.3]],
        ]);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let c = run_straightforward_conversation(&p, i, j, 3).unwrap();
            assert_eq!(c.alice_beliefs[1], p.full_information_belief(i, j).unwrap());
            assert_eq!(agreement_round(&c.alice_beliefs, &c.bob_beliefs, 0.0).unwrap(), Some(1));
        }
    }

    #[test]
    fn uninformative_features_keep_the_prior_mean() {
        let p = prior(vec![
            vec![vec![0.06, 0.14], vec![0.06, 0.14]],
            vec![vec![0.09, 0.21], vec![0.09, 0.21]],
        ]);
        let mean = vec![0.3, 0.7];
        let c = run_straightforward_conversation(&p, 1, 0, 4).unwrap();
        for b in c.alice_beliefs.iter().chain(&c.bob_beliefs) {
            assert!(b.iter().zip(&mean).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn zero_probability_features() {
        let p = prior_fixture("xor222").unwrap();
        let c = run_straightforward_conversation(&p, 0, 1, 1).unwrap();
        assert_eq!(c.alice_beliefs.len(), 2);
        let q = prior(vec![vec![vec![0.5, 0.5], vec![0.0, 0.0]]]);
        assert!(matches!(
            run_straightforward_conversation(&q, 0, 1, 1),
            Err(Error::ZeroProbabilityFeatures { x_a: 0, x_b: 1 })
        ));
    }

    #[test]
    fn empty_and_constant_transcripts() {
        let a = ConstantAlice {
            message: vec![0.1, 0.2],
            dim: 2,
        };
        let b = ConstantBob {
            message: vec![0.3],
            dim: 1,
        };
        let t = sample_transcript(&a, &[&b, &b], 0, 0, 0, 1).unwrap();
        assert!(t.histories.iter().all(Vec::is_empty));
        let t = sample_transcript(&a, &[&b], 0, 0, 3, 1).unwrap();
        assert_eq!(t.histories[0].len(), 6);
        for (n, m) in t.histories[0].iter().enumerate() {
            assert_eq!(m.round, n / 2 + 1);
            let want = if n % 2 == 0 { vec![0.1, 0.2] } else { vec![0.3] };
            assert_eq!(m.content, want);
        }
        let wrong = ConstantBob {
            message: vec![0.3, 0.4],
            dim: 1,
        };
        assert!(matches!(
            sample_transcript(&a, &[&wrong], 0, 0, 1, 1),
            Err(Error::RuleDimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn agreement_round_edges() {
        let same = vec![vec![0.5, 0.5]; 3];
        assert_eq!(agreement_round(&same, &same, 0.0).unwrap(), Some(0));
        let far = vec![vec![0.8, 0.5]; 3];
        assert_eq!(agreement_round(&same, &far, 0.2).unwrap(), None);
        assert!(agreement_round(&same, &far[..2], 0.2).is_err());
    }
}
