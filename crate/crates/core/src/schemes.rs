//! Enumeration of deterministic state-to-action schemes.
//!
//! A deterministic scheme is a map `f: states → actions`; messages are
//! identified with actions. Schemes are indexed in lexicographic order with
//! state 0 as the most significant digit, so index 0 maps every state to
//! action 0 and the last index maps every state to the last action.

use crate::error::{Error, Result};
use crate::instance::{argmax_lowest, belief_vector, Matrix, PersuasionInstance, ReceiverMode};

/// Largest scheme space the enumerators will walk.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// Number of deterministic schemes, or an error above the cap.
pub fn scheme_count(instance: &PersuasionInstance) -> Result<usize> {
    let count = (instance.num_actions() as u128)
        .checked_pow(instance.num_states() as u32)
        .unwrap_or(u128::MAX);
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            count,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(count as usize)
}

/// Decodes a scheme index into its state-to-action map.
pub fn decode(index: usize, num_states: usize, num_actions: usize) -> Vec<usize> {
    let mut map = vec![0; num_states];
    let mut rest = index;
    for slot in map.iter_mut().rev() {
        *slot = rest % num_actions;
        rest /= num_actions;
    }
    map
}

pub fn encode(map: &[usize], num_actions: usize) -> usize {
    map.iter().fold(0, |acc, &a| acc * num_actions + a)
}

/// Action Alice takes in each state when `map` is committed.
pub fn realized_actions(instance: &PersuasionInstance, map: &[usize], mode: ReceiverMode) -> Vec<usize> {
    match mode {
        ReceiverMode::Obedient => map.to_vec(),
        ReceiverMode::PosteriorBestResponse => {
            let prior = instance.prior();
            let alice = instance.alice();
            let mut response = vec![usize::MAX; instance.num_actions()];
            map.iter()
                .map(|&m| {
                    if response[m] == usize::MAX {
                        let mut post: Vec<f64> = map
                            .iter()
                            .zip(prior)
                            .map(|(&my, &p)| if my == m { p } else { 0.0 })
                            .collect();
                        let mass: f64 = post.iter().sum();
                        if mass > 0.0 {
                            post.iter_mut().for_each(|p| *p /= mass);
                        } else {
                            // a null message: any response carries zero weight
                            for (p, &my) in post.iter_mut().zip(map) {
                                *p = if my == m { 1.0 } else { 0.0 };
                            }
                        }
                        let value = belief_vector(alice, &post).0;
                        response[m] = argmax_lowest(&value);
                    }
                    response[m]
                })
                .collect()
        }
    }
}

/// Expected value of `utility` when Alice plays `actions[y]` in state `y`.
pub fn value_of(instance: &PersuasionInstance, actions: &[usize], utility: &Matrix) -> f64 {
    instance
        .prior()
        .iter()
        .zip(actions)
        .zip(utility)
        .map(|((p, &a), row)| p * row[a])
        .sum()
}

/// Every deterministic scheme with its realized actions and everyone's value.
#[derive(Debug, Clone)]
pub struct SchemeTable {
    pub num_states: usize,
    pub num_actions: usize,
    pub mode: ReceiverMode,
    /// `actions[s][y]`: Alice's action in state `y` under scheme `s`.
    pub actions: Vec<Vec<usize>>,
    /// Alice's value of each scheme.
    pub alice: Vec<f64>,
    /// `bobs[i][s]`: sender `i`'s value of scheme `s`.
    pub bobs: Vec<Vec<f64>>,
}

impl SchemeTable {
    pub fn build(instance: &PersuasionInstance, mode: ReceiverMode) -> Result<Self> {
        let count = scheme_count(instance)?;
        let (ns, na) = (instance.num_states(), instance.num_actions());
        let actions: Vec<Vec<usize>> = (0..count)
            .map(|s| realized_actions(instance, &decode(s, ns, na), mode))
            .collect();
        let alice = actions
            .iter()
            .map(|a| value_of(instance, a, instance.alice()))
            .collect();
        let bobs = instance
            .bobs()
            .iter()
            .map(|b| actions.iter().map(|a| value_of(instance, a, &b.u)).collect())
            .collect();
        Ok(Self {
            num_states: ns,
            num_actions: na,
            mode,
            actions,
            alice,
            bobs,
        })
    }

    pub fn len(&self) -> usize {
        self.alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty()
    }

    pub fn map(&self, scheme: usize) -> Vec<usize> {
        decode(scheme, self.num_states, self.num_actions)
    }

    /// First scheme (lexicographically) maximizing `values`.
    pub fn argmax(values: &[f64]) -> usize {
        argmax_lowest(values)
    }
}
