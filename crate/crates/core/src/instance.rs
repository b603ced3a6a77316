//! Persuasion instances, signaling schemes and the receiver's Bayesian response.
//!
//! Utility matrices are stored row-major as `[state][action]`.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for validating probability vectors read from input.
pub const INPUT_TOL: f64 = 1e-12;
/// Tolerance for computational comparisons.
pub const COMPUTE_TOL: f64 = 1e-9;

pub type Matrix = Vec<Vec<f64>>;

/// A named sender utility matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedUtility {
    pub name: String,
    pub u: Matrix,
}

/// States, actions, a prior and the utilities of the receiver and every sender.
#[derive(Debug, Clone, PartialEq)]
pub struct PersuasionInstance {
    states: Vec<String>,
    actions: Vec<String>,
    prior: Vec<f64>,
    alice: Matrix,
    bobs: Vec<NamedUtility>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    states: Vec<String>,
    actions: Vec<String>,
    prior: Vec<f64>,
    alice: Matrix,
    bobs: Vec<NamedUtility>,
}

fn check_probability_vector(v: &[f64], what: &str) -> Result<()> {
    if let Some((i, x)) = v.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
        return Err(Error::Invariant(format!(
            "{what}[{i}] = {x} is not a nonnegative number"
        )));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > INPUT_TOL {
        return Err(Error::Invariant(format!("{what} sums to {sum}, expected 1")));
    }
    Ok(())
}

fn check_matrix(m: &Matrix, rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.len() != rows {
        return Err(Error::schema(what, format!("expected {rows} rows, found {}", m.len())));
    }
    for (y, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::schema(
                format!("{what}[{y}]"),
                format!("expected {cols} entries, found {}", row.len()),
            ));
        }
        if let Some((a, x)) = row.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::Invariant(format!("{what}[{y}][{a}] = {x} is not finite")));
        }
    }
    Ok(())
}

impl PersuasionInstance {
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        prior: Vec<f64>,
        alice: Matrix,
        bobs: Vec<NamedUtility>,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::schema("states", "at least one state is required"));
        }
        if actions.is_empty() {
            return Err(Error::schema("actions", "at least one action is required"));
        }
        if bobs.is_empty() {
            return Err(Error::schema("bobs", "at least one sender is required"));
        }
        if prior.len() != states.len() {
            return Err(Error::schema(
                "prior",
                format!("expected {} entries, found {}", states.len(), prior.len()),
            ));
        }
        check_probability_vector(&prior, "prior")?;
        check_matrix(&alice, states.len(), actions.len(), "alice")?;
        for (i, bob) in bobs.iter().enumerate() {
            check_matrix(&bob.u, states.len(), actions.len(), &format!("bobs[{i}].u"))?;
        }
        Ok(Self {
            states,
            actions,
            prior,
            alice,
            bobs,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn alice(&self) -> &Matrix {
        &self.alice
    }

    pub fn bobs(&self) -> &[NamedUtility] {
        &self.bobs
    }

    pub fn bob(&self, index: usize) -> &Matrix {
        &self.bobs[index].u
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_bobs(&self) -> usize {
        self.bobs.len()
    }

    /// Finds a sender by name or by decimal index.
    pub fn bob_index(&self, key: &str) -> Option<usize> {
        self.bobs
            .iter()
            .position(|b| b.name == key)
            .or_else(|| key.parse::<usize>().ok().filter(|&i| i < self.bobs.len()))
    }

    /// True when every utility lies in `[0, 1]`.
    pub fn is_unit_bounded(&self) -> bool {
        std::iter::once(&self.alice)
            .chain(self.bobs.iter().map(|b| &b.u))
            .flatten()
            .flatten()
            .all(|x| (0.0..=1.0).contains(x))
    }

    /// The same instance under a different prior.
    pub fn with_prior(&self, prior: Vec<f64>) -> Result<Self> {
        Self::new(
            self.states.clone(),
            self.actions.clone(),
            prior,
            self.alice.clone(),
            self.bobs.clone(),
        )
    }

    pub fn with_uniform_prior(&self) -> Self {
        let n = self.num_states();
        let mut prior = vec![1.0 / n as f64; n];
        // keep the sum within input tolerance for awkward n
        let drift: f64 = 1.0 - prior.iter().sum::<f64>();
        prior[0] += drift;
        self.with_prior(prior).expect("uniform prior is valid")
    }

    /// Restricts the sender list to the given indices, in order.
    pub fn with_bobs(&self, members: &[usize]) -> Result<Self> {
        let bobs = members
            .iter()
            .map(|&i| {
                self.bobs
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::Invariant(format!("sender index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            self.states.clone(),
            self.actions.clone(),
            self.prior.clone(),
            self.alice.clone(),
            bobs,
        )
    }

    /// Appends a sender.
    pub fn with_bob(&self, bob: NamedUtility) -> Result<Self> {
        let mut bobs = self.bobs.clone();
        bobs.push(bob);
        Self::new(
            self.states.clone(),
            self.actions.clone(),
            self.prior.clone(),
            self.alice.clone(),
            bobs,
        )
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)
            .map_err(|e| Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        Self::new(file.states, file.actions, file.prior, file.alice, file.bobs)
    }

    pub fn to_json_string(&self) -> String {
        let file = InstanceFile {
            states: self.states.clone(),
            actions: self.actions.clone(),
            prior: self.prior.clone(),
            alice: self.alice.clone(),
            bobs: self.bobs.clone(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<PersuasionInstance> {
    let text = std::fs::read_to_string(path)?;
    PersuasionInstance::from_json_str(&text)
}

pub fn save_instance(instance: &PersuasionInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, instance.to_json_string())?;
    Ok(())
}

/// A row-stochastic map from states to messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalingScheme {
    rows: Matrix,
}

impl SignalingScheme {
    pub fn new(rows: Matrix) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || width == 0 {
            return Err(Error::Invariant(
                "scheme needs at least one state and one message".into(),
            ));
        }
        for (y, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::DimensionMismatch(format!(
                    "scheme row {y} has {} messages, expected {width}",
                    row.len()
                )));
            }
            check_probability_vector(row, &format!("scheme row {y}"))?;
        }
        Ok(Self { rows })
    }

    /// Sends message `map[y]` in state `y`.
    pub fn deterministic(map: &[usize], message_count: usize) -> Result<Self> {
        let rows = map
            .iter()
            .map(|&m| {
                if m >= message_count {
                    return Err(Error::Invariant(format!(
                        "message {m} out of range for {message_count} messages"
                    )));
                }
                let mut row = vec![0.0; message_count];
                row[m] = 1.0;
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// Fully revealing: message = state.
    pub fn revealing(num_states: usize) -> Self {
        let map: Vec<usize> = (0..num_states).collect();
        Self::deterministic(&map, num_states).expect("identity scheme is valid")
    }

    /// Sends the same message in every state.
    pub fn uninformative(num_states: usize, message_count: usize, message: usize) -> Result<Self> {
        Self::deterministic(&vec![message; num_states], message_count)
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn message_count(&self) -> usize {
        self.rows[0].len()
    }

    /// The state-to-message map when every row is a point mass.
    pub fn deterministic_map(&self) -> Option<Vec<usize>> {
        self.rows.iter().map(|row| row.iter().position(|&p| p == 1.0)).collect()
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic_map().is_some()
    }
}

/// How the receiver turns a message into an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReceiverMode {
    /// Play the message itself as the action.
    Obedient,
    /// Bayes-update on the message, then play the lowest-index best action.
    #[default]
    PosteriorBestResponse,
}

/// Expected utility of each action under some belief.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefVector(pub Vec<f64>);

impl BeliefVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sup_distance(&self, other: &BeliefVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A set of `(action, state)` outcomes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSet(pub BTreeSet<(usize, usize)>);

impl OutcomeSet {
    pub fn insert(&mut self, action: usize, state: usize) {
        self.0.insert((action, state));
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_scheme(instance: &PersuasionInstance, scheme: &SignalingScheme) -> Result<()> {
    if scheme.num_states() != instance.num_states() {
        return Err(Error::DimensionMismatch(format!(
            "scheme covers {} states, instance has {}",
            scheme.num_states(),
            instance.num_states()
        )));
    }
    Ok(())
}

/// Marginal probability of each message under the prior.
pub fn message_marginals(instance: &PersuasionInstance, scheme: &SignalingScheme) -> Vec<f64> {
    let mut marginals = vec![0.0; scheme.message_count()];
    for (p, row) in instance.prior().iter().zip(scheme.rows()) {
        for (m, q) in row.iter().enumerate() {
            marginals[m] += p * q;
        }
    }
    marginals
}

/// Posterior over states after observing `message`.
pub fn posterior(instance: &PersuasionInstance, scheme: &SignalingScheme, message: usize) -> Result<Vec<f64>> {
    check_scheme(instance, scheme)?;
    if message >= scheme.message_count() {
        return Err(Error::Invariant(format!(
            "message {message} out of range for {} messages",
            scheme.message_count()
        )));
    }
    let joint: Vec<f64> = instance
        .prior()
        .iter()
        .zip(scheme.rows())
        .map(|(p, row)| p * row[message])
        .collect();
    let total: f64 = joint.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroProbabilityMessage { message });
    }
    Ok(joint.into_iter().map(|j| j / total).collect())
}

/// Expected utility of every action under a distribution over states.
pub fn belief_vector(utility: &Matrix, posterior: &[f64]) -> BeliefVector {
    let actions = utility.first().map(Vec::len).unwrap_or(0);
    let mut values = vec![0.0; actions];
    for (p, row) in posterior.iter().zip(utility) {
        if *p == 0.0 {
            continue;
        }
        for (v, u) in values.iter_mut().zip(row) {
            *v += p * u;
        }
    }
    BeliefVector(values)
}

/// Values closer than this are treated as tied when picking a best action.
pub const TIE_TOL: f64 = 1e-12;

/// Index of the largest entry; ties (within [`TIE_TOL`]) go to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] + TIE_TOL {
            best = i;
        }
    }
    best
}

/// Alice's best action under `posterior`, lowest index on ties.
pub fn best_response(instance: &PersuasionInstance, posterior: &[f64]) -> usize {
    argmax_lowest(&belief_vector(instance.alice(), posterior).0)
}

/// Action Alice plays after each message; `None` for messages that never occur.
pub fn message_actions(
    instance: &PersuasionInstance,
    scheme: &SignalingScheme,
    mode: ReceiverMode,
) -> Result<Vec<Option<usize>>> {
    check_scheme(instance, scheme)?;
    match mode {
        ReceiverMode::Obedient => {
            if scheme.message_count() != instance.num_actions() {
                return Err(Error::MessageNotAnAction {
                    messages: scheme.message_count(),
                    actions: instance.num_actions(),
                });
            }
            Ok((0..scheme.message_count()).map(Some).collect())
        }
        ReceiverMode::PosteriorBestResponse => (0..scheme.message_count())
            .map(|m| match posterior(instance, scheme, m) {
                Ok(post) => Ok(Some(best_response(instance, &post))),
                Err(Error::ZeroProbabilityMessage { .. }) => Ok(None),
                Err(e) => Err(e),
            })
            .collect(),
    }
}

/// Joint distribution over `[state][action]` induced by a scheme and the receiver.
pub fn outcome_distribution(
    instance: &PersuasionInstance,
    scheme: &SignalingScheme,
    mode: ReceiverMode,
) -> Result<Matrix> {
    let actions = message_actions(instance, scheme, mode)?;
    let mut joint = vec![vec![0.0; instance.num_actions()]; instance.num_states()];
    for (y, (p, row)) in instance.prior().iter().zip(scheme.rows()).enumerate() {
        for (m, q) in row.iter().enumerate() {
            let mass = p * q;
            if mass > 0.0 {
                let a = actions[m].expect("message with positive mass has an action");
                joint[y][a] += mass;
            }
        }
    }
    Ok(joint)
}

/// Expected value of `utility` when the receiver responds to `scheme`.
pub fn expected_utility(
    instance: &PersuasionInstance,
    scheme: &SignalingScheme,
    mode: ReceiverMode,
    utility: &Matrix,
) -> Result<f64> {
    let joint = outcome_distribution(instance, scheme, mode)?;
    Ok(joint
        .iter()
        .zip(utility)
        .flat_map(|(jr, ur)| jr.iter().zip(ur).map(|(j, u)| j * u))
        .sum())
}

/// Alice's utility with full information about the state.
pub fn first_best(instance: &PersuasionInstance) -> f64 {
    instance
        .prior()
        .iter()
        .zip(instance.alice())
        .map(|(p, row)| p * row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum()
}

/// Lowest-index best action in each state.
pub fn alice_optimal_actions(instance: &PersuasionInstance) -> Vec<usize> {
    instance.alice().iter().map(|row| argmax_lowest(row)).collect()
}
