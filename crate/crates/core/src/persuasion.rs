//! Single-sender scheme optimization and joint evaluation of independent senders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{best_response, Matrix, PersuasionInstance, ReceiverMode, SignalingScheme};
use crate::optim::{solve_lp, LpProblem, LpStatus};
use crate::schemes::{self, SchemeTable};

/// Best deterministic scheme for one sender, found by exhaustive enumeration.
///
/// Ties go to the lexicographically first map.
pub fn monopoly_deterministic_scheme(
    instance: &PersuasionInstance,
    bob_index: usize,
    mode: ReceiverMode,
) -> Result<(SignalingScheme, f64)> {
    check_bob(instance, bob_index)?;
    let table = SchemeTable::build(instance, mode)?;
    let s = table.monopoly(bob_index);
    let scheme = SignalingScheme::deterministic(&table.map(s), instance.num_actions())?;
    Ok((scheme, table.bobs[bob_index][s]))
}

fn check_bob(instance: &PersuasionInstance, bob_index: usize) -> Result<()> {
    if bob_index >= instance.num_bobs() {
        return Err(Error::DimensionMismatch(format!(
            "sender {bob_index} out of range for {} senders",
            instance.num_bobs()
        )));
    }
    Ok(())
}

impl SchemeTable {
    /// Index of a sender's monopoly scheme in this table.
    pub fn monopoly(&self, bob_index: usize) -> usize {
        SchemeTable::argmax(&self.bobs[bob_index])
    }
}

/// Sender-optimal obedient recommendation scheme, allowing randomization.
///
/// Messages are action recommendations; the returned scheme has one message
/// per action.
pub fn optimal_persuasion_lp(instance: &PersuasionInstance, sender_utility: &Matrix) -> Result<(SignalingScheme, f64)> {
    let (ns, na) = (instance.num_states(), instance.num_actions());
    if sender_utility.len() != ns || sender_utility.iter().any(|r| r.len() != na) {
        return Err(Error::DimensionMismatch(format!("sender utility must be {ns}x{na}")));
    }
    let prior = instance.prior();
    let alice = instance.alice();
    let var = |y: usize, a: usize| y * na + a;
    let mut objective = vec![0.0; ns * na];
    for y in 0..ns {
        for a in 0..na {
            objective[var(y, a)] = -prior[y] * sender_utility[y][a];
        }
    }
    let mut lp = LpProblem::new(objective);
    for y in 0..ns {
        let mut row = vec![0.0; ns * na];
        for a in 0..na {
            row[var(y, a)] = 1.0;
        }
        lp.add_eq(row, 1.0);
    }
    for a in 0..na {
        for alt in (0..na).filter(|&b| b != a) {
            let mut row = vec![0.0; ns * na];
            for y in 0..ns {
                row[var(y, a)] = prior[y] * (alice[y][a] - alice[y][alt]);
            }
            lp.add_ge(row, 0.0);
        }
    }
    let solution = solve_lp(&lp)?;
    if solution.status != LpStatus::Optimal {
        // full revelation is always feasible, so anything else is numerical
        return Err(Error::NumericalFailure(format!(
            "persuasion LP returned {:?}",
            solution.status
        )));
    }
    let rows: Matrix = (0..ns)
        .map(|y| {
            let raw: Vec<f64> = (0..na).map(|a| solution.point[var(y, a)].max(0.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        })
        .collect();
    Ok((SignalingScheme::new(rows)?, -solution.value))
}

/// What each party gets when Alice combines independent signals from every sender.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObliviousOutcome {
    pub alice_utility: f64,
    pub bob_utilities: Vec<f64>,
}

/// Evaluates the product signal structure formed by one scheme per sender.
///
/// Alice sees every message, forms the joint posterior and best-responds.
pub fn oblivious_joint_evaluation(
    instance: &PersuasionInstance,
    schemes: &[SignalingScheme],
) -> Result<ObliviousOutcome> {
    if schemes.len() != instance.num_bobs() {
        return Err(Error::DimensionMismatch(format!(
            "{} schemes for {} senders",
            schemes.len(),
            instance.num_bobs()
        )));
    }
    if let Some(s) = schemes.iter().find(|s| s.num_states() != instance.num_states()) {
        return Err(Error::DimensionMismatch(format!(
            "scheme covers {} states, instance has {}",
            s.num_states(),
            instance.num_states()
        )));
    }
    let counts: Vec<usize> = schemes.iter().map(SignalingScheme::message_count).collect();
    let profiles = counts
        .iter()
        .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128))
        .unwrap_or(u128::MAX);
    if profiles > schemes::ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            count: profiles,
            cap: schemes::ENUMERATION_CAP,
        });
    }

    let ns = instance.num_states();
    let mut alice_total = 0.0;
    let mut bob_totals = vec![0.0; instance.num_bobs()];
    let mut profile = vec![0usize; schemes.len()];
    let mut joint = vec![0.0; ns];
    for _ in 0..profiles {
        for (y, j) in joint.iter_mut().enumerate() {
            *j = instance.prior()[y]
                * schemes
                    .iter()
                    .zip(&profile)
                    .map(|(s, &m)| s.rows()[y][m])
                    .product::<f64>();
        }
        let mass: f64 = joint.iter().sum();
        if mass > 0.0 {
            let post: Vec<f64> = joint.iter().map(|j| j / mass).collect();
            let a = best_response(instance, &post);
            for (y, j) in joint.iter().enumerate() {
                alice_total += j * instance.alice()[y][a];
                for (t, b) in bob_totals.iter_mut().zip(instance.bobs()) {
                    *t += j * b.u[y][a];
                }
            }
        }
        // odometer, last sender fastest
        for i in (0..profile.len()).rev() {
            profile[i] += 1;
            if profile[i] < counts[i] {
                break;
            }
            profile[i] = 0;
        }
    }
    Ok(ObliviousOutcome {
        alice_utility: alice_total,
        bob_utilities: bob_totals,
    })
}

/// Each sender's LP-optimal scheme, chosen without regard to the others.
pub fn oblivious_optimal_schemes(instance: &PersuasionInstance) -> Result<Vec<SignalingScheme>> {
    instance
        .bobs()
        .iter()
        .map(|b| optimal_persuasion_lp(instance, &b.u).map(|(s, _)| s))
        .collect()
}

/// The fully revealing scheme, which attains Alice's first-best.
pub fn alice_optimal_scheme(instance: &PersuasionInstance) -> SignalingScheme {
    SignalingScheme::revealing(instance.num_states())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::instance::{expected_utility, first_best, NamedUtility};
    use approx::assert_abs_diff_eq;

    #[test]
    fn prosecutor_monopoly_always_convicts() {
        let b = fixtures::appendix_b();
        let (scheme, value) = monopoly_deterministic_scheme(&b, 0, ReceiverMode::Obedient).unwrap();
        assert_eq!(scheme.deterministic_map(), Some(vec![1, 1]));
        assert_abs_diff_eq!(value, 5.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn aligned_sender_gets_first_best() {
        let s1 = fixtures::synthetic1();
        let clone = s1
            .with_bobs(&[0])
            .and_then(|i| {
                i.with_bob(NamedUtility {
                    name: "clone".into(),
                    u: s1.alice().clone(),
                })
            })
            .and_then(|i| i.with_bobs(&[1]))
            .unwrap();
        for mode in [ReceiverMode::Obedient, ReceiverMode::PosteriorBestResponse] {
            let (_, v) = monopoly_deterministic_scheme(&clone, 0, mode).unwrap();
            assert_abs_diff_eq!(v, first_best(&clone), epsilon = 1e-12);
        }
    }

    #[test]
    fn lp_values_on_appendix_b() {
        let b = fixtures::appendix_b();
        let (_, alice) = optimal_persuasion_lp(&b, b.alice()).unwrap();
        assert_abs_diff_eq!(alice, 2.0, epsilon = 1e-9);

        let (scheme, defense) = optimal_persuasion_lp(&b, b.bob(1)).unwrap();
        assert_abs_diff_eq!(defense, 1.0, epsilon = 1e-9);
        let acquit: f64 = b.prior().iter().zip(scheme.rows()).map(|(p, r)| p * r[0]).sum();
        assert_abs_diff_eq!(acquit, 2.0 / 3.0, epsilon = 1e-9);

        let (scheme, prosecutor) = optimal_persuasion_lp(&b, b.bob(0)).unwrap();
        assert_abs_diff_eq!(prosecutor, 5.0 / 3.0, epsilon = 1e-9);
        assert_eq!(scheme.deterministic_map(), Some(vec![1, 1]));
    }

    #[test]
    fn flat_sender_utility() {
        let b = fixtures::appendix_b();
        let flat = vec![vec![0.4; 2]; 2];
        let (_, v) = optimal_persuasion_lp(&b, &flat).unwrap();
        assert_abs_diff_eq!(v, 0.4, epsilon = 1e-9);
    }

    #[test]
    fn oblivious_appendix_b() {
        let b = fixtures::appendix_b();
        let schemes = oblivious_optimal_schemes(&b).unwrap();
        let out = oblivious_joint_evaluation(&b, &schemes).unwrap();
        assert_abs_diff_eq!(out.alice_utility, 5.0 / 3.0, epsilon = 1e-9);

        let revealing = vec![SignalingScheme::revealing(2); 2];
        let out = oblivious_joint_evaluation(&b, &revealing).unwrap();
        assert_abs_diff_eq!(out.alice_utility, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn uninformative_partner_changes_nothing() {
        let b = fixtures::appendix_b();
        let defense = SignalingScheme::new(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let null = SignalingScheme::uninformative(2, 3, 2).unwrap();
        let joint = oblivious_joint_evaluation(&b, &[null, defense.clone()]).unwrap();
        let single = expected_utility(&b, &defense, ReceiverMode::PosteriorBestResponse, b.alice()).unwrap();
        assert_abs_diff_eq!(joint.alice_utility, single, epsilon = 1e-12);
    }

    #[test]
    fn alice_optimal_is_revealing() {
        for (_, inst) in fixtures::all() {
            let s = alice_optimal_scheme(&inst);
            let v = expected_utility(&inst, &s, ReceiverMode::PosteriorBestResponse, inst.alice()).unwrap();
            assert_abs_diff_eq!(v, first_best(&inst), epsilon = 1e-12);
        }
    }

    #[test]
    fn wrong_scheme_count() {
        let b = fixtures::appendix_b();
        let err = oblivious_joint_evaluation(&b, &[SignalingScheme::revealing(2)]);
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }
}
