use serde::{Deserialize, Serialize};

use super::{Committee, STRICT_TOL};
use crate::error::{Error, Result};
use crate::instance::{ReceiverMode, SignalingScheme};
use crate::schemes::SchemeTable;

/// One entry of a best-response trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrdStep {
    /// Zero for the initial profile.
    pub round: usize,
    /// Sender index that deviated, `None` for the initial profile.
    pub deviator: Option<usize>,
    pub scheme: Vec<usize>,
    /// Sender index Alice consults after this step.
    pub selected: usize,
    pub alice_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrdTrajectory {
    pub steps: Vec<BrdStep>,
    pub converged: bool,
    pub rounds: usize,
    pub max_rounds: usize,
    pub final_scheme: SignalingScheme,
    pub final_index: usize,
    pub selected: usize,
    /// Each member's committed scheme index at the end, in member order.
    pub profile: Vec<usize>,
}

impl BrdTrajectory {
    pub fn alice_utility(&self) -> f64 {
        self.steps.last().expect("trajectory has an initial step").alice_utility
    }

    /// Turns a non-converged run into an error.
    pub fn into_result(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                max_rounds: self.max_rounds,
            })
        }
    }
}

pub fn default_max_rounds(table: &SchemeTable, committee_size: usize) -> usize {
    table.len() * committee_size * 4
}

/// Best-response dynamics on a precomputed scheme table.
///
/// Members start at their monopoly schemes. In each round the non-selected
/// members, in index order, may switch to a scheme that strictly improves
/// both their own value (relative to the currently selected scheme) and
/// Alice's. A switching member takes its best such scheme, and Alice then
/// consults it.
pub fn brd_on(table: &SchemeTable, members: &[usize], max_rounds: usize) -> Result<BrdTrajectory> {
    if members.is_empty() {
        return Err(Error::Invariant("a committee needs at least one member".into()));
    }
    let mut profile: Vec<usize> = members.iter().map(|&j| table.monopoly(j)).collect();
    // argmax over members, lowest member position on ties
    let mut sel = 0;
    for (pos, &s) in profile.iter().enumerate() {
        if table.alice[s] > table.alice[profile[sel]] {
            sel = pos;
        }
    }
    let mut steps = vec![BrdStep {
        round: 0,
        deviator: None,
        scheme: table.map(profile[sel]),
        selected: members[sel],
        alice_utility: table.alice[profile[sel]],
    }];

    let mut converged = false;
    let mut rounds = 0;
    while rounds < max_rounds {
        rounds += 1;
        let mut changed = false;
        for pos in 0..members.len() {
            if pos == sel {
                continue;
            }
            let j = members[pos];
            let current = profile[sel];
            let (alice_base, own_base) = (table.alice[current], table.bobs[j][current]);
            let mut best: Option<usize> = None;
            for f in 0..table.len() {
                if table.alice[f] > alice_base + STRICT_TOL
                    && table.bobs[j][f] > own_base + STRICT_TOL
                    && best.is_none_or(|b| table.bobs[j][f] > table.bobs[j][b])
                {
                    best = Some(f);
                }
            }
            if let Some(f) = best {
                profile[pos] = f;
                sel = pos;
                changed = true;
                steps.push(BrdStep {
                    round: rounds,
                    deviator: Some(j),
                    scheme: table.map(f),
                    selected: j,
                    alice_utility: table.alice[f],
                });
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }

    let final_index = profile[sel];
    Ok(BrdTrajectory {
        steps,
        converged,
        rounds,
        max_rounds,
        final_scheme: SignalingScheme::deterministic(&table.map(final_index), table.num_actions)?,
        final_index,
        selected: members[sel],
        profile,
    })
}

/// Runs best-response dynamics for a committee.
///
/// A run that hits `max_rounds` is still returned, with `converged` unset.
pub fn best_response_dynamics(
    committee: &Committee<'_>,
    mode: ReceiverMode,
    max_rounds: Option<usize>,
) -> Result<BrdTrajectory> {
    let table = SchemeTable::build(committee.instance(), mode)?;
    let cap = max_rounds.unwrap_or_else(|| default_max_rounds(&table, committee.len()));
    if cap == 0 {
        return Err(Error::Domain("max_rounds must be at least 1".into()));
    }
    brd_on(&table, committee.members(), cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::market::is_stable;

    #[test]
    fn singleton_committee_stays_put() {
        let inst = fixtures::synthetic1();
        let c = Committee::new(&inst, vec![2]).unwrap();
        let t = best_response_dynamics(&c, ReceiverMode::PosteriorBestResponse, None).unwrap();
        assert!(t.converged);
        assert_eq!(t.steps.len(), 1);
        let table = SchemeTable::build(&inst, ReceiverMode::PosteriorBestResponse).unwrap();
        assert_eq!(t.final_index, table.monopoly(2));
    }

    #[test]
    fn appendix_b_improves_on_monopolies() {
        let inst = fixtures::appendix_b();
        let c = Committee::all(&inst);
        let t = best_response_dynamics(&c, ReceiverMode::PosteriorBestResponse, None)
            .unwrap()
            .into_result()
            .unwrap();
        let table = SchemeTable::build(&inst, ReceiverMode::PosteriorBestResponse).unwrap();
        let single = (0..2).map(|j| table.alice[table.monopoly(j)]).fold(f64::MIN, f64::max);
        assert!(t.alice_utility() >= single - 1e-12);
        assert!(is_stable(&table, &[0, 1], t.final_index));
    }

    #[test]
    fn alice_utility_strictly_increases_along_trajectory() {
        let inst = fixtures::synthetic2();
        let c = Committee::all(&inst);
        let t = best_response_dynamics(&c, ReceiverMode::PosteriorBestResponse, None).unwrap();
        for w in t.steps.windows(2) {
            assert!(w[1].alice_utility > w[0].alice_utility);
        }
    }

    #[test]
    fn round_cap_reports_non_convergence() {
        let inst = fixtures::synthetic2();
        let table = SchemeTable::build(&inst, ReceiverMode::PosteriorBestResponse).unwrap();
        let full = brd_on(&table, &[0, 1, 2, 3, 4], 1000).unwrap();
        if full.rounds > 1 {
            let cut = brd_on(&table, &[0, 1, 2, 3, 4], 1).unwrap();
            assert!(!cut.converged);
            assert!(matches!(cut.into_result(), Err(Error::NotConverged { max_rounds: 1 })));
        }
    }
}
