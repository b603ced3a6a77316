use serde::{Deserialize, Serialize};

use super::{Committee, EquilibriumReport, TIGHT_TOL};
use crate::error::{Error, Result};
use crate::instance::{alice_optimal_actions, first_best, OutcomeSet, PersuasionInstance};
use crate::optim::{solve_lp, LpProblem, LpStatus};
use crate::schemes::{realized_actions, SchemeTable};

/// Smallest sup-norm gap between Alice's utility and an offset, simplex-weighted
/// mix of the members' utilities, over the outcomes that matter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisalignmentScore {
    pub epsilon: f64,
    /// Simplex weights, in member order.
    pub weights: Vec<f64>,
    pub offset: f64,
    /// Outcomes reachable in some stable symmetric profile.
    pub equilibrium_outcomes: OutcomeSet,
    /// Alice's full-information outcomes.
    pub optimal_outcomes: OutcomeSet,
}

/// Outcomes `(action, state)` realized by the stable schemes of `report`,
/// restricted to states with positive prior.
fn equilibrium_outcomes(instance: &PersuasionInstance, report: &EquilibriumReport) -> OutcomeSet {
    let mut out = OutcomeSet::default();
    for s in &report.stable {
        let actions = realized_actions(instance, &s.map, report.mode);
        for (y, &a) in actions.iter().enumerate() {
            if instance.prior()[y] > 0.0 {
                out.insert(a, y);
            }
        }
    }
    out
}

fn optimal_outcomes(instance: &PersuasionInstance) -> OutcomeSet {
    let mut out = OutcomeSet::default();
    for (y, a) in alice_optimal_actions(instance).into_iter().enumerate() {
        if instance.prior()[y] > 0.0 {
            out.insert(a, y);
        }
    }
    out
}

/// Solves the misalignment LP for `members` against the outcomes of `report`.
pub fn misalignment_on(
    instance: &PersuasionInstance,
    members: &[usize],
    report: &EquilibriumReport,
) -> Result<MisalignmentScore> {
    if report.stable.is_empty() {
        return Err(Error::Invariant("equilibrium report is empty".into()));
    }
    let m = members.len();
    let (c, eps) = (m, m + 1);
    let mut objective = vec![0.0; m + 2];
    objective[eps] = 1.0;
    let mut lp = LpProblem::new(objective);
    lp.set_free(c);
    let mut simplex = vec![1.0; m + 2];
    simplex[c] = 0.0;
    simplex[eps] = 0.0;
    lp.add_eq(simplex, 1.0);

    let mix_row = |a: usize, y: usize, sign: f64| {
        let mut row: Vec<f64> = members.iter().map(|&j| sign * instance.bob(j)[y][a]).collect();
        row.push(sign);
        row.push(-1.0);
        row
    };
    let ne = equilibrium_outcomes(instance, report);
    let opt = optimal_outcomes(instance);
    // mix + c - u_A <= eps
    for (a, y) in ne.iter() {
        lp.add_le(mix_row(a, y, 1.0), instance.alice()[y][a]);
    }
    // u_A - mix - c <= eps
    for (a, y) in opt.iter() {
        lp.add_le(mix_row(a, y, -1.0), -instance.alice()[y][a]);
    }

    let solution = solve_lp(&lp)?;
    if solution.status != LpStatus::Optimal {
        return Err(Error::NumericalFailure(format!(
            "misalignment LP returned {:?}",
            solution.status
        )));
    }
    Ok(MisalignmentScore {
        epsilon: solution.point[eps].max(0.0),
        weights: solution.point[..m].to_vec(),
        offset: solution.point[c],
        equilibrium_outcomes: ne,
        optimal_outcomes: opt,
    })
}

pub fn misalignment_epsilon(committee: &Committee<'_>, report: &EquilibriumReport) -> Result<MisalignmentScore> {
    misalignment_on(committee.instance(), committee.members(), report)
}

/// The utility guarantee `first_best − 2ε` and how the equilibria compare to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub first_best: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub slack: f64,
    pub tight: bool,
}

pub fn check_theorem_bound(
    committee: &Committee<'_>,
    report: &EquilibriumReport,
    score: &MisalignmentScore,
) -> TheoremCheck {
    theorem_check(committee.instance(), report.min_alice_utility, score.epsilon)
}

pub(crate) fn theorem_check(instance: &PersuasionInstance, min_alice: f64, epsilon: f64) -> TheoremCheck {
    let fb = first_best(instance);
    let bound = fb - 2.0 * epsilon;
    let slack = min_alice - bound;
    TheoremCheck {
        first_best: fb,
        bound,
        satisfied: slack >= -1e-8,
        slack,
        tight: slack.abs() <= TIGHT_TOL,
    }
}

impl SchemeTable {
    /// Convenience for callers holding a table: equilibria plus score in one go.
    pub fn score(
        &self,
        instance: &PersuasionInstance,
        members: &[usize],
    ) -> Result<(EquilibriumReport, MisalignmentScore)> {
        let report = super::equilibria_on(self, members);
        let score = misalignment_on(instance, members, &report)?;
        Ok((report, score))
    }
}
