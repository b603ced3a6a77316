use serde::{Deserialize, Serialize};

use super::{Committee, STRICT_TOL};
use crate::error::Result;
use crate::instance::ReceiverMode;
use crate::schemes::SchemeTable;

/// A stable deterministic scheme and what it is worth to everyone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableScheme {
    pub index: usize,
    pub map: Vec<usize>,
    pub alice: f64,
    /// Values for the committee members, in member order.
    pub members: Vec<f64>,
}

/// Stable symmetric profiles of the selection game for one committee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub members: Vec<usize>,
    pub mode: ReceiverMode,
    pub stable: Vec<StableScheme>,
    pub min_alice_utility: f64,
    pub argmin_scheme: Vec<usize>,
    pub scheme_count: usize,
}

/// Whether no member can strictly gain with a scheme Alice strictly prefers.
pub fn is_stable(table: &SchemeTable, members: &[usize], scheme: usize) -> bool {
    let alice = table.alice[scheme];
    (0..table.len()).all(|f| {
        table.alice[f] <= alice + STRICT_TOL
            || members
                .iter()
                .all(|&j| table.bobs[j][f] <= table.bobs[j][scheme] + STRICT_TOL)
    })
}

/// Stability of every scheme at once.
///
/// Schemes are sorted by Alice's value; the ones Alice strictly prefers to
/// `f` form a prefix, so a running maximum of each member's value over that
/// prefix settles `f` with one binary search.
fn stable_flags(table: &SchemeTable, members: &[usize]) -> Vec<bool> {
    let n = table.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| table.alice[b].total_cmp(&table.alice[a]).then(a.cmp(&b)));
    // prefix_max[j][r]: member j's best value among the first r sorted schemes
    let prefix_max: Vec<Vec<f64>> = members
        .iter()
        .map(|&j| {
            let mut out = Vec::with_capacity(n + 1);
            out.push(f64::NEG_INFINITY);
            for &s in &order {
                let last = *out.last().expect("nonempty");
                out.push(f64::max(last, table.bobs[j][s]));
            }
            out
        })
        .collect();
    (0..n)
        .map(|f| {
            let threshold = table.alice[f] + STRICT_TOL;
            let cut = order.partition_point(|&s| table.alice[s] > threshold);
            members
                .iter()
                .zip(&prefix_max)
                .all(|(&j, pm)| pm[cut] <= table.bobs[j][f] + STRICT_TOL)
        })
        .collect()
}

/// Enumerates stable symmetric profiles from a precomputed scheme table.
pub fn equilibria_on(table: &SchemeTable, members: &[usize]) -> EquilibriumReport {
    let stable: Vec<StableScheme> = stable_flags(table, members)
        .into_iter()
        .enumerate()
        .filter(|(_, ok)| *ok)
        .map(|(s, _)| StableScheme {
            index: s,
            map: table.map(s),
            alice: table.alice[s],
            members: members.iter().map(|&j| table.bobs[j][s]).collect(),
        })
        .collect();
    // the Alice-optimal scheme is always stable, so `stable` is nonempty
    let argmin = stable
        .iter()
        .min_by(|a, b| a.alice.total_cmp(&b.alice))
        .expect("some scheme maximizes Alice's value");
    EquilibriumReport {
        members: members.to_vec(),
        mode: table.mode,
        min_alice_utility: argmin.alice,
        argmin_scheme: argmin.map.clone(),
        stable,
        scheme_count: table.len(),
    }
}

pub fn enumerate_symmetric_equilibria(committee: &Committee<'_>, mode: ReceiverMode) -> Result<EquilibriumReport> {
    let table = SchemeTable::build(committee.instance(), mode)?;
    Ok(equilibria_on(&table, committee.members()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::instance::NamedUtility;

    #[test]
    fn sorted_prefix_matches_direct_check() {
        for (_, inst) in fixtures::all() {
            let table = SchemeTable::build(&inst, ReceiverMode::PosteriorBestResponse).unwrap();
            let members: Vec<usize> = (0..inst.num_bobs()).collect();
            let flags = stable_flags(&table, &members);
            for (s, &flag) in flags.iter().enumerate().step_by(5) {
                assert_eq!(flag, is_stable(&table, &members, s), "scheme {s}");
            }
        }
    }

    #[test]
    fn alice_best_scheme_is_stable() {
        let inst = fixtures::synthetic2();
        let table = SchemeTable::build(&inst, ReceiverMode::PosteriorBestResponse).unwrap();
        let best = SchemeTable::argmax(&table.alice);
        for j in 0..inst.num_bobs() {
            assert!(is_stable(&table, &[j], best));
        }
    }

    #[test]
    fn aligned_monopolist_forces_alice_optimum() {
        let inst = fixtures::synthetic1();
        let inst = inst
            .with_bob(NamedUtility {
                name: "clone".into(),
                u: inst.alice().clone(),
            })
            .unwrap();
        let c = Committee::new(&inst, vec![5]).unwrap();
        let report = enumerate_symmetric_equilibria(&c, ReceiverMode::PosteriorBestResponse).unwrap();
        let table = SchemeTable::build(&inst, ReceiverMode::PosteriorBestResponse).unwrap();
        let max = table.alice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(report.stable.iter().all(|s| (s.alice - max).abs() < 1e-12));
    }
}
