use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::misalign::theorem_check;
use super::{brd_on, default_max_rounds};
use crate::error::{Error, Result};
use crate::instance::{PersuasionInstance, ReceiverMode};
use crate::schemes::SchemeTable;

/// Summary of one committee: equilibria, score, dynamics and the guarantee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitteeRecord {
    /// Bitmask over sender indices.
    pub committee_id: u64,
    pub members: Vec<usize>,
    pub k: usize,
    pub epsilon: f64,
    pub min_ne_utility: f64,
    pub brd_utility: f64,
    pub brd_converged: bool,
    pub bound: f64,
    pub first_best: f64,
    pub satisfied: bool,
    pub slack: f64,
    pub tight: bool,
    pub stable_count: usize,
}

/// Evaluates one committee against a prebuilt scheme table.
pub fn committee_record(
    instance: &PersuasionInstance,
    table: &SchemeTable,
    members: &[usize],
) -> Result<CommitteeRecord> {
    let (report, score) = table.score(instance, members)?;
    let brd = brd_on(table, members, default_max_rounds(table, members.len()))?;
    let check = theorem_check(instance, report.min_alice_utility, score.epsilon);
    Ok(CommitteeRecord {
        committee_id: members.iter().fold(0, |m, &i| m | 1 << i),
        members: members.to_vec(),
        k: members.len(),
        epsilon: score.epsilon,
        min_ne_utility: report.min_alice_utility,
        brd_utility: brd.alice_utility(),
        brd_converged: brd.converged,
        bound: check.bound,
        first_best: check.first_best,
        satisfied: check.satisfied,
        slack: check.slack,
        tight: check.tight,
        stable_count: report.stable.len(),
    })
}

/// Largest sender count the subset sweep accepts.
const MAX_SWEEP_BOBS: usize = 20;

/// Evaluates every nonempty committee, ordered by bitmask.
pub fn committee_sweep(instance: &PersuasionInstance, mode: ReceiverMode) -> Result<Vec<CommitteeRecord>> {
    let k = instance.num_bobs();
    if k > MAX_SWEEP_BOBS {
        return Err(Error::EnumerationTooLarge {
            count: 1u128 << k,
            cap: 1u128 << MAX_SWEEP_BOBS,
        });
    }
    let table = SchemeTable::build(instance, mode)?;
    (1u64..1 << k)
        .into_par_iter()
        .map(|mask| {
            let members: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            committee_record(instance, &table, &members)
        })
        .collect()
}

/// One prefix of a random insertion path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub path_id: usize,
    pub k: usize,
    /// Sender that joined at this step.
    pub added: usize,
    pub committee_id: u64,
    pub min_ne_utility: f64,
    pub epsilon: f64,
    pub bound: f64,
    pub first_best: f64,
}

/// Random orders in which senders enter the market.
///
/// Path `p` shuffles the senders with a generator seeded by `seed + p`, and
/// records every prefix of that order.
pub fn committee_paths(
    instance: &PersuasionInstance,
    num_paths: usize,
    seed: u64,
    mode: ReceiverMode,
) -> Result<Vec<PathRecord>> {
    if num_paths == 0 {
        return Err(Error::Domain("num_paths must be at least 1".into()));
    }
    let table = SchemeTable::build(instance, mode)?;
    let orders: Vec<Vec<usize>> = (0..num_paths)
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(p as u64));
            let mut order: Vec<usize> = (0..instance.num_bobs()).collect();
            order.shuffle(&mut rng);
            order
        })
        .collect();

    let mut cache: BTreeMap<u64, CommitteeRecord> = BTreeMap::new();
    let mut records = Vec::new();
    for (path_id, order) in orders.iter().enumerate() {
        for k in 1..=order.len() {
            let mut members = order[..k].to_vec();
            members.sort_unstable();
            let mask = members.iter().fold(0u64, |m, &i| m | 1 << i);
            let rec = match cache.entry(mask) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(committee_record(instance, &table, &members)?),
            };
            records.push(PathRecord {
                path_id,
                k,
                added: order[k - 1],
                committee_id: mask,
                min_ne_utility: rec.min_ne_utility,
                epsilon: rec.epsilon,
                bound: rec.bound,
                first_best: rec.first_best,
            });
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn paths_are_seeded_and_end_at_full_committee() {
        let inst = fixtures::synthetic1();
        let mode = ReceiverMode::PosteriorBestResponse;
        let a = committee_paths(&inst, 4, 7, mode).unwrap();
        let b = committee_paths(&inst, 4, 7, mode).unwrap();
        assert_eq!(a, b);
        let terminal: Vec<f64> = a.iter().filter(|r| r.k == 5).map(|r| r.min_ne_utility).collect();
        assert_eq!(terminal.len(), 4);
        assert!(terminal.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn sweep_covers_every_subset() {
        let inst = fixtures::appendix_b();
        let recs = committee_sweep(&inst, ReceiverMode::PosteriorBestResponse).unwrap();
        let ids: Vec<u64> = recs.iter().map(|r| r.committee_id).collect();
        assert_eq!(ids, vec![1, 2, 3]);
        assert!(recs.iter().all(|r| r.satisfied && r.brd_converged));
    }
}
