//! The Best-AI Selection game.
//!
//! Every sender commits to a deterministic scheme, Alice evaluates them all
//! and consults the one she values most. The submodules compute
//! best-response dynamics, stable symmetric profiles, the misalignment score
//! restricted to equilibrium outcomes, and the resulting utility guarantee.

mod brd;
mod equilibria;
mod misalign;
mod paths;

pub use brd::{best_response_dynamics, brd_on, default_max_rounds, BrdStep, BrdTrajectory};
pub use equilibria::{enumerate_symmetric_equilibria, equilibria_on, is_stable, EquilibriumReport, StableScheme};
pub use misalign::{check_theorem_bound, misalignment_epsilon, misalignment_on, MisalignmentScore, TheoremCheck};
pub use paths::{committee_paths, committee_record, committee_sweep, CommitteeRecord, PathRecord};

use crate::error::{Error, Result};
use crate::instance::PersuasionInstance;

/// Strict improvements must exceed this margin, so rounding noise in sums of
/// utilities never counts as a profitable deviation.
pub const STRICT_TOL: f64 = 1e-12;

/// Slack at or below this size counts as a tight bound.
pub const TIGHT_TOL: f64 = 1e-8;

/// A nonempty ordered set of senders drawn from one instance.
#[derive(Debug, Clone)]
pub struct Committee<'a> {
    instance: &'a PersuasionInstance,
    members: Vec<usize>,
}

impl<'a> Committee<'a> {
    pub fn new(instance: &'a PersuasionInstance, members: Vec<usize>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Invariant("a committee needs at least one member".into()));
        }
        let mut seen = vec![false; instance.num_bobs()];
        for &m in &members {
            match seen.get_mut(m) {
                None => {
                    return Err(Error::Invariant(format!(
                        "member {m} out of range for {} senders",
                        instance.num_bobs()
                    )))
                }
                Some(true) => return Err(Error::Invariant(format!("member {m} listed twice"))),
                Some(s) => *s = true,
            }
        }
        Ok(Self { instance, members })
    }

    /// Every sender of the instance.
    pub fn all(instance: &'a PersuasionInstance) -> Self {
        Self {
            instance,
            members: (0..instance.num_bobs()).collect(),
        }
    }

    /// Committee encoded as a bitmask over sender indices.
    pub fn from_mask(instance: &'a PersuasionInstance, mask: u64) -> Result<Self> {
        let members = (0..instance.num_bobs()).filter(|i| mask >> i & 1 == 1).collect();
        Self::new(instance, members)
    }

    pub fn instance(&self) -> &'a PersuasionInstance {
        self.instance
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn mask(&self) -> u64 {
        self.members.iter().fold(0, |m, &i| m | 1 << i)
    }
}
