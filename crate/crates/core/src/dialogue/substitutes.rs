use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DiscreteJointPrior;
use crate::error::{Error, Result};

/// Largest feature alphabet enumerated exhaustively.
pub const EXHAUSTIVE_CAP: usize = 12;

/// Subset pairs drawn per action in sampled mode when no count is given.
pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsetMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

impl SubsetMode {
    /// Exhaustive when both alphabets fit under the cap, sampled otherwise.
    pub fn auto(prior: &DiscreteJointPrior, seed: u64) -> Self {
        if prior.x_a().len().max(prior.x_b().len()) <= EXHAUSTIVE_CAP {
            SubsetMode::Exhaustive
        } else {
            SubsetMode::Sampled {
                count: DEFAULT_SAMPLES,
                seed,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub action: usize,
    pub set_a: Vec<usize>,
    pub set_b: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstitutesReport {
    pub holds: bool,
    /// Largest `LHS − RHS` seen; positive values are violations.
    pub worst_violation: f64,
    pub witness: Option<Witness>,
    pub pairs_checked: usize,
}

/// Violations at or below this level are treated as rounding.
const VIOLATION_TOL: f64 = 1e-12;

fn members(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

/// Partition scores for one action.
struct Region<'a> {
    prior: &'a DiscreteJointPrior,
    action: usize,
}

impl Region<'_> {
    /// Mass and first moment of `u(action, ·)` on `sa × sb`.
    fn moments(&self, sa: &[usize], sb: &[usize]) -> (f64, f64) {
        let u = &self.prior.alice_u()[self.action];
        let mut mass = 0.0;
        let mut first = 0.0;
        for &i in sa {
            for &j in sb {
                for (p, v) in self.prior.pmf()[i][j].iter().zip(u) {
                    mass += p;
                    first += p * v;
                }
            }
        }
        (mass, first)
    }

    /// `Σ_cells m_c² / P(c)` which equals `Σ P(c) · mean_c²`.
    fn score<'c>(&self, cells: impl Iterator<Item = (&'c [usize], &'c [usize])>) -> f64 {
        cells
            .map(|(sa, sb)| {
                let (mass, first) = self.moments(sa, sb);
                if mass > 0.0 {
                    first * first / mass
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// `LHS − RHS` of the substitutes inequality on `sa × sb`, or `None`
    /// for a null region.
    fn violation(&self, sa: &[usize], sb: &[usize]) -> Option<f64> {
        let (total, _) = self.moments(sa, sb);
        if total <= 0.0 {
            return None;
        }
        let singles_a: Vec<[usize; 1]> = sa.iter().map(|&i| [i]).collect();
        let singles_b: Vec<[usize; 1]> = sb.iter().map(|&j| [j]).collect();
        // partition by x_b, by (x_a, x_b), trivial, by x_a
        let s1 = self.score(singles_b.iter().map(|b| (sa, &b[..])));
        let s2 = self.score(
            singles_a
                .iter()
                .flat_map(|a| singles_b.iter().map(move |b| (&a[..], &b[..]))),
        );
        let s3 = self.score(std::iter::once((sa, sb)));
        let s4 = self.score(singles_a.iter().map(|a| (&a[..], sb)));
        Some((s2 - s1 + s3 - s4) / total)
    }
}

/// Checks the information-substitutes inequality for every action over
/// nonempty subset pairs `A ⊆ X_A`, `B ⊆ X_B`.
///
/// Each mean-squared error is written as `E[u²] − Σ P(cell) mean²`, so the
/// `E[u²]` terms cancel and only partition scores are computed.
pub fn info_substitutes_check(prior: &DiscreteJointPrior, mode: SubsetMode) -> Result<SubstitutesReport> {
    let (na, nb) = (prior.x_a().len(), prior.x_b().len());
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    let mut pairs = 0usize;
    let mut record = |action: usize, sa: Vec<usize>, sb: Vec<usize>, v: Option<f64>| {
        pairs += 1;
        if let Some(v) = v {
            if v > worst {
                worst = v;
                witness = Some(Witness {
                    action,
                    set_a: sa,
                    set_b: sb,
                });
            }
        }
    };
    match mode {
        SubsetMode::Exhaustive => {
            let size = na.max(nb);
            if size > EXHAUSTIVE_CAP {
                return Err(Error::SubsetSpaceTooLarge {
                    size,
                    cap: EXHAUSTIVE_CAP,
                });
            }
            let subsets_a: Vec<Vec<usize>> = (1..1u64 << na).map(|m| members(m, na)).collect();
            let subsets_b: Vec<Vec<usize>> = (1..1u64 << nb).map(|m| members(m, nb)).collect();
            for action in 0..prior.num_actions() {
                let region = Region { prior, action };
                for sa in &subsets_a {
                    for sb in &subsets_b {
                        record(action, sa.clone(), sb.clone(), region.violation(sa, sb));
                    }
                }
            }
        }
        SubsetMode::Sampled { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // rejection keeps the draw uniform over nonempty subsets
            let draw = |n: usize, rng: &mut ChaCha8Rng| loop {
                let s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
                if !s.is_empty() {
                    break s;
                }
            };
            for action in 0..prior.num_actions() {
                let region = Region { prior, action };
                for _ in 0..count {
                    let sa = draw(na, &mut rng);
                    let sb = draw(nb, &mut rng);
                    let v = region.violation(&sa, &sb);
                    record(action, sa, sb, v);
                }
            }
        }
    }
    if worst == f64::NEG_INFINITY {
        worst = 0.0;
    }
    let holds = worst <= VIOLATION_TOL;
    Ok(SubstitutesReport {
        holds,
        worst_violation: worst,
        witness: if holds { None } else { witness },
        pairs_checked: pairs,
    })
}
