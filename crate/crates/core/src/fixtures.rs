//! Embedded utility tables.
//!
//! The tabular fixtures list one row per (state, policy) pair with the
//! receiver's utility followed by each sender's. They ship with a uniform
//! prior; use [`PersuasionInstance::with_prior`] to change it.

use crate::error::{Error, Result};
use crate::instance::{NamedUtility, PersuasionInstance};

pub const NAMES: [&str; 4] = ["synthetic1", "synthetic2", "movielens", "appendix_b"];

pub fn by_name(name: &str) -> Result<PersuasionInstance> {
    match name {
        "synthetic1" => Ok(synthetic1()),
        "synthetic2" => Ok(synthetic2()),
        "movielens" => Ok(movielens()),
        "appendix_b" => Ok(appendix_b()),
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

pub fn all() -> Vec<(&'static str, PersuasionInstance)> {
    NAMES
        .iter()
        .map(|n| (*n, by_name(n).expect("embedded fixture")))
        .collect()
}

/// Builds an instance from `rows[state * actions + action] = [alice, bob_1, ..]`.
fn from_table(states: &[&str], actions: &[&str], bob_names: &[&str], rows: &[&[f64]]) -> PersuasionInstance {
    let ns = states.len();
    let na = actions.len();
    assert_eq!(rows.len(), ns * na);
    let column = |c: usize| -> Vec<Vec<f64>> {
        (0..ns)
            .map(|y| (0..na).map(|a| rows[y * na + a][c]).collect())
            .collect()
    };
    let bobs = bob_names
        .iter()
        .enumerate()
        .map(|(i, name)| NamedUtility {
            name: name.to_string(),
            u: column(i + 1),
        })
        .collect();
    let inst = PersuasionInstance::new(
        states.iter().map(|s| s.to_string()).collect(),
        actions.iter().map(|s| s.to_string()).collect(),
        vec![1.0 / ns as f64; ns],
        column(0),
        bobs,
    );
    inst.map(|i| i.with_uniform_prior()).expect("fixture table is valid")
}

const AI5: [&str; 5] = ["AI 1", "AI 2", "AI 3", "AI 4", "AI 5"];

/// Three states, three policies, five heterogeneous senders.
pub fn synthetic1() -> PersuasionInstance {
    from_table(
        &["S1", "S2", "S3"],
        &["A", "B", "C"],
        &AI5,
        &[
            &[0.545, 0.80, 0.40, 0.30, 0.60, 0.55],
            &[0.580, 0.50, 0.90, 0.40, 0.60, 0.35],
            &[0.470, 0.30, 0.30, 0.85, 0.40, 0.75],
            &[0.570, 0.45, 0.70, 0.55, 0.80, 0.30],
            &[0.585, 0.75, 0.40, 0.60, 0.50, 0.65],
            &[0.538, 0.35, 0.60, 0.80, 0.45, 0.55],
            &[0.552, 0.70, 0.30, 0.50, 0.85, 0.40],
            &[0.555, 0.40, 0.75, 0.55, 0.45, 0.70],
            &[0.565, 0.50, 0.55, 0.80, 0.35, 0.65],
        ],
    )
}

/// Three states, four policies; no single sender is receiver-optimal.
pub fn synthetic2() -> PersuasionInstance {
    from_table(
        &["S1", "S2", "S3"],
        &["A", "B", "C", "H"],
        &AI5,
        &[
            &[0.92, 0.95, 0.10, 0.10, 0.10, 0.10],
            &[0.10, 0.80, 0.20, 0.20, 0.20, 0.20],
            &[0.10, 0.20, 0.80, 0.20, 0.20, 0.20],
            &[0.78, 0.70, 0.70, 0.70, 0.70, 0.70],
            &[0.10, 0.20, 0.80, 0.20, 0.20, 0.20],
            &[0.92, 0.10, 0.95, 0.10, 0.10, 0.10],
            &[0.10, 0.20, 0.20, 0.80, 0.20, 0.20],
            &[0.78, 0.70, 0.70, 0.70, 0.70, 0.70],
            &[0.10, 0.20, 0.20, 0.80, 0.20, 0.20],
            &[0.10, 0.20, 0.20, 0.20, 0.80, 0.20],
            &[0.92, 0.10, 0.10, 0.95, 0.10, 0.10],
            &[0.78, 0.70, 0.70, 0.70, 0.70, 0.70],
        ],
    )
}

/// Movie titles behind each genre's three recommendation slots.
pub const MOVIELENS_TITLES: [[&str; 3]; 6] = [
    ["Matrix", "Star Wars: Episode IV", "Jurassic Park"],
    ["Forrest Gump", "Pulp Fiction", "Toy Story"],
    ["Forrest Gump", "Shawshank Redemption", "Pulp Fiction"],
    ["Matrix", "Star Wars: Episode IV", "Jurassic Park"],
    ["Pulp Fiction", "Silence of the Lambs", "Matrix"],
    ["Forrest Gump", "American Beauty", "True Lies"],
];

/// Genres as states; an action picks one of the genre's three top titles
/// (see [`MOVIELENS_TITLES`]).
pub fn movielens() -> PersuasionInstance {
    from_table(
        &["Action", "Comedy", "Drama", "Sci-Fi", "Thriller", "Romance"],
        &["top1", "top2", "top3"],
        &[
            "Action Bob",
            "Comedy Bob",
            "Drama Bob",
            "Sci-Fi Bob",
            "Thriller Bob",
            "Romance Bob",
        ],
        &[
            &[0.84, 0.92, 0.94, 0.89, 0.93, 0.89, 0.87],
            &[0.85, 0.91, 0.91, 0.87, 0.93, 0.88, 0.86],
            &[0.75, 0.87, 0.85, 0.80, 0.85, 0.83, 0.80],
            &[0.83, 0.91, 0.89, 0.90, 0.90, 0.89, 0.88],
            &[0.84, 0.87, 0.90, 0.89, 0.84, 0.90, 0.90],
            &[0.78, 0.85, 0.88, 0.84, 0.89, 0.83, 0.84],
            &[0.83, 0.91, 0.89, 0.90, 0.90, 0.89, 0.88],
            &[0.89, 0.94, 0.93, 0.92, 0.92, 0.93, 0.91],
            &[0.84, 0.87, 0.90, 0.89, 0.84, 0.90, 0.90],
            &[0.84, 0.92, 0.94, 0.89, 0.93, 0.89, 0.87],
            &[0.85, 0.91, 0.91, 0.87, 0.93, 0.88, 0.86],
            &[0.75, 0.87, 0.85, 0.80, 0.85, 0.83, 0.80],
            &[0.84, 0.87, 0.90, 0.89, 0.84, 0.90, 0.90],
            &[0.83, 0.93, 0.92, 0.90, 0.92, 0.91, 0.91],
            &[0.84, 0.92, 0.94, 0.89, 0.93, 0.89, 0.87],
            &[0.83, 0.91, 0.89, 0.90, 0.90, 0.89, 0.88],
            &[0.81, 0.82, 0.89, 0.86, 0.85, 0.84, 0.90],
            &[0.70, 0.85, 0.83, 0.77, 0.83, 0.80, 0.81],
        ],
    )
}

/// Judge, prosecutor and defense attorney; guilty with probability 2/3.
///
/// Actions are ordered `[acquit, convict]` so that lowest-index tie-breaking
/// favors acquittal.
pub fn appendix_b() -> PersuasionInstance {
    PersuasionInstance::new(
        vec!["guilty".into(), "innocent".into()],
        vec!["acquit".into(), "convict".into()],
        vec![2.0 / 3.0, 1.0 / 3.0],
        vec![vec![1.0, 2.0], vec![2.0, 1.0]],
        vec![
            NamedUtility {
                name: "prosecutor".into(),
                u: vec![vec![0.0, 2.0], vec![0.0, 1.0]],
            },
            NamedUtility {
                name: "defense".into(),
                u: vec![vec![1.0, 0.0], vec![2.0, 0.0]],
            },
        ],
    )
    .expect("appendix fixture is valid")
}
