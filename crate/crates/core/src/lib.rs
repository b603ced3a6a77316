//! Competitive alignment markets.
//!
//! A receiver (Alice) consults several differently misaligned senders (the
//! Bobs). This crate computes what she can expect from them: single-sender
//! persuasion schemes, equilibria of the game where Alice picks the one sender
//! whose committed scheme serves her best, how far her utility sits from the
//! convex hull of the senders' utilities, and the straightforward
//! belief-exchange conversations that underpin the multi-round model.

pub mod dialogue;
pub mod error;
pub mod fixtures;
pub mod hull;
pub mod instance;
pub mod market;
pub mod optim;
pub mod persuasion;
pub mod schemes;

pub use error::{Error, Result};
pub use instance::{
    best_response, expected_utility, first_best, load_instance, posterior, save_instance, BeliefVector, OutcomeSet,
    PersuasionInstance, ReceiverMode, SignalingScheme,
};
