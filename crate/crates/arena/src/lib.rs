//! Repeated posted-price games between a privately informed online learner
//! and a potentially adaptive environment.
//!
//! Each period the environment posts a mechanism (allocation indicator and
//! payment per action), the learner simultaneously picks an action, and
//! both sides observe only their own feedback. The crate provides:
//!
//! - the stage game and exact payoff arithmetic ([`game`]),
//! - confidence intervals, regret metrics, and closed-form pricing
//!   quantities ([`stats`]),
//! - the learner algorithms — exponential weights, uniform exploration,
//!   successive elimination, optimism, protected exploitation with and
//!   without type signaling, plus anytime doubling ([`learners`]),
//! - stationary environments and the adaptive constructions that exploit
//!   each learner class ([`environments`]),
//! - a deterministic, embarrassingly parallel episode engine with rate
//!   sweeps and exponent fits ([`engine`]),
//! - a configuration-driven experiment runner with a built-in `reproduce`
//!   suite ([`cli`], [`reproduce`]).
//!
//! Start with the `examples/` directory: each file is a runnable tour of
//! one capability (`cargo run --example stationary_learning`).

pub mod cli;
pub mod config;
pub mod engine;
pub mod environments;
pub mod error;
pub mod game;
pub mod learners;
pub mod protocol;
pub mod report;
pub mod reproduce;
pub mod stats;

pub use error::ArenaError;
