//! Exhaustive solver for coalition formation in atomic congestion games.
//!
//! `N` identical players route jobs over `M` shared links; the per-player
//! reward `mu_a(k)` of a link drops with the number `k` of players pulling
//! it. Players may coordinate in coalitions at a per-member communication
//! cost `beta`, which turns every arrangement (partition) of the players
//! into a non-cooperative congestion game among its coalitions. This crate
//! enumerates the pure Nash equilibria of every partition, derives each
//! coalition's worth and the pessimal worth it can guarantee after a
//! deviation, and classifies the exact `beta` ranges over which each
//! partition is stable against blocking coalitions.
//!
//! Module map:
//!
//! - [`model`] — reward models, partitions, strategy profiles, worths
//! - [`enumeration`] — partitions, strategy multisets, joint profiles,
//!   blocking q-vectors
//! - [`equilibrium`] — best responses, pure-NE enumeration, the grand
//!   coalition optimizer
//! - [`stability`] — pessimal tables, blocking statistics, stability
//!   intervals, and an independent blocking oracle
//! - [`theory`] — regime predicates and closed-form result verdicts
//! - [`dynamics`] — the blocking graph and cycle detection
//! - [`report`] — instance files, the analysis pipeline, JSON/CSV emission

pub mod dynamics;
pub mod enumeration;
pub mod equilibrium;
pub mod model;
pub mod report;
pub mod stability;
pub mod theory;

pub use model::{
    CongestionVector, ModelError, Partition, PayoffVector, RewardModel, StrategyProfile,
    WorthRecord, DEFAULT_EPSILON,
};
