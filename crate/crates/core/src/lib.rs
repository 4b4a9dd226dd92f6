//! Simulation library for random sequential dispersion of masses on the unit
//! circle, in continuous and discrete (grid) variants.
//!
//! Masses arrive one by one at uniform positions and relax into closed covered
//! arcs under a pluggable dispersion policy (right/left constant-speed
//! diffusion, proportional splits, fluid particle diffusion, Brownian range,
//! ...).  The crate provides
//!
//! * exact circle geometry over either `f64` or rational coordinates
//!   ([`circle`], [`coord`]),
//! * the policy engine and event-analytic relaxation ([`policy`]),
//! * grid models: classical parking / linear probing, bulldozer parking and
//!   their coupling ([`discrete`]),
//! * the collecting-path encoding and its excursion decomposition ([`path`]),
//! * closed-form occupancy laws: binomial block counts, Dirichlet spacings,
//!   partition sums, transition matrices ([`laws`]),
//! * insertion-cost machinery and the rescaled insertion measure ([`cost`]),
//! * Brownian-excursion numerics and limit functionals ([`excursion`]),
//! * a reproducible statistical test harness ([`stats`]) and the end-to-end
//!   verification suite ([`verify`]).

pub mod circle;
pub mod coord;
pub mod cost;
pub mod discrete;
pub mod excursion;
pub mod laws;
pub mod partitions;
pub mod path;
pub mod policy;
pub mod stats;
pub mod verify;

use thiserror::Error;

/// Errors surfaced by the simulation and law computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("total mass must stay strictly below 1 (got {0})")]
    MassOverflow(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty configuration")]
    EmptyConfig,
    #[error("value is not on the 1/{n} grid")]
    OffGrid { n: u64 },
    #[error("more cars than slots ({cars} > {slots})")]
    TooManyCars { cars: usize, slots: usize },
    #[error("enumeration cap exceeded: {0}")]
    EnumerationCap(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("arc length out of range: {0}")]
    BadArc(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
