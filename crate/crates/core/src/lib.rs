//! Robust approximation algorithms for weighted CSPs over a fixed finite
//! domain, built around the standard vector (semidefinite) relaxation.
//!
//! The crate provides:
//!
//! - [`csp`]: the weighted instance model, exhaustive oracles, planted
//!   generators, and a JSON wire format;
//! - [`algebra`]: operation tables, polymorphism checks, the implicational
//!   relation templates, and arity reduction;
//! - [`sdp`]: the relaxation, a projection-based solver, feasibility
//!   validation, and the heavy-prefix preprocessing pass;
//! - [`consistency`]: patterns, propagation, arc consistency, an exact
//!   decision solver, and bounded consistency falsifiers;
//! - [`nu`]: the randomized rounding pipeline for languages with a
//!   near-unanimity polymorphism (level sets plus grid/hyperplane removal
//!   steps);
//! - [`dd`]: the rounding pipeline for dual-discriminator languages
//!   (constraint triage, variable partitioning, hyperplane labeling, and
//!   two rounding back ends);
//! - [`experiment`]: a seeded multi-trial harness with loss-slope fitting.
//!
//! All numeric code is generic over [`scalar::Scalar`] (`f64` and `f32`);
//! the aliases below fix the default `f64` instantiations.

// index-driven loops over bitmask/matrix coordinates read better than
// iterator chains in the numeric kernels
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod consistency;
pub mod csp;
pub mod dd;
pub mod error;
pub mod experiment;
pub mod nu;
pub mod scalar;
pub mod sdp;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default `f64` instantiations of the core types.
pub type Instance = csp::Instance<f64>;
pub type Constraint = csp::Constraint<f64>;
pub type SdpProblem = sdp::SdpProblem<f64>;
pub type SdpSolution = sdp::SdpSolution<f64>;
pub type NuReport = nu::RemovalReport<f64>;
pub type DdReport = dd::DdReport<f64>;
