//! File formats, CLI, and verification matrix for hyperbolic fillings.
//!
//! The core constructions — fillings, uniformized geometry, lifted
//! measures, trace parameters, traces, and modulus certificates — live
//! in `hyperfill-core`. This crate adds everything that needs an
//! operating system: JSON documents with reconstruct-and-verify
//! loading, spec-string parsing for the command line, the `hyperfill`
//! binary itself, and the concurrent verification matrix that plays
//! analytic regime predictions against numerical trace experiments.

pub mod cli;
pub mod docs;
pub mod report;
pub mod spec;
pub mod verify;

/// The underlying construction library, re-exported so that depending on
/// this crate alone gives access to the full API.
pub use hyperfill_core;

pub use docs::{DocError, FillingDoc, ProfileTableDoc, RayDoc, RhoDoc, SpaceDoc, VertexDoc};
pub use spec::{parse_interval, parse_rho_spec, parse_space_spec, parse_u_spec, SpecError};
