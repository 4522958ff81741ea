//! Contact-geometry toolkit for thermodynamics.
//!
//! The crate builds a Legendre-invariant metric on the (2n+1)-dimensional
//! space of a thermodynamic potential, its extensive variables, and their
//! conjugates, pulls that metric back to the n-dimensional equilibrium
//! manifold defined by a fundamental equation, and evaluates curvature,
//! extremal-surface residuals, and admissible quasi-static processes there.
//!
//! Module map:
//! - [`deriv`]: truncated Taylor jets and finite-difference cross-checks;
//! - [`systems`]: a catalog of fundamental equations plus concavity, Euler,
//!   and equation-of-state diagnostics;
//! - [`phasespace`]: the contact form, the metric family, and Legendre
//!   transformations;
//! - [`equilibrium`]: embedding, pullback and closed-form induced metrics,
//!   and curvature;
//! - [`extremal`]: harmonic and area-functional residuals of the embedding;
//! - [`processes`]: geodesic integration, thermodynamic length, and the
//!   second-law admissibility filter;
//! - [`cli`]: the `gtd` command-line front end.

pub mod cli;
pub mod deriv;
pub mod equilibrium;
pub mod error;
pub mod extremal;
pub mod guide;
pub mod phasespace;
pub mod processes;
pub mod systems;

pub use error::{GtdError, Result};
