//! The user guide, compiled into the test suite.
//!
//! Each module below embeds one chapter of the book under `book/` at the
//! repository root, so the guide renders on docs pages and, more
//! importantly, every code block in it runs as a doc-test. The book cannot
//! drift from the crate: `cargo test` fails the moment a chapter stops
//! compiling against the current API.
//!
//! Read the rendered version with `mdbook serve book`, or browse the
//! chapters here.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/fundamental-equations.md")]
pub mod fundamental_equations {}

#[doc = include_str!("../../../book/src/phase-space.md")]
pub mod phase_space {}

#[doc = include_str!("../../../book/src/induced-metric.md")]
pub mod induced_metric {}

#[doc = include_str!("../../../book/src/extremal-surfaces.md")]
pub mod extremal_surfaces {}

#[doc = include_str!("../../../book/src/geodesic-processes.md")]
pub mod geodesic_processes {}

#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}

#[doc = include_str!("../../../book/src/numerics.md")]
pub mod numerics {}
