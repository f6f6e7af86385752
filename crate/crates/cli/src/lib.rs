//! Library surface of the `ulb` command-line tool: deterministic CSV and
//! SVG emission, run manifests, and the subcommand implementations.

// Same convention as the core crate: `!(x > 0.0)` guards reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod csvio;
pub mod errors;
pub mod manifest;
pub mod svg;
