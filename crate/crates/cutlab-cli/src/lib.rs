//! Pipeline glue for the cut-selection laboratory: deterministic artifact
//! formats (datasets, labels, checkpoints, reports), the generate → label →
//! train → evaluate commands, and the regression checks exposed by the
//! `cutlab` binary.
//!
//! Everything here is plumbing; the mathematics lives in the `cutlab`
//! library crate. The one invariant this crate adds is reproducibility:
//! identical inputs and flags produce byte-identical artifacts, at every
//! stage, on every machine.

pub mod artifacts;
pub mod checks;
pub mod commands;
pub mod eval;
