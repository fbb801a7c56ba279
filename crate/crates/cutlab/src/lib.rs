//! A laboratory for studying Chvátal-Gomory cut selection on small integer
//! programs. Everything on the solving path (LP relaxations, cuts, the
//! branch-and-cut tree, the two cut-quality scores) runs in exact rational
//! arithmetic; floating point appears only in the learned cut selector and in
//! score exports.

pub mod bnc;
pub mod cutgen;
pub mod gnn;
pub mod instance;
pub mod instgen;
pub mod rational;
pub mod rng;
pub mod shattering;
pub mod simplex;

pub use instance::{Cut, IlpInstance};
pub use rational::Rational;
