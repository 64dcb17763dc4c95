//! Dimension spaces of ordered Bratteli diagrams with Markov measures.
//!
//! The crate builds the integer edge labeling of an ordered diagram, the
//! Laurent-polynomial transition matrices it induces, and the associated
//! matrix-valued random walk on ℤ. Worked families (odometer, Morse,
//! circulant, irrational rotation) and the rank-one approximation checks
//! for the circulant family live in their own modules.

pub mod atcheck;
pub mod bratteli;
pub mod dimspace;
pub mod error;
pub mod families;
pub mod labeling;
pub mod laurent;
pub mod rotation;
pub mod stacking;
pub mod walk;

pub use error::{Error, Result};
