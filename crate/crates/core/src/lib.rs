//! Retraction of a degenerating family onto its central fibre, computed on
//! normal-crossings models.
//!
//! A model is an atlas of charts in which the function is a monomial times a
//! unit. From it the crate builds the cut space, a retraction flow with its
//! hitting time, the trivialization of a collar of the boundary, and the
//! specialization and Milnor-fibre data that follow from them.

pub mod catalog;
pub mod complexretract;
pub mod cut;
pub mod error;
pub mod expr;
pub mod flowretract;
pub mod ncmodel;
pub mod report;
pub mod sampling;
pub mod strat;
pub mod verify;

pub use error::{Error, Result};
