//! Bounds on the privacy guarantees of shuffled local randomizers.
//!
//! A shuffled protocol is reduced to a pair of small count distributions.
//! Divergences between the two carry certified truncation slack and convert
//! into approximate-DP and Rényi-DP guarantees.

pub mod numkit;
pub mod clone_dists;
pub mod divergence;
pub mod decompose;
pub mod bounds;
pub mod accountant;
pub mod oracle;
