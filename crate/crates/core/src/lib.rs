//! Ergodicity classification of countable-state Markov chains.
//!
//! Chains are explored through finite truncations. Each truncation yields a
//! minimal nonnegative solution of an affine system; as the truncation grows
//! these solutions increase to return-time moments, exponential moments or
//! their suprema, and the hierarchy recurrent → ergodic → ℓ-ergodic →
//! exponentially ergodic → strongly ergodic is read off the limits.

pub mod chain;
pub mod classifier;
pub mod lattice;
pub mod moments;
pub mod simulator;
pub mod single_birth;
pub mod solver;
pub mod witness;
pub mod zoo;
