//! Evolutionary architecture search for parameterized quantum circuits.
//!
//! Circuits are evolved as genomes of gates tagged with innovation numbers,
//! trained with Adam on a dense statevector simulator, and scored either on
//! classical classification data (angle-encoded features, marginal readout)
//! or on imitation of fixed teacher circuits.

pub mod bench;
pub mod engine;
pub mod genome;
pub mod objective;
pub mod operators;
pub mod qsim;
pub mod task;
pub mod trainer;

#[cfg(test)]
mod testutil;
