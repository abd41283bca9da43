//! Cycle-approximate model of a near-memory Ising machine.
//!
//! [`ising`] is the functional solver and golden reference. [`bits`] holds the
//! bit-level XNOR dot products, [`arch`] the storage and compute-tile model
//! with its four schedules, [`cost`] the energy and baseline models, and
//! [`workloads`] the problem generators.

pub mod arch;
pub mod bits;
pub mod cli;
pub mod cost;
pub mod ising;
pub mod workloads;
