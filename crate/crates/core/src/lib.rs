//! Conflict-constrained pairing laboratory.
//!
//! Sort an even-sized element list into a two-column matrix so that no row
//! holds a declared incompatible pair. The crate provides the three-phase
//! Tripound procedure, a CNF encoding with a DPLL solver, brute-force
//! counters, an interpreter for the matrix-program notation the procedure
//! is written in, and a harness that checks each of them against the others.

pub mod bap;
pub mod counting;
pub mod harness;
pub mod model;
pub mod sat;
pub mod tripound;

pub use model::{check_pairing, parse_instance, ElementId, Instance, Pairing};
pub use tripound::{
    feasibility_threshold, tripound_solve, Mode, ScanMode, SolveError, TripoundTrace,
};
