//! Sliding-window diversity maximization over `[Δ]^d`.

mod sketch;
mod tracker;
mod value;

pub use sketch::{div_spec, grid_snap, solve, DivAnswer, DivBucket, DivParams, DivSolution, DivSource, DivSpec, DivWindow, Solver};
pub use tracker::{opt_multiset, ZeroOptTracker, ZeroQuery};
pub use value::{div_value, div_value_matrix, distance_matrix, normalizer, DiversityKind, Objective};
