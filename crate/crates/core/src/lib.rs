//! Sliding-window approximation via bucketing-based sketches.
//!
//! The [`framework`] module runs one sketch per guess on a geometric ladder and
//! answers window queries from the smallest guess that can certify an answer.
//! Problem modules plug in sketch specifications for count-of-ones and toy
//! 1-median ([`reference`]), maximum k-coverage ([`kcover`]), diversity
//! maximization ([`diversity`]) and ℓp k-clustering coresets ([`clustering`]).
//! [`oracles`] holds brute-force ground truth and [`harness`] the experiment
//! runner behind the command-line tool.

pub mod clustering;
pub mod diversity;
pub mod error;
pub mod framework;
pub mod geometry;
pub mod harness;
pub mod kcover;
pub mod oracles;
pub mod prf;
pub mod reference;

pub use error::{Error, Result};
pub use framework::{
    make_ladder, offline_sketch, recover, GuessLadder, LevelSnapshot, SketchContents, SketchSpec, SlidingSketch,
    Stamped, WindowedEstimate,
};
pub use geometry::Point;
