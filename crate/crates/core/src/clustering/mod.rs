//! ℓp k-clustering coresets over shifted hierarchical grids.

mod coreset;
mod grid;
mod jl;
mod sketch;
mod solve;
mod tracker;
mod window;

pub use coreset::{
    crucial_stats, draw_coreset, heavy_partition, replica_sets, sample_count, CellStat, Coreset, CoresetPlan,
    HeavyCrucialMap, WeightedPoint,
};
pub use grid::{level_count, parent, ShiftedGrids, SHIFT_BITS};
pub use jl::{jl_dim, jl_project, JlProjection, JL_CONST};
pub use sketch::{cluster_spec, sub_fail, ClusterOutput, ClusterParams, ClusterProfile, ClusterSpec, LevelRates, Part, Replicas};
pub use solve::{as_center, cost, merge_weights, point_cost, solve_on_coreset, weighted_cost, Centers, ClusterMethod};
pub use tracker::{DistinctQuery, DistinctTracker};
pub use window::{ClusterAnswer, ClusterSource, ClusterWindow};
