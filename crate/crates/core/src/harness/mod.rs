//! Seeded experiment runner: stream files, generators, checkpoints and reports.

mod config;
mod generate;
mod report;
mod run;
mod stream;

pub use config::{ExperimentConfig, ProblemConfig, StreamSource};
pub use generate::{appendix_diversity, appendix_kcover, generate, Appendix, GenSpec};
pub use report::{Report, Row, Summary};
pub use run::{load_stream, parse_config, run_experiment};
pub use stream::{parse_bits, parse_edges, parse_points, Stream};
