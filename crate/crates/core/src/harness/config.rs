use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::generate::GenSpec;
use crate::clustering::{ClusterParams, ClusterProfile};
use crate::diversity::DivParams;
use crate::error::{invalid, Result};
use crate::kcover::{KCoverParams, KCoverProfile};
use crate::reference::{BitParams, BitProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum ProblemConfig {
    Toy { kind: BitProblem, params: BitParams },
    Kcover { params: KCoverParams },
    Diversity { params: DivParams },
    /// `jl_eps` projects every point before it reaches the sketch.
    Cluster { params: ClusterParams, jl_eps: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum StreamSource {
    File { path: PathBuf },
    /// Regenerated per trial from the trial seed.
    Generate { spec: GenSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub problem: ProblemConfig,
    pub window: u64,
    pub seeds: Vec<u64>,
    pub stream: StreamSource,
    /// Query spacing; `None` means every W/2 items. The end of the stream is always queried.
    pub checkpoint_every: Option<u64>,
    pub oracle: bool,
    /// Adds a wall-clock column, which makes reports nondeterministic.
    pub timings: bool,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemConfig, window: u64, seeds: Vec<u64>, stream: StreamSource) -> Self {
        ExperimentConfig { problem, window, seeds, stream, checkpoint_every: None, oracle: false, timings: false, output: None }
    }

    pub fn checkpoint_step(&self) -> u64 {
        self.checkpoint_every.unwrap_or(self.window / 2).max(1)
    }

    /// Name of the constant profile, when the problem has one.
    pub fn profile_name(&self) -> Option<&'static str> {
        let name = |is_theory: bool, is_desk: bool| Some(if is_theory { "theory" } else if is_desk { "desk" } else { "custom" });
        match &self.problem {
            ProblemConfig::Kcover { params } => name(params.profile == KCoverProfile::theory(), params.profile == KCoverProfile::desk()),
            ProblemConfig::Cluster { params, .. } => {
                name(params.profile == ClusterProfile::theory(), params.profile == ClusterProfile::desk())
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return invalid("window must be positive");
        }
        if self.seeds.is_empty() {
            return invalid("at least one seed is required");
        }
        if self.checkpoint_every == Some(0) {
            return invalid("checkpoint spacing must be positive");
        }
        let gen = match &self.stream {
            StreamSource::Generate { spec } => Some(spec),
            StreamSource::File { .. } => None,
        };
        match &self.problem {
            ProblemConfig::Toy { params, .. } => {
                params.validate()?;
                if gen.is_some_and(|g| !matches!(g, GenSpec::Bits { .. })) {
                    return invalid("toy problems read bit streams");
                }
            }
            ProblemConfig::Kcover { params } => {
                params.validate()?;
                match gen {
                    None | Some(GenSpec::AppendixKcover { .. }) => {}
                    Some(GenSpec::Edges { n, m, .. }) if *n <= params.n && *m <= params.m => {}
                    _ => return invalid("k-cover needs an edge generator within [0, n) x [0, m)"),
                }
            }
            ProblemConfig::Diversity { params } => {
                params.validate()?;
                check_points(gen, params.d, params.delta)?;
            }
            ProblemConfig::Cluster { params, jl_eps } => {
                params.validate()?;
                if params.window != self.window {
                    return invalid(format!("cluster window {} differs from the experiment window {}", params.window, self.window));
                }
                if let Some(e) = jl_eps {
                    if !(*e > 0.0 && *e <= 0.5) {
                        return invalid(format!("projection eps must lie in (0, 0.5], got {e}"));
                    }
                }
                check_points(gen, params.d, params.delta)?;
            }
        }
        Ok(())
    }
}

fn check_points(gen: Option<&GenSpec>, d: usize, delta: i64) -> Result<()> {
    match gen {
        None => Ok(()),
        Some(GenSpec::Mixture { d: gd, delta: gdelta, .. }) if *gd == d && *gdelta <= delta => Ok(()),
        Some(GenSpec::AppendixDiversity { k }) if 2 * k == d && delta >= 2 => Ok(()),
        _ => invalid(format!("point problems need a generator in [1, {delta}]^{d}")),
    }
}
