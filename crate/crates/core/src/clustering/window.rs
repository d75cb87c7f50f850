use std::sync::Arc;

use super::coreset::{Coreset, CoresetPlan};
use super::grid::ShiftedGrids;
use super::sketch::{cluster_spec, sub_fail, ClusterParams, ClusterSpec};
use super::solve::{as_center, solve_on_coreset, Centers};
use super::tracker::{DistinctQuery, DistinctTracker};
use crate::error::Result;
use crate::framework::{make_ladder, SlidingSketch, WindowedEstimate};
use crate::geometry::Point;
use crate::prf::Prf;

const TAG_LEVEL_SEED: u64 = 0xC5;

#[derive(Debug, Clone, PartialEq)]
pub enum ClusterSource {
    /// At most k distinct points in the window.
    Tracker,
    Ladder { level: usize, guess: f64 },
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAnswer {
    pub source: ClusterSource,
    pub centers: Centers,
    /// Cost of `centers` on the coreset; `None` on FAIL.
    pub estimate: Option<f64>,
    pub coreset: Option<Coreset>,
    pub plan: Option<CoresetPlan>,
}

/// Coreset ladder over `[1, W·(√d·Δ)^p]` plus the distinct-value tracker.
#[derive(Debug, Clone)]
pub struct ClusterWindow {
    pub params: ClusterParams,
    pub grids: Arc<ShiftedGrids>,
    pub sketch: SlidingSketch<ClusterSpec>,
    pub tracker: DistinctTracker,
}

impl ClusterWindow {
    pub fn new(params: ClusterParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let grids = Arc::new(ShiftedGrids::new(params.delta, params.d, params.window, seed)?);
        let ladder = make_ladder(1.0, params.max_cost().max(1.0))?;
        let fail = sub_fail(&params, ladder.len());
        let prf = Prf::new(seed);
        let mut specs = Vec::with_capacity(ladder.len());
        for (i, &o) in ladder.levels().iter().enumerate() {
            specs.push(cluster_spec(&params, grids.clone(), o, fail, prf.hash(&[TAG_LEVEL_SEED, i as u64]))?);
        }
        let cap = params.space_cap.unwrap_or_else(|| params.default_space_cap(grids.depth(), fail));
        let mut specs = specs.into_iter();
        let sketch = SlidingSketch::new(ladder, cap, |_, _| specs.next().expect("one per level"));
        let tracker = DistinctTracker::new(params.k);
        Ok(ClusterWindow { params, grids, sketch, tracker })
    }

    pub fn ingest(&mut self, x: Point) {
        self.sketch.ingest(x.clone());
        self.tracker.ingest(self.sketch.now(), x);
    }

    pub fn query(&self, w: u64) -> Result<ClusterAnswer> {
        if let DistinctQuery::AtMostK(points) = self.tracker.query(self.sketch.window_start(w)) {
            return Ok(ClusterAnswer {
                source: ClusterSource::Tracker,
                centers: points.iter().map(as_center).collect(),
                estimate: Some(0.0),
                coreset: None,
                plan: None,
            });
        }
        match self.sketch.query(w) {
            WindowedEstimate::Ok { level, guess, output } => {
                let prm = &self.params;
                let weighted = output.coreset.weighted();
                let centers = if weighted.is_empty() {
                    Vec::new()
                } else {
                    solve_on_coreset(&weighted, prm.k, prm.p, prm.method, prm.subset_budget)?
                };
                let estimate = if centers.is_empty() { 0.0 } else { output.coreset.cost(&centers, prm.p) };
                Ok(ClusterAnswer {
                    source: ClusterSource::Ladder { level, guess },
                    centers,
                    estimate: Some(estimate),
                    coreset: Some(output.coreset),
                    plan: Some(output.plan),
                })
            }
            WindowedEstimate::Fail => {
                Ok(ClusterAnswer { source: ClusterSource::Fail, centers: Vec::new(), estimate: None, coreset: None, plan: None })
            }
        }
    }
}
