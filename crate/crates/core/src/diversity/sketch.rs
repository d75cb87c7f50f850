use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::tracker::{ZeroOptTracker, ZeroQuery};
use super::value::{div_value_matrix, distance_matrix, normalizer, Objective};
use crate::error::{invalid, Result};
use crate::framework::{make_ladder, LevelSnapshot, SketchSpec, SlidingSketch, Stamped};
use crate::geometry::{binomial, for_each_subset, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    /// Enumerates k-subsets; falls back to greedy (uncertified) above the budget.
    Exact,
    /// Farthest-point insertion.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivParams {
    pub objective: Objective,
    pub d: usize,
    pub delta: i64,
    pub eps: f64,
    /// Overrides the default per-level cap.
    pub space_cap: Option<f64>,
    pub solver: Solver,
    /// Largest number of k-subsets the exact solver enumerates.
    pub enum_budget: u128,
}

impl DivParams {
    pub fn new(objective: Objective, d: usize, delta: i64, eps: f64) -> Self {
        DivParams { objective, d, delta, eps, space_cap: None, solver: Solver::Exact, enum_budget: 2_000_000 }
    }

    pub fn validate(&self) -> Result<()> {
        self.objective.validate()?;
        if self.d == 0 || self.delta < 1 {
            return invalid("dimension and Δ must be positive");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return invalid(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if self.objective.k > self.objective.kind.exact_cap() {
            return invalid(format!("k={} exceeds the evaluator cap for {}", self.objective.k, self.objective.kind.name()));
        }
        Ok(())
    }

    pub fn mu(&self, o: f64) -> f64 {
        self.eps * o / (10.0 * (self.d as f64).sqrt())
    }

    /// `d·(k·T_div·(2√d + 40√d/ε + 1)^d + k)`: the grid bound at `OPT̄ ≤ 2o`, in units.
    pub fn default_space_cap(&self) -> f64 {
        let sd = (self.d as f64).sqrt();
        let k = self.objective.k as f64;
        let per = (2.0 * sd + 40.0 * sd / self.eps + 1.0).powi(self.d as i32);
        self.d as f64 * (k * self.objective.cell_cap() as f64 * per + k)
    }

    pub fn space_cap(&self) -> f64 {
        self.space_cap.unwrap_or_else(|| self.default_space_cap())
    }
}

/// Componentwise `⌊x/μ⌋·μ`.
pub fn grid_snap(x: &Point, mu: f64) -> Vec<f64> {
    x.coords().iter().map(|&c| (c as f64 / mu).floor() * mu).collect()
}

fn cell_index(x: &Point, mu: f64) -> Vec<i64> {
    x.coords().iter().map(|&c| (c as f64 / mu).floor() as i64).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DivBucket {
    /// The single bucket holding the k latest points.
    Latest,
    Cell(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivSolution {
    pub points: Vec<Point>,
    pub value: f64,
    pub normalized: f64,
    /// False when the greedy fallback produced the answer.
    pub certified: bool,
    pub candidates: usize,
}

#[derive(Debug, Clone)]
pub struct DivSpec {
    pub objective: Objective,
    pub d: usize,
    pub mu: f64,
    pub solver: Solver,
    pub enum_budget: u128,
}

pub fn div_spec(params: &DivParams, o: f64) -> Result<DivSpec> {
    params.validate()?;
    Ok(DivSpec {
        objective: params.objective,
        d: params.d,
        mu: params.mu(o),
        solver: params.solver,
        enum_budget: params.enum_budget,
    })
}

impl DivSpec {
    /// Window points held by either sub-sketch, by arrival.
    pub fn reconstruct(snap: &LevelSnapshot<Self>) -> Vec<Point> {
        let mut by_tau = BTreeMap::new();
        for sub in &snap.contents.subs {
            for b in sub.values() {
                for e in &b.entries {
                    by_tau.insert(e.tau, e.item.clone());
                }
            }
        }
        by_tau.into_values().collect()
    }
}

impl SketchSpec for DivSpec {
    type Item = Point;
    type Bucket = DivBucket;
    type Info = ();
    type Output = DivSolution;

    fn num_subs(&self) -> usize {
        2
    }

    fn threshold(&self, sub: usize) -> f64 {
        let per = if sub == 0 { self.objective.k } else { self.objective.cell_cap() };
        (per * self.d) as f64
    }

    fn admit(&self, sub: usize, item: &Stamped<Point>) -> Option<(DivBucket, ())> {
        Some(if sub == 0 { (DivBucket::Latest, ()) } else { (DivBucket::Cell(cell_index(&item.value, self.mu)), ()) })
    }

    fn unit_size(&self, _: usize, _: &()) -> u64 {
        self.d as u64
    }

    fn recover(&self, snap: &LevelSnapshot<Self>) -> Option<DivSolution> {
        let pts = Self::reconstruct(snap);
        if pts.len() < self.objective.k {
            return None;
        }
        solve(&pts, &self.objective, self.solver, self.enum_budget).ok()
    }
}

/// Best k-subset of `points` under the objective.
pub fn solve(points: &[Point], obj: &Objective, solver: Solver, budget: u128) -> Result<DivSolution> {
    let k = obj.k;
    if points.len() < k {
        return invalid(format!("need at least {k} candidates, got {}", points.len()));
    }
    let norm = normalizer(obj)?;
    let dm = distance_matrix(points);
    let sub_matrix = |idx: &[usize]| -> Vec<Vec<f64>> { idx.iter().map(|&i| idx.iter().map(|&j| dm[i][j]).collect()).collect() };
    let exact = solver == Solver::Exact && binomial(points.len(), k) <= budget;
    let (value, idx) = if exact {
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut err = None;
        for_each_subset(points.len(), k, |s| match div_value_matrix(&sub_matrix(s), obj) {
            Ok(v) => {
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, s.to_vec()));
                }
            }
            Err(e) => err = Some(e),
        });
        if let Some(e) = err {
            return Err(e);
        }
        best.expect("at least one subset")
    } else {
        let idx = farthest_point(&dm, k);
        (div_value_matrix(&sub_matrix(&idx), obj)?, idx)
    };
    Ok(DivSolution {
        points: idx.iter().map(|&i| points[i].clone()).collect(),
        value,
        normalized: value / norm,
        certified: exact,
        candidates: points.len(),
    })
}

/// Gonzalez insertion starting from the point farthest from the first candidate.
fn farthest_point(dm: &[Vec<f64>], k: usize) -> Vec<usize> {
    let n = dm.len();
    let argmax = |f: &dyn Fn(usize) -> f64| -> usize {
        (0..n).fold(0, |best, i| if f(i) > f(best) { i } else { best })
    };
    let first = argmax(&|i| dm[0][i]);
    let mut chosen = vec![first];
    let mut near: Vec<f64> = dm[first].clone();
    let mut used = vec![false; n];
    used[first] = true;
    while chosen.len() < k {
        let next = (0..n)
            .filter(|&i| !used[i])
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if near[b] >= near[i] => Some(b),
                _ => Some(i),
            })
            .expect("enough candidates");
        used[next] = true;
        chosen.push(next);
        for i in 0..n {
            near[i] = near[i].min(dm[next][i]);
        }
    }
    chosen.sort_unstable();
    chosen
}

#[derive(Debug, Clone, PartialEq)]
pub enum DivSource {
    Tracker,
    Ladder { level: usize, guess: f64 },
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivAnswer {
    pub source: DivSource,
    pub solution: Option<DivSolution>,
}

impl DivAnswer {
    pub fn normalized(&self) -> Option<f64> {
        self.solution.as_ref().map(|s| s.normalized)
    }
}

/// Grid-sketch ladder over `[1, √d·Δ]` plus the zero-optimum tracker.
#[derive(Debug, Clone)]
pub struct DivWindow {
    pub params: DivParams,
    pub sketch: SlidingSketch<DivSpec>,
    pub tracker: ZeroOptTracker,
}

impl DivWindow {
    pub fn new(params: DivParams) -> Result<Self> {
        params.validate()?;
        let top = (params.d as f64).sqrt() * params.delta as f64;
        let ladder = make_ladder(1.0, top.max(1.0))?;
        let mut specs = Vec::new();
        for &o in ladder.levels() {
            specs.push(div_spec(&params, o)?);
        }
        let mut specs = specs.into_iter();
        let sketch = SlidingSketch::new(ladder, params.space_cap(), |_, _| specs.next().expect("one per level"));
        let tracker = ZeroOptTracker::new(params.objective.k, params.objective.k);
        Ok(DivWindow { params, sketch, tracker })
    }

    pub fn ingest(&mut self, x: Point) {
        self.sketch.ingest(x.clone());
        self.tracker.ingest(self.sketch.now(), x);
    }

    pub fn query(&self, w: u64) -> Result<DivAnswer> {
        let start = self.sketch.window_start(w);
        match self.tracker.query(start, &self.params.objective)? {
            ZeroQuery::Exact { value, points } => {
                let normalized = value / normalizer(&self.params.objective)?;
                let solution = DivSolution { candidates: points.len(), points, value, normalized, certified: true };
                Ok(DivAnswer { source: DivSource::Tracker, solution: Some(solution) })
            }
            ZeroQuery::AtLeastK => Ok(match self.sketch.query(w) {
                crate::framework::WindowedEstimate::Ok { level, guess, output } => {
                    DivAnswer { source: DivSource::Ladder { level, guess }, solution: Some(output) }
                }
                crate::framework::WindowedEstimate::Fail => DivAnswer { source: DivSource::Fail, solution: None },
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diversity::DiversityKind;
    use crate::framework::offline_sketch;

    fn stamp(points: &[Point]) -> Vec<Stamped<Point>> {
        points.iter().enumerate().map(|(i, p)| Stamped { tau: i as u64 + 1, value: p.clone() }).collect()
    }

    #[test]
    fn snap_examples() {
        assert_eq!(grid_snap(&Point::from([5, 3]), 2.0), vec![4.0, 2.0]);
        assert_eq!(grid_snap(&Point::from([4, 6]), 2.0), vec![4.0, 6.0]);
        for x in 1..20 {
            for y in 1..20 {
                let p = Point::from([x, y]);
                let s = grid_snap(&p, 1.0);
                let d2: f64 = p.coords().iter().zip(&s).map(|(&a, b)| (a as f64 - b).powi(2)).sum();
                assert!(d2.sqrt() <= 2f64.sqrt());
            }
        }
    }

    #[test]
    fn latest_bucket_and_cell_cap() {
        let obj = Objective::new(DiversityKind::Clique, 2, 1).unwrap();
        let params = DivParams::new(obj, 2, 64, 0.25);
        // μ ≈ 35 at o = 2000, so all points below share a cell.
        let spec = div_spec(&params, 2000.0).unwrap();
        let pts: Vec<Point> = (1..=4).map(|i| Point::from([i, 1])).collect();
        let c = offline_sketch(&spec, &stamp(&pts));
        let latest: Vec<u64> = c.subs[0][&DivBucket::Latest].entries.iter().map(|e| e.tau).collect();
        assert_eq!(latest, vec![3, 4]);
        assert_eq!(c.subs[1].len(), 1);
        let cell = c.subs[1].values().next().unwrap();
        assert_eq!(cell.entries.iter().map(|e| e.tau).collect::<Vec<_>>(), vec![3, 4]);
        let one = offline_sketch(&spec, &stamp(&pts[..1]));
        assert_eq!(one.subs[0][&DivBucket::Latest].entries.len(), 1);
    }

    #[test]
    fn appendix_sets_through_solver() {
        let a: Vec<Point> = [[0, 1, 1, 0], [1, 1, 0, 0], [1, 0, 1, 0]].iter().map(|&p| Point::from(p)).collect();
        let obj = Objective::new(DiversityKind::Edge, 2, 1).unwrap();
        let sol = solve(&a, &obj, Solver::Exact, 1000).unwrap();
        assert_eq!(sol.normalized, 2f64.sqrt());
        let mut ac = a.clone();
        ac.push(Point::from([1, 0, 0, 1]));
        assert_eq!(solve(&ac, &obj, Solver::Exact, 1000).unwrap().normalized, 2.0);
    }

    #[test]
    fn greedy_fallback_is_uncertified() {
        let pts: Vec<Point> = (1..=30).map(|i| Point::from([i, (i * 7) % 13 + 1])).collect();
        let obj = Objective::new(DiversityKind::Edge, 4, 1).unwrap();
        let exact = solve(&pts, &obj, Solver::Exact, 1_000_000).unwrap();
        let fallback = solve(&pts, &obj, Solver::Exact, 10).unwrap();
        assert!(exact.certified && !fallback.certified);
        assert!(fallback.value <= exact.value);
        assert!(fallback.value >= exact.value / 2.0);
    }

    #[test]
    fn window_answers_match_small_cases() {
        let obj = Objective::new(DiversityKind::Tree, 3, 1).unwrap();
        let mut win = DivWindow::new(DivParams::new(obj, 2, 64, 0.25)).unwrap();
        for p in [[1, 1], [1, 1], [5, 1]] {
            win.ingest(Point::from(p));
        }
        let ans = win.query(3).unwrap();
        assert_eq!(ans.source, DivSource::Tracker);
        assert_eq!(ans.solution.unwrap().value, 4.0);
        win.ingest(Point::from([5, 4]));
        let ans = win.query(3).unwrap();
        assert!(matches!(ans.source, DivSource::Ladder { .. }));
        assert_eq!(ans.solution.unwrap().value, 7.0);
    }
}
