use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use super::grid::parent;
use super::sketch::{ClusterSpec, Part};
use super::solve::{weighted_cost, Centers};
use crate::framework::SketchContents;
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStat {
    /// Estimated point count `λ(C)`.
    pub lambda: f64,
    pub heavy: bool,
}

/// Heavy flags and count estimates for every examined cell of levels `0..=L`.
/// The level -1 root is implicitly heavy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HeavyCrucialMap {
    pub cells: Vec<BTreeMap<Vec<i64>, CellStat>>,
}

impl HeavyCrucialMap {
    pub fn is_heavy(&self, level: i32, cell: &[i64]) -> bool {
        level < 0 || self.cells.get(level as usize).and_then(|m| m.get(cell)).is_some_and(|c| c.heavy)
    }

    /// Non-heavy with a heavy parent, hence with all ancestors heavy.
    pub fn is_crucial(&self, level: i32, cell: &[i64]) -> bool {
        !self.is_heavy(level, cell) && self.is_heavy(level - 1, &parent(cell))
    }

    pub fn heavy_cells(&self, level: usize) -> impl Iterator<Item = &Vec<i64>> {
        self.cells[level].iter().filter(|(_, s)| s.heavy).map(|(c, _)| c)
    }
}

/// Marks cells heavy top-down: `λ(C) = stored/p_i ≥ R_i` (or the bucket
/// overflowed) and the parent is heavy.
pub fn heavy_partition(spec: &ClusterSpec, contents: &SketchContents<ClusterSpec>) -> HeavyCrucialMap {
    let mut map = HeavyCrucialMap::default();
    for level in 0..=spec.depth() {
        let rates = &spec.rates[level];
        let mut stats = BTreeMap::new();
        for (cell, bucket) in &contents.subs[spec.sub(Part::Counts, level)] {
            let lambda = bucket.entries.len() as f64 / rates.p_z;
            let heavy = (lambda >= rates.r || bucket.overflowed) && map.is_heavy(level as i32 - 1, &parent(cell));
            stats.insert(cell.clone(), CellStat { lambda, heavy });
        }
        map.cells.push(stats);
    }
    map
}

/// Sampling plan of the offline coreset construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CoresetPlan {
    /// `λ(X^i)` for `i ∈ 0..=L`.
    pub lambda: Vec<f64>,
    /// `min(2^{2p+1}/R_i, 1)` for `i ∈ 0..=L`.
    pub sensitivity: Vec<f64>,
    /// Levels with `λ(X^i) ≥ γ·R_i`.
    pub active: Vec<usize>,
    pub gamma: f64,
    pub t_prime: f64,
    pub m: u64,
}

/// `m = ⌈c·t′·ε⁻²(ln n·ln(2t′) + ln 1/δ)⌉`, 0 when `t′ = 0`.
pub fn sample_count(c: f64, t_prime: f64, eps: f64, n: u64, fail: f64) -> u64 {
    if t_prime <= 0.0 {
        return 0;
    }
    let inner = (n.max(2) as f64).ln() * (2.0 * t_prime).ln().max(0.0) + (1.0 / fail).ln();
    (c * t_prime / (eps * eps) * inner).ceil().max(1.0) as u64
}

/// Estimates `λ(X^i)` from Z′ restricted to crucial cells. `None` (FAIL) when
/// a crucial bucket overflowed.
pub fn crucial_stats(spec: &ClusterSpec, contents: &SketchContents<ClusterSpec>, heavy: &HeavyCrucialMap) -> Option<CoresetPlan> {
    let mut lambda = Vec::with_capacity(spec.depth() + 1);
    for level in 0..=spec.depth() {
        let mut stored = 0usize;
        for (cell, bucket) in &contents.subs[spec.sub(Part::Crucial, level)] {
            if heavy.is_crucial(level as i32, cell) {
                if bucket.overflowed {
                    return None;
                }
                stored += bucket.entries.len();
            }
        }
        lambda.push(stored as f64 / spec.rates[level].p_zp);
    }
    let sensitivity: Vec<f64> = (0..=spec.depth()).map(|i| spec.sensitivity(i)).collect();
    let active: Vec<usize> = (0..=spec.depth()).filter(|&i| lambda[i] >= spec.gamma * spec.rates[i].r).collect();
    let t_prime = active.iter().map(|&i| lambda[i] * sensitivity[i]).sum();
    let m = sample_count(spec.coreset_const, t_prime, spec.eps, spec.n, spec.sub_fail);
    Some(CoresetPlan { lambda, sensitivity, active, gamma: spec.gamma, t_prime, m })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoint {
    pub point: Point,
    pub weight: f64,
    pub level: usize,
}

/// Weighted multiset of sampled points.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Coreset {
    pub samples: Vec<WeightedPoint>,
}

impl Coreset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn weighted(&self) -> Vec<(Point, f64)> {
        self.samples.iter().map(|s| (s.point.clone(), s.weight)).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    pub fn cost(&self, centers: &Centers, p: f64) -> f64 {
        weighted_cost(&self.weighted(), centers, p)
    }
}

/// The nonempty replica sets `Ŷ^i_j` of one level, by increasing j.
pub fn replica_sets(
    spec: &ClusterSpec,
    contents: &SketchContents<ClusterSpec>,
    heavy: &HeavyCrucialMap,
    level: usize,
) -> Option<Vec<(u32, Vec<Point>)>> {
    let mut sets: BTreeMap<u32, Vec<Point>> = BTreeMap::new();
    for (cell, bucket) in &contents.subs[spec.sub(Part::Replicas, level)] {
        if !heavy.is_crucial(level as i32, cell) {
            continue;
        }
        if bucket.overflowed {
            return None;
        }
        for e in &bucket.entries {
            for &j in e.info.ids.iter() {
                sets.entry(j).or_default().push(e.item.clone());
            }
        }
    }
    Some(sets.into_iter().collect())
}

/// Draws m samples: a level by `λ(X^i)·min(2^{2p+1}/R_i,1)/t′`, then a uniform
/// member of the lowest unused nonempty `Ŷ^i_j`. `None` (FAIL) when a level
/// runs out of replicas.
pub fn draw_coreset<R: Rng>(
    spec: &ClusterSpec,
    contents: &SketchContents<ClusterSpec>,
    heavy: &HeavyCrucialMap,
    plan: &CoresetPlan,
    rng: &mut R,
) -> Option<Coreset> {
    if plan.m == 0 {
        return Some(Coreset::default());
    }
    let mut sets = Vec::with_capacity(plan.active.len());
    for &level in &plan.active {
        sets.push(replica_sets(spec, contents, heavy, level)?);
    }
    let weights: Vec<f64> = plan.active.iter().map(|&i| plan.lambda[i] * plan.sensitivity[i]).collect();
    let alias = WeightedAliasIndex::new(weights).ok()?;
    let mut next = vec![0usize; sets.len()];
    let mut samples = Vec::new();
    for _ in 0..plan.m {
        let a = alias.sample(rng);
        let (_, members) = sets[a].get(next[a])?;
        next[a] += 1;
        let level = plan.active[a];
        let point = members[rng.random_range(0..members.len())].clone();
        let weight = plan.t_prime / (plan.m as f64 * plan.sensitivity[level]);
        samples.push(WeightedPoint { point, weight, level });
    }
    Some(Coreset { samples })
}
