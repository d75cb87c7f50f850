//! Maximum k-coverage over a window of (set, element) edges.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::framework::{make_ladder, LevelSnapshot, SketchSpec, SlidingSketch, Stamped, WindowedEstimate};
use crate::geometry::for_each_subset;
use crate::prf::{KWiseHash, Prf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub set_id: u32,
    pub elem_id: u32,
}

impl Edge {
    pub fn new(set_id: u32, elem_id: u32) -> Self {
        Edge { set_id, elem_id }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoverMode {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum HashMode {
    Prf,
    /// Polynomial hash over a prime field; `independence = 0` picks `⌈k ln(1/δ) ln n⌉`.
    Polynomial { independence: usize },
}

/// Divisors applied to the sampling-rate and space-cap constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KCoverProfile {
    pub rate_divisor: f64,
    pub budget_divisor: f64,
}

impl KCoverProfile {
    pub fn theory() -> Self {
        KCoverProfile { rate_divisor: 1.0, budget_divisor: 1.0 }
    }

    pub fn desk() -> Self {
        KCoverProfile { rate_divisor: 4.0, budget_divisor: 2_000.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCoverParams {
    pub n: u32,
    pub m: u32,
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    pub profile: KCoverProfile,
    pub hash: HashMode,
    pub mode: RecoverMode,
}

fn ln_n(n: u32) -> f64 {
    (n.max(2) as f64).ln()
}

impl KCoverParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n as usize {
            return invalid(format!("k must lie in [1, n={}], got {}", self.n, self.k));
        }
        if self.m == 0 {
            return invalid("element universe must be nonempty");
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return invalid(format!("eps must lie in (0, 0.5), got {}", self.eps));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return invalid(format!("delta must lie in (0, 0.5), got {}", self.delta));
        }
        if !(self.profile.rate_divisor > 0.0 && self.profile.budget_divisor > 0.0) {
            return invalid("profile divisors must be positive");
        }
        Ok(())
    }

    pub fn rate(&self, o: f64) -> f64 {
        let c = self.k as f64 * (1.0 / self.delta).ln() * ln_n(self.n) / (self.eps * self.eps);
        (c / (self.profile.rate_divisor * o)).min(1.0)
    }

    pub fn degree_cap(&self) -> u64 {
        let t = self.n as f64 * (1.0 / self.eps).ln() / (self.eps * self.k as f64);
        (t.ceil() as u64).max(1)
    }

    /// Edge budget per level, `2·100·n·ln(1/δ)·ln(1/ε)·ln n/ε³` over the profile divisor.
    pub fn space_cap(&self) -> f64 {
        let e3 = self.eps.powi(3);
        200.0 * self.n as f64 * (1.0 / self.delta).ln() * (1.0 / self.eps).ln() * ln_n(self.n)
            / (e3 * self.profile.budget_divisor)
    }

    pub fn independence(&self) -> usize {
        match self.hash {
            HashMode::Prf => 0,
            HashMode::Polynomial { independence: 0 } => {
                (self.k as f64 * (1.0 / self.delta).ln() * ln_n(self.n)).ceil() as usize
            }
            HashMode::Polynomial { independence } => independence,
        }
    }
}

#[derive(Debug, Clone)]
enum ElemHash {
    Prf(Prf),
    Poly(KWiseHash),
}

impl ElemHash {
    fn unit(&self, e: u32) -> f64 {
        match self {
            ElemHash::Prf(p) => p.unit(&[e as u64]),
            ElemHash::Poly(h) => h.unit(e as u64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSolution {
    pub chosen: Vec<u32>,
    pub covered_in_sketch: usize,
    pub estimate: f64,
}

/// Subsampled, degree-capped sketch graph for one guess.
#[derive(Debug, Clone)]
pub struct KCoverSpec {
    pub p: f64,
    pub cap: u64,
    pub n: u32,
    pub k: usize,
    pub mode: RecoverMode,
    hash: ElemHash,
}

pub fn kcover_spec(params: &KCoverParams, o: f64, seed: u64) -> Result<KCoverSpec> {
    params.validate()?;
    let hash = match params.hash {
        HashMode::Prf => ElemHash::Prf(Prf::new(seed).derive(0xC0)),
        HashMode::Polynomial { .. } => ElemHash::Poly(KWiseHash::new(params.independence(), seed)),
    };
    Ok(KCoverSpec { p: params.rate(o), cap: params.degree_cap(), n: params.n, k: params.k, mode: params.mode, hash })
}

impl KCoverSpec {
    pub fn sampled(&self, elem: u32) -> bool {
        self.hash.unit(elem) <= self.p
    }

    /// The sketch graph's edges.
    pub fn graph(snap: &LevelSnapshot<Self>) -> Vec<Edge> {
        snap.contents.subs[0].values().flat_map(|b| b.entries.iter().map(|e| e.item)).collect()
    }
}

impl SketchSpec for KCoverSpec {
    type Item = Edge;
    type Bucket = u32;
    type Info = ();
    type Output = CoverageSolution;

    fn num_subs(&self) -> usize {
        1
    }

    fn threshold(&self, _: usize) -> f64 {
        self.cap as f64
    }

    fn admit(&self, _: usize, item: &Stamped<Edge>) -> Option<(u32, ())> {
        self.sampled(item.value.elem_id).then_some((item.value.elem_id, ()))
    }

    fn unit_size(&self, _: usize, _: &()) -> u64 {
        1
    }

    fn recover(&self, snap: &LevelSnapshot<Self>) -> Option<CoverageSolution> {
        let edges = Self::graph(snap);
        let sol = match self.mode {
            RecoverMode::Exact => recover_exact(&edges, self.n, self.k, self.p),
            RecoverMode::Greedy => recover_greedy(&edges, self.n, self.k, self.p),
        };
        Some(sol)
    }
}

pub fn coverage(edges: &[Edge], chosen: &[u32]) -> usize {
    let chosen: BTreeSet<u32> = chosen.iter().copied().collect();
    edges
        .iter()
        .filter(|e| chosen.contains(&e.set_id))
        .map(|e| e.elem_id)
        .collect::<BTreeSet<_>>()
        .len()
}

/// Neighborhood bitsets over the distinct elements of `edges`.
fn neighborhoods(edges: &[Edge], n: u32) -> Vec<Vec<u64>> {
    let elems: BTreeMap<u32, usize> = edges
        .iter()
        .map(|e| e.elem_id)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect();
    let words = elems.len().div_ceil(64).max(1);
    let mut sets = vec![vec![0u64; words]; n as usize];
    for e in edges {
        let j = elems[&e.elem_id];
        sets[e.set_id as usize][j / 64] |= 1 << (j % 64);
    }
    sets
}

fn union_count(sets: &[Vec<u64>], chosen: &[usize], scratch: &mut [u64]) -> usize {
    scratch.iter_mut().for_each(|w| *w = 0);
    for &s in chosen {
        for (a, b) in scratch.iter_mut().zip(&sets[s]) {
            *a |= b;
        }
    }
    scratch.iter().map(|w| w.count_ones() as usize).sum()
}

/// Best k-subset of `0..n` by brute force; the first maximum in lexicographic order wins.
pub fn recover_exact(edges: &[Edge], n: u32, k: usize, p: f64) -> CoverageSolution {
    let sets = neighborhoods(edges, n);
    let k = k.min(n as usize);
    let mut scratch = vec![0u64; sets.first().map_or(1, |s| s.len())];
    let mut best: Option<(usize, Vec<usize>)> = None;
    for_each_subset(n as usize, k, |sub| {
        let c = union_count(&sets, sub, &mut scratch);
        if best.as_ref().is_none_or(|(b, _)| c > *b) {
            best = Some((c, sub.to_vec()));
        }
    });
    let (covered, chosen) = best.unwrap_or_default();
    CoverageSolution {
        chosen: chosen.into_iter().map(|s| s as u32).collect(),
        covered_in_sketch: covered,
        estimate: covered as f64 / p,
    }
}

/// Greedy max coverage; ties go to the lowest set id.
pub fn recover_greedy(edges: &[Edge], n: u32, k: usize, p: f64) -> CoverageSolution {
    let sets = neighborhoods(edges, n);
    let words = sets.first().map_or(1, |s| s.len());
    let mut covered = vec![0u64; words];
    let mut chosen = Vec::new();
    let mut used = vec![false; n as usize];
    for _ in 0..k.min(n as usize) {
        let mut best: Option<(usize, usize)> = None;
        for (s, bits) in sets.iter().enumerate() {
            if used[s] {
                continue;
            }
            let gain: usize = bits.iter().zip(&covered).map(|(b, c)| (b & !c).count_ones() as usize).sum();
            if best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, s));
            }
        }
        let Some((_, s)) = best else { break };
        used[s] = true;
        for (c, b) in covered.iter_mut().zip(&sets[s]) {
            *c |= b;
        }
        chosen.push(s as u32);
    }
    let count = covered.iter().map(|w| w.count_ones() as usize).sum();
    CoverageSolution { chosen, covered_in_sketch: count, estimate: count as f64 / p }
}

/// Whether the latest edge timestamp lies in `[N−W+1, N]`.
pub fn window_has_edge(latest: Option<u64>, now: u64, w: u64) -> bool {
    latest.is_some_and(|t| t + w > now && t <= now)
}

/// Ladder of k-cover sketches plus the latest-edge tracker for empty windows.
#[derive(Debug, Clone)]
pub struct KCoverWindow {
    pub params: KCoverParams,
    pub sketch: SlidingSketch<KCoverSpec>,
    latest: Option<u64>,
}

impl KCoverWindow {
    pub fn new(params: KCoverParams, w: u64, seed: u64) -> Result<Self> {
        params.validate()?;
        if w == 0 {
            return invalid("window must be positive");
        }
        let ladder = make_ladder(1.0, w as f64)?;
        let mut specs = Vec::new();
        for &o in ladder.levels() {
            specs.push(kcover_spec(&params, o, seed)?);
        }
        let mut specs = specs.into_iter();
        let sketch = SlidingSketch::new(ladder, params.space_cap(), |_, _| specs.next().expect("one per level"));
        Ok(KCoverWindow { params, sketch, latest: None })
    }

    pub fn ingest(&mut self, e: Edge) {
        self.sketch.ingest(e);
        self.latest = Some(self.sketch.now());
    }

    pub fn window_nonempty(&self, w: u64) -> bool {
        window_has_edge(self.latest, self.sketch.now(), w)
    }

    /// Zero for an empty window, otherwise the ladder's recovery.
    pub fn query(&self, w: u64) -> WindowedEstimate<CoverageSolution> {
        if !self.window_nonempty(w) {
            let chosen = (0..self.params.k as u32).collect();
            return WindowedEstimate::Ok {
                level: 0,
                guess: self.sketch.ladder().min(),
                output: CoverageSolution { chosen, covered_in_sketch: 0, estimate: 0.0 },
            };
        }
        self.sketch.query(w)
    }
}
