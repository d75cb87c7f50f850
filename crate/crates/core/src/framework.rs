//! Sliding-window maintenance of bucketing-based sketches over a ladder of guesses.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Debug;

use crate::error::{invalid, Result};

/// An item tagged with its 1-based arrival index.
#[derive(Debug, Clone, PartialEq)]
pub struct Stamped<I> {
    pub tau: u64,
    pub value: I,
}

/// Geometric guesses `m, 2m, 4m, ...` up to the first value `>= M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessLadder {
    levels: Vec<f64>,
    min: f64,
    max: f64,
}

pub fn make_ladder(m: f64, big_m: f64) -> Result<GuessLadder> {
    if !(m > 0.0) || !m.is_finite() {
        return invalid(format!("ladder minimum must be positive, got {m}"));
    }
    if !(big_m >= m) || !big_m.is_finite() {
        return invalid(format!("ladder maximum {big_m} below minimum {m}"));
    }
    let mut levels = vec![m];
    let mut o = m;
    while o < big_m {
        o *= 2.0;
        levels.push(o);
    }
    Ok(GuessLadder { levels, min: m, max: big_m })
}

impl GuessLadder {
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Failure probability of the whole ladder when each level fails w.p. `per_level`.
    pub fn union_bound(&self, per_level: f64) -> f64 {
        (per_level * self.len() as f64).min(1.0)
    }
}

/// One problem's bucketing-based sketch at a fixed guess.
///
/// Sub-sketches are indexed `0..num_subs()`. `admit` applies the filter and,
/// when it passes, returns the bucket id and processed info; it must be a pure
/// function of the seed and the item.
pub trait SketchSpec {
    type Item: Clone + PartialEq + Debug;
    type Bucket: Clone + Ord + Debug;
    type Info: Clone + PartialEq + Debug;
    type Output;

    fn num_subs(&self) -> usize;
    fn threshold(&self, sub: usize) -> f64;
    fn admit(&self, sub: usize, item: &Stamped<Self::Item>) -> Option<(Self::Bucket, Self::Info)>;
    fn unit_size(&self, sub: usize, info: &Self::Info) -> u64;
    /// `None` means FAIL.
    fn recover(&self, snap: &LevelSnapshot<Self>) -> Option<Self::Output>
    where
        Self: Sized;
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredEntry<I, F> {
    pub tau: u64,
    pub item: I,
    pub info: F,
    pub size: u64,
}

/// Stored entries of one bucket, oldest first. `overflowed` is set when some
/// filtered item of the represented set was dropped by the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketContents<I, F> {
    pub entries: Vec<StoredEntry<I, F>>,
    pub overflowed: bool,
}

impl<I, F> BucketContents<I, F> {
    pub fn load(&self) -> u64 {
        self.entries.iter().map(|e| e.size).sum()
    }
}

pub type SubContents<S> =
    BTreeMap<<S as SketchSpec>::Bucket, BucketContents<<S as SketchSpec>::Item, <S as SketchSpec>::Info>>;

/// Materialized sketch: one bucket map per sub-sketch.
pub struct SketchContents<S: SketchSpec> {
    pub subs: Vec<SubContents<S>>,
}

impl<S: SketchSpec> Clone for SketchContents<S> {
    fn clone(&self) -> Self {
        SketchContents { subs: self.subs.clone() }
    }
}

impl<S: SketchSpec> PartialEq for SketchContents<S> {
    fn eq(&self, other: &Self) -> bool {
        self.subs == other.subs
    }
}

impl<S: SketchSpec> Debug for SketchContents<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SketchContents").field("subs", &self.subs).finish()
    }
}

impl<S: SketchSpec> SketchContents<S> {
    /// Sum over buckets of `min(T_i, total filtered size)`.
    pub fn space_budget(&self, spec: &S) -> f64 {
        self.subs
            .iter()
            .enumerate()
            .map(|(i, sub)| {
                let t = spec.threshold(i);
                sub.values()
                    .map(|b| if b.overflowed { t } else { (b.load() as f64).min(t) })
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn entry_count(&self) -> usize {
        self.subs.iter().flat_map(|s| s.values()).map(|b| b.entries.len()).sum()
    }
}

/// Window-restricted contents of one qualifying ladder level.
#[derive(Debug)]
pub struct LevelSnapshot<S: SketchSpec> {
    pub level: usize,
    pub guess: f64,
    pub window_start: u64,
    pub now: u64,
    pub contents: SketchContents<S>,
}

impl<S: SketchSpec> Clone for LevelSnapshot<S> {
    fn clone(&self) -> Self {
        LevelSnapshot {
            level: self.level,
            guess: self.guess,
            window_start: self.window_start,
            now: self.now,
            contents: self.contents.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowedEstimate<T> {
    Ok { level: usize, guess: f64, output: T },
    Fail,
}

impl<T> WindowedEstimate<T> {
    pub fn is_fail(&self) -> bool {
        matches!(self, WindowedEstimate::Fail)
    }

    pub fn output(&self) -> Option<&T> {
        match self {
            WindowedEstimate::Ok { output, .. } => Some(output),
            WindowedEstimate::Fail => None,
        }
    }

    pub fn level(&self) -> Option<usize> {
        match self {
            WindowedEstimate::Ok { level, .. } => Some(*level),
            WindowedEstimate::Fail => None,
        }
    }
}

/// First non-FAIL recovery in increasing guess order.
pub fn recover<'a, S, It>(levels: It) -> WindowedEstimate<S::Output>
where
    S: SketchSpec + 'a,
    It: IntoIterator<Item = (&'a S, &'a LevelSnapshot<S>)>,
{
    for (spec, snap) in levels {
        if let Some(output) = spec.recover(snap) {
            return WindowedEstimate::Ok { level: snap.level, guess: snap.guess, output };
        }
    }
    WindowedEstimate::Fail
}

/// Builds the sketch of `items` directly from the definition, keeping the
/// longest latest-timestamp suffix of every bucket that fits its threshold.
pub fn offline_sketch<S: SketchSpec>(spec: &S, items: &[Stamped<S::Item>]) -> SketchContents<S> {
    let mut subs = Vec::with_capacity(spec.num_subs());
    for sub in 0..spec.num_subs() {
        let mut groups: BTreeMap<S::Bucket, Vec<StoredEntry<S::Item, S::Info>>> = BTreeMap::new();
        for it in items {
            if let Some((b, info)) = spec.admit(sub, it) {
                let size = spec.unit_size(sub, &info);
                groups
                    .entry(b)
                    .or_default()
                    .push(StoredEntry { tau: it.tau, item: it.value.clone(), info, size });
            }
        }
        let t = spec.threshold(sub);
        let mut out = BTreeMap::new();
        for (b, all) in groups {
            let mut total = 0u64;
            let mut keep = all.len();
            while keep > 0 && (total + all[keep - 1].size) as f64 <= t {
                total += all[keep - 1].size;
                keep -= 1;
            }
            let overflowed = keep > 0;
            let entries: Vec<_> = all.into_iter().skip(keep).collect();
            out.insert(b, BucketContents { entries, overflowed });
        }
        subs.push(out);
    }
    SketchContents { subs }
}

#[derive(Debug, Clone)]
struct BucketState<I, F> {
    entries: VecDeque<StoredEntry<I, F>>,
    load: u64,
    /// Largest τ evicted by the threshold, 0 if none.
    last_evicted: u64,
}

impl<I, F> BucketState<I, F> {
    fn overflowed_since(&self, start: u64) -> bool {
        self.last_evicted > 0 && self.last_evicted >= start
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct SubBudget {
    open_load: u64,
    overflowed: u64,
}

impl SubBudget {
    fn remove<I, F>(&mut self, b: &BucketState<I, F>, left: u64) {
        if b.overflowed_since(left) {
            self.overflowed -= 1;
        } else {
            self.open_load -= b.load;
        }
    }

    fn add<I, F>(&mut self, b: &BucketState<I, F>, left: u64) {
        if b.overflowed_since(left) {
            self.overflowed += 1;
        } else {
            self.open_load += b.load;
        }
    }
}

type LogEntry<B> = (u64, Vec<(usize, B)>);

/// State of one guess level: buckets, left pointer and budget counters.
#[derive(Debug, Clone)]
pub struct LevelState<S: SketchSpec> {
    spec: S,
    guess: f64,
    subs: Vec<BTreeMap<S::Bucket, BucketState<S::Item, S::Info>>>,
    budgets: Vec<SubBudget>,
    left: u64,
    log: VecDeque<LogEntry<S::Bucket>>,
}

impl<S: SketchSpec> LevelState<S> {
    fn new(spec: S, guess: f64) -> Self {
        let t = spec.num_subs();
        LevelState {
            spec,
            guess,
            subs: (0..t).map(|_| BTreeMap::new()).collect(),
            budgets: vec![SubBudget::default(); t],
            left: 1,
            log: VecDeque::new(),
        }
    }

    pub fn spec(&self) -> &S {
        &self.spec
    }

    pub fn guess(&self) -> f64 {
        self.guess
    }

    pub fn left(&self) -> u64 {
        self.left
    }

    pub fn space_budget(&self) -> f64 {
        self.budgets
            .iter()
            .enumerate()
            .map(|(i, b)| b.open_load as f64 + b.overflowed as f64 * self.spec.threshold(i))
            .sum()
    }

    fn insert(&mut self, item: &Stamped<S::Item>) {
        let mut touched = Vec::new();
        for sub in 0..self.subs.len() {
            let Some((b, info)) = self.spec.admit(sub, item) else {
                continue;
            };
            let size = self.spec.unit_size(sub, &info);
            let t = self.spec.threshold(sub);
            let left = self.left;
            let bucket = self.subs[sub].entry(b.clone()).or_insert_with(|| BucketState {
                entries: VecDeque::new(),
                load: 0,
                last_evicted: 0,
            });
            self.budgets[sub].remove(bucket, left);
            bucket.entries.push_back(StoredEntry { tau: item.tau, item: item.value.clone(), info, size });
            bucket.load += size;
            while bucket.load as f64 > t {
                let e = bucket.entries.pop_front().expect("load positive");
                bucket.load -= e.size;
                bucket.last_evicted = e.tau;
            }
            self.budgets[sub].add(bucket, left);
            touched.push((sub, b));
        }
        if !touched.is_empty() {
            self.log.push_back((item.tau, touched));
        }
    }

    /// Drops every entry with τ <= l and increments l.
    fn advance(&mut self) {
        let l = self.left;
        while self.log.front().is_some_and(|(tau, _)| *tau <= l) {
            let (tau, touched) = self.log.pop_front().expect("checked");
            for (sub, b) in touched {
                let Some(bucket) = self.subs[sub].get_mut(&b) else {
                    continue;
                };
                self.budgets[sub].remove(bucket, l);
                if bucket.entries.front().is_some_and(|e| e.tau == tau) {
                    let e = bucket.entries.pop_front().expect("checked");
                    bucket.load -= e.size;
                }
                self.budgets[sub].add(bucket, l + 1);
                if bucket.entries.is_empty() && !bucket.overflowed_since(l + 1) {
                    self.subs[sub].remove(&b);
                }
            }
        }
        self.left = l + 1;
    }

    fn export(&self, start: u64) -> SketchContents<S> {
        let subs = self
            .subs
            .iter()
            .map(|sub| {
                sub.iter()
                    .filter_map(|(b, st)| {
                        let entries: Vec<_> = st.entries.iter().filter(|e| e.tau >= start).cloned().collect();
                        let overflowed = st.overflowed_since(start);
                        (overflowed || !entries.is_empty())
                            .then(|| (b.clone(), BucketContents { entries, overflowed }))
                    })
                    .collect()
            })
            .collect();
        SketchContents { subs }
    }

    /// Full contents H^o, representing the items `x_{l_o}..x_N`.
    pub fn contents(&self) -> SketchContents<S> {
        self.export(self.left)
    }
}

/// Ladder engine: one sketch per ladder guess with a shared space cap.
#[derive(Debug, Clone)]
pub struct SlidingSketch<S: SketchSpec> {
    ladder: GuessLadder,
    levels: Vec<LevelState<S>>,
    cap: f64,
    now: u64,
}

impl<S: SketchSpec> SlidingSketch<S> {
    /// `make_spec(level_index, guess)` builds the sketch for each guess.
    pub fn new(ladder: GuessLadder, cap: f64, mut make_spec: impl FnMut(usize, f64) -> S) -> Self {
        let levels = ladder
            .levels()
            .iter()
            .enumerate()
            .map(|(i, &o)| LevelState::new(make_spec(i, o), o))
            .collect();
        SlidingSketch { ladder, levels, cap, now: 0 }
    }

    pub fn ladder(&self) -> &GuessLadder {
        &self.ladder
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn levels(&self) -> &[LevelState<S>] {
        &self.levels
    }

    pub fn ingest(&mut self, value: S::Item) {
        self.now += 1;
        let item = Stamped { tau: self.now, value };
        for level in &mut self.levels {
            level.insert(&item);
            while level.space_budget() > self.cap {
                level.advance();
            }
        }
    }

    pub fn space_budget(&self) -> f64 {
        self.levels.iter().map(|l| l.space_budget()).sum()
    }

    pub fn window_start(&self, w: u64) -> u64 {
        (self.now + 1).saturating_sub(w).max(1)
    }

    fn qualifies(&self, level: &LevelState<S>, w: u64) -> bool {
        level.left <= self.window_start(w)
    }

    /// Snapshot of one level if it covers the window.
    pub fn snapshot_level(&self, idx: usize, w: u64) -> Option<LevelSnapshot<S>> {
        let level = &self.levels[idx];
        self.qualifies(level, w).then(|| LevelSnapshot {
            level: idx,
            guess: level.guess,
            window_start: self.window_start(w),
            now: self.now,
            contents: level.export(self.window_start(w)),
        })
    }

    /// Snapshots of all levels with `l_o <= N - W + 1`.
    pub fn snapshot(&self, w: u64) -> Vec<LevelSnapshot<S>> {
        (0..self.levels.len()).filter_map(|i| self.snapshot_level(i, w)).collect()
    }

    /// Snapshot-and-recover, stopping at the first level that succeeds.
    pub fn query(&self, w: u64) -> WindowedEstimate<S::Output> {
        for idx in 0..self.levels.len() {
            if let Some(snap) = self.snapshot_level(idx, w) {
                if let Some(output) = self.levels[idx].spec.recover(&snap) {
                    return WindowedEstimate::Ok { level: idx, guess: snap.guess, output };
                }
            }
        }
        WindowedEstimate::Fail
    }
}
