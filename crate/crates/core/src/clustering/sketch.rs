use std::sync::Arc;

use rand::seq::index;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::coreset::{crucial_stats, draw_coreset, heavy_partition, Coreset, CoresetPlan};
use super::grid::ShiftedGrids;
use super::solve::ClusterMethod;
use crate::error::{invalid, Error, Result};
use crate::framework::{LevelSnapshot, SketchSpec, Stamped};
use crate::geometry::Point;
use crate::prf::Prf;

/// Leading constants of the sampling rates, sample counts and space cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    /// Multiplies `ln(nL/δ)` in the rates of Z and Z′.
    pub sample_const: f64,
    /// Multiplies the coreset sample count m.
    pub coreset_const: f64,
    /// Multiplies the replica count m̂.
    pub replica_const: f64,
    /// Multiplies the denominator of the replica rate p″.
    pub replica_rate_const: f64,
    /// Multiplies the per-level space cap.
    pub space_const: f64,
}

impl ClusterProfile {
    pub fn theory() -> Self {
        ClusterProfile {
            sample_const: 1e6,
            coreset_const: 1000.0,
            replica_const: 1e9,
            replica_rate_const: 2000.0,
            space_const: 1e6,
        }
    }

    pub fn desk() -> Self {
        ClusterProfile {
            sample_const: 20.0,
            coreset_const: 0.01,
            replica_const: 1e-7,
            replica_rate_const: 0.5,
            space_const: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub k: usize,
    pub p: f64,
    pub d: usize,
    /// Side of the input grid `[Δ]^d`.
    pub delta: i64,
    /// Window length; also the bound n on the window's point count.
    pub window: u64,
    pub eps: f64,
    /// Failure probability δ of the whole ladder.
    pub fail_prob: f64,
    pub profile: ClusterProfile,
    /// Overrides the profile's per-level cap.
    pub space_cap: Option<f64>,
    pub method: ClusterMethod,
    /// Largest number of k-subsets the exhaustive solver enumerates.
    pub subset_budget: u128,
}

impl ClusterParams {
    pub fn new(k: usize, p: f64, d: usize, delta: i64, window: u64, eps: f64, fail_prob: f64) -> Self {
        ClusterParams {
            k,
            p,
            d,
            delta,
            window,
            eps,
            fail_prob,
            profile: ClusterProfile::desk(),
            space_cap: None,
            method: ClusterMethod::ExhaustiveCandidates,
            subset_budget: 500_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.d == 0 || self.delta < 1 || self.window == 0 {
            return invalid("k, d, Δ and W must be positive");
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return invalid(format!("p must be at least 1, got {}", self.p));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return invalid(format!("eps must lie in (0, 0.5), got {}", self.eps));
        }
        if !(self.fail_prob > 0.0 && self.fail_prob < 0.5) {
            return invalid(format!("delta must lie in (0, 0.5), got {}", self.fail_prob));
        }
        let c = &self.profile;
        if [c.sample_const, c.coreset_const, c.replica_const, c.replica_rate_const, c.space_const]
            .iter()
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return invalid("profile constants must be positive");
        }
        if self.method == ClusterMethod::Lloyd && self.p != 2.0 {
            return invalid("lloyd requires p = 2");
        }
        Ok(())
    }

    /// `kL + (2d^{1.5})^p`.
    pub fn center_term(&self, depth: usize) -> f64 {
        (self.k * depth) as f64 + (2.0 * (self.d as f64).powf(1.5)).powf(self.p)
    }

    /// Largest possible cost: `W·(√d·Δ)^p`.
    pub fn max_cost(&self) -> f64 {
        self.window as f64 * ((self.d as f64).sqrt() * self.delta as f64).powf(self.p)
    }

    /// `c·d·(L+1)·(kL + (2d^{1.5})^p)·ln(nL/δ)`.
    pub fn default_space_cap(&self, depth: usize, sub_fail: f64) -> f64 {
        let lnl = (self.window as f64 * depth as f64 / sub_fail).ln();
        self.profile.space_const * (self.d * (depth + 1)) as f64 * self.center_term(depth) * lnl
    }
}

/// Sampling rate and bucket threshold of one grid level in each of Z, Z′, Z″.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRates {
    /// `R_i = 0.01·o/(√d·Δ_i)^p`.
    pub r: f64,
    pub p_z: f64,
    pub p_zp: f64,
    pub p_zpp: f64,
    pub t_z: f64,
    pub t_zp: f64,
    pub t_zpp: f64,
}

/// Which of the three sketches a sub-sketch belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// Z: cell counts for the heavy partition.
    Counts,
    /// Z′: crucial-level sizes.
    Crucial,
    /// Z″: replica subsets for uniform sampling.
    Replicas,
}

/// Replica indices `ζ″_i(x) ⊆ [m̂]`, materialized only when they can fit a bucket.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Replicas {
    pub count: u64,
    pub ids: Arc<[u32]>,
}

const TAG_Z: u64 = 0xC1;
const TAG_ZP: u64 = 0xC2;
const TAG_ZPP: u64 = 0xC3;
const TAG_DRAW: u64 = 0xC4;

/// Z, Z′ and Z″ at one guess o, as `3(L+1)` sub-sketches.
#[derive(Debug, Clone)]
pub struct ClusterSpec {
    pub grids: Arc<ShiftedGrids>,
    pub guess: f64,
    pub k: usize,
    pub p: f64,
    pub d: usize,
    pub eps: f64,
    pub n: u64,
    /// δ for each sub-claim of this guess.
    pub sub_fail: f64,
    pub gamma: f64,
    pub m_hat: u64,
    pub coreset_const: f64,
    pub rates: Vec<LevelRates>,
    prf_z: Prf,
    prf_zp: Prf,
    prf_zpp: Prf,
    prf_draw: Prf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOutput {
    pub plan: CoresetPlan,
    pub coreset: Coreset,
}

/// `δ` split over the ladder and the five sub-claims of each guess.
pub fn sub_fail(params: &ClusterParams, ladder_len: usize) -> f64 {
    params.fail_prob / (5.0 * ladder_len.max(1) as f64)
}

pub fn cluster_spec(params: &ClusterParams, grids: Arc<ShiftedGrids>, o: f64, sub_fail: f64, seed: u64) -> Result<ClusterSpec> {
    params.validate()?;
    let depth = grids.depth();
    let (p, eps, n) = (params.p, params.eps, params.window as f64);
    let c = &params.profile;
    let gamma = eps / (40.0 * 2f64.powf(2.0 * p + 2.0) * depth as f64);
    let lnl = (n * depth as f64 / sub_fail).ln();
    let center = params.center_term(depth);
    let log_term = p * n.ln() * ((params.k * depth * params.d) as f64).ln().max(0.0) + (1.0 / sub_fail).ln();
    let m_hat = (c.replica_const * 2f64.powf(2.0 * p + 2.0) * eps.powi(-3) * center * log_term * depth as f64 / sub_fail).ceil().max(1.0);
    if m_hat > u32::MAX as f64 {
        return Err(Error::TooLarge(format!("replica count {m_hat:.3e} exceeds 2^32")));
    }
    let m_hat = m_hat as u64;
    let d = params.d as f64;
    let rates = (0..=depth as i32)
        .map(|i| {
            let r = 0.01 * o / (d.sqrt() * grids.side(i)).powf(p);
            let p_z = (c.sample_const * lnl / r).min(1.0);
            let p_zp = (c.sample_const * lnl / (eps * eps * gamma * r)).min(1.0);
            let p_zpp = (1.0 / (c.replica_rate_const * center * r)).min(1.0);
            LevelRates {
                r,
                p_z,
                p_zp,
                p_zpp,
                t_z: 10.0 * p_z * r * d,
                t_zp: 10.0 * p_zp * r * d,
                t_zpp: 10.0 * p_zpp * m_hat as f64 * r * d,
            }
        })
        .collect();
    let prf = Prf::new(seed);
    Ok(ClusterSpec {
        grids,
        guess: o,
        k: params.k,
        p,
        d: params.d,
        eps,
        n: params.window,
        sub_fail,
        gamma,
        m_hat,
        coreset_const: c.coreset_const,
        rates,
        prf_z: prf.derive(TAG_Z),
        prf_zp: prf.derive(TAG_ZP),
        prf_zpp: prf.derive(TAG_ZPP),
        prf_draw: prf.derive(TAG_DRAW),
    })
}

impl ClusterSpec {
    /// L.
    pub fn depth(&self) -> usize {
        self.grids.depth()
    }

    /// `R_i` for `i ∈ {-1, …, L}`.
    pub fn r(&self, level: i32) -> f64 {
        if level < 0 {
            self.rates[0].r / 2f64.powf(self.p)
        } else {
            self.rates[level as usize].r
        }
    }

    /// `min(2^{2p+1}/R_i, 1)`.
    pub fn sensitivity(&self, level: usize) -> f64 {
        (2f64.powf(2.0 * self.p + 1.0) / self.rates[level].r).min(1.0)
    }

    pub fn sub(&self, part: Part, level: usize) -> usize {
        let stride = self.depth() + 1;
        match part {
            Part::Counts => level,
            Part::Crucial => stride + level,
            Part::Replicas => 2 * stride + level,
        }
    }

    pub fn part_of(&self, sub: usize) -> (Part, usize) {
        let stride = self.depth() + 1;
        let part = match sub / stride {
            0 => Part::Counts,
            1 => Part::Crucial,
            _ => Part::Replicas,
        };
        (part, sub % stride)
    }

    fn key(level: usize, x: &Point) -> Vec<i64> {
        let mut key = Vec::with_capacity(x.dim() + 1);
        key.push(level as i64);
        key.extend_from_slice(x.coords());
        key
    }

    /// `ζ″_i(x)`: a Binomial(m̂, p″_i) count, then that many distinct indices.
    pub fn replicas(&self, level: usize, x: &Point) -> Replicas {
        let rates = &self.rates[level];
        let mut rng = self.prf_zpp.rng_i64(&Self::key(level, x));
        let count = if rates.p_zpp >= 1.0 {
            self.m_hat
        } else {
            Binomial::new(self.m_hat, rates.p_zpp).expect("rate in [0, 1]").sample(&mut rng)
        };
        if count as f64 > rates.t_zpp || count == 0 {
            return Replicas { count, ids: Arc::from(Vec::new()) };
        }
        let mut ids: Vec<u32> = index::sample(&mut rng, self.m_hat as usize, count as usize).into_iter().map(|j| j as u32).collect();
        ids.sort_unstable();
        Replicas { count, ids: ids.into() }
    }

    pub fn draw_rng(&self, window_start: u64, now: u64) -> rand_chacha::ChaCha8Rng {
        self.prf_draw.rng(&[window_start, now])
    }
}

impl SketchSpec for ClusterSpec {
    type Item = Point;
    type Bucket = Vec<i64>;
    type Info = Replicas;
    type Output = ClusterOutput;

    fn num_subs(&self) -> usize {
        3 * (self.depth() + 1)
    }

    fn threshold(&self, sub: usize) -> f64 {
        let (part, level) = self.part_of(sub);
        let r = &self.rates[level];
        match part {
            Part::Counts => r.t_z,
            Part::Crucial => r.t_zp,
            Part::Replicas => r.t_zpp,
        }
    }

    fn admit(&self, sub: usize, item: &Stamped<Point>) -> Option<(Vec<i64>, Replicas)> {
        let (part, level) = self.part_of(sub);
        let x = &item.value;
        let r = &self.rates[level];
        let info = match part {
            Part::Counts => (self.prf_z.unit_i64(&Self::key(level, x)) < r.p_z).then(Replicas::default)?,
            Part::Crucial => (self.prf_zp.unit_i64(&Self::key(level, x)) < r.p_zp).then(Replicas::default)?,
            Part::Replicas => Some(self.replicas(level, x)).filter(|z| z.count > 0)?,
        };
        Some((self.grids.cell_of(x, level as i32), info))
    }

    fn unit_size(&self, sub: usize, info: &Replicas) -> u64 {
        match self.part_of(sub).0 {
            Part::Replicas => info.count,
            _ => self.d as u64,
        }
    }

    fn recover(&self, snap: &LevelSnapshot<Self>) -> Option<ClusterOutput> {
        let heavy = heavy_partition(self, &snap.contents);
        let plan = crucial_stats(self, &snap.contents, &heavy)?;
        let mut rng = self.draw_rng(snap.window_start, snap.now);
        let coreset = draw_coreset(self, &snap.contents, &heavy, &plan, &mut rng)?;
        Some(ClusterOutput { plan, coreset })
    }
}
