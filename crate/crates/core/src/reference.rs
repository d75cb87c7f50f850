//! Windowed count-of-ones and toy 1-median over a 0/1 stream.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::framework::{make_ladder, LevelSnapshot, SketchSpec, SlidingSketch, Stamped};
use crate::prf::Prf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BitParams {
    pub eps: f64,
    pub delta: f64,
    /// Constant in the sampling rate `c·ln(1/δ)/(ε²·o)`.
    pub c: f64,
}

impl Default for BitParams {
    fn default() -> Self {
        BitParams { eps: 0.2, delta: 0.05, c: 10.0 }
    }
}

impl BitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return invalid(format!("eps must lie in (0, 0.5), got {}", self.eps));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return invalid(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.c > 0.0) {
            return invalid("sampling constant must be positive");
        }
        Ok(())
    }

    pub fn rate(&self, o: f64) -> f64 {
        (self.c * (1.0 / self.delta).ln() / (self.eps * self.eps * o)).min(1.0)
    }

    pub fn threshold(&self) -> f64 {
        10.0 * (1.0 / self.delta).ln() / (self.eps * self.eps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BitProblem {
    /// Number of ones in the window.
    Ones,
    /// `min(#zeros, #ones)`, the 1-median cost of the window.
    Median,
}

/// Sampling sketch for one guess; buckets are symbols (a single bucket for ones).
#[derive(Debug, Clone)]
pub struct BitSpec {
    pub problem: BitProblem,
    pub p: f64,
    pub threshold: f64,
    prf: Prf,
}

impl BitSpec {
    pub fn new(problem: BitProblem, params: &BitParams, o: f64, prf: Prf) -> Self {
        BitSpec { problem, p: params.rate(o), threshold: params.threshold(), prf }
    }

    fn sampled(&self, tau: u64) -> bool {
        self.p >= 1.0 || self.prf.unit(&[tau]) < self.p
    }
}

pub fn ones_spec(params: &BitParams, o: f64, prf: Prf) -> BitSpec {
    BitSpec::new(BitProblem::Ones, params, o, prf)
}

pub fn toy_median_spec(params: &BitParams, o: f64, prf: Prf) -> BitSpec {
    BitSpec::new(BitProblem::Median, params, o, prf)
}

impl SketchSpec for BitSpec {
    type Item = u8;
    type Bucket = u8;
    type Info = ();
    type Output = f64;

    fn num_subs(&self) -> usize {
        1
    }

    fn threshold(&self, _: usize) -> f64 {
        self.threshold
    }

    fn admit(&self, _: usize, item: &Stamped<u8>) -> Option<(u8, ())> {
        let keep = match self.problem {
            BitProblem::Ones => item.value == 1,
            BitProblem::Median => true,
        };
        (keep && self.sampled(item.tau)).then_some((item.value, ()))
    }

    fn unit_size(&self, _: usize, _: &()) -> u64 {
        1
    }

    /// FAILs when a bucket dropped window items, since its count is then capped.
    fn recover(&self, snap: &LevelSnapshot<Self>) -> Option<f64> {
        let sub = &snap.contents.subs[0];
        if sub.values().any(|b| b.overflowed) {
            return None;
        }
        let count = |sym: u8| sub.get(&sym).map_or(0, |b| b.entries.len()) as f64;
        Some(match self.problem {
            BitProblem::Ones => count(1) / self.p,
            BitProblem::Median => count(0).min(count(1)) / self.p,
        })
    }
}

/// Ladder over guesses `1..W` with a cap no level can exceed.
pub fn bit_window(problem: BitProblem, params: &BitParams, w: u64, seed: u64) -> Result<SlidingSketch<BitSpec>> {
    params.validate()?;
    if w == 0 {
        return invalid("window must be positive");
    }
    let ladder = make_ladder(1.0, w as f64)?;
    let cap = 2.0 * params.threshold().ceil();
    let prf = Prf::new(seed);
    Ok(SlidingSketch::new(ladder, cap, |i, o| BitSpec::new(problem, params, o, prf.derive(i as u64))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::offline_sketch;

    fn run(problem: BitProblem, bits: &[u8], w: u64, seed: u64) -> Option<f64> {
        let mut sk = bit_window(problem, &BitParams::default(), w, seed).unwrap();
        for &b in bits {
            sk.ingest(b);
        }
        sk.query(w).output().copied()
    }

    #[test]
    fn all_zero_window_counts_zero() {
        assert_eq!(run(BitProblem::Ones, &[0; 50], 20, 1), Some(0.0));
    }

    #[test]
    fn exact_when_rate_is_one() {
        let params = BitParams::default();
        assert_eq!(params.rate(1.0), 1.0);
        let bits = [1, 0, 1, 1, 0, 1, 1, 1, 0, 1];
        assert_eq!(run(BitProblem::Ones, &bits, 10, 5), Some(7.0));
    }

    #[test]
    fn median_examples() {
        assert_eq!(run(BitProblem::Median, &[1; 30], 30, 2), Some(0.0));
        let mut bits = vec![0u8; 3];
        bits.extend([1u8; 9]);
        assert_eq!(run(BitProblem::Median, &bits, 12, 2), Some(3.0));
    }

    #[test]
    fn overflowed_bucket_fails() {
        let params = BitParams { eps: 0.4, delta: 0.5, c: 10.0 };
        let spec = ones_spec(&params, 1.0, Prf::new(0));
        let cap = spec.threshold.floor() as usize + 1;
        let items: Vec<_> = (0..cap).map(|i| Stamped { tau: i as u64 + 1, value: 1u8 }).collect();
        let snap = LevelSnapshot { level: 0, guess: 1.0, window_start: 1, now: cap as u64, contents: offline_sketch(&spec, &items) };
        assert!(spec.recover(&snap).is_none());
    }

    #[test]
    fn sampling_layer_is_unbiased() {
        let params = BitParams::default();
        let o = 4000.0;
        let ones = 300usize;
        let trials = 10_000u64;
        let items: Vec<_> = (0..ones).map(|i| Stamped { tau: i as u64 + 1, value: 1u8 }).collect();
        let mut sum = 0.0;
        let mut sq = 0.0;
        for seed in 0..trials {
            let spec = ones_spec(&params, o, Prf::new(seed));
            assert!(spec.p < 0.5);
            let n = items.iter().filter(|it| spec.admit(0, it).is_some()).count() as f64;
            let est = n / spec.p;
            sum += est;
            sq += est * est;
        }
        let mean = sum / trials as f64;
        let var = sq / trials as f64 - mean * mean;
        let se = (var / trials as f64).sqrt();
        assert!((mean - ones as f64).abs() <= 3.0 * se, "mean {mean} se {se}");
    }
}
