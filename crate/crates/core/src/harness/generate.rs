use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::stream::Stream;
use crate::error::{invalid, Result};
use crate::geometry::Point;
use crate::kcover::Edge;

/// Synthetic stream families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GenSpec {
    /// i.i.d. bits with `P(1) = p_one`.
    Bits { len: usize, p_one: f64 },
    /// Uniform (set, element) pairs over `[0, n) x [0, m)`.
    Edges { len: usize, n: u32, m: u32 },
    /// Gaussian clusters around uniform centers, rounded and clamped to `[1, Δ]^d`.
    Mixture { len: usize, d: usize, delta: i64, centers: usize, sigma: f64 },
    /// The two-set k-cover counterexample, stream `A` then `C`.
    AppendixKcover { m: u32, k: u32 },
    /// The diversity counterexample in `2k` dimensions, stream `A` then `C`.
    AppendixDiversity { k: usize },
}

/// The three parts of a smoothness counterexample; `B` is a suffix of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Appendix<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
}

impl<T: Clone> Appendix<T> {
    pub fn a_then_c(&self) -> Vec<T> {
        self.a.iter().chain(&self.c).cloned().collect()
    }

    pub fn b_then_c(&self) -> Vec<T> {
        self.b.iter().chain(&self.c).cloned().collect()
    }
}

/// Sets `S_1, S_2` (ids `2c, 2c+1` in copy c) over elements `e_1..e_2m`.
/// A = S_1's first half then S_2's second half, B = S_2's part, C = S_1's second half.
pub fn appendix_kcover(m: u32, k: u32) -> Appendix<Edge> {
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for copy in 0..k {
        let (s1, s2, base) = (2 * copy, 2 * copy + 1, 2 * m * copy);
        a.extend((0..m).map(|j| Edge::new(s1, base + j)));
        let second: Vec<Edge> = (m..2 * m).map(|j| Edge::new(s2, base + j)).collect();
        a.extend(second.iter().copied());
        b.extend(second);
        c.extend((m..2 * m).map(|j| Edge::new(s1, base + j)));
    }
    Appendix { a, b, c }
}

/// `v_1 = e_1 + e_{k+1}`, `v_i = e_i + e_{i-1}` for `2 ≤ i ≤ k+1`, and
/// `u_i = e_{i+1} + e_{i+k+1}` for `i < k`, shifted by one into `[1, 2]^{2k}`.
pub fn appendix_diversity(k: usize) -> Appendix<Point> {
    let dim = 2 * k;
    let vec_of = |ones: &[usize]| {
        let mut v = vec![1i64; dim];
        for &i in ones {
            v[i - 1] += 1;
        }
        Point::new(v)
    };
    let mut a = vec![vec_of(&[1, k + 1])];
    a.extend((2..=k + 1).map(|i| vec_of(&[i, i - 1])));
    let b = a[1..].to_vec();
    let c = (1..k).map(|i| vec_of(&[i + 1, i + k + 1])).collect();
    Appendix { a, b, c }
}

pub fn generate(spec: &GenSpec, seed: u64) -> Result<Stream> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match *spec {
        GenSpec::Bits { len, p_one } => {
            if !(0.0..=1.0).contains(&p_one) {
                return invalid(format!("p_one must lie in [0, 1], got {p_one}"));
            }
            Stream::Bits((0..len).map(|_| u8::from(rng.random_bool(p_one))).collect())
        }
        GenSpec::Edges { len, n, m } => {
            if n == 0 || m == 0 {
                return invalid("edge generator needs n, m ≥ 1");
            }
            Stream::Edges((0..len).map(|_| Edge::new(rng.random_range(0..n), rng.random_range(0..m))).collect())
        }
        GenSpec::Mixture { len, d, delta, centers, sigma } => {
            if d == 0 || delta < 1 || centers == 0 || !(sigma >= 0.0) {
                return invalid("mixture generator needs d, Δ, centers ≥ 1 and σ ≥ 0");
            }
            let mu: Vec<Vec<f64>> = (0..centers).map(|_| (0..d).map(|_| rng.random_range(1.0..=delta as f64)).collect()).collect();
            let noise = Normal::new(0.0, sigma).expect("σ ≥ 0");
            let pts: Vec<Point> = (0..len)
                .map(|_| {
                    let c = &mu[rng.random_range(0..centers)];
                    Point::new(c.iter().map(|&m| ((m + noise.sample(&mut rng)).round() as i64).clamp(1, delta)).collect())
                })
                .collect();
            debug_assert!(pts.iter().all(|p| p.check_in_grid(d, delta).is_ok()));
            Stream::Points(pts)
        }
        GenSpec::AppendixKcover { m, k } => {
            if m == 0 || k == 0 {
                return invalid("appendix k-cover needs m, k ≥ 1");
            }
            Stream::Edges(appendix_kcover(m, k).a_then_c())
        }
        GenSpec::AppendixDiversity { k } => {
            if k < 2 {
                return invalid("appendix diversity needs k ≥ 2");
            }
            Stream::Points(appendix_diversity(k).a_then_c())
        }
    })
}
