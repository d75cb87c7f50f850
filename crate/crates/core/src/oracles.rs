//! Brute-force ground truth, independent of the sketches it checks.

use std::collections::HashSet;

use crate::clustering::{cost, Centers};
use crate::diversity::{div_value, DiversityKind, Objective};
use crate::error::{Error, Result};
use crate::geometry::{binomial, for_each_subset, sq_dist, Point};
use crate::kcover::Edge;

/// Largest number of k-subsets any oracle enumerates.
pub const ORACLE_BUDGET: u128 = 1_000_000;

fn check_budget(n: usize, k: usize, what: &str) -> Result<()> {
    let count = binomial(n, k);
    if count > ORACLE_BUDGET {
        return Err(Error::TooLarge(format!("{what}: C({n}, {k}) = {count} exceeds {ORACLE_BUDGET}")));
    }
    Ok(())
}

/// The items with timestamps in `[N−W+1, N]`, in arrival order.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowView<T> {
    pub start: u64,
    pub items: Vec<T>,
}

impl<T: Clone> WindowView<T> {
    /// Window of the first `now` items of `stream`.
    pub fn new(stream: &[T], now: u64, w: u64) -> Self {
        let now = now.min(stream.len() as u64);
        let start = (now + 1).saturating_sub(w).max(1);
        WindowView { start, items: stream[(start - 1) as usize..now as usize].to_vec() }
    }
}

/// `max_{|P|=k} |Γ(P)|` over set ids `0..n`.
pub fn opt_kcover(edges: &[Edge], n: u32, k: usize) -> Result<usize> {
    let k = k.min(n as usize);
    check_budget(n as usize, k, "opt_kcover")?;
    let mut adj: Vec<HashSet<u32>> = vec![HashSet::new(); n as usize];
    for e in edges {
        if e.set_id >= n {
            return Err(Error::InvalidParam(format!("set id {} outside [0, {n})", e.set_id)));
        }
        adj[e.set_id as usize].insert(e.elem_id);
    }
    let mut best = 0;
    for_each_subset(n as usize, k, |s| {
        let covered: HashSet<u32> = s.iter().flat_map(|&i| adj[i].iter().copied()).collect();
        best = best.max(covered.len());
    });
    Ok(best)
}

/// `max_{|Q|=k} div(Q)` over index subsets; 0 with fewer than k points.
pub fn opt_div(points: &[Point], obj: &Objective) -> Result<f64> {
    obj.validate()?;
    if points.len() < obj.k {
        return Ok(0.0);
    }
    check_budget(points.len(), obj.k, "opt_div")?;
    let mut best = f64::NEG_INFINITY;
    let mut err = None;
    for_each_subset(points.len(), obj.k, |s| {
        let q: Vec<Point> = s.iter().map(|&i| points[i].clone()).collect();
        match div_value(&q, obj) {
            Ok(v) => best = best.max(v),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(best),
    }
}

/// Remote-edge optimum squared, in exact integer arithmetic.
pub fn opt_div_edge_sq(points: &[Point], k: usize) -> Result<i128> {
    if k < 2 || points.len() < k {
        return Ok(0);
    }
    check_budget(points.len(), k, "opt_div_edge_sq")?;
    let mut best = 0i128;
    for_each_subset(points.len(), k, |s| {
        let mut min = i128::MAX;
        for (a, &i) in s.iter().enumerate() {
            for &j in &s[a + 1..] {
                min = min.min(sq_dist(&points[i], &points[j]));
            }
        }
        best = best.max(min);
    });
    Ok(best)
}

/// Remote-edge objective for `k`.
pub fn remote_edge(k: usize) -> Objective {
    Objective { kind: DiversityKind::Edge, k, t: 0 }
}

/// `min` over k-subsets of `candidates` of `cost(points, B)`.
pub fn opt_cluster_candidates(points: &[Point], k: usize, p: f64, candidates: &[Point]) -> Result<f64> {
    if points.is_empty() {
        return Ok(0.0);
    }
    if candidates.len() <= k {
        let b: Centers = candidates.iter().map(crate::clustering::as_center).collect();
        return Ok(if b.is_empty() { f64::INFINITY } else { cost(points, &b, p) });
    }
    check_budget(candidates.len(), k, "opt_cluster_candidates")?;
    let all: Centers = candidates.iter().map(crate::clustering::as_center).collect();
    let mut best = f64::INFINITY;
    for_each_subset(candidates.len(), k, |s| {
        let b: Centers = s.iter().map(|&i| all[i].clone()).collect();
        best = best.min(cost(points, &b, p));
    });
    Ok(best)
}
