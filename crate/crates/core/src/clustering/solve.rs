use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{binomial, for_each_subset, Point};

/// Real-valued center set B.
pub type Centers = Vec<Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterMethod {
    /// Best k-subset of the distinct coreset points.
    ExhaustiveCandidates,
    /// Single-swap local search over the distinct coreset points.
    LocalSearch,
    /// Weighted Lloyd iterations; p = 2 only.
    Lloyd,
}

impl ClusterMethod {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exhaustive-candidates" | "exhaustive" => Ok(ClusterMethod::ExhaustiveCandidates),
            "local-search" => Ok(ClusterMethod::LocalSearch),
            "lloyd" => Ok(ClusterMethod::Lloyd),
            _ => invalid(format!("unknown clustering method {s:?}")),
        }
    }
}

pub fn as_center(x: &Point) -> Vec<f64> {
    x.coords().iter().map(|&c| c as f64).collect()
}

fn pow_dist(x: &Point, c: &[f64], p: f64) -> f64 {
    let sq: f64 = x.coords().iter().zip(c).map(|(&a, &b)| (a as f64 - b).powi(2)).sum();
    if p == 2.0 {
        sq
    } else {
        sq.sqrt().powf(p)
    }
}

/// `min_b ‖x − b‖^p`.
pub fn point_cost(x: &Point, centers: &Centers, p: f64) -> f64 {
    centers.iter().map(|c| pow_dist(x, c, p)).fold(f64::INFINITY, f64::min)
}

/// `cost(X, B) = Σ_x min_b ‖x − b‖^p`.
pub fn cost(points: &[Point], centers: &Centers, p: f64) -> f64 {
    points.iter().map(|x| point_cost(x, centers, p)).sum()
}

pub fn weighted_cost(points: &[(Point, f64)], centers: &Centers, p: f64) -> f64 {
    points.iter().map(|(x, w)| w * point_cost(x, centers, p)).sum()
}

/// Merges equal points, summing weights, in sorted order.
pub fn merge_weights(points: &[(Point, f64)]) -> Vec<(Point, f64)> {
    let mut merged: std::collections::BTreeMap<Point, f64> = std::collections::BTreeMap::new();
    for (x, w) in points {
        *merged.entry(x.clone()).or_default() += w;
    }
    merged.into_iter().collect()
}

/// Centers for the weighted set. With at most k distinct points, returns them all.
pub fn solve_on_coreset(points: &[(Point, f64)], k: usize, p: f64, method: ClusterMethod, budget: u128) -> Result<Centers> {
    if k == 0 {
        return invalid("k must be positive");
    }
    if method == ClusterMethod::Lloyd && p != 2.0 {
        return invalid("lloyd requires p = 2");
    }
    let pts = merge_weights(points);
    if pts.len() <= k {
        return Ok(pts.iter().map(|(x, _)| as_center(x)).collect());
    }
    match method {
        ClusterMethod::ExhaustiveCandidates => exhaustive(&pts, k, p, budget),
        ClusterMethod::LocalSearch => Ok(local_search(&pts, k, p)),
        ClusterMethod::Lloyd => Ok(lloyd(&pts, k, 100)),
    }
}

fn exhaustive(pts: &[(Point, f64)], k: usize, p: f64, budget: u128) -> Result<Centers> {
    let subsets = binomial(pts.len(), k);
    if subsets > budget {
        return Err(Error::TooLarge(format!("C({}, {k}) = {subsets} subsets exceeds the budget {budget}", pts.len())));
    }
    let all: Centers = pts.iter().map(|(x, _)| as_center(x)).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_subset(pts.len(), k, |s| {
        let b: Centers = s.iter().map(|&i| all[i].clone()).collect();
        let c = weighted_cost(pts, &b, p);
        if best.as_ref().is_none_or(|(v, _)| c < *v) {
            best = Some((c, s.to_vec()));
        }
    });
    let (_, idx) = best.expect("k ≤ number of candidates");
    Ok(idx.iter().map(|&i| all[i].clone()).collect())
}

/// Farthest-point seeding from the heaviest point.
fn seed_centers(pts: &[(Point, f64)], k: usize) -> Vec<usize> {
    let first = (0..pts.len()).fold(0, |b, i| if pts[i].1 > pts[b].1 { i } else { b });
    let mut chosen = vec![first];
    while chosen.len() < k {
        let far = (0..pts.len())
            .filter(|i| !chosen.contains(i))
            .map(|i| (chosen.iter().map(|&c| crate::geometry::sq_dist(&pts[i].0, &pts[c].0)).min().expect("nonempty"), i))
            .fold(None, |b: Option<(i128, usize)>, (d, i)| match b {
                Some((bd, _)) if bd >= d => b,
                _ => Some((d, i)),
            })
            .expect("more candidates than k");
        chosen.push(far.1);
    }
    chosen
}

fn local_search(pts: &[(Point, f64)], k: usize, p: f64) -> Centers {
    let all: Centers = pts.iter().map(|(x, _)| as_center(x)).collect();
    let eval = |idx: &[usize]| weighted_cost(pts, &idx.iter().map(|&i| all[i].clone()).collect(), p);
    let mut cur = seed_centers(pts, k);
    let mut cur_cost = eval(&cur);
    loop {
        let mut improved = false;
        'swap: for slot in 0..k {
            for cand in 0..pts.len() {
                if cur.contains(&cand) {
                    continue;
                }
                let mut next = cur.clone();
                next[slot] = cand;
                let c = eval(&next);
                if c < cur_cost * (1.0 - 1e-12) {
                    cur = next;
                    cur_cost = c;
                    improved = true;
                    break 'swap;
                }
            }
        }
        if !improved {
            break;
        }
    }
    cur.sort_unstable();
    cur.iter().map(|&i| all[i].clone()).collect()
}

fn lloyd(pts: &[(Point, f64)], k: usize, rounds: usize) -> Centers {
    let mut centers: Centers = seed_centers(pts, k).iter().map(|&i| as_center(&pts[i].0)).collect();
    let d = pts[0].0.dim();
    for _ in 0..rounds {
        let mut sums = vec![vec![0.0; d]; k];
        let mut mass = vec![0.0; k];
        for (x, w) in pts {
            let j = (0..k).fold(0, |b, j| if pow_dist(x, &centers[j], 2.0) < pow_dist(x, &centers[b], 2.0) { j } else { b });
            mass[j] += w;
            for (s, &c) in sums[j].iter_mut().zip(x.coords()) {
                *s += w * c as f64;
            }
        }
        let next: Centers = (0..k)
            .map(|j| if mass[j] > 0.0 { sums[j].iter().map(|s| s / mass[j]).collect() } else { centers[j].clone() })
            .collect();
        if next == centers {
            break;
        }
        centers = next;
    }
    centers
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(points: &[Point]) -> Vec<(Point, f64)> {
        points.iter().map(|x| (x.clone(), 1.0)).collect()
    }

    #[test]
    fn cost_examples() {
        let x = vec![Point::from([0, 0]), Point::from([2, 0])];
        assert_eq!(cost(&x, &vec![vec![1.0, 0.0]], 2.0), 2.0);
        assert_eq!(cost(&x, &x.iter().map(as_center).collect(), 1.0), 0.0);
        let b = vec![vec![0.5, 3.0], vec![7.0, -1.0]];
        assert_eq!(weighted_cost(&unit(&x), &b, 1.5), cost(&x, &b, 1.5));
    }

    #[test]
    fn all_points_as_centers() {
        let x: Vec<Point> = (0..4).map(|i| Point::from([i * 3, i])).collect();
        for method in [ClusterMethod::ExhaustiveCandidates, ClusterMethod::LocalSearch, ClusterMethod::Lloyd] {
            let b = solve_on_coreset(&unit(&x), 4, 2.0, method, 1000).unwrap();
            assert_eq!(cost(&x, &b, 2.0), 0.0);
        }
    }

    #[test]
    fn lloyd_pair_midpoints() {
        let x = vec![Point::from([0, 0]), Point::from([0, 2]), Point::from([50, 50]), Point::from([52, 50])];
        let mut b = solve_on_coreset(&unit(&x), 2, 2.0, ClusterMethod::Lloyd, 0).unwrap();
        b.sort_by(|a, c| a.partial_cmp(c).unwrap());
        assert_eq!(b, vec![vec![0.0, 1.0], vec![51.0, 50.0]]);
        assert!(solve_on_coreset(&unit(&x), 2, 1.0, ClusterMethod::Lloyd, 0).is_err());
    }

    #[test]
    fn exhaustive_budget_enforced() {
        let x: Vec<Point> = (0..30).map(|i| Point::from([i, 0])).collect();
        assert!(matches!(
            solve_on_coreset(&unit(&x), 3, 1.0, ClusterMethod::ExhaustiveCandidates, 100),
            Err(Error::TooLarge(_))
        ));
    }

    proptest! {
        #[test]
        fn exhaustive_is_minimal(coords in prop::collection::vec((0i64..40, 0i64..40, 1u32..4), 10), p in prop::sample::select(vec![1.0, 2.0])) {
            let pts: Vec<(Point, f64)> = coords.iter().map(|&(a, b, w)| (Point::from([a, b]), w as f64)).collect();
            let merged = merge_weights(&pts);
            prop_assume!(merged.len() > 2);
            let best = solve_on_coreset(&pts, 2, p, ClusterMethod::ExhaustiveCandidates, 1000).unwrap();
            let best_cost = weighted_cost(&pts, &best, p);
            for i in 0..merged.len() {
                for j in i + 1..merged.len() {
                    let b = vec![as_center(&merged[i].0), as_center(&merged[j].0)];
                    prop_assert!(best_cost <= weighted_cost(&pts, &b, p) + 1e-9);
                }
            }
        }

        #[test]
        fn local_search_no_worse_than_seed(coords in prop::collection::vec((0i64..40, 0i64..40), 12)) {
            let pts: Vec<(Point, f64)> = coords.iter().map(|&(a, b)| (Point::from([a, b]), 1.0)).collect();
            let merged = merge_weights(&pts);
            prop_assume!(merged.len() > 3);
            let ls = solve_on_coreset(&pts, 3, 1.0, ClusterMethod::LocalSearch, 0).unwrap();
            let seed: Centers = seed_centers(&merged, 3).iter().map(|&i| as_center(&merged[i].0)).collect();
            prop_assert!(weighted_cost(&pts, &ls, 1.0) <= weighted_cost(&pts, &seed, 1.0) + 1e-9);
        }
    }
}
