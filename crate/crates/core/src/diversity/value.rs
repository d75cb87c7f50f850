use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{dist, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiversityKind {
    Edge,
    Clique,
    Tree,
    Cycle,
    TTrees,
    TCycles,
    Star,
    Bipartition,
    Pseudoforest,
    Matching,
}

impl DiversityKind {
    pub const ALL: [DiversityKind; 10] = [
        DiversityKind::Edge,
        DiversityKind::Clique,
        DiversityKind::Tree,
        DiversityKind::Cycle,
        DiversityKind::TTrees,
        DiversityKind::TCycles,
        DiversityKind::Star,
        DiversityKind::Bipartition,
        DiversityKind::Pseudoforest,
        DiversityKind::Matching,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DiversityKind::Edge => "edge",
            DiversityKind::Clique => "clique",
            DiversityKind::Tree => "tree",
            DiversityKind::Cycle => "cycle",
            DiversityKind::TTrees => "t-trees",
            DiversityKind::TCycles => "t-cycles",
            DiversityKind::Star => "star",
            DiversityKind::Bipartition => "bipartition",
            DiversityKind::Pseudoforest => "pseudoforest",
            DiversityKind::Matching => "matching",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.strip_prefix("remote-").unwrap_or(s);
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown diversity kind {s}")))
    }

    /// Per-cell retention cap of the grid sketch.
    pub fn cell_cap(self, k: usize) -> usize {
        match self {
            DiversityKind::Edge
            | DiversityKind::Tree
            | DiversityKind::Cycle
            | DiversityKind::TTrees
            | DiversityKind::TCycles => 1,
            _ => k,
        }
    }

    /// Largest k the exact evaluator accepts.
    pub fn exact_cap(self) -> usize {
        match self {
            DiversityKind::Cycle => 12,
            DiversityKind::TCycles | DiversityKind::Matching => 10,
            DiversityKind::Bipartition => 14,
            _ => usize::MAX,
        }
    }
}

/// A diversity function together with its subset size and component count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objective {
    pub kind: DiversityKind,
    pub k: usize,
    /// Number of trees or cycles; ignored by the other kinds.
    pub t: usize,
}

impl Objective {
    pub fn new(kind: DiversityKind, k: usize, t: usize) -> Result<Self> {
        let o = Objective { kind, k, t };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return invalid(format!("k must be at least 2, got {}", self.k));
        }
        match self.kind {
            DiversityKind::Matching if self.k % 2 == 1 => invalid("remote-matching needs even k"),
            DiversityKind::TTrees | DiversityKind::TCycles if self.t < 1 || self.t >= self.k => {
                invalid(format!("t must lie in [1, k), got t={} k={}", self.t, self.k))
            }
            _ => Ok(()),
        }
    }

    pub fn cell_cap(&self) -> usize {
        self.kind.cell_cap(self.k)
    }
}

/// Number of distances summed by the objective.
pub fn normalizer(obj: &Objective) -> Result<f64> {
    obj.validate()?;
    let k = obj.k;
    Ok(match obj.kind {
        DiversityKind::Edge => 1,
        DiversityKind::Clique => k * (k - 1) / 2,
        DiversityKind::Tree | DiversityKind::Star => k - 1,
        DiversityKind::Cycle | DiversityKind::TCycles | DiversityKind::Pseudoforest => k,
        DiversityKind::TTrees => k - obj.t,
        DiversityKind::Bipartition => (k / 2) * k.div_ceil(2),
        DiversityKind::Matching => k / 2,
    } as f64)
}

pub fn distance_matrix(points: &[Point]) -> Vec<Vec<f64>> {
    points.iter().map(|a| points.iter().map(|b| dist(a, b)).collect()).collect()
}

/// Points are sorted first so the float result depends only on the multiset.
pub fn div_value(q: &[Point], obj: &Objective) -> Result<f64> {
    if q.len() != obj.k {
        return invalid(format!("expected {} points, got {}", obj.k, q.len()));
    }
    let mut sorted = q.to_vec();
    sorted.sort_unstable();
    div_value_matrix(&distance_matrix(&sorted), obj)
}

/// Objective value from a `k×k` distance matrix.
pub fn div_value_matrix(dm: &[Vec<f64>], obj: &Objective) -> Result<f64> {
    obj.validate()?;
    let k = dm.len();
    if k != obj.k {
        return invalid(format!("expected {} points, got {k}", obj.k));
    }
    if k > obj.kind.exact_cap() {
        return Err(Error::TooLarge(format!("{} with k={k} exceeds {}", obj.kind.name(), obj.kind.exact_cap())));
    }
    Ok(match obj.kind {
        DiversityKind::Edge => pairs(k).map(|(i, j)| dm[i][j]).fold(f64::INFINITY, f64::min),
        DiversityKind::Clique => pairs(k).map(|(i, j)| dm[i][j]).sum(),
        DiversityKind::Tree => mst_edges(dm).iter().sum(),
        DiversityKind::TTrees => {
            let mut e = mst_edges(dm);
            e.sort_by(f64::total_cmp);
            e[..k - obj.t].iter().sum()
        }
        DiversityKind::Cycle => cycle_costs(dm)[(1 << k) - 1],
        DiversityKind::TCycles => t_cycles(dm, obj.t),
        DiversityKind::Star => (0..k).map(|c| dm[c].iter().sum::<f64>()).fold(f64::INFINITY, f64::min),
        DiversityKind::Bipartition => bipartition(dm),
        DiversityKind::Pseudoforest => (0..k)
            .map(|i| (0..k).filter(|&j| j != i).map(|j| dm[i][j]).fold(f64::INFINITY, f64::min))
            .sum(),
        DiversityKind::Matching => matching(dm, (1u32 << k) - 1),
    })
}

fn pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j)))
}

/// Edge weights of a minimum spanning tree (Prim).
fn mst_edges(dm: &[Vec<f64>]) -> Vec<f64> {
    let k = dm.len();
    let mut in_tree = vec![false; k];
    let mut best = vec![f64::INFINITY; k];
    let mut edges = Vec::with_capacity(k.saturating_sub(1));
    best[0] = 0.0;
    for step in 0..k {
        let u = (0..k)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .expect("vertex left");
        in_tree[u] = true;
        if step > 0 {
            edges.push(best[u]);
        }
        for v in 0..k {
            if !in_tree[v] && dm[u][v] < best[v] {
                best[v] = dm[u][v];
            }
        }
    }
    edges
}

/// Minimum closed-tour cost of every vertex subset: one vertex costs 0,
/// two vertices cost the round trip, larger subsets solve Held–Karp.
fn cycle_costs(dm: &[Vec<f64>]) -> Vec<f64> {
    let k = dm.len();
    let full = 1usize << k;
    // path[mask*k + v]: cheapest path from the lowest vertex of mask through mask, ending at v.
    let mut path = vec![f64::INFINITY; full * k];
    for s in 0..k {
        path[(1 << s) * k + s] = 0.0;
    }
    for mask in 1..full {
        let s = mask.trailing_zeros() as usize;
        for v in 0..k {
            let cur = path[mask * k + v];
            if !cur.is_finite() {
                continue;
            }
            for u in s + 1..k {
                if mask & (1 << u) == 0 {
                    let next = (mask | (1 << u)) * k + u;
                    let c = cur + dm[v][u];
                    if c < path[next] {
                        path[next] = c;
                    }
                }
            }
        }
    }
    (0..full)
        .map(|mask| {
            if mask == 0 {
                return 0.0;
            }
            let s = mask.trailing_zeros() as usize;
            (0..k)
                .filter(|&v| v != s && mask & (1 << v) != 0)
                .map(|v| path[mask * k + v] + dm[v][s])
                .fold(if mask.count_ones() == 1 { 0.0 } else { f64::INFINITY }, f64::min)
        })
        .collect()
}

/// Cheapest cover of all vertices by exactly `t` disjoint cycles.
fn t_cycles(dm: &[Vec<f64>], t: usize) -> f64 {
    let k = dm.len();
    let full = 1usize << k;
    let cyc = cycle_costs(dm);
    let mut cur = cyc.clone();
    for _ in 1..t {
        let mut next = vec![f64::INFINITY; full];
        for mask in 1..full {
            let low = mask & mask.wrapping_neg();
            // The group holding the lowest vertex is split off.
            let rest = mask ^ low;
            let mut sub = rest;
            loop {
                let group = sub | low;
                let other = mask ^ group;
                if other != 0 {
                    let c = cyc[group] + cur[other];
                    if c < next[mask] {
                        next[mask] = c;
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        cur = next;
    }
    cur[full - 1]
}

fn bipartition(dm: &[Vec<f64>]) -> f64 {
    let k = dm.len();
    let half = k / 2;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << k) {
        if mask.count_ones() as usize != half {
            continue;
        }
        let mut s = 0.0;
        for i in (0..k).filter(|&i| mask & (1 << i) != 0) {
            for j in (0..k).filter(|&j| mask & (1 << j) == 0) {
                s += dm[i][j];
            }
        }
        best = best.min(s);
    }
    best
}

fn matching(dm: &[Vec<f64>], left: u32) -> f64 {
    if left == 0 {
        return 0.0;
    }
    let i = left.trailing_zeros() as usize;
    let rest = left & !(1 << i);
    let mut best = f64::INFINITY;
    let mut r = rest;
    while r != 0 {
        let j = r.trailing_zeros() as usize;
        r &= r - 1;
        best = best.min(dm[i][j] + matching(dm, rest & !(1 << j)));
    }
    best
}
