use std::collections::{BTreeMap, VecDeque};

use super::value::{div_value, Objective};
use crate::error::Result;
use crate::geometry::Point;

/// Latest copies of recent values, enough to answer windows with fewer than
/// k distinct points exactly.
#[derive(Debug, Clone)]
pub struct ZeroOptTracker {
    k: usize,
    per_value: usize,
    list: VecDeque<(u64, Point)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroQuery {
    /// The window has fewer than k distinct points; the optimum and a witness.
    Exact { value: f64, points: Vec<Point> },
    AtLeastK,
}

impl ZeroOptTracker {
    /// Keeps at most `per_value` copies per value and `k·per_value` entries overall.
    pub fn new(k: usize, per_value: usize) -> Self {
        ZeroOptTracker { k, per_value: per_value.max(1), list: VecDeque::new() }
    }

    /// The per-value cap of the grid sketch.
    pub fn with_cell_cap(obj: &Objective) -> Self {
        Self::new(obj.k, obj.cell_cap())
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn ingest(&mut self, tau: u64, x: Point) {
        self.list.push_back((tau, x.clone()));
        let copies = self.list.iter().filter(|(_, y)| *y == x).count();
        if copies > self.per_value {
            let pos = self.list.iter().position(|(_, y)| *y == x).expect("present");
            self.list.remove(pos);
        } else if self.list.len() > self.k * self.per_value {
            self.list.pop_front();
        }
    }

    pub fn query(&self, window_start: u64, obj: &Objective) -> Result<ZeroQuery> {
        let mut counts: BTreeMap<&Point, usize> = BTreeMap::new();
        for (tau, x) in &self.list {
            if *tau >= window_start {
                *counts.entry(x).or_default() += 1;
            }
        }
        if counts.len() >= self.k {
            return Ok(ZeroQuery::AtLeastK);
        }
        let values: Vec<(Point, usize)> = counts.into_iter().map(|(p, c)| (p.clone(), c)).collect();
        let (value, points) = opt_multiset(&values, obj)?;
        Ok(ZeroQuery::Exact { value, points })
    }
}

/// Best k-multiset drawing each value at most its count times; 0 when fewer than k copies exist.
pub fn opt_multiset(values: &[(Point, usize)], obj: &Objective) -> Result<(f64, Vec<Point>)> {
    let total: usize = values.iter().map(|(_, c)| *c).sum();
    if total < obj.k {
        return Ok((0.0, values.iter().flat_map(|(p, c)| std::iter::repeat_n(p.clone(), *c)).collect()));
    }
    let mut best: Option<(f64, Vec<Point>)> = None;
    let mut pick = Vec::with_capacity(obj.k);
    search(values, 0, obj.k, &mut pick, obj, &mut best)?;
    Ok(best.expect("total ≥ k admits a multiset"))
}

fn search(
    values: &[(Point, usize)],
    i: usize,
    left: usize,
    pick: &mut Vec<Point>,
    obj: &Objective,
    best: &mut Option<(f64, Vec<Point>)>,
) -> Result<()> {
    if left == 0 {
        let v = div_value(pick, obj)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            *best = Some((v, pick.clone()));
        }
        return Ok(());
    }
    if i == values.len() {
        return Ok(());
    }
    let (p, c) = &values[i];
    for take in (0..=left.min(*c)).rev() {
        for _ in 0..take {
            pick.push(p.clone());
        }
        search(values, i + 1, left - take, pick, obj, best)?;
        pick.truncate(pick.len() - take);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diversity::DiversityKind;

    #[test]
    fn repeated_point_gives_zero() {
        let obj = Objective::new(DiversityKind::Edge, 2, 1).unwrap();
        let mut t = ZeroOptTracker::new(2, 2);
        for tau in 1..=10 {
            t.ingest(tau, Point::from([3, 3]));
        }
        assert_eq!(t.query(6, &obj).unwrap(), ZeroQuery::Exact { value: 0.0, points: vec![Point::from([3, 3]); 2] });
        assert!(t.len() <= 2);
    }

    #[test]
    fn distinct_window_defers() {
        let obj = Objective::new(DiversityKind::Edge, 2, 1).unwrap();
        let mut t = ZeroOptTracker::with_cell_cap(&obj);
        t.ingest(1, Point::from([1, 1]));
        t.ingest(2, Point::from([2, 1]));
        assert_eq!(t.query(1, &obj).unwrap(), ZeroQuery::AtLeastK);
        assert!(matches!(t.query(2, &obj).unwrap(), ZeroQuery::Exact { .. }));
    }

    #[test]
    fn clique_with_few_values() {
        let obj = Objective::new(DiversityKind::Clique, 3, 1).unwrap();
        let mut t = ZeroOptTracker::with_cell_cap(&obj);
        for tau in 1..=9 {
            let x = if tau % 2 == 0 { [1, 1] } else { [4, 5] };
            t.ingest(tau, Point::from(x));
        }
        // Two copies of one value and one of the other: pairs 0, 5, 5.
        match t.query(1, &obj).unwrap() {
            ZeroQuery::Exact { value, .. } => assert_eq!(value, 10.0),
            q => panic!("{q:?}"),
        }
    }
}
