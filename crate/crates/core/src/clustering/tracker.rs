use std::collections::{BTreeSet, VecDeque};

use crate::geometry::Point;

/// Latest copy of each of the k+1 most recently seen values, enough to decide
/// whether a window holds at most k distinct points.
#[derive(Debug, Clone)]
pub struct DistinctTracker {
    k: usize,
    list: VecDeque<(u64, Point)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistinctQuery {
    /// The window's distinct values; the optimum is 0.
    AtMostK(Vec<Point>),
    MoreThanK,
}

impl DistinctTracker {
    pub fn new(k: usize) -> Self {
        DistinctTracker { k, list: VecDeque::new() }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn ingest(&mut self, tau: u64, x: Point) {
        if let Some(pos) = self.list.iter().position(|(_, y)| *y == x) {
            self.list.remove(pos);
        } else if self.list.len() == self.k + 1 {
            self.list.pop_front();
        }
        self.list.push_back((tau, x));
    }

    pub fn query(&self, window_start: u64) -> DistinctQuery {
        let values: BTreeSet<&Point> = self.list.iter().filter(|(t, _)| *t >= window_start).map(|(_, x)| x).collect();
        if values.len() <= self.k {
            DistinctQuery::AtMostK(values.into_iter().cloned().collect())
        } else {
            DistinctQuery::MoreThanK
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_values_k2() {
        let mut t = DistinctTracker::new(2);
        let (a, b) = (Point::from([1, 1]), Point::from([2, 2]));
        for (tau, x) in [a.clone(), a.clone(), b.clone()].into_iter().enumerate() {
            t.ingest(tau as u64 + 1, x);
        }
        assert_eq!(t.query(1), DistinctQuery::AtMostK(vec![a, b]));
        t.ingest(4, Point::from([3, 3]));
        assert_eq!(t.query(1), DistinctQuery::MoreThanK);
        assert!(t.len() <= 3);
    }

    proptest! {
        #[test]
        fn matches_materialized_window(
            stream in prop::collection::vec(0i64..4, 0..60),
            k in 1usize..4,
            w in 1u64..20,
        ) {
            let mut t = DistinctTracker::new(k);
            for (i, &v) in stream.iter().enumerate() {
                let now = i as u64 + 1;
                t.ingest(now, Point::from([v]));
                let start = (now + 1).saturating_sub(w).max(1);
                let window: BTreeSet<i64> = stream[(start - 1) as usize..now as usize].iter().copied().collect();
                match t.query(start) {
                    DistinctQuery::AtMostK(pts) => {
                        prop_assert!(window.len() <= k);
                        let got: BTreeSet<i64> = pts.iter().map(|p| p.coords()[0]).collect();
                        prop_assert_eq!(got, window);
                    }
                    DistinctQuery::MoreThanK => prop_assert!(window.len() > k),
                }
                prop_assert!(t.len() <= k + 1);
            }
        }
    }
}
