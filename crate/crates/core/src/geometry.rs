use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An integer point; cloning shares the coordinate buffer.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Arc<[i64]>);

impl Point {
    pub fn new(coords: Vec<i64>) -> Self {
        Point(coords.into())
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Checks `1 <= x_j <= delta` in every coordinate.
    pub fn check_in_grid(&self, d: usize, delta: i64) -> Result<()> {
        if self.dim() != d {
            return Err(Error::InvalidParam(format!("point {self} has dimension {}, expected {d}", self.dim())));
        }
        if self.0.iter().any(|&c| c < 1 || c > delta) {
            return Err(Error::InvalidParam(format!("point {self} outside [1,{delta}]^{d}")));
        }
        Ok(())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, c) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for Point {
    fn from(v: Vec<i64>) -> Self {
        Point::new(v)
    }
}

impl<const D: usize> From<[i64; D]> for Point {
    fn from(v: [i64; D]) -> Self {
        Point::new(v.to_vec())
    }
}

pub fn sq_dist(a: &Point, b: &Point) -> i128 {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(&x, &y)| {
            let t = (x - y) as i128;
            t * t
        })
        .sum()
}

pub fn dist(a: &Point, b: &Point) -> f64 {
    (sq_dist(a, b) as f64).sqrt()
}

/// Euclidean distance between a point and a real-valued center.
pub fn dist_to(a: &Point, c: &[f64]) -> f64 {
    a.coords()
        .iter()
        .zip(c)
        .map(|(&x, &y)| {
            let t = x as f64 - y;
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

/// Number of k-subsets of an n-set, saturating at u128::MAX.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Calls `f` on every k-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
