use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Point;
use crate::prf::Prf;

/// The shift is `v = q·Δ/2^SHIFT_BITS` with integer `q ∈ [0, 2^SHIFT_BITS)`.
pub const SHIFT_BITS: u32 = 30;

const TAG_SHIFT: u64 = 0x5417;

/// Hierarchical grids `G_{-1}, …, G_L` shifted by a common random vector.
///
/// Level `i` has side `Δ/2^i`. Cell indices are exact: the coordinates are
/// scaled by `2^SHIFT_BITS` and compared in 128-bit integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftedGrids {
    d: usize,
    delta: i64,
    levels: usize,
    shift: Vec<u64>,
}

/// `⌈log2(n·d·Δ)⌉ + 10`.
pub fn level_count(n: u64, d: usize, delta: i64) -> usize {
    let prod = (n.max(1) as f64) * (d.max(1) as f64) * (delta.max(1) as f64);
    prod.log2().ceil().max(0.0) as usize + 10
}

impl ShiftedGrids {
    pub fn new(delta: i64, d: usize, n: u64, seed: u64) -> Result<Self> {
        let prf = Prf::new(seed).derive(TAG_SHIFT);
        let shift = (0..d as u64).map(|j| prf.hash(&[j]) >> (64 - SHIFT_BITS)).collect();
        Self::with_shift(delta, d, n, shift)
    }

    pub fn with_shift(delta: i64, d: usize, n: u64, shift: Vec<u64>) -> Result<Self> {
        if delta < 1 || d == 0 || n == 0 {
            return invalid("Δ, d and n must be positive");
        }
        if shift.len() != d || shift.iter().any(|&q| q >= 1 << SHIFT_BITS) {
            return invalid("shift must have d entries below 2^30");
        }
        let levels = level_count(n, d, delta);
        // x·2^30 + q·Δ < 2Δ·2^30, shifted left by L bits, must fit in i128.
        if (delta as f64).log2() + 1.0 + SHIFT_BITS as f64 + levels as f64 > 120.0 {
            return Err(crate::Error::TooLarge(format!("{levels} grid levels with Δ={delta}")));
        }
        Ok(ShiftedGrids { d, delta, levels, shift })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn delta(&self) -> i64 {
        self.delta
    }

    /// L; levels run over `-1..=L`.
    pub fn depth(&self) -> usize {
        self.levels
    }

    /// The shift vector `v` as reals in `[0, Δ)`.
    pub fn shift(&self) -> Vec<f64> {
        self.shift.iter().map(|&q| q as f64 * self.delta as f64 / (1u64 << SHIFT_BITS) as f64).collect()
    }

    /// `Δ_i = Δ/2^i`.
    pub fn side(&self, level: i32) -> f64 {
        self.delta as f64 * 2f64.powi(-level)
    }

    /// Index vector of the level-`level` cell containing `x`.
    pub fn cell_of(&self, x: &Point, level: i32) -> Vec<i64> {
        debug_assert!(level >= -1 && level <= self.levels as i32);
        let unit = 1i128 << SHIFT_BITS;
        let (num_shift, den) = if level < 0 { (0, 2 * self.delta as i128 * unit) } else { (level as u32, self.delta as i128 * unit) };
        x.coords()
            .iter()
            .zip(&self.shift)
            .map(|(&c, &q)| {
                let scaled = c as i128 * unit + q as i128 * self.delta as i128;
                (scaled << num_shift).div_euclid(den) as i64
            })
            .collect()
    }
}

/// Index of the enclosing cell one level up.
pub fn parent(cell: &[i64]) -> Vec<i64> {
    cell.iter().map(|&t| t.div_euclid(2)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unshifted_cell() {
        let g = ShiftedGrids::with_shift(8, 2, 4, vec![0, 0]).unwrap();
        assert_eq!(g.cell_of(&Point::from([1, 1]), 1), vec![0, 0]);
        assert_eq!(g.cell_of(&Point::from([4, 7]), 1), vec![1, 1]);
        assert_eq!(g.side(1), 4.0);
        assert_eq!(g.side(-1), 16.0);
    }

    #[test]
    fn depth_formula() {
        // n·d·Δ = 100·2·64 = 12800, log2 ≈ 13.6.
        assert_eq!(level_count(100, 2, 64), 24);
        assert_eq!(level_count(1, 1, 1), 10);
    }

    proptest! {
        #[test]
        fn cells_nest(seed in any::<u64>(), x in 1i64..=64, y in 1i64..=64, lvl in 0i32..20) {
            let g = ShiftedGrids::new(64, 2, 100, seed).unwrap();
            let p = Point::from([x, y]);
            prop_assert_eq!(parent(&g.cell_of(&p, lvl)), g.cell_of(&p, lvl - 1));
        }

        #[test]
        fn root_is_shared(seed in any::<u64>(), a in prop::collection::vec(1i64..=50, 3), b in prop::collection::vec(1i64..=50, 3)) {
            let g = ShiftedGrids::new(50, 3, 10, seed).unwrap();
            prop_assert_eq!(g.cell_of(&Point::new(a), -1), g.cell_of(&Point::new(b), -1));
        }

        #[test]
        fn cell_contains_point(seed in any::<u64>(), x in 1i64..=64, lvl in 0i32..12) {
            let g = ShiftedGrids::new(64, 1, 10, seed).unwrap();
            let t = g.cell_of(&Point::new(vec![x]), lvl)[0] as f64;
            let shifted = x as f64 + g.shift()[0];
            let side = g.side(lvl);
            prop_assert!(t * side <= shifted + 1e-9 && shifted < (t + 1.0) * side + 1e-9);
        }
    }
}
