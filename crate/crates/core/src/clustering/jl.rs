use rand::Rng;

use crate::error::{invalid, Result};
use crate::geometry::Point;
use crate::prf::Prf;

const TAG_JL: u64 = 0x71;

/// Default constant c in `d′ = ⌈c·ε⁻²·log2 k⌉`.
pub const JL_CONST: f64 = 2.0;

/// `⌈c·ε⁻²·log2 k⌉`, at least 1.
pub fn jl_dim(k: usize, eps: f64, c: f64) -> usize {
    ((c * (k.max(2) as f64).log2() / (eps * eps)).ceil() as usize).max(1)
}

/// Random-sign map `x ↦ Sx` with entries `±1/√d′`.
#[derive(Debug, Clone, PartialEq)]
pub struct JlProjection {
    rows: Vec<Vec<f64>>,
    d_in: usize,
    offset: i64,
}

impl JlProjection {
    pub fn new(d_in: usize, delta: i64, k: usize, eps: f64, c: f64, seed: u64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 0.5) {
            return invalid(format!("projection eps must lie in (0, 0.5], got {eps}"));
        }
        if d_in == 0 || delta < 1 || !(c > 0.0) {
            return invalid("projection needs positive d, Δ and c");
        }
        let d_out = jl_dim(k, eps, c);
        let scale = 1.0 / (d_out as f64).sqrt();
        let mut rng = Prf::new(seed).derive(TAG_JL).rng(&[d_in as u64, d_out as u64]);
        let rows = (0..d_out).map(|_| (0..d_in).map(|_| if rng.random::<bool>() { scale } else { -scale }).collect()).collect();
        // |(Sx)_r| ≤ ‖x‖₁/√d′ ≤ d·Δ/√d′.
        let offset = (d_in as f64 * delta as f64 * scale).ceil() as i64 + 1;
        Ok(JlProjection { rows, d_in, offset })
    }

    pub fn out_dim(&self) -> usize {
        self.rows.len()
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.d_in, "dimension mismatch");
        self.rows.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// Side of the grid holding quantized outputs.
    pub fn out_delta(&self) -> i64 {
        2 * self.offset + 1
    }

    /// Rounds `Sx` and shifts it into `[1, out_delta]`.
    pub fn quantize(&self, x: &Point) -> Point {
        let xs: Vec<f64> = x.coords().iter().map(|&c| c as f64).collect();
        Point::new(self.project(&xs).iter().map(|v| v.round() as i64 + self.offset + 1).collect())
    }
}

/// Projects every point with a fresh seeded matrix.
pub fn jl_project(points: &[Vec<f64>], k: usize, eps: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let Some(d_in) = points.first().map(Vec::len) else { return Ok(Vec::new()) };
    let map = JlProjection::new(d_in, 1, k, eps, JL_CONST, seed)?;
    Ok(points.iter().map(|x| map.project(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dim_formula() {
        assert_eq!(jl_dim(16, 0.5, 1.0), 16);
        assert_eq!(jl_dim(16, 0.5, JL_CONST), (JL_CONST * 16.0) as usize);
    }

    #[test]
    fn zero_maps_to_zero() {
        let out = jl_project(&[vec![0.0; 5]], 4, 0.3, 7).unwrap();
        assert!(out[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn squared_norm_unbiased() {
        let x = vec![3.0, -1.0, 4.0, 1.0, -5.0, 9.0];
        let norm: f64 = x.iter().map(|v| v * v).sum();
        let ratios: Vec<f64> = (0..1000u64)
            .map(|s| jl_project(&[x.clone()], 4, 0.5, s).unwrap()[0].iter().map(|v| v * v).sum::<f64>() / norm)
            .collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (ratios.len() - 1) as f64;
        let stderr = (var / ratios.len() as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * stderr, "mean {mean} stderr {stderr}");
    }

    #[test]
    fn quantized_in_grid() {
        let map = JlProjection::new(3, 20, 4, 0.4, JL_CONST, 1).unwrap();
        for x in [[1, 1, 1], [20, 20, 20], [1, 20, 1]] {
            let q = map.quantize(&Point::from(x));
            assert!(q.check_in_grid(map.out_dim(), map.out_delta()).is_ok());
        }
    }
}
