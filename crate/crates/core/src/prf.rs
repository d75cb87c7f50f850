//! Seeded pseudorandom functions used for all keyed-by-value coins.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A keyed hash from word sequences to 64-bit outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prf {
    key: u64,
}

impl Prf {
    pub fn new(seed: u64) -> Self {
        Prf { key: mix(seed ^ GOLDEN) }
    }

    /// Independent child function for a tag (level, sub-sketch, purpose...).
    pub fn derive(&self, tag: u64) -> Self {
        Prf { key: self.hash(&[tag, 0x5EED]) }
    }

    pub fn hash(&self, words: &[u64]) -> u64 {
        let mut h = self.key;
        for &w in words {
            h = mix(h.wrapping_add(GOLDEN) ^ mix(w.wrapping_add(GOLDEN)));
        }
        mix(h ^ (words.len() as u64))
    }

    pub fn hash_i64(&self, words: &[i64]) -> u64 {
        let mut h = self.key;
        for &w in words {
            h = mix(h.wrapping_add(GOLDEN) ^ mix((w as u64).wrapping_add(GOLDEN)));
        }
        mix(h ^ (words.len() as u64))
    }

    /// Uniform value in [0, 1).
    pub fn unit(&self, words: &[u64]) -> f64 {
        to_unit(self.hash(words))
    }

    pub fn unit_i64(&self, words: &[i64]) -> f64 {
        to_unit(self.hash_i64(words))
    }

    pub fn rng(&self, words: &[u64]) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.hash(words))
    }

    pub fn rng_i64(&self, words: &[i64]) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.hash_i64(words))
    }
}

fn to_unit(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

const MERSENNE61: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    let r = (a as u128) * (b as u128);
    let lo = (r as u64) & MERSENNE61;
    let hi = (r >> 61) as u64;
    let s = lo + hi;
    if s >= MERSENNE61 {
        s - MERSENNE61
    } else {
        s
    }
}

/// Random polynomial of degree `independence - 1` over GF(2^61 - 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KWiseHash {
    coeffs: Vec<u64>,
}

impl KWiseHash {
    pub fn new(independence: usize, seed: u64) -> Self {
        let prf = Prf::new(seed).derive(0x4B57);
        let coeffs = (0..independence.max(1) as u64)
            .map(|j| prf.hash(&[j]) % MERSENNE61)
            .collect();
        KWiseHash { coeffs }
    }

    pub fn independence(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: u64) -> u64 {
        let x = x % MERSENNE61;
        self.coeffs.iter().rev().fold(0u64, |acc, &c| {
            let v = mulmod(acc, x) + c;
            if v >= MERSENNE61 {
                v - MERSENNE61
            } else {
                v
            }
        })
    }

    pub fn unit(&self, x: u64) -> f64 {
        self.eval(x) as f64 / MERSENNE61 as f64
    }
}
