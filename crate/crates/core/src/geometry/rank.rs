//! Rank computations: a fast modular basis for streaming and an exact
//! fraction-free elimination over the integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// The Mersenne prime 2^61 - 1.
pub const PRIME: u64 = (1 << 61) - 1;

#[inline]
pub fn mod_mul(a: u64, b: u64) -> u64 {
    let prod = a as u128 * b as u128;
    let lo = (prod as u64) & PRIME;
    let hi = (prod >> 61) as u64;
    let s = lo + hi;
    if s >= PRIME {
        s - PRIME
    } else {
        s
    }
}

#[inline]
pub fn mod_sub(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + PRIME - b
    }
}

pub fn mod_pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mod_mul(r, a);
        }
        a = mod_mul(a, a);
        e >>= 1;
    }
    r
}

pub fn mod_inv(a: u64) -> u64 {
    mod_pow(a, PRIME - 2)
}

pub fn to_mod(v: i64) -> u64 {
    let r = (v as i128).rem_euclid(PRIME as i128);
    r as u64
}

/// Row-echelon basis over GF(2^61 - 1), built incrementally.
///
/// Rows that are independent modulo the prime are independent over the
/// rationals, so a rank reached here is a lower bound on the exact rank.
#[derive(Clone, Debug)]
pub struct ModBasis {
    width: usize,
    /// Normalized rows (pivot entry 1) with their pivot column.
    rows: Vec<(usize, Vec<u64>)>,
    scratch: Vec<u64>,
}

impl ModBasis {
    pub fn new(width: usize) -> Self {
        Self { width, rows: Vec::new(), scratch: vec![0; width] }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn clear(&mut self) {
        self.rows.clear();
    }

    /// Inserts a row; returns true if it increased the rank.
    pub fn insert_i64(&mut self, row: &[i64]) -> bool {
        debug_assert_eq!(row.len(), self.width);
        for (s, &v) in self.scratch.iter_mut().zip(row) {
            *s = to_mod(v);
        }
        self.reduce_and_push()
    }

    /// Inserts a row already reduced modulo the prime.
    pub fn insert_mod(&mut self, row: &[u64]) -> bool {
        self.scratch.copy_from_slice(row);
        self.reduce_and_push()
    }

    /// Inserts a 0/1 row given by the positions of its ones.
    pub fn insert_ones(&mut self, ones: &[usize]) -> bool {
        self.scratch.iter_mut().for_each(|s| *s = 0);
        for &i in ones {
            self.scratch[i] = 1;
        }
        self.reduce_and_push()
    }

    fn reduce_and_push(&mut self) -> bool {
        let mut row = std::mem::take(&mut self.scratch);
        for (pivot, b) in &self.rows {
            let f = row[*pivot];
            if f != 0 {
                for (r, &bv) in row.iter_mut().zip(b).skip(*pivot) {
                    if bv != 0 {
                        *r = mod_sub(*r, mod_mul(f, bv));
                    }
                }
            }
        }
        let added = match row.iter().position(|&v| v != 0) {
            Some(p) => {
                let inv = mod_inv(row[p]);
                let normalized: Vec<u64> = row.iter().map(|&v| mod_mul(v, inv)).collect();
                self.rows.push((p, normalized));
                true
            }
            None => false,
        };
        self.scratch = row;
        added
    }
}

/// Exact rank of an integer matrix (fraction-free Gaussian elimination).
pub fn exact_rank(rows: &[Vec<i64>]) -> usize {
    exact_rank_big(rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect())
}

pub fn exact_rank_big(mut m: Vec<Vec<BigInt>>) -> usize {
    let width = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let (top, bottom) = m.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in bottom.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let a = pivot_row[col].clone();
            let b = row[col].clone();
            let mut g = BigInt::zero();
            for (x, y) in row.iter_mut().zip(pivot_row).skip(col) {
                *x = &*x * &a - &b * y;
                g = g.gcd(x);
            }
            if !g.is_zero() && g.abs() != BigInt::from(1) {
                for x in row.iter_mut().skip(col) {
                    *x = &*x / &g;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Affine rank of a point set: rank of the homogenized points minus one.
pub fn affine_rank(points: &[Vec<i64>]) -> usize {
    if points.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<i64>> = points
        .iter()
        .map(|p| std::iter::once(1).chain(p.iter().copied()).collect())
        .collect();
    exact_rank(&rows) - 1
}
