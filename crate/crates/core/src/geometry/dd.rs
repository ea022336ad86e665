//! Exact double-description method.
//!
//! The facets of `conv(V)` are the extreme rays of the cone
//! `{y : y0 + y·v ≥ 0 for all v in V}`. Rows are inserted one at a time;
//! a new ray is formed from every adjacent pair of rays on opposite sides of
//! the inserted hyperplane. Two rays are adjacent iff no third ray vanishes
//! on all processed rows where both vanish.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rank::{exact_rank, ModBasis};
use super::{big_primitive, vertex_point, Inequality};
use crate::error::{Error, Result};
use crate::number::Rational;
use crate::strategy::VertexSet;

/// Order in which constraint rows are added to the cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InsertionOrder {
    /// As given.
    Input,
    /// Lexicographically smallest row first.
    LexMin,
    LexMax,
    /// The row that cuts off the most current rays next.
    MaxCutoff,
    /// The row that cuts off the fewest current rays next.
    MinCutoff,
    /// A seeded shuffle.
    Random(u64),
}

#[derive(Clone, Debug)]
pub struct DdOptions {
    pub order: InsertionOrder,
    /// Abort once an intermediate cone has more rays than this.
    pub max_rays: usize,
}

impl Default for DdOptions {
    fn default() -> Self {
        Self { order: InsertionOrder::LexMin, max_rays: 5_000_000 }
    }
}

/// Facets of the convex hull of a vertex set.
pub fn enumerate_facets(vertices: &VertexSet, opts: &DdOptions) -> Result<Vec<Inequality>> {
    let s = vertices.scenario();
    let points: Vec<Vec<i64>> = (0..vertices.len()).map(|i| vertex_point(vertices, i)).collect();
    let raw = facets_of_points(&points, opts)?;
    let mut out = raw
        .into_iter()
        .map(|(c, c0)| Inequality::new(s.clone(), c, c0))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| (&a.coeffs, a.constant).cmp(&(&b.coeffs, b.constant)));
    out.dedup();
    Ok(out)
}

/// Facets `(c, c0)` with `c·p + c0 ≥ 0` of the convex hull of integer
/// points. Lower-dimensional input is handled inside its affine hull: the
/// returned inequalities only use a maximal independent set of coordinates.
pub fn facets_of_points(points: &[Vec<i64>], opts: &DdOptions) -> Result<Vec<(Vec<i64>, i64)>> {
    let mut pts: Vec<Vec<i64>> = points.to_vec();
    pts.sort();
    pts.dedup();
    let Some(first) = pts.first() else {
        return Err(Error::InvalidArgument("no points".into()));
    };
    let d = first.len();
    if pts.iter().any(|p| p.len() != d) {
        return Err(Error::DimensionMismatch("points of different lengths".into()));
    }
    let rows: Vec<Vec<i64>> = pts
        .iter()
        .map(|p| std::iter::once(1).chain(p.iter().copied()).collect())
        .collect();
    let cols = pivot_columns(&rows);
    if cols.len() == 1 {
        // A single point has no facets.
        return Ok(Vec::new());
    }
    let reduced: Vec<Vec<i64>> = rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect();
    let rays = extreme_rays(&reduced, opts)?;
    Ok(rays
        .into_iter()
        .map(|y| {
            let mut full = vec![0i64; d + 1];
            for (&c, v) in cols.iter().zip(y) {
                full[c] = v;
            }
            let c0 = full[0];
            (full[1..].to_vec(), c0)
        })
        .collect())
}

/// Vertices of the bounded polyhedron `{p : c·p + c0 ≥ 0}`.
pub fn vertices_of_inequalities(ineqs: &[(Vec<i64>, i64)], dim: usize, opts: &DdOptions) -> Result<Vec<Vec<Rational>>> {
    let mut rows: Vec<Vec<i64>> = ineqs
        .iter()
        .map(|(c, c0)| std::iter::once(*c0).chain(c.iter().copied()).collect())
        .collect();
    let mut nonneg = vec![0i64; dim + 1];
    nonneg[0] = 1;
    rows.push(nonneg);
    if exact_rank(&rows) != dim + 1 {
        return Err(Error::InvalidArgument("inequalities do not describe a full-dimensional polytope".into()));
    }
    let rays = extreme_rays(&rows, opts)?;
    rays.into_iter()
        .map(|y| {
            if y[0] <= 0 {
                return Err(Error::Unbounded);
            }
            let den = BigInt::from(y[0]);
            Ok(y[1..]
                .iter()
                .map(|&v| Rational::new(BigInt::from(v), den.clone()))
                .collect())
        })
        .collect()
}

/// Columns forming a basis of the column space, greedily from the left.
fn pivot_columns(rows: &[Vec<i64>]) -> Vec<usize> {
    let width = rows[0].len();
    let columns: Vec<Vec<i64>> = (0..width).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    let mut basis = ModBasis::new(rows.len());
    let cols: Vec<usize> = (0..width).filter(|&c| basis.insert_i64(&columns[c])).collect();
    // Modular independence implies rational independence, so `cols` is
    // independent; it is a basis iff its size equals the exact rank.
    if cols.len() == width || cols.len() == exact_rank(rows) {
        return cols;
    }
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    let mut out = Vec::new();
    for (c, col) in columns.into_iter().enumerate() {
        chosen.push(col);
        if exact_rank(&chosen) == chosen.len() {
            out.push(c);
        } else {
            chosen.pop();
        }
    }
    out
}

struct Ray {
    v: Vec<i64>,
    zeros: Vec<u64>,
}

fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// Extreme rays of `{y : A y ≥ 0}` for `A` of full column rank.
pub fn extreme_rays(rows: &[Vec<i64>], opts: &DdOptions) -> Result<Vec<Vec<i64>>> {
    let m = rows.len();
    let n = rows[0].len();
    if exact_rank(rows) != n {
        return Err(Error::InvalidArgument("constraint matrix must have full column rank".into()));
    }
    if n == 1 {
        // The cone is a half-line (rows all of one sign).
        let pos = rows.iter().all(|r| r[0] >= 0);
        let neg = rows.iter().all(|r| r[0] <= 0);
        return Ok(match (pos, neg) {
            (true, _) => vec![vec![1]],
            (_, true) => vec![vec![-1]],
            _ => Vec::new(),
        });
    }

    let mut order: Vec<usize> = (0..m).collect();
    match opts.order {
        InsertionOrder::LexMin => order.sort_by(|&a, &b| rows[a].cmp(&rows[b])),
        InsertionOrder::LexMax => order.sort_by(|&a, &b| rows[b].cmp(&rows[a])),
        InsertionOrder::Random(seed) => order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
        _ => {}
    }

    // Initial simplicial cone from the first n independent rows.
    let mut basis = ModBasis::new(n);
    let mut initial: Vec<usize> = order.iter().copied().filter(|&r| basis.insert_i64(&rows[r])).take(n).collect();
    if initial.len() < n {
        initial = exact_basis_rows(rows, &order, n);
    }
    let words = m.div_ceil(64);
    let mut processed: Vec<usize> = initial.clone();
    let mut rays = initial_rays(rows, &initial, words)?;
    let mut pending: Vec<usize> = order.into_iter().filter(|r| !initial.contains(r)).collect();


    while !pending.is_empty() {
        let next = match opts.order {
            InsertionOrder::MaxCutoff | InsertionOrder::MinCutoff => {
                let counts: Vec<usize> = pending
                    .par_iter()
                    .map(|&r| rays.iter().filter(|ray| dot(&rows[r], &ray.v) < 0).count())
                    .collect();
                let pick = if opts.order == InsertionOrder::MaxCutoff {
                    (0..pending.len()).max_by_key(|&i| (counts[i], std::cmp::Reverse(i)))
                } else {
                    (0..pending.len()).min_by_key(|&i| (counts[i], i))
                };
                pending.remove(pick.expect("pending rows"))
            }
            _ => pending.remove(0),
        };
        let t = processed.len();
        processed.push(next);
        let row = &rows[next];
        let vals: Vec<i128> = rays.iter().map(|r| dot(row, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > 0).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < 0).collect();
        if neg.is_empty() {
            for (ray, &v) in rays.iter_mut().zip(&vals) {
                if v == 0 {
                    ray.zeros[t / 64] |= 1 << (t % 64);
                }
            }
            continue;
        }

        // Rays whose zero set contains each processed row.
        let mut index: Vec<Vec<u32>> = vec![Vec::new(); t];
        for (i, ray) in rays.iter().enumerate() {
            for pos in bits(&ray.zeros) {
                index[pos].push(i as u32);
            }
        }
        let new_rays: Vec<Result<Vec<Ray>>> = pos
            .par_iter()
            .map_init(
                || vec![0u64; words],
                |common, &p| {
                    let mut out = Vec::new();
                    for &q in &neg {
                        let (rp, rq) = (&rays[p], &rays[q]);
                        if popcount_and(&rp.zeros, &rq.zeros) < (n - 2) as u32 {
                            continue;
                        }
                        for (c, (a, b)) in common.iter_mut().zip(rp.zeros.iter().zip(&rq.zeros)) {
                            *c = a & b;
                        }
                        if !adjacent(common, p, q, &rays, &index) {
                            continue;
                        }
                        let v = combine(vals[p], &rq.v, vals[q], &rp.v)?;
                        let mut zeros = common.clone();
                        zeros[t / 64] |= 1 << (t % 64);
                        out.push(Ray { v, zeros });
                    }
                    Ok(out)
                },
            )
            .collect();

        let mut next_rays = Vec::with_capacity(rays.len());
        for (i, mut ray) in rays.into_iter().enumerate() {
            match vals[i].signum() {
                1 => next_rays.push(ray),
                0 => {
                    ray.zeros[t / 64] |= 1 << (t % 64);
                    next_rays.push(ray);
                }
                _ => {}
            }
        }
        for batch in new_rays {
            next_rays.extend(batch?);
        }
        rays = next_rays;
        if rays.len() > opts.max_rays {
            return Err(Error::BudgetExceeded {
                what: format!("double description after {} of {} rows", t + 1, m),
                partial: rays.len(),
            });
        }
        log::debug!("dd: row {}/{}: +{} -{} -> {} rays", t + 1, m, pos.len(), neg.len(), rays.len());
    }
    Ok(rays.into_iter().map(|r| r.v).collect())
}

fn dot(row: &[i64], v: &[i64]) -> i128 {
    row.iter().zip(v).map(|(&a, &b)| a as i128 * b as i128).sum()
}

/// `vp·q - vq·p` reduced to a primitive vector (`vp > 0 > vq`).
fn combine(vp: i128, q: &[i64], vq: i128, p: &[i64]) -> Result<Vec<i64>> {
    let overflow = || Error::Overflow("ray coordinate exceeds 64 bits".into());
    let mut wide = Vec::with_capacity(q.len());
    for (&a, &b) in q.iter().zip(p) {
        let x = vp
            .checked_mul(a as i128)
            .and_then(|x| vq.checked_mul(b as i128).and_then(|y| x.checked_sub(y)))
            .ok_or_else(overflow)?;
        wide.push(x);
    }
    let g = wide.iter().fold(0i128, |g, &x| gcd128(g, x));
    wide.iter()
        .map(|&x| i64::try_from(if g > 1 { x / g } else { x }).map_err(|_| overflow()))
        .collect()
}

fn gcd128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(w, &bits)| {
        let mut b = bits;
        std::iter::from_fn(move || {
            if b == 0 {
                return None;
            }
            let i = b.trailing_zeros() as usize;
            b &= b - 1;
            Some(w * 64 + i)
        })
    })
}

/// Combinatorial adjacency: `p` and `q` are adjacent iff no other current
/// ray vanishes on every row where both vanish. Candidates are taken from
/// the shortest inverted list among the common rows.
fn adjacent(common: &[u64], p: usize, q: usize, rays: &[Ray], index: &[Vec<u32>]) -> bool {
    let Some(shortest) = bits(common).map(|pos| &index[pos]).min_by_key(|l| l.len()) else {
        return true;
    };
    !shortest.iter().any(|&r| {
        let r = r as usize;
        r != p && r != q && rays[r].zeros.iter().zip(common).all(|(z, c)| z & c == *c)
    })
}

fn exact_basis_rows(rows: &[Vec<i64>], order: &[usize], n: usize) -> Vec<usize> {
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    let mut out = Vec::new();
    for &r in order {
        chosen.push(rows[r].clone());
        if exact_rank(&chosen) == chosen.len() {
            out.push(r);
            if out.len() == n {
                break;
            }
        } else {
            chosen.pop();
        }
    }
    out
}

/// Columns of the inverse of the initial basis rows, made primitive.
fn initial_rays(rows: &[Vec<i64>], initial: &[usize], words: usize) -> Result<Vec<Ray>> {
    let n = initial.len();
    let mut a: Vec<Vec<Rational>> = initial
        .iter()
        .map(|&r| rows[r].iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect())
        .collect();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&i| !a[i][col].is_zero()).expect("basis rows are independent");
        a.swap(col, p);
        inv.swap(col, p);
        let piv = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &piv;
            inv[col][j] = &inv[col][j] / &piv;
        }
        for i in 0..n {
            if i != col && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..n {
                    let (x, y) = (a[col][j].clone(), inv[col][j].clone());
                    a[i][j] -= &f * x;
                    inv[i][j] -= &f * y;
                }
            }
        }
    }
    // Ray j is column j of the inverse: positive on basis row j, zero on
    // the others.
    let mut rays = Vec::with_capacity(n);
    for j in 0..n {
        let den = (0..n).fold(BigInt::one(), |l, i| num_integer::Integer::lcm(&l, inv[i][j].denom()));
        let mut v: Vec<BigInt> = (0..n)
            .map(|i| (&inv[i][j] * Rational::from_integer(den.clone())).to_integer())
            .collect();
        big_primitive(&mut v);
        let v = v
            .iter()
            .map(|x| x.to_i64().ok_or_else(|| Error::Overflow("initial ray exceeds 64 bits".into())))
            .collect::<Result<Vec<i64>>>()?;
        let mut zeros = vec![0u64; words];
        for k in 0..n {
            if k != j {
                zeros[k / 64] |= 1 << (k % 64);
            }
        }
        debug_assert!(v.iter().any(|x| *x != 0));
        rays.push(Ray { v, zeros });
    }
    Ok(rays)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<(Vec<i64>, i64)>) -> Vec<(Vec<i64>, i64)> {
        v.sort();
        v
    }

    #[test]
    fn triangle_has_three_facets() {
        let pts = vec![vec![0, 0], vec![1, 0], vec![0, 1]];
        let f = sorted(facets_of_points(&pts, &DdOptions::default()).unwrap());
        assert_eq!(f, vec![(vec![-1, -1], 1), (vec![0, 1], 0), (vec![1, 0], 0)]);
    }

    #[test]
    fn cube_has_six_facets_in_every_order() {
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(vec![i & 1, (i >> 1) & 1, (i >> 2) & 1]);
        }
        for order in [
            InsertionOrder::Input,
            InsertionOrder::LexMin,
            InsertionOrder::LexMax,
            InsertionOrder::MaxCutoff,
            InsertionOrder::MinCutoff,
            InsertionOrder::Random(3),
        ] {
            let f = facets_of_points(&pts, &DdOptions { order, ..Default::default() }).unwrap();
            assert_eq!(f.len(), 6, "{order:?}");
        }
    }

    #[test]
    fn lower_dimensional_input() {
        // A segment embedded in the plane.
        let pts = vec![vec![0, 0], vec![1, 1]];
        let f = facets_of_points(&pts, &DdOptions::default()).unwrap();
        assert_eq!(f.len(), 2);
        for (c, c0) in &f {
            for p in &pts {
                assert!(c.iter().zip(p).map(|(a, b)| a * b).sum::<i64>() + c0 >= 0);
            }
        }
    }

    #[test]
    fn cross_polytope_round_trip() {
        let pts = vec![vec![1, 0, 0], vec![-1, 0, 0], vec![0, 1, 0], vec![0, -1, 0], vec![0, 0, 1], vec![0, 0, -1]];
        let f = facets_of_points(&pts, &DdOptions::default()).unwrap();
        assert_eq!(f.len(), 8);
        let back = vertices_of_inequalities(&f, 3, &DdOptions::default()).unwrap();
        let mut back: Vec<Vec<i64>> = back
            .iter()
            .map(|v| v.iter().map(|x| x.to_integer().to_i64().unwrap()).collect())
            .collect();
        back.sort();
        let mut expect = pts.clone();
        expect.sort();
        assert_eq!(back, expect);
    }

    #[test]
    fn ray_budget() {
        let mut pts = Vec::new();
        for i in 0..16 {
            pts.push(vec![i & 1, (i >> 1) & 1, (i >> 2) & 1, (i >> 3) & 1]);
        }
        let err = facets_of_points(&pts, &DdOptions { max_rays: 3, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }
}
