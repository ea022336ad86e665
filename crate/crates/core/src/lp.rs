//! Exact two-phase revised simplex for `min c·x s.t. A x = b, x ≥ 0`.
//!
//! The basis inverse is kept as an integer matrix over a common denominator
//! (`B⁻¹ = N / D`) and updated fraction-free, so every quantity stays an
//! integer. Columns are pulled on demand from a [`ColumnSource`], which lets
//! the vertex sets be priced without materializing a dense matrix.
//! Pricing is Dantzig's rule on floating-point duals with exact
//! confirmation, and ties in the ratio test are broken lexicographically.
//! After a long run of degenerate pivots the solver also switches to
//! Bland's rule until the objective moves again.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::number::Rational;

/// Integer constraint columns with integer costs.
pub trait ColumnSource: Sync {
    fn rows(&self) -> usize;
    fn len(&self) -> usize;
    /// Nonzero entries of column `j` as `(row, value)`.
    fn column(&self, j: usize, out: &mut Vec<(usize, i64)>);
    fn cost(&self, j: usize) -> i64;
}

/// Columns stored explicitly in sparse form.
#[derive(Clone, Debug, Default)]
pub struct SparseColumns {
    pub rows: usize,
    pub columns: Vec<Vec<(usize, i64)>>,
    pub costs: Vec<i64>,
}

impl ColumnSource for SparseColumns {
    fn rows(&self) -> usize {
        self.rows
    }
    fn len(&self) -> usize {
        self.columns.len()
    }
    fn column(&self, j: usize, out: &mut Vec<(usize, i64)>) {
        out.clear();
        out.extend_from_slice(&self.columns[j]);
    }
    fn cost(&self, j: usize) -> i64 {
        self.costs[j]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal {
        value: Rational,
        /// Nonzero variables `(column, value)`.
        x: Vec<(usize, Rational)>,
        /// Optimal duals `y` with `c_j - y·a_j ≥ 0` for all columns.
        dual: Vec<Rational>,
    },
    /// `y` with `y·a_j ≤ 0` for every column and `y·b > 0`.
    Infeasible { farkas: Vec<Rational> },
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpOptions {
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before falling back to Bland's rule.
    pub degenerate_limit: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self { max_iterations: 1_000_000, degenerate_limit: 5_000 }
    }
}

/// Basic variable: a source column or the artificial of a row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Var {
    Col(usize),
    Art(usize),
}

struct Tableau {
    m: usize,
    /// `B⁻¹ = n / d`, row-major.
    n: Vec<Vec<BigInt>>,
    d: BigInt,
    basis: Vec<Var>,
    /// Right-hand side (after sign normalization).
    b: Vec<BigInt>,
    row_sign: Vec<i64>,
}

impl Tableau {
    /// `N · a` for a sparse column.
    fn times(&self, col: &[(usize, i64)]) -> Vec<BigInt> {
        (0..self.m)
            .map(|i| {
                col.iter().fold(BigInt::zero(), |acc, &(r, v)| {
                    let v = v * self.row_sign[r];
                    if self.n[i][r].is_zero() {
                        acc
                    } else {
                        acc + &self.n[i][r] * v
                    }
                })
            })
            .collect()
    }

    fn beta(&self) -> Vec<BigInt> {
        (0..self.m)
            .map(|i| self.n[i].iter().zip(&self.b).fold(BigInt::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    /// Lexicographic ratio comparison of rows `i` and `k` of `B⁻¹` scaled by
    /// `1/u`; rows of a nonsingular matrix never tie, so with a
    /// lexicographically positive start the simplex cannot cycle.
    fn lex_less(&self, i: usize, k: usize, u: &[BigInt]) -> bool {
        let flip = (&u[i] * &u[k]).is_negative();
        for c in 0..self.m {
            let lhs = &self.n[i][c] * &u[k];
            let rhs = &self.n[k][c] * &u[i];
            match lhs.cmp(&rhs) {
                std::cmp::Ordering::Equal => continue,
                std::cmp::Ordering::Less => return !flip,
                std::cmp::Ordering::Greater => return flip,
            }
        }
        false
    }

    fn pivot(&mut self, r: usize, u: &[BigInt], entering: Var) {
        let ur = u[r].clone();
        let row_r = self.n[r].clone();
        for i in 0..self.m {
            if i == r || u[i].is_zero() {
                if i != r {
                    // N'_i = u_r N_i / D
                    for k in 0..self.m {
                        if !self.n[i][k].is_zero() {
                            self.n[i][k] = (&self.n[i][k] * &ur) / &self.d;
                        }
                    }
                }
                continue;
            }
            for k in 0..self.m {
                let v = &self.n[i][k] * &ur - &u[i] * &row_r[k];
                self.n[i][k] = v / &self.d;
            }
        }
        self.d = ur;
        self.basis[r] = entering;
    }
}

/// Solves `min c·x, A x = b, x ≥ 0`.
pub fn solve(src: &dyn ColumnSource, b: &[i64], opts: &LpOptions) -> Result<LpOutcome> {
    let m = src.rows();
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!("{} right-hand sides for {m} rows", b.len())));
    }
    let row_sign: Vec<i64> = b.iter().map(|&v| if v < 0 { -1 } else { 1 }).collect();
    let mut t = Tableau {
        m,
        n: (0..m)
            .map(|i| (0..m).map(|k| if i == k { BigInt::one() } else { BigInt::zero() }).collect())
            .collect(),
        d: BigInt::one(),
        basis: (0..m).map(Var::Art).collect(),
        b: b.iter().map(|&v| BigInt::from(v.abs())).collect(),
        row_sign,
    };

    // Phase 1: minimize the sum of artificials.
    run_phase(&mut t, src, Phase::One, opts)?;
    let beta = t.beta();
    let infeas: BigInt = t
        .basis
        .iter()
        .zip(&beta)
        .filter(|(v, _)| matches!(v, Var::Art(_)))
        .fold(BigInt::zero(), |acc, (_, x)| acc + x);
    if !infeas.is_zero() {
        // y = c_B B⁻¹ with unit costs on artificials maximizes y·b subject
        // to y·a_j ≤ 0; convert back to the original row signs.
        let y = duals(&t, |v| if matches!(v, Var::Art(_)) { 1 } else { 0 });
        let farkas = y.into_iter().zip(&t.row_sign).map(|(v, &s)| v * Rational::from_integer(s.into())).collect();
        return Ok(LpOutcome::Infeasible { farkas });
    }
    drive_out_artificials(&mut t, src);

    // Phase 2.
    if !run_phase(&mut t, src, Phase::Two, opts)? {
        return Ok(LpOutcome::Unbounded);
    }
    let beta = t.beta();
    let mut x = Vec::new();
    let mut value = Rational::zero();
    for (v, bi) in t.basis.iter().zip(&beta) {
        if let Var::Col(j) = v {
            if !bi.is_zero() {
                let xv = Rational::new(bi.clone(), t.d.clone());
                value += &xv * Rational::from_integer(src.cost(*j).into());
                x.push((*j, xv));
            }
        }
    }
    x.sort_by_key(|(j, _)| *j);
    let y = duals(&t, |v| match v {
        Var::Col(j) => src.cost(j),
        Var::Art(_) => 0,
    });
    let dual = y.into_iter().zip(&t.row_sign).map(|(v, &s)| v * Rational::from_integer(s.into())).collect();
    Ok(LpOutcome::Optimal { value, x, dual })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

/// `y = c_B B⁻¹` as rationals.
fn duals(t: &Tableau, cost: impl Fn(Var) -> i64) -> Vec<Rational> {
    let z = dual_numerators(t, &cost);
    z.into_iter().map(|v| Rational::new(v, t.d.clone())).collect()
}

fn dual_numerators(t: &Tableau, cost: &impl Fn(Var) -> i64) -> Vec<BigInt> {
    let mut z = vec![BigInt::zero(); t.m];
    for (i, v) in t.basis.iter().enumerate() {
        let c = cost(*v);
        if c != 0 {
            for k in 0..t.m {
                z[k] += &t.n[i][k] * c;
            }
        }
    }
    z
}

/// Reduced-cost numerators `D·c_j - z·a_j` (same sign convention as `D`).
enum Pricer {
    Small(Vec<i128>, i128),
    Big(Vec<BigInt>, BigInt),
}

impl Pricer {
    fn new(z: &[BigInt], d: &BigInt) -> Self {
        let small: Option<Vec<i128>> = z.iter().map(|v| v.to_i128().filter(|x| x.abs() < (1 << 90))).collect();
        match (small, d.to_i128().filter(|x| x.abs() < (1 << 90))) {
            (Some(z), Some(d)) => Pricer::Small(z, d),
            _ => Pricer::Big(z.to_vec(), d.clone()),
        }
    }

    /// Sign-corrected reduced cost numerator; negative means improving.
    fn reduced(&self, col: &[(usize, i64)], cost: i64, row_sign: &[i64]) -> Rc {
        match self {
            Pricer::Small(z, d) => {
                let mut acc: Option<i128> = d.checked_mul(cost as i128);
                for &(r, v) in col {
                    let v = (v * row_sign[r]) as i128;
                    acc = acc.and_then(|a| z[r].checked_mul(v).and_then(|p| a.checked_sub(p)));
                }
                match acc {
                    Some(a) => Rc::Small(if *d < 0 { -a } else { a }),
                    None => Pricer::Big(z.iter().map(|&v| BigInt::from(v)).collect(), BigInt::from(*d))
                        .reduced(col, cost, row_sign),
                }
            }
            Pricer::Big(z, d) => {
                let mut acc = d * cost;
                for &(r, v) in col {
                    acc -= &z[r] * (v * row_sign[r]);
                }
                Rc::Big(if d.is_negative() { -acc } else { acc })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Rc {
    Small(i128),
    Big(BigInt),
}

impl Rc {
    fn is_negative(&self) -> bool {
        match self {
            Rc::Small(v) => *v < 0,
            Rc::Big(v) => v.is_negative(),
        }
    }
}

/// Runs simplex iterations; returns false if the phase is unbounded.
fn run_phase(t: &mut Tableau, src: &dyn ColumnSource, phase: Phase, opts: &LpOptions) -> Result<bool> {
    let cost = |v: Var| -> i64 {
        match (phase, v) {
            (Phase::One, Var::Art(_)) => 1,
            (Phase::One, Var::Col(_)) => 0,
            (Phase::Two, Var::Col(j)) => src.cost(j),
            (Phase::Two, Var::Art(_)) => 0,
        }
    };
    let mut degenerate = 0usize;
    let mut col = Vec::new();
    for iter in 0..opts.max_iterations {
        if iter % 1000 == 0 {
            log::trace!("simplex iteration {iter}, degenerate run {degenerate}");
        }
        if phase == Phase::One
            && t.basis.iter().zip(t.beta()).all(|(v, b)| matches!(v, Var::Col(_)) || b.is_zero())
        {
            // Already feasible; further degenerate pivots cannot help.
            return Ok(true);
        }
        let z = dual_numerators(t, &cost);
        let pricer = Pricer::new(&z, &t.d);
        let bland = degenerate >= opts.degenerate_limit;
        let in_basis: std::collections::HashSet<usize> = t
            .basis
            .iter()
            .filter_map(|v| if let Var::Col(j) = v { Some(*j) } else { None })
            .collect();
        let entering = choose_entering(src, &z, &pricer, &t.row_sign, phase, bland, &in_basis);
        let Some(j) = entering else {
            return Ok(true);
        };
        src.column(j, &mut col);
        let u = t.times(&col);
        let beta = t.beta();
        // Ratio test over rows with u_i / D > 0.
        let mut best: Option<usize> = None;
        for i in 0..t.m {
            if u[i].is_zero() || u[i].is_negative() != t.d.is_negative() {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(k) => {
                    // Compare beta_i / u_i with beta_k / u_k (both denominators
                    // share the sign of D).
                    let lhs = &beta[i] * &u[k];
                    let rhs = &beta[k] * &u[i];
                    let ord = if (&u[i] * &u[k]).is_negative() { rhs.cmp(&lhs) } else { lhs.cmp(&rhs) };
                    match ord {
                        std::cmp::Ordering::Less => Some(i),
                        std::cmp::Ordering::Greater => Some(k),
                        std::cmp::Ordering::Equal if bland => Some(if t.basis[i] < t.basis[k] { i } else { k }),
                        std::cmp::Ordering::Equal => Some(if t.lex_less(i, k, &u) { i } else { k }),
                    }
                }
            };
        }
        let Some(r) = best else {
            return Ok(false);
        };
        if beta[r].is_zero() {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        t.pivot(r, &u, Var::Col(j));
    }
    Err(Error::BudgetExceeded { what: "simplex iterations".into(), partial: opts.max_iterations })
}

/// Pricing runs in floating point on `y = z / D`; only the chosen column,
/// and columns whose float reduced cost is within rounding of zero, are
/// priced exactly. A column is never entered unless its exact reduced cost
/// is negative, and optimality is only declared after every column passes
/// the float filter or an exact check.
fn choose_entering(
    src: &dyn ColumnSource,
    z: &[BigInt],
    pricer: &Pricer,
    row_sign: &[i64],
    phase: Phase,
    bland: bool,
    in_basis: &std::collections::HashSet<usize>,
) -> Option<usize> {
    let cost = |j: usize| if phase == Phase::One { 0 } else { src.cost(j) };
    let d = match pricer {
        Pricer::Small(_, d) => BigInt::from(*d),
        Pricer::Big(_, d) => d.clone(),
    };
    let y: Vec<f64> = z
        .iter()
        .zip(row_sign)
        .map(|(v, &s)| crate::number::rational_to_f64(&Rational::new(v.clone(), d.clone())) * s as f64)
        .collect();
    // Float reduced cost and a bound on its rounding error.
    let approx = |j: usize, col: &mut Vec<(usize, i64)>| -> (f64, f64) {
        src.column(j, col);
        let c = cost(j) as f64;
        let mut rc = c;
        let mut scale = 1.0 + c.abs();
        for &(r, v) in col.iter() {
            let t = y[r] * v as f64;
            rc -= t;
            scale += t.abs();
        }
        (rc, 1e-9 * scale)
    };
    let exact_negative = |j: usize, col: &mut Vec<(usize, i64)>| -> bool {
        src.column(j, col);
        pricer.reduced(col, cost(j), row_sign).is_negative()
    };
    if !bland {
        const CHUNK: usize = 4096;
        let nchunks = src.len().div_ceil(CHUNK);
        let best = (0..nchunks)
            .into_par_iter()
            .filter_map(|c| {
                let mut col = Vec::new();
                let mut best: Option<(f64, usize)> = None;
                for j in c * CHUNK..((c + 1) * CHUNK).min(src.len()) {
                    if in_basis.contains(&j) {
                        continue;
                    }
                    let (rc, tol) = approx(j, &mut col);
                    if rc < -tol && best.is_none_or(|(b, _)| rc < b) {
                        best = Some((rc, j));
                    }
                }
                best
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((_, j)) = best {
            if exact_negative(j, &mut Vec::new()) {
                return Some(j);
            }
        }
    }
    // Smallest index with an exactly negative reduced cost.
    (0..src.len()).into_par_iter().find_first(|&j| {
        if in_basis.contains(&j) {
            return false;
        }
        let mut col = Vec::new();
        let (rc, tol) = approx(j, &mut col);
        rc < tol && exact_negative(j, &mut col)
    })
}

/// Replaces artificials that are basic at zero by real columns where
/// possible. Rows where that is impossible are redundant and keep their
/// artificial, which can then never leave zero.
fn drive_out_artificials(t: &mut Tableau, src: &dyn ColumnSource) {
    let mut col = Vec::new();
    for r in 0..t.m {
        if !matches!(t.basis[r], Var::Art(_)) {
            continue;
        }
        for j in 0..src.len() {
            if t.basis.contains(&Var::Col(j)) {
                continue;
            }
            src.column(j, &mut col);
            let ur: BigInt = col
                .iter()
                .fold(BigInt::zero(), |acc, &(k, v)| acc + &t.n[r][k] * (v * t.row_sign[k]));
            if !ur.is_zero() {
                let u = t.times(&col);
                t.pivot(r, &u, Var::Col(j));
                break;
            }
        }
    }
}

/// Clears denominators of a rational vector and divides by the gcd.
pub fn primitive_integers(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
    let ints: Vec<BigInt> = v.iter().map(|r| (r * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{int, rational};

    fn dense(rows: usize, cols: &[&[i64]], costs: &[i64]) -> SparseColumns {
        SparseColumns {
            rows,
            columns: cols
                .iter()
                .map(|c| c.iter().enumerate().filter(|(_, &v)| v != 0).map(|(i, &v)| (i, v)).collect())
                .collect(),
            costs: costs.to_vec(),
        }
    }

    #[test]
    fn small_optimum() {
        // min -x1 - x2 s.t. x1 + 2 x2 + s1 = 4, 3 x1 + x2 + s2 = 6.
        let src = dense(2, &[&[1, 3], &[2, 1], &[1, 0], &[0, 1]], &[-1, -1, 0, 0]);
        match solve(&src, &[4, 6], &LpOptions::default()).unwrap() {
            LpOutcome::Optimal { value, x, dual } => {
                assert_eq!(value, rational(-14, 5));
                assert_eq!(x, vec![(0, rational(8, 5)), (1, rational(6, 5))]);
                // Strong duality: y·b = value.
                assert_eq!(&dual[0] * int(4) + &dual[1] * int(6), value);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn infeasible_with_certificate() {
        // x1 + x2 = -1 with x ≥ 0.
        let src = dense(1, &[&[1], &[1]], &[0, 0]);
        match solve(&src, &[-1], &LpOptions::default()).unwrap() {
            LpOutcome::Infeasible { farkas } => {
                assert!(farkas[0] < int(0));
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn unbounded() {
        // min -x1 s.t. x1 - x2 = 1.
        let src = dense(1, &[&[1], &[-1]], &[-1, 0]);
        assert_eq!(solve(&src, &[1], &LpOptions::default()).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows() {
        // Two copies of x1 + x2 = 1; min x1.
        let src = dense(2, &[&[1, 1], &[1, 1]], &[1, 0]);
        match solve(&src, &[1, 1], &LpOptions::default()).unwrap() {
            LpOutcome::Optimal { value, x, .. } => {
                assert_eq!(value, int(0));
                assert_eq!(x, vec![(1, int(1))]);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's cycling instance, rows and costs scaled to integers.
        let src = SparseColumns {
            rows: 3,
            columns: vec![
                vec![(0, 1), (1, 1)],
                vec![(0, -32), (1, -24)],
                vec![(0, -4), (1, -1), (2, 1)],
                vec![(0, 36), (1, 6)],
                vec![(0, 1)],
                vec![(1, 1)],
                vec![(2, 1)],
            ],
            costs: vec![-3, 80, -2, 24, 0, 0, 0],
        };
        match solve(&src, &[0, 0, 1], &LpOptions::default()).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(-5)),
            o => panic!("{o:?}"),
        }
    }
}
