//! Membership in the convex hull of a vertex set, decided by exact LP.
//!
//! A point `p` is causal iff `Σ λ_v v̂ = p̂` has a solution `λ ≥ 0`, where
//! `v̂ = (1, v)` are the homogenized vertices. If it has none, the LP
//!
//! ```text
//!   max μ   s.t.  Σ λ_v v̂ + μ ĉ = p̂,  λ ≥ 0,  ĉ = Σ_v v̂
//! ```
//!
//! is solved instead. Its optimal dual `y` satisfies `y·v̂ ≥ 0` on every
//! vertex, `y·ĉ = 1` and `y·p̂ = μ < 0`; a basic dual solution of that
//! normalized cone section is an extreme ray, so for a full-dimensional
//! vertex set the certificate is a facet.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::Correlation;
use crate::error::{Error, Result};
use crate::geometry::{parametrize, Inequality};
use crate::lp::{self, ColumnSource, LpOptions, LpOutcome};
use crate::number::Rational;
use crate::strategy::VertexSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    /// Convex weights `(vertex id, weight)`, zero weights omitted.
    Causal {
        #[serde(with = "crate::number::serde_weights")]
        weights: Vec<(usize, Rational)>,
    },
    /// `separating` is nonnegative on every vertex; `value` is its
    /// (negative) value at the point.
    NonCausal {
        separating: Inequality,
        #[serde(with = "crate::number::serde_rational")]
        value: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipResult {
    pub verdict: Verdict,
    /// Set when the input had floating-point entries and was rationalized.
    pub approximate: bool,
}

impl MembershipResult {
    pub fn is_causal(&self) -> bool {
        matches!(self.verdict, Verdict::Causal { .. })
    }

    pub fn separating(&self) -> Option<&Inequality> {
        match &self.verdict {
            Verdict::NonCausal { separating, .. } => Some(separating),
            Verdict::Causal { .. } => None,
        }
    }
}

/// Vertex columns `(1, v)` plus two columns `±ĉ` for the free variable μ.
struct VertexColumns<'a> {
    dim: usize,
    offsets: Vec<usize>,
    /// Block index of every vertex, row-major.
    digits: Vec<u16>,
    count: usize,
    centroid: Option<Vec<i64>>,
    _vertices: &'a VertexSet,
}

impl<'a> VertexColumns<'a> {
    fn new(vertices: &'a VertexSet, with_mu: bool) -> Self {
        let s = vertices.scenario();
        let w = s.num_inputs();
        let mut digits = vec![0u16; vertices.len() * w];
        digits.par_chunks_mut(w.max(1)).enumerate().for_each_init(
            || vec![0u32; w],
            |buf, (i, out)| {
                if i < vertices.len() {
                    vertices.decode_into(i, buf);
                    for (o, &b) in out.iter_mut().zip(buf.iter()) {
                        *o = b as u16;
                    }
                }
            },
        );
        let offsets = (0..w).map(|xi| s.coord_offset(xi)).collect();
        let mut cols = Self {
            dim: s.dimension(),
            offsets,
            digits,
            count: vertices.len(),
            centroid: None,
            _vertices: vertices,
        };
        if with_mu {
            let mut c = vec![0i64; cols.dim + 1];
            let mut col = Vec::new();
            for j in 0..cols.count {
                cols.column(j, &mut col);
                for &(r, v) in &col {
                    c[r] += v;
                }
            }
            cols.centroid = Some(c);
        }
        cols
    }
}

impl ColumnSource for VertexColumns<'_> {
    fn rows(&self) -> usize {
        self.dim + 1
    }

    fn len(&self) -> usize {
        self.count + if self.centroid.is_some() { 2 } else { 0 }
    }

    fn column(&self, j: usize, out: &mut Vec<(usize, i64)>) {
        out.clear();
        if j < self.count {
            out.push((0, 1));
            let w = self.offsets.len();
            for (xi, &d) in self.digits[j * w..(j + 1) * w].iter().enumerate() {
                if d > 0 {
                    out.push((1 + self.offsets[xi] + d as usize - 1, 1));
                }
            }
        } else {
            let sign = if j == self.count { 1 } else { -1 };
            let c = self.centroid.as_ref().expect("μ columns present");
            out.extend(c.iter().enumerate().filter(|(_, &v)| v != 0).map(|(r, &v)| (r, sign * v)));
        }
    }

    fn cost(&self, j: usize) -> i64 {
        if j < self.count {
            0
        } else if j == self.count {
            -1
        } else {
            1
        }
    }
}

/// Homogenized point scaled to integers, and the scale.
fn scaled_point(corr: &Correlation) -> Result<(Vec<i64>, BigInt)> {
    let p = parametrize(corr);
    let lcm = p.coords.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let mut b = Vec::with_capacity(p.coords.len() + 1);
    b.push(lcm.to_i64().ok_or_else(|| Error::Overflow("common denominator exceeds i64".into()))?);
    for c in &p.coords {
        let v = (c * Rational::from_integer(lcm.clone())).to_integer();
        b.push(v.to_i64().ok_or_else(|| Error::Overflow("scaled coordinate exceeds i64".into()))?);
    }
    Ok((b, lcm))
}

fn check_scenario(corr: &Correlation, vertices: &VertexSet) -> Result<()> {
    if corr.scenario() != vertices.scenario() {
        return Err(Error::ScenarioMismatch("correlation and vertex set differ in scenario".into()));
    }
    Ok(())
}

/// Decides whether `corr` lies in the convex hull of `vertices`.
pub fn is_causal(corr: &Correlation, vertices: &VertexSet) -> Result<MembershipResult> {
    check_scenario(corr, vertices)?;
    let result = if corr.scenario().num_parties() == 1 && vertices.len() as u128 == corr.scenario().strategy_space_size().unwrap_or(0) {
        single_party(corr, vertices)
    } else {
        hull_membership(corr, vertices)?
    };
    debug_assert!(verify_membership(&result, corr, vertices), "membership certificate failed re-verification");
    Ok(result)
}

/// Membership in the hull of the fixed-order vertices of `vertices`.
///
/// Vertex ids in the result refer to positions in the fixed-order subset.
pub fn is_mixture_of_fixed_order(corr: &Correlation, vertices: &VertexSet) -> Result<MembershipResult> {
    check_scenario(corr, vertices)?;
    let fixed = vertices.fixed_order_subset();
    let result = hull_membership(corr, &fixed)?;
    debug_assert!(verify_membership(&result, corr, &fixed), "membership certificate failed re-verification");
    Ok(result)
}

/// Rationalizes a floating-point correlation (denominators at most
/// `max_den`) and tests it; the verdict is flagged approximate.
pub fn is_causal_approx(corr: &Correlation<f64>, vertices: &VertexSet, max_den: u64) -> Result<MembershipResult> {
    let exact = corr.rationalize(max_den)?;
    let mut r = is_causal(&exact, vertices)?;
    r.approximate = true;
    Ok(r)
}

/// With one party every correlation is a product of its per-input
/// distributions, so the weights are written down directly.
fn single_party(corr: &Correlation, vertices: &VertexSet) -> MembershipResult {
    let s = corr.scenario();
    let mut digits = vec![0u32; s.num_inputs()];
    let mut weights = Vec::new();
    for i in 0..vertices.len() {
        vertices.decode_into(i, &mut digits);
        let w = digits
            .iter()
            .enumerate()
            .fold(Rational::one(), |acc, (xi, &d)| acc * &corr.block(xi)[d as usize]);
        if !w.is_zero() {
            weights.push((i, w));
        }
    }
    MembershipResult { verdict: Verdict::Causal { weights }, approximate: false }
}

fn hull_membership(corr: &Correlation, vertices: &VertexSet) -> Result<MembershipResult> {
    let (b, scale) = scaled_point(corr)?;
    let opts = LpOptions::default();
    let cols = VertexColumns::new(vertices, false);
    match lp::solve(&cols, &b, &opts)? {
        LpOutcome::Optimal { x, .. } => {
            let weights = x.into_iter().map(|(j, v)| (j, v / Rational::from_integer(scale.clone()))).collect();
            return Ok(MembershipResult { verdict: Verdict::Causal { weights }, approximate: false });
        }
        LpOutcome::Infeasible { .. } => {}
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
    let cols = VertexColumns::new(vertices, true);
    let y = match lp::solve(&cols, &b, &opts)? {
        LpOutcome::Optimal { dual, .. } => dual,
        LpOutcome::Infeasible { .. } => return Err(Error::Infeasible),
        LpOutcome::Unbounded => return Err(Error::Unbounded),
    };
    // Reduced costs c_j - y·a_j ≥ 0 with c_j = 0 on vertices give y·v̂ ≤ 0;
    // the separating functional is -y.
    let neg: Vec<Rational> = y.iter().map(|v| -v).collect();
    let ints = lp::primitive_integers(&neg);
    let to_i64 = |v: &BigInt| v.to_i64().ok_or_else(|| Error::Overflow("separating inequality exceeds i64".into()));
    let constant = to_i64(&ints[0])?;
    let coeffs = ints[1..].iter().map(to_i64).collect::<Result<Vec<_>>>()?;
    let separating = Inequality::new(corr.scenario().clone(), coeffs, constant)?;
    let value = separating.evaluate(corr)?;
    if !value.is_negative() {
        return Err(Error::InvalidArgument("dual certificate does not separate the point".into()));
    }
    Ok(MembershipResult { verdict: Verdict::NonCausal { separating, value }, approximate: false })
}

/// Re-checks a membership certificate by direct arithmetic.
pub fn verify_membership(result: &MembershipResult, corr: &Correlation, vertices: &VertexSet) -> bool {
    match &result.verdict {
        Verdict::Causal { weights } => {
            let s = corr.scenario();
            let mut total = Rational::zero();
            let mut point = vec![Rational::zero(); s.dimension()];
            for (id, w) in weights {
                if *id >= vertices.len() || w.is_negative() {
                    return false;
                }
                total += w;
                for c in vertices.ones(*id) {
                    point[c] += w;
                }
            }
            total.is_one() && point == parametrize(corr).coords
        }
        Verdict::NonCausal { separating, value } => {
            let ok_value = separating.evaluate(corr).map(|v| v == *value && v.is_negative()).unwrap_or(false);
            ok_value
                && (0..vertices.len())
                    .into_par_iter()
                    .map_init(|| vec![0u32; vertices.scenario().num_inputs()], |buf, i| {
                        vertices.decode_into(i, buf);
                        separating.evaluate_blocks(buf) >= 0
                    })
                    .all(|ok| ok)
        }
    }
}

/// Minimum of an inequality over a vertex set and a vertex attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalBound {
    pub value: i64,
    pub vertex_id: usize,
    pub vertex: Vec<u32>,
}

pub fn causal_bound(ineq: &Inequality, vertices: &VertexSet) -> Result<CausalBound> {
    if &ineq.scenario != vertices.scenario() {
        return Err(Error::ScenarioMismatch("inequality and vertex set differ in scenario".into()));
    }
    let w = vertices.scenario().num_inputs();
    let best = (0..vertices.len())
        .into_par_iter()
        .map_init(
            || vec![0u32; w],
            |buf, i| {
                vertices.decode_into(i, buf);
                (ineq.evaluate_blocks(buf), i)
            },
        )
        .min()
        .ok_or_else(|| Error::InvalidArgument("empty vertex set".into()))?;
    Ok(CausalBound { value: best.0, vertex_id: best.1, vertex: vertices.block_indices(best.1) })
}

/// As [`causal_bound`] over a stream of block-index records.
pub fn causal_bound_stream(ineq: &Inequality, records: impl IntoIterator<Item = Result<Vec<u32>>>) -> Result<CausalBound> {
    let mut best: Option<CausalBound> = None;
    for (id, rec) in records.into_iter().enumerate() {
        let digits = rec?;
        if digits.len() != ineq.scenario.num_inputs() {
            return Err(Error::DimensionMismatch("vertex record does not match the inequality's scenario".into()));
        }
        let v = ineq.evaluate_blocks(&digits);
        if best.as_ref().is_none_or(|b| v < b.value) {
            best = Some(CausalBound { value: v, vertex_id: id, vertex: digits });
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("empty vertex stream".into()))
}

/// Value of the inequality expression at `corr`; negative means violation.
pub fn violation_margin<T: crate::number::Probability>(corr: &Correlation<T>, ineq: &Inequality) -> Result<T> {
    ineq.evaluate(corr)
}
