//! Tensor-factor bookkeeping for `A₁^I A₁^O A₂^I A₂^O …` and the linear
//! maps built from partial traces.

use serde::{Deserialize, Serialize};

use super::operator::Operator;
use crate::error::{Error, Result};

/// Input and output dimensions of each party's laboratory.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartySpaces {
    dims: Vec<(usize, usize)>,
}

/// Extra linear constraint on the process matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderConstraint {
    #[default]
    Free,
    /// The last party cannot signal to the others: `W = 1/d ⊗ tr_{last O} W`.
    LastAfterOthers,
}

impl std::str::FromStr for OrderConstraint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "free" => Ok(Self::Free),
            "abc" | "ab<c" | "last" => Ok(Self::LastAfterOthers),
            _ => Err(Error::InvalidArgument(format!("unknown order constraint `{s}`"))),
        }
    }
}

impl PartySpaces {
    pub fn new(dims: Vec<(usize, usize)>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("at least one party is required".into()));
        }
        if dims.iter().any(|&(i, o)| i == 0 || o == 0) {
            return Err(Error::InvalidArgument("dimensions must be at least 1".into()));
        }
        let total = dims.iter().try_fold(1usize, |acc, &(i, o)| acc.checked_mul(i * o));
        if total.map_or(true, |t| t > 1 << 12) {
            return Err(Error::InvalidArgument("total dimension above 4096 is not supported".into()));
        }
        Ok(Self { dims })
    }

    /// Every input and output space of dimension `d`.
    pub fn uniform(parties: usize, d: usize) -> Result<Self> {
        Self::new(vec![(d, d); parties])
    }

    pub fn qubits(parties: usize) -> Self {
        Self::uniform(parties, 2).expect("qubit spaces are small")
    }

    pub fn num_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn input_dim(&self, k: usize) -> usize {
        self.dims[k].0
    }

    pub fn output_dim(&self, k: usize) -> usize {
        self.dims[k].1
    }

    /// Dimension of `A_k^I ⊗ A_k^O`.
    pub fn block_dim(&self, k: usize) -> usize {
        self.dims[k].0 * self.dims[k].1
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().map(|&(i, o)| i * o).product()
    }

    /// `Π_k d_{A_k^O}`, the trace of a valid process matrix.
    pub fn output_product(&self) -> usize {
        self.dims.iter().map(|&(_, o)| o).product()
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        self.dims.iter().flat_map(|&(i, o)| [i, o]).collect()
    }

    pub fn factor_labels(&self) -> Vec<String> {
        (0..self.dims.len())
            .flat_map(|k| {
                let name = party_name(k);
                [format!("{name}^I"), format!("{name}^O")]
            })
            .collect()
    }

    /// `(outer, d, inner)` around the factor span `[first, last]`.
    fn layout(&self, first: usize, last: usize) -> (usize, usize, usize) {
        let f = self.factor_dims();
        let outer = f[..first].iter().product();
        let d = f[first..=last].iter().product();
        let inner = f[last + 1..].iter().product();
        (outer, d, inner)
    }

    /// Stride of party `k`'s block index inside a global index.
    pub fn party_stride(&self, k: usize) -> usize {
        self.dims[k + 1..].iter().map(|&(i, o)| i * o).product()
    }

    fn trace_replace_span(&self, w: &Operator, first: usize, last: usize) -> Operator {
        let (outer, d, inner) = self.layout(first, last);
        let r = partial_trace_raw(w, outer, d, inner);
        let mut out = insert_identity_raw(&r, outer, d, inner);
        out.scale(1.0 / d as f64);
        out
    }

    /// `tr_f(W) ⊗ 1_f / d_f` for tensor factor `f`.
    pub fn trace_replace(&self, w: &Operator, f: usize) -> Operator {
        self.trace_replace_span(w, f, f)
    }

    /// Trace over tensor factor `f`.
    pub fn partial_trace(&self, w: &Operator, f: usize) -> Operator {
        let (outer, d, inner) = self.layout(f, f);
        partial_trace_raw(w, outer, d, inner)
    }

    /// Orthogonal projection onto the linear span of valid process matrices.
    ///
    /// Removes every component that is nontrivial on the outputs of some
    /// nonempty set of parties while acting as the identity on all inputs
    /// and outputs of the remaining parties. With `a_k` the trace-and-replace
    /// map on party `k`'s whole laboratory and `b_k = 1 − T_{O_k}`, the sum
    /// of those components over all nonempty sets is
    /// `Π_k (a_k + b_k) − Π_k a_k`, since `a_k b_k = 0`.
    pub fn valid_projection(&self, w: &Operator) -> Operator {
        let n = self.num_parties();
        let mut all = w.clone();
        let mut trivial = w.clone();
        for k in 0..n {
            let lab = self.trace_replace_span(&all, 2 * k, 2 * k + 1);
            let out = self.trace_replace(&all, 2 * k + 1);
            all -= &out;
            all += &lab;
            trivial = self.trace_replace_span(&trivial, 2 * k, 2 * k + 1);
        }
        let mut p = w - &all;
        p += &trivial;
        p
    }

    /// Projection enforcing the order constraint (identity for `Free`).
    pub fn order_projection(&self, w: &Operator, order: OrderConstraint) -> Operator {
        match order {
            OrderConstraint::Free => w.clone(),
            OrderConstraint::LastAfterOthers => self.trace_replace(w, 2 * self.num_parties() - 1),
        }
    }

    /// Orthogonal projection onto `{W : W in the valid span (and order
    /// subspace), tr W = Π d_O}`.
    pub fn affine_projection(&self, w: &Operator, order: OrderConstraint) -> Operator {
        let mut p = self.valid_projection(&self.order_projection(w, order));
        let n = self.total_dim() as f64;
        let shift = (self.output_product() as f64 - p.trace().re) / n;
        for i in 0..p.dim() {
            let v = p.get(i, i) + shift;
            p.set(i, i, v);
        }
        p
    }

    /// `1 / Π d_I`, the maximally mixed valid process.
    pub fn maximally_mixed(&self) -> Operator {
        let n = self.total_dim();
        let mut w = Operator::identity(n);
        w.scale(self.output_product() as f64 / n as f64);
        w
    }
}

pub(crate) fn party_name(k: usize) -> String {
    if k < 26 {
        ((b'A' + k as u8) as char).to_string()
    } else {
        format!("P{k}")
    }
}

/// Partial trace of the middle factor of `outer ⊗ d ⊗ inner`.
pub fn partial_trace_raw(w: &Operator, outer: usize, d: usize, inner: usize) -> Operator {
    let m = outer * inner;
    let n = w.dim();
    debug_assert_eq!(n, outer * d * inner);
    let src = w.data();
    let mut out = Operator::zeros(m);
    let dst = out.data_mut();
    for h in 0..outer {
        for l in 0..inner {
            let row = h * inner + l;
            for k in 0..d {
                let r = (h * d + k) * inner + l;
                let src_row = &src[r * n..(r + 1) * n];
                for h2 in 0..outer {
                    let base = (h2 * d + k) * inner;
                    let drow = &mut dst[row * m + h2 * inner..row * m + (h2 + 1) * inner];
                    for (o, s) in drow.iter_mut().zip(&src_row[base..base + inner]) {
                        *o += s;
                    }
                }
            }
        }
    }
    out
}

/// `R ↦ R` with an identity on a middle factor of dimension `d` inserted.
pub fn insert_identity_raw(r: &Operator, outer: usize, d: usize, inner: usize) -> Operator {
    let m = r.dim();
    debug_assert_eq!(m, outer * inner);
    let n = m * d;
    let mut out = Operator::zeros(n);
    let src = r.data();
    let dst = out.data_mut();
    for h in 0..outer {
        for l in 0..inner {
            let row = h * inner + l;
            for k in 0..d {
                let r_out = (h * d + k) * inner + l;
                for h2 in 0..outer {
                    let c_out = (h2 * d + k) * inner;
                    dst[r_out * n + c_out..r_out * n + c_out + inner]
                        .copy_from_slice(&src[row * m + h2 * inner..row * m + (h2 + 1) * inner]);
                }
            }
        }
    }
    out
}

/// `R ⊗ 1_d / d` with the identity as the last factor.
pub fn append_maximally_mixed(r: &Operator, d: usize) -> Operator {
    let mut out = insert_identity_raw(r, r.dim(), d, 1);
    out.scale(1.0 / d as f64);
    out
}

/// Relabels parties: party `k` of the result is party `perm[k]` of `w`.
pub fn permute_parties(spaces: &PartySpaces, w: &Operator, perm: &[usize]) -> Result<(PartySpaces, Operator)> {
    let np = spaces.num_parties();
    let mut seen = vec![false; np];
    if perm.len() != np || perm.iter().any(|&p| p >= np || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of {np} parties")));
    }
    let new = PartySpaces::new(perm.iter().map(|&p| spaces.dims[p]).collect())?;
    let n = spaces.total_dim();
    // Global index in `new` -> global index in `spaces`.
    let map: Vec<usize> = (0..n)
        .map(|i| {
            let mut old = 0;
            for (k, &p) in perm.iter().enumerate() {
                let digit = (i / new.party_stride(k)) % new.block_dim(k);
                old += digit * spaces.party_stride(p);
            }
            old
        })
        .collect();
    let out = Operator::from_fn(n, |i, j| w.get(map[i], map[j]));
    Ok((new, out))
}

/// Local unitary `U` on factor `f`, identity elsewhere, applied as
/// `U W U†`.
pub fn conjugate_factor(spaces: &PartySpaces, w: &Operator, f: usize, u: &Operator) -> Operator {
    let dims = spaces.factor_dims();
    let ops: Vec<Operator> = dims
        .iter()
        .enumerate()
        .map(|(g, &d)| if g == f { u.clone() } else { Operator::identity(d) })
        .collect();
    let full = Operator::kron_all(&ops);
    full.matmul(w).matmul(&full.dagger())
}
