//! Dense complex square matrices and the handful of operations the
//! process-matrix code needs.

use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::diag::Diag;
use faer::{Mat, Par};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_data(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!("{} entries for a {dim}x{dim} matrix", data.len())));
        }
        Ok(Self { dim, data })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = C64::new(v, 0.0);
        }
        m
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self.get(i, j);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out.data[(i * m + k) * n * m + j * m + l] = a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn kron_all<'a>(ops: impl IntoIterator<Item = &'a Operator>) -> Self {
        ops.into_iter().fold(Self::identity(1), |acc, o| acc.kron(o))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                e = e.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        e
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Re tr(A† B)`, the real Hilbert-Schmidt inner product.
    pub fn inner(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j).norm() <= tol))
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    fn to_faer(&self) -> Mat<C64> {
        Mat::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Sequential decomposition: these matrices are small and restarts
    /// already run in parallel.
    fn evd(&self, vectors: bool) -> (Vec<f64>, Option<Mat<C64>>) {
        let n = self.dim;
        if n == 0 {
            return (Vec::new(), vectors.then(|| Mat::zeros(0, 0)));
        }
        let a = self.to_faer();
        let mut s = Diag::<C64>::zeros(n);
        let mut u = vectors.then(|| Mat::<C64>::zeros(n, n));
        let compute = if vectors { ComputeEigenvectors::Yes } else { ComputeEigenvectors::No };
        let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<C64>(n, compute, Par::Seq, Default::default()));
        evd::self_adjoint_evd(
            a.as_ref(),
            s.as_mut(),
            u.as_mut().map(|u| u.as_mut()),
            Par::Seq,
            MemStack::new(&mut buf),
            Default::default(),
        )
        .expect("Hermitian eigendecomposition converges");
        let vals = s.column_vector().iter().map(|z| z.re).collect();
        (vals, u)
    }

    /// Eigenvalues (ascending) and eigenvectors (columns), reading the
    /// lower triangle.
    pub fn eigh(&self) -> (Vec<f64>, Mat<C64>) {
        let (v, u) = self.evd(true);
        (v, u.expect("vectors requested"))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.evd(false).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Nearest positive semidefinite matrix in Frobenius norm.
    pub fn psd_projection(&self) -> Self {
        let (vals, u) = self.eigh();
        let keep: Vec<usize> = (0..self.dim).filter(|&i| vals[i] > 0.0).collect();
        if keep.len() == self.dim {
            return self.hermitian_part();
        }
        if keep.is_empty() {
            return Self::zeros(self.dim);
        }
        let v = Mat::from_fn(self.dim, keep.len(), |i, c| u[(i, keep[c])] * vals[keep[c]].sqrt());
        let p = &v * v.adjoint();
        Self::from_fn(self.dim, |i, j| p[(i, j)])
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&Operator> for Operator {
    fn add_assign(&mut self, rhs: &Operator) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&Operator> for Operator {
    fn sub_assign(&mut self, rhs: &Operator) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, s: f64) -> Operator {
        let mut out = self.clone();
        out.scale(s);
        out
    }
}

/// Parses a product of single-qubit factors such as `Z1(1-Z)Z`.
///
/// Tokens are `1`, `X`, `Y`, `Z`, `(1+Z)` and `(1-Z)`; factors are
/// tensored left to right.
pub fn pauli_product(spec: &str) -> Result<Operator> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let mut factors = Vec::new();
    let mut rest = spec.trim();
    while !rest.is_empty() {
        let (tok, tail) = if let Some(r) = rest.strip_prefix("(1+Z)") {
            (Operator::diagonal(&[2.0, 0.0]), r)
        } else if let Some(r) = rest.strip_prefix("(1-Z)") {
            (Operator::diagonal(&[0.0, 2.0]), r)
        } else {
            let c = rest.chars().next().expect("nonempty");
            let op = match c {
                '1' => Operator::identity(2),
                'Z' => Operator::diagonal(&[1.0, -1.0]),
                'X' => Operator::from_data(2, vec![zero, one, one, zero])?,
                'Y' => Operator::from_data(2, vec![zero, -i, i, zero])?,
                _ => return Err(Error::Format(format!("bad factor `{c}` in `{spec}`"))),
            };
            (op, &rest[c.len_utf8()..])
        };
        factors.push(tok);
        rest = tail.trim_start();
    }
    Ok(Operator::kron_all(&factors))
}

/// JSON form: tensor-factor dimensions and labels plus row-major entries as
/// `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorFile {
    pub dims: Vec<usize>,
    pub labels: Vec<String>,
    pub entries: Vec<[f64; 2]>,
}

impl OperatorFile {
    pub fn new(op: &Operator, dims: Vec<usize>, labels: Vec<String>) -> Self {
        Self { dims, labels, entries: op.data.iter().map(|c| [c.re, c.im]).collect() }
    }

    pub fn to_operator(&self) -> Result<Operator> {
        let dim: usize = self.dims.iter().product();
        if self.labels.len() != self.dims.len() {
            return Err(Error::Format("one label per tensor factor expected".into()));
        }
        Operator::from_data(dim, self.entries.iter().map(|&[re, im]| C64::new(re, im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_and_trace() {
        let z = pauli_product("Z").unwrap();
        let zz = pauli_product("ZZ").unwrap();
        assert_eq!(z.kron(&z), zz);
        assert_eq!(zz.trace(), C64::new(0.0, 0.0));
        assert_eq!(pauli_product("(1+Z)(1-Z)").unwrap().get(1, 1), C64::new(4.0, 0.0));
        assert!(pauli_product("Q").is_err());
    }

    #[test]
    fn psd_projection_clips_negative_part() {
        let m = Operator::diagonal(&[2.0, -1.0, 0.5]);
        let p = m.psd_projection();
        assert!((&p - &Operator::diagonal(&[2.0, 0.0, 0.5])).max_abs() < 1e-12);
        let x = pauli_product("X").unwrap();
        assert!((x.min_eigenvalue() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn file_round_trip() {
        let y = pauli_product("Y1").unwrap();
        let f = OperatorFile::new(&y, vec![2, 2], vec!["a".into(), "b".into()]);
        let text = serde_json::to_string(&f).unwrap();
        let back: OperatorFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_operator().unwrap(), y);
    }
}
