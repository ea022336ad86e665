//! Facet certification against a vertex stream.
//!
//! An inequality is a facet iff every vertex satisfies it and the saturating
//! vertices contain `d` affinely independent points. Saturating vertices are
//! collected in a modular rank structure (independence modulo a prime
//! implies independence over the rationals); the selected witnesses are then
//! re-checked with exact integer arithmetic.

use serde::{Deserialize, Serialize};

use super::rank::{exact_rank, ModBasis};
use super::Inequality;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetCertificate {
    pub inequality: Inequality,
    /// Positions of the witnesses in the vertex stream.
    pub vertex_ids: Vec<usize>,
    /// Block indices of the witnesses.
    pub vertices: Vec<Vec<u32>>,
    /// Exact rank of the homogenized witnesses.
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum FacetVerdict {
    Facet(FacetCertificate),
    Violated { vertex_id: usize, vertex: Vec<u32>, value: i64 },
    RankDeficient { rank: usize, saturating: usize },
}

impl FacetVerdict {
    pub fn certificate(&self) -> Option<&FacetCertificate> {
        match self {
            Self::Facet(c) => Some(c),
            _ => None,
        }
    }
}

/// Streams once over `vertices` (block-index records).
pub fn verify_facet(ineq: &Inequality, vertices: impl IntoIterator<Item = Result<Vec<u32>>>) -> Result<FacetVerdict> {
    let s = &ineq.scenario;
    let d = s.dimension();
    let mut basis = ModBasis::new(d + 1);
    let mut witnesses: Vec<(usize, Vec<u32>)> = Vec::with_capacity(d);
    let mut saturating = 0usize;
    for (id, rec) in vertices.into_iter().enumerate() {
        let digits = rec?;
        if digits.len() != s.num_inputs() {
            return Err(Error::DimensionMismatch("vertex record does not match the inequality's scenario".into()));
        }
        let value = ineq.evaluate_blocks(&digits);
        if value < 0 {
            return Ok(FacetVerdict::Violated { vertex_id: id, vertex: digits, value });
        }
        if value == 0 {
            saturating += 1;
            if witnesses.len() < d && basis.insert_ones(&homogenized_ones(ineq, &digits)) {
                witnesses.push((id, digits));
            }
        }
    }
    if witnesses.len() < d {
        return Ok(FacetVerdict::RankDeficient { rank: witnesses.len(), saturating });
    }
    let cert = FacetCertificate {
        inequality: ineq.clone(),
        vertex_ids: witnesses.iter().map(|w| w.0).collect(),
        vertices: witnesses.into_iter().map(|w| w.1).collect(),
        rank: d,
    };
    if !check_certificate(&cert) {
        // Cannot happen: modular independence implies exact independence.
        return Err(Error::InvalidArgument("facet witnesses failed exact re-verification".into()));
    }
    Ok(FacetVerdict::Facet(cert))
}

fn homogenized_ones(ineq: &Inequality, digits: &[u32]) -> Vec<usize> {
    let s = &ineq.scenario;
    std::iter::once(0)
        .chain(
            digits
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(xi, &a)| 1 + s.coord_offset(xi) + a as usize - 1),
        )
        .collect()
}

/// Exact check of the witnesses: each saturates the inequality and together
/// they have rank `d` once homogenized. Validity on the remaining vertices is
/// not part of the certificate.
pub fn check_certificate(cert: &FacetCertificate) -> bool {
    let ineq = &cert.inequality;
    let s = &ineq.scenario;
    let d = s.dimension();
    if cert.vertices.len() != d || cert.rank != d {
        return false;
    }
    let mut rows = Vec::with_capacity(d);
    for v in &cert.vertices {
        if v.len() != s.num_inputs() || v.iter().enumerate().any(|(xi, &a)| a as usize >= s.block_size(xi)) {
            return false;
        }
        if ineq.evaluate_blocks(v) != 0 {
            return false;
        }
        let mut row = vec![0i64; d + 1];
        for i in homogenized_ones(ineq, v) {
            row[i] = 1;
        }
        rows.push(row);
    }
    exact_rank(&rows) == d
}
