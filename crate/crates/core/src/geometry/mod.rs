//! Points, inequalities and exact polyhedral computations on the causal
//! polytope.
//!
//! A correlation is parametrized by the entries `P(a|x)` with `a` different
//! from the first output tuple, block by block in canonical order; the first
//! entry of every block is fixed by normalization.

pub mod dd;
pub mod facet;
pub mod rank;
pub mod symmetry;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::correlation::Correlation;
use crate::error::{Error, Result};
use crate::number::{Probability, Rational};
use crate::scenario::Scenario;
use crate::strategy::VertexSet;

pub use dd::{enumerate_facets, facets_of_points, vertices_of_inequalities, DdOptions, InsertionOrder};
pub use facet::{check_certificate, verify_facet, FacetCertificate, FacetVerdict};
pub use symmetry::{canonicalize, classify_facets, FacetClass, SymmetryGroup};

/// A correlation in the canonical parametrization.
#[derive(Clone, Debug, PartialEq)]
pub struct PointVector<T = Rational> {
    pub scenario: Scenario,
    pub coords: Vec<T>,
}

pub fn parametrize<T: Probability>(corr: &Correlation<T>) -> PointVector<T> {
    let s = corr.scenario();
    let mut coords = Vec::with_capacity(s.dimension());
    for xi in 0..s.num_inputs() {
        coords.extend(corr.block(xi)[1..].iter().cloned());
    }
    PointVector { scenario: s.clone(), coords }
}

pub fn deparametrize<T: Probability>(point: &PointVector<T>) -> Result<Correlation<T>> {
    let s = &point.scenario;
    if point.coords.len() != s.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "{} coordinates for dimension {}",
            point.coords.len(),
            s.dimension()
        )));
    }
    let mut table = Vec::with_capacity(s.num_entries());
    for xi in 0..s.num_inputs() {
        let off = s.coord_offset(xi);
        let rest = &point.coords[off..off + s.block_size(xi) - 1];
        let sum = rest.iter().cloned().fold(T::zero(), |a, b| a + b);
        table.push(T::one() - sum);
        table.extend(rest.iter().cloned());
    }
    Correlation::new(s.clone(), table)
}

/// Affine dimension of the convex hull of a vertex set.
///
/// The rank is accumulated modulo a large prime, which can only
/// underestimate; if it falls short of full dimension the exact rank is
/// recomputed over the integers.
pub fn polytope_dimension(vertices: &VertexSet) -> usize {
    let s = vertices.scenario();
    let d = s.dimension();
    if vertices.is_empty() {
        return 0;
    }
    let mut basis = rank::ModBasis::new(d + 1);
    for i in 0..vertices.len() {
        let ones: Vec<usize> = std::iter::once(0).chain(vertices.ones(i).into_iter().map(|c| c + 1)).collect();
        basis.insert_ones(&ones);
        if basis.rank() == d + 1 {
            return d;
        }
    }
    let points: Vec<Vec<i64>> = (0..vertices.len()).map(|i| vertex_point(vertices, i)).collect();
    rank::affine_rank(&points)
}

/// Dense 0/1 coordinates of vertex `i`.
pub fn vertex_point(vertices: &VertexSet, i: usize) -> Vec<i64> {
    let mut p = vec![0i64; vertices.scenario().dimension()];
    for c in vertices.ones(i) {
        p[c] = 1;
    }
    p
}

/// Affine inequality `Σ coeffs[i]·p_i + constant ≥ 0` in the canonical
/// parametrization, scaled so that its integers are coprime.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Inequality {
    pub scenario: Scenario,
    pub coeffs: Vec<i64>,
    pub constant: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Inequality {
    pub fn new(scenario: Scenario, coeffs: Vec<i64>, constant: i64) -> Result<Self> {
        if coeffs.len() != scenario.dimension() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for dimension {}",
                coeffs.len(),
                scenario.dimension()
            )));
        }
        let mut ineq = Self { scenario, coeffs, constant, label: None };
        ineq.normalize();
        Ok(ineq)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// From rational coefficients on full-table entries `t(x, a)` plus a
    /// constant: `Σ t(x,a) P(a|x) + c ≥ 0`. Denominators are cleared.
    pub fn from_table(scenario: Scenario, table: &[Rational], constant: &Rational) -> Result<Self> {
        if table.len() != scenario.num_entries() {
            return Err(Error::DimensionMismatch(format!(
                "{} table coefficients for {} entries",
                table.len(),
                scenario.num_entries()
            )));
        }
        let mut coeffs = Vec::with_capacity(scenario.dimension());
        let mut c = constant.clone();
        for xi in 0..scenario.num_inputs() {
            let block = &table[scenario.block_offset(xi)..scenario.block_offset(xi) + scenario.block_size(xi)];
            c += &block[0];
            coeffs.extend(block[1..].iter().map(|t| t - &block[0]));
        }
        let lcm = coeffs
            .iter()
            .chain(std::iter::once(&c))
            .fold(BigInt::from(1), |l, r| l.lcm(r.denom()));
        let to_int = |r: &Rational| -> Result<i64> {
            (r * Rational::from_integer(lcm.clone()))
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::Overflow("inequality coefficient exceeds 64 bits".into()))
        };
        let ints = coeffs.iter().map(to_int).collect::<Result<Vec<_>>>()?;
        Self::new(scenario, ints, to_int(&c)?)
    }

    /// Coefficients on the full table, with zero on the first entry of
    /// every block.
    pub fn to_table(&self) -> Vec<i64> {
        let s = &self.scenario;
        let mut t = Vec::with_capacity(s.num_entries());
        for xi in 0..s.num_inputs() {
            let off = s.coord_offset(xi);
            t.push(0);
            t.extend_from_slice(&self.coeffs[off..off + s.block_size(xi) - 1]);
        }
        t
    }

    /// The same inequality on a scenario with more outputs, applied to the
    /// coarse-grained correlation: where this scenario has a single output
    /// the target's outputs are summed over. Every other (party, input)
    /// must keep its output count. Valid causal inequalities stay valid,
    /// since coarse-graining a causal correlation leaves it causal.
    pub fn lift(&self, target: &Scenario) -> Result<Self> {
        let s = &self.scenario;
        let n = s.num_parties();
        if target.num_parties() != n || (0..n).any(|k| target.inputs(k) != s.inputs(k)) {
            return Err(Error::ScenarioMismatch("lifting needs the same parties and inputs".into()));
        }
        for k in 0..n {
            for x in 0..s.inputs(k) {
                let (from, to) = (s.outputs(k, x), target.outputs(k, x));
                if from != to && from != 1 {
                    return Err(Error::ScenarioMismatch(format!(
                        "party {k}, input {x}: cannot lift {from} outputs onto {to}"
                    )));
                }
            }
        }
        let src = self.to_table();
        let mut table = vec![Rational::zero(); target.num_entries()];
        for xi in 0..target.num_inputs() {
            let x = target.input_tuple(xi);
            for ai in 0..target.block_size(xi) {
                let a: Vec<usize> = target
                    .output_tuple(&x, ai)
                    .into_iter()
                    .enumerate()
                    .map(|(k, o)| if s.outputs(k, x[k]) == 1 { 0 } else { o })
                    .collect();
                table[target.block_offset(xi) + ai] = Rational::from_integer(BigInt::from(src[s.entry_index(&x, &a)]));
            }
        }
        let lifted = Self::from_table(target.clone(), &table, &Rational::from_integer(BigInt::from(self.constant)))?;
        Ok(match &self.label {
            Some(l) => lifted.with_label(l.clone()),
            None => lifted,
        })
    }

    fn normalize(&mut self) {
        let g = self
            .coeffs
            .iter()
            .chain(std::iter::once(&self.constant))
            .fold(0i64, |g, &c| g.gcd(&c));
        if g > 1 {
            self.coeffs.iter_mut().for_each(|c| *c /= g);
            self.constant /= g;
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Value of the expression at a correlation.
    pub fn evaluate<T: Probability>(&self, corr: &Correlation<T>) -> Result<T> {
        if corr.scenario() != &self.scenario {
            return Err(Error::ScenarioMismatch("inequality and correlation scenarios differ".into()));
        }
        let s = &self.scenario;
        let mut acc = T::from_ratio(self.constant, 1);
        for xi in 0..s.num_inputs() {
            let off = s.coord_offset(xi);
            for (c, p) in self.coeffs[off..off + s.block_size(xi) - 1].iter().zip(&corr.block(xi)[1..]) {
                if *c != 0 {
                    acc = acc + T::from_ratio(*c, 1) * p.clone();
                }
            }
        }
        Ok(acc)
    }

    pub fn evaluate_point(&self, p: &[Rational]) -> Rational {
        let mut acc = Rational::from_integer(BigInt::from(self.constant));
        for (c, x) in self.coeffs.iter().zip(p) {
            if *c != 0 {
                acc += x * Rational::from_integer(BigInt::from(*c));
            }
        }
        acc
    }

    /// Value at a vertex given by its unit coordinates.
    pub fn evaluate_ones(&self, ones: &[usize]) -> i64 {
        self.constant + ones.iter().map(|&i| self.coeffs[i]).sum::<i64>()
    }

    /// Value at a vertex given by its block indices.
    pub fn evaluate_blocks(&self, digits: &[u32]) -> i64 {
        let s = &self.scenario;
        self.constant
            + digits
                .iter()
                .enumerate()
                .filter(|(_, &d)| d > 0)
                .map(|(xi, &d)| self.coeffs[s.coord_offset(xi) + d as usize - 1])
                .sum::<i64>()
    }

    /// Parses `c1 ... cd c0 >= 0`.
    pub fn parse_line(scenario: &Scenario, line: &str) -> Result<Self> {
        let body = line
            .trim()
            .strip_suffix(">= 0")
            .ok_or_else(|| Error::Format(format!("missing `>= 0` in `{line}`")))?;
        let nums = body
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| Error::Format(format!("bad coefficient `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        let (constant, coeffs) = nums
            .split_last()
            .ok_or_else(|| Error::Format("empty inequality line".into()))?;
        Self::new(scenario.clone(), coeffs.to_vec(), *constant)
    }

    /// Human-readable expression in terms of table entries.
    pub fn describe(&self) -> String {
        let s = &self.scenario;
        let mut terms = Vec::new();
        for xi in 0..s.num_inputs() {
            let x = s.input_tuple(xi);
            for ai in 1..s.block_size(xi) {
                let c = self.coeffs[s.coord_offset(xi) + ai - 1];
                if c == 0 {
                    continue;
                }
                let a = s.output_tuple(&x, ai);
                let entry = format!("P({}|{})", digits(&a), digits(&x));
                terms.push(match c {
                    1 => format!("+ {entry}"),
                    -1 => format!("- {entry}"),
                    c if c > 0 => format!("+ {c} {entry}"),
                    c => format!("- {} {entry}", c.abs()),
                });
            }
        }
        let mut out = terms.join(" ");
        if let Some(rest) = out.strip_prefix("+ ") {
            out = rest.to_string();
        }
        if self.constant != 0 || out.is_empty() {
            let sign = if self.constant < 0 { "-" } else { "+" };
            out = if out.is_empty() {
                self.constant.to_string()
            } else {
                format!("{out} {sign} {}", self.constant.abs())
            };
        }
        format!("{out} >= 0")
    }
}

fn digits(v: &[usize]) -> String {
    v.iter().map(|d| d.to_string()).collect()
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.coeffs {
            write!(f, "{c} ")?;
        }
        write!(f, "{} >= 0", self.constant)
    }
}

/// Reads a facet list: optional `# scenario <json>` header, then one
/// inequality per line. `#` lines and blank lines are skipped.
pub fn read_facet_list(text: &str, scenario: Option<&Scenario>) -> Result<(Scenario, Vec<Inequality>)> {
    let mut sc = scenario.cloned();
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(json) = line.strip_prefix("# scenario ") {
            let parsed: Scenario = serde_json::from_str(json)?;
            if sc.as_ref().is_some_and(|s| s != &parsed) {
                return Err(Error::ScenarioMismatch("facet file header disagrees with scenario".into()));
            }
            sc = Some(parsed);
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let s = sc
            .as_ref()
            .ok_or_else(|| Error::Format("facet list without scenario".into()))?;
        out.push(Inequality::parse_line(s, line)?);
    }
    let s = sc.ok_or_else(|| Error::Format("facet list without scenario".into()))?;
    Ok((s, out))
}

pub fn write_facet_list(scenario: &Scenario, facets: &[Inequality]) -> String {
    let mut out = format!("# scenario {}\n", serde_json::to_string(scenario).expect("scenario serializes"));
    for f in facets {
        out.push_str(&f.to_string());
        out.push('\n');
    }
    out
}

pub(crate) fn big_primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && g.abs() != BigInt::from(1) {
        v.iter_mut().for_each(|c| *c = &*c / &g);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{int, rational};
    use crate::strategy::{enumerate_causal_vertices, EnumerationOptions};

    #[test]
    fn zero_vertex_has_zero_coordinates() {
        let s = Scenario::lazy(3);
        let p: Correlation = Correlation::deterministic(s, |x| vec![0; x.len()]).unwrap();
        assert!(parametrize(&p).coords.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn uniform_lazy_point() {
        let p = parametrize::<Rational>(&Correlation::uniform(Scenario::lazy(3)));
        assert_eq!(p.coords.len(), 19);
        // P_A(1|100) = 1/2 and P_ABC(111|111) = 1/8.
        assert_eq!(p.coords[0], rational(1, 2));
        assert_eq!(p.coords[18], rational(1, 8));
        assert_eq!(deparametrize(&p).unwrap(), Correlation::uniform(Scenario::lazy(3)));
    }

    #[test]
    fn table_form_round_trip() {
        let s = Scenario::full_binary(2);
        let table: Vec<Rational> = (0..16).map(|i| rational(i % 5 - 2, 1)).collect();
        let ineq = Inequality::from_table(s.clone(), &table, &int(3)).unwrap();
        let p: Correlation = Correlation::uniform(s.clone());
        let direct: Rational = table.iter().zip(p.table()).map(|(t, q)| t * q).sum::<Rational>() + int(3);
        let g = direct.clone() / ineq.evaluate(&p).unwrap();
        assert!(g.is_positive() && g.is_integer());
    }

    #[test]
    fn line_format_round_trip() {
        let s = Scenario::lazy(1);
        let ineq = Inequality::new(s.clone(), vec![-2], 4).unwrap();
        assert_eq!(ineq.coeffs, vec![-1]);
        assert_eq!(ineq.to_string(), "-1 2 >= 0");
        assert_eq!(Inequality::parse_line(&s, "-1 2 >= 0").unwrap(), ineq);
        let text = write_facet_list(&s, &[ineq.clone()]);
        assert_eq!(read_facet_list(&text, None).unwrap(), (s, vec![ineq]));
    }

    #[test]
    fn dimension_of_lazy_polytopes() {
        let v = enumerate_causal_vertices(&Scenario::lazy(3), &EnumerationOptions::default()).unwrap();
        assert_eq!(polytope_dimension(&v), 19);
        let single = v.filter(|st| st.block_indices().iter().all(|&d| d == 0));
        assert_eq!(single.len(), 1);
        assert_eq!(polytope_dimension(&single), 0);
    }

    #[test]
    fn lifted_inequality_reads_the_coarse_grained_table() {
        let lazy = crate::catalog::lgyni();
        let full = Scenario::full_binary(2);
        let lifted = lazy.lift(&full).unwrap();
        assert_eq!(lifted.label.as_deref(), Some("LGYNI"));
        for st in crate::strategy::all_strategies(&full).unwrap() {
            let fine: Correlation = st.to_correlation();
            let coarse: Correlation = Correlation::deterministic(Scenario::lazy(2), |x| {
                st.apply(x).iter().zip(x).map(|(&a, &xk)| if xk == 0 { 0 } else { a }).collect()
            })
            .unwrap();
            assert_eq!(lifted.evaluate(&fine).unwrap(), lazy.evaluate(&coarse).unwrap());
        }
        assert!(lifted.lift(&Scenario::lazy(2)).is_err());
        assert!(lazy.lift(&Scenario::lazy(3)).is_err());
    }
}
