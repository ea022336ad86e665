//! Named causal inequalities and their game forms.
//!
//! Inequalities are assembled from marginal terms such as `P_AB(11|110)`,
//! expanded onto the full table by summing over the unlisted outputs.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::correlation::Correlation;
use crate::error::{Error, Result};
use crate::geometry::Inequality;
use crate::number::{int, rational, Probability, Rational};
use crate::scenario::Scenario;

/// Full-table coefficients under construction.
struct TableBuilder {
    scenario: Scenario,
    table: Vec<Rational>,
    constant: Rational,
}

impl TableBuilder {
    fn new(scenario: Scenario) -> Self {
        let table = vec![Rational::zero(); scenario.num_entries()];
        Self { scenario, table, constant: Rational::zero() }
    }

    /// Adds `coeff · P_S(a_S | x)` where `fixed` lists `(party, output)`.
    fn marginal(&mut self, x: &[usize], fixed: &[(usize, usize)], coeff: i64) -> &mut Self {
        let s = &self.scenario;
        let xi = s.input_index(x);
        for ai in 0..s.block_size(xi) {
            let a = s.output_tuple(x, ai);
            if fixed.iter().all(|&(k, o)| a[k] == o) {
                self.table[s.block_offset(xi) + ai] += int(coeff);
            }
        }
        self
    }

    fn constant(&mut self, c: i64) -> &mut Self {
        self.constant += int(c);
        self
    }

    fn build(&self, label: &str) -> Inequality {
        Inequality::from_table(self.scenario.clone(), &self.table, &self.constant)
            .expect("catalog coefficients are small")
            .with_label(label)
    }
}

fn ones(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|k| (k, 1)).collect()
}

/// `P_A(1|10) + P_B(1|01) - P_AB(11|11) ≥ 0` on the lazy bipartite scenario.
pub fn lgyni() -> Inequality {
    TableBuilder::new(Scenario::lazy(2))
        .marginal(&[1, 0], &[(0, 1)], 1)
        .marginal(&[0, 1], &[(1, 1)], 1)
        .marginal(&[1, 1], &[(0, 1), (1, 1)], -1)
        .build("LGYNI")
}

/// Tripartite lazy LGYNI conditioned on the third input `z`.
pub fn lgyni_conditional(z: usize) -> Result<Inequality> {
    if z > 1 {
        return Err(Error::InvalidArgument(format!("z must be 0 or 1, got {z}")));
    }
    Ok(TableBuilder::new(Scenario::lazy(3))
        .marginal(&[1, 0, z], &[(0, 1)], 1)
        .marginal(&[0, 1, z], &[(1, 1)], 1)
        .marginal(&[1, 1, z], &[(0, 1), (1, 1)], -1)
        .build(&format!("LGYNI({z})")))
}

pub fn i1() -> Inequality {
    TableBuilder::new(Scenario::lazy(3))
        .marginal(&[1, 1, 0], &[(0, 1), (1, 1)], 1)
        .marginal(&[0, 1, 1], &[(1, 1), (2, 1)], 1)
        .marginal(&[1, 0, 1], &[(0, 1), (2, 1)], 1)
        .marginal(&[1, 1, 1], &ones(3), -1)
        .build("I1")
}

pub fn i2() -> Inequality {
    TableBuilder::new(Scenario::lazy(3))
        .marginal(&[1, 0, 0], &[(0, 1)], 1)
        .marginal(&[0, 1, 0], &[(1, 1)], 1)
        .marginal(&[0, 0, 1], &[(2, 1)], 1)
        .marginal(&[1, 1, 1], &ones(3), -1)
        .build("I2")
}

pub fn i3() -> Inequality {
    TableBuilder::new(Scenario::lazy(3))
        .constant(2)
        .marginal(&[1, 1, 0], &[(0, 0), (1, 1)], -1)
        .marginal(&[0, 1, 1], &[(1, 0), (2, 1)], -1)
        .marginal(&[1, 0, 1], &[(0, 1), (2, 0)], -1)
        .build("I3")
}

pub fn i4() -> Inequality {
    TableBuilder::new(Scenario::full_binary(3))
        .constant(2)
        .marginal(&[0, 0, 0], &[(0, 0), (1, 0), (2, 0)], -1)
        .marginal(&[1, 1, 0], &[(0, 0), (1, 1), (2, 1)], -1)
        .marginal(&[0, 1, 1], &[(0, 1), (1, 0), (2, 1)], -1)
        .marginal(&[1, 0, 1], &[(0, 1), (1, 1), (2, 0)], -1)
        .build("I4")
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("N must be at least 2, got {n}")));
    }
    Ok(())
}

/// `Σ_k P_{N∖k}(1…1 | x_k=0, rest 1) - P_N(1…1|1…1) ≥ 0`.
pub fn j1(n: usize) -> Result<Inequality> {
    check_n(n)?;
    let mut b = TableBuilder::new(Scenario::lazy(n));
    for k in 0..n {
        let x: Vec<usize> = (0..n).map(|j| usize::from(j != k)).collect();
        let fixed: Vec<(usize, usize)> = (0..n).filter(|&j| j != k).map(|j| (j, 1)).collect();
        b.marginal(&x, &fixed, 1);
    }
    b.marginal(&vec![1; n], &ones(n), -1);
    Ok(b.build(&format!("J1({n})")))
}

/// `Σ_k P_k(1 | x_k=1, rest 0) - P_N(1…1|1…1) ≥ 0`.
pub fn j2(n: usize) -> Result<Inequality> {
    check_n(n)?;
    let mut b = TableBuilder::new(Scenario::lazy(n));
    for k in 0..n {
        let x: Vec<usize> = (0..n).map(|j| usize::from(j == k)).collect();
        b.marginal(&x, &[(k, 1)], 1);
    }
    b.marginal(&vec![1; n], &ones(n), -1);
    Ok(b.build(&format!("J2({n})")))
}

/// Causal bound of the uniform tripartite GYNI game, in wins out of 8:
/// whoever acts first must guess blindly.
pub const GYNI_CAUSAL_WINS: i64 = 4;

/// Uniform-input tripartite GYNI on the full binary scenario:
/// `GYNI_CAUSAL_WINS - Σ_x P(a=z, b=x, c=y | x) ≥ 0`.
pub fn gyni_uniform() -> Inequality {
    let mut b = TableBuilder::new(Scenario::full_binary(3));
    b.constant(GYNI_CAUSAL_WINS);
    for xi in 0..8 {
        let x = [xi & 1, (xi >> 1) & 1, xi >> 2];
        b.marginal(&x, &[(0, x[2]), (1, x[0]), (2, x[1])], -1);
    }
    b.build("GYNI")
}

/// Names accepted by [`build`].
pub const NAMES: &[&str] = &["LGYNI", "LGYNI(0)", "LGYNI(1)", "I1", "I2", "I3", "I4", "J1(N)", "J2(N)", "GYNI"];

/// Builds a named inequality: `LGYNI`, `LGYNI(z)`, `I1`–`I4`, `J1(N)`,
/// `J2(N)` or `GYNI`.
pub fn build(name: &str) -> Result<Inequality> {
    let arg = |prefix: &str| -> Option<Result<usize>> {
        name.strip_prefix(prefix).and_then(|r| r.strip_suffix(')')).map(|n| {
            n.trim().parse::<usize>().map_err(|_| Error::UnknownName(name.to_string()))
        })
    };
    match name {
        "LGYNI" => Ok(lgyni()),
        "I1" => Ok(i1()),
        "I2" => Ok(i2()),
        "I3" => Ok(i3()),
        "I4" => Ok(i4()),
        "GYNI" => Ok(gyni_uniform()),
        _ => {
            if let Some(z) = arg("LGYNI(") {
                lgyni_conditional(z?)
            } else if let Some(n) = arg("J1(") {
                j1(n?)
            } else if let Some(n) = arg("J2(") {
                j2(n?)
            } else {
                Err(Error::UnknownName(name.to_string()))
            }
        }
    }
}

/// A game: inputs drawn from `input_weights`, won on the table entries
/// flagged in `wins`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalGame {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Probability of every input tuple, in canonical order.
    #[serde(with = "crate::number::serde_rationals")]
    pub input_weights: Vec<Rational>,
    /// Winning flag per table entry.
    pub wins: Vec<bool>,
    /// Maximal success probability of causal strategies.
    #[serde(with = "crate::number::serde_rational")]
    pub bound: Rational,
}

impl CausalGame {
    /// Game with uniform inputs and a predicate on `(x, a)`.
    pub fn from_predicate(
        scenario: Scenario,
        bound: Rational,
        mut win: impl FnMut(&[usize], &[usize]) -> bool,
    ) -> Self {
        let s = &scenario;
        let mut wins = Vec::with_capacity(s.num_entries());
        for xi in 0..s.num_inputs() {
            let x = s.input_tuple(xi);
            for ai in 0..s.block_size(xi) {
                wins.push(win(&x, &s.output_tuple(&x, ai)));
            }
        }
        let w = rational(1, s.num_inputs() as i64);
        Self { input_weights: vec![w; s.num_inputs()], wins, bound, label: None, scenario }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

/// Probability of winning `game` with correlation `corr`.
pub fn game_success<T: Probability>(corr: &Correlation<T>, game: &CausalGame) -> Result<T> {
    let s = corr.scenario();
    if s != &game.scenario {
        return Err(Error::ScenarioMismatch("game and correlation scenarios differ".into()));
    }
    let mut total = T::zero();
    for xi in 0..s.num_inputs() {
        let w = &game.input_weights[xi];
        if w.is_zero() {
            continue;
        }
        let off = s.block_offset(xi);
        let won = corr
            .block(xi)
            .iter()
            .enumerate()
            .filter(|(ai, _)| game.wins[off + ai])
            .fold(T::zero(), |acc, (_, p)| acc + p.clone());
        let (n, d) = (
            i64::try_from(w.numer()).expect("small input weight"),
            i64::try_from(w.denom()).expect("small input weight"),
        );
        total = total + T::from_ratio(n, d) * won;
    }
    Ok(total)
}

/// Reads an inequality as a game.
///
/// Every block of table coefficients must take at most two values, and
/// the gap between them must be the same across blocks. Entries with the
/// lower value win. Parties whose input is the same on all two-valued
/// blocks are conditioned on that input; the remaining inputs are uniform.
/// The result satisfies `success = bound - expression / (gap · #inputs)`.
pub fn game_form(ineq: &Inequality) -> Result<CausalGame> {
    let s = &ineq.scenario;
    let table = ineq.to_table();
    let mut gap: Option<i64> = None;
    let mut two_valued = Vec::new();
    for xi in 0..s.num_inputs() {
        let block = &table[s.block_offset(xi)..s.block_offset(xi) + s.block_size(xi)];
        let lo = *block.iter().min().expect("nonempty block");
        let hi = *block.iter().max().expect("nonempty block");
        if block.iter().any(|&t| t != lo && t != hi) {
            return Err(Error::NotGameConvertible(format!("block {xi} has more than two coefficient values")));
        }
        if hi > lo {
            if gap.is_some_and(|g| g != hi - lo) {
                return Err(Error::NotGameConvertible("blocks differ in coefficient gap".into()));
            }
            gap = Some(hi - lo);
            two_valued.push(xi);
        }
    }
    let gap = gap.ok_or_else(|| Error::NotGameConvertible("inequality has no variable terms".into()))?;
    let n = s.num_parties();
    let conditioned: Vec<Option<usize>> = (0..n)
        .map(|k| {
            let v = s.input_of(two_valued[0], k);
            two_valued.iter().all(|&xi| s.input_of(xi, k) == v).then_some(v)
        })
        .collect();
    // With every party conditioned the game degenerates to a single input.
    let in_support = |xi: usize| (0..n).all(|k| conditioned[k].is_none_or(|v| s.input_of(xi, k) == v));
    let support: Vec<usize> = (0..s.num_inputs()).filter(|&xi| in_support(xi)).collect();

    let mut wins = vec![false; s.num_entries()];
    let mut total = int(ineq.constant);
    for xi in 0..s.num_inputs() {
        let off = s.block_offset(xi);
        let block = &table[off..off + s.block_size(xi)];
        let hi = *block.iter().max().expect("nonempty block");
        if !in_support(xi) {
            // Constant block: Σ_a t P = t.
            total += int(hi);
            continue;
        }
        if block.iter().all(|&t| t == hi) {
            // Always won: shift by the gap.
            total += int(hi + gap);
            wins[off..off + block.len()].iter_mut().for_each(|w| *w = true);
        } else {
            total += int(hi);
            for (ai, &t) in block.iter().enumerate() {
                wins[off + ai] = t < hi;
            }
        }
    }
    let mut input_weights = vec![Rational::zero(); s.num_inputs()];
    let w = rational(1, support.len() as i64);
    for &xi in &support {
        input_weights[xi] = w.clone();
    }
    let bound = total / int(gap * support.len() as i64);
    if bound < Rational::zero() || bound > Rational::one() {
        return Err(Error::NotGameConvertible(format!("success bound {bound} outside [0, 1]")));
    }
    Ok(CausalGame { scenario: s.clone(), label: ineq.label.clone(), input_weights, wins, bound })
}

/// The game of a named inequality written directly from its verbal rule.
pub fn named_game(name: &str) -> Result<CausalGame> {
    let b = |x: usize| x == 1;
    let game = match name {
        "LGYNI" => CausalGame::from_predicate(Scenario::lazy(2), rational(3, 4), |x, a| {
            !(b(x[0]) && a[0] != x[1]) && !(b(x[1]) && a[1] != x[0])
        }),
        "I1" => CausalGame::from_predicate(Scenario::lazy(3), rational(7, 8), |x, a| {
            let (x, y, z, a, b_, c) = (x[0], x[1], x[2], a[0], a[1], a[2]);
            x * y * ((a * b_) ^ z) == 0 && y * z * ((b_ * c) ^ x) == 0 && x * z * ((a * c) ^ y) == 0
        }),
        "I2" => CausalGame::from_predicate(Scenario::lazy(3), rational(7, 8), |x, a| {
            let (x, y, z, a, b_, c) = (x[0], x[1], x[2], a[0], a[1], a[2]);
            x * (y ^ z ^ 1) * (a ^ (y * z)) == 0
                && y * (x ^ z ^ 1) * (b_ ^ (x * z)) == 0
                && z * (x ^ y ^ 1) * (c ^ (x * y)) == 0
        }),
        "I3" => CausalGame::from_predicate(Scenario::lazy(3), rational(7, 8), |x, a| {
            let (x, y, z, a, b_, c) = (x[0], x[1], x[2], a[0], a[1], a[2]);
            x * y * (z ^ 1) * (((a ^ 1) * b_) ^ 1) == 0
                && y * z * (x ^ 1) * (((b_ ^ 1) * c) ^ 1) == 0
                && x * z * (y ^ 1) * (((c ^ 1) * a) ^ 1) == 0
        }),
        "I4" => CausalGame::from_predicate(Scenario::full_binary(3), rational(3, 4), |x, a| {
            let (x, y, z, a, b_, c) = (x[0], x[1], x[2], a[0], a[1], a[2]);
            (x ^ y ^ z ^ 1) * (((b_ ^ x ^ 1) * (c ^ y ^ 1) * (a ^ z ^ 1)) ^ 1) == 0
        }),
        "GYNI" => CausalGame::from_predicate(Scenario::full_binary(3), rational(GYNI_CAUSAL_WINS, 8), |x, a| {
            a[0] == x[2] && a[1] == x[0] && a[2] == x[1]
        }),
        _ => {
            let n_of = |p: &str| name.strip_prefix(p).and_then(|r| r.strip_suffix(')')).and_then(|r| r.parse::<usize>().ok());
            if let Some(z) = n_of("LGYNI(") {
                let ineq = lgyni_conditional(z)?;
                let mut g = CausalGame::from_predicate(ineq.scenario, rational(3, 4), |x, a| {
                    !(b(x[0]) && a[0] != x[1]) && !(b(x[1]) && a[1] != x[0])
                });
                let s = Scenario::lazy(3);
                for xi in 0..s.num_inputs() {
                    g.input_weights[xi] = if s.input_of(xi, 2) == z { rational(1, 4) } else { Rational::zero() };
                }
                g
            } else if let Some(n) = n_of("J1(") {
                check_n(n)?;
                // Whenever N-1 parties get input 1, the product of their
                // outputs must equal the remaining party's input.
                CausalGame::from_predicate(Scenario::lazy(n), int(1) - rational(1, 1 << n), move |x, a| {
                    (0..n).all(|k| {
                        let others_one = (0..n).filter(|&j| j != k).all(|j| x[j] == 1);
                        !others_one || (0..n).filter(|&j| j != k).map(|j| a[j]).product::<usize>() == x[k]
                    })
                })
            } else if let Some(n) = n_of("J2(") {
                check_n(n)?;
                // A party with input 1 whose peers share an input must
                // output that input.
                CausalGame::from_predicate(Scenario::lazy(n), int(1) - rational(1, 1 << n), move |x, a| {
                    (0..n).all(|k| {
                        let v = x[(k + 1) % n];
                        let same = (0..n).filter(|&j| j != k).all(|j| x[j] == v);
                        !(x[k] == 1 && same) || a[k] == v
                    })
                })
            } else {
                return Err(Error::UnknownName(name.to_string()));
            }
        }
    };
    Ok(game.with_label(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{enumerate_causal_vertices, EnumerationOptions};

    #[test]
    fn all_zero_vertex_saturates() {
        for name in ["I1", "I2", "LGYNI", "LGYNI(0)", "LGYNI(1)", "J1(3)", "J2(3)", "J1(4)", "J2(4)"] {
            let ineq = build(name).unwrap();
            let zero: Correlation = Correlation::deterministic(ineq.scenario.clone(), |x| vec![0; x.len()]).unwrap();
            assert_eq!(ineq.evaluate(&zero).unwrap(), int(0), "{name}");
        }
    }

    #[test]
    fn j1_of_three_is_i1() {
        assert_eq!(j1(3).unwrap().coeffs, i1().coeffs);
        assert_eq!(j2(3).unwrap().coeffs, i2().coeffs);
    }

    #[test]
    fn game_bounds() {
        for (name, bound) in [
            ("LGYNI", rational(3, 4)),
            ("LGYNI(0)", rational(3, 4)),
            ("LGYNI(1)", rational(3, 4)),
            ("I1", rational(7, 8)),
            ("I2", rational(7, 8)),
            ("I3", rational(7, 8)),
            ("I4", rational(3, 4)),
            ("J1(4)", rational(15, 16)),
            ("J2(4)", rational(15, 16)),
        ] {
            assert_eq!(game_form(&build(name).unwrap()).unwrap().bound, bound, "{name}");
        }
    }

    #[test]
    fn game_form_matches_verbal_rules() {
        for name in ["LGYNI", "LGYNI(0)", "LGYNI(1)", "I1", "I2", "I3", "I4", "J1(3)", "J2(3)", "GYNI"] {
            let ineq = build(name).unwrap();
            let from_ineq = game_form(&ineq).unwrap();
            let direct = named_game(name).unwrap();
            assert_eq!(from_ineq.bound, direct.bound, "{name}");
            let v = enumerate_causal_vertices(&ineq.scenario, &EnumerationOptions::default()).unwrap();
            for st in v.iter() {
                let p: Correlation = st.to_correlation();
                let s1 = game_success(&p, &from_ineq).unwrap();
                let s2 = game_success(&p, &direct).unwrap();
                assert_eq!(s1, s2, "{name}");
                // success = bound - expression / scale
                let scale = &from_ineq.bound - &s1;
                let e = ineq.evaluate(&p).unwrap();
                assert_eq!(e.is_zero(), scale.is_zero(), "{name}");
            }
        }
    }

    #[test]
    fn gyni_bound_is_tight_but_not_a_facet() {
        let g = gyni_uniform();
        let v = enumerate_causal_vertices(&g.scenario, &EnumerationOptions::default()).unwrap();
        let min = v.iter().map(|st| g.evaluate(&st.to_correlation::<Rational>()).unwrap()).min().unwrap();
        assert_eq!(min, int(0));
        let records = (0..v.len()).map(|i| Ok(v.block_indices(i)));
        assert!(crate::geometry::facet::verify_facet(&g, records).unwrap().certificate().is_none());
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(build("I9"), Err(Error::UnknownName(_))));
        assert!(matches!(build("J1(1)"), Err(Error::InvalidArgument(_))));
        assert!(matches!(build("J1(x)"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn mixed_gaps_are_rejected() {
        let s = Scenario::lazy(2);
        let ineq = Inequality::new(s, vec![1, 2, 0, 0, 0], 0).unwrap();
        assert!(matches!(game_form(&ineq), Err(Error::NotGameConvertible(_))));
    }
}
