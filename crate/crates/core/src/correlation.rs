//! Correlation tables `P(a|x)` and the algebra on them: marginals, mixtures,
//! sequential composition and the reductions for parties with trivial inputs
//! or outputs.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number::{format_rational, parse_rational, rationalize, NumberKind, Probability, Rational};
use crate::scenario::Scenario;

/// A normalized conditional distribution over a scenario, stored in
/// canonical order (input tuples with party 1 fastest, then output tuples).
#[derive(Clone, Debug, PartialEq)]
pub struct Correlation<T: Probability = Rational> {
    scenario: Scenario,
    table: Vec<T>,
}

/// How `condition_on_input` treats the outputs of the removed party.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputConditioning {
    /// The party has a single output for every input; nothing is summed.
    FixedOutput,
    /// The party's outputs are summed out before conditioning.
    MarginalizeOutput,
}

/// Explicit acknowledgement required by [`Correlation::postselect_output`]:
/// conditioning on outputs can turn a causal correlation into a noncausal one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PostSelection {
    MayBreakCausality,
}

impl<T: Probability> Correlation<T> {
    pub fn new(scenario: Scenario, table: Vec<T>) -> Result<Self> {
        if table.len() != scenario.num_entries() {
            return Err(Error::InvalidCorrelation(format!(
                "table has {} entries, scenario needs {}",
                table.len(),
                scenario.num_entries()
            )));
        }
        let c = Self { scenario, table };
        c.validate()?;
        Ok(c)
    }

    /// Builds a table from `f(x, a)`.
    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(&[usize], &[usize]) -> T) -> Result<Self> {
        let mut table = Vec::with_capacity(scenario.num_entries());
        for xi in 0..scenario.num_inputs() {
            let x = scenario.input_tuple(xi);
            for ai in 0..scenario.block_size(xi) {
                let a = scenario.output_tuple(&x, ai);
                table.push(f(&x, &a));
            }
        }
        Self::new(scenario, table)
    }

    /// Deterministic correlation `P(a|x) = δ_{a, α(x)}`.
    pub fn deterministic(scenario: Scenario, mut alpha: impl FnMut(&[usize]) -> Vec<usize>) -> Result<Self> {
        let mut table = vec![T::zero(); scenario.num_entries()];
        for xi in 0..scenario.num_inputs() {
            let x = scenario.input_tuple(xi);
            let a = alpha(&x);
            let idx = scenario.checked_entry_index(&x, &a)?;
            table[idx] = T::one();
        }
        Self::new(scenario, table)
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let mut table = Vec::with_capacity(scenario.num_entries());
        for xi in 0..scenario.num_inputs() {
            let b = scenario.block_size(xi);
            table.extend(std::iter::repeat(T::from_ratio(1, b as i64)).take(b));
        }
        Self { scenario, table }
    }

    fn validate(&self) -> Result<()> {
        for xi in 0..self.scenario.num_inputs() {
            let block = self.block(xi);
            if let Some(bad) = block.iter().find(|p| !p.is_nonnegative()) {
                return Err(Error::InvalidCorrelation(format!(
                    "negative entry {bad:?} for input tuple {:?}",
                    self.scenario.input_tuple(xi)
                )));
            }
            let sum = block.iter().cloned().fold(T::zero(), |s, p| s + p);
            if !sum.is_unit() {
                return Err(Error::InvalidCorrelation(format!(
                    "probabilities for input tuple {:?} sum to {sum:?}",
                    self.scenario.input_tuple(xi)
                )));
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    pub fn into_table(self) -> Vec<T> {
        self.table
    }

    pub fn block(&self, xi: usize) -> &[T] {
        let off = self.scenario.block_offset(xi);
        &self.table[off..off + self.scenario.block_size(xi)]
    }

    pub fn prob(&self, x: &[usize], a: &[usize]) -> &T {
        &self.table[self.scenario.entry_index(x, a)]
    }

    /// Marginal on the parties in `keep` (taken in ascending order), with the
    /// discarded parties' inputs fixed to `removed_inputs` (ascending party
    /// order).
    pub fn marginalize(&self, keep: &[usize], removed_inputs: &[usize]) -> Result<Self> {
        let s = &self.scenario;
        let n = s.num_parties();
        if keep.is_empty() {
            return Err(Error::InvalidArgument("cannot marginalize onto no parties".into()));
        }
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if kept.len() != keep.len() || kept.iter().any(|&k| k >= n) {
            return Err(Error::OutOfRange(format!("party subset {keep:?}")));
        }
        let removed: Vec<usize> = (0..n).filter(|k| !kept.contains(k)).collect();
        if removed_inputs.len() != removed.len() {
            return Err(Error::InvalidArgument(format!(
                "{} discarded parties but {} fixed inputs",
                removed.len(),
                removed_inputs.len()
            )));
        }
        for (&k, &x) in removed.iter().zip(removed_inputs) {
            if x >= s.inputs(k) {
                return Err(Error::OutOfRange(format!("input {x} for party {k}")));
            }
        }
        let sub = s.restrict(&kept)?;
        let mut table = vec![T::zero(); sub.num_entries()];
        let mut x = vec![0usize; n];
        for (&k, &v) in removed.iter().zip(removed_inputs) {
            x[k] = v;
        }
        for sxi in 0..sub.num_inputs() {
            let sx = sub.input_tuple(sxi);
            for (&k, &v) in kept.iter().zip(&sx) {
                x[k] = v;
            }
            let xi = s.input_index(&x);
            let off = s.block_offset(xi);
            let soff = sub.block_offset(sxi);
            for ai in 0..s.block_size(xi) {
                let a = s.output_tuple(&x, ai);
                let sa: Vec<usize> = kept.iter().map(|&k| a[k]).collect();
                let target = soff + sub.output_index(&sx, &sa);
                table[target] = table[target].clone() + self.table[off + ai].clone();
            }
        }
        Ok(Self { scenario: sub, table })
    }

    /// Convex combination `Σ_i w_i P_i`.
    pub fn mix(corrs: &[Self], weights: &[T]) -> Result<Self> {
        let first = corrs
            .first()
            .ok_or_else(|| Error::InvalidArgument("mixture of no correlations".into()))?;
        if corrs.len() != weights.len() {
            return Err(Error::InvalidArgument("one weight per correlation is required".into()));
        }
        if corrs.iter().any(|c| c.scenario != first.scenario) {
            return Err(Error::ScenarioMismatch("mixture components differ in scenario".into()));
        }
        if weights.iter().any(|w| !w.is_nonnegative()) {
            return Err(Error::InvalidArgument("negative mixture weight".into()));
        }
        let total = weights.iter().cloned().fold(T::zero(), |s, w| s + w);
        if !total.is_unit() {
            return Err(Error::InvalidArgument(format!("mixture weights sum to {total:?}")));
        }
        let mut table = vec![T::zero(); first.table.len()];
        for (c, w) in corrs.iter().zip(weights) {
            if w.is_zero() {
                continue;
            }
            for (t, p) in table.iter_mut().zip(&c.table) {
                *t = t.clone() + w.clone() * p.clone();
            }
        }
        Self::new(first.scenario.clone(), table)
    }

    /// `P(a|x) = P(a_K|x_K) · P_{x_K,a_K}(a_rest|x_rest)` on the full
    /// `scenario`, where `first` lives on the parties `first_parties`
    /// (ascending) and `second(x_K, a_K)` on the complement.
    pub fn sequential_compose(
        scenario: &Scenario,
        first_parties: &[usize],
        first: &Self,
        mut second: impl FnMut(&[usize], &[usize]) -> Option<Self>,
    ) -> Result<Self> {
        let n = scenario.num_parties();
        let mut k_set = first_parties.to_vec();
        k_set.sort_unstable();
        k_set.dedup();
        if k_set.is_empty() || k_set.len() >= n || k_set.iter().any(|&k| k >= n) {
            return Err(Error::InvalidArgument(format!(
                "first parties {first_parties:?} must be a nonempty strict subset"
            )));
        }
        let rest: Vec<usize> = (0..n).filter(|k| !k_set.contains(k)).collect();
        let s_first = scenario.restrict(&k_set)?;
        let s_rest = scenario.restrict(&rest)?;
        if first.scenario != s_first {
            return Err(Error::ScenarioMismatch("first factor does not match the chosen parties".into()));
        }
        let mut cache: HashMap<(Vec<usize>, Vec<usize>), Self> = HashMap::new();
        let mut table = Vec::with_capacity(scenario.num_entries());
        for xi in 0..scenario.num_inputs() {
            let x = scenario.input_tuple(xi);
            let xk: Vec<usize> = k_set.iter().map(|&k| x[k]).collect();
            let xr: Vec<usize> = rest.iter().map(|&k| x[k]).collect();
            for ai in 0..scenario.block_size(xi) {
                let a = scenario.output_tuple(&x, ai);
                let ak: Vec<usize> = k_set.iter().map(|&k| a[k]).collect();
                let ar: Vec<usize> = rest.iter().map(|&k| a[k]).collect();
                let key = (xk.clone(), ak.clone());
                if !cache.contains_key(&key) {
                    let cond = second(&xk, &ak).ok_or_else(|| {
                        Error::InvalidArgument(format!("missing conditional for x_K={xk:?}, a_K={ak:?}"))
                    })?;
                    if cond.scenario != s_rest {
                        return Err(Error::ScenarioMismatch(
                            "conditional factor does not match the remaining parties".into(),
                        ));
                    }
                    cache.insert(key.clone(), cond);
                }
                let cond = &cache[&key];
                table.push(first.prob(&xk, &ak).clone() * cond.prob(&xr, &ar).clone());
            }
        }
        Self::new(scenario.clone(), table)
    }

    /// Conditional `(N-1)`-party correlation `P_{x_k}(a_rest|x_rest)`.
    pub fn condition_on_input(&self, party: usize, input: usize, mode: InputConditioning) -> Result<Self> {
        let s = &self.scenario;
        if party >= s.num_parties() {
            return Err(Error::OutOfRange(format!("party {party}")));
        }
        if input >= s.inputs(party) {
            return Err(Error::OutOfRange(format!("input {input} for party {party}")));
        }
        if s.num_parties() == 1 {
            return Err(Error::InvalidArgument("cannot remove the only party".into()));
        }
        if mode == InputConditioning::FixedOutput && s.parties()[party].outputs.iter().any(|&o| o != 1) {
            return Err(Error::InvalidArgument(format!(
                "party {party} does not have a fixed output; use output-marginalized conditioning"
            )));
        }
        let keep: Vec<usize> = (0..s.num_parties()).filter(|&k| k != party).collect();
        self.marginalize(&keep, &[input])
    }

    /// Discards a party that has a single input.
    pub fn drop_fixed_input_party(&self, party: usize) -> Result<Self> {
        let s = &self.scenario;
        if party >= s.num_parties() {
            return Err(Error::OutOfRange(format!("party {party}")));
        }
        if s.inputs(party) != 1 {
            return Err(Error::InvalidArgument(format!(
                "party {party} has {} inputs, expected exactly one",
                s.inputs(party)
            )));
        }
        self.condition_on_input(party, 0, InputConditioning::MarginalizeOutput)
    }

    /// `P(a_rest|x_rest, x_k, a_k)`: conditions on party `party` having
    /// received `input` and produced `output`.
    pub fn postselect_output(&self, party: usize, input: usize, output: usize, _ack: PostSelection) -> Result<Self> {
        let s = &self.scenario;
        if party >= s.num_parties() || input >= s.inputs(party) || output >= s.outputs(party, input) {
            return Err(Error::OutOfRange(format!("party {party}, input {input}, output {output}")));
        }
        if s.num_parties() == 1 {
            return Err(Error::InvalidArgument("cannot remove the only party".into()));
        }
        log::warn!("post-selecting on the output of party {party}: the result need not be causal");
        let keep: Vec<usize> = (0..s.num_parties()).filter(|&k| k != party).collect();
        let sub = s.restrict(&keep)?;
        let mut table = Vec::with_capacity(sub.num_entries());
        let mut x = vec![0usize; s.num_parties()];
        x[party] = input;
        for sxi in 0..sub.num_inputs() {
            let sx = sub.input_tuple(sxi);
            for (&k, &v) in keep.iter().zip(&sx) {
                x[k] = v;
            }
            let mut block = Vec::with_capacity(sub.block_size(sxi));
            let mut norm = T::zero();
            for sai in 0..sub.block_size(sxi) {
                let sa = sub.output_tuple(&sx, sai);
                let mut a = vec![0usize; s.num_parties()];
                for (&k, &v) in keep.iter().zip(&sa) {
                    a[k] = v;
                }
                a[party] = output;
                let p = self.prob(&x, &a).clone();
                norm = norm + p.clone();
                block.push(p);
            }
            if norm.is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "post-selected output has zero probability for inputs {sx:?}"
                )));
            }
            table.extend(block.into_iter().map(|p| p / norm.clone()));
        }
        Self::new(sub, table)
    }

    /// Product correlation with `other`'s parties appended after ours.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut parties = self.scenario.parties().to_vec();
        parties.extend_from_slice(other.scenario.parties());
        let s = Scenario::new(parties)?;
        let n1 = self.scenario.num_parties();
        Self::from_fn(s, |x, a| {
            self.prob(&x[..n1], &a[..n1]).clone() * other.prob(&x[n1..], &a[n1..]).clone()
        })
    }

    /// Relabels parties: party `k` of `self` becomes party `perm[k]`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Self> {
        let n = self.scenario.num_parties();
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..n).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
        }
        let mut parties = vec![self.scenario.parties()[0].clone(); n];
        for (k, &t) in perm.iter().enumerate() {
            parties[t] = self.scenario.parties()[k].clone();
        }
        let s = Scenario::new(parties)?;
        Self::from_fn(s, |x, a| {
            let ox: Vec<usize> = perm.iter().map(|&t| x[t]).collect();
            let oa: Vec<usize> = perm.iter().map(|&t| a[t]).collect();
            self.prob(&ox, &oa).clone()
        })
    }

    pub fn to_f64(&self) -> Correlation<f64> {
        Correlation {
            scenario: self.scenario.clone(),
            table: self.table.iter().map(|p| p.to_f64()).collect(),
        }
    }
}

impl Correlation<f64> {
    /// Rational approximation with denominators bounded by `max_den`; each
    /// block is renormalized exactly by adjusting its largest entry.
    pub fn rationalize(&self, max_den: u64) -> Result<Correlation<Rational>> {
        let s = &self.scenario;
        let mut table = Vec::with_capacity(self.table.len());
        for xi in 0..s.num_inputs() {
            let mut block: Vec<Rational> = self
                .block(xi)
                .iter()
                .map(|&p| rationalize(p.max(0.0), max_den))
                .collect();
            let sum = block.iter().fold(Rational::zero(), |acc, p| acc + p);
            let (imax, _) = block
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1))
                .expect("nonempty block");
            block[imax] = block[imax].clone() + (Rational::one() - sum);
            table.extend(block);
        }
        Correlation::new(s.clone(), table)
    }
}

/// JSON correlation file: one array of entries per input tuple.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationFile {
    pub scenario: Scenario,
    pub number: NumberKind,
    pub table: Vec<Vec<serde_json::Value>>,
}

/// A correlation read from disk in either number kind.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyCorrelation {
    Rational(Correlation<Rational>),
    Float(Correlation<f64>),
}

impl AnyCorrelation {
    pub fn scenario(&self) -> &Scenario {
        match self {
            Self::Rational(c) => c.scenario(),
            Self::Float(c) => c.scenario(),
        }
    }
}

impl<T: Probability> Correlation<T> {
    fn blocks_json(&self, entry: impl Fn(&T) -> serde_json::Value) -> Vec<Vec<serde_json::Value>> {
        (0..self.scenario.num_inputs())
            .map(|xi| self.block(xi).iter().map(&entry).collect())
            .collect()
    }
}

impl Correlation<Rational> {
    pub fn to_file(&self) -> CorrelationFile {
        CorrelationFile {
            scenario: self.scenario.clone(),
            number: NumberKind::Rational,
            table: self.blocks_json(|p| serde_json::Value::String(format_rational(p))),
        }
    }
}

impl Correlation<f64> {
    pub fn to_file(&self) -> CorrelationFile {
        CorrelationFile {
            scenario: self.scenario.clone(),
            number: NumberKind::Float,
            table: self.blocks_json(|p| serde_json::json!(p)),
        }
    }
}

impl CorrelationFile {
    pub fn into_correlation(self) -> Result<AnyCorrelation> {
        let s = self.scenario;
        if self.table.len() != s.num_inputs() {
            return Err(Error::Format(format!(
                "{} blocks for {} input tuples",
                self.table.len(),
                s.num_inputs()
            )));
        }
        for (xi, block) in self.table.iter().enumerate() {
            if block.len() != s.block_size(xi) {
                return Err(Error::Format(format!(
                    "block {xi} has {} entries, expected {}",
                    block.len(),
                    s.block_size(xi)
                )));
            }
        }
        let flat = self.table.into_iter().flatten();
        match self.number {
            NumberKind::Rational => {
                let table = flat
                    .map(|v| match &v {
                        serde_json::Value::String(t) => parse_rational(t),
                        serde_json::Value::Number(n) => n.as_i64().map(|i| crate::number::int(i)),
                        _ => None,
                    }
                    .ok_or_else(|| Error::Format(format!("not a rational entry: {v}"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyCorrelation::Rational(Correlation::new(s, table)?))
            }
            NumberKind::Float => {
                let table = flat
                    .map(|v| v.as_f64().ok_or_else(|| Error::Format(format!("not a float entry: {v}"))))
                    .collect::<Result<Vec<_>>>()?;
                Ok(AnyCorrelation::Float(Correlation::new(s, table)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::rational;
    use crate::scenario::PartySpec;

    /// Tripartite, binary inputs, first party without output.
    fn dyn_scenario() -> Scenario {
        Scenario::new(vec![
            PartySpec::new(vec![1, 1]),
            PartySpec::new(vec![2, 2]),
            PartySpec::new(vec![2, 2]),
        ])
        .unwrap()
    }

    fn dynamical() -> Correlation {
        Correlation::deterministic(dyn_scenario(), |x| {
            if x[0] == 0 {
                vec![0, 0, x[1]]
            } else {
                vec![0, x[2], 0]
            }
        })
        .unwrap()
    }

    fn dynamical_mixture(q0: Rational, q1: Rational) -> Correlation {
        Correlation::from_fn(dyn_scenario(), |x, a| {
            let q = if x[0] == 0 { q0.clone() } else { q1.clone() };
            let first = (a[1] == 0 && a[2] == x[1]) as i64;
            let second = (a[1] == x[2] && a[2] == 0) as i64;
            q.clone() * crate::number::int(first) + (Rational::one() - q) * crate::number::int(second)
        })
        .unwrap()
    }

    #[test]
    fn rejects_unnormalized_tables() {
        let s = Scenario::lazy(1);
        assert!(Correlation::new(s.clone(), vec![rational(1, 1), rational(1, 2), rational(1, 3)]).is_err());
        assert!(Correlation::new(s.clone(), vec![rational(1, 1), rational(3, 2), rational(-1, 2)]).is_err());
        assert!(Correlation::new(s, vec![rational(1, 1)]).is_err());
    }

    #[test]
    fn marginal_keep_all_is_identity() {
        let p = dynamical();
        assert_eq!(p.marginalize(&[0, 1, 2], &[]).unwrap(), p);
    }

    #[test]
    fn marginal_of_product_is_factor() {
        let pa = Correlation::<Rational>::new(
            Scenario::lazy(1),
            vec![rational(1, 1), rational(1, 3), rational(2, 3)],
        )
        .unwrap();
        let pb = Correlation::<Rational>::uniform(Scenario::full_binary(1));
        let p = pa.tensor(&pb).unwrap();
        for xb in 0..2 {
            assert_eq!(p.marginalize(&[0], &[xb]).unwrap(), pa);
        }
    }

    #[test]
    fn dynamical_marginal_is_deterministic() {
        let m = dynamical().marginalize(&[1], &[0, 0]).unwrap();
        for x in 0..2 {
            assert_eq!(*m.prob(&[x], &[0]), Rational::one());
        }
    }

    #[test]
    fn dynamical_conditioned_on_first_input() {
        let c = dynamical().condition_on_input(0, 0, InputConditioning::FixedOutput).unwrap();
        let expected = Correlation::deterministic(Scenario::full_binary(2), |x| vec![0, x[0]]).unwrap();
        assert_eq!(c, expected);
    }

    #[test]
    fn mixture_conditioned_on_first_input() {
        let (q0, q1) = (rational(1, 3), rational(2, 3));
        let p = dynamical_mixture(q0, q1.clone());
        let c = p.condition_on_input(0, 1, InputConditioning::FixedOutput).unwrap();
        let ab = Correlation::deterministic(Scenario::full_binary(2), |x| vec![0, x[0]]).unwrap();
        let ba = Correlation::deterministic(Scenario::full_binary(2), |x| vec![x[1], 0]).unwrap();
        let expected = Correlation::mix(&[ab, ba], &[q1.clone(), Rational::one() - q1]).unwrap();
        assert_eq!(c, expected);
    }

    #[test]
    fn fixed_output_conditioning_requires_trivial_output() {
        let p = Correlation::<Rational>::uniform(Scenario::lazy(2));
        assert!(p.condition_on_input(0, 0, InputConditioning::FixedOutput).is_err());
        assert!(p.condition_on_input(0, 1, InputConditioning::MarginalizeOutput).is_ok());
        assert!(p.condition_on_input(2, 0, InputConditioning::MarginalizeOutput).is_err());
        assert!(p.condition_on_input(0, 2, InputConditioning::MarginalizeOutput).is_err());
    }

    #[test]
    fn constant_correlation_conditions_to_itself() {
        let s = dyn_scenario();
        let p: Correlation = Correlation::deterministic(s, |_| vec![0, 0, 0]).unwrap();
        let c = p.condition_on_input(0, 1, InputConditioning::FixedOutput).unwrap();
        assert_eq!(c, Correlation::deterministic(Scenario::full_binary(2), |_| vec![0, 0]).unwrap());
    }

    #[test]
    fn per_input_mixture_matches_closed_form() {
        let (q0, q1) = (rational(1, 5), rational(3, 4));
        let direct = dynamical_mixture(q0.clone(), q1.clone());
        let ab = Correlation::deterministic(Scenario::full_binary(2), |x| vec![0, x[0]]).unwrap();
        let ba = Correlation::deterministic(Scenario::full_binary(2), |x| vec![x[1], 0]).unwrap();
        let first = Correlation::<Rational>::deterministic(Scenario::new(vec![PartySpec::new(vec![1, 1])]).unwrap(), |_| vec![0]).unwrap();
        let built = Correlation::sequential_compose(&dyn_scenario(), &[0], &first, |x, _| {
            let q = if x[0] == 0 { q0.clone() } else { q1.clone() };
            Some(Correlation::mix(&[ab.clone(), ba.clone()], &[q.clone(), Rational::one() - q]).unwrap())
        })
        .unwrap();
        assert_eq!(built, direct);
    }

    #[test]
    fn mix_of_one_is_identity_and_checks_weights() {
        let p = dynamical();
        assert_eq!(Correlation::mix(&[p.clone()], &[Rational::one()]).unwrap(), p);
        assert!(Correlation::mix(&[p.clone(), p.clone()], &[rational(1, 2), rational(1, 3)]).is_err());
        let other = Correlation::<Rational>::uniform(Scenario::lazy(3));
        assert!(Correlation::mix(&[p, other], &[rational(1, 2), rational(1, 2)]).is_err());
    }

    #[test]
    fn compose_with_independent_second_is_product() {
        let s = Scenario::lazy(2);
        let first = Correlation::deterministic(Scenario::lazy(1), |x| vec![x[0]]).unwrap();
        let second = Correlation::<Rational>::uniform(Scenario::lazy(1));
        let comp = Correlation::sequential_compose(&s, &[0], &first, |_, _| Some(second.clone())).unwrap();
        assert_eq!(comp, first.tensor(&second).unwrap());
    }

    #[test]
    fn compose_reports_missing_conditional() {
        let s = Scenario::lazy(2);
        let first = Correlation::<Rational>::uniform(Scenario::lazy(1));
        let second = Correlation::<Rational>::uniform(Scenario::lazy(1));
        let r = Correlation::sequential_compose(&s, &[0], &first, |_, a| (a[0] == 0).then(|| second.clone()));
        assert!(r.is_err());
    }

    #[test]
    fn drop_fixed_input_party_recovers_prefix() {
        let prefix = dynamical().condition_on_input(0, 0, InputConditioning::FixedOutput).unwrap();
        let single = Scenario::new(vec![PartySpec::new(vec![3])]).unwrap();
        let last = Correlation::<Rational>::uniform(single);
        let p = prefix.tensor(&last).unwrap();
        assert_eq!(p.drop_fixed_input_party(2).unwrap(), prefix);
        assert!(p.drop_fixed_input_party(0).is_err());
    }

    #[test]
    fn postselection_requires_support() {
        let p: Correlation = Correlation::deterministic(Scenario::full_binary(2), |_| vec![0, 0]).unwrap();
        assert!(p.postselect_output(1, 0, 1, PostSelection::MayBreakCausality).is_err());
        let c = p.postselect_output(1, 0, 0, PostSelection::MayBreakCausality).unwrap();
        assert_eq!(c, Correlation::deterministic(Scenario::full_binary(1), |_| vec![0]).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let p = dynamical_mixture(rational(1, 3), rational(2, 3));
        let text = serde_json::to_string(&p.to_file()).unwrap();
        let back: CorrelationFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_correlation().unwrap(), AnyCorrelation::Rational(p.clone()));
        let f = p.to_f64();
        let text = serde_json::to_string(&f.to_file()).unwrap();
        let back: CorrelationFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_correlation().unwrap(), AnyCorrelation::Float(f.clone()));
        assert_eq!(f.rationalize(1000).unwrap(), p);
    }

    #[test]
    fn permuting_parties_moves_columns() {
        let p: Correlation = Correlation::deterministic(Scenario::full_binary(2), |x| vec![0, x[0]]).unwrap();
        let q = p.permute_parties(&[1, 0]).unwrap();
        assert_eq!(q, Correlation::deterministic(Scenario::full_binary(2), |x| vec![x[1], 0]).unwrap());
    }
}
