//! Deterministic strategies, causal witnesses and the enumeration of the
//! deterministic causal strategies (the vertices of the causal polytope).

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::Correlation;
use crate::error::{Error, Result};
use crate::number::Probability;
use crate::scenario::Scenario;

/// A function from input tuples to output tuples.
///
/// Stored as one output per (input tuple, party), row-major by input tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    scenario: Scenario,
    outputs: Vec<u8>,
}

impl DeterministicStrategy {
    /// Builds a strategy from `alpha(x) = a`.
    pub fn from_fn(scenario: Scenario, mut alpha: impl FnMut(&[usize]) -> Vec<usize>) -> Result<Self> {
        let n = scenario.num_parties();
        let mut outputs = Vec::with_capacity(scenario.num_inputs() * n);
        for xi in 0..scenario.num_inputs() {
            let x = scenario.input_tuple(xi);
            let a = alpha(&x);
            scenario.checked_entry_index(&x, &a)?;
            outputs.extend(a.iter().map(|&v| v as u8));
        }
        Ok(Self { scenario, outputs })
    }

    /// Builds a strategy from the output-tuple index of every block.
    pub fn from_block_indices(scenario: Scenario, indices: &[u32]) -> Result<Self> {
        if indices.len() != scenario.num_inputs() {
            return Err(Error::DimensionMismatch(format!(
                "{} block indices for {} input tuples",
                indices.len(),
                scenario.num_inputs()
            )));
        }
        let n = scenario.num_parties();
        let mut outputs = Vec::with_capacity(indices.len() * n);
        for (xi, &ai) in indices.iter().enumerate() {
            if ai as usize >= scenario.block_size(xi) {
                return Err(Error::OutOfRange(format!("output index {ai} in block {xi}")));
            }
            let x = scenario.input_tuple(xi);
            outputs.extend(scenario.output_tuple(&x, ai as usize).into_iter().map(|v| v as u8));
        }
        Ok(Self { scenario, outputs })
    }

    /// Reads a deterministic correlation back as a strategy.
    pub fn from_correlation<T: Probability>(corr: &Correlation<T>) -> Option<Self> {
        let s = corr.scenario();
        let mut indices = Vec::with_capacity(s.num_inputs());
        for xi in 0..s.num_inputs() {
            let block = corr.block(xi);
            let pos = block.iter().position(|p| p.is_unit())?;
            if block.iter().enumerate().any(|(i, p)| i != pos && !p.is_zero()) {
                return None;
            }
            indices.push(pos as u32);
        }
        Self::from_block_indices(s.clone(), &indices).ok()
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Output of `party` on input tuple `xi`.
    pub fn output(&self, xi: usize, party: usize) -> usize {
        self.outputs[xi * self.scenario.num_parties() + party] as usize
    }

    pub fn outputs_for(&self, xi: usize) -> Vec<usize> {
        let n = self.scenario.num_parties();
        self.outputs[xi * n..(xi + 1) * n].iter().map(|&v| v as usize).collect()
    }

    pub fn apply(&self, x: &[usize]) -> Vec<usize> {
        self.outputs_for(self.scenario.input_index(x))
    }

    /// Output-tuple index within block `xi`.
    pub fn block_index(&self, xi: usize) -> u32 {
        let x = self.scenario.input_tuple(xi);
        self.scenario.output_index(&x, &self.outputs_for(xi)) as u32
    }

    pub fn block_indices(&self) -> Vec<u32> {
        (0..self.scenario.num_inputs()).map(|xi| self.block_index(xi)).collect()
    }

    pub fn to_correlation<T: Probability>(&self) -> Correlation<T> {
        Correlation::deterministic(self.scenario.clone(), |x| self.apply(x)).expect("strategy outputs are in range")
    }

    /// Bitmask of parties whose input `party`'s output depends on.
    pub fn dependencies(&self, party: usize) -> u64 {
        dependency_mask(&self.scenario, &self.outputs, party)
    }
}

/// A recursive certificate that a deterministic strategy is causal.
///
/// `party` acts first, answering `response[x_party]`; for each of its inputs
/// `children[x_party]` certifies the remaining parties. Leaves have no
/// children.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalWitness {
    pub party: usize,
    pub response: Vec<usize>,
    pub children: Vec<CausalWitness>,
}

impl CausalWitness {
    /// Outputs produced on input tuple `x` by replaying the tree.
    pub fn evaluate(&self, x: &[usize]) -> Vec<usize> {
        let mut a = vec![0; x.len()];
        let mut node = Some(self);
        while let Some(w) = node {
            let xk = x[w.party];
            a[w.party] = w.response[xk];
            node = w.children.get(xk);
        }
        a
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }
}

/// The order in which parties act on input tuple `x` under `witness`.
pub fn causal_order_for_input(witness: &CausalWitness, x: &[usize]) -> Vec<usize> {
    let mut order = Vec::new();
    let mut node = Some(witness);
    while let Some(w) = node {
        order.push(w.party);
        node = w.children.get(x[w.party]);
    }
    order
}

/// Searches for a causal witness; parties are tried in ascending order at
/// every level.
pub fn is_causal_deterministic(strategy: &DeterministicStrategy) -> Option<CausalWitness> {
    let s = &strategy.scenario;
    let n = s.num_parties();
    let mut fixed = vec![None; n];
    let remaining: Vec<usize> = (0..n).collect();
    witness_search(s, &strategy.outputs, &remaining, &mut fixed)
}

fn witness_search(
    s: &Scenario,
    outputs: &[u8],
    remaining: &[usize],
    fixed: &mut Vec<Option<usize>>,
) -> Option<CausalWitness> {
    let n = s.num_parties();
    let consistent = |xi: usize, fixed: &[Option<usize>]| {
        fixed
            .iter()
            .enumerate()
            .all(|(j, f)| f.map_or(true, |v| s.input_of(xi, j) == v))
    };
    'party: for (pos, &k) in remaining.iter().enumerate() {
        let mut response = vec![usize::MAX; s.inputs(k)];
        for xi in 0..s.num_inputs() {
            if !consistent(xi, fixed) {
                continue;
            }
            let xk = s.input_of(xi, k);
            let a = outputs[xi * n + k] as usize;
            if response[xk] == usize::MAX {
                response[xk] = a;
            } else if response[xk] != a {
                continue 'party;
            }
        }
        let rest: Vec<usize> = remaining
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pos)
            .map(|(_, &j)| j)
            .collect();
        let mut children = Vec::new();
        if !rest.is_empty() {
            for v in 0..s.inputs(k) {
                fixed[k] = Some(v);
                let child = witness_search(s, outputs, &rest, fixed);
                fixed[k] = None;
                match child {
                    Some(c) => children.push(c),
                    None => continue 'party,
                }
            }
        }
        return Some(CausalWitness { party: k, response, children });
    }
    None
}

/// Whether a causal vertex is compatible with one fixed causal order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VertexClass {
    FixedOrder,
    Dynamical,
}

/// Fixed-order iff the "output of j depends on input of i" relation between
/// distinct parties is acyclic.
pub fn classify_vertex(strategy: &DeterministicStrategy) -> Result<VertexClass> {
    if is_causal_deterministic(strategy).is_none() {
        return Err(Error::NotCausal);
    }
    Ok(classify_outputs(&strategy.scenario, &strategy.outputs))
}

fn classify_outputs(s: &Scenario, outputs: &[u8]) -> VertexClass {
    let n = s.num_parties();
    let deps: Vec<u64> = (0..n)
        .map(|j| dependency_mask(s, outputs, j) & !(1u64 << j))
        .collect();
    // Kahn's algorithm on "i before j" edges.
    let mut placed = 0u64;
    for _ in 0..n {
        match (0..n).find(|&j| placed & (1 << j) == 0 && deps[j] & !placed == 0) {
            Some(j) => placed |= 1 << j,
            None => return VertexClass::Dynamical,
        }
    }
    VertexClass::FixedOrder
}

fn dependency_mask(s: &Scenario, outputs: &[u8], party: usize) -> u64 {
    let n = s.num_parties();
    let mut mask = 0u64;
    for i in 0..n {
        let stride = s.input_stride(i);
        'scan: for xi in 0..s.num_inputs() {
            if s.input_of(xi, i) != 0 {
                continue;
            }
            let base = outputs[xi * n + party];
            for v in 1..s.inputs(i) {
                if outputs[(xi + v * stride) * n + party] != base {
                    mask |= 1 << i;
                    break 'scan;
                }
            }
        }
    }
    mask
}

/// Limits for [`enumerate_causal_vertices`].
#[derive(Clone, Debug)]
pub struct EnumerationOptions {
    /// Maximal number of distinct vertices kept in memory.
    pub max_vertices: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self { max_vertices: 20_000_000 }
    }
}

/// Deduplicated causal vertices of a scenario in enumeration order.
///
/// Each vertex is stored as a mixed-radix key over its block indices: the
/// digit of input tuple `xi` has weight `Π_{x' < xi} block_size(x')`.
#[derive(Clone, Debug)]
pub struct VertexSet {
    scenario: Scenario,
    keys: Vec<u128>,
}

impl VertexSet {
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[u128] {
        &self.keys
    }

    /// Builds a set from explicit strategies, dropping duplicates.
    pub fn from_strategies(scenario: Scenario, strategies: impl IntoIterator<Item = DeterministicStrategy>) -> Result<Self> {
        let radices = radices(&scenario)?;
        let mut seen = HashSet::new();
        let mut keys = Vec::new();
        for st in strategies {
            if st.scenario != scenario {
                return Err(Error::ScenarioMismatch("strategy from another scenario".into()));
            }
            let key = st
                .block_indices()
                .iter()
                .zip(&radices)
                .map(|(&d, &r)| d as u128 * r)
                .sum();
            if seen.insert(key) {
                keys.push(key);
            }
        }
        Ok(Self { scenario, keys })
    }

    /// Builds a set from raw block-index records, dropping duplicates.
    pub fn from_block_indices(scenario: Scenario, records: impl IntoIterator<Item = Result<Vec<u32>>>) -> Result<Self> {
        let radices = radices(&scenario)?;
        let mut seen = HashSet::new();
        let mut keys = Vec::new();
        for rec in records {
            let rec = rec?;
            if rec.len() != scenario.num_inputs() {
                return Err(Error::DimensionMismatch("record length".into()));
            }
            let key = rec.iter().zip(&radices).map(|(&d, &r)| d as u128 * r).sum();
            if seen.insert(key) {
                keys.push(key);
            }
        }
        Ok(Self { scenario, keys })
    }

    /// Block indices of vertex `i`.
    pub fn block_indices(&self, i: usize) -> Vec<u32> {
        let mut out = vec![0u32; self.scenario.num_inputs()];
        self.decode_into(i, &mut out);
        out
    }

    pub fn decode_into(&self, i: usize, out: &mut [u32]) {
        decode_key(&self.scenario, self.keys[i], out)
    }

    pub fn get(&self, i: usize) -> DeterministicStrategy {
        DeterministicStrategy::from_block_indices(self.scenario.clone(), &self.block_indices(i))
            .expect("stored keys decode to valid strategies")
    }

    pub fn iter(&self) -> impl Iterator<Item = DeterministicStrategy> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Positions of the unit coordinates of vertex `i` in the
    /// parametrization.
    pub fn ones(&self, i: usize) -> Vec<usize> {
        let s = &self.scenario;
        let mut digits = vec![0u32; s.num_inputs()];
        self.decode_into(i, &mut digits);
        digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > 0)
            .map(|(xi, &d)| s.coord_offset(xi) + d as usize - 1)
            .collect()
    }

    /// Keeps the vertices for which `pred` holds.
    pub fn filter(&self, mut pred: impl FnMut(&DeterministicStrategy) -> bool) -> Self {
        let keys = (0..self.len())
            .filter(|&i| pred(&self.get(i)))
            .map(|i| self.keys[i])
            .collect();
        Self { scenario: self.scenario.clone(), keys }
    }

    /// Vertex classes in set order.
    pub fn classify_all(&self) -> Vec<VertexClass> {
        let s = &self.scenario;
        let n = s.num_parties();
        (0..self.len())
            .into_par_iter()
            .map_init(
                || (vec![0u32; s.num_inputs()], vec![0u8; s.num_inputs() * n]),
                |(digits, outputs), i| {
                    self.decode_into(i, digits);
                    fill_outputs(s, digits, outputs);
                    classify_outputs(s, outputs)
                },
            )
            .collect()
    }

    pub fn fixed_order_subset(&self) -> Self {
        let classes = self.classify_all();
        let keys = self
            .keys
            .iter()
            .zip(classes)
            .filter(|(_, c)| *c == VertexClass::FixedOrder)
            .map(|(&k, _)| k)
            .collect();
        Self { scenario: self.scenario.clone(), keys }
    }
}

fn fill_outputs(s: &Scenario, digits: &[u32], outputs: &mut [u8]) {
    let n = s.num_parties();
    for (xi, &d) in digits.iter().enumerate() {
        let mut rest = d as usize;
        for k in 0..n {
            let o = s.outputs(k, s.input_of(xi, k));
            outputs[xi * n + k] = (rest % o) as u8;
            rest /= o;
        }
    }
}

fn radices(s: &Scenario) -> Result<Vec<u128>> {
    s.strategy_space_size().ok_or_else(|| {
        Error::InvalidScenario("strategy space too large for 128-bit vertex keys".into())
    })?;
    let mut r = Vec::with_capacity(s.num_inputs());
    let mut acc = 1u128;
    for xi in 0..s.num_inputs() {
        r.push(acc);
        acc *= s.block_size(xi) as u128;
    }
    Ok(r)
}

fn decode_key(s: &Scenario, mut key: u128, out: &mut [u32]) {
    for (xi, o) in out.iter_mut().enumerate() {
        let b = s.block_size(xi) as u128;
        *o = (key % b) as u32;
        key /= b;
    }
}

/// Enumerates the deterministic causal strategies of `scenario`.
///
/// Built recursively: a first party `k`, its response function `f`, and for
/// every input of `k` a causal strategy of the remaining parties. Branches
/// are visited by ascending `k`, then `f` and the sub-strategies in
/// lexicographic order; the first occurrence of every function is kept.
pub fn enumerate_causal_vertices(scenario: &Scenario, opts: &EnumerationOptions) -> Result<VertexSet> {
    let rad = radices(scenario)?;
    let n = scenario.num_parties();
    if n == 1 {
        let total = scenario.strategy_space_size().expect("checked above");
        if total > opts.max_vertices as u128 {
            return Err(Error::BudgetExceeded {
                what: "single-party strategies".into(),
                partial: 0,
            });
        }
        // Every single-party function is causal; list them lexicographically
        // in (a(0), a(1), ...).
        let mut keys: Vec<u128> = (0..total).collect();
        keys.sort_by_key(|&k| {
            let mut d = vec![0u32; scenario.num_inputs()];
            decode_key(scenario, k, &mut d);
            d
        });
        return Ok(VertexSet { scenario: scenario.clone(), keys });
    }

    let mut seen: HashSet<u128> = HashSet::new();
    let mut keys: Vec<u128> = Vec::new();
    for k in 0..n {
        let rest: Vec<usize> = (0..n).filter(|&j| j != k).collect();
        let sub = scenario.restrict(&rest)?;
        let sub_set = enumerate_causal_vertices(&sub, opts)?;
        let m = scenario.inputs(k);

        // Contribution of the sub-strategies placed under x_k = v.
        let g: Vec<Vec<u128>> = (0..m)
            .map(|v| sub_contributions(scenario, &rad, k, v, &rest, &sub, &sub_set))
            .collect();

        // Response functions of party k, lexicographic in (f(0), f(1), ...).
        let alphabet: Vec<usize> = scenario.parties()[k].outputs.clone();
        let mut f = vec![0usize; m];
        loop {
            let fk = first_contribution(scenario, &rad, k, &f);
            enumerate_branch(fk, &g, &mut seen, &mut keys, opts.max_vertices)?;
            if !odometer(&mut f, &alphabet) {
                break;
            }
        }
    }
    log::debug!("enumerated {} causal vertices", keys.len());
    Ok(VertexSet { scenario: scenario.clone(), keys })
}

/// Advances `digits` lexicographically (last position fastest); returns
/// false after the last tuple.
fn odometer(digits: &mut [usize], bases: &[usize]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < bases[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}

fn first_contribution(s: &Scenario, rad: &[u128], k: usize, f: &[usize]) -> u128 {
    (0..s.num_inputs())
        .map(|xi| {
            let x = s.input_tuple(xi);
            f[x[k]] as u128 * s.output_stride(&x, k) as u128 * rad[xi]
        })
        .sum()
}

fn sub_contributions(
    s: &Scenario,
    rad: &[u128],
    k: usize,
    v: usize,
    rest: &[usize],
    sub: &Scenario,
    sub_set: &VertexSet,
) -> Vec<u128> {
    // Weight of every (sub input tuple, sub party) output digit.
    let mut weights = Vec::with_capacity(sub.num_inputs() * rest.len());
    for sxi in 0..sub.num_inputs() {
        let sx = sub.input_tuple(sxi);
        let mut x = vec![0usize; s.num_parties()];
        x[k] = v;
        for (&j, &xj) in rest.iter().zip(&sx) {
            x[j] = xj;
        }
        let xi = s.input_index(&x);
        for &j in rest {
            weights.push(s.output_stride(&x, j) as u128 * rad[xi]);
        }
    }
    let nsub = rest.len();
    (0..sub_set.len())
        .into_par_iter()
        .map_init(
            || (vec![0u32; sub.num_inputs()], vec![0u8; sub.num_inputs() * nsub]),
            |(digits, outs), i| {
                sub_set.decode_into(i, digits);
                fill_outputs(sub, digits, outs);
                outs.iter().zip(&weights).map(|(&o, &w)| o as u128 * w).sum()
            },
        )
        .collect()
}

fn enumerate_branch(
    base: u128,
    g: &[Vec<u128>],
    seen: &mut HashSet<u128>,
    keys: &mut Vec<u128>,
    budget: usize,
) -> Result<()> {
    let m = g.len();
    if m == 1 {
        return insert_keys(g[0].iter().map(|&x| base + x), seen, keys, budget);
    }
    // Parallelize over the leading m-1 choices; the last one is a flat scan.
    let bases: Vec<usize> = g[..m - 1].iter().map(|v| v.len()).collect();
    if bases.iter().any(|&b| b == 0) || g[m - 1].is_empty() {
        return Ok(());
    }
    let mut prefix = vec![0usize; m - 1];
    const BATCH: usize = 256;
    loop {
        let mut batch = Vec::with_capacity(BATCH);
        let mut more = true;
        while batch.len() < BATCH {
            batch.push(prefix.iter().enumerate().map(|(v, &i)| g[v][i]).sum::<u128>() + base);
            if !odometer(&mut prefix, &bases) {
                more = false;
                break;
            }
        }
        let last = &g[m - 1];
        let chunks: Vec<Vec<u128>> = batch
            .par_iter()
            .map(|&p| last.iter().map(|&x| p + x).collect())
            .collect();
        for c in chunks {
            insert_keys(c.into_iter(), seen, keys, budget)?;
        }
        if !more {
            return Ok(());
        }
    }
}

fn insert_keys(
    it: impl Iterator<Item = u128>,
    seen: &mut HashSet<u128>,
    keys: &mut Vec<u128>,
    budget: usize,
) -> Result<()> {
    for key in it {
        if seen.insert(key) {
            if keys.len() >= budget {
                return Err(Error::BudgetExceeded {
                    what: "causal vertex enumeration".into(),
                    partial: keys.len(),
                });
            }
            keys.push(key);
        }
    }
    Ok(())
}

/// All deterministic strategies of a scenario, causal or not. Only sensible
/// for tiny scenarios.
pub fn all_strategies(scenario: &Scenario) -> Result<impl Iterator<Item = DeterministicStrategy> + '_> {
    let total = scenario
        .strategy_space_size()
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::BudgetExceeded { what: "brute-force strategy listing".into(), partial: 0 })?;
    Ok((0..total).map(move |key| {
        let mut d = vec![0u32; scenario.num_inputs()];
        decode_key(scenario, key, &mut d);
        DeterministicStrategy::from_block_indices(scenario.clone(), &d).expect("in range")
    }))
}
