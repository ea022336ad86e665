//! Scenarios: number of parties, input alphabets, and per-input output
//! alphabets, together with the canonical layout of correlation tables.
//!
//! Input tuples are ordered lexicographically with party 1 varying fastest;
//! within an input tuple, output tuples are ordered the same way.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Alphabet sizes of one party.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartySpec {
    pub inputs: usize,
    pub outputs: Vec<usize>,
}

impl PartySpec {
    pub fn new(outputs: Vec<usize>) -> Self {
        Self { inputs: outputs.len(), outputs }
    }
}

#[derive(Debug, PartialEq, Eq)]
struct Layout {
    parties: Vec<PartySpec>,
    num_inputs: usize,
    /// Input-tuple stride per party.
    input_strides: Vec<usize>,
    block_sizes: Vec<usize>,
    block_offsets: Vec<usize>,
    coord_offsets: Vec<usize>,
    num_entries: usize,
    dimension: usize,
}

/// A fixed scenario. Cheap to clone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioRepr", into = "ScenarioRepr")]
pub struct Scenario {
    layout: Arc<Layout>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioRepr {
    parties: Vec<PartySpec>,
}

impl TryFrom<ScenarioRepr> for Scenario {
    type Error = Error;

    fn try_from(r: ScenarioRepr) -> Result<Self> {
        Scenario::new(r.parties)
    }
}

impl From<Scenario> for ScenarioRepr {
    fn from(s: Scenario) -> Self {
        ScenarioRepr { parties: s.layout.parties.clone() }
    }
}

impl std::hash::Hash for Scenario {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.layout.parties.hash(state)
    }
}

impl Scenario {
    pub fn new(parties: Vec<PartySpec>) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::InvalidScenario("at least one party is required".into()));
        }
        for (k, p) in parties.iter().enumerate() {
            if p.inputs == 0 || p.outputs.len() != p.inputs {
                return Err(Error::InvalidScenario(format!(
                    "party {k}: {} inputs but {} output alphabets",
                    p.inputs,
                    p.outputs.len()
                )));
            }
            if p.outputs.iter().any(|&o| o == 0) {
                return Err(Error::InvalidScenario(format!("party {k}: empty output alphabet")));
            }
            if p.outputs.iter().any(|&o| o > 256) {
                return Err(Error::InvalidScenario(format!(
                    "party {k}: output alphabets above 256 symbols are not supported"
                )));
            }
        }
        let mut input_strides = Vec::with_capacity(parties.len());
        let mut num_inputs = 1usize;
        for p in &parties {
            input_strides.push(num_inputs);
            num_inputs = num_inputs
                .checked_mul(p.inputs)
                .ok_or_else(|| Error::InvalidScenario("too many input tuples".into()))?;
        }
        let mut block_sizes = Vec::with_capacity(num_inputs);
        let mut block_offsets = Vec::with_capacity(num_inputs);
        let mut coord_offsets = Vec::with_capacity(num_inputs);
        let (mut entries, mut coords) = (0usize, 0usize);
        for xi in 0..num_inputs {
            let mut size = 1usize;
            let mut rest = xi;
            for p in &parties {
                let x = rest % p.inputs;
                rest /= p.inputs;
                size = size
                    .checked_mul(p.outputs[x])
                    .ok_or_else(|| Error::InvalidScenario("output block too large".into()))?;
            }
            block_sizes.push(size);
            block_offsets.push(entries);
            coord_offsets.push(coords);
            entries += size;
            coords += size - 1;
        }
        Ok(Self {
            layout: Arc::new(Layout {
                parties,
                num_inputs,
                input_strides,
                block_sizes,
                block_offsets,
                coord_offsets,
                num_entries: entries,
                dimension: coords,
            }),
        })
    }

    /// Every party has a binary input; input 0 has a single output and
    /// input 1 a binary output.
    pub fn lazy(n: usize) -> Self {
        Self::new(vec![PartySpec::new(vec![1, 2]); n]).expect("valid lazy scenario")
    }

    /// Binary inputs and binary outputs for every party.
    pub fn full_binary(n: usize) -> Self {
        Self::new(vec![PartySpec::new(vec![2, 2]); n]).expect("valid binary scenario")
    }

    pub fn parties(&self) -> &[PartySpec] {
        &self.layout.parties
    }

    pub fn num_parties(&self) -> usize {
        self.layout.parties.len()
    }

    pub fn inputs(&self, party: usize) -> usize {
        self.layout.parties[party].inputs
    }

    pub fn outputs(&self, party: usize, input: usize) -> usize {
        self.layout.parties[party].outputs[input]
    }

    /// Number of input tuples.
    pub fn num_inputs(&self) -> usize {
        self.layout.num_inputs
    }

    /// Total number of table entries.
    pub fn num_entries(&self) -> usize {
        self.layout.num_entries
    }

    /// Number of free parameters once every block is normalized.
    pub fn dimension(&self) -> usize {
        self.layout.dimension
    }

    pub fn block_size(&self, xi: usize) -> usize {
        self.layout.block_sizes[xi]
    }

    pub fn block_offset(&self, xi: usize) -> usize {
        self.layout.block_offsets[xi]
    }

    /// Offset of the first coordinate of block `xi` in the parametrization.
    pub fn coord_offset(&self, xi: usize) -> usize {
        self.layout.coord_offsets[xi]
    }

    pub fn input_stride(&self, party: usize) -> usize {
        self.layout.input_strides[party]
    }

    pub fn input_index(&self, x: &[usize]) -> usize {
        debug_assert_eq!(x.len(), self.num_parties());
        x.iter()
            .zip(&self.layout.input_strides)
            .map(|(xk, s)| xk * s)
            .sum()
    }

    pub fn checked_input_index(&self, x: &[usize]) -> Result<usize> {
        if x.len() != self.num_parties() {
            return Err(Error::OutOfRange(format!(
                "input tuple of length {} for {} parties",
                x.len(),
                self.num_parties()
            )));
        }
        for (k, &xk) in x.iter().enumerate() {
            if xk >= self.inputs(k) {
                return Err(Error::OutOfRange(format!("input {xk} for party {k}")));
            }
        }
        Ok(self.input_index(x))
    }

    pub fn input_tuple(&self, xi: usize) -> Vec<usize> {
        let mut rest = xi;
        self.layout
            .parties
            .iter()
            .map(|p| {
                let x = rest % p.inputs;
                rest /= p.inputs;
                x
            })
            .collect()
    }

    /// Input value of one party within input tuple `xi`.
    pub fn input_of(&self, xi: usize, party: usize) -> usize {
        (xi / self.layout.input_strides[party]) % self.layout.parties[party].inputs
    }

    /// Stride of party `party`'s output inside the block of input tuple `x`.
    pub fn output_stride(&self, x: &[usize], party: usize) -> usize {
        (0..party).map(|j| self.outputs(j, x[j])).product()
    }

    pub fn output_index(&self, x: &[usize], a: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (k, (&xk, &ak)) in x.iter().zip(a).enumerate() {
            idx += ak * stride;
            stride *= self.outputs(k, xk);
        }
        idx
    }

    pub fn output_tuple(&self, x: &[usize], ai: usize) -> Vec<usize> {
        let mut rest = ai;
        x.iter()
            .enumerate()
            .map(|(k, &xk)| {
                let o = self.outputs(k, xk);
                let a = rest % o;
                rest /= o;
                a
            })
            .collect()
    }

    /// Flat entry index of `(x, a)`.
    pub fn entry_index(&self, x: &[usize], a: &[usize]) -> usize {
        self.block_offset(self.input_index(x)) + self.output_index(x, a)
    }

    pub fn checked_entry_index(&self, x: &[usize], a: &[usize]) -> Result<usize> {
        let xi = self.checked_input_index(x)?;
        if a.len() != x.len() {
            return Err(Error::OutOfRange("output tuple length".into()));
        }
        for (k, (&xk, &ak)) in x.iter().zip(a).enumerate() {
            if ak >= self.outputs(k, xk) {
                return Err(Error::OutOfRange(format!("output {ak} of party {k} on input {xk}")));
            }
        }
        Ok(self.block_offset(xi) + self.output_index(x, a))
    }

    /// Number of deterministic functions from input tuples to output tuples,
    /// if it fits in a `u128`.
    pub fn strategy_space_size(&self) -> Option<u128> {
        self.layout
            .block_sizes
            .iter()
            .try_fold(1u128, |acc, &b| acc.checked_mul(b as u128))
    }

    /// The scenario restricted to the given parties (in the given order).
    pub fn restrict(&self, parties: &[usize]) -> Result<Scenario> {
        let specs = parties
            .iter()
            .map(|&k| {
                self.layout
                    .parties
                    .get(k)
                    .cloned()
                    .ok_or_else(|| Error::OutOfRange(format!("party {k}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Scenario::new(specs)
    }

    /// Stable content hash (SHA-256 over the canonical JSON form).
    pub fn content_hash(&self) -> [u8; 32] {
        let json = serde_json::to_vec(self).expect("scenario serializes");
        Sha256::digest(&json).into()
    }
}
