//! Quantum instruments in Choi form on `A_k^I ⊗ A_k^O`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::operator::{Operator, OperatorFile, C64};
use super::space::PartySpaces;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Positivity slack accepted by validation.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// One party's instrument for one input value: a Choi operator per outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    pub party: usize,
    pub input: usize,
    pub d_in: usize,
    pub d_out: usize,
    pub ops: Vec<Operator>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstrumentReport {
    pub min_eigenvalue: f64,
    /// Largest entry of `tr_O Σ_a M_a − 1`.
    pub normalization_error: f64,
    pub valid: bool,
}

impl Instrument {
    pub fn new(party: usize, input: usize, d_in: usize, d_out: usize, ops: Vec<Operator>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidOperator("an instrument needs at least one outcome".into()));
        }
        if let Some(op) = ops.iter().find(|o| o.dim() != d_in * d_out) {
            return Err(Error::DimensionMismatch(format!(
                "instrument operator of dimension {} on a {}x{} space",
                op.dim(),
                d_in,
                d_out
            )));
        }
        Ok(Self { party, input, d_in, d_out, ops })
    }

    pub fn outcomes(&self) -> usize {
        self.ops.len()
    }

    /// `tr_O Σ_a M_a`.
    pub fn output_trace(&self) -> Operator {
        let mut sum = Operator::zeros(self.d_in * self.d_out);
        for op in &self.ops {
            sum += op;
        }
        super::space::partial_trace_raw(&sum, self.d_in, self.d_out, 1)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.ops.iter().all(|o| o.is_diagonal(tol))
    }
}

pub fn validate_instrument(ins: &Instrument) -> InstrumentReport {
    validate_instrument_with(ins, PSD_TOLERANCE)
}

pub fn validate_instrument_with(ins: &Instrument, tol: f64) -> InstrumentReport {
    let min_eigenvalue = ins
        .ops
        .iter()
        .map(|o| o.hermitian_part().min_eigenvalue())
        .fold(f64::INFINITY, f64::min);
    let herm = ins.ops.iter().map(|o| o.hermiticity_error()).fold(0.0, f64::max);
    let normalization_error = (&ins.output_trace() - &Operator::identity(ins.d_in)).max_abs();
    InstrumentReport {
        min_eigenvalue,
        normalization_error,
        valid: min_eigenvalue >= -tol && normalization_error <= tol && herm <= tol,
    }
}

/// Instruments of every party for every input, indexed `[party][input]`.
#[derive(Clone, Debug, PartialEq)]
pub struct InstrumentSet {
    pub parties: Vec<Vec<Instrument>>,
}

impl InstrumentSet {
    pub fn get(&self, party: usize, input: usize) -> &Instrument {
        &self.parties[party][input]
    }

    /// Checks shapes against the scenario and spaces.
    pub fn check_shape(&self, scenario: &Scenario, spaces: &PartySpaces) -> Result<()> {
        if self.parties.len() != scenario.num_parties() || spaces.num_parties() != scenario.num_parties() {
            return Err(Error::DimensionMismatch("party counts of instruments, spaces and scenario differ".into()));
        }
        for (k, list) in self.parties.iter().enumerate() {
            if list.len() != scenario.inputs(k) {
                return Err(Error::DimensionMismatch(format!("party {k} has {} instruments", list.len())));
            }
            for (x, ins) in list.iter().enumerate() {
                if ins.outcomes() != scenario.outputs(k, x) {
                    return Err(Error::DimensionMismatch(format!(
                        "party {k} input {x}: {} outcomes, scenario has {}",
                        ins.outcomes(),
                        scenario.outputs(k, x)
                    )));
                }
                if ins.d_in != spaces.input_dim(k) || ins.d_out != spaces.output_dim(k) {
                    return Err(Error::DimensionMismatch(format!("party {k} input {x}: space dimensions differ")));
                }
            }
        }
        Ok(())
    }

    /// First failing `(party, input, report)`, if any.
    pub fn validate(&self, tol: f64) -> Option<(usize, usize, InstrumentReport)> {
        for (k, list) in self.parties.iter().enumerate() {
            for (x, ins) in list.iter().enumerate() {
                let r = validate_instrument_with(ins, tol);
                if !r.valid {
                    return Some((k, x, r));
                }
            }
        }
        None
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.parties.iter().flatten().all(|i| i.is_diagonal(tol))
    }

    pub fn to_file(&self) -> InstrumentFile {
        InstrumentFile {
            parties: self
                .parties
                .iter()
                .map(|list| {
                    list.iter()
                        .map(|ins| {
                            ins.ops
                                .iter()
                                .map(|o| {
                                    OperatorFile::new(o, vec![ins.d_in, ins.d_out], vec!["I".into(), "O".into()])
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// JSON form: `parties[k][x][a]` is the Choi operator of outcome `a`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstrumentFile {
    pub parties: Vec<Vec<Vec<OperatorFile>>>,
}

impl InstrumentFile {
    pub fn into_set(self) -> Result<InstrumentSet> {
        let mut parties = Vec::new();
        for (k, list) in self.parties.into_iter().enumerate() {
            let mut row = Vec::new();
            for (x, ops) in list.into_iter().enumerate() {
                let first = ops.first().ok_or_else(|| Error::Format("empty instrument".into()))?;
                let (d_in, d_out) = match first.dims.as_slice() {
                    [i, o] => (*i, *o),
                    _ => return Err(Error::Format("instrument operators need dims [d_in, d_out]".into())),
                };
                let ops = ops.iter().map(|f| f.to_operator()).collect::<Result<Vec<_>>>()?;
                row.push(Instrument::new(k, x, d_in, d_out, ops)?);
            }
            parties.push(row);
        }
        Ok(InstrumentSet { parties })
    }
}

fn basis_projector(d: usize, i: usize) -> Operator {
    let mut v = vec![C64::new(0.0, 0.0); d];
    v[i] = C64::new(1.0, 0.0);
    Operator::projector(&v)
}

fn lazy_qubit_set(n: usize, input0: &Operator) -> InstrumentSet {
    let p0 = basis_projector(2, 0);
    let p1 = basis_projector(2, 1);
    let m01 = p0.kron(&p1);
    let m11 = p1.kron(&p0);
    InstrumentSet {
        parties: (0..n)
            .map(|k| {
                vec![
                    Instrument::new(k, 0, 2, 2, vec![input0.clone()]).expect("qubit shapes"),
                    Instrument::new(k, 1, 2, 2, vec![m01.clone(), m11.clone()]).expect("qubit shapes"),
                ]
            })
            .collect(),
    }
}

/// Lazy qubit instruments: on input 0 measure in the computational basis
/// and resend the result; on input 1 output the result and send the
/// other basis state.
pub fn measure_resend(parties: usize) -> InstrumentSet {
    let m00 = &basis_projector(2, 0).kron(&basis_projector(2, 0)) + &basis_projector(2, 1).kron(&basis_projector(2, 1));
    lazy_qubit_set(parties, &m00)
}

/// As [`measure_resend`] but input 0 is the identity channel `|1⟩⟩⟨⟨1|`.
pub fn identity_on_0(parties: usize) -> InstrumentSet {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let ket = [one, zero, zero, one];
    lazy_qubit_set(parties, &Operator::projector(&ket))
}

/// Haar-random `d × d` unitary (Gram-Schmidt on a Gaussian matrix).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Operator {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d)
            .map(|_| C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
            .collect();
        for c in &cols {
            let dot: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= dot * ci;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|z| *z /= norm);
            cols.push(v);
        }
    }
    Operator::from_fn(d, |i, j| cols[j][i])
}

/// How a random instrument is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomKind {
    /// Measure in a Haar-random basis; outcome and resent basis state follow
    /// the computational-basis pattern of [`measure_resend`], rotated by a
    /// Haar-random output unitary.
    RotatedMeasureResend,
    /// Measure in a Haar-random basis, assign outcomes at random and prepare
    /// independent Haar-random pure states.
    MeasurePrepare,
}

fn column(u: &Operator, j: usize) -> Vec<C64> {
    (0..u.dim()).map(|i| u.get(i, j)).collect()
}

/// Random valid instrument with `outcomes` outcomes.
pub fn random_instrument<R: Rng + ?Sized>(
    rng: &mut R,
    party: usize,
    input: usize,
    outcomes: usize,
    d_in: usize,
    d_out: usize,
    kind: RandomKind,
) -> Instrument {
    let u = haar_unitary(rng, d_in);
    let v = haar_unitary(rng, d_out);
    let mut ops = vec![Operator::zeros(d_in * d_out); outcomes];
    for i in 0..d_in {
        // Choi form of ρ ↦ ⟨e_i|ρ|e_i⟩ φ uses the conjugate of e_i.
        let e: Vec<C64> = column(&u, i).into_iter().map(|z| z.conj()).collect();
        let (a, phi) = match kind {
            RandomKind::RotatedMeasureResend => {
                let a = if outcomes == 1 { 0 } else { i % outcomes };
                let sent = if outcomes == 1 { i % d_out } else { (i + 1) % d_out };
                (a, column(&v, sent))
            }
            RandomKind::MeasurePrepare => {
                let w = haar_unitary(rng, d_out);
                (rng.gen_range(0..outcomes), column(&w, 0))
            }
        };
        ops[a] += &Operator::projector(&e).kron(&Operator::projector(&phi));
    }
    Instrument { party, input, d_in, d_out, ops }
}

/// Random instruments for every party and input; the kind is drawn per
/// instrument.
pub fn random_instrument_set<R: Rng + ?Sized>(rng: &mut R, scenario: &Scenario, spaces: &PartySpaces) -> InstrumentSet {
    InstrumentSet {
        parties: (0..scenario.num_parties())
            .map(|k| {
                (0..scenario.inputs(k))
                    .map(|x| {
                        let kind = if rng.gen_bool(0.5) { RandomKind::RotatedMeasureResend } else { RandomKind::MeasurePrepare };
                        random_instrument(rng, k, x, scenario.outputs(k, x), spaces.input_dim(k), spaces.output_dim(k), kind)
                    })
                    .collect()
            })
            .collect(),
    }
}
