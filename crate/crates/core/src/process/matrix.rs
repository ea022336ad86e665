//! Process matrices, their validity, and the generalized Born rule.

use serde::Serialize;

use super::instrument::{self, InstrumentSet, PSD_TOLERANCE};
use super::operator::{pauli_product, Operator, OperatorFile};
use super::space::{permute_parties, OrderConstraint, PartySpaces};
use crate::correlation::Correlation;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Hermitian operator on `⊗_k (A_k^I ⊗ A_k^O)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    spaces: PartySpaces,
    op: Operator,
    classical: bool,
}

impl ProcessMatrix {
    pub fn new(spaces: PartySpaces, op: Operator) -> Result<Self> {
        if op.dim() != spaces.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator of dimension {} on spaces of dimension {}",
                op.dim(),
                spaces.total_dim()
            )));
        }
        if op.hermiticity_error() > 1e-12 {
            return Err(Error::InvalidOperator("process matrix must be Hermitian".into()));
        }
        let classical = op.is_diagonal(1e-12);
        Ok(Self { spaces, op, classical })
    }

    pub fn maximally_mixed(spaces: PartySpaces) -> Self {
        let op = spaces.maximally_mixed();
        Self { spaces, op, classical: true }
    }

    pub fn spaces(&self) -> &PartySpaces {
        &self.spaces
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    /// Diagonal in the computational basis.
    pub fn is_classical(&self) -> bool {
        self.classical
    }

    pub fn to_file(&self) -> OperatorFile {
        OperatorFile::new(&self.op, self.spaces.factor_dims(), self.spaces.factor_labels())
    }

    /// Reads a file whose factors come in `(input, output)` pairs.
    pub fn from_file(file: &OperatorFile) -> Result<Self> {
        if file.dims.len() % 2 != 0 || file.dims.is_empty() {
            return Err(Error::Format("process matrix factors must come in input/output pairs".into()));
        }
        let spaces = PartySpaces::new(file.dims.chunks(2).map(|c| (c[0], c[1])).collect())?;
        Self::new(spaces, file.to_operator()?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProcessReport {
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub expected_trace: f64,
    /// Largest entry of `W − P(W)` for the valid-subspace projector `P`.
    pub subspace_residual: f64,
    /// Largest entry removed by the order constraint, when one was checked.
    pub order_residual: Option<f64>,
    pub valid: bool,
}

impl ProcessReport {
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.min_eigenvalue < -PSD_TOLERANCE {
            out.push(format!("negative eigenvalue {:.3e}", self.min_eigenvalue));
        }
        if (self.trace - self.expected_trace).abs() > PSD_TOLERANCE {
            out.push(format!("trace {} instead of {}", self.trace, self.expected_trace));
        }
        if self.subspace_residual > PSD_TOLERANCE {
            out.push(format!("outside the valid subspace by {:.3e}", self.subspace_residual));
        }
        if let Some(r) = self.order_residual.filter(|&r| r > PSD_TOLERANCE) {
            out.push(format!("violates the order constraint by {r:.3e}"));
        }
        out
    }
}

pub fn validate_process(w: &ProcessMatrix) -> ProcessReport {
    validate_process_with(w, OrderConstraint::Free, PSD_TOLERANCE)
}

/// Positivity, trace and subspace membership within `tol`, plus the
/// order constraint if requested.
pub fn validate_process_with(w: &ProcessMatrix, order: OrderConstraint, tol: f64) -> ProcessReport {
    let s = &w.spaces;
    let op = &w.op;
    let hermiticity_error = op.hermiticity_error();
    let min_eigenvalue = op.hermitian_part().min_eigenvalue();
    let trace = op.trace().re;
    let expected_trace = s.output_product() as f64;
    let subspace_residual = (op - &s.valid_projection(op)).max_abs();
    let order_residual = match order {
        OrderConstraint::Free => None,
        o => Some((op - &s.order_projection(op, o)).max_abs()),
    };
    let valid = hermiticity_error <= tol
        && min_eigenvalue >= -tol
        && (trace - expected_trace).abs() <= tol * expected_trace.max(1.0)
        && subspace_residual <= tol
        && order_residual.map_or(true, |r| r <= tol);
    ProcessReport { hermiticity_error, min_eigenvalue, trace, expected_trace, subspace_residual, order_residual, valid }
}

/// `tr[(⊗_k M_k) W]`.
pub fn product_expectation(w: &Operator, ops: &[&Operator]) -> f64 {
    let m = Operator::kron_all(ops.iter().copied());
    m.inner(w)
}

fn check_inputs(w: &ProcessMatrix, ins: &InstrumentSet, scenario: &Scenario) -> Result<()> {
    ins.check_shape(scenario, &w.spaces)?;
    let report = validate_process(w);
    if !report.valid {
        return Err(Error::InvalidOperator(format!("invalid process matrix: {}", report.diagnostics().join("; "))));
    }
    if let Some((k, x, r)) = ins.validate(PSD_TOLERANCE) {
        return Err(Error::InvalidOperator(format!(
            "invalid instrument for party {k}, input {x}: min eigenvalue {:.3e}, normalization error {:.3e}",
            r.min_eigenvalue, r.normalization_error
        )));
    }
    Ok(())
}

/// Distribution `P(a⃗|x⃗) = tr[(⊗_k M_{a_k|x_k}) W]` over output tuples in
/// canonical order. Refuses invalid inputs.
pub fn born_rule(w: &ProcessMatrix, ins: &InstrumentSet, scenario: &Scenario, x: &[usize]) -> Result<Vec<f64>> {
    check_inputs(w, ins, scenario)?;
    let xi = scenario.checked_input_index(x)?;
    Ok(born_block(w, ins, scenario, xi))
}

/// [`born_rule`] without validity checks.
pub fn born_rule_unchecked(w: &ProcessMatrix, ins: &InstrumentSet, scenario: &Scenario, x: &[usize]) -> Result<Vec<f64>> {
    ins.check_shape(scenario, &w.spaces)?;
    let xi = scenario.checked_input_index(x)?;
    Ok(born_block(w, ins, scenario, xi))
}

fn born_block(w: &ProcessMatrix, ins: &InstrumentSet, scenario: &Scenario, xi: usize) -> Vec<f64> {
    let x = scenario.input_tuple(xi);
    (0..scenario.block_size(xi))
        .map(|ai| {
            let a = scenario.output_tuple(&x, ai);
            let ops: Vec<&Operator> = (0..x.len()).map(|k| &ins.get(k, x[k]).ops[a[k]]).collect();
            product_expectation(&w.op, &ops)
        })
        .collect()
}

/// The full correlation produced by `W` and the instruments.
pub fn born_correlation(w: &ProcessMatrix, ins: &InstrumentSet, scenario: &Scenario) -> Result<Correlation<f64>> {
    check_inputs(w, ins, scenario)?;
    born_correlation_unchecked(w, ins, scenario)
}

pub fn born_correlation_unchecked(w: &ProcessMatrix, ins: &InstrumentSet, scenario: &Scenario) -> Result<Correlation<f64>> {
    ins.check_shape(scenario, &w.spaces)?;
    let table: Vec<f64> = (0..scenario.num_inputs()).flat_map(|xi| born_block(w, ins, scenario, xi)).collect();
    Correlation::new(scenario.clone(), table)
}

fn pauli_sum(terms: &[(f64, &str)]) -> Operator {
    let mut out = Operator::zeros(64);
    for (c, t) in terms {
        out.axpy(*c, &pauli_product(t).expect("built-in Pauli strings parse"));
    }
    out
}

/// Classical tripartite process reaching the algebraic minimum of I1.
pub fn w1() -> ProcessMatrix {
    let mut op = pauli_sum(&[
        (1.0, "111111"),
        (-0.5, "Z11111"),
        (-0.5, "11Z111"),
        (-0.5, "1111Z1"),
        (0.5, "Z1Z1Z1"),
        (-0.5, "(1-Z)Z(1-Z)ZZ1"),
        (-0.5, "Z1(1-Z)Z(1-Z)Z"),
        (-0.5, "(1-Z)ZZ1(1-Z)Z"),
    ]);
    op.scale(0.125);
    ProcessMatrix::new(PartySpaces::qubits(3), op).expect("W1 is Hermitian")
}

/// The classical tripartite process printed for I3, in the factor order
/// `A^I A^O B^I B^O C^I C^O`. With the measure-resend instruments it wins
/// the mirror image of I3 (outcomes of B and C exchanged), giving I3 = 2.
pub fn w3_as_printed() -> ProcessMatrix {
    let mut op = pauli_sum(&[
        (1.0, "111111"),
        (0.5, "1(1+Z)Z1ZZ"),
        (-0.5, "1(1-Z)ZZZ1"),
        (0.5, "ZZ1(1+Z)Z1"),
        (-0.5, "Z11(1-Z)ZZ"),
        (0.5, "Z1ZZ1(1+Z)"),
        (-0.5, "ZZZ11(1-Z)"),
    ]);
    op.scale(0.125);
    ProcessMatrix::new(PartySpaces::qubits(3), op).expect("W3 is Hermitian")
}

/// Classical tripartite process reaching the algebraic minimum of I3:
/// [`w3_as_printed`] with parties B and C exchanged.
pub fn w3() -> ProcessMatrix {
    let w = w3_as_printed();
    let (spaces, op) = permute_parties(w.spaces(), w.operator(), &[0, 2, 1]).expect("valid permutation");
    ProcessMatrix::new(spaces, op).expect("relabeling keeps Hermiticity")
}

/// A named built-in operator.
#[derive(Clone, Debug)]
pub enum Named {
    Process(ProcessMatrix),
    Instruments(InstrumentSet),
}

pub const NAMED: &[&str] = &["W1", "W3", "W3_printed", "instruments_measure_resend", "instruments_identity_on_0"];

pub fn build_named(name: &str) -> Result<Named> {
    match name {
        "W1" => Ok(Named::Process(w1())),
        "W3" => Ok(Named::Process(w3())),
        "W3_printed" => Ok(Named::Process(w3_as_printed())),
        "instruments_measure_resend" => Ok(Named::Instruments(instrument::measure_resend(3))),
        "instruments_identity_on_0" => Ok(Named::Instruments(instrument::identity_on_0(3))),
        _ => Err(Error::UnknownName(name.to_string())),
    }
}
