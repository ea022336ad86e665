use causal_core::catalog;
use causal_core::number::{rational_to_f64, rationalize};
use causal_core::process::instrument::{haar_unitary, measure_resend, random_instrument_set};
use causal_core::process::matrix::{w1, w3};
use causal_core::process::operator::{pauli_product, Operator};
use causal_core::process::optimize::{classical_objective, classical_optimize, random_classical_instruments};
use causal_core::process::sdp::AdmmOptions;
use causal_core::process::space::{conjugate_factor, permute_parties};
use causal_core::process::{
    born_correlation, born_rule, see_saw, validate_process, PartySpaces, ProcessMatrix, SeeSawOptions,
};
use causal_core::sampling::random_weights;
use causal_core::{Rational, Scenario};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Diagonals (exact) of the valid classical tripartite processes used as
/// mixture components: W1 and W3 under every party relabeling, the
/// maximally mixed process, and a product of input states.
fn classical_components() -> Vec<Vec<Rational>> {
    let spaces = PartySpaces::qubits(3);
    let mut out = Vec::new();
    for w in [w1(), w3()] {
        for p in PERMS {
            let (_, op) = permute_parties(&spaces, w.operator(), &p).unwrap();
            out.push((0..64).map(|i| rationalize(op.get(i, i).re, 1 << 10)).collect());
        }
    }
    out.push(vec![Rational::new(1.into(), 8.into()); 64]);
    // |0><0| on A^I, |1><1| on B^I, mixed on C^I, identity on outputs.
    let state = [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]];
    out.push(
        (0..64)
            .map(|i| {
                let v: f64 = (0..3).map(|k| state[k][(i >> (5 - 2 * k)) & 1]).product();
                rationalize(v, 4)
            })
            .collect(),
    );
    out
}

fn random_classical_process(rng: &mut ChaCha8Rng, components: &[Vec<Rational>]) -> (Vec<Rational>, ProcessMatrix) {
    let q = random_weights(rng, components.len(), 3);
    let mut diag = vec![Rational::zero(); 64];
    for (c, qi) in components.iter().zip(&q) {
        for (d, v) in diag.iter_mut().zip(c) {
            *d += qi * v;
        }
    }
    let op = Operator::diagonal(&diag.iter().map(rational_to_f64).collect::<Vec<_>>());
    (diag, ProcessMatrix::new(PartySpaces::qubits(3), op).unwrap())
}

#[test]
fn classical_components_are_valid() {
    for d in classical_components() {
        let op = Operator::diagonal(&d.iter().map(rational_to_f64).collect::<Vec<_>>());
        let w = ProcessMatrix::new(PartySpaces::qubits(3), op).unwrap();
        assert!(validate_process(&w).valid, "{:?}", validate_process(&w).diagnostics());
    }
}

#[test]
fn diagonal_born_rule_matches_exact_classical_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let components = classical_components();
    let spaces = PartySpaces::qubits(3);
    let names = ["I1", "I2", "I3"];
    for _ in 0..100 {
        let ineq = catalog::build(names[rng.gen_range(0..3)]).unwrap();
        let (diag, w) = random_classical_process(&mut rng, &components);
        assert!(validate_process(&w).valid);
        let ins = random_classical_instruments(&mut rng, &ineq.scenario, &spaces, 4);
        let exact = classical_objective(&ineq, &spaces, &ins, &diag).unwrap();
        let corr = born_correlation(&w, &ins, &ineq.scenario).unwrap();
        let value = ineq.evaluate(&corr).unwrap();
        assert!((value - rational_to_f64(&exact)).abs() < 1e-12, "{value} vs {exact}");
        assert_eq!(rationalize(value, 1 << 16), exact);
    }
}

#[test]
fn classical_minimum_of_lgyni_is_nonnegative() {
    let ineq = catalog::lgyni();
    let spaces = PartySpaces::qubits(2);
    let opt = classical_optimize(&ineq, &spaces, &measure_resend(2)).unwrap();
    assert!(opt.value >= Rational::zero(), "{}", opt.value);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let ins = random_classical_instruments(&mut rng, &ineq.scenario, &spaces, 3);
        assert!(classical_optimize(&ineq, &spaces, &ins).unwrap().value >= Rational::zero());
    }
}

#[test]
fn validity_is_basis_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spaces = PartySpaces::qubits(3);
    // A positive operator with a forbidden term: A's output signals nowhere.
    let mut bad = &Operator::identity(64) * 0.125;
    bad.axpy(0.0625, &pauli_product("1Z1111").unwrap());
    let cases = [(w1().operator().clone(), true), (w3().operator().clone(), true), (bad, false)];
    for (op, valid) in cases {
        assert_eq!(validate_process(&ProcessMatrix::new(spaces.clone(), op.clone()).unwrap()).valid, valid);
        for _ in 0..5 {
            let mut w = op.clone();
            for f in [0, 2, 4] {
                w = conjugate_factor(&spaces, &w, f, &haar_unitary(&mut rng, 2));
            }
            let w = ProcessMatrix::new(spaces.clone(), w.hermitian_part()).unwrap();
            assert_eq!(validate_process(&w).valid, valid);
        }
    }
}

#[test]
fn born_rule_is_normalized_for_random_valid_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spaces = PartySpaces::qubits(3);
    let s = Scenario::lazy(3);
    for _ in 0..10 {
        // Local unitaries on every factor keep a valid process valid.
        let mut op = if rng.gen_bool(0.5) { w1() } else { w3() }.operator().clone();
        for f in 0..6 {
            op = conjugate_factor(&spaces, &op, f, &haar_unitary(&mut rng, 2));
        }
        let w = ProcessMatrix::new(spaces.clone(), op.hermitian_part()).unwrap();
        let ins = random_instrument_set(&mut rng, &s, &spaces);
        for xi in 0..s.num_inputs() {
            let p = born_rule(&w, &ins, &s, &s.input_tuple(xi)).unwrap();
            assert!(p.iter().all(|&v| v > -1e-9));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

fn quick_options(seed: u64) -> SeeSawOptions {
    SeeSawOptions {
        restarts: 2,
        seed,
        max_sweeps: 6,
        process_admm: AdmmOptions { max_iterations: 60, tolerance: 1e-7, ..AdmmOptions::default() },
        instrument_admm: AdmmOptions { max_iterations: 150, tolerance: 1e-8, ..AdmmOptions::default() },
        ..SeeSawOptions::default()
    }
}

#[test]
fn see_saw_is_deterministic_and_monotone() {
    let ineq = catalog::i1();
    let spaces = PartySpaces::qubits(3);
    let a = see_saw(&ineq, &spaces, &quick_options(7)).unwrap();
    let b = see_saw(&ineq, &spaces, &quick_options(7)).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    for (ra, rb) in a.runs.iter().zip(&b.runs) {
        assert_eq!(ra.trace, rb.trace);
    }
    for run in &a.runs {
        assert!(run.trace.windows(2).all(|t| t[1] <= t[0]), "{:?}", run.trace);
    }
    assert!(validate_process(&a.process).valid);
    assert!(a.instruments.validate(1e-9).is_none());
    let corr = born_correlation(&a.process, &a.instruments, &ineq.scenario).unwrap();
    assert!((ineq.evaluate(&corr).unwrap() - a.value).abs() < 1e-9);
}
