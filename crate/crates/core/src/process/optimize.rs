//! Minimizing an inequality expression over process matrices and
//! instruments: exact LP for classical processes, SDP steps and the
//! see-saw search.

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::instrument::{random_instrument_set, Instrument, InstrumentSet};
use super::matrix::{validate_process_with, ProcessMatrix};
use super::operator::{Operator, C64};
use super::sdp::{self, AdmmOptions, AdmmState, BlockProblem};
use super::space::{append_maximally_mixed, partial_trace_raw, OrderConstraint, PartySpaces};
use crate::error::{Error, Result};
use crate::geometry::Inequality;
use crate::lp::{self, LpOptions, LpOutcome, SparseColumns};
use crate::number::{rationalize, Rational};
use crate::scenario::Scenario;

/// `constant + Σ t(x,a) P(a|x)` in floating point.
#[derive(Clone, Debug)]
pub struct Objective {
    pub scenario: Scenario,
    pub table: Vec<f64>,
    pub constant: f64,
}

impl Objective {
    pub fn from_inequality(ineq: &Inequality) -> Self {
        Self {
            scenario: ineq.scenario.clone(),
            table: ineq.to_table().into_iter().map(|t| t as f64).collect(),
            constant: ineq.constant as f64,
        }
    }

    /// Nonzero terms as `(x, a, t)`.
    fn terms(&self) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
        let s = &self.scenario;
        let mut out = Vec::new();
        for xi in 0..s.num_inputs() {
            let x = s.input_tuple(xi);
            for ai in 0..s.block_size(xi) {
                let t = self.table[s.block_offset(xi) + ai];
                if t != 0.0 {
                    out.push((x.clone(), s.output_tuple(&x, ai), t));
                }
            }
        }
        out
    }

    /// `G` with `value = constant + Re tr(G W)` for fixed instruments.
    pub fn process_gradient(&self, ins: &InstrumentSet) -> Operator {
        let mut g: Option<Operator> = None;
        for (x, a, t) in self.terms() {
            let ops: Vec<&Operator> = (0..x.len()).map(|k| &ins.get(k, x[k]).ops[a[k]]).collect();
            let m = Operator::kron_all(ops);
            match g.as_mut() {
                Some(g) => g.axpy(t, &m),
                None => g = Some(&m * t),
            }
        }
        g.unwrap_or_else(|| {
            let dim = ins.parties.iter().map(|l| l[0].d_in * l[0].d_out).product();
            Operator::zeros(dim)
        })
    }

    /// `G[x][a]` with `value = constant + Σ Re tr(G[x][a] M_{a|x})` for
    /// party `k`'s instruments, everything else fixed.
    pub fn party_gradient(&self, spaces: &PartySpaces, w: &Operator, ins: &InstrumentSet, k: usize) -> Vec<Vec<Operator>> {
        let n = spaces.total_dim();
        let bk = spaces.block_dim(k);
        let stride = spaces.party_stride(k);
        let rest_dim = n / bk;
        let digit: Vec<usize> = (0..n).map(|i| (i / stride) % bk).collect();
        let rest: Vec<usize> = (0..n).map(|i| (i / (stride * bk)) * stride + i % stride).collect();
        let s = &self.scenario;
        let mut sums: Vec<Vec<Option<Operator>>> =
            (0..s.inputs(k)).map(|xk| vec![None; s.outputs(k, xk)]).collect();
        for (x, a, t) in self.terms() {
            let ops: Vec<&Operator> = (0..x.len()).filter(|&j| j != k).map(|j| &ins.get(j, x[j]).ops[a[j]]).collect();
            let m = Operator::kron_all(ops);
            let slot = &mut sums[x[k]][a[k]];
            match slot.as_mut() {
                Some(acc) => acc.axpy(t, &m),
                None => *slot = Some(&m * t),
            }
        }
        let wd = w.data();
        sums.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|sum| match sum {
                        None => Operator::zeros(bk),
                        Some(sop) => {
                            debug_assert_eq!(sop.dim(), rest_dim);
                            let mut k_op = Operator::zeros(bk);
                            for ir in 0..n {
                                for ic in 0..n {
                                    let sv = sop.get(rest[ir], rest[ic]);
                                    if sv == C64::new(0.0, 0.0) {
                                        continue;
                                    }
                                    let v = k_op.get(digit[ir], digit[ic]) + sv * wd[ic * n + ir];
                                    k_op.set(digit[ir], digit[ic], v);
                                }
                            }
                            Operator::from_fn(bk, |i, j| k_op.get(i, j).conj()).hermitian_part()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn value(&self, w: &Operator, ins: &InstrumentSet) -> f64 {
        self.constant + self.process_gradient(ins).inner(w)
    }
}

/// An optimizer's answer with its convergence status.
#[derive(Clone, Debug)]
pub struct Optimized<T> {
    pub solution: T,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn w_problem_parts(
    spaces: &PartySpaces,
    order: OrderConstraint,
) -> (Box<dyn Fn(&mut [Operator]) + Sync + '_>, Operator, usize) {
    let tau = spaces.output_product() as f64;
    match order {
        OrderConstraint::Free => {
            let proj = move |x: &mut [Operator]| x[0] = spaces.affine_projection(&x[0], OrderConstraint::Free);
            (Box::new(proj), spaces.maximally_mixed(), 1)
        }
        OrderConstraint::LastAfterOthers => {
            let d = spaces.output_dim(spaces.num_parties() - 1);
            let m = spaces.total_dim() / d;
            let proj = move |x: &mut [Operator]| {
                let full = spaces.affine_projection(&append_maximally_mixed(&x[0], d), OrderConstraint::LastAfterOthers);
                x[0] = partial_trace_raw(&full, m, d, 1);
            };
            (Box::new(proj), &Operator::identity(m) * (tau / m as f64), d)
        }
    }
}

/// W-step with an optional warm start; returns the full operator.
fn solve_process(
    obj: &Objective,
    spaces: &PartySpaces,
    ins: &InstrumentSet,
    order: OrderConstraint,
    state: &mut Option<AdmmState>,
    opts: &AdmmOptions,
) -> Optimized<Operator> {
    let g = obj.process_gradient(ins);
    let (project, interior, d) = w_problem_parts(spaces, order);
    let cost = if d == 1 {
        g
    } else {
        let mut c = partial_trace_raw(&g, g.dim() / d, d, 1);
        c.scale(1.0 / d as f64);
        c
    };
    let cost = vec![cost];
    let interior = vec![interior];
    let problem = BlockProblem { cost: &cost, project: &*project, interior: &interior };
    let st = state.get_or_insert_with(|| AdmmState::new(interior.clone(), opts.initial_rho));
    let out = sdp::solve(&problem, st, opts);
    let x = out.x.into_iter().next().expect("one block");
    let w = if d == 1 { x } else { append_maximally_mixed(&x, d) };
    Optimized { value: obj.constant + out.value, solution: w, converged: out.converged, iterations: out.iterations }
}

/// Instrument step for party `k`.
fn solve_party(
    obj: &Objective,
    spaces: &PartySpaces,
    w: &Operator,
    ins: &InstrumentSet,
    k: usize,
    state: &mut Option<AdmmState>,
    opts: &AdmmOptions,
) -> Optimized<Vec<Instrument>> {
    let grads = obj.party_gradient(spaces, w, ins, k);
    let (d_in, d_out) = (spaces.input_dim(k), spaces.output_dim(k));
    let groups: Vec<usize> = grads.iter().map(Vec::len).collect();
    let cost: Vec<Operator> = grads.into_iter().flatten().collect();
    let interior: Vec<Operator> = groups
        .iter()
        .flat_map(|&na| std::iter::repeat(&Operator::identity(d_in * d_out) * (1.0 / (na * d_out) as f64)).take(na))
        .collect();
    let project = |x: &mut [Operator]| {
        let mut off = 0;
        for &na in &groups {
            let mut sum = Operator::zeros(d_in * d_out);
            for b in &x[off..off + na] {
                sum += b;
            }
            let mut e = partial_trace_raw(&sum, d_in, d_out, 1);
            e -= &Operator::identity(d_in);
            let corr = &e.kron(&Operator::identity(d_out)) * (1.0 / (na * d_out) as f64);
            for b in &mut x[off..off + na] {
                *b -= &corr;
            }
            off += na;
        }
    };
    let problem = BlockProblem { cost: &cost, project: &project, interior: &interior };
    let st = state.get_or_insert_with(|| {
        let start: Vec<Operator> = ins.parties[k].iter().flat_map(|i| i.ops.iter().cloned()).collect();
        AdmmState::new(start, opts.initial_rho)
    });
    let out = sdp::solve(&problem, st, opts);
    let mut blocks = out.x.into_iter();
    let list = groups
        .iter()
        .enumerate()
        .map(|(x, &na)| Instrument {
            party: k,
            input: x,
            d_in,
            d_out,
            ops: blocks.by_ref().take(na).collect(),
        })
        .collect();
    Optimized { value: obj.constant + out.value, solution: list, converged: out.converged, iterations: out.iterations }
}

#[derive(Clone, Debug)]
pub struct SdpOptions {
    pub admm: AdmmOptions,
    /// Tolerance for the validity check of the returned solution.
    pub tolerance: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { admm: AdmmOptions::default(), tolerance: 1e-6 }
    }
}

fn check_problem(obj: &Objective, spaces: &PartySpaces, ins: &InstrumentSet) -> Result<()> {
    ins.check_shape(&obj.scenario, spaces)?;
    if let Some((k, x, r)) = ins.validate(1e-6) {
        return Err(Error::InvalidOperator(format!(
            "instrument for party {k}, input {x} is invalid (min eigenvalue {:.3e}, normalization error {:.3e})",
            r.min_eigenvalue, r.normalization_error
        )));
    }
    Ok(())
}

/// Minimizes the objective over valid process matrices for fixed
/// instruments.
pub fn optimize_w(
    ineq: &Inequality,
    spaces: &PartySpaces,
    ins: &InstrumentSet,
    order: OrderConstraint,
    opts: &SdpOptions,
) -> Result<Optimized<ProcessMatrix>> {
    let obj = Objective::from_inequality(ineq);
    check_problem(&obj, spaces, ins)?;
    let out = solve_process(&obj, spaces, ins, order, &mut None, &opts.admm);
    let w = ProcessMatrix::new(spaces.clone(), out.solution.hermitian_part())?;
    let report = validate_process_with(&w, order, opts.tolerance);
    if !report.valid {
        return Err(Error::Infeasible);
    }
    Ok(Optimized { solution: w, value: out.value, converged: out.converged, iterations: out.iterations })
}

/// Minimizes over party `k`'s instruments; never returns anything worse
/// than the incumbent.
pub fn optimize_instrument(
    ineq: &Inequality,
    w: &ProcessMatrix,
    ins: &InstrumentSet,
    k: usize,
    opts: &SdpOptions,
) -> Result<Optimized<Vec<Instrument>>> {
    let obj = Objective::from_inequality(ineq);
    check_problem(&obj, w.spaces(), ins)?;
    if k >= ins.parties.len() {
        return Err(Error::OutOfRange(format!("party {k}")));
    }
    let incumbent = obj.value(w.operator(), ins);
    let out = solve_party(&obj, w.spaces(), w.operator(), ins, k, &mut None, &opts.admm);
    if out.value <= incumbent {
        Ok(out)
    } else {
        Ok(Optimized { solution: ins.parties[k].clone(), value: incumbent, converged: out.converged, iterations: out.iterations })
    }
}

#[derive(Clone, Debug)]
pub struct SeeSawOptions {
    pub restarts: usize,
    pub seed: u64,
    pub order: OrderConstraint,
    pub max_sweeps: usize,
    /// Stop once `patience` consecutive sweeps each improve the value by
    /// less than this.
    pub tolerance: f64,
    pub patience: usize,
    pub process_admm: AdmmOptions,
    pub instrument_admm: AdmmOptions,
}

impl Default for SeeSawOptions {
    fn default() -> Self {
        Self {
            restarts: 50,
            seed: 0,
            order: OrderConstraint::Free,
            max_sweeps: 60,
            tolerance: 1e-5,
            patience: 2,
            process_admm: AdmmOptions { max_iterations: 100, tolerance: 1e-7, ..AdmmOptions::default() },
            instrument_admm: AdmmOptions { max_iterations: 400, tolerance: 1e-8, ..AdmmOptions::default() },
        }
    }
}

/// One see-saw chain.
#[derive(Clone, Debug, Serialize)]
pub struct SeeSawRun {
    pub restart: usize,
    pub value: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Objective after every accepted or rejected step.
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SeeSawResult {
    pub value: f64,
    pub process: ProcessMatrix,
    pub instruments: InstrumentSet,
    pub best: SeeSawRun,
    pub runs: Vec<SeeSawRun>,
}

impl SeeSawResult {
    pub fn converged(&self) -> bool {
        self.best.converged
    }
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn run_chain(
    obj: &Objective,
    spaces: &PartySpaces,
    opts: &SeeSawOptions,
    restart: usize,
    mut ins: InstrumentSet,
) -> (SeeSawRun, Operator, InstrumentSet) {
    let mut w = spaces.maximally_mixed();
    let mut value = obj.value(&w, &ins);
    let mut trace = vec![value];
    let mut w_state = None;
    let mut party_states: Vec<Option<AdmmState>> = vec![None; spaces.num_parties()];
    let mut converged = false;
    let mut sweeps = 0;
    let mut stalled = 0;
    // The first process step starts cold and gets a longer budget.
    let cold = AdmmOptions { max_iterations: opts.process_admm.max_iterations * 4, ..opts.process_admm.clone() };
    while sweeps < opts.max_sweeps {
        let admm = if sweeps == 0 { &cold } else { &opts.process_admm };
        sweeps += 1;
        let start = value;
        let step = solve_process(obj, spaces, &ins, opts.order, &mut w_state, admm);
        if step.value < value {
            w = step.solution;
            value = step.value;
        }
        trace.push(value);
        for k in 0..spaces.num_parties() {
            let step = solve_party(obj, spaces, &w, &ins, k, &mut party_states[k], &opts.instrument_admm);
            if step.value < value {
                ins.parties[k] = step.solution;
                value = step.value;
            }
            trace.push(value);
        }
        if start - value < opts.tolerance {
            stalled += 1;
            if stalled >= opts.patience.max(1) {
                converged = true;
                break;
            }
        } else {
            stalled = 0;
        }
    }
    // Recompute from scratch so the reported value matches the operators.
    let value = obj.value(&w, &ins);
    (SeeSawRun { restart, value, sweeps, converged, trace }, w.hermitian_part(), ins)
}

/// Alternating optimization from random instruments; the best of
/// `restarts` independent chains. Deterministic for a given seed.
pub fn see_saw(ineq: &Inequality, spaces: &PartySpaces, opts: &SeeSawOptions) -> Result<SeeSawResult> {
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let obj = Objective::from_inequality(ineq);
    if spaces.num_parties() != obj.scenario.num_parties() {
        return Err(Error::DimensionMismatch("spaces and inequality have different party counts".into()));
    }
    let chains: Vec<(SeeSawRun, Operator, InstrumentSet)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(opts.seed, r);
            let ins = random_instrument_set(&mut rng, &obj.scenario, spaces);
            run_chain(&obj, spaces, opts, r, ins)
        })
        .collect();
    let best = chains
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.value.total_cmp(&b.1 .0.value).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one chain");
    let runs: Vec<SeeSawRun> = chains.iter().map(|c| c.0.clone()).collect();
    let (run, w, ins) = chains.into_iter().nth(best).expect("index in range");
    let process = ProcessMatrix::new(spaces.clone(), w)?;
    Ok(SeeSawResult { value: run.value, process, instruments: ins, best: run, runs })
}

/// See-saw starting from given instruments (a single chain).
pub fn see_saw_from(
    ineq: &Inequality,
    spaces: &PartySpaces,
    ins: &InstrumentSet,
    opts: &SeeSawOptions,
) -> Result<SeeSawResult> {
    let obj = Objective::from_inequality(ineq);
    check_problem(&obj, spaces, ins)?;
    let (run, w, ins) = run_chain(&obj, spaces, opts, 0, ins.clone());
    let process = ProcessMatrix::new(spaces.clone(), w)?;
    Ok(SeeSawResult { value: run.value, process, instruments: ins, best: run.clone(), runs: vec![run] })
}

/// Draws one random instrument set as the see-saw would for `restart`.
pub fn initial_instruments(scenario: &Scenario, spaces: &PartySpaces, seed: u64, restart: usize) -> InstrumentSet {
    let mut rng = restart_rng(seed, restart);
    random_instrument_set(&mut rng, scenario, spaces)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalOptimum {
    #[serde(with = "crate::number::serde_rational")]
    pub value: Rational,
    /// Diagonal of the optimal process in the computational basis.
    #[serde(with = "crate::number::serde_rationals")]
    pub weights: Vec<Rational>,
}

impl ClassicalOptimum {
    pub fn process(&self, spaces: &PartySpaces) -> Result<ProcessMatrix> {
        let diag: Vec<f64> = self.weights.iter().map(crate::number::rational_to_f64).collect();
        ProcessMatrix::new(spaces.clone(), Operator::diagonal(&diag))
    }
}

fn diagonal_rationals(ins: &InstrumentSet) -> Result<Vec<Vec<Vec<Vec<Rational>>>>> {
    if !ins.is_diagonal(1e-12) {
        return Err(Error::InvalidOperator("classical optimization needs diagonal instruments".into()));
    }
    Ok(ins
        .parties
        .iter()
        .map(|list| {
            list.iter()
                .map(|i| i.ops.iter().map(|o| (0..o.dim()).map(|j| rationalize(o.get(j, j).re, 1 << 20)).collect()).collect())
                .collect()
        })
        .collect())
}

/// Coefficient of each diagonal entry `w_i` in the objective, without the
/// constant term.
pub fn classical_costs(ineq: &Inequality, spaces: &PartySpaces, ins: &InstrumentSet) -> Result<Vec<Rational>> {
    ins.check_shape(&ineq.scenario, spaces)?;
    let diag = diagonal_rationals(ins)?;
    let s = &ineq.scenario;
    let table = ineq.to_table();
    let n = spaces.total_dim();
    let np = spaces.num_parties();
    let digits: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..np).map(|k| (i / spaces.party_stride(k)) % spaces.block_dim(k)).collect())
        .collect();
    let mut costs = vec![Rational::zero(); n];
    for xi in 0..s.num_inputs() {
        let x = s.input_tuple(xi);
        for ai in 0..s.block_size(xi) {
            let t = table[s.block_offset(xi) + ai];
            if t == 0 {
                continue;
            }
            let a = s.output_tuple(&x, ai);
            let t = Rational::from_integer(t.into());
            for (i, dg) in digits.iter().enumerate() {
                let mut p = t.clone();
                for k in 0..np {
                    let m = &diag[k][x[k]][a[k]][dg[k]];
                    if m.is_zero() {
                        p = Rational::zero();
                        break;
                    }
                    p *= m;
                }
                costs[i] += p;
            }
        }
    }
    Ok(costs)
}

/// Exact objective of a diagonal process with diagonal instruments.
pub fn classical_objective(
    ineq: &Inequality,
    spaces: &PartySpaces,
    ins: &InstrumentSet,
    weights: &[Rational],
) -> Result<Rational> {
    let costs = classical_costs(ineq, spaces, ins)?;
    if weights.len() != costs.len() {
        return Err(Error::DimensionMismatch(format!("{} weights for dimension {}", weights.len(), costs.len())));
    }
    Ok(costs.iter().zip(weights).fold(Rational::from_integer(ineq.constant.into()), |acc, (c, w)| acc + c * w))
}

/// Integer rows `r` with `r · diag(W) = 0` iff a diagonal `W` lies in the
/// valid subspace.
pub fn classical_constraints(spaces: &PartySpaces) -> Vec<Vec<i64>> {
    let n = spaces.total_dim();
    let mut columns: Vec<Vec<i64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = Operator::zeros(n);
        e.set(i, i, C64::new(1.0, 0.0));
        let rest = &e - &spaces.valid_projection(&e);
        // Denominators divide the total dimension.
        columns.push((0..n).map(|j| (rest.get(j, j).re * n as f64).round() as i64).collect());
    }
    let mut rows: Vec<Vec<i64>> = (0..n).map(|j| columns.iter().map(|c| c[j]).collect()).collect();
    rows.retain(|r| r.iter().any(|&v| v != 0));
    for r in &mut rows {
        let g = r.iter().fold(0i64, |g, &v| g.gcd(&v));
        r.iter_mut().for_each(|v| *v /= g);
        if r.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0) {
            r.iter_mut().for_each(|v| *v = -*v);
        }
    }
    rows.sort();
    rows.dedup();
    rows
}

/// Exact minimum over classical (diagonal) processes for fixed diagonal
/// instruments.
pub fn classical_optimize(ineq: &Inequality, spaces: &PartySpaces, ins: &InstrumentSet) -> Result<ClassicalOptimum> {
    let costs = classical_costs(ineq, spaces, ins)?;
    let n = spaces.total_dim();
    let lcm = costs.iter().fold(num_bigint::BigInt::from(1), |l, c| l.lcm(c.denom()));
    let scale = Rational::from_integer(lcm);
    let int_costs = costs
        .iter()
        .map(|c| (c * &scale).to_integer().to_i64().ok_or_else(|| Error::Overflow("classical cost".into())))
        .collect::<Result<Vec<i64>>>()?;
    let rows = classical_constraints(spaces);
    let m = rows.len() + 1;
    let columns = (0..n)
        .map(|i| {
            let mut col: Vec<(usize, i64)> =
                rows.iter().enumerate().filter(|(_, r)| r[i] != 0).map(|(j, r)| (j, r[i])).collect();
            col.push((rows.len(), 1));
            col
        })
        .collect();
    let src = SparseColumns { rows: m, columns, costs: int_costs };
    let mut b = vec![0i64; m];
    b[m - 1] = spaces.output_product() as i64;
    match lp::solve(&src, &b, &LpOptions::default())? {
        LpOutcome::Optimal { value, x, .. } => {
            let mut weights = vec![Rational::zero(); n];
            for (j, v) in x {
                weights[j] = v;
            }
            let value = value / scale + Rational::from_integer(ineq.constant.into());
            Ok(ClassicalOptimum { value, weights })
        }
        LpOutcome::Infeasible { .. } => Err(Error::Infeasible),
        LpOutcome::Unbounded => Err(Error::Unbounded),
    }
}

/// Random diagonal instruments with entries that are multiples of
/// `1/den`.
pub fn random_classical_instruments<R: Rng + ?Sized>(
    rng: &mut R,
    scenario: &Scenario,
    spaces: &PartySpaces,
    den: u32,
) -> InstrumentSet {
    InstrumentSet {
        parties: (0..scenario.num_parties())
            .map(|k| {
                let (di, dout) = (spaces.input_dim(k), spaces.output_dim(k));
                (0..scenario.inputs(k))
                    .map(|x| {
                        let na = scenario.outputs(k, x);
                        let mut diags = vec![vec![0.0; di * dout]; na];
                        for i in 0..di {
                            // Split `den` units over the (outcome, output) cells of row `i`.
                            let cells = na * dout;
                            let mut counts = vec![0u32; cells];
                            for _ in 0..den {
                                counts[rng.gen_range(0..cells)] += 1;
                            }
                            for (c, &cnt) in counts.iter().enumerate() {
                                diags[c / dout][i * dout + c % dout] = f64::from(cnt) / f64::from(den);
                            }
                        }
                        Instrument {
                            party: k,
                            input: x,
                            d_in: di,
                            d_out: dout,
                            ops: diags.iter().map(|d| Operator::diagonal(d)).collect(),
                        }
                    })
                    .collect()
            })
            .collect(),
    }
}
