//! Acceptance run: one pass/fail line per criterion.
//!
//! `cargo test -p causal-core --test acceptance` runs everything; numeric
//! arguments after `--` select criteria, e.g. `-- 1 6 8`.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use causal_core::catalog::{self, game_form, game_success, named_game};
use causal_core::geometry::rank::exact_rank_big;
use causal_core::geometry::{
    canonicalize, check_certificate, classify_facets, enumerate_facets, polytope_dimension, verify_facet, DdOptions,
    FacetVerdict, Inequality, InsertionOrder, SymmetryGroup,
};
use causal_core::membership::{causal_bound, is_causal, is_mixture_of_fixed_order, verify_membership};
use causal_core::number::{int, rational, Rational};
use causal_core::process::instrument::measure_resend;
use causal_core::process::matrix::{w1, w3};
use causal_core::process::optimize::{classical_objective, random_classical_instruments};
use causal_core::process::{
    born_correlation, classical_optimize, see_saw, validate_process_with, InstrumentSet, OrderConstraint, PartySpaces,
    ProcessMatrix, SeeSawOptions,
};
use causal_core::sampling::postselection_example;
use causal_core::stream::{open_vertex_file, VertexWriter};
use causal_core::strategy::all_strategies;
use causal_core::{
    classify_vertex, enumerate_causal_vertices, is_causal_deterministic, Correlation, DeterministicStrategy,
    EnumerationOptions, PartySpec, PostSelection, Scenario, VertexClass, VertexSet,
};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

/// Vertex sets shared between criteria.
#[derive(Default)]
struct Shared {
    lazy3: Option<Arc<VertexSet>>,
    full3: Option<Arc<VertexSet>>,
    /// Streamed lazy 4-partite vertex file.
    lazy4_file: Option<(tempfile::TempDir, PathBuf)>,
}

impl Shared {
    fn vertices(slot: &mut Option<Arc<VertexSet>>, s: Scenario) -> Arc<VertexSet> {
        slot.get_or_insert_with(|| Arc::new(enumerate_causal_vertices(&s, &EnumerationOptions::default()).unwrap()))
            .clone()
    }

    fn lazy3(&mut self) -> Arc<VertexSet> {
        Self::vertices(&mut self.lazy3, Scenario::lazy(3))
    }

    fn full3(&mut self) -> Arc<VertexSet> {
        Self::vertices(&mut self.full3, Scenario::full_binary(3))
    }

    fn lazy4_file(&mut self) -> PathBuf {
        if self.lazy4_file.is_none() {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("lazy4.vertices");
            let s = Scenario::lazy(4);
            let v = enumerate_causal_vertices(&s, &EnumerationOptions::default()).unwrap();
            let file = std::io::BufWriter::new(std::fs::File::create(&path).unwrap());
            let mut w = VertexWriter::new(file, &s).unwrap();
            for i in 0..v.len() {
                w.write_indices(&v.block_indices(i)).unwrap();
            }
            w.finish().unwrap();
            self.lazy4_file = Some((dir, path));
        }
        self.lazy4_file.as_ref().unwrap().1.clone()
    }
}

/// Brute-force census: every strategy of the scenario through the causality
/// decision, independent of the recursive enumeration.
fn brute_force(s: &Scenario) -> (BTreeSet<Vec<u32>>, usize) {
    let mut causal = BTreeSet::new();
    let mut fixed = 0;
    for st in all_strategies(s).unwrap() {
        if is_causal_deterministic(&st).is_some() {
            if classify_vertex(&st).unwrap() == VertexClass::FixedOrder {
                fixed += 1;
            }
            causal.insert(st.block_indices());
        }
    }
    (causal, fixed)
}

fn census(v: &VertexSet) -> (usize, usize) {
    let fixed = v.classify_all().iter().filter(|c| **c == VertexClass::FixedOrder).count();
    (fixed, v.len() - fixed)
}

fn as_set(v: &VertexSet) -> BTreeSet<Vec<u32>> {
    (0..v.len()).map(|i| v.block_indices(i)).collect()
}

fn criterion_1(sh: &mut Shared) -> Outcome {
    let t = Instant::now();
    let v = enumerate_causal_vertices(&Scenario::lazy(3), &EnumerationOptions::default()).map_err(|e| e.to_string())?;
    let (fixed, dynamical) = census(&v);
    let elapsed = t.elapsed();
    ensure((v.len(), fixed, dynamical) == (680, 488, 192), || format!("got {} / {fixed} / {dynamical}", v.len()))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {}", secs(elapsed)))?;
    let (oracle, oracle_fixed) = brute_force(v.scenario());
    ensure(oracle == as_set(&v), || format!("brute force finds {} causal strategies", oracle.len()))?;
    ensure(oracle_fixed == 488, || format!("brute force finds {oracle_fixed} fixed-order"))?;
    sh.lazy3 = Some(Arc::new(v));
    Ok(format!("680 vertices (488 fixed-order, 192 dynamical) in {}; brute force agrees", secs(elapsed)))
}

fn criterion_2(sh: &mut Shared) -> Outcome {
    let t = Instant::now();
    let v = enumerate_causal_vertices(&Scenario::full_binary(3), &EnumerationOptions::default())
        .map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(v.len() == 138_304, || format!("got {} vertices", v.len()))?;
    ensure(elapsed < Duration::from_secs(120), || format!("took {}", secs(elapsed)))?;
    let t_oracle = Instant::now();
    let (oracle, _) = brute_force(v.scenario());
    ensure(oracle == as_set(&v), || format!("brute force over 2^24 strategies finds {}", oracle.len()))?;
    let dim = polytope_dimension(&v);
    ensure(dim == 56, || format!("dimension {dim}"))?;
    sh.full3 = Some(Arc::new(v));
    Ok(format!(
        "138304 vertices in {}, dimension 56; brute force over 2^24 strategies agrees ({})",
        secs(elapsed),
        secs(t_oracle.elapsed())
    ))
}

fn criterion_3(sh: &mut Shared) -> Outcome {
    let t = Instant::now();
    let path = sh.lazy4_file();
    let mut count = 0usize;
    let mut distinct = HashSet::new();
    let mut all_causal = true;
    let reader = open_vertex_file(&path).map_err(|e| e.to_string())?;
    let s = reader.scenario().clone();
    let mut basis = causal_core::geometry::rank::ModBasis::new(s.dimension() + 1);
    for rec in reader.into_records() {
        let digits = rec.map_err(|e| e.to_string())?;
        count += 1;
        // Every 500th record is re-decided from scratch.
        if count % 500 == 0 {
            let st = DeterministicStrategy::from_block_indices(s.clone(), &digits).map_err(|e| e.to_string())?;
            all_causal &= is_causal_deterministic(&st).is_some();
        }
        if basis.rank() < s.dimension() + 1 {
            let ones: Vec<usize> = std::iter::once(0)
                .chain(digits.iter().enumerate().filter(|(_, &a)| a > 0).map(|(xi, &a)| 1 + s.coord_offset(xi) + a as usize - 1))
                .collect();
            basis.insert_ones(&ones);
        }
        distinct.insert(digits);
    }
    let elapsed = t.elapsed();
    let dim = basis.rank() - 1;
    ensure(count == 3_209_712, || format!("streamed {count} vertices"))?;
    ensure(distinct.len() == count, || format!("{} distinct of {count}", distinct.len()))?;
    ensure(all_causal, || "a streamed vertex is not causal".into())?;
    ensure(dim == 65, || format!("affine dimension {dim}"))?;
    ensure(elapsed < Duration::from_secs(1800), || format!("took {}", secs(elapsed)))?;
    Ok(format!("3209712 distinct vertices, affine dimension 65, streamed in {}", secs(elapsed)))
}

fn criterion_4(sh: &mut Shared) -> Outcome {
    let v = sh.lazy3();
    let t = Instant::now();
    let facets = enumerate_facets(&v, &DdOptions { order: InsertionOrder::LexMin, ..DdOptions::default() })
        .map_err(|e| e.to_string())?;
    let dd_time = t.elapsed();
    let group = SymmetryGroup::new(v.scenario());
    let classes = classify_facets(&facets, &group);
    let elapsed = t.elapsed();
    let positivity = classes.iter().filter(|c| c.positivity).count();
    let symmetric = classes.iter().filter(|c| c.party_symmetric && !c.positivity).count();
    let reps: HashSet<(Vec<i64>, i64)> =
        classes.iter().map(|c| (c.representative.coeffs.clone(), c.representative.constant)).collect();
    let lgyni = (0..2)
        .filter(|&z| {
            let (rep, _) = canonicalize(&catalog::lgyni_conditional(z).unwrap(), &group);
            reps.contains(&(rep.coeffs, rep.constant))
        })
        .count();
    ensure(facets.len() == 13_074, || format!("{} facets", facets.len()))?;
    ensure(classes.len() == 305, || format!("{} classes", classes.len()))?;
    ensure(positivity == 3, || format!("{positivity} positivity classes"))?;
    ensure(lgyni == 2, || format!("{lgyni} LGYNI classes"))?;
    ensure(symmetric == 5, || format!("{symmetric} party-symmetric nontrivial classes"))?;
    ensure(elapsed < Duration::from_secs(3600), || format!("took {}", secs(elapsed)))?;

    // Oracles: every facet is certified, the list is closed under relabeling,
    // and the facets separating noncausal points are all on it.
    let records = || (0..v.len()).map(|i| Ok(v.block_indices(i)));
    for f in &facets {
        let cert = verify_facet(f, records()).map_err(|e| e.to_string())?;
        ensure(cert.certificate().is_some(), || format!("not a facet: {f}"))?;
    }
    ensure(classes.iter().all(|c| c.members == c.orbit_size), || "list not closed under relabeling".into())?;
    let listed: HashSet<(Vec<i64>, i64)> = facets.iter().map(|f| (f.coeffs.clone(), f.constant)).collect();
    let mut separated = 0;
    for st in all_strategies(v.scenario()).unwrap().step_by(7) {
        if is_causal_deterministic(&st).is_some() {
            continue;
        }
        let p: Correlation = st.to_correlation();
        let mid = Correlation::mix(&[p, Correlation::uniform(v.scenario().clone())], &[rational(2, 3), rational(1, 3)]).unwrap();
        for point in [st.to_correlation(), mid] {
            let r = is_causal(&point, &v).map_err(|e| e.to_string())?;
            if let Some(sep) = r.separating() {
                ensure(listed.contains(&(sep.coeffs.clone(), sep.constant)), || format!("separating {sep} missing"))?;
                separated += 1;
            }
        }
    }
    Ok(format!(
        "13074 facets (DD {}) in 305 classes: 3 positivity, 2 LGYNI, 5 party-symmetric nontrivial; \
         all certified, list closed under relabeling, {separated} LP separators found in it; total {}",
        secs(dd_time),
        secs(elapsed)
    ))
}

/// Witness rank recomputed over the integers from the certificate alone.
fn independent_rank(ineq: &Inequality, witnesses: &[Vec<u32>]) -> Result<usize, String> {
    let s = &ineq.scenario;
    let mut rows = Vec::new();
    for w in witnesses {
        let st = DeterministicStrategy::from_block_indices(s.clone(), w).map_err(|e| e.to_string())?;
        ensure(is_causal_deterministic(&st).is_some(), || "witness is not causal".into())?;
        let p: Correlation = st.to_correlation();
        ensure(ineq.evaluate(&p).map_err(|e| e.to_string())?.is_zero(), || "witness not tight".into())?;
        let point = causal_core::geometry::parametrize(&p);
        rows.push(
            std::iter::once(BigInt::from(1))
                .chain(point.coords.iter().map(|c| c.to_integer()))
                .collect::<Vec<_>>(),
        );
    }
    Ok(exact_rank_big(rows))
}

fn certify(ineq: &Inequality, records: impl IntoIterator<Item = causal_core::Result<Vec<u32>>>) -> Result<(), String> {
    let label = ineq.label.clone().unwrap_or_default();
    match verify_facet(ineq, records).map_err(|e| e.to_string())? {
        FacetVerdict::Facet(cert) => {
            ensure(check_certificate(&cert), || format!("{label}: certificate fails re-check"))?;
            let d = ineq.scenario.dimension();
            let r = independent_rank(ineq, &cert.vertices)?;
            ensure(r == d, || format!("{label}: independent rank {r} < {d}"))
        }
        other => Err(format!("{label}: {other:?}")),
    }
}

fn criterion_5(sh: &mut Shared) -> Outcome {
    let t = Instant::now();
    let lazy3 = sh.lazy3();
    let full3 = sh.full3();
    let recs = |v: &VertexSet| (0..v.len()).map(|i| Ok(v.block_indices(i))).collect::<Vec<_>>();
    for ineq in [catalog::i1(), catalog::i2(), catalog::i3()] {
        certify(&ineq, recs(&lazy3))?;
        let lifted = ineq.lift(full3.scenario()).map_err(|e| e.to_string())?;
        certify(&lifted, recs(&full3))?;
    }
    certify(&catalog::i4(), recs(&full3))?;
    let path = sh.lazy4_file();
    for ineq in [catalog::j1(4).unwrap(), catalog::j2(4).unwrap()] {
        certify(&ineq, open_vertex_file(&path).map_err(|e| e.to_string())?.into_records())?;
    }
    let gyni = catalog::gyni_uniform();
    match verify_facet(&gyni, recs(&full3)).map_err(|e| e.to_string())? {
        FacetVerdict::RankDeficient { rank, saturating } => {
            let b = causal_bound(&gyni, &full3).map_err(|e| e.to_string())?;
            ensure(b.value == 0, || format!("uniform GYNI minimum {}", b.value))?;
            Ok(format!(
                "I1-I3 facets of lazy and full-binary, I4 of full-binary, J1(4) and J2(4) of lazy 4-partite, \
                 certificates re-verified; uniform GYNI tight but rank {rank} < 56 ({saturating} tight vertices); {}",
                secs(t.elapsed())
            ))
        }
        other => Err(format!("uniform GYNI: {other:?}")),
    }
}

/// Largest win count of a uniform-input game over a vertex set.
fn max_wins(game: &catalog::CausalGame, v: &VertexSet) -> usize {
    let s = v.scenario();
    let mut buf = vec![0u32; s.num_inputs()];
    let mut best = 0;
    for i in 0..v.len() {
        v.decode_into(i, &mut buf);
        let wins = buf.iter().enumerate().filter(|(xi, &a)| game.wins[s.block_offset(*xi) + a as usize]).count();
        best = best.max(wins);
    }
    best
}

fn criterion_6(sh: &mut Shared) -> Outcome {
    let lazy3 = sh.lazy3();
    let full3 = sh.full3();
    let lazy2 = enumerate_causal_vertices(&Scenario::lazy(2), &EnumerationOptions::default()).unwrap();
    let lazy4 = open_vertex_file(&sh.lazy4_file())
        .and_then(|r| {
            let s = r.scenario().clone();
            VertexSet::from_block_indices(s, r.into_records())
        })
        .map_err(|e| e.to_string())?;
    let zeros = |x: &[usize]| vec![0; x.len()];
    type Strategy = fn(&[usize]) -> Vec<usize>;
    let i3_strategy: Strategy = |x| vec![0, x[0] * x[1], x[1] * x[2]];
    let i4_strategy: Strategy = |x| vec![0, x[0], x[1]];
    let cases: Vec<(&str, Rational, &VertexSet, Strategy)> = vec![
        ("LGYNI", rational(3, 4), &lazy2, zeros),
        ("I1", rational(7, 8), &lazy3, zeros),
        ("I2", rational(7, 8), &lazy3, zeros),
        ("I3", rational(7, 8), &lazy3, i3_strategy),
        ("I4", rational(3, 4), &full3, i4_strategy),
        ("J1(3)", rational(7, 8), &lazy3, zeros),
        ("J2(3)", rational(7, 8), &lazy3, zeros),
        ("J1(4)", rational(15, 16), &lazy4, zeros),
        ("J2(4)", rational(15, 16), &lazy4, zeros),
    ];
    for (name, expected, v, strategy) in cases {
        let ineq = catalog::build(name).map_err(|e| e.to_string())?;
        let from_ineq = game_form(&ineq).map_err(|e| e.to_string())?;
        let verbal = named_game(name).map_err(|e| e.to_string())?;
        ensure(from_ineq.bound == expected && verbal.bound == expected, || {
            format!("{name}: bounds {} / {}", from_ineq.bound, verbal.bound)
        })?;
        let n_inputs = v.scenario().num_inputs();
        let best = rational(max_wins(&verbal, v) as i64, n_inputs as i64);
        ensure(best == expected, || format!("{name}: best causal success {best}"))?;
        let b = causal_bound(&ineq, v).map_err(|e| e.to_string())?;
        ensure(b.value == 0, || format!("{name}: inequality minimum {}", b.value))?;
        let st = DeterministicStrategy::from_fn(v.scenario().clone(), strategy).map_err(|e| e.to_string())?;
        ensure(is_causal_deterministic(&st).is_some(), || format!("{name}: named strategy is not causal"))?;
        let p: Correlation = st.to_correlation();
        let success = game_success(&p, &verbal).map_err(|e| e.to_string())?;
        ensure(success == expected, || format!("{name}: named strategy wins {success}"))?;
    }
    Ok("LGYNI 3/4, I1-I3 7/8, I4 3/4, J1/J2(3) 7/8, J1/J2(4) 15/16; maxima over all vertices match and named strategies attain them".into())
}

fn dynamical_mixture(q0: &Rational, q1: &Rational) -> Correlation {
    let s = Scenario::new(vec![PartySpec::new(vec![1, 1]), PartySpec::new(vec![2, 2]), PartySpec::new(vec![2, 2])]).unwrap();
    Correlation::from_fn(s, |x, a| {
        let q = if x[0] == 0 { q0 } else { q1 };
        let first = int(i64::from(a[1] == 0 && a[2] == x[1]));
        let second = int(i64::from(a[1] == x[2] && a[2] == 0));
        q * first + (int(1) - q) * second
    })
    .unwrap()
}

fn criterion_7(_: &mut Shared) -> Outcome {
    let qs = [rational(1, 1000), rational(1, 7), rational(1, 3), rational(1, 2), rational(2, 3), rational(6, 7), rational(999, 1000)];
    let s = dynamical_mixture(&qs[0], &qs[0]).scenario().clone();
    let v = enumerate_causal_vertices(&s, &EnumerationOptions::default()).unwrap();
    let fixed = v.fixed_order_subset();
    let mut separated = 0;
    for q0 in &qs {
        for q1 in &qs {
            let p = dynamical_mixture(q0, q1);
            let r = is_causal(&p, &v).map_err(|e| e.to_string())?;
            ensure(r.is_causal() && verify_membership(&r, &p, &v), || format!("q = ({q0}, {q1}) not causal"))?;
            let f = is_mixture_of_fixed_order(&p, &v).map_err(|e| e.to_string())?;
            ensure(verify_membership(&f, &p, &fixed), || format!("q = ({q0}, {q1}): certificate fails"))?;
            ensure(f.is_causal() == (q0 == q1), || format!("q = ({q0}, {q1}): fixed-order verdict {}", f.is_causal()))?;
            separated += usize::from(!f.is_causal());
        }
    }
    Ok(format!(
        "{} (q0, q1) pairs causal with verified weights; {separated} with q0 != q1 separated from fixed orders by verified inequalities",
        qs.len() * qs.len()
    ))
}

/// `P(a|x)` for a diagonal process and diagonal instruments, summed over
/// computational basis states directly.
fn diagonal_born(w: &ProcessMatrix, ins: &InstrumentSet, s: &Scenario) -> Vec<f64> {
    let sp = w.spaces();
    let n = sp.total_dim();
    let mut out = Vec::with_capacity(s.num_entries());
    for xi in 0..s.num_inputs() {
        let x = s.input_tuple(xi);
        for ai in 0..s.block_size(xi) {
            let a = s.output_tuple(&x, ai);
            let mut p = 0.0;
            for i in 0..n {
                let mut term = w.operator().get(i, i).re;
                for k in 0..s.num_parties() {
                    let j = (i / sp.party_stride(k)) % sp.block_dim(k);
                    term *= ins.get(k, x[k]).ops[a[k]].get(j, j).re;
                }
                p += term;
            }
            out.push(p);
        }
    }
    out
}

fn criterion_8(_: &mut Shared) -> Outcome {
    let s = Scenario::lazy(3);
    let ins = measure_resend(3);
    let mut detail = Vec::new();
    for (name, w, ineq) in [("W1", w1(), catalog::i1()), ("W3", w3(), catalog::i3())] {
        let corr = born_correlation(&w, &ins, &s).map_err(|e| e.to_string())?;
        let oracle = diagonal_born(&w, &ins, &s);
        let worst = corr.table().iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        ensure(worst <= 1e-9, || format!("{name}: Born rule differs from diagonal sum by {worst:e}"))?;
        let value = ineq.evaluate(&corr).map_err(|e| e.to_string())?;
        ensure((value + 1.0).abs() <= 1e-9, || format!("{name}: value {value}"))?;
        let game = named_game(ineq.label.as_deref().unwrap()).unwrap();
        let success = game_success(&corr, &game).map_err(|e| e.to_string())?;
        ensure((success - 1.0).abs() <= 1e-9, || format!("{name}: game success {success}"))?;
        let report = validate_process_with(&w, OrderConstraint::Free, 1e-9);
        ensure(report.valid, || format!("{name}: {}", report.diagnostics().join("; ")))?;
        ensure(w.is_classical(), || format!("{name} is not diagonal"))?;
        detail.push(format!("{name}: {} = {value:.12}, success {success:.12}", ineq.label.as_deref().unwrap()));
    }
    Ok(format!("{}; both valid and diagonal", detail.join("; ")))
}

fn criterion_9(_: &mut Shared) -> Outcome {
    let spaces = PartySpaces::qubits(3);
    let ins = measure_resend(3);
    for ineq in [catalog::i1(), catalog::i3()] {
        let opt = classical_optimize(&ineq, &spaces, &ins).map_err(|e| e.to_string())?;
        let label = ineq.label.clone().unwrap();
        ensure(opt.value == int(-1), || format!("{label}: classical minimum {}", opt.value))?;
        let exact = classical_objective(&ineq, &spaces, &ins, &opt.weights).map_err(|e| e.to_string())?;
        ensure(exact == opt.value, || format!("{label}: optimal weights give {exact}"))?;
        let w = opt.process(&spaces).map_err(|e| e.to_string())?;
        ensure(validate_process_with(&w, OrderConstraint::Free, 1e-9).valid, || format!("{label}: optimum invalid"))?;
        let corr = born_correlation(&w, &ins, &ineq.scenario).map_err(|e| e.to_string())?;
        let v = ineq.evaluate(&corr).map_err(|e| e.to_string())?;
        ensure((v + 1.0).abs() < 1e-9, || format!("{label}: Born rule gives {v}"))?;
    }
    let lgyni = catalog::lgyni();
    let spaces2 = PartySpaces::qubits(2);
    let mut lowest = classical_optimize(&lgyni, &spaces2, &measure_resend(2)).map_err(|e| e.to_string())?.value;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let ins = random_classical_instruments(&mut rng, &lgyni.scenario, &spaces2, 4);
        let v = classical_optimize(&lgyni, &spaces2, &ins).map_err(|e| e.to_string())?.value;
        lowest = lowest.min(v);
    }
    ensure(lowest >= int(0), || format!("bipartite classical LGYNI minimum {lowest}"))?;
    Ok(format!("classical minima I1 = I3 = -1 exactly; bipartite LGYNI minimum {lowest} over 51 instrument sets"))
}

fn see_saw_value(name: &str, order: OrderConstraint, restarts: usize) -> Result<(f64, usize), String> {
    let ineq = catalog::build(name).map_err(|e| e.to_string())?;
    let spaces = PartySpaces::qubits(3);
    let opts = SeeSawOptions { restarts, seed: 7, order, ..SeeSawOptions::default() };
    let r = see_saw(&ineq, &spaces, &opts).map_err(|e| e.to_string())?;
    let report = validate_process_with(&r.process, order, 1e-7);
    ensure(report.valid, || format!("{name}: {}", report.diagnostics().join("; ")))?;
    ensure(r.instruments.validate(1e-7).is_none(), || format!("{name}: invalid instruments"))?;
    let corr = born_correlation(&r.process, &r.instruments, &ineq.scenario).map_err(|e| e.to_string())?;
    let value = ineq.evaluate(&corr).map_err(|e| e.to_string())?;
    ensure((value - r.value).abs() < 1e-6, || format!("{name}: reported {} but operators give {value}", r.value))?;
    Ok((value, r.runs.len()))
}

fn criterion_10(_: &mut Shared) -> Outcome {
    let t = Instant::now();
    let restarts = 50;
    let (i1, n) = see_saw_value("I1", OrderConstraint::Free, restarts)?;
    ensure(n == restarts, || format!("{n} restarts ran"))?;
    let (i2, _) = see_saw_value("I2", OrderConstraint::Free, restarts)?;
    let (c2, _) = see_saw_value("I2", OrderConstraint::LastAfterOthers, restarts)?;
    let (c3, _) = see_saw_value("I3", OrderConstraint::LastAfterOthers, restarts)?;
    let (c1, _) = see_saw_value("I1", OrderConstraint::LastAfterOthers, restarts)?;
    let elapsed = t.elapsed();
    let summary = format!(
        "I1 {i1:.6}, I2 {i2:.6}, AB<C: I2 {c2:.6}, I3 {c3:.6}, I1 {c1:.6}; {restarts} restarts each in {}",
        secs(elapsed)
    );
    ensure(i1 <= -0.99, || format!("I1 only {i1}; {summary}"))?;
    ensure(i2 <= -0.30, || format!("I2 only {i2}; {summary}"))?;
    ensure(c2.min(c3) <= -0.25, || format!("constrained min {}; {summary}", c2.min(c3)))?;
    ensure(c1 >= -1e-4, || format!("constrained I1 violation {c1}; {summary}"))?;
    ensure(elapsed < Duration::from_secs(1800), || format!("too slow; {summary}"))?;
    Ok(summary)
}

fn criterion_11(_: &mut Shared) -> Outcome {
    let checker = common::Checker::default();
    let per_property = 1000;
    let mut lines = Vec::new();
    for (i, (name, check)) in common::PROPERTIES.iter().enumerate() {
        let failures = (0..per_property)
            .filter(|&j| {
                let mut rng = ChaCha8Rng::seed_from_u64(1_000_003 * i as u64 + j as u64);
                !check(&checker, &mut rng)
            })
            .count();
        ensure(failures == 0, || format!("{name}: {failures} of {per_property} instances failed"))?;
        lines.push(*name);
    }
    let ex = postselection_example();
    let post = ex.postselect_output(2, 0, 1, PostSelection::MayBreakCausality).map_err(|e| e.to_string())?;
    ensure(checker.causal(&ex) && !checker.causal(&post), || "fixed post-selection example misbehaves".into())?;
    Ok(format!("{per_property} instances each, zero failures: {}", lines.join(", ")))
}

type Criterion = fn(&mut Shared) -> Outcome;

const CRITERIA: &[(&str, Criterion)] = &[
    ("vertex census, lazy tripartite", criterion_1),
    ("vertex census, full-binary tripartite", criterion_2),
    ("vertex census, lazy 4-partite", criterion_3),
    ("facet enumeration, lazy tripartite", criterion_4),
    ("facet certificates", criterion_5),
    ("causal bounds", criterion_6),
    ("membership of the dynamical mixture", criterion_7),
    ("process reproduction", criterion_8),
    ("classical LP", criterion_9),
    ("see-saw search", criterion_10),
    ("closure property suites", criterion_11),
];

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut shared = Shared::default();
    let mut failed = 0;
    for (i, (name, run)) in CRITERIA.iter().enumerate() {
        let n = i + 1;
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| run(&mut shared))).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = secs(t.elapsed());
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS {name}: {detail} [{took}]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL {name}: {why} [{took}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
