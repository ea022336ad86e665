use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use causal_core::catalog::{game_form, game_success};
use causal_core::geometry::{
    check_certificate, classify_facets, enumerate_facets, polytope_dimension, read_facet_list,
    verify_facet, write_facet_list, DdOptions, FacetVerdict, Inequality, InsertionOrder, SymmetryGroup,
};
use causal_core::membership::{
    causal_bound, is_causal, is_causal_approx, is_mixture_of_fixed_order, MembershipResult, Verdict,
};
use causal_core::number::format_rational;
use causal_core::process::instrument::PSD_TOLERANCE;
use causal_core::process::matrix::born_correlation;
use causal_core::process::optimize::classical_optimize;
use causal_core::process::{
    see_saw, validate_process_with, InstrumentSet, OrderConstraint, PartySpaces, ProcessMatrix,
    SeeSawOptions,
};
use causal_core::stream::write_vertex_file;
use causal_core::{AnyCorrelation, VertexClass};
use clap::Args;
use serde_json::json;

use crate::inputs::Inputs;

/// Exit code when a check finds a noncausal correlation or a violation.
pub const FOUND: u8 = 2;

/// Values below this count as a violation of a `≥ 0` inequality.
const VIOLATION_TOLERANCE: f64 = 1e-6;

pub struct Outcome {
    pub code: u8,
    pub summary: serde_json::Value,
    pub text: String,
}

impl Outcome {
    fn ok(summary: serde_json::Value, text: String) -> Self {
        Self {
            code: 0,
            summary,
            text,
        }
    }
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    /// `lazy:N`, `full-binary:N` or a scenario JSON file.
    pub scenario: String,
    /// Binary vertex file to write.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Skip the affine-dimension computation.
    #[arg(long)]
    pub no_dimension: bool,
}

pub fn enumerate(args: &EnumerateArgs, inputs: &mut Inputs) -> anyhow::Result<Outcome> {
    let s = inputs.scenario(&args.scenario)?;
    let v = inputs.vertices(None, &s)?;
    let classes = v.classify_all();
    let fixed = classes
        .iter()
        .filter(|c| **c == VertexClass::FixedOrder)
        .count();
    let dynamical = classes.len() - fixed;
    let dimension = (!args.no_dimension).then(|| polytope_dimension(&v));
    if let Some(out) = &args.out {
        write_vertex_file(out, &v).with_context(|| format!("writing {}", out.display()))?;
    }
    let mut text = format!("{} total, {fixed} fixed, {dynamical} dynamical", v.len());
    if let Some(d) = dimension {
        write!(text, "\naffine dimension {d}")?;
    }
    Ok(Outcome::ok(
        json!({
            "scenario": s,
            "total": v.len(),
            "fixed_order": fixed,
            "dynamical": dynamical,
            "dimension": dimension,
            "out": args.out,
        }),
        text,
    ))
}

#[derive(Debug, Args)]
pub struct FacetsArgs {
    /// Vertex file written by `enumerate`.
    pub vertices: PathBuf,
    /// Facet list to write (stdout if omitted).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Row insertion order: input, lexmin, lexmax, maxcutoff, mincutoff, random:SEED.
    #[arg(long, default_value = "lexmin")]
    pub order: String,
    /// Abort if an intermediate cone has more rays than this.
    #[arg(long, default_value_t = 5_000_000)]
    pub max_rays: usize,
}

fn parse_order(s: &str) -> anyhow::Result<InsertionOrder> {
    Ok(match s {
        "input" => InsertionOrder::Input,
        "lexmin" => InsertionOrder::LexMin,
        "lexmax" => InsertionOrder::LexMax,
        "maxcutoff" => InsertionOrder::MaxCutoff,
        "mincutoff" => InsertionOrder::MinCutoff,
        _ => match s.strip_prefix("random:") {
            Some(seed) => InsertionOrder::Random(seed.parse().context("bad random seed")?),
            None => bail!("unknown insertion order `{s}`"),
        },
    })
}

fn vertex_file(inputs: &mut Inputs, path: &Path) -> anyhow::Result<causal_core::VertexSet> {
    let bytes = inputs.read(path)?;
    let reader = causal_core::stream::VertexReader::new(bytes.as_slice())?;
    let s = reader.scenario().clone();
    Ok(causal_core::VertexSet::from_block_indices(
        s,
        reader.into_records(),
    )?)
}

pub fn facets(args: &FacetsArgs, inputs: &mut Inputs) -> anyhow::Result<Outcome> {
    let v = vertex_file(inputs, &args.vertices)?;
    let opts = DdOptions {
        order: parse_order(&args.order)?,
        max_rays: args.max_rays,
    };
    let facets = enumerate_facets(&v, &opts)?;
    let list = write_facet_list(v.scenario(), &facets);
    let text = match &args.out {
        Some(out) => {
            std::fs::write(out, &list).with_context(|| format!("writing {}", out.display()))?;
            format!("{} facets", facets.len())
        }
        None => list,
    };
    Ok(Outcome::ok(
        json!({ "facets": facets.len(), "out": args.out }),
        text,
    ))
}

#[derive(Debug, Args)]
pub struct ClassesArgs {
    /// Facet list written by `facets`.
    pub facets: PathBuf,
    /// Class table (JSON) to write.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

pub fn classes(args: &ClassesArgs, inputs: &mut Inputs) -> anyhow::Result<Outcome> {
    let text = inputs.read_text(&args.facets)?;
    let (s, facets) = read_facet_list(&text, None)?;
    let group = SymmetryGroup::new(&s);
    let classes = classify_facets(&facets, &group);
    let positivity = classes.iter().filter(|c| c.positivity).count();
    let symmetric = classes
        .iter()
        .filter(|c| c.party_symmetric && !c.positivity)
        .count();
    if let Some(out) = &args.out {
        std::fs::write(out, serde_json::to_string_pretty(&classes)? + "\n")
            .with_context(|| format!("writing {}", out.display()))?;
    }
    let mut table = format!(
        "{} facets in {} classes ({positivity} positivity, {symmetric} party-symmetric nontrivial)\n",
        facets.len(),
        classes.len()
    );
    for (i, c) in classes.iter().enumerate() {
        let mut flags = Vec::new();
        if c.positivity {
            flags.push("positivity");
        }
        if c.party_symmetric {
            flags.push("symmetric");
        }
        writeln!(
            table,
            "{:>4} {:>5} [{}] {}",
            i + 1,
            c.members,
            flags.join(","),
            c.representative.describe()
        )?;
    }
    Ok(Outcome::ok(
        json!({
            "facets": facets.len(),
            "classes": classes.len(),
            "positivity_classes": positivity,
            "party_symmetric_nontrivial": symmetric,
            "out": args.out,
        }),
        table,
    ))
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Correlation JSON file.
    pub correlation: PathBuf,
    /// Vertex file (enumerated on the fly if omitted).
    #[arg(long)]
    pub vertices: Option<PathBuf>,
    /// Test against fixed-order vertices only.
    #[arg(long)]
    pub fixed_order: bool,
    /// Largest denominator when rationalizing floating-point tables.
    #[arg(long, default_value_t = 1 << 20)]
    pub max_den: u64,
}

pub fn check(args: &CheckArgs, inputs: &mut Inputs) -> anyhow::Result<Outcome> {
    let corr = inputs.correlation(&args.correlation)?.into_correlation()?;
    let v = inputs.vertices(args.vertices.as_deref(), corr.scenario())?;
    let result: MembershipResult = match (&corr, args.fixed_order) {
        (AnyCorrelation::Rational(c), false) => is_causal(c, &v)?,
        (AnyCorrelation::Rational(c), true) => is_mixture_of_fixed_order(c, &v)?,
        (AnyCorrelation::Float(c), false) => is_causal_approx(c, &v, args.max_den)?,
        (AnyCorrelation::Float(c), true) => {
            let mut r = is_mixture_of_fixed_order(&c.rationalize(args.max_den)?, &v)?;
            r.approximate = true;
            r
        }
    };
    let what = if args.fixed_order {
        "mixture of fixed orders"
    } else {
        "causal"
    };
    let text = match &result.verdict {
        Verdict::Causal { weights } => {
            format!("{what} ({} vertices with positive weight)", weights.len())
        }
        Verdict::NonCausal { separating, value } => format!(
            "not {what}: {} is {} here",
            separating.describe(),
            format_rational(value)
        ),
    };
    let code = if result.is_causal() { 0 } else { FOUND };
    Ok(Outcome {
        code,
        summary: serde_json::to_value(&result)?,
        text,
    })
}

fn lifted(inputs: &mut Inputs, name: &str, lift: Option<&str>) -> anyhow::Result<Inequality> {
    let ineq = inputs.inequality(name)?;
    match lift {
        Some(spec) => {
            let target = inputs.scenario(spec)?;
            Ok(ineq.lift(&target)?)
        }
        None => Ok(ineq),
    }
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Catalog name (e.g. `I1`, `J2(4)`) or inequality JSON file.
    pub ineq: String,
    /// Vertex file (enumerated on the fly if omitted).
    #[arg(long)]
    pub vertices: Option<PathBuf>,
    /// Lift onto a scenario with more outputs (`full-binary:3`, ...).
    #[arg(long, value_name = "SCENARIO")]
    pub lift: Option<String>,
}

pub fn bound(args: &BoundArgs, inputs: &mut Inputs) -> anyhow::Result<Outcome> {
    let ineq = lifted(inputs, &args.ineq, args.lift.as_deref())?;
    let v = inputs.vertices(args.vertices.as_deref(), &ineq.scenario)?;
    let b = causal_bound(&ineq, &v)?;
    let game = game_form(&ineq).ok();
    let mut text = format!("{}: minimum {} over causal strategies", args.ineq, b.value);
    if let Some(g) = &game {
        write!(text, "\ngame success <= {}", format_rational(&g.bound))?;
    }
    Ok(Outcome::ok(
        json!({
            "inequality": args.ineq,
            "minimum": b.value,
            "vertex_id": b.vertex_id,
            "vertex": b.vertex,
            "game_bound": game.map(|g| format_rational(&g.bound)),
        }),
        text,
    ))
}

#[derive(Debug, Args)]
pub struct IneqArgs {
    /// Catalog name or inequality JSON file; `list` prints the names.
    pub ineq: String,
    /// Verify that the inequality is a facet of the causal polytope.
    #[arg(long)]
    pub certify: bool,
    /// Vertex file to certify against (enumerated on the fly if omitted).
    #[arg(long)]
    pub vertices: Option<PathBuf>,
    /// Write the inequality as JSON.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Lift onto a scenario with more outputs (`full-binary:3`, ...).
    #[arg(long, value_name = "SCENARIO")]
    pub lift: Option<String>,
}

pub fn ineq(args: &IneqArgs, inputs: &mut Inputs) -> anyhow::Result<Outcome> {
    if args.ineq == "list" {
        let names = causal_core::catalog::NAMES;
        return Ok(Outcome::ok(json!({ "names": names }), names.join("\n")));
    }
    let ineq = lifted(inputs, &args.ineq, args.lift.as_deref())?;
    if let Some(out) = &args.out {
        std::fs::write(out, serde_json::to_string_pretty(&ineq)? + "\n")
            .with_context(|| format!("writing {}", out.display()))?;
    }
    let game = game_form(&ineq).ok();
    let mut text = format!("{}\n{}", ineq.describe(), ineq);
    if let Some(g) = &game {
        write!(text, "\ngame success <= {}", format_rational(&g.bound))?;
    }
    let mut verdict = None;
    if args.certify {
        let v = inputs.vertices(args.vertices.as_deref(), &ineq.scenario)?;
        let records = (0..v.len()).map(|i| Ok(v.block_indices(i)));
        let result = verify_facet(&ineq, records)?;
        let line = match &result {
            FacetVerdict::Facet(cert) => {
                if !check_certificate(cert) {
                    bail!("facet certificate failed independent re-verification");
                }
                format!(
                    "facet: {} affinely independent tight vertices (rank {})",
                    cert.vertices.len(),
                    cert.rank
                )
            }
            FacetVerdict::Violated {
                vertex_id, value, ..
            } => {
                format!("not valid: vertex {vertex_id} gives {value}")
            }
            FacetVerdict::RankDeficient { rank, saturating } => {
                format!("not a facet: {saturating} tight vertices of rank {rank}")
            }
        };
        write!(text, "\n{line}")?;
        verdict = Some(result);
    }
    Ok(Outcome::ok(
        json!({
            "inequality": ineq,
            "description": ineq.describe(),
            "game_bound": game.map(|g| format_rational(&g.bound)),
            "facet": verdict,
        }),
        text,
    ))
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// `W1`, `W3`, `W3_printed` or an operator JSON file.
    #[arg(long)]
    pub process: String,
    /// `measure_resend`, `identity_on_0` or an instrument JSON file.
    #[arg(long, default_value = "measure_resend")]
    pub instruments: String,
    /// Catalog name or inequality JSON file.
    #[arg(long)]
    pub ineq: String,
}

fn born_value(
    ineq: &Inequality,
    w: &ProcessMatrix,
    ins: &InstrumentSet,
) -> anyhow::Result<(f64, Option<f64>)> {
    let corr = born_correlation(w, ins, &ineq.scenario)?;
    let value = ineq.evaluate(&corr)?;
    let success = game_form(ineq)
        .ok()
        .map(|g| game_success(&corr, &g))
        .transpose()?;
    Ok((value, success))
}

pub fn evaluate(args: &EvaluateArgs, inputs: &mut Inputs) -> anyhow::Result<Outcome> {
    let ineq = inputs.inequality(&args.ineq)?;
    let w = inputs.process(&args.process)?;
    let ins = inputs.instruments(&args.instruments, ineq.scenario.num_parties())?;
    let report = validate_process_with(&w, OrderConstraint::Free, PSD_TOLERANCE);
    if !report.valid {
        bail!(
            "invalid process matrix: {}",
            report.diagnostics().join("; ")
        );
    }
    let (value, success) = born_value(&ineq, &w, &ins)?;
    let mut text = format!("{} = {value:.12}", args.ineq);
    if let Some(p) = success {
        write!(text, "\ngame success {p:.12}")?;
    }
    write!(
        text,
        "\nprocess is {}",
        if w.is_classical() {
            "classical (diagonal)"
        } else {
            "not diagonal"
        }
    )?;
    let code = if value < -VIOLATION_TOLERANCE {
        FOUND
    } else {
        0
    };
    Ok(Outcome {
        code,
        summary: json!({
            "inequality": args.ineq,
            "value": value,
            "game_success": success,
            "classical": w.is_classical(),
            "process_report": report,
        }),
        text,
    })
}

#[derive(Debug, Args)]
pub struct ViolateArgs {
    /// Catalog name or inequality JSON file.
    #[arg(long)]
    pub ineq: String,
    /// Input and output dimension of every party.
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `none` or `ABC` (the last party cannot signal to the others).
    #[arg(long, default_value = "none")]
    pub constraint: String,
    /// Upper limit on see-saw sweeps per restart.
    #[arg(long, default_value_t = 60)]
    pub max_sweeps: usize,
    /// Exact LP over classical (diagonal) processes with fixed instruments
    /// instead of the see-saw.
    #[arg(long)]
    pub classical: bool,
    /// Instruments for `--classical`: `measure_resend`, `identity_on_0` or a file.
    #[arg(long, default_value = "measure_resend")]
    pub instruments: String,
    /// Directory for `process.json` and `instruments.json`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn violate(args: &ViolateArgs, inputs: &mut Inputs) -> anyhow::Result<Outcome> {
    let ineq = inputs.inequality(&args.ineq)?;
    let order: OrderConstraint = args.constraint.parse()?;
    let n = ineq.scenario.num_parties();
    let spaces = PartySpaces::uniform(n, args.dims)?;
    let mut summary =
        json!({ "inequality": args.ineq, "dims": args.dims, "constraint": args.constraint });
    let (w, ins, value) = if args.classical {
        if order != OrderConstraint::Free {
            bail!("--classical does not support order constraints");
        }
        let ins = inputs.instruments(&args.instruments, n)?;
        let opt = classical_optimize(&ineq, &spaces, &ins)?;
        summary["exact_minimum"] = json!(format_rational(&opt.value));
        let value = causal_core::number::rational_to_f64(&opt.value);
        (opt.process(&spaces)?, ins, value)
    } else {
        let opts = SeeSawOptions {
            restarts: args.restarts,
            seed: args.seed,
            order,
            max_sweeps: args.max_sweeps,
            ..SeeSawOptions::default()
        };
        let result = see_saw(&ineq, &spaces, &opts)?;
        summary["restarts"] = json!(args.restarts);
        summary["seed"] = json!(args.seed);
        summary["best_restart"] = json!(result.best.restart);
        summary["converged"] = json!(result.converged());
        summary["restart_values"] = json!(result.runs.iter().map(|r| r.value).collect::<Vec<_>>());
        (result.process, result.instruments, result.value)
    };
    // Re-read what was written so the reported value is that of the files.
    let (w, ins) = match &args.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let wp = dir.join("process.json");
            let ip = dir.join("instruments.json");
            std::fs::write(&wp, serde_json::to_string(&w.to_file())? + "\n")?;
            std::fs::write(&ip, serde_json::to_string(&ins.to_file())? + "\n")?;
            let w = inputs.process(wp.to_str().context("non-UTF-8 output path")?)?;
            let ins = inputs.instruments(ip.to_str().context("non-UTF-8 output path")?, n)?;
            (w, ins)
        }
        None => (w, ins),
    };
    let report = validate_process_with(&w, order, 1e-7);
    let instruments_valid = ins.validate(1e-7).is_none();
    let (reported, success) = born_value(&ineq, &w, &ins)?;
    if (reported - value).abs() > 1e-6 {
        bail!("stored operators give {reported}, optimizer reported {value}");
    }
    summary["value"] = json!(reported);
    summary["game_success"] = json!(success);
    summary["process_valid"] = json!(report.valid);
    summary["instruments_valid"] = json!(instruments_valid);
    summary["process_report"] = serde_json::to_value(&report)?;
    if !report.valid || !instruments_valid {
        bail!(
            "optimizer returned invalid operators: {}",
            report.diagnostics().join("; ")
        );
    }
    let mut text = format!("{} = {reported:.10}", args.ineq);
    if let Some(p) = success {
        write!(text, " (game success {p:.10})")?;
    }
    if let Some(dir) = &args.out_dir {
        write!(
            text,
            "\nwrote {}/process.json and instruments.json",
            dir.display()
        )?;
    }
    let code = if reported < -VIOLATION_TOLERANCE {
        FOUND
    } else {
        0
    };
    Ok(Outcome {
        code,
        summary,
        text,
    })
}
