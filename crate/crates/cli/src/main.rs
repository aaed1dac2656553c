//! `cctu`: command-line front end for the R-CCTUF solver.

mod fuzz;
mod report;

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use cctu_core::error::Error;
use cctu_core::exact::{tu_violation, IntMatrix, TuMatrix};
use cctu_core::harness::{generate, parse_instance, parse_matrix, serialize_instance, verify_solution, GenOptions, Kind};
use cctu_core::lp::{oracle_solve, relaxation_point, width, Width, DEFAULT_ORACLE_BUDGET};
use cctu_core::model::{Outcome, RCctufInstance};
use cctu_core::pattern::solve_rcctuf_with_budget;
use cctu_core::seymour::{classify, Classification};
use cctu_core::structure::{find_flat_or_solve, proximal_solution, FlatnessOutcome};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;

use report::{strings, FlatRow, SolveReport, Timings};

const EXIT_OK: u8 = 0;
const EXIT_INFEASIBLE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SCALE: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "cctu", version, about = "Congruency-constrained feasibility and optimization over totally unimodular systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (a directory for `fuzz` reproducers).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Enumeration budget for the oracle.
    #[arg(long = "max-enum", global = true, default_value_t = DEFAULT_ORACLE_BUDGET)]
    max_enum: u64,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file, `-` for stdin.
    file: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Override the modulus.
    #[arg(long)]
    m: Option<u32>,
    /// Override the residue set, comma separated.
    #[arg(long, value_delimiter = ',')]
    residues: Option<Vec<u32>>,
    /// Skip the total unimodularity check on load.
    #[arg(long)]
    no_verify_tu: bool,
}

#[derive(Args)]
struct MatrixArgs {
    /// Matrix or instance file, `-` for stdin.
    file: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve through the decomposition machinery.
    Solve(InstanceArgs),
    /// Solve by bounded enumeration around a relaxation point.
    Oracle(InstanceArgs),
    /// Check total unimodularity, reporting a violating submatrix.
    CheckTu(MatrixArgs),
    /// Print the classification tree of a matrix.
    Decompose(MatrixArgs),
    /// Integer widths of the rows (or one direction) and the flatness outcome.
    Width {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Direction as space-separated integers instead of the rows of T.
        #[arg(long)]
        direction: Option<String>,
    },
    /// Move a solution next to a relaxation vertex and report the distance.
    Proximity(InstanceArgs),
    /// Write a random instance of the requested structure.
    Generate {
        #[arg(long, default_value = "network")]
        kind: String,
        #[arg(short = 'n', default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        m: u32,
        /// Explicit residue set, comma separated.
        #[arg(long, value_delimiter = ',')]
        residues: Option<Vec<u32>>,
        /// Size of a random residue set (default m − 1).
        #[arg(long)]
        r_size: Option<usize>,
        #[arg(long)]
        objective: bool,
        /// Append ± unit rows for every column (sum kinds).
        #[arg(long)]
        boxed: bool,
        #[arg(long, default_value_t = 2)]
        slack: i64,
    },
    /// Check a candidate solution row by row.
    Verify {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Space-separated integers.
        #[arg(long)]
        solution: String,
    },
    /// Compare the solver against the oracle on random instances.
    Fuzz {
        #[arg(short = 'n', default_value_t = 200)]
        count: u64,
    },
}

/// A finished command: what to print and how to exit.
struct Done {
    text: String,
    code: u8,
}

fn failure(e: &Error) -> u8 {
    match e {
        Error::Scale(_) | Error::Unsupported(_) => EXIT_SCALE,
        Error::RelaxationInfeasible => EXIT_INFEASIBLE,
        Error::Dimension(_) | Error::Invalid(_) => EXIT_INPUT,
    }
}

fn read_source(file: &Option<PathBuf>, input: &Option<PathBuf>) -> Result<String, Error> {
    let path = input.as_ref().or(file.as_ref()).ok_or_else(|| Error::Invalid("no input given (pass a file or --input)".into()))?;
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Error::Invalid(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn load(args: &InstanceArgs) -> Result<RCctufInstance, Error> {
    let text = read_source(&args.file, &args.input)?;
    let mut inst = parse_instance(&text, !args.no_verify_tu)?;
    if let Some(m) = args.m {
        let r = args.residues.clone().unwrap_or_else(|| inst.r.iter().copied().filter(|&v| v < m).collect());
        inst = RCctufInstance::new(inst.p, inst.gamma, m, r.into_iter().collect(), inst.c)?;
    } else if let Some(r) = &args.residues {
        inst = RCctufInstance::new(inst.p, inst.gamma, inst.m, r.iter().copied().collect(), inst.c)?;
    }
    Ok(inst)
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn parse_vector(s: &str) -> Result<Vec<BigInt>, Error> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|w| !w.is_empty())
        .map(|w| w.parse::<BigInt>().map_err(|_| Error::Invalid(format!("`{w}` is not an integer"))))
        .collect()
}

/// Builds the report for a point outcome, re-verifying any point first.
fn finish_report(inst: &RCctufInstance, outcome: &Outcome, solve_ms: f64) -> Result<(SolveReport, u8), String> {
    let t = Instant::now();
    let check = outcome.point().map(|x| verify_solution(&inst.without_objective(), x));
    let objective = match (outcome, &inst.c) {
        (Outcome::Feasible(x), Some(_)) => Some(inst.objective(x)),
        _ => None,
    };
    let mut report = SolveReport::from_outcome(outcome, objective, check.as_ref());
    report.timings = Timings { solve_ms, verify_ms: t.elapsed().as_secs_f64() * 1e3 };
    if let Some(c) = &check {
        if !c.is_ok() {
            return Err(format!("returned point failed verification:\n{c}"));
        }
    }
    if let Outcome::Unbounded { ray, .. } = outcome {
        let tr = inst.p.t.mul_vec(ray);
        let c = inst.c.as_ref().expect("unbounded needs an objective");
        let down = cctu_core::exact::dot(c, ray) < BigInt::from(0);
        if !down || tr.iter().any(|v| *v > BigInt::from(0)) {
            return Err("returned ray is not a recession direction of decreasing cost".into());
        }
    }
    if matches!(outcome, Outcome::Infeasible) {
        match find_flat_or_solve(&inst.without_objective()) {
            Ok(FlatnessOutcome::Flat { row, width, .. }) => report.flat = Some(FlatRow { row, width: width.to_string() }),
            Ok(FlatnessOutcome::CongruenceInfeasible) => report.message = Some("γᵀx ∈ R has no integer solution".into()),
            Ok(FlatnessOutcome::Solution(_)) => return Err("flatness search found a solution of an infeasible instance".into()),
            Err(Error::RelaxationInfeasible) => report.message = Some("relaxation infeasible".into()),
            Err(e) => report.message = Some(format!("flatness search: {e}")),
        }
    }
    let code = match outcome {
        Outcome::Infeasible => EXIT_INFEASIBLE,
        _ => EXIT_OK,
    };
    Ok((report, code))
}

fn emit_report(report: &SolveReport, code: u8, as_json: bool) -> Done {
    Done { text: if as_json { json(report) } else { report.to_string() }, code }
}

fn cmd_solve(cli: &Cli, args: &InstanceArgs, use_oracle: bool) -> Result<Done, Error> {
    let inst = load(args)?;
    let t = Instant::now();
    let (outcome, stats) = if use_oracle {
        (oracle_solve(&inst, cli.max_enum)?, None)
    } else {
        match solve_rcctuf_with_budget(&inst, cli.max_enum) {
            Ok(s) => (s.outcome, Some(s.stats)),
            Err(Error::Unsupported(msg)) => {
                let mut report = SolveReport::unsupported(msg);
                report.timings.solve_ms = t.elapsed().as_secs_f64() * 1e3;
                return Ok(emit_report(&report, EXIT_SCALE, cli.json));
            }
            Err(Error::RelaxationInfeasible) => (Outcome::Infeasible, None),
            Err(e) => return Err(e),
        }
    };
    let solve_ms = t.elapsed().as_secs_f64() * 1e3;
    match finish_report(&inst, &outcome, solve_ms) {
        Ok((mut report, code)) => {
            report.oracle_fallback = stats.as_ref().map_or(use_oracle, |s| s.oracle_fallback());
            report.stats = stats;
            Ok(emit_report(&report, code, cli.json))
        }
        Err(msg) => Ok(Done { text: format!("internal error: {msg}\n"), code: EXIT_INTERNAL }),
    }
}

#[derive(Serialize)]
struct TuReport {
    totally_unimodular: bool,
    rows: usize,
    cols: usize,
    violation: Option<ViolationReport>,
}

#[derive(Serialize)]
struct ViolationReport {
    rows: Vec<usize>,
    cols: Vec<usize>,
    det: String,
}

fn cmd_check_tu(cli: &Cli, args: &MatrixArgs) -> Result<Done, Error> {
    let t = parse_matrix(&read_source(&args.file, &args.input)?)?;
    let v = tu_violation(&t);
    let report = TuReport {
        totally_unimodular: v.is_none(),
        rows: t.rows(),
        cols: t.cols(),
        violation: v.map(|v| ViolationReport { rows: v.rows, cols: v.cols, det: v.det.to_string() }),
    };
    let text = if cli.json {
        json(&report)
    } else {
        match &report.violation {
            None => "true\n".to_string(),
            Some(v) => format!("false\nrows {:?} cols {:?} determinant {}\n", v.rows, v.cols, v.det),
        }
    };
    Ok(Done { text, code: if report.totally_unimodular { EXIT_OK } else { EXIT_INFEASIBLE } })
}

#[derive(Serialize)]
struct TreeNode {
    class: String,
    rows: usize,
    cols: usize,
    detail: Vec<String>,
    children: Vec<TreeNode>,
}

const TREE_DEPTH: usize = 6;

fn tree(m: &IntMatrix, depth: usize) -> TreeNode {
    let mut node = TreeNode { class: String::new(), rows: m.rows(), cols: m.cols(), detail: Vec::new(), children: Vec::new() };
    let cls = match classify(&TuMatrix::assume(m.clone())) {
        Ok(c) => c,
        Err(e) => {
            node.class = "unclassified".into();
            node.detail.push(e.to_string());
            return node;
        }
    };
    node.class = cls.tag().to_string();
    node.detail = cls.to_string().lines().skip(1).map(|l| l.trim().to_string()).collect();
    let sum = match &cls {
        Classification::Sum(s) | Classification::PivotThenSum { sum: s, .. } => s,
        _ => return node,
    };
    if depth == 0 {
        node.detail.push("depth limit reached".into());
        return node;
    }
    if let Ok((left, right)) = sum.summands() {
        node.children = vec![tree(&left, depth - 1), tree(&right, depth - 1)];
    }
    node
}

fn render(node: &TreeNode, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    out.push_str(&format!("{pad}- {} ({}x{})\n", node.class, node.rows, node.cols));
    for d in &node.detail {
        out.push_str(&format!("{pad}    {d}\n"));
    }
    for c in &node.children {
        render(c, indent + 1, out);
    }
}

fn cmd_decompose(cli: &Cli, args: &MatrixArgs) -> Result<Done, Error> {
    let t = parse_matrix(&read_source(&args.file, &args.input)?)?;
    if let Some(v) = tu_violation(&t) {
        return Err(Error::Invalid(format!(
            "matrix is not totally unimodular: rows {:?} cols {:?} determinant {}",
            v.rows, v.cols, v.det
        )));
    }
    let root = tree(&t, TREE_DEPTH);
    let text = if cli.json {
        json(&root)
    } else {
        let mut s = String::new();
        render(&root, 0, &mut s);
        s
    };
    Ok(Done { text, code: EXIT_OK })
}

#[derive(Serialize)]
struct WidthLine {
    row: Option<usize>,
    width: Option<String>,
    flat: bool,
}

#[derive(Serialize)]
struct WidthReport {
    threshold: i64,
    widths: Vec<WidthLine>,
    outcome: String,
    flat_row: Option<usize>,
}

fn cmd_width(cli: &Cli, args: &InstanceArgs, direction: &Option<String>) -> Result<Done, Error> {
    let inst = load(args)?.without_objective();
    let threshold = inst.slack() as i64 - 1;
    let dirs: Vec<(Option<usize>, Vec<BigInt>)> = match direction {
        Some(d) => {
            let d = parse_vector(d)?;
            if d.len() != inst.n() {
                return Err(Error::Dimension(format!("direction has {} entries, vars is {}", d.len(), inst.n())));
            }
            vec![(None, d)]
        }
        None => (0..inst.p.k()).map(|i| (Some(i), inst.p.t.row(i).to_vec())).collect(),
    };
    let mut widths = Vec::new();
    for (row, d) in dirs {
        let w = match width(&inst.p, &d)? {
            Width::Finite { width, .. } => Some(width),
            Width::Infinite => None,
        };
        let flat = w.as_ref().map_or(false, |w| *w <= BigInt::from(threshold));
        widths.push(WidthLine { row, width: w.map(|w| w.to_string()), flat });
    }
    let (outcome, flat_row, code) = match find_flat_or_solve(&inst) {
        Ok(FlatnessOutcome::Flat { row, width, .. }) => (format!("flat row {row} of width {width}"), Some(row), EXIT_OK),
        Ok(FlatnessOutcome::Solution(x)) => (format!("solution {}", strings(&x).join(" ")), None, EXIT_OK),
        Ok(FlatnessOutcome::CongruenceInfeasible) => ("congruence has no integer solution".into(), None, EXIT_INFEASIBLE),
        Err(Error::RelaxationInfeasible) => ("relaxation infeasible".into(), None, EXIT_INFEASIBLE),
        Err(e) => return Err(e),
    };
    let report = WidthReport { threshold, widths, outcome, flat_row };
    let text = if cli.json {
        json(&report)
    } else {
        let mut s = format!("flat threshold m - |R| - 1 = {threshold}\n");
        for w in &report.widths {
            let label = w.row.map_or("direction".to_string(), |r| format!("row {r}"));
            let width = w.width.clone().unwrap_or_else(|| "infinite".into());
            s.push_str(&format!("{label}: width {width}{}\n", if w.flat { " (flat)" } else { "" }));
        }
        s.push_str(&format!("outcome: {}\n", report.outcome));
        s
    };
    Ok(Done { text, code })
}

#[derive(Serialize)]
struct ProximityReport {
    x0: Vec<String>,
    y: Vec<String>,
    x: Vec<String>,
    bound: u32,
    linf: String,
    max_row_shift: String,
    within_bound: bool,
}

fn cmd_proximity(cli: &Cli, args: &InstanceArgs) -> Result<Done, Error> {
    let inst = load(args)?.without_objective();
    let Some((x0, _)) = relaxation_point(&inst)? else {
        return Ok(Done { text: "relaxation infeasible\n".into(), code: EXIT_INFEASIBLE });
    };
    let y = match solve_rcctuf_with_budget(&inst, cli.max_enum) {
        Ok(s) => s.outcome,
        Err(Error::Unsupported(_)) => oracle_solve(&inst, cli.max_enum)?,
        Err(e) => return Err(e),
    };
    let Some(y) = y.point().map(<[BigInt]>::to_vec) else {
        return Ok(Done { text: "infeasible\n".into(), code: EXIT_INFEASIBLE });
    };
    let x = proximal_solution(&inst, &x0, &y)?;
    let diff: Vec<BigInt> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
    let linf = diff.iter().map(|v| if *v < BigInt::from(0) { -v } else { v.clone() }).max().unwrap_or_default();
    let shift = inst.p.t.mul_vec(&diff).into_iter().map(|v| if v < BigInt::from(0) { -v } else { v }).max().unwrap_or_default();
    let bound = inst.slack();
    let report = ProximityReport {
        x0: strings(&x0),
        y: strings(&y),
        x: strings(&x),
        bound,
        within_bound: linf <= BigInt::from(bound) && shift <= BigInt::from(bound),
        linf: linf.to_string(),
        max_row_shift: shift.to_string(),
    };
    if !inst.is_feasible(&x) {
        return Ok(Done { text: "internal error: proximal solution is infeasible\n".into(), code: EXIT_INTERNAL });
    }
    let text = if cli.json {
        json(&report)
    } else {
        format!(
            "x0: {}\ny: {}\nx: {}\n|x - x0|_inf = {} (bound m - |R| = {})\nmax row shift = {}\nwithin bound: {}\n",
            report.x0.join(" "),
            report.y.join(" "),
            report.x.join(" "),
            report.linf,
            report.bound,
            report.max_row_shift,
            report.within_bound
        )
    };
    Ok(Done { text, code: EXIT_OK })
}

#[derive(Serialize)]
struct GenerateReport {
    kind: String,
    seed: u64,
    instance: String,
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    cli: &Cli,
    kind: &str,
    n: usize,
    m: u32,
    residues: &Option<Vec<u32>>,
    r_size: Option<usize>,
    objective: bool,
    boxed: bool,
    slack: i64,
) -> Result<Done, Error> {
    let kind: Kind = kind.parse()?;
    let size = residues.as_ref().map_or(r_size.unwrap_or((m as usize).saturating_sub(1).max(1)), Vec::len);
    let opts = GenOptions { objective, boxed, slack, ..GenOptions::default() };
    let mut inst = generate(kind, n, m, size.max(1), cli.seed, opts)?.instance;
    if let Some(r) = residues {
        inst = RCctufInstance::new(inst.p, inst.gamma, m, r.iter().copied().collect(), inst.c)?;
    }
    let body = serialize_instance(&inst);
    let text = if cli.json {
        json(&GenerateReport { kind: kind.to_string(), seed: cli.seed, instance: body })
    } else {
        format!("# {kind} instance, seed {}\n{body}", cli.seed)
    };
    Ok(Done { text, code: EXIT_OK })
}

#[derive(Serialize)]
struct VerifyReport {
    ok: bool,
    residue: u32,
    residue_ok: bool,
    violations: Vec<(usize, String)>,
}

fn cmd_verify(cli: &Cli, args: &InstanceArgs, solution: &str) -> Result<Done, Error> {
    let inst = load(args)?;
    let x = parse_vector(solution)?;
    if x.len() != inst.n() {
        return Err(Error::Dimension(format!("solution has {} entries, vars is {}", x.len(), inst.n())));
    }
    let v = verify_solution(&inst, &x);
    let text = if cli.json {
        json(&VerifyReport {
            ok: v.is_ok(),
            residue: v.residue,
            residue_ok: v.residue_ok,
            violations: v.violations.iter().map(|r| (r.row, r.slack.to_string())).collect(),
        })
    } else {
        format!("{v}\n{}\n", if v.is_ok() { "PASS" } else { "FAIL" })
    };
    Ok(Done { text, code: if v.is_ok() { EXIT_OK } else { EXIT_INFEASIBLE } })
}

#[derive(Serialize)]
struct FuzzReport {
    seed: u64,
    cases: u64,
    agreements: usize,
    disagreements: usize,
    errors: usize,
    oracle_fallbacks: usize,
    reproducers: Vec<String>,
    failures: Vec<fuzz::Case>,
}

fn cmd_fuzz(cli: &Cli, count: u64) -> Result<Done, Error> {
    let results = fuzz::run(cli.seed, count, cli.max_enum);
    let dir = cli.output.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut reproducers = Vec::new();
    let mut failures = Vec::new();
    for (case, inst) in &results {
        if case.agrees() {
            continue;
        }
        failures.push(case.clone());
        if let Some(inst) = inst {
            let small = fuzz::minimize(inst, cli.max_enum);
            fs::create_dir_all(&dir).map_err(|e| Error::Invalid(format!("{}: {e}", dir.display())))?;
            let path = dir.join(format!("fuzz-repro-{}.txt", case.seed));
            let header = format!(
                "# fuzz case {} (seed {}, kind {}): solver {:?}, oracle {:?}{}\n",
                case.index,
                case.seed,
                case.kind,
                case.solver,
                case.oracle,
                case.error.as_ref().map_or(String::new(), |e| format!(", error {e}"))
            );
            fs::write(&path, header + &serialize_instance(&small)).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
            reproducers.push(path.display().to_string());
        }
    }
    let errors = failures.iter().filter(|c| c.error.is_some()).count();
    let report = FuzzReport {
        seed: cli.seed,
        cases: count,
        agreements: results.iter().filter(|(c, _)| c.agrees()).count(),
        disagreements: failures.len() - errors,
        errors,
        oracle_fallbacks: results.iter().filter(|(c, _)| c.oracle_fallback).count(),
        reproducers,
        failures,
    };
    let text = if cli.json {
        json(&report)
    } else {
        let mut s = format!(
            "fuzz seed {}: {} cases, {} agreements, {} disagreements, {} errors, {} with oracle fallback\n",
            report.seed, report.cases, report.agreements, report.disagreements, report.errors, report.oracle_fallbacks
        );
        for c in &report.failures {
            s.push_str(&format!(
                "  case {} seed {} {} n={} m={} |R|={}: solver {:?} oracle {:?} {}\n",
                c.index,
                c.seed,
                c.kind,
                c.n,
                c.m,
                c.r_size,
                c.solver,
                c.oracle,
                c.error.clone().unwrap_or_default()
            ));
        }
        for r in &report.reproducers {
            s.push_str(&format!("  reproducer: {r}\n"));
        }
        s
    };
    let code = if report.failures.is_empty() { EXIT_OK } else { EXIT_INFEASIBLE };
    Ok(Done { text, code })
}

fn run(cli: &Cli) -> Result<Done, Error> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(cli, a, false),
        Command::Oracle(a) => cmd_solve(cli, a, true),
        Command::CheckTu(a) => cmd_check_tu(cli, a),
        Command::Decompose(a) => cmd_decompose(cli, a),
        Command::Width { inst, direction } => cmd_width(cli, inst, direction),
        Command::Proximity(a) => cmd_proximity(cli, a),
        Command::Generate { kind, n, m, residues, r_size, objective, boxed, slack } => {
            cmd_generate(cli, kind, *n, *m, residues, *r_size, *objective, *boxed, *slack)
        }
        Command::Verify { inst, solution } => cmd_verify(cli, inst, solution),
        Command::Fuzz { count } => cmd_fuzz(cli, *count),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let done = match run(&cli) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(failure(&e));
        }
    };
    let written = match &cli.output {
        Some(path) if !matches!(cli.command, Command::Fuzz { .. }) => fs::write(path, &done.text),
        _ => {
            print!("{}", done.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT);
    }
    ExitCode::from(done.code)
}
