//! `tfmbe` command-line tool.
//!
//! Every flag may also come from a flat `key = value` file passed with
//! `--config PATH`; flags given on the command line win. Exit status is 0 on
//! success, 2 when a checked invariant is violated and 1 on any error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tfmbe::harness::config::{parse_list, read_config};
use tfmbe::harness::{
    audit_mesh, check_invariants, coarsening_continue, coarsening_run, convergence_study, kernel_audit,
    write_convergence_csv, write_convergence_json, CoarseningSpec, Format, InvariantChecks, MeshKind,
};
use tfmbe::stepper::{AdaptiveConfig, Solver, StepBoundMode};
use tfmbe::{ModelParams, Scheme, SolverConfig};

#[derive(Parser, Debug)]
#[command(name = "tfmbe", version, about = "Variable-step L1 solver for the time-fractional MBE model")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convergence orders on the manufactured solution.
    Converge(ConvergeArgs),
    /// Unforced run from the benchmark initial datum.
    Simulate(SimulateArgs),
    /// Kernel identity residuals and DCC bounds on one mesh.
    KernelsCheck(KernelsArgs),
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[arg(long)]
    alpha: f64,
    /// Comma-separated grading exponents.
    #[arg(long)]
    gammas: String,
    /// Comma-separated step counts.
    #[arg(long = "Ns")]
    ns: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    grid: usize,
    /// Output file; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    L1,
    Splitting,
    Euler,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::L1 => Scheme::L1Implicit,
            SchemeArg::Splitting => Scheme::ConvexSplitting,
            SchemeArg::Euler => Scheme::BackwardEuler,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundArg {
    Off,
    Convergence,
    Solvability,
}

impl From<BoundArg> for StepBoundMode {
    fn from(b: BoundArg) -> Self {
        match b {
            BoundArg::Off => StepBoundMode::Off,
            BoundArg::Convergence => StepBoundMode::Convergence,
            BoundArg::Solvability => StepBoundMode::Solvability,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SnapshotFormat {
    Csv,
    Bin,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RecordFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    eps2: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1000.0)]
    eta: f64,
    #[arg(long = "tau-min", default_value_t = 1e-3)]
    tau_min: f64,
    #[arg(long = "tau-max", default_value_t = 0.1)]
    tau_max: f64,
    /// End of the graded initial cell.
    #[arg(long = "graded-t0", default_value_t = 0.01)]
    graded_t0: f64,
    /// Use this fixed step after the graded cell instead of adaptive steps.
    #[arg(long = "uniform-step")]
    uniform_step: Option<f64>,
    #[arg(long = "T")]
    t_end: f64,
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Comma-separated snapshot times.
    #[arg(long, default_value = "")]
    snapshots: String,
    #[arg(long = "snapshot-format", value_enum, default_value_t = SnapshotFormat::Csv)]
    snapshot_format: SnapshotFormat,
    #[arg(long, value_enum, default_value_t = SchemeArg::L1)]
    scheme: SchemeArg,
    #[arg(long = "step-bound", value_enum, default_value_t = BoundArg::Solvability)]
    step_bound: BoundArg,
    #[arg(long = "fp-tol", default_value_t = 1e-12)]
    fp_tol: f64,
    #[arg(long = "fp-max-iters", default_value_t = 500)]
    fp_max_iters: usize,
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    dealias: bool,
    /// Record format; by default taken from the `--out` extension.
    #[arg(long, value_enum)]
    format: Option<RecordFormat>,
    /// Write a checkpoint of the final state here.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from a checkpoint instead of the initial datum.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeshArg {
    Uniform,
    Graded,
    Random,
}

impl From<MeshArg> for MeshKind {
    fn from(m: MeshArg) -> Self {
        match m {
            MeshArg::Uniform => MeshKind::Uniform,
            MeshArg::Graded => MeshKind::Graded,
            MeshArg::Random => MeshKind::Random,
        }
    }
}

#[derive(Args, Debug)]
struct KernelsArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = MeshArg::Uniform)]
    mesh: MeshArg,
    #[arg(long = "N", default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print CSV instead of the aligned table.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
    csv: bool,
    /// Also write the CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Outcome {
    Clean,
    Violations(Vec<String>),
}

type CliResult = Result<Outcome, Box<dyn std::error::Error>>;

/// Pulls `--config PATH` out of `argv` and splices the file's entries in
/// right after the subcommand so later command-line flags override them.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, Box<dyn std::error::Error>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy().into_owned();
        if s == "--config" {
            config = Some(PathBuf::from(it.next().ok_or("--config needs a path")?));
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let entries = read_config(&path)?;
    let sub = rest
        .iter()
        .position(|a| {
            let a = a.to_string_lossy();
            a == "converge" || a == "simulate" || a == "kernels-check"
        })
        .ok_or("--config needs a subcommand")?;
    let injected: Vec<OsString> = entries
        .into_iter()
        .map(|(k, v)| OsString::from(format!("--{}={}", cli_key(&k), v)))
        .collect();
    rest.splice(sub + 1..sub + 1, injected);
    Ok(rest)
}

/// Config keys are normalized to dashes; restore the few flags whose names
/// are case-sensitive.
fn cli_key(k: &str) -> String {
    match k.to_ascii_lowercase().as_str() {
        "ns" => "Ns".into(),
        "t" | "t-end" => "T".into(),
        "n" => "N".into(),
        _ => k.to_string(),
    }
}

fn writer(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn converge(a: &ConvergeArgs) -> CliResult {
    let gammas: Vec<f64> = parse_list(&a.gammas)?;
    let ns: Vec<usize> = parse_list(&a.ns)?;
    if gammas.is_empty() || ns.is_empty() {
        return Err("need at least one gamma and one N".into());
    }
    let tables = convergence_study(a.alpha, &gammas, &ns, a.grid, a.seed, &SolverConfig::default())?;
    match Format::from_path(&a.out) {
        Format::Json => write_convergence_json(&tables, writer(&a.out)?)?,
        Format::Csv => write_convergence_csv(&tables, writer(&a.out)?)?,
    }
    let mut violations = Vec::new();
    let mut failures = Vec::new();
    for t in &tables {
        for r in &t.rows {
            println!(
                "gamma={} N={} tau={:.3e} e={} order={}",
                t.gamma,
                r.n,
                r.tau_max,
                r.e_n.map_or_else(|| "failed".to_string(), |e| format!("{e:.3e}")),
                r.order.map_or_else(|| "-".to_string(), |o| format!("{o:.3}"))
            );
            if let Some(f) = &r.failure {
                failures.push(format!("gamma={} N={}: {f}", t.gamma, r.n));
            }
            violations.extend(r.violations.iter().map(|v| format!("gamma={} N={}: {v}", t.gamma, r.n)));
        }
    }
    if !failures.is_empty() {
        return Err(format!("failed cells: {}", failures.join("; ")).into());
    }
    Ok(if violations.is_empty() {
        Outcome::Clean
    } else {
        Outcome::Violations(violations)
    })
}

fn snapshot_path(out: &Path, index: usize, ext: &str) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_snap{index}.{ext}"))
}

fn simulate(a: &SimulateArgs) -> CliResult {
    let scheme: Scheme = a.scheme.into();
    // backward Euler ignores α but the parameter set still validates it
    let params = ModelParams::new(a.eps2, a.kappa, a.alpha)?;
    let mut adaptive = AdaptiveConfig::new(a.tau_min, a.tau_max, a.eta)?;
    adaptive.graded_t0 = a.graded_t0;
    let cfg = SolverConfig {
        fp_tol: a.fp_tol,
        fp_max_iters: a.fp_max_iters,
        scheme,
        enforce_step_bound: a.step_bound.into(),
        adaptive: Some(adaptive),
        linear_only: false,
        dealias: a.dealias,
    };
    let spec = CoarseningSpec {
        params,
        m: a.grid,
        t_end: a.t_end,
        cfg,
        uniform_step: a.uniform_step,
        snapshot_times: parse_list(&a.snapshots)?,
    };
    let out = match &a.resume {
        Some(path) => {
            let solver = Solver::resume(io::BufReader::new(File::open(path)?), cfg, None)?;
            coarsening_continue(&spec, solver)?
        }
        None => coarsening_run(&spec)?,
    };
    if let Some(path) = &a.checkpoint {
        let mut w = writer(path)?;
        out.solver.write_checkpoint(&mut w)?;
        w.flush()?;
    }
    let area = out.solver.grid().area();
    let mut record = out.record;
    let ext = match a.snapshot_format {
        SnapshotFormat::Csv => "csv",
        SnapshotFormat::Bin => "bin",
    };
    for (i, s) in out.snapshots.iter().enumerate() {
        let path = snapshot_path(&a.out, i, ext);
        match a.snapshot_format {
            SnapshotFormat::Csv => s.field.write_csv(writer(&path)?)?,
            SnapshotFormat::Bin => s.field.write_binary(writer(&path)?)?,
        }
        record.metadata.extra.insert(
            format!("snapshot{i}"),
            format!("requested={} t={} n={} file={}", s.requested, s.t, s.n, path.display()),
        );
    }
    let format = match a.format {
        Some(RecordFormat::Csv) => Format::Csv,
        Some(RecordFormat::Json) => Format::Json,
        None => Format::from_path(&a.out),
    };
    record.emit(format, &a.out)?;
    if let Some(e) = out.failure {
        return Err(Box::new(e));
    }
    let last = record.rows.last().expect("initial row");
    println!(
        "steps={} t={} E={:.6e} E_alpha={:.6e}",
        record.rows.len() - 1,
        last.t_n,
        last.energy,
        last.e_alpha
    );
    let violations = check_invariants(&record, area, InvariantChecks::for_config(&cfg));
    Ok(if violations.is_empty() {
        Outcome::Clean
    } else {
        Outcome::Violations(violations)
    })
}

fn kernels_check(a: &KernelsArgs) -> CliResult {
    let mesh = audit_mesh(a.mesh.into(), a.n, a.gamma, a.seed)?;
    let r = kernel_audit(a.alpha, mesh)?;
    let header = "alpha,mesh,N,gamma,seed,orthogonality,complementarity,min_dcc,sum_bound_margin,max_decay_ratio";
    let line = format!(
        "{},{:?},{},{},{},{:e},{:e},{:e},{:e},{:e}",
        a.alpha,
        a.mesh,
        a.n,
        a.gamma,
        a.seed,
        r.orthogonality,
        r.complementarity,
        r.min_dcc,
        r.sum_bound_margin,
        r.max_decay_ratio
    )
    .to_lowercase();
    if a.csv {
        println!("{header}\n{line}");
    } else {
        println!("{:<28}{:.3e}", "max orthogonality residual", r.orthogonality);
        println!("{:<28}{:.3e}", "max complementarity residual", r.complementarity);
        println!("{:<28}{:.3e}", "min DCC kernel", r.min_dcc);
        println!("{:<28}{:.3e}", "min DCC sum-bound margin", r.sum_bound_margin);
        println!("{:<28}{:.3e}", "max DCC decay ratio", r.max_decay_ratio);
    }
    if let Some(path) = &a.out {
        let mut w = writer(path)?;
        writeln!(w, "{header}\n{line}")?;
        w.flush()?;
    }
    let mut violations = Vec::new();
    if r.orthogonality > 1e-10 {
        violations.push(format!("orthogonality residual {:e}", r.orthogonality));
    }
    if r.complementarity > 1e-10 {
        violations.push(format!("complementarity residual {:e}", r.complementarity));
    }
    if r.min_dcc <= 0.0 {
        violations.push(format!("non-positive DCC kernel {:e}", r.min_dcc));
    }
    if r.sum_bound_margin < 0.0 {
        violations.push(format!("DCC sum bound exceeded by {:e}", -r.sum_bound_margin));
    }
    Ok(if violations.is_empty() {
        Outcome::Clean
    } else {
        Outcome::Violations(violations)
    })
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Converge(a) => converge(a),
        Command::Simulate(a) => simulate(a),
        Command::KernelsCheck(a) => kernels_check(a),
    };
    match result {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Violations(v)) => {
            for line in &v {
                eprintln!("invariant violated: {line}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
