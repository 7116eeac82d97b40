use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reachmax::benchgen::{self, BenchSpec, ObjectiveKind, SetKind, SystemKind};
use reachmax::geometry::Polytope;
use reachmax::nalgebra::{DMatrix, DVector};
use reachmax::seqlab::{rank_profile, FiniteC0Sequence};
use reachmax::solver::{solve_with, ProblemInstance, SolveReport, SolveStatus, SolverOptions, DEFAULT_N};
use reachmax::{par, Error, Execution};
use serde::{Deserialize, Serialize};

const THREADS_ENV: &str = "REACHMAX_THREADS";

#[derive(Parser)]
#[command(
    name = "reachmax",
    version,
    about = "Maximize a quadratic objective over the reachable values of a convergent affine system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the instance described by a JSON file.
    Solve {
        file: PathBuf,
        /// Print the report as compact JSON.
        #[arg(long, conflicts_with = "pretty")]
        json: bool,
        /// Print the report as indented JSON.
        #[arg(long)]
        pretty: bool,
        /// Number of ranks searched for a positive term (overrides the file).
        #[arg(long = "n")]
        n_cap: Option<usize>,
        /// Duality-measure tolerance of the concave QP solver.
        #[arg(long)]
        tol_qp: Option<f64>,
    },
    /// Generate and solve a batch of random instances.
    Bench {
        #[arg(long)]
        dim: usize,
        /// linear or affine.
        #[arg(long, default_value = "linear")]
        kind: SystemKind,
        /// cxh, cxnh, cah or canh.
        #[arg(long)]
        objective: ObjectiveKind,
        /// box or vertices:<count>.
        #[arg(long = "set")]
        set_kind: SetKind,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Aggregate CSV path; per-instance rows go to `<stem>.instances.csv` next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "n", default_value_t = DEFAULT_N)]
        n_cap: usize,
        /// Leave the time columns empty so reruns produce identical files.
        #[arg(long)]
        no_timing: bool,
        /// Solve instances one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Characteristic ranks of a sequence given as a JSON array.
    AnalyzeSeq {
        file: PathBuf,
        #[arg(long)]
        pretty: bool,
    },
}

/// A failure reported with a stable name and exit code 1.
struct CliError {
    name: &'static str,
    message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError { name: e.name(), message: e.to_string() }
    }
}

impl CliError {
    fn parse(path: &Path, e: serde_json::Error) -> Self {
        CliError { name: "ParseError", message: format!("{}: {e}", path.display()) }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        CliError { name: "Io", message: format!("{}: {e}", path.display()) }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(default)]
    b: Option<Vec<f64>>,
    #[serde(rename = "Q")]
    q_mat: Vec<Vec<f64>>,
    #[serde(default)]
    q: Option<Vec<f64>>,
    initial_set: Polytope,
    #[serde(rename = "N", default)]
    n_cap: Option<usize>,
}

fn matrix(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(Error::InvalidInstance(format!("{name} is empty")).into());
    }
    if let Some(i) = rows.iter().position(|row| row.len() != c) {
        return Err(Error::InvalidInstance(format!(
            "{name} is not rectangular: row {i} has {} entries, row 0 has {c}",
            rows[i].len()
        ))
        .into());
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl InstanceFile {
    fn into_instance(self, n_override: Option<usize>) -> Result<ProblemInstance, CliError> {
        let a = matrix("A", &self.a)?;
        let q_mat = matrix("Q", &self.q_mat)?;
        let d = a.nrows();
        let vec_or_zeros = |v: Option<Vec<f64>>| v.map_or_else(|| DVector::zeros(d), DVector::from_vec);
        let n_cap = n_override.or(self.n_cap).unwrap_or(DEFAULT_N);
        Ok(ProblemInstance::new(a, vec_or_zeros(self.b), q_mat, vec_or_zeros(self.q), self.initial_set, n_cap)?)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e))
}

fn to_json<T: Serialize>(value: &T, pretty: bool) -> String {
    let out = if pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) };
    out.expect("reports contain only finite numbers")
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

fn print_human(r: &SolveReport) {
    println!("status      {:?}", r.status);
    println!("nu_opt      {}", fmt_opt(r.nu_opt));
    println!("k_opt       {}", fmt_opt(r.k_opt));
    match &r.x_opt {
        Some(x) => println!("x_opt       {x:?}"),
        None => println!("x_opt       -"),
    }
    println!("k_pos       {}", fmt_opt(r.k_pos));
    println!("K initial   {}", fmt_opt(r.initial_k()));
    println!("K final     {}", fmt_opt(r.final_k()));
    println!("iterations  {}", r.iterations);
    println!("N           {}", r.n_cap);
}

fn cmd_solve(
    file: &Path,
    json: bool,
    pretty: bool,
    n_cap: Option<usize>,
    tol_qp: Option<f64>,
) -> Result<ExitCode, CliError> {
    let inst = read_json::<InstanceFile>(file)?.into_instance(n_cap)?;
    let mut opts = SolverOptions::default();
    if let Some(tol) = tol_qp {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError { name: "InvalidArgument", message: format!("--tol-qp must be positive, got {tol}") });
        }
        opts.qp.gap_tol = tol;
    }
    let report = solve_with(&inst, &opts)?;
    if json || pretty {
        println!("{}", to_json(&report, pretty));
    } else {
        print_human(&report);
    }
    Ok(if report.status == SolveStatus::Failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn instances_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "bench".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.instances.csv"))
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().ok().filter(|&n: &usize| n > 0).map(Some).ok_or_else(|| CliError {
            name: "InvalidArgument",
            message: format!("{THREADS_ENV} must be a positive integer, got `{v}`"),
        }),
        Err(_) => Ok(None),
    }
}

fn cmd_bench(spec: BenchSpec, out: Option<PathBuf>, timing: bool, exec: Execution) -> Result<ExitCode, CliError> {
    spec.validate()?;
    let threads = thread_cap()?;
    let (stats, records) = par::with_thread_cap(threads, || benchgen::run_bench_with(&spec, exec))?;
    if let Some(out) = out {
        let create = |p: &Path| File::create(p).map(BufWriter::new).map_err(|e| CliError::io(p, e));
        benchgen::write_aggregate_csv(create(&out)?, &spec, &stats, timing)?;
        let per = instances_path(&out);
        benchgen::write_instances_csv(create(&per)?, &records, timing)?;
    }
    benchgen::write_aggregate_csv(io::stdout().lock(), &spec, &stats, timing)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze_seq(file: &Path, pretty: bool) -> Result<ExitCode, CliError> {
    let terms: Vec<f64> = read_json(file)?;
    let seq = FiniteC0Sequence::new(terms)?;
    println!("{}", to_json(&rank_profile(&seq), pretty));
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Solve { file, json, pretty, n_cap, tol_qp } => cmd_solve(&file, json, pretty, n_cap, tol_qp),
        Command::Bench { dim, kind, objective, set_kind, count, seed, out, n_cap, no_timing, sequential } => {
            let spec = BenchSpec {
                dim,
                system_kind: kind,
                objective_kind: objective,
                set_kind,
                instance_count: count,
                seed,
                n_cap,
            };
            let exec = if sequential { Execution::Sequential } else { Execution::default() };
            cmd_bench(spec, out, !no_timing, exec)
        }
        Command::AnalyzeSeq { file, pretty } => cmd_analyze_seq(&file, pretty),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}: {}", e.name, e.message);
            ExitCode::from(1)
        }
    }
}
