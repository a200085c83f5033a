//! `nfrac`: encode, solve and verify instances of the n-fractions puzzle.

mod record;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use nfrac_core::cnf::{parse_solver_output, read_dimacs, SolverOutput};
use nfrac_core::model::{
    build_model, counting_feasible, decode_solution, dimacs_comments, ModelVars, PuzzleInstance,
    KNOWN_UNSOLVABLE_FROM,
};
use nfrac_core::sat::{internal_solve, SolveStatus, SolverConfig, SolverMode};
use nfrac_core::schedule::{run_instance, run_schedule, Attempt, ScheduleConfig, ScheduleStatus};
use nfrac_core::verify::{brute_force_solve, verify_solution, Solution};

use record::{print_table, RunRecord};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NONE: u8 = 20;
const EXIT_TIMEOUT: u8 = 30;

/// Largest n for which a missing external solver falls back to the built-in one.
const FALLBACK_MAX_N: usize = 14;

#[derive(Parser)]
#[command(
    name = "nfrac",
    version,
    about = "SAT pipeline for the n-fractions puzzle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the CNF for (n, maxL) and its variable map.
    Encode(EncodeArgs),
    /// Solve for one maxL or search a schedule of them.
    Solve(SolveArgs),
    /// Check solutions given as a line or a file of lines.
    Verify(VerifyArgs),
    /// Run the schedule for a range of n and print one row per n.
    Bench(BenchArgs),
    /// List every solution for n <= 4 by exhaustive search.
    Oracle(OracleArgs),
    /// Decode solver output for an encoded CNF using its variable map.
    Decode(DecodeArgs),
    /// Solve a DIMACS file with the built-in solver, printing competition-style output.
    DimacsSolve(DimacsSolveArgs),
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "max-l")]
    max_l: u64,
    /// DIMACS output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Variable map path; defaults to `<out>.map` when --out is given.
    #[arg(long)]
    map: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// External solver command; `{cnf}` is replaced by the DIMACS path, or
    /// the path is appended. The built-in solver is used when unset.
    #[arg(long = "solver-cmd", env = "NFRAC_SOLVER_CMD")]
    solver_cmd: Option<String>,
    /// Seconds allowed per (n, maxL) candidate.
    #[arg(long, default_value_t = 600.0)]
    timeout: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Candidates solved concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Clone, Copy)]
struct ScheduleArgs {
    /// n at which the coarse 1000/500 schedule replaces steps of 100.
    #[arg(long = "schedule-threshold", default_value_t = 15)]
    schedule_threshold: usize,
    /// Largest maxL tried.
    #[arg(long = "schedule-cap", default_value_t = 10_000)]
    schedule_cap: u64,
}

impl ScheduleArgs {
    fn config(self) -> ScheduleConfig {
        ScheduleConfig {
            threshold: self.schedule_threshold,
            cap: self.schedule_cap,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    n: usize,
    #[arg(
        long = "max-l",
        required_unless_present = "schedule",
        conflicts_with = "schedule"
    )]
    max_l: Option<u64>,
    /// Search maxL instead of fixing it.
    #[arg(long)]
    schedule: bool,
    #[command(flatten)]
    schedule_args: ScheduleArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// A solution line `n L x1 y1z1 ...`, a file of such lines, or `-` for stdin.
    input: String,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    from: usize,
    #[arg(long)]
    to: usize,
    #[command(flatten)]
    schedule_args: ScheduleArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct DecodeArgs {
    /// Variable map written by `encode`.
    #[arg(long)]
    map: PathBuf,
    /// Solver output (`s`/`v` lines); `-` for stdin.
    output: String,
}

#[derive(Args)]
struct DimacsSolveArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 600.0)]
    timeout: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let result = match cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Decode(a) => cmd_decode(a),
        Command::DimacsSolve(a) => cmd_dimacs_solve(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn warn_about_n(n: usize) {
    if !counting_feasible(n) {
        eprintln!("warning: n={n} is infeasible by counting pre-check (3n < 9 digit slots)");
    } else if n >= KNOWN_UNSOLVABLE_FROM {
        eprintln!("warning: no solution is known for n >= {KNOWN_UNSOLVABLE_FROM}");
    }
}

fn cmd_encode(args: EncodeArgs) -> Result<u8> {
    warn_about_n(args.n);
    let instance = PuzzleInstance::new(args.n, args.max_l)?;
    let started = Instant::now();
    let (formula, vars) = build_model(&instance)?;
    let seconds = started.elapsed().as_secs_f64();
    let map_text = vars.to_map_string(&instance);
    let comments = dimacs_comments(&instance, &map_text);

    match &args.out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            formula.write_dimacs_with_comments(&comments, file)?;
        }
        None => {
            formula.write_dimacs_with_comments(&comments, io::stdout().lock())?;
        }
    }
    let map_path = args
        .map
        .clone()
        .or_else(|| args.out.as_ref().map(|p| with_suffix(p, ".map")));
    if let Some(path) = &map_path {
        fs::write(path, &map_text).with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!(
        "encoded n={} maxL={} in {seconds:.3}s: {} vars, {} clauses",
        args.n,
        args.max_l,
        formula.num_vars(),
        formula.num_clauses()
    );
    Ok(EXIT_OK)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Whether the first word of a shell command names something runnable.
fn command_exists(template: &str) -> bool {
    let Some(program) = template.split_whitespace().next() else {
        return false;
    };
    if program.contains('/') {
        return Path::new(program).is_file();
    }
    std::env::var_os("PATH")
        .map(|paths| std::env::split_paths(&paths).any(|dir| dir.join(program).is_file()))
        .unwrap_or(false)
}

fn solver_config(args: &SolverArgs, n: usize) -> Result<SolverConfig> {
    if args.timeout.is_nan() || args.timeout <= 0.0 {
        bail!("--timeout must be positive");
    }
    let timeout = Duration::from_secs_f64(args.timeout);
    let mut config = SolverConfig::internal(args.seed).with_timeout(timeout);
    if let Some(cmd) = args.solver_cmd.as_deref().filter(|c| !c.trim().is_empty()) {
        if command_exists(cmd) {
            config.mode = SolverMode::External(cmd.to_string());
        } else if n <= FALLBACK_MAX_N {
            eprintln!("warning: solver command {cmd:?} not found; using the built-in solver");
        } else {
            bail!("solver command {cmd:?} not found");
        }
    }
    Ok(config)
}

fn emit_records(records: &[RunRecord], format: Format) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Text => print_table(&mut out, records)?,
        Format::Records => {
            for r in records {
                serde_json::to_writer(&mut out, r)?;
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    warn_about_n(args.n);
    if !counting_feasible(args.n) {
        println!(
            "n={}: infeasible (counting pre-check, 3n < 9); no solution",
            args.n
        );
        return Ok(EXIT_NONE);
    }
    let solver = solver_config(&args.solver, args.n)?;
    let progress = args.solver.format == Format::Text;
    let report = |a: &Attempt| {
        if progress {
            eprintln!(
                "n={} maxL={}: {} ({:.2}s)",
                a.n, a.max_l, a.status, a.solve_seconds
            );
        }
    };

    let (attempts, winner, code) = match args.max_l {
        Some(max_l) => {
            let attempt = run_instance(&PuzzleInstance::new(args.n, max_l)?, &solver)?;
            let code = attempt_exit_code(&attempt);
            let winner = (attempt.status == SolveStatus::Sat).then_some(0);
            (vec![attempt], winner, code)
        }
        None => {
            let outcome = run_schedule(
                args.n,
                &args.schedule_args.config(),
                &solver,
                args.solver.jobs,
                report,
            )?;
            let code = schedule_exit_code(outcome.status);
            (outcome.attempts, outcome.winner, code)
        }
    };
    for a in &attempts {
        if let Some(msg) = &a.message {
            eprintln!("n={} maxL={}: {msg}", a.n, a.max_l);
        }
    }
    if let Some(sol) = winner.and_then(|i| attempts[i].solution.as_ref()) {
        if args.solver.format == Format::Text {
            println!("{sol}");
        }
    } else if args.solver.format == Format::Text {
        println!("n={}: no solution found", args.n);
    }
    let records: Vec<RunRecord> = attempts.iter().map(RunRecord::from_attempt).collect();
    emit_records(&records, args.solver.format)?;
    Ok(code)
}

fn attempt_exit_code(a: &Attempt) -> u8 {
    match a.status {
        SolveStatus::Sat => EXIT_OK,
        SolveStatus::Unsat => EXIT_NONE,
        SolveStatus::Timeout => EXIT_TIMEOUT,
        SolveStatus::Error => EXIT_USAGE,
    }
}

fn schedule_exit_code(status: ScheduleStatus) -> u8 {
    match status {
        ScheduleStatus::Sat => EXIT_OK,
        ScheduleStatus::Infeasible | ScheduleStatus::Exhausted => EXIT_NONE,
        ScheduleStatus::Timeout => EXIT_TIMEOUT,
        ScheduleStatus::Error => EXIT_USAGE,
    }
}

fn read_verify_input(input: &str) -> Result<String> {
    if input == "-" {
        return io::read_to_string(io::stdin()).context("reading stdin");
    }
    let path = Path::new(input);
    if path.is_file() {
        return fs::read_to_string(path).with_context(|| format!("reading {input}"));
    }
    if input.trim().starts_with(|c: char| c.is_ascii_digit()) {
        return Ok(input.to_string());
    }
    bail!("{input:?} is neither a solution line nor a readable file")
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let text = read_verify_input(&args.input)?;
    let (mut total, mut valid) = (0usize, 0usize);
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        total += 1;
        let checked = line
            .parse::<Solution>()
            .and_then(|sol| verify_solution(&sol).map(|report| (sol, report)));
        match checked {
            Ok((sol, report)) if report.passed() => {
                valid += 1;
                println!("ok      {sol}  (lcm {})", report.lcm);
            }
            Ok((sol, report)) => {
                println!("INVALID {sol}  failing: {}", report.failures().join(", "));
                let counts: Vec<String> = report
                    .digit_counts
                    .iter()
                    .enumerate()
                    .map(|(d, c)| format!("{}:{c}", d + 1))
                    .collect();
                println!(
                    "        digit counts {}  lcm {}",
                    counts.join(" "),
                    report.lcm
                );
            }
            Err(e) => println!("INVALID line {}: {e}", idx + 1),
        }
    }
    if total == 0 {
        bail!("no solution lines in input");
    }
    println!("{valid}/{total} valid");
    Ok(if valid == total {
        EXIT_OK
    } else {
        EXIT_INVALID
    })
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    if args.from > args.to {
        bail!("--from must not exceed --to");
    }
    let mut rows = Vec::new();
    let mut code = EXIT_OK;
    for n in args.from..=args.to {
        let solver = solver_config(&args.solver, n)?;
        let outcome = run_schedule(
            n,
            &args.schedule_args.config(),
            &solver,
            args.solver.jobs,
            |_| {},
        )?;
        let row = match outcome.solution() {
            Some(a) => RunRecord::from_attempt(a),
            None => RunRecord::unsolved(n, outcome.status, outcome.attempts.last()),
        };
        let row_code = schedule_exit_code(outcome.status);
        if outcome.status != ScheduleStatus::Infeasible && row_code > code {
            code = row_code;
        }
        if args.solver.format == Format::Records {
            // Stream rows so long benches show progress.
            emit_records(std::slice::from_ref(&row), Format::Records)?;
        }
        rows.push(row);
    }
    if args.solver.format == Format::Text {
        emit_records(&rows, Format::Text)?;
    }
    Ok(code)
}

fn cmd_oracle(args: OracleArgs) -> Result<u8> {
    let solutions = brute_force_solve(args.n)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for sol in &solutions {
        writeln!(out, "{sol}")?;
    }
    Ok(if solutions.is_empty() {
        EXIT_NONE
    } else {
        EXIT_OK
    })
}

fn cmd_decode(args: DecodeArgs) -> Result<u8> {
    let map = File::open(&args.map).with_context(|| format!("opening {}", args.map.display()))?;
    let (instance, vars) = ModelVars::read_map(io::BufReader::new(map))?;
    let text = if args.output == "-" {
        io::read_to_string(io::stdin()).context("reading stdin")?
    } else {
        fs::read_to_string(&args.output).with_context(|| format!("reading {}", args.output))?
    };
    let assignment = match parse_solver_output(&text) {
        SolverOutput::Sat(a) => a,
        SolverOutput::Unsat => {
            println!("n={} maxL={}: UNSAT", instance.n(), instance.max_l());
            return Ok(EXIT_NONE);
        }
        SolverOutput::Unknown(why) => bail!("unusable solver output: {why}"),
    };
    let sol = decode_solution(&assignment, &vars, &instance)?;
    let report = verify_solution(&sol)?;
    if !report.passed() {
        println!("INVALID {sol}  failing: {}", report.failures().join(", "));
        return Ok(EXIT_INVALID);
    }
    println!("{sol}");
    Ok(EXIT_OK)
}

fn cmd_dimacs_solve(args: DimacsSolveArgs) -> Result<u8> {
    let file =
        File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let formula = read_dimacs(io::BufReader::new(file))?;
    let result = internal_solve(&formula, args.seed, Duration::from_secs_f64(args.timeout));
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = match result.status {
        SolveStatus::Sat => {
            writeln!(out, "s SATISFIABLE")?;
            let a = result.assignment.expect("SAT carries an assignment");
            let lits: Vec<String> = (1..=a.num_vars())
                .map(|v| {
                    let var = nfrac_core::cnf::Var::new(v);
                    if a.value(var) {
                        v.to_string()
                    } else {
                        format!("-{v}")
                    }
                })
                .collect();
            for chunk in lits.chunks(20) {
                writeln!(out, "v {}", chunk.join(" "))?;
            }
            writeln!(out, "v 0")?;
            10
        }
        SolveStatus::Unsat => {
            writeln!(out, "s UNSATISFIABLE")?;
            20
        }
        SolveStatus::Timeout | SolveStatus::Error => {
            writeln!(out, "s UNKNOWN")?;
            0
        }
    };
    out.flush()?;
    Ok(code)
}
