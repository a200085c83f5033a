//! Running a SAT backend on a CNF formula.
//!
//! Two backends: the built-in CDCL solver, and any external DIMACS solver
//! that follows the SAT-competition output convention. Every satisfying
//! assignment is checked against all clauses before it is returned.

pub mod cdcl;

use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use crate::cnf::{parse_solver_output, Assignment, CnfFormula, SolverOutput};
use cdcl::CdclOutcome;

/// Placeholder replaced by the DIMACS path in an external command template.
pub const CNF_PLACEHOLDER: &str = "{cnf}";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverMode {
    Internal,
    /// Shell command; `{cnf}` is replaced by the path, or the path is appended.
    External(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub timeout: Duration,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            mode: SolverMode::Internal,
            timeout: Duration::from_secs(600),
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn internal(seed: u64) -> SolverConfig {
        SolverConfig {
            seed,
            ..SolverConfig::default()
        }
    }

    pub fn external(command_template: impl Into<String>) -> SolverConfig {
        SolverConfig {
            mode: SolverMode::External(command_template.into()),
            ..SolverConfig::default()
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> SolverConfig {
        self.timeout = timeout;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Timeout,
    Error,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Sat => "SAT",
            SolveStatus::Unsat => "UNSAT",
            SolveStatus::Timeout => "TIMEOUT",
            SolveStatus::Error => "ERROR",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Present iff `status == Sat`, total over the formula's variables.
    pub assignment: Option<Assignment>,
    pub wall_seconds: f64,
    /// Diagnostics for `Error` (stderr, parse failures, exit codes).
    pub message: Option<String>,
}

impl SolveResult {
    fn finish(status: SolveStatus, started: Instant) -> SolveResult {
        SolveResult {
            status,
            assignment: None,
            wall_seconds: started.elapsed().as_secs_f64(),
            message: None,
        }
    }

    fn error(message: String, started: Instant) -> SolveResult {
        SolveResult {
            message: Some(message),
            ..SolveResult::finish(SolveStatus::Error, started)
        }
    }

    fn sat(assignment: Assignment, started: Instant) -> SolveResult {
        SolveResult {
            assignment: Some(assignment),
            ..SolveResult::finish(SolveStatus::Sat, started)
        }
    }
}

/// Solves with the configured backend.
pub fn solve(formula: &CnfFormula, config: &SolverConfig) -> SolveResult {
    match &config.mode {
        SolverMode::Internal => internal_solve(formula, config.seed, config.timeout),
        SolverMode::External(template) => external_solve(formula, template, config.timeout),
    }
}

/// Runs the built-in CDCL solver; deterministic for a given seed.
pub fn internal_solve(formula: &CnfFormula, seed: u64, timeout: Duration) -> SolveResult {
    let started = Instant::now();
    let deadline = started.checked_add(timeout);
    match cdcl::solve_formula(formula, seed, deadline) {
        CdclOutcome::Sat(a) => checked_sat(formula, a, started),
        CdclOutcome::Unsat => SolveResult::finish(SolveStatus::Unsat, started),
        CdclOutcome::Timeout => SolveResult::finish(SolveStatus::Timeout, started),
    }
}

fn checked_sat(formula: &CnfFormula, mut assignment: Assignment, started: Instant) -> SolveResult {
    assignment.resize(formula.num_vars());
    match assignment.first_violated(formula) {
        None => SolveResult::sat(assignment, started),
        Some(ci) => SolveResult::error(
            format!(
                "solver model violates clause {ci}: {:?}",
                formula.clauses()[ci]
            ),
            started,
        ),
    }
}

fn command_line(template: &str, cnf_path: &Path) -> String {
    let quoted = format!(
        "'{}'",
        cnf_path.display().to_string().replace('\'', r"'\''")
    );
    if template.contains(CNF_PLACEHOLDER) {
        template.replace(CNF_PLACEHOLDER, &quoted)
    } else {
        format!("{template} {quoted}")
    }
}

/// Writes the formula to a temporary DIMACS file and runs `template` through
/// `sh -c`. Output lines decide the verdict; exit codes 10/20 only corroborate.
pub fn external_solve(formula: &CnfFormula, template: &str, timeout: Duration) -> SolveResult {
    let started = Instant::now();
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return SolveResult::error(format!("creating temp dir: {e}"), started),
    };
    let cnf_path = dir.path().join("instance.cnf");
    let out_path = dir.path().join("solver.out");
    let err_path = dir.path().join("solver.err");
    let io = (|| -> std::io::Result<(File, File)> {
        formula.write_dimacs(File::create(&cnf_path)?)?;
        Ok((File::create(&out_path)?, File::create(&err_path)?))
    })();
    let (out_file, err_file) = match io {
        Ok(files) => files,
        Err(e) => return SolveResult::error(format!("writing DIMACS: {e}"), started),
    };

    let mut child = match Command::new("sh")
        .arg("-c")
        .arg(command_line(template, &cnf_path))
        .stdin(Stdio::null())
        .stdout(out_file)
        .stderr(err_file)
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return SolveResult::error(format!("spawning solver: {e}"), started),
    };
    let status = match child.wait_timeout(timeout) {
        Ok(Some(status)) => status,
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            return SolveResult::finish(SolveStatus::Timeout, started);
        }
        Err(e) => return SolveResult::error(format!("waiting for solver: {e}"), started),
    };

    let read = |p: &Path| {
        let mut s = String::new();
        File::open(p)
            .and_then(|mut f| f.read_to_string(&mut s))
            .map(|_| s)
    };
    let stdout = read(&out_path).unwrap_or_default();
    let stderr = read(&err_path).unwrap_or_default();
    let code = status.code();
    match parse_solver_output(&stdout) {
        SolverOutput::Sat(a) if code != Some(20) => checked_sat(formula, a, started),
        SolverOutput::Unsat if code != Some(10) => SolveResult::finish(SolveStatus::Unsat, started),
        SolverOutput::Unknown(diag) => SolveResult::error(
            format!(
                "unusable solver output ({diag}); exit {code:?}; stderr: {}",
                stderr.trim()
            ),
            started,
        ),
        _ => SolveResult::error(
            format!("solver exit code {code:?} contradicts its status line"),
            started,
        ),
    }
}
