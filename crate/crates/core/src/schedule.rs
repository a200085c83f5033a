//! Searching over `maxL`.
//!
//! The right bound on the common multiple is not known in advance. Small
//! instances try 100, 200, 300, ... in turn. Large ones take coarse steps of
//! 500 from 1000, then, after the first success at `v`, retry from the
//! multiple of 1000 just below `v` in steps of 100 looking for a smaller
//! bound that still works.

use std::time::Instant;

use crate::model::{build_model, counting_feasible, decode_solution, ModelError, PuzzleInstance};
use crate::sat::{solve, SolveStatus, SolverConfig};
use crate::verify::{verify_solution, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleConfig {
    /// Instances with `n >= threshold` use the coarse-then-refine schedule.
    pub threshold: usize,
    /// Largest `maxL` tried.
    pub cap: u64,
}

impl Default for ScheduleConfig {
    fn default() -> ScheduleConfig {
        ScheduleConfig {
            threshold: 15,
            cap: 10_000,
        }
    }
}

/// The first pass of candidates for `n`, in the order they are tried.
pub fn maxl_schedule(n: usize, config: &ScheduleConfig) -> Vec<u64> {
    if n < config.threshold {
        (100..=config.cap).step_by(100).collect()
    } else {
        (1000..=config.cap).step_by(500).collect()
    }
}

/// Candidates tried after the coarse pass first succeeds at `v`: from the
/// largest multiple of 1000 below `v`, in steps of 100, stopping before `v`.
pub fn refine_schedule(v: u64) -> Vec<u64> {
    let base = (v.saturating_sub(1) / 1000) * 1000;
    (base + 100..v).step_by(100).collect()
}

/// One `(n, maxL)` encode-and-solve.
#[derive(Debug, Clone)]
pub struct Attempt {
    pub n: usize,
    pub max_l: u64,
    pub encode_seconds: f64,
    pub num_vars: u32,
    pub num_clauses: usize,
    pub solve_seconds: f64,
    pub status: SolveStatus,
    /// Present iff `status == Sat`; always verified.
    pub solution: Option<Solution>,
    pub message: Option<String>,
}

/// Encodes, solves, decodes and verifies one instance. A decoded solution
/// that fails verification is reported as an error, never as SAT.
pub fn run_instance(
    instance: &PuzzleInstance,
    solver: &SolverConfig,
) -> Result<Attempt, ModelError> {
    let started = Instant::now();
    let (formula, vars) = build_model(instance)?;
    let encode_seconds = started.elapsed().as_secs_f64();
    let result = solve(&formula, solver);
    let mut attempt = Attempt {
        n: instance.n(),
        max_l: instance.max_l(),
        encode_seconds,
        num_vars: formula.num_vars(),
        num_clauses: formula.num_clauses(),
        solve_seconds: result.wall_seconds,
        status: result.status,
        solution: None,
        message: result.message,
    };
    if let Some(assignment) = &result.assignment {
        let rejected = match decode_solution(assignment, &vars, instance) {
            Err(e) => Some(format!("decoding failed: {e}")),
            Ok(sol) => match verify_solution(&sol) {
                Ok(report) if report.passed() => {
                    attempt.solution = Some(sol);
                    None
                }
                Ok(report) => Some(format!(
                    "decoded solution {sol} fails {}",
                    report.failures().join(", ")
                )),
                Err(e) => Some(format!("decoded solution {sol}: {e}")),
            },
        };
        if let Some(msg) = rejected {
            attempt.status = SolveStatus::Error;
            attempt.message = Some(msg);
        }
    }
    Ok(attempt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleStatus {
    Sat,
    /// Fewer than nine digit slots; nothing was encoded.
    Infeasible,
    /// Every candidate was UNSAT.
    Exhausted,
    /// No candidate was SAT and at least one timed out.
    Timeout,
    /// A solver or decoding error stopped the search.
    Error,
}

#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    pub n: usize,
    pub status: ScheduleStatus,
    /// Every attempt made, in increasing `maxL` within each pass.
    pub attempts: Vec<Attempt>,
    /// The winning attempt's index in `attempts`.
    pub winner: Option<usize>,
}

impl ScheduleOutcome {
    pub fn solution(&self) -> Option<&Attempt> {
        self.winner.map(|i| &self.attempts[i])
    }
}

enum PassResult {
    Found(usize),
    Error,
    Done,
}

/// Runs `candidates` in chunks of `jobs` concurrent solves. Within the first
/// chunk containing a SAT result, the smallest such `maxL` wins.
fn run_pass(
    n: usize,
    candidates: &[u64],
    solver: &SolverConfig,
    jobs: usize,
    attempts: &mut Vec<Attempt>,
    on_attempt: &mut dyn FnMut(&Attempt),
) -> Result<PassResult, ModelError> {
    for chunk in candidates.chunks(jobs.max(1)) {
        let results: Vec<Result<Attempt, ModelError>> = if chunk.len() == 1 {
            vec![run_instance(&PuzzleInstance::new(n, chunk[0])?, solver)]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|&max_l| {
                        scope.spawn(move || run_instance(&PuzzleInstance::new(n, max_l)?, solver))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("solver thread panicked"))
                    .collect()
            })
        };
        let first = attempts.len();
        for r in results {
            let attempt = r?;
            on_attempt(&attempt);
            attempts.push(attempt);
        }
        let chunk_attempts = &attempts[first..];
        if let Some(k) = chunk_attempts
            .iter()
            .position(|a| a.status == SolveStatus::Sat)
        {
            return Ok(PassResult::Found(first + k));
        }
        if chunk_attempts
            .iter()
            .any(|a| a.status == SolveStatus::Error)
        {
            return Ok(PassResult::Error);
        }
    }
    Ok(PassResult::Done)
}

/// Searches `maxL` for `n` until the first verified solution.
pub fn run_schedule(
    n: usize,
    config: &ScheduleConfig,
    solver: &SolverConfig,
    jobs: usize,
    mut on_attempt: impl FnMut(&Attempt),
) -> Result<ScheduleOutcome, ModelError> {
    let mut outcome = ScheduleOutcome {
        n,
        status: ScheduleStatus::Infeasible,
        attempts: Vec::new(),
        winner: None,
    };
    if !counting_feasible(n) {
        return Ok(outcome);
    }
    let first = maxl_schedule(n, config);
    let mut pass = run_pass(
        n,
        &first,
        solver,
        jobs,
        &mut outcome.attempts,
        &mut on_attempt,
    )?;
    if n >= config.threshold {
        if let PassResult::Found(coarse) = pass {
            let refine = refine_schedule(outcome.attempts[coarse].max_l);
            match run_pass(
                n,
                &refine,
                solver,
                jobs,
                &mut outcome.attempts,
                &mut on_attempt,
            )? {
                found @ PassResult::Found(_) => pass = found,
                // A failed refinement still leaves the coarse solution.
                PassResult::Error | PassResult::Done => {}
            }
        }
    }
    match pass {
        PassResult::Found(i) => {
            outcome.status = ScheduleStatus::Sat;
            outcome.winner = Some(i);
        }
        PassResult::Error => outcome.status = ScheduleStatus::Error,
        PassResult::Done => {
            let timed_out = outcome
                .attempts
                .iter()
                .any(|a| a.status == SolveStatus::Timeout);
            outcome.status = if timed_out {
                ScheduleStatus::Timeout
            } else {
                ScheduleStatus::Exhausted
            };
        }
    }
    Ok(outcome)
}
