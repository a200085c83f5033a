//! Per-instance result rows, printed as a table or as JSON lines.

use std::io::{self, Write};

use serde::Serialize;

use nfrac_core::schedule::{Attempt, ScheduleStatus};

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub n: usize,
    #[serde(rename = "maxL")]
    pub max_l: Option<u64>,
    pub encode_seconds: Option<f64>,
    pub num_vars: Option<u32>,
    pub num_clauses: Option<usize>,
    pub solve_seconds: Option<f64>,
    pub status: String,
    /// Only ever set from a verified solution.
    pub solution_line: Option<String>,
}

impl RunRecord {
    pub fn from_attempt(a: &Attempt) -> RunRecord {
        RunRecord {
            n: a.n,
            max_l: Some(a.max_l),
            encode_seconds: Some(a.encode_seconds),
            num_vars: Some(a.num_vars),
            num_clauses: Some(a.num_clauses),
            solve_seconds: Some(a.solve_seconds),
            status: a.status.to_string(),
            solution_line: a.solution.as_ref().map(|s| s.to_string()),
        }
    }

    /// A row for an `n` whose search ended without a solution; the last
    /// attempt, if any, supplies the sizes.
    pub fn unsolved(n: usize, status: ScheduleStatus, last: Option<&Attempt>) -> RunRecord {
        let status = match status {
            ScheduleStatus::Sat => "SAT",
            ScheduleStatus::Infeasible => "INFEASIBLE",
            ScheduleStatus::Exhausted => "EXHAUSTED",
            ScheduleStatus::Timeout => "TIMEOUT",
            ScheduleStatus::Error => "ERROR",
        };
        let mut row = match last {
            Some(a) => RunRecord::from_attempt(a),
            None => RunRecord {
                n,
                max_l: None,
                encode_seconds: None,
                num_vars: None,
                num_clauses: None,
                solve_seconds: None,
                status: String::new(),
                solution_line: None,
            },
        };
        row.status = status.to_string();
        row.solution_line = None;
        row
    }
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_else(|| "-".into())
}

fn secs(v: Option<f64>) -> String {
    v.map(|s| format!("{s:.2}")).unwrap_or_else(|| "-".into())
}

/// Columns: n, maxL, encode time, clauses, variables, solve time, status.
pub fn print_table<W: Write>(out: &mut W, rows: &[RunRecord]) -> io::Result<()> {
    writeln!(
        out,
        "{:>4} {:>6} {:>8} {:>9} {:>8} {:>9}  status",
        "n", "maxL", "encode", "# cl", "# var", "sat"
    )?;
    for r in rows {
        writeln!(
            out,
            "{:>4} {:>6} {:>8} {:>9} {:>8} {:>9}  {}",
            r.n,
            cell(r.max_l),
            secs(r.encode_seconds),
            cell(r.num_clauses),
            cell(r.num_vars),
            secs(r.solve_seconds),
            r.status
        )?;
    }
    Ok(())
}
