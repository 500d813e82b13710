use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::smtlib::{emit_smtlib, parse_response, Response};
use super::{SolveResult, SolverError};
use crate::model::Formula;

/// Run `command` once with the SMT-LIB2 script of `formula` on stdin.
///
/// The first verdict line decides the outcome. A solver that answers
/// `unsat` and then fails on `get-model` still counts as unsat.
pub fn run_external(
    command: &str,
    formula: &Formula,
    deadline: Option<Instant>,
) -> Result<SolveResult, SolverError> {
    let mut parts = command.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| SolverError::BackendFailure("empty solver command".into()))?;
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SolverError::BackendFailure(format!("cannot start `{program}`: {e}")))?;

    let script = emit_smtlib(formula);
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(script.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Ok(SolveResult::Timeout);
                }
                thread::sleep(Duration::from_millis(2));
            }
            Err(e) => {
                return Err(SolverError::BackendFailure(format!(
                    "waiting for solver: {e}"
                )))
            }
        }
    };
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();

    match parse_response(&out) {
        Ok(Response::Unsat) => Ok(SolveResult::Unsat),
        Ok(Response::Sat(m)) if status.success() => Ok(SolveResult::Sat(m)),
        Ok(Response::Unknown) => Err(SolverError::BackendFailure(
            "solver answered unknown".into(),
        )),
        Ok(Response::Sat(_)) => Err(SolverError::BackendFailure(format!(
            "solver exited with {status} after sat: {}",
            err.trim()
        ))),
        Err(e) if status.success() => Err(e.into()),
        Err(_) => Err(SolverError::BackendFailure(format!(
            "solver exited with {status}: {}",
            first_line(&out, &err)
        ))),
    }
}

fn first_line<'a>(out: &'a str, err: &'a str) -> &'a str {
    out.lines()
        .chain(err.lines())
        .find(|l| !l.trim().is_empty())
        .unwrap_or("")
}
