//! Feasibility of clause formulas over the rationals.
//!
//! Two backends decide a [`Formula`]: the exact internal search and an
//! external SMT-LIB2 solver driven one-shot over stdin/stdout. Both are
//! reached through a [`SolverSession`], which also supports assertion
//! checkpoints so per-probe constraints can be retracted while learned
//! ones persist.

mod delta;
mod external;
mod internal;
mod num;
mod simplex;
pub mod smtlib;

use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

pub use external::run_external;
pub use internal::{internal_decide, internal_decide_with_stats, SearchStats};
pub use smtlib::{emit_smtlib, parse_model, parse_response, ParseError, Response};

use crate::model::{Assignment, Clause, Folded, Formula};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Assignment),
    Unsat,
    Timeout,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver backend failed: {0}")]
    BackendFailure(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("internal solver invariant violated: {0}")]
    Internal(String),
    #[error("cannot write solver dump")]
    Dump(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Internal,
    /// Command line of an SMT-LIB2 solver reading a script on stdin,
    /// e.g. `z3 -in -smt2`.
    External(String),
}

impl Backend {
    /// `internal` or `external:<command>`.
    pub fn parse(text: &str) -> Option<Backend> {
        if text == "internal" {
            Some(Backend::Internal)
        } else {
            text.strip_prefix("external:")
                .filter(|c| !c.trim().is_empty())
                .map(|c| Backend::External(c.trim().to_string()))
        }
    }
}

/// Asserted formula plus checkpoint stack and backend choice. One session
/// is used by one thread at a time.
#[derive(Debug, Clone, Default)]
pub struct SolverSession {
    backend: Backend,
    formula: Formula,
    checkpoints: Vec<usize>,
    pub deadline: Option<Instant>,
    dump: Option<(PathBuf, String)>,
    calls: u64,
}

impl SolverSession {
    pub fn new(backend: Backend) -> Self {
        SolverSession {
            backend,
            ..Default::default()
        }
    }

    pub fn with_formula(backend: Backend, formula: Formula) -> Self {
        SolverSession {
            backend,
            formula,
            ..Default::default()
        }
    }

    /// Write the SMT-LIB2 text of every solve call to `dir/<prefix>-<n>.smt2`.
    pub fn dump_to(&mut self, dir: PathBuf, prefix: impl Into<String>) {
        self.dump = Some((dir, prefix.into()));
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn formula_mut(&mut self) -> &mut Formula {
        &mut self.formula
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn assert(&mut self, clause: Clause) -> bool {
        self.formula.push(clause)
    }

    pub fn assert_folded(&mut self, folded: Folded) -> bool {
        self.formula.push_folded(folded)
    }

    pub fn push(&mut self) {
        self.checkpoints.push(self.formula.len());
    }

    /// Drop every clause asserted since the matching `push`.
    pub fn pop(&mut self) {
        let len = self.checkpoints.pop().expect("pop without push");
        self.formula.truncate(len);
    }

    pub fn depth(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn solve(&mut self) -> Result<SolveResult, SolverError> {
        self.calls += 1;
        if let Some((dir, prefix)) = &self.dump {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{prefix}-{:05}.smt2", self.calls));
            std::fs::write(path, emit_smtlib(&self.formula))?;
        }
        solve_formula(&self.backend, &self.formula, self.deadline)
    }
}

/// Decide a formula with the given backend.
pub fn solve_formula(
    backend: &Backend,
    formula: &Formula,
    deadline: Option<Instant>,
) -> Result<SolveResult, SolverError> {
    match backend {
        Backend::Internal => internal_decide(formula, deadline),
        Backend::External(cmd) => {
            let result = run_external(cmd, formula, deadline)?;
            if let SolveResult::Sat(m) = &result {
                // unassigned variables are unconstrained
                let mut full = m.clone();
                for v in formula.variables() {
                    full.entry(*v).or_default();
                }
                if formula.eval(&full) != Some(true) {
                    return Err(SolverError::BackendFailure(
                        "external model does not satisfy the formula".into(),
                    ));
                }
                return Ok(SolveResult::Sat(full));
            }
            Ok(result)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinExpr, Literal, VarId};
    use crate::rational::int;

    fn atom(e: LinExpr, strict: bool) -> Literal {
        e.atom(strict)
    }

    fn x() -> LinExpr {
        LinExpr::var(VarId::x(0))
    }

    fn y() -> LinExpr {
        LinExpr::var(VarId::y(0))
    }

    #[test]
    fn contradictory_strict_bounds() {
        // x < 1 ∧ x > 2
        let mut f = Formula::new();
        f.push_folded(Clause::fold([atom(x().plus_const(&int(-1)), true)]));
        f.push_folded(Clause::fold([atom(
            LinExpr::constant(int(2)).sub(&x()),
            true,
        )]));
        assert_eq!(internal_decide(&f, None).unwrap(), SolveResult::Unsat);
    }

    #[test]
    fn small_feasible_system() {
        // x + y ≤ 4, x ≥ 1, y ≥ 1
        let mut f = Formula::new();
        f.push_folded(Clause::fold([atom(
            x().add(&y()).plus_const(&int(-4)),
            false,
        )]));
        f.push_folded(Clause::fold([atom(
            LinExpr::constant(int(1)).sub(&x()),
            false,
        )]));
        f.push_folded(Clause::fold([atom(
            LinExpr::constant(int(1)).sub(&y()),
            false,
        )]));
        match internal_decide(&f, None).unwrap() {
            SolveResult::Sat(m) => assert_eq!(f.eval(&m), Some(true)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn open_interval_witness() {
        // 0 < x < 1
        let mut f = Formula::new();
        f.push_folded(Clause::fold([atom(
            LinExpr::constant(int(0)).sub(&x()),
            true,
        )]));
        f.push_folded(Clause::fold([atom(x().plus_const(&int(-1)), true)]));
        match internal_decide(&f, None).unwrap() {
            SolveResult::Sat(m) => {
                let v = &m[&VarId::x(0)];
                assert!(*v > int(0) && *v < int(1));
            }
            other => panic!("{other:?}"),
        }
        // x > 0 ∧ x < 0
        let mut g = Formula::new();
        g.push_folded(Clause::fold([atom(
            LinExpr::constant(int(0)).sub(&x()),
            true,
        )]));
        g.push_folded(Clause::fold([atom(x(), true)]));
        assert_eq!(internal_decide(&g, None).unwrap(), SolveResult::Unsat);
    }

    #[test]
    fn falsum_is_unsat() {
        let mut f = Formula::new();
        f.push(Clause::falsum());
        assert_eq!(internal_decide(&f, None).unwrap(), SolveResult::Unsat);
    }

    #[test]
    fn expired_deadline_times_out() {
        let mut f = Formula::new();
        f.push_folded(Clause::fold([atom(x(), false), atom(y(), false)]));
        f.push_folded(Clause::fold([atom(
            LinExpr::constant(int(1)).sub(&x()),
            false,
        )]));
        let past = Instant::now() - std::time::Duration::from_millis(1);
        assert_eq!(
            internal_decide(&f, Some(past)).unwrap(),
            SolveResult::Timeout
        );
    }

    #[test]
    fn checkpoint_discipline() {
        let mut s = SolverSession::new(Backend::Internal);
        s.assert_folded(Clause::fold([atom(x().plus_const(&int(-5)), false)]));
        let before = s.solve().unwrap().is_sat();
        s.push();
        s.assert_folded(Clause::fold([atom(
            LinExpr::constant(int(6)).sub(&x()),
            false,
        )]));
        assert_eq!(s.solve().unwrap(), SolveResult::Unsat);
        s.pop();
        assert_eq!(s.solve().unwrap().is_sat(), before);
        assert_eq!(s.formula().len(), 1);
    }

    #[test]
    fn backend_spec_parsing() {
        assert_eq!(Backend::parse("internal"), Some(Backend::Internal));
        assert_eq!(
            Backend::parse("external:z3 -in"),
            Some(Backend::External("z3 -in".into()))
        );
        assert_eq!(Backend::parse("external:"), None);
        assert_eq!(Backend::parse("z3"), None);
    }
}
