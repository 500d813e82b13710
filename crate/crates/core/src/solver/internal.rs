//! Reference backend: depth-first branching over clause disjuncts, each
//! branch's conjunction decided by the exact simplex in [`super::simplex`].
//!
//! At every node the current simplex assignment is evaluated against all
//! clauses. Among the violated ones, the clause with the fewest disjuncts
//! not already refuted by the asserted bounds is branched on (a clause with
//! one such disjunct propagates, one with none is a conflict), disjuncts in
//! emission order. Failed branches return the set of decision levels they
//! depend on, which lets the search jump back over irrelevant decisions, and
//! every failed node records the negation of those decisions as a learned
//! clause.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use num_traits::{One, Signed, Zero};

use super::delta::Delta;
use super::num::Q;
use super::simplex::{CheckError, LevelSet, Simplex};
use super::{SolveResult, SolverError};
use crate::model::{Assignment, Formula, Relation, VarId};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Atom {
    var: usize,
    upper: bool,
    bound: Delta,
}

/// Statistics of one internal decision run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub pivots: u64,
}

struct Search {
    simplex: Simplex,
    atoms: Vec<Atom>,
    atom_ids: HashMap<Atom, usize>,
    clauses: Vec<Vec<usize>>,
    /// Atom decided at each level; index 0 is unused.
    decisions: Vec<usize>,
    deadline: Option<Instant>,
    nodes: u64,
}

enum Outcome {
    Sat,
    Conflict(LevelSet),
}

struct Timeout;

/// Decide `formula` with the internal backend.
pub fn internal_decide(
    formula: &Formula,
    deadline: Option<Instant>,
) -> Result<SolveResult, SolverError> {
    internal_decide_with_stats(formula, deadline).map(|(r, _)| r)
}

pub fn internal_decide_with_stats(
    formula: &Formula,
    deadline: Option<Instant>,
) -> Result<(SolveResult, SearchStats), SolverError> {
    let vars: Vec<VarId> = formula.variables().iter().copied().collect();
    let index: HashMap<VarId, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut simplex = Simplex::new(vars.len());
    let mut slack_of: HashMap<Vec<(usize, Q)>, usize> = HashMap::new();
    let mut atom_ids: HashMap<Atom, usize> = HashMap::new();
    let mut atoms = Vec::new();
    let mut clauses = Vec::with_capacity(formula.len());

    for clause in formula.clauses() {
        if clause.disjuncts().is_empty() {
            return Ok((SolveResult::Unsat, SearchStats::default()));
        }
        let mut ids = Vec::with_capacity(clause.disjuncts().len());
        for ineq in clause.disjuncts() {
            // scale so the leading coefficient is +1
            let lead = &ineq.coeffs()[0].1;
            let k = Rational::one() / lead.abs();
            let flip = lead.is_negative();
            let sign = if flip { -k.clone() } else { k.clone() };
            let form: Vec<(usize, Q)> = ineq
                .coeffs()
                .iter()
                .map(|(v, c)| (index[v], Q::from_rational(&(c * &sign))))
                .collect();
            let rhs = Q::from_rational(&(ineq.rhs() * &sign));
            let var = if form.len() == 1 {
                form[0].0
            } else {
                *slack_of
                    .entry(form.clone())
                    .or_insert_with(|| simplex.add_row(form))
            };
            let strict = ineq.relation() == Relation::Lt;
            // multiplying by a negative flips ≤ into ≥
            let upper = !flip;
            let eps = match (strict, upper) {
                (false, _) => Q::int(0),
                (true, true) => Q::int(-1),
                (true, false) => Q::int(1),
            };
            let atom = Atom {
                var,
                upper,
                bound: Delta::new(rhs, eps),
            };
            let id = *atom_ids.entry(atom.clone()).or_insert_with(|| {
                atoms.push(atom);
                atoms.len() - 1
            });
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        clauses.push(ids);
    }

    let mut search = Search {
        simplex,
        atoms,
        atom_ids,
        clauses,
        decisions: vec![usize::MAX],
        deadline,
        nodes: 0,
    };
    // unit clauses at the root
    let units: Vec<usize> = search
        .clauses
        .iter()
        .filter(|ids| ids.len() == 1)
        .map(|ids| ids[0])
        .collect();
    for id in units {
        {
            let a = search.atoms[id].clone();
            if search.assert_atom(&a, LevelSet::default()).is_err() {
                return Ok((SolveResult::Unsat, search.stats()));
            }
        }
    }
    let root = match search.simplex.check(deadline) {
        Ok(()) => search.run(0),
        Err(CheckError::Conflict(_)) => Ok(Outcome::Conflict(LevelSet::default())),
        Err(CheckError::Timeout) => Err(Timeout),
    };
    let stats = search.stats();
    match root {
        Err(Timeout) => Ok((SolveResult::Timeout, stats)),
        Ok(Outcome::Conflict(_)) => Ok((SolveResult::Unsat, stats)),
        Ok(Outcome::Sat) => {
            let model = search.concretize(&vars);
            match formula.eval(&model) {
                Some(true) => Ok((SolveResult::Sat(model), stats)),
                _ => Err(SolverError::Internal(
                    "internal backend produced a model that fails re-evaluation".into(),
                )),
            }
        }
    }
}

impl Search {
    fn stats(&self) -> SearchStats {
        SearchStats {
            nodes: self.nodes,
            pivots: self.simplex.pivots,
        }
    }

    fn negation(&mut self, id: usize) -> usize {
        let a = &self.atoms[id];
        // ¬(x ≤ b) is x ≥ b + δ and ¬(x ≥ b) is x ≤ b − δ
        let step = if a.upper { Q::int(1) } else { Q::int(-1) };
        let neg = Atom {
            var: a.var,
            upper: !a.upper,
            bound: Delta::new(a.bound.real.clone(), a.bound.inf.add(&step)),
        };
        *self.atom_ids.entry(neg.clone()).or_insert_with(|| {
            self.atoms.push(neg);
            self.atoms.len() - 1
        })
    }

    /// Record that the decisions at `levels` cannot hold together.
    fn learn(&mut self, levels: &LevelSet) {
        if levels.is_empty() {
            return;
        }
        let decided: Vec<usize> = levels.iter().map(|l| self.decisions[l as usize]).collect();
        let clause = decided.into_iter().map(|id| self.negation(id)).collect();
        self.clauses.push(clause);
    }

    fn assert_atom(&mut self, a: &Atom, reason: LevelSet) -> Result<(), LevelSet> {
        if a.upper {
            self.simplex.assert_upper(a.var, a.bound.clone(), reason)
        } else {
            self.simplex.assert_lower(a.var, a.bound.clone(), reason)
        }
    }

    fn holds(&self, id: usize) -> bool {
        let a = &self.atoms[id];
        let v = self.simplex.value(a.var);
        if a.upper {
            *v <= a.bound
        } else {
            *v >= a.bound
        }
    }

    /// Reason of the bound that refutes the atom, if any.
    fn refuted(&self, id: usize) -> Option<&LevelSet> {
        let a = &self.atoms[id];
        if a.upper {
            self.simplex
                .lower(a.var)
                .filter(|l| l.value > a.bound)
                .map(|l| &l.reason)
        } else {
            self.simplex
                .upper(a.var)
                .filter(|u| u.value < a.bound)
                .map(|u| &u.reason)
        }
    }

    fn run(&mut self, level: u32) -> Result<Outcome, Timeout> {
        self.nodes += 1;
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(Timeout);
        }
        let mut pick: Option<(usize, usize)> = None;
        for (ci, ids) in self.clauses.iter().enumerate() {
            if ids.iter().any(|&id| self.holds(id)) {
                continue;
            }
            let open = ids.iter().filter(|&&id| self.refuted(id).is_none()).count();
            if open == 0 {
                let mut conflict = LevelSet::default();
                for &id in ids {
                    conflict.union_with(self.refuted(id).unwrap());
                }
                return Ok(Outcome::Conflict(conflict));
            }
            if pick.is_none_or(|(_, best)| open < best) {
                pick = Some((ci, open));
            }
        }
        let Some((ci, _)) = pick else {
            return Ok(Outcome::Sat);
        };
        let next = level + 1;
        let mut acc = LevelSet::default();
        let ids = self.clauses[ci].clone();
        for id in ids {
            if let Some(r) = self.refuted(id) {
                acc.union_with(&r.clone());
                continue;
            }
            self.simplex.push_level();
            self.decisions.truncate(next as usize);
            self.decisions.push(id);
            let atom = self.atoms[id].clone();
            let mut conflict = match self.assert_atom(&atom, LevelSet::single(next)) {
                Err(c) => c,
                Ok(()) => match self.simplex.check(self.deadline) {
                    Err(CheckError::Timeout) => {
                        self.simplex.pop_level();
                        return Err(Timeout);
                    }
                    Err(CheckError::Conflict(c)) => c,
                    Ok(()) => match self.run(next) {
                        Err(t) => {
                            self.simplex.pop_level();
                            return Err(t);
                        }
                        Ok(Outcome::Sat) => return Ok(Outcome::Sat),
                        Ok(Outcome::Conflict(c)) => c,
                    },
                },
            };
            self.simplex.pop_level();
            if !conflict.contains(next) {
                return Ok(Outcome::Conflict(conflict));
            }
            conflict.remove(next);
            acc.union_with(&conflict);
        }
        self.learn(&acc);
        Ok(Outcome::Conflict(acc))
    }

    /// Replace δ by half the smallest limit imposed by any atom that holds
    /// symbolically, so every satisfied atom stays satisfied.
    fn concretize(&self, vars: &[VarId]) -> Assignment {
        let mut limit: Option<Rational> = None;
        for a in &self.atoms {
            let v = self.simplex.value(a.var);
            let l = if a.upper {
                v.delta_limit(&a.bound)
            } else {
                a.bound.delta_limit(v)
            };
            if let Some(l) = l {
                if limit.as_ref().is_none_or(|m| l < *m) {
                    limit = Some(l);
                }
            }
        }
        let delta = match limit {
            Some(m) => m / int(2),
            None => Rational::one(),
        };
        let mut out = BTreeMap::new();
        for (i, v) in vars.iter().enumerate() {
            out.insert(*v, self.simplex.value(i).concretize(&delta));
        }
        debug_assert!(out.values().all(|v: &Rational| !v.denom().is_zero()));
        out
    }
}
