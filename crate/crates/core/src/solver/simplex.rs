//! Bounded general simplex over δ-rationals with backtrackable bounds.
//!
//! Each row defines a basic variable as a combination of non-basic ones.
//! Bounds carry the set of decision levels that justify them, so an
//! infeasible row yields a conflict over levels.

use std::time::Instant;

use super::delta::Delta;
use super::num::Q;

/// Set of decision levels; level 0 (root) is never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelSet {
    words: Vec<u64>,
}

impl LevelSet {
    pub fn single(level: u32) -> Self {
        let mut s = LevelSet::default();
        s.insert(level);
        s
    }

    pub fn insert(&mut self, level: u32) {
        if level == 0 {
            return;
        }
        let (w, b) = ((level / 64) as usize, level % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn remove(&mut self, level: u32) {
        let (w, b) = ((level / 64) as usize, level % 64);
        if let Some(word) = self.words.get_mut(w) {
            *word &= !(1 << b);
        }
    }

    pub fn contains(&self, level: u32) -> bool {
        let (w, b) = ((level / 64) as usize, level % 64);
        self.words.get(w).is_some_and(|word| word & (1 << b) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            (0..64)
                .filter(move |b| word & (1 << b) != 0)
                .map(move |b| w as u32 * 64 + b)
        })
    }

    pub fn union_with(&mut self, other: &LevelSet) {
        if self.words.len() < other.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bound {
    pub value: Delta,
    pub reason: LevelSet,
}

#[derive(Debug)]
pub enum CheckError {
    Conflict(LevelSet),
    Timeout,
}

type Row = Vec<(usize, Q)>;

#[derive(Debug)]
pub struct Simplex {
    rows: Vec<Row>,
    basic_of_row: Vec<usize>,
    row_of: Vec<Option<usize>>,
    value: Vec<Delta>,
    lower: Vec<Option<Bound>>,
    upper: Vec<Option<Bound>>,
    trail: Vec<(usize, bool, Option<Bound>)>,
    marks: Vec<usize>,
    pub pivots: u64,
}

impl Simplex {
    /// `n_original` structural variables; slacks are added with [`Simplex::add_row`].
    pub fn new(n_original: usize) -> Self {
        Simplex {
            rows: Vec::new(),
            basic_of_row: Vec::new(),
            row_of: vec![None; n_original],
            value: vec![Delta::default(); n_original],
            lower: vec![None; n_original],
            upper: vec![None; n_original],
            trail: Vec::new(),
            marks: Vec::new(),
            pivots: 0,
        }
    }

    /// New slack variable equal to `Σ coeff·x` over structural variables.
    /// Must be called before any pivoting.
    pub fn add_row(&mut self, mut coeffs: Row) -> usize {
        debug_assert_eq!(self.pivots, 0);
        coeffs.sort_by_key(|(v, _)| *v);
        let var = self.value.len();
        self.row_of.push(Some(self.rows.len()));
        self.value.push(Delta::default());
        self.lower.push(None);
        self.upper.push(None);
        self.basic_of_row.push(var);
        self.rows.push(coeffs);
        var
    }

    pub fn value(&self, var: usize) -> &Delta {
        &self.value[var]
    }

    pub fn lower(&self, var: usize) -> Option<&Bound> {
        self.lower[var].as_ref()
    }

    pub fn upper(&self, var: usize) -> Option<&Bound> {
        self.upper[var].as_ref()
    }

    pub fn push_level(&mut self) {
        self.marks.push(self.trail.len());
    }

    /// Restore every bound changed since the matching `push_level`. The
    /// assignment stays valid because relaxing bounds never breaks it.
    pub fn pop_level(&mut self) {
        let mark = self.marks.pop().expect("unbalanced pop_level");
        while self.trail.len() > mark {
            let (var, is_upper, old) = self.trail.pop().unwrap();
            if is_upper {
                self.upper[var] = old;
            } else {
                self.lower[var] = old;
            }
        }
    }

    pub fn assert_upper(
        &mut self,
        var: usize,
        value: Delta,
        reason: LevelSet,
    ) -> Result<(), LevelSet> {
        if let Some(u) = &self.upper[var] {
            if u.value <= value {
                return Ok(());
            }
        }
        if let Some(l) = &self.lower[var] {
            if value < l.value {
                let mut c = reason;
                c.union_with(&l.reason);
                return Err(c);
            }
        }
        let old = self.upper[var].replace(Bound {
            value: value.clone(),
            reason,
        });
        self.trail.push((var, true, old));
        if self.row_of[var].is_none() && self.value[var] > value {
            self.update_nonbasic(var, value);
        }
        Ok(())
    }

    pub fn assert_lower(
        &mut self,
        var: usize,
        value: Delta,
        reason: LevelSet,
    ) -> Result<(), LevelSet> {
        if let Some(l) = &self.lower[var] {
            if l.value >= value {
                return Ok(());
            }
        }
        if let Some(u) = &self.upper[var] {
            if value > u.value {
                let mut c = reason;
                c.union_with(&u.reason);
                return Err(c);
            }
        }
        let old = self.lower[var].replace(Bound {
            value: value.clone(),
            reason,
        });
        self.trail.push((var, false, old));
        if self.row_of[var].is_none() && self.value[var] < value {
            self.update_nonbasic(var, value);
        }
        Ok(())
    }

    fn update_nonbasic(&mut self, var: usize, new_value: Delta) {
        let diff = new_value.sub(&self.value[var]);
        for (r, row) in self.rows.iter().enumerate() {
            if let Ok(pos) = row.binary_search_by_key(&var, |(v, _)| *v) {
                let b = self.basic_of_row[r];
                self.value[b].add_scaled(&diff, &row[pos].1);
            }
        }
        self.value[var] = new_value;
    }

    fn below_lower(&self, var: usize) -> bool {
        self.lower[var]
            .as_ref()
            .is_some_and(|l| self.value[var] < l.value)
    }

    fn above_upper(&self, var: usize) -> bool {
        self.upper[var]
            .as_ref()
            .is_some_and(|u| self.value[var] > u.value)
    }

    fn can_increase(&self, var: usize) -> bool {
        self.upper[var]
            .as_ref()
            .is_none_or(|u| self.value[var] < u.value)
    }

    fn can_decrease(&self, var: usize) -> bool {
        self.lower[var]
            .as_ref()
            .is_none_or(|l| self.value[var] > l.value)
    }

    /// Restore feasibility of all basic variables (Bland's rule), or explain
    /// why the asserted bounds are infeasible.
    pub fn check(&mut self, deadline: Option<Instant>) -> Result<(), CheckError> {
        let mut since_clock = 0u32;
        loop {
            since_clock += 1;
            if since_clock >= 16 {
                since_clock = 0;
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    return Err(CheckError::Timeout);
                }
            }
            // smallest violating basic variable
            let mut pick: Option<(usize, usize, bool)> = None;
            for (r, &b) in self.basic_of_row.iter().enumerate() {
                let low = self.below_lower(b);
                if (low || self.above_upper(b)) && pick.is_none_or(|(_, pb, _)| b < pb) {
                    pick = Some((r, b, low));
                }
            }
            let Some((r, b, low)) = pick else {
                return Ok(());
            };
            // smallest non-basic that can move the row in the needed direction
            let mut entering: Option<usize> = None;
            for (v, c) in &self.rows[r] {
                let ok = if low == c.is_positive() {
                    self.can_increase(*v)
                } else {
                    self.can_decrease(*v)
                };
                if ok && entering.is_none_or(|e| *v < e) {
                    entering = Some(*v);
                }
            }
            match entering {
                None => {
                    let mut conflict = LevelSet::default();
                    let own = if low { &self.lower[b] } else { &self.upper[b] };
                    conflict.union_with(&own.as_ref().unwrap().reason);
                    for (v, c) in &self.rows[r] {
                        let blocking = if low == c.is_positive() {
                            &self.upper[*v]
                        } else {
                            &self.lower[*v]
                        };
                        conflict.union_with(&blocking.as_ref().unwrap().reason);
                    }
                    return Err(CheckError::Conflict(conflict));
                }
                Some(e) => {
                    let target = if low {
                        self.lower[b].as_ref().unwrap().value.clone()
                    } else {
                        self.upper[b].as_ref().unwrap().value.clone()
                    };
                    self.pivot_and_update(r, e, target);
                }
            }
        }
    }

    fn pivot_and_update(&mut self, r: usize, entering: usize, target: Delta) {
        let b = self.basic_of_row[r];
        let pos = self.rows[r]
            .binary_search_by_key(&entering, |(v, _)| *v)
            .expect("entering variable in row");
        let a = self.rows[r][pos].1.clone();
        let theta = target.sub(&self.value[b]).scaled(&a.recip());
        self.value[b] = target;
        self.value[entering].add_scaled(&theta, &Q::int(1));
        for (s, row) in self.rows.iter().enumerate() {
            if s == r {
                continue;
            }
            if let Ok(p) = row.binary_search_by_key(&entering, |(v, _)| *v) {
                let bs = self.basic_of_row[s];
                self.value[bs].add_scaled(&theta, &row[p].1);
            }
        }
        self.pivot(r, entering, pos, a);
    }

    fn pivot(&mut self, r: usize, entering: usize, pos: usize, a: Q) {
        self.pivots += 1;
        let leaving = self.basic_of_row[r];
        // entering = (leaving − Σ_{k≠e} a_k x_k) / a
        let inv = a.recip();
        let mut new_row: Row = Vec::with_capacity(self.rows[r].len());
        for (i, (v, c)) in self.rows[r].iter().enumerate() {
            if i != pos {
                new_row.push((*v, c.mul(&inv).neg()));
            }
        }
        new_row.push((leaving, inv));
        new_row.sort_by_key(|(v, _)| *v);
        for s in 0..self.rows.len() {
            if s == r {
                continue;
            }
            let Ok(p) = self.rows[s].binary_search_by_key(&entering, |(v, _)| *v) else {
                continue;
            };
            let k = self.rows[s].remove(p).1;
            self.rows[s] = merge_scaled(&self.rows[s], &new_row, &k);
        }
        self.rows[r] = new_row;
        self.basic_of_row[r] = entering;
        self.row_of[entering] = Some(r);
        self.row_of[leaving] = None;
    }
}

/// `a + k·b` over sorted sparse rows, dropping zeros.
fn merge_scaled(a: &Row, b: &Row, k: &Q) -> Row {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, b[j].1.mul(k)));
            j += 1;
        } else {
            let c = a[i].1.add(&b[j].1.mul(k));
            if !c.is_zero() {
                out.push((a[i].0, c));
            }
            i += 1;
            j += 1;
        }
    }
    out
}
