//! Linear real arithmetic encoding of placement and print-order constraints.
//!
//! A [`Formula`] is a conjunction of [`Clause`]s, each a disjunction of
//! linear inequalities over the per-object decision variables `X_i`, `Y_i`
//! (position) and `T_i` (print time). Already placed objects enter as
//! constants, which shrinks their atoms to fewer variables.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::geometry::{cross, minkowski_sum, ConvexPolygon, Point2};
use crate::rational::{format_exact, int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    X,
    Y,
    T,
}

/// Decision variable `X_i`, `Y_i` or `T_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    pub object: usize,
    pub kind: VarKind,
}

impl VarId {
    pub fn x(object: usize) -> Self {
        VarId {
            object,
            kind: VarKind::X,
        }
    }
    pub fn y(object: usize) -> Self {
        VarId {
            object,
            kind: VarKind::Y,
        }
    }
    pub fn t(object: usize) -> Self {
        VarId {
            object,
            kind: VarKind::T,
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            VarKind::X => "X",
            VarKind::Y => "Y",
            VarKind::T => "T",
        };
        write!(f, "{k}_{}", self.object)
    }
}

/// Variable assignment; the model of a satisfiable formula.
pub type Assignment = BTreeMap<VarId, Rational>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Le,
}

/// `Σ coeffs·var  (< | ≤)  rhs`, with at least one non-zero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinIneq {
    coeffs: Vec<(VarId, Rational)>,
    relation: Relation,
    rhs: Rational,
}

impl LinIneq {
    pub fn coeffs(&self) -> &[(VarId, Rational)] {
        &self.coeffs
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }

    /// `None` if a variable is unassigned.
    pub fn eval(&self, values: &Assignment) -> Option<bool> {
        let mut lhs = Rational::zero();
        for (v, c) in &self.coeffs {
            lhs += c * values.get(v)?;
        }
        Some(match self.relation {
            Relation::Lt => lhs < self.rhs,
            Relation::Le => lhs <= self.rhs,
        })
    }
}

impl fmt::Display for LinIneq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}·{v}", format_exact(c))?;
        }
        let op = match self.relation {
            Relation::Lt => "<",
            Relation::Le => "<=",
        };
        write!(f, " {op} {}", format_exact(&self.rhs))
    }
}

/// Affine expression over decision variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinExpr {
    terms: BTreeMap<VarId, Rational>,
    constant: Rational,
}

#[allow(clippy::should_implement_trait)]
impl LinExpr {
    pub fn constant(c: Rational) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(v, int(1));
        LinExpr {
            terms,
            constant: Rational::zero(),
        }
    }

    pub fn add(mut self, other: &LinExpr) -> Self {
        for (v, c) in &other.terms {
            let e = self.terms.entry(*v).or_insert_with(Rational::zero);
            *e += c;
            if e.is_zero() {
                self.terms.remove(v);
            }
        }
        self.constant += &other.constant;
        self
    }

    pub fn scale(mut self, k: &Rational) -> Self {
        if k.is_zero() {
            return LinExpr::default();
        }
        for c in self.terms.values_mut() {
            *c *= k;
        }
        self.constant *= k;
        self
    }

    pub fn sub(self, other: &LinExpr) -> Self {
        self.add(&other.clone().scale(&int(-1)))
    }

    pub fn plus_const(mut self, c: &Rational) -> Self {
        self.constant += c;
        self
    }

    /// Atom `self < 0` (`strict`) or `self ≤ 0`.
    pub fn atom(self, strict: bool) -> Literal {
        let rhs = -self.constant;
        if self.terms.is_empty() {
            let holds = if strict {
                rhs.is_positive()
            } else {
                !rhs.is_negative()
            };
            return Literal::Const(holds);
        }
        Literal::Ineq(LinIneq {
            coeffs: self.terms.into_iter().collect(),
            relation: if strict { Relation::Lt } else { Relation::Le },
            rhs,
        })
    }
}

/// An atom before constant folding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    Ineq(LinIneq),
    Const(bool),
}

/// Non-empty disjunction of inequalities. The only empty clause is
/// [`Clause::falsum`], which makes a formula unsatisfiable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    disjuncts: Vec<LinIneq>,
}

/// Result of folding constant atoms out of a disjunction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Folded {
    True,
    Clause(Clause),
}

impl Clause {
    /// Fold constants and drop duplicate disjuncts, keeping first occurrence order.
    pub fn fold(literals: impl IntoIterator<Item = Literal>) -> Folded {
        let mut disjuncts: Vec<LinIneq> = Vec::new();
        for lit in literals {
            match lit {
                Literal::Const(true) => return Folded::True,
                Literal::Const(false) => {}
                Literal::Ineq(ineq) => {
                    if !disjuncts.contains(&ineq) {
                        disjuncts.push(ineq);
                    }
                }
            }
        }
        Folded::Clause(Clause { disjuncts })
    }

    pub fn unit(ineq: LinIneq) -> Clause {
        Clause {
            disjuncts: vec![ineq],
        }
    }

    pub fn falsum() -> Clause {
        Clause { disjuncts: vec![] }
    }

    pub fn disjuncts(&self) -> &[LinIneq] {
        &self.disjuncts
    }

    pub fn eval(&self, values: &Assignment) -> Option<bool> {
        let mut any = false;
        for d in &self.disjuncts {
            any |= d.eval(values)?;
        }
        Some(any)
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.disjuncts
            .iter()
            .flat_map(|d| d.coeffs.iter().map(|(v, _)| *v))
    }
}

/// Conjunction of clauses. Duplicate clauses are ignored on insertion.
#[derive(Debug, Clone, Default)]
pub struct Formula {
    clauses: Vec<Clause>,
    variables: BTreeSet<VarId>,
    seen: HashSet<Clause>,
}

impl Formula {
    pub fn new() -> Self {
        Formula::default()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn variables(&self) -> &BTreeSet<VarId> {
        &self.variables
    }

    pub fn declare(&mut self, v: VarId) {
        self.variables.insert(v);
    }

    /// Returns `true` if the clause was new.
    pub fn push(&mut self, clause: Clause) -> bool {
        if self.seen.contains(&clause) {
            return false;
        }
        self.variables.extend(clause.vars());
        self.seen.insert(clause.clone());
        self.clauses.push(clause);
        true
    }

    pub fn push_folded(&mut self, folded: Folded) -> bool {
        match folded {
            Folded::True => false,
            Folded::Clause(c) => self.push(c),
        }
    }

    pub fn extend(&mut self, clauses: impl IntoIterator<Item = Clause>) {
        for c in clauses {
            self.push(c);
        }
    }

    /// Drop every clause after the first `len`; variables declared since stay.
    pub fn truncate(&mut self, len: usize) {
        for c in self.clauses.drain(len.min(self.clauses.len())..) {
            self.seen.remove(&c);
        }
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// `None` if some variable of the formula is unassigned.
    pub fn eval(&self, values: &Assignment) -> Option<bool> {
        let mut all = true;
        for c in &self.clauses {
            all &= c.eval(values)?;
        }
        Some(all)
    }
}

/// Position of an object: free variables `(X_i, Y_i)` or a fixed offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pos {
    Free(usize),
    Fixed(Point2),
}

impl Pos {
    fn x(&self) -> LinExpr {
        match self {
            Pos::Free(i) => LinExpr::var(VarId::x(*i)),
            Pos::Fixed(p) => LinExpr::constant(p.x.clone()),
        }
    }

    fn y(&self) -> LinExpr {
        match self {
            Pos::Free(i) => LinExpr::var(VarId::y(*i)),
            Pos::Fixed(p) => LinExpr::constant(p.y.clone()),
        }
    }
}

/// Print time of an object: free `T_i` or a fixed stamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Time {
    Free(usize),
    Fixed(Rational),
}

impl Time {
    fn expr(&self) -> LinExpr {
        match self {
            Time::Free(i) => LinExpr::var(VarId::t(*i)),
            Time::Fixed(t) => LinExpr::constant(t.clone()),
        }
    }
}

/// `cross(u, (p + P) − (q + Q))` as an affine expression.
fn placed_orient(u: &Point2, p: &Point2, pos_p: &Pos, q: &Point2, pos_q: &Pos) -> LinExpr {
    let base = cross(u, &(p - q));
    // cross(u, P − Q) = u.x·(Py − Qy) − u.y·(Px − Qx)
    let dy = pos_p.y().sub(&pos_q.y()).scale(&u.x);
    let dx = pos_p.x().sub(&pos_q.x()).scale(&u.y);
    dy.sub(&dx).plus_const(&base)
}

/// Points-outside-polygon: every vertex of `poly_a` placed at `a` lies
/// outside or on the boundary of `poly_b` placed at `b`. One clause per vertex.
pub fn pop_constraint(
    a: &Pos,
    poly_a: &ConvexPolygon,
    b: &Pos,
    poly_b: &ConvexPolygon,
) -> Vec<Folded> {
    poly_a
        .vertices()
        .iter()
        .map(|v| {
            Clause::fold(poly_b.edges().map(|(e1, e2)| {
                let u = e2 - e1;
                // right of or on the supporting line: orient ≤ 0
                placed_orient(&u, v, a, e1, b).atom(false)
            }))
        })
        .collect()
}

/// Polygon-inside-polygon: every vertex of `poly` placed at `pos` lies in
/// the container (fixed at the origin), boundary allowed. Unit clauses.
pub fn pip_constraint(pos: &Pos, poly: &ConvexPolygon, container: &ConvexPolygon) -> Vec<Folded> {
    let origin = Pos::Fixed(Point2::origin());
    let mut out = Vec::new();
    for v in poly.vertices() {
        for (e1, e2) in container.edges() {
            let u = e2 - e1;
            let o = placed_orient(&u, v, pos, e1, &origin);
            out.push(Clause::fold([o.scale(&int(-1)).atom(false)]));
        }
    }
    out
}

/// Lines-not-intersect for edge `a1a2` of an object at `a` and edge `b1b2`
/// of an object at `b`.
///
/// The disjunction "B's edge strictly on one side of A's line, or A's edge
/// strictly on one side of B's line" has two-atom conjunctions as disjuncts;
/// it is distributed into up to 16 plain clauses.
pub fn lni_constraint(
    a: &Pos,
    a1: &Point2,
    a2: &Point2,
    b: &Pos,
    b1: &Point2,
    b2: &Point2,
) -> Vec<Folded> {
    let ua = a2 - a1;
    let ub = b2 - b1;
    let ob1 = placed_orient(&ua, b1, b, a1, a);
    let ob2 = placed_orient(&ua, b2, b, a1, a);
    let oa1 = placed_orient(&ub, a1, a, b1, b);
    let oa2 = placed_orient(&ub, a2, a, b1, b);
    let neg = |e: &LinExpr| e.clone().scale(&int(-1));
    // each conjunct is `expr < 0`
    let conj: [[LinExpr; 2]; 4] = [
        [neg(&ob1), neg(&ob2)], // B left of A's line
        [ob1.clone(), ob2.clone()],
        [neg(&oa1), neg(&oa2)], // A left of B's line
        [oa1.clone(), oa2.clone()],
    ];
    let mut out = Vec::with_capacity(16);
    for pick in 0..16u32 {
        let lits = (0..4).map(|d| conj[d][((pick >> d) & 1) as usize].clone().atom(true));
        let folded = Clause::fold(lits);
        if !out.contains(&folded) {
            out.push(folded);
        }
    }
    out
}

/// `T_i + ε < T_j  ∨  T_j + ε < T_i`.
pub fn time_separation(ti: &Time, tj: &Time, eps_t: &Rational) -> Folded {
    Clause::fold([
        ti.expr().sub(&tj.expr()).plus_const(eps_t).atom(true),
        tj.expr().sub(&ti.expr()).plus_const(eps_t).atom(true),
    ])
}

/// Encode `T_i < T_j ⇒ body` by prepending the escape disjunct
/// `T_j + ε < T_i` to every body clause; exact under [`time_separation`].
pub fn guard_with_order(ti: &Time, tj: &Time, eps_t: &Rational, body: Vec<Folded>) -> Vec<Folded> {
    let escape = tj.expr().sub(&ti.expr()).plus_const(eps_t).atom(true);
    body.into_iter()
        .map(|f| match f {
            Folded::True => Folded::True,
            Folded::Clause(c) => Clause::fold(
                std::iter::once(escape.clone()).chain(c.disjuncts.into_iter().map(Literal::Ineq)),
            ),
        })
        .collect()
}

/// `lo ≤ T ≤ hi` as two unit clauses.
pub fn time_bounds(t: &Time, lo: &Rational, hi: &Rational) -> Vec<Folded> {
    vec![
        Clause::fold([LinExpr::constant(lo.clone()).sub(&t.expr()).atom(false)]),
        Clause::fold([t.expr().plus_const(&-hi).atom(false)]),
    ]
}

/// `T_late > T_early + ε` as a unit clause.
pub fn later_than(late: &Time, early: &Time, eps_t: &Rational) -> Folded {
    Clause::fold([early.expr().sub(&late.expr()).plus_const(eps_t).atom(true)])
}

/// Footprint hull and extruder envelope of one object, in its local frame.
#[derive(Debug, Clone)]
pub struct Shape {
    pub hull: ConvexPolygon,
    pub envelope: ConvexPolygon,
}

/// Sequencing constraints when `earlier` is printed before `later`: the
/// earlier hull's vertices avoid the later envelope and vice versa.
pub fn pop_pair(earlier: &Pos, e_shape: &Shape, later: &Pos, l_shape: &Shape) -> Vec<Folded> {
    let mut body = pop_constraint(earlier, &e_shape.hull, later, &l_shape.envelope);
    body.extend(pop_constraint(
        later,
        &l_shape.envelope,
        earlier,
        &e_shape.hull,
    ));
    body
}

/// Base formula for a set of objects none of which is placed yet: pairwise
/// separation of print times, order-guarded PoP constraints in both
/// directions, and `0 ≤ T_i ≤ n·ε`.
pub fn build_base_formula(shapes: &[Shape], eps_t: &Rational) -> Formula {
    let free: Vec<(usize, &Shape)> = shapes.iter().enumerate().collect();
    build_group_formula(&free, &[], eps_t, false)
}

/// An object already placed on the plate, entering as constants.
#[derive(Debug, Clone)]
pub struct FixedObject<'a> {
    pub index: usize,
    pub shape: &'a Shape,
    pub position: Point2,
    pub time: Rational,
}

/// The set of relative offsets `X_b − X_a` forbidden when `a` prints
/// first equals the one forbidden when `b` prints first.
///
/// Then the requirement on the pair does not depend on the order and the
/// `a`-first constraints may be asserted without a guard.
pub fn order_symmetric(a: &Shape, b: &Shape) -> bool {
    minkowski_sum(&a.hull, &b.envelope.reflect()) == minkowski_sum(&a.envelope, &b.hull.reflect())
}

/// Formula for placing `free` objects (by global index) next to already
/// placed `fixed` ones.
///
/// Free objects are forced to print after every fixed object, so pairs with
/// a fixed member need only the fixed-first direction and no guard. With
/// `merge_symmetric`, a free pair whose constraint is the same for both
/// print orders gets one unguarded copy instead of two guarded ones.
pub fn build_group_formula(
    free: &[(usize, &Shape)],
    fixed: &[FixedObject<'_>],
    eps_t: &Rational,
    merge_symmetric: bool,
) -> Formula {
    let mut f = Formula::new();
    let n = free.len();
    let t_max_fixed = fixed.iter().map(|o| o.time.clone()).max();
    let (lo, hi) = match &t_max_fixed {
        None => (Rational::zero(), eps_t * int(n as i64)),
        Some(t) => (Rational::zero(), t + eps_t * int(n as i64 + 1)),
    };
    for &(i, _) in free {
        f.declare(VarId::x(i));
        f.declare(VarId::y(i));
        f.declare(VarId::t(i));
        for c in time_bounds(&Time::Free(i), &lo, &hi) {
            f.push_folded(c);
        }
        if let Some(t) = &t_max_fixed {
            f.push_folded(later_than(&Time::Free(i), &Time::Fixed(t.clone()), eps_t));
        }
    }
    for (a, &(i, si)) in free.iter().enumerate() {
        for &(j, sj) in &free[a + 1..] {
            f.push_folded(time_separation(&Time::Free(i), &Time::Free(j), eps_t));
            if merge_symmetric && order_symmetric(si, sj) {
                for c in pop_pair(&Pos::Free(i), si, &Pos::Free(j), sj) {
                    f.push_folded(c);
                }
                continue;
            }
            for (p, sp, q, sq) in [(i, si, j, sj), (j, sj, i, si)] {
                let body = pop_pair(&Pos::Free(p), sp, &Pos::Free(q), sq);
                for c in guard_with_order(&Time::Free(p), &Time::Free(q), eps_t, body) {
                    f.push_folded(c);
                }
            }
        }
    }
    for &(j, sj) in free {
        for o in fixed {
            for c in pop_pair(&Pos::Fixed(o.position.clone()), o.shape, &Pos::Free(j), sj) {
                f.push_folded(c);
            }
        }
    }
    f
}
