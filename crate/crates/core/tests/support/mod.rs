//! Independent brute-force oracles and seeded generators shared by the
//! integration tests. Nothing here calls the algorithm under test.
#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use seqpack_core::model::{Clause, Formula, LinExpr, Relation};
use seqpack_core::{ConvexPolygon, Point2, Rational, VarId};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Rational {
    q(n, 1)
}

/// Rational with numerator in `-span..=span` over a denominator in `1..=den`.
pub fn rand_rat(rng: &mut ChaCha8Rng, span: i64, den: i64) -> Rational {
    let d = rng.gen_range(1..=den);
    q(rng.gen_range(-span * d..=span * d), d)
}

pub fn rand_point(rng: &mut ChaCha8Rng, span: i64, den: i64) -> Point2 {
    Point2::new(rand_rat(rng, span, den), rand_rat(rng, span, den))
}

fn cross3(
    o: &(Rational, Rational),
    a: &(Rational, Rational),
    b: &(Rational, Rational),
) -> Rational {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

pub fn key(p: &Point2) -> (Rational, Rational) {
    (p.x.clone(), p.y.clone())
}

/// Vertices of the convex hull by exhaustive edge testing: `(p, q)` is a
/// hull edge when every point lies left of or on the line `pq` and the
/// points on the line lie within the closed segment.
pub fn brute_hull(points: &[Point2]) -> BTreeSet<(Rational, Rational)> {
    let pts: Vec<(Rational, Rational)> = points
        .iter()
        .map(key)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut out = BTreeSet::new();
    for p in &pts {
        for r in &pts {
            if p == r {
                continue;
            }
            let edge = pts.iter().all(|s| {
                let o = cross3(p, r, s);
                if o.is_negative() {
                    return false;
                }
                if o.is_zero() {
                    let lo_x = p.0.clone().min(r.0.clone());
                    let hi_x = p.0.clone().max(r.0.clone());
                    let lo_y = p.1.clone().min(r.1.clone());
                    let hi_y = p.1.clone().max(r.1.clone());
                    return lo_x <= s.0 && s.0 <= hi_x && lo_y <= s.1 && s.1 <= hi_y;
                }
                true
            });
            if edge {
                out.insert(p.clone());
                out.insert(r.clone());
            }
        }
    }
    out
}

/// Brute-force hull of every vertex sum.
pub fn pairwise_sum_hull(a: &ConvexPolygon, b: &ConvexPolygon) -> BTreeSet<(Rational, Rational)> {
    let sums: Vec<Point2> = a
        .vertices()
        .iter()
        .flat_map(|u| {
            b.vertices()
                .iter()
                .map(move |v| Point2::new(&u.x + &v.x, &u.y + &v.y))
        })
        .collect();
    brute_hull(&sums)
}

pub fn vertex_set(p: &ConvexPolygon) -> BTreeSet<(Rational, Rational)> {
    p.vertices().iter().map(key).collect()
}

/// True when every consecutive vertex triple turns strictly left.
pub fn strictly_ccw(p: &ConvexPolygon) -> bool {
    let v: Vec<(Rational, Rational)> = p.vertices().iter().map(key).collect();
    let n = v.len();
    n >= 3 && (0..n).all(|i| cross3(&v[i], &v[(i + 1) % n], &v[(i + 2) % n]).is_positive())
}

/// Interiors of the translated polygons overlap iff no edge normal of either
/// polygon separates their projections (touching counts as separated).
pub fn sat_overlap(a: &ConvexPolygon, da: &Point2, b: &ConvexPolygon, db: &Point2) -> bool {
    let pa: Vec<(Rational, Rational)> = a
        .vertices()
        .iter()
        .map(|v| (&v.x + &da.x, &v.y + &da.y))
        .collect();
    let pb: Vec<(Rational, Rational)> = b
        .vertices()
        .iter()
        .map(|v| (&v.x + &db.x, &v.y + &db.y))
        .collect();
    for poly in [&pa, &pb] {
        for i in 0..poly.len() {
            let (p, r) = (&poly[i], &poly[(i + 1) % poly.len()]);
            let n = (&r.1 - &p.1, &p.0 - &r.0);
            let proj = |s: &[(Rational, Rational)]| {
                let vals: Vec<Rational> = s.iter().map(|v| &n.0 * &v.0 + &n.1 * &v.1).collect();
                (
                    vals.iter().min().unwrap().clone(),
                    vals.iter().max().unwrap().clone(),
                )
            };
            let (a0, a1) = proj(&pa);
            let (b0, b1) = proj(&pb);
            if a1 <= b0 || b1 <= a0 {
                return false;
            }
        }
    }
    true
}

/// Closed-segment intersection by solving `p1 + s·(p2−p1) = q1 + t·(q2−q1)`
/// exactly, with the collinear case decided by projection overlap.
pub fn segments_meet_exact(p1: &Point2, p2: &Point2, q1: &Point2, q2: &Point2) -> bool {
    let (dx, dy) = (&p2.x - &p1.x, &p2.y - &p1.y);
    let (ex, ey) = (&q2.x - &q1.x, &q2.y - &q1.y);
    let (wx, wy) = (&q1.x - &p1.x, &q1.y - &p1.y);
    let den = &dx * &ey - &dy * &ex;
    let one = qi(1);
    if !den.is_zero() {
        let s = (&wx * &ey - &wy * &ex) / &den;
        let t = (&wx * &dy - &wy * &dx) / &den;
        return s >= Rational::zero() && s <= one && t >= Rational::zero() && t <= one;
    }
    // parallel: must be on the same line
    if !(&wx * &dy - &wy * &dx).is_zero() {
        return false;
    }
    let dot = |x: &Rational, y: &Rational| x * &dx + y * &dy;
    let len = dot(&dx, &dy);
    if len.is_zero() {
        // p is a point; q may also be a point
        let elen = &ex * &ex + &ey * &ey;
        if elen.is_zero() {
            return wx.is_zero() && wy.is_zero();
        }
        if !(&ex * &wy - &ey * &wx).is_zero() {
            return false;
        }
        let t = -(&wx * &ex + &wy * &ey) / &elen;
        return t >= Rational::zero() && t <= one;
    }
    let a = dot(&wx, &wy) / &len;
    let b = dot(&(&q2.x - &p1.x), &(&q2.y - &p1.y)) / &len;
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    hi >= Rational::zero() && lo <= one
}

/// Random formula over `x0..x{vars-1}` with up to `max_clauses` clauses of up
/// to `max_disj` disjuncts; coefficients are small integers, bounds small
/// rationals, relations mixed. About a third of the literals are shifted
/// negations of earlier ones, which makes contradictions common.
pub fn random_formula(
    rng: &mut ChaCha8Rng,
    vars: usize,
    max_clauses: usize,
    max_disj: usize,
) -> Formula {
    let mut f = Formula::new();
    for v in 0..vars {
        f.declare(VarId::x(v));
    }
    let mut seen: Vec<(LinExpr, bool)> = Vec::new();
    let n_clauses = rng.gen_range(1..=max_clauses);
    for _ in 0..n_clauses {
        let k = rng.gen_range(1..=max_disj);
        let lits: Vec<_> = (0..k)
            .map(|_| {
                if !seen.is_empty() && rng.gen_bool(0.35) {
                    // not(e < 0) is -e <= 0; a small shift keeps it near the boundary
                    let (e, strict) = seen[rng.gen_range(0..seen.len())].clone();
                    let shift = rand_rat(rng, 1, 2);
                    return e.scale(&qi(-1)).plus_const(&shift).atom(!strict);
                }
                let mut e = LinExpr::constant(-rand_rat(rng, 4, 2));
                let mut any = false;
                for v in 0..vars {
                    let c = rng.gen_range(-2i64..=2);
                    if c != 0 && rng.gen_bool(0.7) {
                        e = e.add(&LinExpr::var(VarId::x(v)).scale(&qi(c)));
                        any = true;
                    }
                }
                if !any {
                    let c = if rng.gen_bool(0.5) { 1 } else { -1 };
                    e = e.add(&LinExpr::var(VarId::x(rng.gen_range(0..vars))).scale(&qi(c)));
                }
                let strict = rng.gen_bool(0.5);
                seen.push((e.clone(), strict));
                e.atom(strict)
            })
            .collect();
        f.push_folded(Clause::fold(lits));
    }
    f
}

/// Exact feasibility of a conjunction `Σ a·x (< | ≤) b` by Fourier-Motzkin
/// elimination with strictness tracking.
pub fn fm_feasible(mut rows: Vec<(Vec<Rational>, bool, Rational)>, vars: usize) -> bool {
    for k in 0..vars {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            if r.0[k].is_positive() {
                pos.push(r);
            } else if r.0[k].is_negative() {
                neg.push(r);
            } else {
                rest.push(r);
            }
        }
        for (pa, ps, pb) in &pos {
            for (na, ns, nb) in &neg {
                let (kp, kn) = (pa[k].clone(), -na[k].clone());
                let a: Vec<Rational> = (0..vars).map(|j| &pa[j] / &kp + &na[j] / &kn).collect();
                rest.push((a, *ps || *ns, pb / &kp + nb / &kn));
            }
        }
        rows = rest;
    }
    rows.iter().all(|(_, strict, b)| {
        if *strict {
            b.is_positive()
        } else {
            !b.is_negative()
        }
    })
}

/// Satisfiability by trying every choice of one disjunct per clause.
pub fn enumerate_verdict(f: &Formula) -> bool {
    let vars: Vec<VarId> = f.variables().iter().copied().collect();
    let clauses = f.clauses();
    if clauses.iter().any(|c| c.disjuncts().is_empty()) {
        return false;
    }
    let mut pick = vec![0usize; clauses.len()];
    loop {
        let rows: Vec<(Vec<Rational>, bool, Rational)> = clauses
            .iter()
            .zip(&pick)
            .map(|(c, &i)| {
                let d = &c.disjuncts()[i];
                let mut a = vec![Rational::zero(); vars.len()];
                for (v, coef) in d.coeffs() {
                    a[vars.iter().position(|w| w == v).unwrap()] = coef.clone();
                }
                (a, d.relation() == Relation::Lt, d.rhs().clone())
            })
            .collect();
        if fm_feasible(rows, vars.len()) {
            return true;
        }
        let mut k = 0;
        loop {
            if k == pick.len() {
                return false;
            }
            pick[k] += 1;
            if pick[k] < clauses[k].disjuncts().len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}
