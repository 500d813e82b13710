mod support;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqpack_core::engine::{solve_bounded, Bounded};
use seqpack_core::model::{
    build_base_formula, guard_with_order, lni_constraint, pop_constraint, pop_pair,
    time_separation, Assignment, Folded, Formula, LinExpr, Pos, Shape, Time,
};
use seqpack_core::solver::{internal_decide, SolverSession};
use seqpack_core::{
    convex_hull, polygons_overlap, segments_intersect, Backend, Clause, ConvexPolygon, Point2,
    Rational, SolveResult, VarId,
};
use support::*;

fn holds(clauses: &[Folded], a: &Assignment) -> bool {
    clauses.iter().all(|f| match f {
        Folded::True => true,
        Folded::Clause(c) => c.eval(a).expect("every variable assigned"),
    })
}

fn place(a: &mut Assignment, i: usize, p: &Point2) {
    a.insert(VarId::x(i), p.x.clone());
    a.insert(VarId::y(i), p.y.clone());
}

fn rect(w: i64, h: i64) -> ConvexPolygon {
    ConvexPolygon::rectangle(qi(0), qi(0), qi(w), qi(h)).unwrap()
}

fn shape(p: ConvexPolygon) -> Shape {
    Shape {
        hull: p.clone(),
        envelope: p,
    }
}

#[test]
fn pop_matches_interval_containment_on_a_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0050_4f50);
    let mut inside_cases = 0;
    for case in 0..600 {
        let (wa, ha, wb, hb) = (
            rng.gen_range(1..12),
            rng.gen_range(1..12),
            rng.gen_range(1..12),
            rng.gen_range(1..12),
        );
        let pa = Point2::from_ints(rng.gen_range(0..20), rng.gen_range(0..20));
        let pb = Point2::from_ints(rng.gen_range(0..20), rng.gen_range(0..20));
        let mut a = Assignment::new();
        place(&mut a, 0, &pa);
        place(&mut a, 1, &pb);
        let got = holds(
            &pop_constraint(&Pos::Free(0), &rect(wa, ha), &Pos::Free(1), &rect(wb, hb)),
            &a,
        );
        // a vertex is forbidden only strictly inside B's open rectangle
        let corners = [(0, 0), (wa, 0), (wa, ha), (0, ha)];
        let inside = corners.iter().any(|&(dx, dy)| {
            let (x, y) = (&pa.x + qi(dx), &pa.y + qi(dy));
            pb.x < x && x < &pb.x + qi(wb) && pb.y < y && y < &pb.y + qi(hb)
        });
        assert_eq!(got, !inside, "case {case}");
        inside_cases += inside as usize;
    }
    assert!(inside_cases > 50);
}

#[test]
fn lni_is_the_negation_of_segment_intersection() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x004c_6e49);
    let mut crossing = 0;
    for case in 0..500 {
        let e: Vec<Point2> = (0..4).map(|_| rand_point(&mut rng, 6, 2)).collect();
        if e[0] == e[1] || e[2] == e[3] {
            continue;
        }
        let (da, db) = (rand_point(&mut rng, 4, 1), rand_point(&mut rng, 4, 1));
        let mut a = Assignment::new();
        place(&mut a, 0, &da);
        place(&mut a, 1, &db);
        let clauses = lni_constraint(&Pos::Free(0), &e[0], &e[1], &Pos::Free(1), &e[2], &e[3]);
        let (a1, a2, b1, b2) = (&e[0] + &da, &e[1] + &da, &e[2] + &db, &e[3] + &db);
        let meet = segments_intersect(&a1, &a2, &b1, &b2);
        let on_one_line = [&b1, &b2].iter().all(|p| orient(&a1, &a2, p) == qi(0));
        if on_one_line {
            // both segments on one line: the strict encoding rejects even
            // disjoint collinear pairs
            assert!(!holds(&clauses, &a), "case {case}");
            continue;
        }
        assert_eq!(holds(&clauses, &a), !meet, "case {case}");
        crossing += meet as usize;
    }
    assert!(crossing > 30, "{crossing}");
}

fn orient(a: &Point2, b: &Point2, c: &Point2) -> Rational {
    (&b.x - &a.x) * (&c.y - &a.y) - (&b.y - &a.y) * (&c.x - &a.x)
}

#[test]
fn pop_plus_lni_excludes_overlap() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x534f_554e);
    let mut accepted = 0;
    for _ in 0..3000 {
        let pa: Vec<Point2> = (0..rng.gen_range(3..7))
            .map(|_| rand_point(&mut rng, 6, 2))
            .collect();
        let pb: Vec<Point2> = (0..rng.gen_range(3..7))
            .map(|_| rand_point(&mut rng, 6, 2))
            .collect();
        let (Ok(ha), Ok(hb)) = (convex_hull(&pa), convex_hull(&pb)) else {
            continue;
        };
        let (da, db) = (rand_point(&mut rng, 8, 2), rand_point(&mut rng, 8, 2));
        let mut a = Assignment::new();
        place(&mut a, 0, &da);
        place(&mut a, 1, &db);
        let mut all = pop_constraint(&Pos::Free(0), &ha, &Pos::Free(1), &hb);
        all.extend(pop_constraint(&Pos::Free(1), &hb, &Pos::Free(0), &ha));
        for (a1, a2) in ha.edges() {
            for (b1, b2) in hb.edges() {
                all.extend(lni_constraint(&Pos::Free(0), a1, a2, &Pos::Free(1), b1, b2));
            }
        }
        if holds(&all, &a) {
            accepted += 1;
            assert!(
                !polygons_overlap(&ha, &da, &hb, &db),
                "counterexample {ha:?} at {da} / {hb:?} at {db}"
            );
        }
    }
    assert!(accepted > 200, "{accepted}");
}

#[test]
fn crossing_bars_satisfy_pop_but_overlap() {
    let (h, v) = (shape(rect(100, 4)), shape(rect(4, 100)));
    let (ph, pv) = (Point2::from_ints(0, 48), Point2::from_ints(48, 0));
    let mut a = Assignment::new();
    place(&mut a, 0, &ph);
    place(&mut a, 1, &pv);
    assert!(holds(&pop_pair(&Pos::Free(0), &h, &Pos::Free(1), &v), &a));
    assert!(holds(&pop_pair(&Pos::Free(1), &v, &Pos::Free(0), &h), &a));
    assert!(polygons_overlap(&h.hull, &ph, &v.hull, &pv));
}

#[test]
fn first_model_of_crossing_bars_intersects() {
    // in a 100×100 plate each bar spans the plate, so they must cross: PoP
    // alone is satisfiable, the refined problem is not
    let shapes = vec![shape(rect(100, 4)), shape(rect(4, 100))];
    let group: Vec<(usize, &Shape)> = shapes.iter().enumerate().collect();
    let plate = rect(100, 100);
    let mut session =
        SolverSession::with_formula(Backend::Internal, build_base_formula(&shapes, &qi(1)));
    let (r, stats) = solve_bounded(&mut session, &plate, &group, &[], &qi(1), 1000, false).unwrap();
    assert!(matches!(r, Bounded::Unsat));
    assert!(stats.first_model_crossings > 0);
    assert!(stats.refinements > 0);
}

#[test]
fn guard_truth_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4755_4152);
    let eps = qi(1);
    let body = pop_constraint(&Pos::Free(0), &rect(5, 5), &Pos::Free(1), &rect(5, 5));
    let guarded = guard_with_order(&Time::Free(0), &Time::Free(1), &eps, body.clone());
    let sep = [time_separation(&Time::Free(0), &Time::Free(1), &eps)];
    let mut seen = [[false; 2]; 2];
    for _ in 0..2000 {
        let mut a = Assignment::new();
        place(
            &mut a,
            0,
            &Point2::from_ints(rng.gen_range(0..12), rng.gen_range(0..12)),
        );
        place(
            &mut a,
            1,
            &Point2::from_ints(rng.gen_range(0..12), rng.gen_range(0..12)),
        );
        a.insert(VarId::t(0), rand_rat(&mut rng, 4, 4));
        a.insert(VarId::t(1), rand_rat(&mut rng, 4, 4));
        if !holds(&sep, &a) {
            continue;
        }
        let first = a[&VarId::t(0)] < a[&VarId::t(1)];
        let b = holds(&body, &a);
        assert_eq!(holds(&guarded, &a), !first || b);
        seen[first as usize][b as usize] = true;
    }
    assert_eq!(seen, [[true; 2]; 2], "every row of the table is exercised");
}

#[test]
fn every_order_of_four_objects_is_reachable() {
    let shapes: Vec<Shape> = (0..4).map(|_| shape(rect(10, 10))).collect();
    let base = build_base_formula(&shapes, &qi(1));
    let mut perm = [0usize, 1, 2, 3];
    let mut orders = std::collections::BTreeSet::new();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    // all 24 permutations, visited through a shuffled Heap's algorithm walk
    let mut all: Vec<[usize; 4]> = Vec::new();
    permute(&mut perm, 4, &mut all);
    all.shuffle(&mut rng);
    for p in &all {
        let mut f: Formula = base.clone();
        for w in p.windows(2) {
            f.push_folded(Clause::fold([LinExpr::var(VarId::t(w[0]))
                .sub(&LinExpr::var(VarId::t(w[1])))
                .atom(true)]));
        }
        match internal_decide(&f, None).unwrap() {
            SolveResult::Sat(m) => {
                assert_eq!(f.eval(&m), Some(true));
                let mut by_time: Vec<usize> = (0..4).collect();
                by_time.sort_by(|a, b| m[&VarId::t(*a)].cmp(&m[&VarId::t(*b)]));
                assert_eq!(&by_time[..], &p[..]);
                orders.insert(by_time);
            }
            other => panic!("order {p:?}: {other:?}"),
        }
    }
    assert_eq!(orders.len(), 24);
}

fn permute(a: &mut [usize; 4], k: usize, out: &mut Vec<[usize; 4]>) {
    if k == 1 {
        out.push(*a);
        return;
    }
    for i in 0..k {
        permute(a, k - 1, out);
        if k.is_multiple_of(2) {
            a.swap(i, k - 1);
        } else {
            a.swap(0, k - 1);
        }
    }
}

#[test]
fn equal_or_close_times_violate_separation() {
    let eps = qi(1);
    let sep = [time_separation(&Time::Free(0), &Time::Free(1), &eps)];
    for (t0, t1, ok) in [
        (qi(0), qi(0), false),
        (qi(0), qi(1), false),
        (qi(0), q(11, 10), true),
        (qi(3), q(19, 10), true),
    ] {
        let mut a = Assignment::new();
        a.insert(VarId::t(0), t0);
        a.insert(VarId::t(1), t1);
        assert_eq!(holds(&sep, &a), ok);
    }
}
