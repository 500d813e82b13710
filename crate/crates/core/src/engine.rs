//! The CEGAR placement engine: bounded solving with lazy edge-crossing
//! refinement, bisection on the plate shrink factor σ, and the outer loop
//! that fills plates group by group.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::geometry::{
    intersection_area2, scale_plate, segments_intersect, ConvexPolygon, GeometryError, Point2,
};
use crate::model::{
    build_group_formula, guard_with_order, lni_constraint, order_symmetric, pip_constraint,
    FixedObject, Formula, Pos, Shape, Time, VarId,
};
use crate::portfolio::{apply_ordering, tactic_anchor, CompositeStrategy};
use crate::rational::{int, ratio, Rational};
use crate::scene::Scene;
use crate::solver::{Backend, SolveResult, SolverError, SolverSession};

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub eps_t: Rational,
    pub eps_xy: Rational,
    pub group_size: usize,
    /// Wall-clock budget of one bounded solve.
    pub timeout: Option<Duration>,
    /// Upper limit on refinement rounds of one bounded solve; `None`
    /// derives it from the instance.
    pub refinement_cap: Option<usize>,
    pub backend: Backend,
    pub smtlib_dump: Option<PathBuf>,
    /// Assert one unguarded copy of the constraints of a pair whose
    /// forbidden offsets do not depend on the print order.
    pub merge_symmetric_pairs: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            eps_t: int(1),
            eps_xy: ratio(1, 1024),
            group_size: 4,
            timeout: Some(Duration::from_secs(60)),
            refinement_cap: None,
            backend: Backend::Internal,
            smtlib_dump: None,
            merge_symmetric_pairs: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("object `{0}` does not fit on an empty plate")]
    InstanceError(String),
    #[error("group is infeasible at sigma = 1")]
    InfeasibleAtOne,
    #[error("bounded solve exceeded its deadline")]
    Timeout,
    #[error("refinement cap of {0} rounds exceeded")]
    RefinementCapExceeded(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One placed object: translation of its local frame and print time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub object: usize,
    pub id: String,
    pub x: Rational,
    pub y: Rational,
    pub t: Rational,
}

impl Placement {
    pub fn offset(&self) -> Point2 {
        Point2::new(self.x.clone(), self.y.clone())
    }
}

/// Counters of one bounded solve or of a whole bisection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CegarStats {
    pub solver_calls: usize,
    pub refinements: usize,
    /// Edge crossings found in the first SAT model.
    pub first_model_crossings: usize,
    pub probes: usize,
}

impl CegarStats {
    fn absorb(&mut self, other: &CegarStats) {
        if self.solver_calls == 0 {
            self.first_model_crossings = other.first_model_crossings;
        }
        self.solver_calls += other.solver_calls;
        self.refinements += other.refinements;
        self.probes += other.probes;
    }
}

/// Objects placed together by one bisection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementGroup {
    pub entries: Vec<Placement>,
    /// Smallest feasible σ found.
    pub sigma: Rational,
    /// Largest σ probed infeasible, or 0.
    pub sigma_lower: Rational,
    pub stats: CegarStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlateAssignment {
    pub plate_index: usize,
    pub groups: Vec<PlacementGroup>,
    /// Largest σ over the groups; every placed hull lies in the plate
    /// scaled by this factor.
    pub sigma: Rational,
    pub anchor: Point2,
}

impl PlateAssignment {
    /// Placements sorted by print time.
    pub fn in_print_order(&self) -> Vec<&Placement> {
        let mut all: Vec<&Placement> = self.groups.iter().flat_map(|g| &g.entries).collect();
        all.sort_by(|a, b| a.t.cmp(&b.t));
        all
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(|g| g.entries.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub plates: Vec<PlateAssignment>,
    pub strategy: String,
    pub wall_time: Duration,
}

impl Schedule {
    pub fn sigma_sum(&self) -> Rational {
        self.plates
            .iter()
            .fold(Rational::zero(), |acc, p| acc + &p.sigma)
    }

    pub fn objects_per_plate(&self) -> Vec<usize> {
        self.plates.iter().map(|p| p.len()).collect()
    }
}

/// Outcome of [`solve_bounded`].
#[derive(Debug, Clone)]
pub enum Bounded {
    Sat(Vec<Placement>),
    Unsat,
}

struct Placed<'a> {
    object: usize,
    shape: &'a Shape,
    offset: Point2,
    t: Rational,
}

/// Ordered pairs of slots whose earlier-hull/later-envelope edges are
/// checked, with whether their constraints need an order guard.
///
/// A free pair merged in the formula is always checked in group order, since
/// its constraint forbids the same offsets whichever object prints first.
fn checked_pairs(
    placed: &[Placed<'_>],
    n_free: usize,
    merged: &[Vec<bool>],
) -> Vec<(usize, usize, bool)> {
    let mut out = Vec::new();
    for a in 0..placed.len() {
        for b in 0..placed.len() {
            if a == b || (a >= n_free && b >= n_free) {
                continue;
            }
            if a < n_free && b < n_free && merged[a.min(b)][a.max(b)] {
                if a < b {
                    out.push((a, b, false));
                }
            } else if placed[a].t < placed[b].t {
                out.push((a, b, a < n_free && b < n_free));
            }
        }
    }
    out
}

/// Every crossing between an edge of an earlier object's hull and an edge
/// of a later object's envelope over `pairs`.
///
/// Each hit is (earlier slot, hull edge, later slot, envelope edge, guarded).
fn crossings(
    placed: &[Placed<'_>],
    pairs: &[(usize, usize, bool)],
) -> Vec<(usize, usize, usize, usize, bool)> {
    let mut out = Vec::new();
    for &(a, b, guarded) in pairs {
        let (pa, pb) = (&placed[a], &placed[b]);
        let hull: Vec<(Point2, Point2)> = pa
            .shape
            .hull
            .edges()
            .map(|(p, q)| (p + &pa.offset, q + &pa.offset))
            .collect();
        let env: Vec<(Point2, Point2)> = pb
            .shape
            .envelope
            .edges()
            .map(|(p, q)| (p + &pb.offset, q + &pb.offset))
            .collect();
        for (ea, (p1, p2)) in hull.iter().enumerate() {
            for (eb, (q1, q2)) in env.iter().enumerate() {
                if segments_intersect(p1, p2, q1, q2) {
                    out.push((a, ea, b, eb, guarded));
                }
            }
        }
    }
    out
}

fn nth_edge(poly: &ConvexPolygon, k: usize) -> (Point2, Point2) {
    let v = poly.vertices();
    (v[k].clone(), v[(k + 1) % v.len()].clone())
}

/// Solve the group formula held by `session` inside `sigma_plate`, adding
/// lines-not-intersect constraints for every edge crossing found in a model
/// until a crossing-free model appears or the formula becomes infeasible.
///
/// Learned constraints stay in the session; the containment constraints are
/// retracted before returning.
pub fn solve_bounded(
    session: &mut SolverSession,
    sigma_plate: &ConvexPolygon,
    group: &[(usize, &Shape)],
    fixed: &[FixedObject<'_>],
    eps_t: &Rational,
    cap: usize,
    merge_symmetric: bool,
) -> Result<(Bounded, CegarStats), EngineError> {
    let mut stats = CegarStats::default();
    let merged: Vec<Vec<bool>> = group
        .iter()
        .map(|(_, sa)| {
            group
                .iter()
                .map(|(_, sb)| merge_symmetric && order_symmetric(sa, sb))
                .collect()
        })
        .collect();
    // hull interiors are pairwise disjoint, so the free hulls must fit in the
    // part of the region not already covered by fixed hulls
    let origin = Point2::origin();
    let covered: Rational = fixed
        .iter()
        .map(|f| intersection_area2(&f.shape.hull, &f.position, sigma_plate, &origin))
        .sum();
    let needed: Rational = group.iter().map(|(_, s)| s.hull.area2()).sum();
    if needed > sigma_plate.area2() - covered {
        return Ok((Bounded::Unsat, stats));
    }
    loop {
        if stats.refinements >= cap {
            return Err(EngineError::RefinementCapExceeded(cap));
        }
        session.push();
        for &(i, shape) in group {
            for c in pip_constraint(&Pos::Free(i), &shape.hull, sigma_plate) {
                session.assert_folded(c);
            }
        }
        let result = session.solve();
        session.pop();
        stats.solver_calls += 1;
        let model = match result? {
            SolveResult::Unsat => return Ok((Bounded::Unsat, stats)),
            SolveResult::Timeout => return Err(EngineError::Timeout),
            SolveResult::Sat(m) => m,
        };

        let mut placed: Vec<Placed<'_>> = group
            .iter()
            .map(|&(i, shape)| Placed {
                object: i,
                shape,
                offset: Point2::new(model[&VarId::x(i)].clone(), model[&VarId::y(i)].clone()),
                t: model[&VarId::t(i)].clone(),
            })
            .collect();
        placed.extend(fixed.iter().map(|f| Placed {
            object: f.index,
            shape: f.shape,
            offset: f.position.clone(),
            t: f.time.clone(),
        }));

        let hits = crossings(&placed, &checked_pairs(&placed, group.len(), &merged));
        if stats.solver_calls == 1 {
            stats.first_model_crossings = hits.len();
        }
        if hits.is_empty() {
            let entries = placed[..group.len()]
                .iter()
                .map(|p| Placement {
                    object: p.object,
                    id: String::new(),
                    x: p.offset.x.clone(),
                    y: p.offset.y.clone(),
                    t: p.t.clone(),
                })
                .collect();
            return Ok((Bounded::Sat(entries), stats));
        }

        let mut added = 0;
        for (a, ea, b, eb, guarded) in hits {
            let (pa, pb) = (&placed[a], &placed[b]);
            let (a1, a2) = nth_edge(&pa.shape.hull, ea);
            let (b1, b2) = nth_edge(&pb.shape.envelope, eb);
            let pos_a = if a < group.len() {
                Pos::Free(pa.object)
            } else {
                Pos::Fixed(pa.offset.clone())
            };
            let pos_b = if b < group.len() {
                Pos::Free(pb.object)
            } else {
                Pos::Fixed(pb.offset.clone())
            };
            let body = lni_constraint(&pos_a, &a1, &a2, &pos_b, &b1, &b2);
            let clauses = if guarded {
                guard_with_order(&Time::Free(pa.object), &Time::Free(pb.object), eps_t, body)
            } else {
                body
            };
            for c in clauses {
                if session.assert_folded(c) {
                    added += 1;
                }
            }
        }
        stats.refinements += 1;
        if added == 0 {
            return Err(EngineError::Solver(SolverError::Internal(
                "refinement round added no new constraint".into(),
            )));
        }
    }
}

/// Refinement cap from the finite number of addable edge-pair constraints.
fn derived_cap(group: &[(usize, &Shape)], fixed: &[FixedObject<'_>]) -> usize {
    let shapes: Vec<&Shape> = group
        .iter()
        .map(|g| g.1)
        .chain(fixed.iter().map(|f| f.shape))
        .collect();
    let mut total = 0usize;
    for (a, sa) in shapes.iter().enumerate() {
        for (b, sb) in shapes.iter().enumerate() {
            if a != b && (a < group.len() || b < group.len()) {
                total += sa.hull.len() * sb.envelope.len();
            }
        }
    }
    total + 1
}

/// Result of a bisection on σ for one group.
#[derive(Debug, Clone)]
pub struct Bisection {
    pub sigma: Rational,
    pub sigma_lower: Rational,
    pub entries: Vec<Placement>,
    pub stats: CegarStats,
}

/// Smallest σ (within `eps_xy`) for which the group fits the plate shrunk
/// towards `anchor`. σ = 1 is probed first. Learned constraints persist
/// across probes in `session`.
pub fn bisect_sigma(
    session: &mut SolverSession,
    scene: &Scene,
    anchor: &Point2,
    group: &[(usize, &Shape)],
    fixed: &[FixedObject<'_>],
    config: &EngineConfig,
) -> Result<Bisection, EngineError> {
    let cap = config
        .refinement_cap
        .unwrap_or_else(|| derived_cap(group, fixed));
    let mut stats = CegarStats::default();
    let probe = |session: &mut SolverSession, sigma: &Rational, stats: &mut CegarStats| {
        session.deadline = config.timeout.map(|d| Instant::now() + d);
        let plate = scale_plate(&scene.plate, sigma, anchor)?;
        let (r, s) = solve_bounded(
            session,
            &plate,
            group,
            fixed,
            &config.eps_t,
            cap,
            config.merge_symmetric_pairs,
        )?;
        stats.absorb(&s);
        stats.probes += 1;
        Ok::<Bounded, EngineError>(r)
    };

    let mut hi = Rational::one();
    let mut lo = Rational::zero();
    let mut best = match probe(session, &hi, &mut stats)? {
        Bounded::Sat(e) => e,
        Bounded::Unsat => return Err(EngineError::InfeasibleAtOne),
    };
    while &hi - &lo > config.eps_xy {
        let mid = (&hi + &lo) / int(2);
        match probe(session, &mid, &mut stats)? {
            Bounded::Sat(e) => {
                best = e;
                hi = mid;
            }
            Bounded::Unsat => lo = mid,
        }
    }
    Ok(Bisection {
        sigma: hi,
        sigma_lower: lo,
        entries: best,
        stats,
    })
}

fn new_session(config: &EngineConfig, formula: Formula, label: &str) -> SolverSession {
    let mut s = SolverSession::with_formula(config.backend.clone(), formula);
    if let Some(dir) = &config.smtlib_dump {
        s.dump_to(dir.clone(), label);
    }
    s
}

/// Place every scene object, plate after plate, following `strategy`.
pub fn solve_cegar_seq(
    scene: &Scene,
    strategy: &CompositeStrategy,
    config: &EngineConfig,
) -> Result<Schedule, EngineError> {
    let start = Instant::now();
    let shapes = scene.shapes();
    let anchor = tactic_anchor(strategy.tactic, &scene.plate);
    let order = apply_ordering(strategy.ordering, &scene.objects);
    let k = config.group_size.max(1);
    let label = strategy.name().replace('/', "-");

    let mut plates: Vec<PlateAssignment> = Vec::new();
    let mut next = 0;
    while next < order.len() {
        let plate_index = plates.len();
        let mut plate = PlateAssignment {
            plate_index,
            groups: Vec::new(),
            sigma: Rational::zero(),
            anchor: anchor.clone(),
        };
        loop {
            if next >= order.len() {
                break;
            }
            let fixed: Vec<FixedObject<'_>> = plate
                .groups
                .iter()
                .flat_map(|g| &g.entries)
                .map(|p| FixedObject {
                    index: p.object,
                    shape: &shapes[p.object],
                    position: p.offset(),
                    time: p.t.clone(),
                })
                .collect();
            let mut m = k.min(order.len() - next);
            let placed = loop {
                let group: Vec<(usize, &Shape)> = order[next..next + m]
                    .iter()
                    .map(|&i| (i, &shapes[i]))
                    .collect();
                let formula = build_group_formula(
                    &group,
                    &fixed,
                    &config.eps_t,
                    config.merge_symmetric_pairs,
                );
                let mut session = new_session(
                    config,
                    formula,
                    &format!("{label}-p{plate_index}-o{next}-m{m}"),
                );
                match bisect_sigma(&mut session, scene, &anchor, &group, &fixed, config) {
                    Ok(b) => break Some(b),
                    Err(EngineError::InfeasibleAtOne) if m > 1 => m -= 1,
                    Err(EngineError::InfeasibleAtOne) => break None,
                    Err(e) => return Err(e),
                }
            };
            match placed {
                Some(b) => {
                    let entries = b
                        .entries
                        .into_iter()
                        .map(|mut p| {
                            p.id = scene.objects[p.object].id.clone();
                            p
                        })
                        .collect();
                    if b.sigma > plate.sigma {
                        plate.sigma = b.sigma.clone();
                    }
                    plate.groups.push(PlacementGroup {
                        entries,
                        sigma: b.sigma,
                        sigma_lower: b.sigma_lower,
                        stats: b.stats,
                    });
                    next += m;
                }
                None if plate.groups.is_empty() => {
                    return Err(EngineError::InstanceError(
                        scene.objects[order[next]].id.clone(),
                    ));
                }
                None => break,
            }
        }
        plates.push(plate);
    }
    Ok(Schedule {
        plates,
        strategy: strategy.name(),
        wall_time: start.elapsed(),
    })
}
