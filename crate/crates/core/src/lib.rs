//! Sequential-printing placement: exact geometry, a linear real arithmetic
//! encoding of collision-free arrangements, a CEGAR engine that shrinks the
//! plate by bisection, and a portfolio of placement strategies.

pub mod benchmark;
pub mod engine;
pub mod geometry;
pub mod model;
pub mod portfolio;
pub mod rational;
pub mod scene;
pub mod schedule_file;
pub mod solver;
pub mod svg;
pub mod verify;

pub use engine::{
    bisect_sigma, solve_bounded, solve_cegar_seq, Bisection, Bounded, CegarStats, EngineConfig,
    EngineError, Placement, PlacementGroup, PlateAssignment, Schedule,
};
pub use geometry::{
    convex_hull, envelope_hull, intersection_area2, minkowski_sum, polygons_overlap, scale_plate,
    segments_intersect, ConvexPolygon, ExtruderProfile, GeometryError, Plate, Point2, PrintObject,
};
pub use model::{Clause, Formula, LinIneq, Relation, VarId, VarKind};
pub use portfolio::{
    apply_ordering, run_portfolio, select_best, tactic_anchor, CompositeStrategy, Ordering,
    PortfolioOutcome, PortfolioSetup, Tactic,
};
pub use rational::Rational;
pub use scene::{load_scene, parse_scene, Scene, SceneError};
pub use solver::{Backend, SolveResult, SolverError, SolverSession};
pub use verify::{verify_schedule, Violation};
