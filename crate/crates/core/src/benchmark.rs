//! Seeded benchmark instances and plate statistics over portfolio setups.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::engine::{EngineConfig, Schedule};
use crate::geometry::{convex_hull, ConvexPolygon, ExtruderProfile, Plate, Point2, PrintObject};
use crate::portfolio::{
    mix_seed, run_strategies, select_best, CompositeStrategy, PortfolioSetup, StrategyOutcome,
};
use crate::rational::{int, ratio, Rational};
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkKind {
    RandomCuboids,
    /// Draws from a fixed pool of synthetic printer-part footprints.
    ObjectPool,
}

impl BenchmarkKind {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "random-cuboids" => Some(BenchmarkKind::RandomCuboids),
            "object-pool" => Some(BenchmarkKind::ObjectPool),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::RandomCuboids => "random-cuboids",
            BenchmarkKind::ObjectPool => "object-pool",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchmarkError {
    #[error("invalid benchmark spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub kind: BenchmarkKind,
    pub counts: RangeInclusive<usize>,
    pub instances: usize,
    pub seed: u64,
    /// Inclusive integer bounds for every cuboid dimension.
    pub dims: (i64, i64),
    pub plate: (Rational, Rational),
    pub extruder: ExtruderProfile,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            kind: BenchmarkKind::RandomCuboids,
            counts: 1..=32,
            instances: 1,
            seed: 0,
            dims: (8, 64),
            plate: (int(200), int(200)),
            extruder: crate::scene::default_extruder(),
        }
    }
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<(), BenchmarkError> {
        let bad = |m: &str| Err(BenchmarkError::InvalidSpec(m.into()));
        if self.counts.is_empty() || *self.counts.start() == 0 {
            return bad("object counts must be a non-empty range of positive integers");
        }
        if self.instances == 0 {
            return bad("at least one instance per count is required");
        }
        if self.dims.0 <= 0 || self.dims.0 > self.dims.1 {
            return bad("dimension bounds must satisfy 0 < lo <= hi");
        }
        if Plate::new(self.plate.0.clone(), self.plate.1.clone()).is_err() {
            return bad("plate dimensions must be positive");
        }
        Ok(())
    }

    pub fn plate(&self) -> Plate {
        Plate::new(self.plate.0.clone(), self.plate.1.clone()).expect("validated plate")
    }

    /// Seed of instance `i` with `n` objects.
    pub fn instance_seed(&self, n: usize, i: usize) -> u64 {
        mix_seed(mix_seed(self.seed, n as u64), i as u64)
    }

    pub fn instance(&self, n: usize, i: usize) -> Scene {
        let seed = self.instance_seed(n, i);
        let objects = match self.kind {
            BenchmarkKind::RandomCuboids => gen_random_cuboids(n, self.dims, seed),
            BenchmarkKind::ObjectPool => printer_parts_like(n, seed),
        };
        Scene::new(self.plate(), self.extruder.clone(), objects)
    }
}

/// `n` cuboids `c0..` with length, width and height uniform over the closed
/// interval `dims`.
pub fn gen_random_cuboids(n: usize, dims: (i64, i64), seed: u64) -> Vec<PrintObject> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut d = || int(rng.gen_range(dims.0..=dims.1));
            let (l, w, h) = (d(), d(), d());
            PrintObject::cuboid(format!("c{i}"), l, w, h).expect("positive dimensions")
        })
        .collect()
}

fn polygon(points: &[(i64, i64)]) -> ConvexPolygon {
    let pts: Vec<Point2> = points
        .iter()
        .map(|&(x, y)| Point2::from_ints(x, y))
        .collect();
    convex_hull(&pts).expect("pool footprints are proper polygons")
}

/// Footprint and height (mm) of the synthetic part pool.
fn part_pool() -> Vec<(&'static str, ConvexPolygon, Rational)> {
    vec![
        (
            "bracket",
            polygon(&[(0, 0), (40, 0), (40, 12), (0, 12)]),
            int(30),
        ),
        (
            "corner",
            polygon(&[(0, 0), (35, 0), (35, 8), (8, 35), (0, 35)]),
            int(22),
        ),
        (
            "hex-nut-trap",
            polygon(&[(10, 0), (30, 0), (40, 17), (30, 34), (10, 34), (0, 17)]),
            int(12),
        ),
        (
            "idler",
            polygon(&[
                (0, 6),
                (6, 0),
                (26, 0),
                (32, 6),
                (32, 26),
                (26, 32),
                (6, 32),
                (0, 26),
            ]),
            int(18),
        ),
        (
            "belt-clip",
            polygon(&[(0, 0), (24, 0), (24, 9), (0, 9)]),
            int(7),
        ),
        (
            "fan-duct",
            polygon(&[(0, 0), (50, 0), (42, 30), (8, 30)]),
            int(28),
        ),
        (
            "spool-arm",
            polygon(&[(0, 0), (90, 0), (90, 14), (0, 14)]),
            int(10),
        ),
        ("wedge", polygon(&[(0, 0), (30, 0), (0, 30)]), int(15)),
        (
            "endstop-mount",
            polygon(&[(0, 0), (20, 0), (20, 26), (0, 26)]),
            int(16),
        ),
        (
            "x-carriage",
            polygon(&[(0, 0), (60, 0), (60, 45), (0, 45)]),
            int(14),
        ),
        (
            "motor-mount",
            polygon(&[(0, 0), (48, 0), (48, 48), (0, 48)]),
            int(9),
        ),
        (
            "cable-chain-link",
            polygon(&[(0, 0), (18, 0), (18, 12), (0, 12)]),
            int(11),
        ),
        (
            "knob",
            polygon(&[(5, 0), (15, 0), (20, 9), (15, 18), (5, 18), (0, 9)]),
            int(8),
        ),
        (
            "foot",
            polygon(&[
                (0, 8),
                (8, 0),
                (32, 0),
                (40, 8),
                (40, 32),
                (32, 40),
                (8, 40),
                (0, 32),
            ]),
            int(6),
        ),
        (
            "z-coupler",
            polygon(&[
                (4, 0),
                (16, 0),
                (20, 4),
                (20, 16),
                (16, 20),
                (4, 20),
                (0, 16),
                (0, 4),
            ]),
            int(25),
        ),
        (
            "frame-brace",
            polygon(&[(0, 0), (70, 0), (70, 20), (0, 20)]),
            int(5),
        ),
        (
            "hotend-shroud",
            polygon(&[(0, 0), (36, 0), (36, 28), (18, 40), (0, 28)]),
            int(34),
        ),
        (
            "filament-guide",
            polygon(&[(0, 0), (14, 0), (14, 30), (0, 30)]),
            int(40),
        ),
        (
            "y-idler",
            polygon(&[(0, 0), (44, 0), (38, 24), (6, 24)]),
            int(20),
        ),
        (
            "rod-clamp",
            polygon(&[(0, 0), (26, 0), (26, 16), (0, 16)]),
            int(13),
        ),
        (
            "pulley-cover",
            polygon(&[(8, 0), (24, 0), (32, 14), (24, 28), (8, 28), (0, 14)]),
            int(17),
        ),
        (
            "psu-cover",
            polygon(&[(0, 0), (80, 0), (80, 55), (0, 55)]),
            int(45),
        ),
        (
            "lcd-bezel",
            polygon(&[(0, 0), (100, 0), (100, 30), (0, 30)]),
            int(8),
        ),
        (
            "tensioner",
            polygon(&[(0, 0), (30, 0), (30, 18), (0, 18)]),
            int(24),
        ),
        (
            "extruder-body",
            polygon(&[(0, 0), (42, 0), (42, 42), (0, 42)]),
            int(36),
        ),
        (
            "probe-holder",
            polygon(&[(0, 0), (22, 0), (22, 14), (11, 22), (0, 14)]),
            int(19),
        ),
        (
            "spacer",
            polygon(&[(3, 0), (9, 0), (12, 5), (9, 10), (3, 10), (0, 5)]),
            int(10),
        ),
        (
            "bed-clip",
            polygon(&[(0, 0), (16, 0), (16, 10), (0, 10)]),
            int(4),
        ),
        (
            "cam-mount",
            polygon(&[(0, 0), (28, 0), (28, 22), (14, 34), (0, 22)]),
            int(31),
        ),
        (
            "handle",
            polygon(&[(0, 0), (120, 0), (120, 18), (0, 18)]),
            int(26),
        ),
        (
            "rpi-case",
            polygon(&[(0, 0), (92, 0), (92, 62), (0, 62)]),
            int(27),
        ),
        (
            "tool-holder",
            polygon(&[(0, 0), (55, 0), (55, 15), (0, 15)]),
            int(38),
        ),
        (
            "cable-tie-mount",
            polygon(&[(0, 0), (12, 0), (6, 10)]),
            int(6),
        ),
        (
            "leveling-wheel",
            polygon(&[(7, 0), (21, 0), (28, 12), (21, 24), (7, 24), (0, 12)]),
            ratio(15, 2),
        ),
    ]
}

/// `n` parts drawn uniformly with replacement from the synthetic pool.
/// Ids are `<part>-<i>`.
pub fn printer_parts_like(n: usize, seed: u64) -> Vec<PrintObject> {
    let pool = part_pool();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let (name, fp, h) = &pool[rng.gen_range(0..pool.len())];
            PrintObject::new(format!("{name}-{i}"), fp.clone(), h.clone())
                .expect("pool heights are positive")
        })
        .collect()
}

/// Outcome of one setup on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceResult {
    pub count: usize,
    pub instance: usize,
    pub setup: PortfolioSetup,
    /// Objects per plate of the best schedule; `None` on failure.
    pub objects_per_plate: Option<Vec<usize>>,
    pub error: Option<String>,
    pub wall_ms: f64,
}

impl InstanceResult {
    pub fn plates(&self) -> Option<usize> {
        self.objects_per_plate.as_ref().map(Vec::len)
    }
}

/// Aggregate over the instances of one (count, setup) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub count: usize,
    pub setup: PortfolioSetup,
    pub solved: usize,
    pub failed: usize,
    pub mean_plates: Option<f64>,
    /// Objects on a plate → number of such plates.
    pub histogram: BTreeMap<usize, usize>,
    pub mean_wall_ms: f64,
    pub group_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub kind: BenchmarkKind,
    pub seed: u64,
    pub instances: Vec<InstanceResult>,
    pub rows: Vec<ReportRow>,
}

/// Solve every instance with every setup. Per-instance failures are
/// recorded in the report. `timing` controls whether wall times are kept.
pub fn run_benchmark(
    spec: &BenchmarkSpec,
    setups: &[PortfolioSetup],
    config: &EngineConfig,
    threads: usize,
    timing: bool,
) -> Result<BenchmarkReport, BenchmarkError> {
    spec.validate()?;
    let mut instances = Vec::new();
    let mut rows = Vec::new();
    for n in spec.counts.clone() {
        let mut cells: Vec<Vec<InstanceResult>> = vec![Vec::new(); setups.len()];
        for i in 0..spec.instances {
            let scene = spec.instance(n, i);
            let seed = spec.instance_seed(n, i);
            let chosen: Vec<Vec<CompositeStrategy>> =
                setups.iter().map(|s| s.strategies(seed)).collect();
            let mut union: Vec<CompositeStrategy> = Vec::new();
            for st in chosen.iter().flatten() {
                if !union.contains(st) {
                    union.push(*st);
                }
            }
            // each distinct strategy runs once; setups select among their share
            let outcomes = match run_strategies(&scene, &union, config, threads) {
                Ok(o) => o.all,
                Err(e) => e.into_outcomes(),
            };
            for (s, &setup) in setups.iter().enumerate() {
                let mine: Vec<&StrategyOutcome> = outcomes
                    .iter()
                    .filter(|o| chosen[s].contains(&o.strategy))
                    .collect();
                let ok: Vec<Schedule> = mine
                    .iter()
                    .filter_map(|o| o.result.as_ref().ok().cloned())
                    .collect();
                let wall_ms = if timing {
                    ok.iter().map(|sc| sc.wall_time.as_secs_f64() * 1e3).sum()
                } else {
                    0.0
                };
                let (objects_per_plate, error) = match select_best(&ok) {
                    Some(best) => (Some(best.objects_per_plate()), None),
                    None => {
                        let detail: Vec<String> = mine
                            .iter()
                            .filter_map(|o| {
                                o.result
                                    .as_ref()
                                    .err()
                                    .map(|err| format!("{}: {err}", o.strategy))
                            })
                            .collect();
                        (None, Some(detail.join("; ")))
                    }
                };
                cells[s].push(InstanceResult {
                    count: n,
                    instance: i,
                    setup,
                    objects_per_plate,
                    error,
                    wall_ms,
                });
            }
        }
        for (s, cell) in cells.into_iter().enumerate() {
            rows.push(summarize(n, setups[s], &cell, config.group_size));
            instances.extend(cell);
        }
    }
    Ok(BenchmarkReport {
        kind: spec.kind,
        seed: spec.seed,
        instances,
        rows,
    })
}

fn summarize(
    count: usize,
    setup: PortfolioSetup,
    cell: &[InstanceResult],
    group_size: usize,
) -> ReportRow {
    let plates: Vec<usize> = cell.iter().filter_map(InstanceResult::plates).collect();
    let mut histogram = BTreeMap::new();
    for per_plate in cell.iter().filter_map(|r| r.objects_per_plate.as_ref()) {
        for &k in per_plate {
            *histogram.entry(k).or_insert(0) += 1;
        }
    }
    ReportRow {
        count,
        setup,
        solved: plates.len(),
        failed: cell.len() - plates.len(),
        mean_plates: (!plates.is_empty())
            .then(|| plates.iter().sum::<usize>() as f64 / plates.len() as f64),
        histogram,
        mean_wall_ms: cell.iter().map(|r| r.wall_ms).sum::<f64>() / cell.len().max(1) as f64,
        group_size,
    }
}

impl BenchmarkReport {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let hist: serde_json::Map<String, Value> = r
                    .histogram
                    .iter()
                    .map(|(k, v)| (k.to_string(), json!(v)))
                    .collect();
                json!({
                    "count": r.count,
                    "setup": r.setup.name(),
                    "solved": r.solved,
                    "failed": r.failed,
                    "mean_plates": r.mean_plates,
                    "objects_per_plate_histogram": hist,
                    "mean_wall_ms": r.mean_wall_ms,
                    "k": r.group_size,
                })
            })
            .collect();
        let instances: Vec<Value> = self
            .instances
            .iter()
            .map(|r| {
                json!({
                    "count": r.count,
                    "instance": r.instance,
                    "setup": r.setup.name(),
                    "plates": r.plates(),
                    "objects_per_plate": r.objects_per_plate,
                    "error": r.error,
                    "wall_ms": r.wall_ms,
                })
            })
            .collect();
        json!({
            "kind": self.kind.name(),
            "seed": self.seed,
            "rows": rows,
            "instances": instances,
        })
    }

    /// Fixed-width table, one line per (count, setup).
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>5}  {:<9} {:>6} {:>6} {:>11} {:>12} {:>3}  histogram (objects/plate: plates)",
            "n", "setup", "solved", "failed", "mean plates", "mean wall ms", "k"
        );
        for r in &self.rows {
            let mean = r.mean_plates.map_or("-".to_string(), |m| format!("{m:.3}"));
            let hist: Vec<String> = r
                .histogram
                .iter()
                .map(|(k, v)| format!("{k}:{v}"))
                .collect();
            let _ = writeln!(
                out,
                "{:>5}  {:<9} {:>6} {:>6} {:>11} {:>12.1} {:>3}  {}",
                r.count,
                r.setup.name(),
                r.solved,
                r.failed,
                mean,
                r.mean_wall_ms,
                r.group_size,
                hist.join(" ")
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cuboids_are_reproducible_and_bounded() {
        let a = gen_random_cuboids(5, (8, 64), 11);
        assert_eq!(a, gen_random_cuboids(5, (8, 64), 11));
        for o in gen_random_cuboids(200, (8, 64), 3) {
            let (lo, hi) = o.footprint.bounds();
            for d in [&hi.x - &lo.x, &hi.y - &lo.y, o.height.clone()] {
                assert!(int(8) <= d && d <= int(64));
            }
        }
    }

    #[test]
    fn degenerate_interval() {
        for o in gen_random_cuboids(10, (8, 8), 1) {
            let (lo, hi) = o.footprint.bounds();
            assert_eq!(
                (&hi.x - &lo.x, &hi.y - &lo.y, o.height),
                (int(8), int(8), int(8))
            );
        }
    }

    #[test]
    fn pool_objects_fit_the_plate() {
        let plate = Plate::new(int(200), int(200)).unwrap();
        let objs = printer_parts_like(40, 5);
        assert_eq!(objs.len(), 40);
        for o in &objs {
            let (lo, hi) = o.footprint.bounds();
            assert!(&hi.x - &lo.x <= *plate.width() && &hi.y - &lo.y <= *plate.height());
        }
        assert_eq!(objs, printer_parts_like(40, 5));
    }

    #[test]
    fn spec_validation() {
        let ok = BenchmarkSpec::default();
        assert!(ok.validate().is_ok());
        assert!(BenchmarkSpec {
            dims: (9, 8),
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(BenchmarkSpec {
            counts: 0..=3,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(BenchmarkSpec { instances: 0, ..ok }.validate().is_err());
    }

    #[test]
    fn single_object_uses_one_plate_everywhere() {
        let spec = BenchmarkSpec {
            counts: 1..=1,
            instances: 2,
            ..BenchmarkSpec::default()
        };
        let report = run_benchmark(
            &spec,
            &PortfolioSetup::ALL,
            &EngineConfig::default(),
            0,
            false,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 4);
        for r in &report.rows {
            assert_eq!((r.solved, r.mean_plates, r.group_size), (2, Some(1.0), 4));
            assert_eq!(r.histogram, BTreeMap::from([(1, 2)]));
        }
    }
}
