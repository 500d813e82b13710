//! Composite strategies (tactic × ordering), portfolio setups, parallel
//! execution and best-schedule selection.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{solve_cegar_seq, EngineConfig, EngineError, Schedule};
use crate::geometry::{Plate, Point2, PrintObject};
use crate::rational::int;
use crate::scene::Scene;

/// Anchor rule for shrinking the plate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tactic {
    Center,
    MinXMinY,
    MaxXMinY,
    MinXMaxY,
    MaxXMaxY,
}

impl Tactic {
    pub const ALL: [Tactic; 5] = [
        Tactic::Center,
        Tactic::MinXMinY,
        Tactic::MaxXMinY,
        Tactic::MinXMaxY,
        Tactic::MaxXMaxY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tactic::Center => "Center",
            Tactic::MinXMinY => "MinXMinY",
            Tactic::MaxXMinY => "MaxXMinY",
            Tactic::MinXMaxY => "MinXMaxY",
            Tactic::MaxXMaxY => "MaxXMaxY",
        }
    }
}

/// The fixed point of the σ-scaling for `tactic`.
pub fn tactic_anchor(tactic: Tactic, plate: &Plate) -> Point2 {
    let w = plate.width().clone();
    let h = plate.height().clone();
    let zero = int(0);
    match tactic {
        Tactic::Center => plate.center(),
        Tactic::MinXMinY => Point2::new(zero.clone(), zero),
        Tactic::MaxXMinY => Point2::new(w, zero),
        Tactic::MinXMaxY => Point2::new(zero, h),
        Tactic::MaxXMaxY => Point2::new(w, h),
    }
}

/// Order in which objects are attempted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ordering {
    HeightMinToMax,
    HeightMaxToMin,
    HeightRandom(u64),
    HeightInput,
}

impl Ordering {
    pub fn name(self) -> &'static str {
        match self {
            Ordering::HeightMinToMax => "HeightMinToMax",
            Ordering::HeightMaxToMin => "HeightMaxToMin",
            Ordering::HeightRandom(_) => "HeightRandom",
            Ordering::HeightInput => "HeightInput",
        }
    }

    /// Position of the variant in the canonical list (seed excluded).
    fn rank(self) -> usize {
        match self {
            Ordering::HeightMinToMax => 0,
            Ordering::HeightMaxToMin => 1,
            Ordering::HeightRandom(_) => 2,
            Ordering::HeightInput => 3,
        }
    }
}

/// Indices into `objects` in the order prescribed by `ordering`. Height
/// sorts are stable, so ties keep input order.
pub fn apply_ordering(ordering: Ordering, objects: &[PrintObject]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..objects.len()).collect();
    match ordering {
        Ordering::HeightInput => {}
        Ordering::HeightMinToMax => idx.sort_by(|&a, &b| objects[a].height.cmp(&objects[b].height)),
        Ordering::HeightMaxToMin => idx.sort_by(|&a, &b| objects[b].height.cmp(&objects[a].height)),
        Ordering::HeightRandom(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            idx.shuffle(&mut rng);
        }
    }
    idx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CompositeStrategy {
    pub tactic: Tactic,
    pub ordering: Ordering,
}

impl CompositeStrategy {
    pub fn new(tactic: Tactic, ordering: Ordering) -> Self {
        CompositeStrategy { tactic, ordering }
    }

    pub fn name(&self) -> String {
        format!("{}/{}", self.tactic.name(), self.ordering.name())
    }

    /// Index in the full 5 × 4 product, tactic-major.
    pub fn canonical_index(&self) -> usize {
        let t = Tactic::ALL.iter().position(|t| *t == self.tactic).unwrap();
        t * 4 + self.ordering.rank()
    }
}

impl fmt::Display for CompositeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PortfolioSetup {
    Center,
    Ordering,
    Tactic,
    Combined,
}

impl PortfolioSetup {
    pub const ALL: [PortfolioSetup; 4] = [
        PortfolioSetup::Center,
        PortfolioSetup::Ordering,
        PortfolioSetup::Tactic,
        PortfolioSetup::Combined,
    ];

    pub fn parse(text: &str) -> Option<Self> {
        match text.to_ascii_lowercase().as_str() {
            "center" => Some(PortfolioSetup::Center),
            "ordering" => Some(PortfolioSetup::Ordering),
            "tactic" => Some(PortfolioSetup::Tactic),
            "combined" => Some(PortfolioSetup::Combined),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PortfolioSetup::Center => "center",
            PortfolioSetup::Ordering => "ordering",
            PortfolioSetup::Tactic => "tactic",
            PortfolioSetup::Combined => "combined",
        }
    }

    /// Strategies of the setup. `seed` feeds every `HeightRandom`, mixed
    /// with the strategy's canonical index so equal strategies get equal
    /// seeds in every setup.
    pub fn strategies(self, seed: u64) -> Vec<CompositeStrategy> {
        let orderings = [
            Ordering::HeightMinToMax,
            Ordering::HeightMaxToMin,
            Ordering::HeightRandom(0),
            Ordering::HeightInput,
        ];
        let tactics: &[Tactic] = match self {
            PortfolioSetup::Center | PortfolioSetup::Ordering => &[Tactic::Center],
            PortfolioSetup::Tactic | PortfolioSetup::Combined => &Tactic::ALL,
        };
        let orderings: &[Ordering] = match self {
            PortfolioSetup::Center | PortfolioSetup::Tactic => &[Ordering::HeightInput],
            PortfolioSetup::Ordering | PortfolioSetup::Combined => &orderings,
        };
        let mut out = Vec::new();
        for &t in tactics {
            for &o in orderings {
                let mut s = CompositeStrategy::new(t, o);
                if let Ordering::HeightRandom(_) = o {
                    s.ordering = Ordering::HeightRandom(mix_seed(seed, s.canonical_index() as u64));
                }
                out.push(s);
            }
        }
        out
    }
}

/// SplitMix64 finalizer over the pair.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Lexicographic minimum of (plates, σ-sum, strategy name).
pub fn select_best(answers: &[Schedule]) -> Option<&Schedule> {
    answers.iter().min_by(|a, b| {
        a.plates
            .len()
            .cmp(&b.plates.len())
            .then_with(|| a.sigma_sum().cmp(&b.sigma_sum()))
            .then_with(|| a.strategy.cmp(&b.strategy))
    })
}

#[derive(Debug)]
pub struct StrategyOutcome {
    pub strategy: CompositeStrategy,
    pub result: Result<Schedule, EngineError>,
}

#[derive(Debug)]
pub struct PortfolioOutcome {
    pub best: Schedule,
    pub all: Vec<StrategyOutcome>,
}

#[derive(Debug, Error)]
pub enum PortfolioError {
    #[error("no strategy produced a schedule")]
    AllStrategiesFailed(Vec<StrategyOutcome>),
}

impl PortfolioError {
    pub fn outcomes(&self) -> &[StrategyOutcome] {
        match self {
            PortfolioError::AllStrategiesFailed(all) => all,
        }
    }

    pub fn into_outcomes(self) -> Vec<StrategyOutcome> {
        match self {
            PortfolioError::AllStrategiesFailed(all) => all,
        }
    }
}

const WORKER_STACK: usize = 256 << 20;

/// Run every strategy of `setup` on its own worker and select the best
/// schedule. `threads = 0` uses the available hardware parallelism.
pub fn run_portfolio(
    scene: &Scene,
    setup: PortfolioSetup,
    config: &EngineConfig,
    seed: u64,
    threads: usize,
) -> Result<PortfolioOutcome, PortfolioError> {
    run_strategies(scene, &setup.strategies(seed), config, threads)
}

pub fn run_strategies(
    scene: &Scene,
    strategies: &[CompositeStrategy],
    config: &EngineConfig,
    threads: usize,
) -> Result<PortfolioOutcome, PortfolioError> {
    let hw = std::thread::available_parallelism().map_or(1, |n| n.get());
    let workers = if threads == 0 { hw } else { threads }
        .min(strategies.len())
        .max(1);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<Schedule, EngineError>>>> =
        Mutex::new((0..strategies.len()).map(|_| None).collect());

    std::thread::scope(|s| {
        for w in 0..workers {
            let next = &next;
            let slots = &slots;
            std::thread::Builder::new()
                .name(format!("strategy-{w}"))
                .stack_size(WORKER_STACK)
                .spawn_scoped(s, move || loop {
                    let i = next.fetch_add(1, AtomicOrdering::Relaxed);
                    if i >= strategies.len() {
                        break;
                    }
                    let r = solve_cegar_seq(scene, &strategies[i], config);
                    slots.lock().unwrap()[i] = Some(r);
                })
                .expect("spawn strategy worker");
        }
    });

    let all: Vec<StrategyOutcome> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .zip(strategies)
        .map(|(r, s)| StrategyOutcome {
            strategy: *s,
            result: r.expect("every strategy slot is filled"),
        })
        .collect();
    let ok: Vec<Schedule> = all
        .iter()
        .filter_map(|o| o.result.as_ref().ok().cloned())
        .collect();
    match select_best(&ok) {
        Some(best) => Ok(PortfolioOutcome {
            best: best.clone(),
            all,
        }),
        None => Err(PortfolioError::AllStrategiesFailed(all)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn objs(heights: &[i64]) -> Vec<PrintObject> {
        heights
            .iter()
            .enumerate()
            .map(|(i, h)| PrintObject::cuboid(format!("o{i}"), int(10), int(10), int(*h)).unwrap())
            .collect()
    }

    #[test]
    fn height_orderings() {
        let o = objs(&[30, 10, 20]);
        assert_eq!(apply_ordering(Ordering::HeightMinToMax, &o), vec![1, 2, 0]);
        assert_eq!(apply_ordering(Ordering::HeightMaxToMin, &o), vec![0, 2, 1]);
        assert_eq!(apply_ordering(Ordering::HeightInput, &o), vec![0, 1, 2]);
        let t = objs(&[5, 5, 1, 5]);
        assert_eq!(
            apply_ordering(Ordering::HeightMaxToMin, &t),
            vec![0, 1, 3, 2]
        );
    }

    #[test]
    fn random_ordering_is_seeded() {
        let o = objs(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
        let a = apply_ordering(Ordering::HeightRandom(7), &o);
        assert_eq!(a, apply_ordering(Ordering::HeightRandom(7), &o));
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn anchors() {
        let p = Plate::new(int(200), int(200)).unwrap();
        assert_eq!(
            tactic_anchor(Tactic::Center, &p),
            Point2::from_ints(100, 100)
        );
        assert_eq!(
            tactic_anchor(Tactic::MaxXMinY, &p),
            Point2::from_ints(200, 0)
        );
        assert_eq!(tactic_anchor(Tactic::MinXMinY, &p), Point2::from_ints(0, 0));
        assert_eq!(
            tactic_anchor(Tactic::MinXMaxY, &p),
            Point2::from_ints(0, 200)
        );
        assert_eq!(
            tactic_anchor(Tactic::MaxXMaxY, &p),
            Point2::from_ints(200, 200)
        );
    }

    #[test]
    fn setup_sizes_and_containment() {
        let sizes: Vec<usize> = PortfolioSetup::ALL
            .iter()
            .map(|s| s.strategies(3).len())
            .collect();
        assert_eq!(sizes, vec![1, 4, 5, 20]);
        let combined = PortfolioSetup::Combined.strategies(3);
        for setup in PortfolioSetup::ALL {
            for s in setup.strategies(3) {
                assert!(combined.contains(&s), "{s} missing from combined");
            }
        }
        assert_eq!(
            PortfolioSetup::Center.strategies(0)[0].name(),
            "Center/HeightInput"
        );
        let names: std::collections::HashSet<String> = combined.iter().map(|s| s.name()).collect();
        assert_eq!(names.len(), 20);
    }
}
