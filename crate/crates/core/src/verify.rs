//! Independent exact check of a schedule against the scene. No solver is
//! involved; every test is a direct geometric predicate on the placed shapes.

use std::collections::HashMap;
use std::fmt;

use num_traits::Signed;

use crate::engine::{Placement, Schedule};
use crate::geometry::{orient, polygons_overlap, scale_plate, Point2};
use crate::scene::Scene;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Earlier hull overlaps the later object's extruder envelope.
    Collision {
        plate: usize,
        earlier: String,
        later: String,
    },
    /// A hull vertex lies outside the σ-plate; `edge` indexes the violated
    /// plate edge counter-clockwise from the lowest-left corner.
    OutsidePlate {
        plate: usize,
        object: String,
        edge: usize,
    },
    /// Hulls of an earlier object at least as tall and a later one overlap.
    Traversability {
        plate: usize,
        earlier: String,
        later: String,
    },
    SameTime {
        plate: usize,
        first: String,
        second: String,
    },
    InvalidSigma {
        plate: usize,
    },
    Missing {
        object: String,
    },
    Duplicate {
        object: String,
    },
    Unknown {
        object: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Collision {
                plate,
                earlier,
                later,
            } => {
                write!(f, "plate {plate}: `{earlier}` collides with the extruder envelope of later `{later}`")
            }
            Violation::OutsidePlate {
                plate,
                object,
                edge,
            } => {
                write!(
                    f,
                    "plate {plate}: `{object}` crosses edge {edge} of the scaled plate"
                )
            }
            Violation::Traversability {
                plate,
                earlier,
                later,
            } => {
                write!(
                    f,
                    "plate {plate}: extruder cannot pass over `{earlier}` while printing `{later}`"
                )
            }
            Violation::SameTime {
                plate,
                first,
                second,
            } => {
                write!(
                    f,
                    "plate {plate}: `{first}` and `{second}` share a print time"
                )
            }
            Violation::InvalidSigma { plate } => write!(f, "plate {plate}: sigma outside (0, 1]"),
            Violation::Missing { object } => write!(f, "`{object}` is not scheduled"),
            Violation::Duplicate { object } => write!(f, "`{object}` is scheduled more than once"),
            Violation::Unknown { object } => write!(f, "`{object}` is not in the scene"),
        }
    }
}

/// All violations of `schedule`; empty iff the schedule is clean.
pub fn verify_schedule(schedule: &Schedule, scene: &Scene) -> Vec<Violation> {
    let mut out = Vec::new();
    let index: HashMap<&str, usize> = scene
        .objects
        .iter()
        .enumerate()
        .map(|(i, o)| (o.id.as_str(), i))
        .collect();
    let shapes = scene.shapes();

    let mut count: HashMap<&str, usize> = HashMap::new();
    for plate in &schedule.plates {
        for p in plate.groups.iter().flat_map(|g| &g.entries) {
            *count.entry(p.id.as_str()).or_default() += 1;
        }
    }
    for o in &scene.objects {
        match count.get(o.id.as_str()).copied().unwrap_or(0) {
            0 => out.push(Violation::Missing {
                object: o.id.clone(),
            }),
            1 => {}
            _ => out.push(Violation::Duplicate {
                object: o.id.clone(),
            }),
        }
    }
    let mut unknown: Vec<&str> = count
        .keys()
        .filter(|id| !index.contains_key(*id))
        .copied()
        .collect();
    unknown.sort();
    out.extend(unknown.into_iter().map(|id| Violation::Unknown {
        object: id.to_string(),
    }));

    for (k, plate) in schedule.plates.iter().enumerate() {
        let region = match scale_plate(&scene.plate, &plate.sigma, &plate.anchor) {
            Ok(r) => r,
            _ => {
                out.push(Violation::InvalidSigma { plate: k });
                continue;
            }
        };
        let order: Vec<&Placement> = plate
            .in_print_order()
            .into_iter()
            .filter(|p| index.contains_key(p.id.as_str()))
            .collect();

        for p in &order {
            let hull = &shapes[index[p.id.as_str()]].hull;
            let off = p.offset();
            let bad_edge = region.edges().position(|(e1, e2)| {
                hull.vertices()
                    .iter()
                    .any(|v| orient(e1, e2, &(v + &off)).is_negative())
            });
            if let Some(edge) = bad_edge {
                out.push(Violation::OutsidePlate {
                    plate: k,
                    object: p.id.clone(),
                    edge,
                });
            }
        }

        for (a, pa) in order.iter().enumerate() {
            for pb in &order[a + 1..] {
                if pa.t == pb.t {
                    out.push(Violation::SameTime {
                        plate: k,
                        first: pa.id.clone(),
                        second: pb.id.clone(),
                    });
                    continue;
                }
                let ia = index[pa.id.as_str()];
                let ib = index[pb.id.as_str()];
                let (oa, ob): (Point2, Point2) = (pa.offset(), pb.offset());
                if polygons_overlap(&shapes[ia].hull, &oa, &shapes[ib].envelope, &ob) {
                    out.push(Violation::Collision {
                        plate: k,
                        earlier: pa.id.clone(),
                        later: pb.id.clone(),
                    });
                }
                if scene.objects[ia].height >= scene.objects[ib].height
                    && polygons_overlap(&shapes[ia].hull, &oa, &shapes[ib].hull, &ob)
                {
                    out.push(Violation::Traversability {
                        plate: k,
                        earlier: pa.id.clone(),
                        later: pb.id.clone(),
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{CegarStats, PlacementGroup, PlateAssignment};
    use crate::geometry::{ExtruderProfile, Plate, PrintObject};
    use crate::rational::{int, Rational};
    use std::time::Duration;

    fn scene() -> Scene {
        Scene::new(
            Plate::new(int(200), int(200)).unwrap(),
            ExtruderProfile::square(int(4)).unwrap(),
            vec![
                PrintObject::cuboid("a", int(10), int(10), int(10)).unwrap(),
                PrintObject::cuboid("b", int(10), int(10), int(10)).unwrap(),
            ],
        )
    }

    fn place(id: &str, object: usize, x: i64, y: i64, t: i64) -> Placement {
        Placement {
            object,
            id: id.into(),
            x: int(x),
            y: int(y),
            t: int(t),
        }
    }

    fn schedule(entries: Vec<Placement>, sigma: Rational) -> Schedule {
        Schedule {
            plates: vec![PlateAssignment {
                plate_index: 0,
                groups: vec![PlacementGroup {
                    entries,
                    sigma: sigma.clone(),
                    sigma_lower: int(0),
                    stats: CegarStats::default(),
                }],
                sigma,
                anchor: Point2::from_ints(100, 100),
            }],
            strategy: "Center/HeightInput".into(),
            wall_time: Duration::ZERO,
        }
    }

    #[test]
    fn clean_schedule() {
        let s = schedule(
            vec![place("a", 0, 10, 10, 0), place("b", 1, 50, 10, 2)],
            int(1),
        );
        assert_eq!(verify_schedule(&s, &scene()), vec![]);
    }

    #[test]
    fn coincident_objects() {
        let s = schedule(
            vec![place("a", 0, 10, 10, 0), place("b", 1, 10, 10, 2)],
            int(1),
        );
        let v = verify_schedule(&s, &scene());
        assert!(v.contains(&Violation::Collision {
            plate: 0,
            earlier: "a".into(),
            later: "b".into()
        }));
        assert!(v.contains(&Violation::Traversability {
            plate: 0,
            earlier: "a".into(),
            later: "b".into()
        }));
    }

    #[test]
    fn protruding_corner() {
        // right edge of [0,200]² is edge 1 counter-clockwise from (0,0)
        let s = schedule(
            vec![place("a", 0, 195, 10, 0), place("b", 1, 50, 10, 2)],
            int(1),
        );
        assert_eq!(
            verify_schedule(&s, &scene()),
            vec![Violation::OutsidePlate {
                plate: 0,
                object: "a".into(),
                edge: 1
            }]
        );
    }

    #[test]
    fn coverage() {
        let s = schedule(
            vec![
                place("a", 0, 10, 10, 0),
                place("a", 0, 50, 10, 2),
                place("zz", 0, 90, 90, 4),
            ],
            int(1),
        );
        let v = verify_schedule(&s, &scene());
        assert!(v.contains(&Violation::Duplicate { object: "a".into() }));
        assert!(v.contains(&Violation::Missing { object: "b".into() }));
        assert!(v.contains(&Violation::Unknown {
            object: "zz".into()
        }));
    }
}
