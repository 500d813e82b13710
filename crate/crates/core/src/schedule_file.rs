//! JSON schedule files.
//!
//! Every rational is written twice: a decimal with 12 significant digits for
//! people and plotting tools, and an exact `p/q` string under a `_exact` key.
//! Readers prefer the exact form. Print times are replaced by their rank on
//! the plate (`order`, counting from 1).

use std::collections::HashMap;
use std::time::Duration;

use serde_json::{json, Map, Number, Value};

use crate::engine::{CegarStats, Placement, PlacementGroup, PlateAssignment, Schedule};
use crate::geometry::Point2;
use crate::rational::{format_decimal, format_exact, int, Rational};
use crate::scene::{field, invalid, number_at, object_at, Scene, SceneError};

pub const SIGNIFICANT_DIGITS: usize = 12;

fn decimal(v: &Rational) -> Value {
    let text = format_decimal(v, SIGNIFICANT_DIGITS);
    Value::Number(
        text.parse::<Number>()
            .expect("decimal text is a JSON number"),
    )
}

/// JSON document for `schedule`. `wall_time_ms` is written only when
/// `with_timing` is set, so untimed output is reproducible byte for byte.
pub fn schedule_to_json(schedule: &Schedule, with_timing: bool) -> Value {
    let plates: Vec<Value> = schedule
        .plates
        .iter()
        .map(|plate| {
            let placements: Vec<Value> = plate
                .in_print_order()
                .into_iter()
                .enumerate()
                .map(|(k, p)| {
                    json!({
                        "id": p.id,
                        "x": decimal(&p.x),
                        "y": decimal(&p.y),
                        "x_exact": format_exact(&p.x),
                        "y_exact": format_exact(&p.y),
                        "order": k + 1,
                    })
                })
                .collect();
            let groups: Vec<Value> = plate
                .groups
                .iter()
                .map(|g| {
                    json!({
                        "objects": g.entries.iter().map(|p| p.id.clone()).collect::<Vec<_>>(),
                        "sigma": decimal(&g.sigma),
                        "sigma_exact": format_exact(&g.sigma),
                        "sigma_lower_exact": format_exact(&g.sigma_lower),
                        "solver_calls": g.stats.solver_calls,
                        "refinements": g.stats.refinements,
                    })
                })
                .collect();
            json!({
                "plate_index": plate.plate_index,
                "sigma": decimal(&plate.sigma),
                "sigma_exact": format_exact(&plate.sigma),
                "anchor": [decimal(&plate.anchor.x), decimal(&plate.anchor.y)],
                "anchor_exact": [format_exact(&plate.anchor.x), format_exact(&plate.anchor.y)],
                "placements": placements,
                "groups": groups,
            })
        })
        .collect();
    let mut stats = Map::new();
    stats.insert("plates_used".into(), json!(schedule.plates.len()));
    stats.insert(
        "objects_per_plate".into(),
        json!(schedule.objects_per_plate()),
    );
    if with_timing {
        stats.insert(
            "wall_time_ms".into(),
            json!(schedule.wall_time.as_secs_f64() * 1e3),
        );
    }
    json!({
        "strategy": schedule.strategy,
        "plates": plates,
        "stats": stats,
    })
}

/// Pretty-printed schedule text with a trailing newline.
pub fn schedule_to_string(schedule: &Schedule, with_timing: bool) -> String {
    let mut s = serde_json::to_string_pretty(&schedule_to_json(schedule, with_timing))
        .expect("JSON values serialize");
    s.push('\n');
    s
}

fn exact_or_decimal(
    obj: &Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<Rational, SceneError> {
    let exact = format!("{key}_exact");
    match obj.get(&exact) {
        Some(v) => number_at(v, &format!("{path}.{exact}")),
        None => number_at(field(obj, key, path)?, &format!("{path}.{key}")),
    }
}

fn pair_at(obj: &Map<String, Value>, key: &str, path: &str) -> Result<Point2, SceneError> {
    let exact = format!("{key}_exact");
    let (k, v) = match obj.get(&exact) {
        Some(v) => (exact, v),
        None => (key.to_string(), field(obj, key, path)?),
    };
    let here = format!("{path}.{k}");
    match v.as_array().map(Vec::as_slice) {
        Some([x, y]) => Ok(Point2::new(
            number_at(x, &format!("{here}[0]"))?,
            number_at(y, &format!("{here}[1]"))?,
        )),
        _ => Err(invalid(&here, "expected [x, y]")),
    }
}

/// Rebuild a schedule from its JSON text. Object indices are resolved
/// against `scene`; ids the scene lacks keep index `usize::MAX` so the
/// verifier can report them.
pub fn parse_schedule(text: &str, scene: &Scene) -> Result<Schedule, SceneError> {
    let root: Value = serde_json::from_str(text)?;
    let root = object_at(&root, "$")?;
    let strategy = field(root, "strategy", "$")?
        .as_str()
        .ok_or_else(|| invalid("$.strategy", "expected a string"))?
        .to_string();
    let plates_json = field(root, "plates", "$")?
        .as_array()
        .ok_or_else(|| invalid("$.plates", "expected a list"))?;

    let mut plates = Vec::with_capacity(plates_json.len());
    for (pi, pv) in plates_json.iter().enumerate() {
        let path = format!("$.plates[{pi}]");
        let po = object_at(pv, &path)?;
        let plate_index = field(po, "plate_index", &path)?.as_u64().ok_or_else(|| {
            invalid(
                &format!("{path}.plate_index"),
                "expected a non-negative integer",
            )
        })? as usize;
        let sigma = exact_or_decimal(po, "sigma", &path)?;
        let anchor = pair_at(po, "anchor", &path)?;
        let list = field(po, "placements", &path)?
            .as_array()
            .ok_or_else(|| invalid(&format!("{path}.placements"), "expected a list"))?;

        let mut entries = Vec::with_capacity(list.len());
        for (k, v) in list.iter().enumerate() {
            let here = format!("{path}.placements[{k}]");
            let o = object_at(v, &here)?;
            let id = field(o, "id", &here)?
                .as_str()
                .ok_or_else(|| invalid(&format!("{here}.id"), "expected a string"))?
                .to_string();
            let order = field(o, "order", &here)?
                .as_u64()
                .ok_or_else(|| invalid(&format!("{here}.order"), "expected a positive integer"))?;
            entries.push(Placement {
                object: scene.index_of(&id).unwrap_or(usize::MAX),
                x: exact_or_decimal(o, "x", &here)?,
                y: exact_or_decimal(o, "y", &here)?,
                t: int(order as i64),
                id,
            });
        }
        let mut orders: Vec<Rational> = entries.iter().map(|p| p.t.clone()).collect();
        orders.sort();
        if orders
            .iter()
            .enumerate()
            .any(|(k, t)| *t != int(k as i64 + 1))
        {
            return Err(invalid(
                &format!("{path}.placements"),
                "order values must be 1..n without gaps",
            ));
        }

        let groups = match po.get("groups").and_then(Value::as_array) {
            Some(gs) => split_groups(gs, entries, &path)?,
            None => vec![PlacementGroup {
                entries,
                sigma: sigma.clone(),
                sigma_lower: int(0),
                stats: CegarStats::default(),
            }],
        };
        plates.push(PlateAssignment {
            plate_index,
            groups,
            sigma,
            anchor,
        });
    }
    Ok(Schedule {
        plates,
        strategy,
        wall_time: Duration::ZERO,
    })
}

fn split_groups(
    gs: &[Value],
    entries: Vec<Placement>,
    path: &str,
) -> Result<Vec<PlacementGroup>, SceneError> {
    let mut by_id: HashMap<String, Placement> = HashMap::new();
    let mut leftovers = Vec::new();
    for p in entries {
        if by_id.contains_key(&p.id) {
            leftovers.push(p);
        } else {
            by_id.insert(p.id.clone(), p);
        }
    }
    let mut groups = Vec::with_capacity(gs.len());
    for (gi, g) in gs.iter().enumerate() {
        let here = format!("{path}.groups[{gi}]");
        let o = object_at(g, &here)?;
        let ids = field(o, "objects", &here)?
            .as_array()
            .ok_or_else(|| invalid(&format!("{here}.objects"), "expected a list of ids"))?;
        let mut members = Vec::with_capacity(ids.len());
        for (k, id) in ids.iter().enumerate() {
            let id = id
                .as_str()
                .ok_or_else(|| invalid(&format!("{here}.objects[{k}]"), "expected a string"))?;
            let p = by_id.remove(id).ok_or_else(|| {
                invalid(
                    &format!("{here}.objects[{k}]"),
                    format!("`{id}` has no placement on this plate"),
                )
            })?;
            members.push(p);
        }
        let sigma_lower = match o.get("sigma_lower_exact") {
            Some(v) => number_at(v, &format!("{here}.sigma_lower_exact"))?,
            None => int(0),
        };
        groups.push(PlacementGroup {
            entries: members,
            sigma: exact_or_decimal(o, "sigma", &here)?,
            sigma_lower,
            stats: CegarStats::default(),
        });
    }
    // placements outside every group still reach the verifier
    let mut rest: Vec<Placement> = by_id.into_values().chain(leftovers).collect();
    if !rest.is_empty() {
        rest.sort_by(|a, b| a.t.cmp(&b.t));
        let sigma = groups
            .iter()
            .map(|g| g.sigma.clone())
            .max()
            .unwrap_or_else(|| int(1));
        groups.push(PlacementGroup {
            entries: rest,
            sigma,
            sigma_lower: int(0),
            stats: CegarStats::default(),
        });
    }
    Ok(groups)
}

pub fn load_schedule(
    path: impl AsRef<std::path::Path>,
    scene: &Scene,
) -> Result<Schedule, SceneError> {
    parse_schedule(&std::fs::read_to_string(path)?, scene)
}
