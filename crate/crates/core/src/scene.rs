//! Scene files: plate, extruder and objects as JSON with exact decimals.
//!
//! ```json
//! {
//!   "plate": {"width": 200, "height": 200},
//!   "extruder": {"footprint": [[-10, -10], [10, -10], [10, 10], [-10, 10]]},
//!   "objects": [
//!     {"id": "a", "cuboid": {"length": 10, "width": 10, "height": 10}},
//!     {"id": "b", "height": "2.5", "footprint": [[0, 0], [4, 0], [0, 3]]}
//!   ]
//! }
//! ```
//!
//! Numbers may be JSON numbers or strings (`"0.1"`, `"1/3"`); both are read
//! exactly. A missing extruder means a 20 mm square centered on the nozzle;
//! the footprint `[[0, 0]]` means a bare nozzle.

use std::collections::HashSet;
use std::path::Path;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::geometry::{
    convex_hull, envelope_hull, ConvexPolygon, ExtruderProfile, Plate, Point2, PrintObject,
};
use crate::model::Shape;
use crate::rational::{format_exact, int, parse_rational, Rational};

#[derive(Debug, Clone)]
pub struct Scene {
    pub plate: Plate,
    pub extruder: ExtruderProfile,
    pub objects: Vec<PrintObject>,
}

impl Scene {
    pub fn new(plate: Plate, extruder: ExtruderProfile, objects: Vec<PrintObject>) -> Self {
        Scene {
            plate,
            extruder,
            objects,
        }
    }

    /// Hull and envelope of every object, in input order.
    pub fn shapes(&self) -> Vec<Shape> {
        self.objects
            .iter()
            .map(|o| Shape {
                hull: o.footprint.clone(),
                envelope: envelope_hull(o, &self.extruder),
            })
            .collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }
}

pub fn default_extruder() -> ExtruderProfile {
    ExtruderProfile::square(int(20)).expect("20 mm square extruder")
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("cannot read file")]
    Io(#[from] std::io::Error),
    #[error("not valid JSON")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(path: &str, message: impl Into<String>) -> SceneError {
    SceneError::Invalid {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Exact value of a JSON number or numeric string.
pub fn number_at(v: &Value, path: &str) -> Result<Rational, SceneError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        _ => return Err(invalid(path, "expected a number")),
    };
    parse_rational(&text).map_err(|e| invalid(path, e.to_string()))
}

pub(crate) fn field<'a>(
    obj: &'a Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<&'a Value, SceneError> {
    obj.get(key)
        .ok_or_else(|| invalid(path, format!("missing field `{key}`")))
}

pub(crate) fn object_at<'a>(
    v: &'a Value,
    path: &str,
) -> Result<&'a Map<String, Value>, SceneError> {
    v.as_object()
        .ok_or_else(|| invalid(path, "expected an object"))
}

fn positive(v: &Value, path: &str) -> Result<Rational, SceneError> {
    let r = number_at(v, path)?;
    if r <= int(0) {
        return Err(invalid(path, "must be positive"));
    }
    Ok(r)
}

fn points_at(v: &Value, path: &str) -> Result<Vec<Point2>, SceneError> {
    let arr = v
        .as_array()
        .ok_or_else(|| invalid(path, "expected a list of [x, y] points"))?;
    arr.iter()
        .enumerate()
        .map(|(k, p)| {
            let here = format!("{path}[{k}]");
            match p.as_array().map(Vec::as_slice) {
                Some([x, y]) => Ok(Point2::new(
                    number_at(x, &format!("{here}[0]"))?,
                    number_at(y, &format!("{here}[1]"))?,
                )),
                _ => Err(invalid(&here, "expected [x, y]")),
            }
        })
        .collect()
}

fn hull_at(v: &Value, path: &str) -> Result<ConvexPolygon, SceneError> {
    let pts = points_at(v, path)?;
    convex_hull(&pts).map_err(|e| invalid(path, e.to_string()))
}

pub fn parse_scene(text: &str) -> Result<Scene, SceneError> {
    let root: Value = serde_json::from_str(text)?;
    let root = object_at(&root, "$")?;

    let plate_v = object_at(field(root, "plate", "$")?, "plate")?;
    let plate = Plate::new(
        positive(field(plate_v, "width", "plate")?, "plate.width")?,
        positive(field(plate_v, "height", "plate")?, "plate.height")?,
    )
    .map_err(|e| invalid("plate", e.to_string()))?;

    let extruder = match root.get("extruder") {
        None | Some(Value::Null) => default_extruder(),
        Some(e) => {
            let e = object_at(e, "extruder")?;
            let fp = field(e, "footprint", "extruder")?;
            let pts = points_at(fp, "extruder.footprint")?;
            if !pts.is_empty() && pts.iter().all(|p| *p == Point2::origin()) {
                ExtruderProfile::Point
            } else {
                let hull =
                    convex_hull(&pts).map_err(|e| invalid("extruder.footprint", e.to_string()))?;
                ExtruderProfile::new(hull)
                    .map_err(|e| invalid("extruder.footprint", e.to_string()))?
            }
        }
    };

    let list = field(root, "objects", "$")?
        .as_array()
        .ok_or_else(|| invalid("objects", "expected a list"))?;
    if list.is_empty() {
        return Err(invalid("objects", "at least one object is required"));
    }
    let mut seen = HashSet::new();
    let mut objects = Vec::with_capacity(list.len());
    for (k, o) in list.iter().enumerate() {
        let path = format!("objects[{k}]");
        let o = object_at(o, &path)?;
        let id = field(o, "id", &path)?
            .as_str()
            .ok_or_else(|| invalid(&format!("{path}.id"), "expected a string"))?
            .to_string();
        if !seen.insert(id.clone()) {
            return Err(invalid(
                &format!("{path}.id"),
                format!("duplicate id `{id}`"),
            ));
        }
        let obj = if let Some(c) = o.get("cuboid") {
            let cp = format!("{path}.cuboid");
            let c = object_at(c, &cp)?;
            PrintObject::cuboid(
                id,
                positive(field(c, "length", &cp)?, &format!("{cp}.length"))?,
                positive(field(c, "width", &cp)?, &format!("{cp}.width"))?,
                positive(field(c, "height", &cp)?, &format!("{cp}.height"))?,
            )
        } else {
            let fp = hull_at(field(o, "footprint", &path)?, &format!("{path}.footprint"))?;
            let h = positive(field(o, "height", &path)?, &format!("{path}.height"))?;
            PrintObject::new(id, fp, h)
        };
        objects.push(obj.map_err(|e| invalid(&path, e.to_string()))?);
    }
    Ok(Scene::new(plate, extruder, objects))
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene, SceneError> {
    let text = std::fs::read_to_string(path)?;
    parse_scene(&text)
}

fn point_json(p: &Point2) -> Value {
    json!([format_exact(&p.x), format_exact(&p.y)])
}

/// JSON form of a scene with exact string coordinates; [`parse_scene`]
/// reads it back unchanged.
pub fn scene_to_json(scene: &Scene) -> Value {
    let extruder = match &scene.extruder {
        ExtruderProfile::Point => json!({"footprint": [["0", "0"]]}),
        ExtruderProfile::Hull(h) => {
            json!({"footprint": h.vertices().iter().map(point_json).collect::<Vec<_>>()})
        }
    };
    let objects: Vec<Value> = scene
        .objects
        .iter()
        .map(|o| {
            json!({
                "id": o.id,
                "height": format_exact(&o.height),
                "footprint": o.footprint.vertices().iter().map(point_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "plate": {"width": format_exact(scene.plate.width()), "height": format_exact(scene.plate.height())},
        "extruder": extruder,
        "objects": objects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    const MINIMAL: &str = r#"{
        "plate": {"width": 200, "height": 200},
        "extruder": {"footprint": [[-10,-10],[10,-10],[10,10],[-10,10]]},
        "objects": [{"id": "c", "cuboid": {"length": 10, "width": 10, "height": 10}}]
    }"#;

    #[test]
    fn minimal_scene() {
        let s = parse_scene(MINIMAL).unwrap();
        assert_eq!(s.plate.width(), &int(200));
        assert_eq!(s.objects.len(), 1);
        let r = ConvexPolygon::rectangle(int(0), int(0), int(10), int(10)).unwrap();
        assert_eq!(s.objects[0].footprint, r);
        assert_eq!(s.objects[0].height, int(10));
    }

    #[test]
    fn duplicate_id_is_named() {
        let text = r#"{"plate": {"width": 200, "height": 200},
            "objects": [{"id": "dup", "cuboid": {"length": 1, "width": 1, "height": 1}},
                        {"id": "dup", "cuboid": {"length": 1, "width": 1, "height": 1}}]}"#;
        let err = parse_scene(text).unwrap_err().to_string();
        assert!(err.contains("dup"), "{err}");
        assert!(err.contains("objects[1].id"), "{err}");
    }

    #[test]
    fn decimals_are_exact() {
        let text = r#"{"plate": {"width": 200, "height": 200},
            "extruder": {"footprint": [[0, 0]]},
            "objects": [{"id": "t", "height": 0.1, "footprint": [[0.1, 0], [1, "0.1"], [0, 1]]}]}"#;
        let s = parse_scene(text).unwrap();
        assert_eq!(s.objects[0].height, ratio(1, 10));
        assert!(s.objects[0]
            .footprint
            .vertices()
            .contains(&Point2::new(ratio(1, 10), int(0))));
        assert_eq!(s.extruder, ExtruderProfile::Point);
    }

    #[test]
    fn default_extruder_when_missing() {
        let text = r#"{"plate": {"width": 50, "height": 50},
            "objects": [{"id": "a", "cuboid": {"length": 1, "width": 1, "height": 1}}]}"#;
        assert_eq!(parse_scene(text).unwrap().extruder, default_extruder());
    }

    #[test]
    fn bad_inputs() {
        let cases = [
            (
                r#"{"plate": {"width": 0, "height": 5}, "objects": [{"id":"a","cuboid":{"length":1,"width":1,"height":1}}]}"#,
                "plate.width",
            ),
            (
                r#"{"plate": {"width": 5, "height": 5}, "objects": [{"id":"a","cuboid":{"length":1,"width":1,"height":-1}}]}"#,
                "objects[0].cuboid.height",
            ),
            (
                r#"{"plate": {"width": 5, "height": 5}, "objects": [{"id":"a","height":1,"footprint":[[0,0],[1,1]]}]}"#,
                "objects[0].footprint",
            ),
            (
                r#"{"plate": {"width": 5, "height": 5}, "objects": [{"id":"a","height":1,"footprint":[[0,0],[1,1],[2,2]]}]}"#,
                "objects[0].footprint",
            ),
            (
                r#"{"plate": {"width": 5, "height": 5}, "extruder": {"footprint": [[1,1],[2,1],[2,2]]}, "objects": [{"id":"a","cuboid":{"length":1,"width":1,"height":1}}]}"#,
                "extruder.footprint",
            ),
        ];
        for (text, path) in cases {
            let err = parse_scene(text).unwrap_err().to_string();
            assert!(err.starts_with(path), "{err} should name {path}");
        }
    }

    #[test]
    fn json_round_trip() {
        let s = parse_scene(MINIMAL).unwrap();
        let back = parse_scene(&scene_to_json(&s).to_string()).unwrap();
        assert_eq!(back.objects, s.objects);
        assert_eq!(back.extruder, s.extruder);
        assert_eq!(back.plate, s.plate);
    }
}
