//! SVG drawings of plate layouts, one document per plate, 1 user unit = 1 mm.
//!
//! The y axis points up on the plate, so the drawing is wrapped in a group
//! mirrored about the plate's horizontal mid-line; labels are counter-mirrored.

use std::fmt::Write as _;

use crate::engine::{PlateAssignment, Schedule};
use crate::geometry::{scale_plate, ConvexPolygon, Point2};
use crate::rational::{format_decimal, int, Rational};
use crate::scene::Scene;
use crate::schedule_file::SIGNIFICANT_DIGITS;

fn num(v: &Rational) -> String {
    format_decimal(v, SIGNIFICANT_DIGITS)
}

fn points(poly: &ConvexPolygon, offset: &Point2) -> String {
    poly.vertices()
        .iter()
        .map(|v| {
            let p = v + offset;
            format!("{},{}", num(&p.x), num(&p.y))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn centroid(poly: &ConvexPolygon, offset: &Point2) -> Point2 {
    let n = int(poly.len() as i64);
    let (sx, sy) = poly
        .vertices()
        .iter()
        .fold((int(0), int(0)), |(sx, sy), v| (sx + &v.x, sy + &v.y));
    Point2::new(sx / &n + &offset.x, sy / &n + &offset.y)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn render_plate(plate: &PlateAssignment, scene: &Scene, comment: Option<&str>) -> String {
    let w = num(scene.plate.width());
    let h = num(scene.plate.height());
    let shapes = scene.shapes();
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}mm" height="{h}mm" viewBox="0 0 {w} {h}">"#
    );
    if let Some(c) = comment {
        let _ = writeln!(out, "<!-- {} -->", c.replace("--", "- -"));
    }
    let _ = writeln!(out, r#"<g transform="matrix(1 0 0 -1 0 {h})">"#);
    let _ = writeln!(
        out,
        r##"<rect class="plate" x="0" y="0" width="{w}" height="{h}" fill="#f4f4f4" stroke="#000" stroke-width="0.5"/>"##
    );
    if let Ok(region) = scale_plate(&scene.plate, &plate.sigma, &plate.anchor) {
        let (lo, hi) = region.bounds();
        let _ = writeln!(
            out,
            r##"<rect class="sigma-plate" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#c03" stroke-width="0.4" stroke-dasharray="2 1"/>"##,
            num(&lo.x),
            num(&lo.y),
            num(&(&hi.x - &lo.x)),
            num(&(&hi.y - &lo.y))
        );
    }
    let order = plate.in_print_order();
    for p in &order {
        let Some(shape) = shapes.get(p.object) else {
            continue;
        };
        let _ = writeln!(
            out,
            r##"<polygon class="envelope" points="{}" fill="none" stroke="#36c" stroke-width="0.3"/>"##,
            points(&shape.envelope, &p.offset())
        );
    }
    for (k, p) in order.iter().enumerate() {
        let Some(shape) = shapes.get(p.object) else {
            continue;
        };
        let off = p.offset();
        let c = centroid(&shape.hull, &off);
        let _ = writeln!(
            out,
            r##"<polygon class="hull" data-id="{}" points="{}" fill="#8c8" stroke="#060" stroke-width="0.4"/>"##,
            escape(&p.id),
            points(&shape.hull, &off)
        );
        let _ = writeln!(
            out,
            r#"<text class="order" x="{x}" y="{y}" transform="matrix(1 0 0 -1 0 {yy})" font-size="6" text-anchor="middle" dominant-baseline="central">{}</text>"#,
            k + 1,
            x = num(&c.x),
            y = num(&c.y),
            yy = num(&(&c.y * int(2))),
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}

/// One SVG per plate of `schedule`. `comment`, if given, is embedded as an
/// XML comment (for instance a time stamp).
pub fn render_svg(schedule: &Schedule, scene: &Scene, comment: Option<&str>) -> Vec<String> {
    schedule
        .plates
        .iter()
        .map(|p| render_plate(p, scene, comment))
        .collect()
}
