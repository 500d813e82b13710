//! Exact planar geometry: convex hulls, Minkowski sums, plate scaling and
//! the intersection predicates used by refinement and verification.
//!
//! Every predicate reduces to the sign of an exact rational cross product,
//! so no result depends on a tolerance.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("shrink factor must lie in (0, 1], got {0}")]
    InvalidSigma(String),
    #[error("extruder footprint must contain the nozzle point (0,0)")]
    NozzleOutsideExtruder,
    #[error("plate dimensions must be positive")]
    InvalidPlate,
}

/// A point (or displacement) in the plate plane, millimeters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point2 {
    pub x: Rational,
    pub y: Rational,
}

impl Point2 {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point2 { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Point2::new(int(x), int(y))
    }

    pub fn origin() -> Self {
        Point2::new(Rational::zero(), Rational::zero())
    }

    pub fn scale(&self, k: &Rational) -> Point2 {
        Point2::new(&self.x * k, &self.y * k)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for &Point2 {
    type Output = Point2;
    fn add(self, rhs: &Point2) -> Point2 {
        Point2::new(&self.x + &rhs.x, &self.y + &rhs.y)
    }
}

impl Sub for &Point2 {
    type Output = Point2;
    fn sub(self, rhs: &Point2) -> Point2 {
        Point2::new(&self.x - &rhs.x, &self.y - &rhs.y)
    }
}

/// `u.x * v.y - u.y * v.x`
pub fn cross(u: &Point2, v: &Point2) -> Rational {
    &u.x * &v.y - &u.y * &v.x
}

/// Twice the signed area of triangle `(a, b, c)`; positive when counter-clockwise.
pub fn orient(a: &Point2, b: &Point2, c: &Point2) -> Rational {
    cross(&(b - a), &(c - a))
}

/// Order of direction vectors by polar angle in `[0, 2π)`.
fn angle_cmp(u: &Point2, v: &Point2) -> Ordering {
    let half = |w: &Point2| !(w.y.is_positive() || (w.y.is_zero() && w.x.is_positive()));
    half(u)
        .cmp(&half(v))
        .then_with(|| Rational::zero().cmp(&cross(u, v)))
}

fn orient_sign(a: &Point2, b: &Point2, c: &Point2) -> Ordering {
    orient(a, b, c).cmp(&Rational::zero())
}

/// Strictly convex, counter-clockwise polygon whose first vertex is the
/// lexicographically smallest one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    /// Validate and canonicalize a vertex cycle. The cycle must already be
    /// counter-clockwise and strictly convex.
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::InvalidPolygon(format!(
                "need at least 3 vertices, got {n}"
            )));
        }
        for i in 0..n {
            for j in i + 1..n {
                if vertices[i] == vertices[j] {
                    return Err(GeometryError::InvalidPolygon(format!(
                        "duplicate vertex {}",
                        vertices[i]
                    )));
                }
            }
        }
        for i in 0..n {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % n];
            let c = &vertices[(i + 2) % n];
            if orient_sign(a, b, c) != Ordering::Greater {
                return Err(GeometryError::InvalidPolygon(format!(
                    "turn at {b} is not strictly counter-clockwise"
                )));
            }
        }
        // a polygon can turn left at every vertex and still wind twice
        let mut area2 = Rational::zero();
        for i in 0..n {
            area2 += cross(&vertices[i], &vertices[(i + 1) % n]);
        }
        let edges: Vec<Point2> = (0..n)
            .map(|i| &vertices[(i + 1) % n] - &vertices[i])
            .collect();
        let wraps = (0..n)
            .filter(|&i| angle_cmp(&edges[(i + 1) % n], &edges[i]) == Ordering::Less)
            .count();
        if !area2.is_positive() || wraps != 1 {
            return Err(GeometryError::InvalidPolygon(
                "vertex cycle winds more than once".into(),
            ));
        }
        Ok(Self::canonical(vertices))
    }

    fn canonical(mut vertices: Vec<Point2>) -> Self {
        let start = vertices
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        vertices.rotate_left(start);
        ConvexPolygon { vertices }
    }

    /// Axis-aligned rectangle `[x0, x0+w] × [y0, y0+h]`.
    pub fn rectangle(
        x0: Rational,
        y0: Rational,
        w: Rational,
        h: Rational,
    ) -> Result<Self, GeometryError> {
        if !w.is_positive() || !h.is_positive() {
            return Err(GeometryError::DegenerateInput(
                "rectangle with non-positive side".into(),
            ));
        }
        let x1 = &x0 + &w;
        let y1 = &y0 + &h;
        Ok(ConvexPolygon::canonical(vec![
            Point2::new(x0.clone(), y0.clone()),
            Point2::new(x1.clone(), y0),
            Point2::new(x1, y1.clone()),
            Point2::new(x0, y1),
        ]))
    }

    /// Rectangle of the given size centered on the origin.
    pub fn centered_rectangle(w: Rational, h: Rational) -> Result<Self, GeometryError> {
        let half = Rational::new(1.into(), 2.into());
        Self::rectangle(-(&w * &half), -(&h * &half), w, h)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Counter-clockwise edges `(v_i, v_{i+1})`, wrapping around.
    pub fn edges(&self) -> impl Iterator<Item = (&Point2, &Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    pub fn translate(&self, d: &Point2) -> ConvexPolygon {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|v| v + d).collect(),
        }
    }

    /// Point reflection through the origin, `{−p}`.
    pub fn reflect(&self) -> ConvexPolygon {
        let zero = Point2::origin();
        ConvexPolygon::canonical(self.vertices.iter().map(|v| &zero - v).collect())
    }

    /// Twice the enclosed area.
    pub fn area2(&self) -> Rational {
        self.edges().map(|(a, b)| cross(a, b)).sum()
    }

    /// Closed containment: boundary points count as inside.
    pub fn contains_point(&self, p: &Point2) -> bool {
        self.edges()
            .all(|(a, b)| orient_sign(a, b, p) != Ordering::Less)
    }

    /// Every vertex of `other` inside or on the boundary of `self`.
    pub fn contains_polygon(&self, other: &ConvexPolygon) -> bool {
        other.vertices.iter().all(|v| self.contains_point(v))
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point2, Point2) {
        let mut lo = self.vertices[0].clone();
        let mut hi = self.vertices[0].clone();
        for v in &self.vertices[1..] {
            if v.x < lo.x {
                lo.x = v.x.clone();
            }
            if v.y < lo.y {
                lo.y = v.y.clone();
            }
            if v.x > hi.x {
                hi.x = v.x.clone();
            }
            if v.y > hi.y {
                hi.y = v.y.clone();
            }
        }
        (lo, hi)
    }
}

/// Convex hull by Andrew's monotone chain; collinear boundary points are dropped.
pub fn convex_hull(points: &[Point2]) -> Result<ConvexPolygon, GeometryError> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return Err(GeometryError::DegenerateInput(format!(
            "{} distinct points",
            pts.len()
        )));
    }
    let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
    for p in &pts {
        while lower.len() >= 2
            && orient_sign(&lower[lower.len() - 2], &lower[lower.len() - 1], p) != Ordering::Greater
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && orient_sign(&upper[upper.len() - 2], &upper[upper.len() - 1], p) != Ordering::Greater
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(GeometryError::DegenerateInput(
            "all points collinear".into(),
        ));
    }
    Ok(ConvexPolygon::canonical(lower))
}

/// Exact Minkowski sum of two convex polygons by merging their edge
/// sequences in angular order.
pub fn minkowski_sum(a: &ConvexPolygon, b: &ConvexPolygon) -> ConvexPolygon {
    let pa = from_lowest(a);
    let pb = from_lowest(b);
    let (n, m) = (pa.len(), pb.len());
    let mut out: Vec<Point2> = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        out.push(&pa[i % n] + &pb[j % m]);
        let ea = &pa[(i + 1) % n] - &pa[i % n];
        let eb = &pb[(j + 1) % m] - &pb[j % m];
        let c = if i == n {
            Ordering::Less
        } else if j == m {
            Ordering::Greater
        } else {
            cross(&ea, &eb).cmp(&Rational::zero())
        };
        if c != Ordering::Less {
            i += 1;
        }
        if c != Ordering::Greater {
            j += 1;
        }
    }
    ConvexPolygon::canonical(drop_collinear(out))
}

fn from_lowest(p: &ConvexPolygon) -> Vec<Point2> {
    let v = p.vertices();
    let start = v
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.y.cmp(&b.1.y).then_with(|| a.1.x.cmp(&b.1.x)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut out = v.to_vec();
    out.rotate_left(start);
    out
}

fn drop_collinear(mut pts: Vec<Point2>) -> Vec<Point2> {
    let mut changed = true;
    while changed && pts.len() > 3 {
        changed = false;
        let n = pts.len();
        for i in 0..n {
            let prev = &pts[(i + n - 1) % n];
            let next = &pts[(i + 1) % n];
            if orient_sign(prev, &pts[i], next) == Ordering::Equal {
                pts.remove(i);
                changed = true;
                break;
            }
        }
    }
    pts
}

/// Print object: convex footprint in its local frame plus height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrintObject {
    pub id: String,
    pub footprint: ConvexPolygon,
    pub height: Rational,
}

impl PrintObject {
    pub fn new(
        id: impl Into<String>,
        footprint: ConvexPolygon,
        height: Rational,
    ) -> Result<Self, GeometryError> {
        if !height.is_positive() {
            return Err(GeometryError::DegenerateInput(
                "object height must be positive".into(),
            ));
        }
        Ok(PrintObject {
            id: id.into(),
            footprint,
            height,
        })
    }

    /// Cuboid with its footprint anchored at the local origin.
    pub fn cuboid(
        id: impl Into<String>,
        length: Rational,
        width: Rational,
        height: Rational,
    ) -> Result<Self, GeometryError> {
        let fp = ConvexPolygon::rectangle(Rational::zero(), Rational::zero(), length, width)?;
        PrintObject::new(id, fp, height)
    }
}

/// Plate-plane projection of the extruder, nozzle at the local origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtruderProfile {
    /// Nozzle only; envelopes equal footprints.
    Point,
    Hull(ConvexPolygon),
}

impl ExtruderProfile {
    pub fn new(footprint: ConvexPolygon) -> Result<Self, GeometryError> {
        if !footprint.contains_point(&Point2::origin()) {
            return Err(GeometryError::NozzleOutsideExtruder);
        }
        Ok(ExtruderProfile::Hull(footprint))
    }

    /// Square of side `side` centered on the nozzle.
    pub fn square(side: Rational) -> Result<Self, GeometryError> {
        ExtruderProfile::new(ConvexPolygon::centered_rectangle(side.clone(), side)?)
    }

    pub fn vertices(&self) -> Vec<Point2> {
        match self {
            ExtruderProfile::Point => vec![Point2::origin()],
            ExtruderProfile::Hull(p) => p.vertices().to_vec(),
        }
    }
}

/// Region swept by the extruder while printing `obj` (in the object's frame).
pub fn envelope_hull(obj: &PrintObject, extruder: &ExtruderProfile) -> ConvexPolygon {
    match extruder {
        ExtruderProfile::Point => obj.footprint.clone(),
        ExtruderProfile::Hull(e) => minkowski_sum(&obj.footprint, e),
    }
}

/// Rectangular printing plate `[0, width] × [0, height]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plate {
    width: Rational,
    height: Rational,
    polygon: ConvexPolygon,
}

impl Plate {
    pub fn new(width: Rational, height: Rational) -> Result<Self, GeometryError> {
        if !width.is_positive() || !height.is_positive() {
            return Err(GeometryError::InvalidPlate);
        }
        let polygon = ConvexPolygon::rectangle(
            Rational::zero(),
            Rational::zero(),
            width.clone(),
            height.clone(),
        )?;
        Ok(Plate {
            width,
            height,
            polygon,
        })
    }

    pub fn width(&self) -> &Rational {
        &self.width
    }

    pub fn height(&self) -> &Rational {
        &self.height
    }

    pub fn polygon(&self) -> &ConvexPolygon {
        &self.polygon
    }

    pub fn center(&self) -> Point2 {
        let half = Rational::new(1.into(), 2.into());
        Point2::new(&self.width * &half, &self.height * &half)
    }
}

/// Plate shrunk by `sigma` towards `anchor`: `{anchor + σ(p − anchor)}`.
pub fn scale_plate(
    plate: &Plate,
    sigma: &Rational,
    anchor: &Point2,
) -> Result<ConvexPolygon, GeometryError> {
    if !sigma.is_positive() || *sigma > Rational::one() {
        return Err(GeometryError::InvalidSigma(sigma.to_string()));
    }
    let vertices = plate
        .polygon()
        .vertices()
        .iter()
        .map(|p| anchor + &(p - anchor).scale(sigma))
        .collect();
    Ok(ConvexPolygon::canonical(vertices))
}

fn on_segment(p: &Point2, q: &Point2, r: &Point2) -> bool {
    // r collinear with p-q assumed
    let (lo_x, hi_x) = if p.x <= q.x {
        (&p.x, &q.x)
    } else {
        (&q.x, &p.x)
    };
    let (lo_y, hi_y) = if p.y <= q.y {
        (&p.y, &q.y)
    } else {
        (&q.y, &p.y)
    };
    *lo_x <= r.x && r.x <= *hi_x && *lo_y <= r.y && r.y <= *hi_y
}

/// Closed segments `p1p2` and `q1q2` share at least one point.
pub fn segments_intersect(p1: &Point2, p2: &Point2, q1: &Point2, q2: &Point2) -> bool {
    let d1 = orient_sign(q1, q2, p1);
    let d2 = orient_sign(q1, q2, p2);
    let d3 = orient_sign(p1, p2, q1);
    let d4 = orient_sign(p1, p2, q2);
    use Ordering::*;
    if ((d1 == Greater && d2 == Less) || (d1 == Less && d2 == Greater))
        && ((d3 == Greater && d4 == Less) || (d3 == Less && d4 == Greater))
    {
        return true;
    }
    (d1 == Equal && on_segment(q1, q2, p1))
        || (d2 == Equal && on_segment(q1, q2, p2))
        || (d3 == Equal && on_segment(p1, p2, q1))
        || (d4 == Equal && on_segment(p1, p2, q2))
}

/// Interiors of `a + da` and `b + db` intersect. Shared boundary alone is
/// not overlap.
pub fn polygons_overlap(a: &ConvexPolygon, da: &Point2, b: &ConvexPolygon, db: &Point2) -> bool {
    intersection_area2(a, da, b, db).is_positive()
}

/// Twice the area of `(a + da) ∩ (b + db)`, by clipping one polygon with the
/// closed half-planes of the other.
pub fn intersection_area2(
    a: &ConvexPolygon,
    da: &Point2,
    b: &ConvexPolygon,
    db: &Point2,
) -> Rational {
    let rel = da - db;
    let mut region: Vec<Point2> = a.vertices().iter().map(|v| v + &rel).collect();
    for (e1, e2) in b.edges() {
        if region.is_empty() {
            return Rational::zero();
        }
        let mut next = Vec::with_capacity(region.len() + 1);
        let n = region.len();
        for i in 0..n {
            let cur = &region[i];
            let nxt = &region[(i + 1) % n];
            let sc = orient(e1, e2, cur);
            let sn = orient(e1, e2, nxt);
            if !sc.is_negative() {
                next.push(cur.clone());
            }
            if (sc.is_positive() && sn.is_negative()) || (sc.is_negative() && sn.is_positive()) {
                let t = &sc / (&sc - &sn);
                next.push(cur + &(nxt - cur).scale(&t));
            }
        }
        region = next;
    }
    if region.len() < 3 {
        return Rational::zero();
    }
    let n = region.len();
    (0..n)
        .map(|i| cross(&region[i], &region[(i + 1) % n]))
        .sum()
}
