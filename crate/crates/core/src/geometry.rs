// SPDX-License-Identifier: Apache-2.0

//! Integer-coordinate 2-D kernel shared by the generators and the verifiers.
//!
//! All coordinates are database units (1 dbu = 1 nm). Geometry is limited to
//! the 45°/90° shapes produced by the device generators: rectangles, simple
//! polygons, polygons with a single hole and Manhattan paths.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Length or coordinate in database units.
pub type Coord = i64;

/// Database units per micrometre.
pub const DBU_PER_UM: f64 = 1000.0;

/// Converts micrometres to database units, rounding to the nearest dbu.
pub fn um(value: f64) -> Coord {
    (value * DBU_PER_UM).round() as Coord
}

/// Converts database units to micrometres.
pub fn to_um(value: Coord) -> f64 {
    value as f64 / DBU_PER_UM
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("corner chamfer {corner} does not fit a {width}x{height} box")]
    CornerTooLarge {
        corner: Coord,
        width: Coord,
        height: Coord,
    },
    #[error("hole is not strictly inside the body")]
    HoleOutsideBody,
    #[error("polygon needs at least 3 distinct vertices")]
    DegeneratePolygon,
    #[error("path segments must be axis-aligned and the width positive")]
    InvalidPath,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: Coord,
    pub y: Coord,
}

impl Point {
    pub const fn new(x: Coord, y: Coord) -> Self {
        Self { x, y }
    }

    pub fn translate(self, dx: Coord, dy: Coord) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis-aligned rectangle, `lo` is the lower-left and `hi` the upper-right corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub lo: Point,
    pub hi: Point,
}

impl Rect {
    /// Builds a rectangle from any two opposite corners.
    pub fn new(x0: Coord, y0: Coord, x1: Coord, y1: Coord) -> Self {
        Self {
            lo: Point::new(x0.min(x1), y0.min(y1)),
            hi: Point::new(x0.max(x1), y0.max(y1)),
        }
    }

    pub fn from_points(a: Point, b: Point) -> Self {
        Self::new(a.x, a.y, b.x, b.y)
    }

    pub fn width(&self) -> Coord {
        self.hi.x - self.lo.x
    }

    pub fn height(&self) -> Coord {
        self.hi.y - self.lo.y
    }

    pub fn area(&self) -> i128 {
        self.width() as i128 * self.height() as i128
    }

    /// Center, rounded toward negative infinity.
    pub fn center(&self) -> Point {
        Point::new(
            (self.lo.x + self.hi.x).div_euclid(2),
            (self.lo.y + self.hi.y).div_euclid(2),
        )
    }

    /// Grows (or shrinks, for negative `d`) every side by `d`.
    pub fn expand(&self, d: Coord) -> Self {
        Self::new(self.lo.x - d, self.lo.y - d, self.hi.x + d, self.hi.y + d)
    }

    pub fn expand_xy(&self, dx: Coord, dy: Coord) -> Self {
        Self::new(self.lo.x - dx, self.lo.y - dy, self.hi.x + dx, self.hi.y + dy)
    }

    pub fn translate(&self, dx: Coord, dy: Coord) -> Self {
        Self {
            lo: self.lo.translate(dx, dy),
            hi: self.hi.translate(dx, dy),
        }
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            lo: Point::new(self.lo.x.min(other.lo.x), self.lo.y.min(other.lo.y)),
            hi: Point::new(self.hi.x.max(other.hi.x), self.hi.y.max(other.hi.y)),
        }
    }

    /// True when `other` lies inside `self` (boundaries may coincide).
    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.lo.x <= other.lo.x
            && self.lo.y <= other.lo.y
            && self.hi.x >= other.hi.x
            && self.hi.y >= other.hi.y
    }

    /// True when `other` lies inside `self` with no shared boundary.
    pub fn strictly_contains_rect(&self, other: &Rect) -> bool {
        self.lo.x < other.lo.x
            && self.lo.y < other.lo.y
            && self.hi.x > other.hi.x
            && self.hi.y > other.hi.y
    }

    /// True when the interiors overlap with positive area.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.lo.x < other.hi.x
            && other.lo.x < self.hi.x
            && self.lo.y < other.hi.y
            && other.lo.y < self.hi.y
    }

    /// Counter-clockwise corner list starting at `lo`.
    pub fn corners(&self) -> [Point; 4] {
        [
            self.lo,
            Point::new(self.hi.x, self.lo.y),
            self.hi,
            Point::new(self.lo.x, self.hi.y),
        ]
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon {
            vertices: self.corners().to_vec(),
        }
    }
}

/// Simple polygon with an implicitly closed vertex ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Drops consecutive duplicates (including a repeated closing vertex).
    pub fn new(points: impl IntoIterator<Item = Point>) -> Result<Self, GeometryError> {
        let mut vertices: Vec<Point> = Vec::new();
        for p in points {
            if vertices.last() != Some(&p) {
                vertices.push(p);
            }
        }
        while vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(GeometryError::DegeneratePolygon);
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Twice the signed area; positive for counter-clockwise rings.
    pub fn twice_area(&self) -> i128 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                a.x as i128 * b.y as i128 - b.x as i128 * a.y as i128
            })
            .sum()
    }

    pub fn is_ccw(&self) -> bool {
        self.twice_area() > 0
    }

    pub fn reversed(&self) -> Polygon {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Polygon { vertices }
    }

    /// Returns the ring with counter-clockwise orientation.
    pub fn to_ccw(&self) -> Polygon {
        if self.twice_area() < 0 {
            self.reversed()
        } else {
            self.clone()
        }
    }

    pub fn bbox(&self) -> Rect {
        let mut r = Rect {
            lo: self.vertices[0],
            hi: self.vertices[0],
        };
        for p in &self.vertices[1..] {
            r.lo.x = r.lo.x.min(p.x);
            r.lo.y = r.lo.y.min(p.y);
            r.hi.x = r.hi.x.max(p.x);
            r.hi.y = r.hi.y.max(p.y);
        }
        r
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    fn map(&self, f: impl Fn(Point) -> Point) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().copied().map(f).collect(),
        }
    }

    /// Point location relative to the ring.
    pub fn locate(&self, p: Point) -> Location {
        let mut winding = 0i32;
        for (a, b) in self.edges() {
            if on_segment(p, a, b) {
                return Location::Boundary;
            }
            if a.y <= p.y {
                if b.y > p.y && cross(a, b, p) > 0 {
                    winding += 1;
                }
            } else if b.y <= p.y && cross(a, b, p) < 0 {
                winding -= 1;
            }
        }
        if winding != 0 {
            Location::Inside
        } else {
            Location::Outside
        }
    }
}

impl TryFrom<Vec<Point>> for Polygon {
    type Error = GeometryError;

    fn try_from(points: Vec<Point>) -> Result<Self, Self::Error> {
        Polygon::new(points)
    }
}

impl From<Polygon> for Vec<Point> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// Geometric payload of a [`Shape`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Rect(Rect),
    Polygon(Polygon),
    /// Body ring with one hole. Gate octagons, rings and source regions use this.
    Holed { outer: Polygon, hole: Polygon },
    /// Manhattan centerline path with flush ends and mitred corners.
    Path { points: Vec<Point>, width: Coord },
}

/// Layered shape in a cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub layer: String,
    pub geometry: Geometry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net: Option<String>,
}

impl Shape {
    pub fn new(layer: impl Into<String>, geometry: Geometry) -> Self {
        Self {
            layer: layer.into(),
            geometry,
            net: None,
        }
    }

    pub fn rect(layer: impl Into<String>, r: Rect) -> Self {
        Self::new(layer, Geometry::Rect(r))
    }

    pub fn with_net(mut self, net: impl Into<String>) -> Self {
        self.net = Some(net.into());
        self
    }

    pub fn bbox(&self) -> Rect {
        bbox(self)
    }

    /// True for a holed shape whose body is an eight-sided ring.
    pub fn is_octagon_with_hole(&self) -> bool {
        matches!(&self.geometry, Geometry::Holed { outer, .. } if outer.vertices().len() == 8)
    }

    /// Outer boundary and optional hole, with paths expanded to outlines.
    pub fn rings(&self) -> (Polygon, Option<Polygon>) {
        match &self.geometry {
            Geometry::Rect(r) => (r.to_polygon(), None),
            Geometry::Polygon(p) => (p.clone(), None),
            Geometry::Holed { outer, hole } => (outer.clone(), Some(hole.clone())),
            Geometry::Path { points, width } => (path_outline(points, *width), None),
        }
    }

    /// Net enclosed area in dbu².
    pub fn area(&self) -> i128 {
        match &self.geometry {
            Geometry::Rect(r) => r.area(),
            _ => {
                let (outer, hole) = self.rings();
                let hole_area = hole.map(|h| h.twice_area().abs()).unwrap_or(0);
                (outer.twice_area().abs() - hole_area) / 2
            }
        }
    }

    pub fn locate(&self, p: Point) -> Location {
        if let Geometry::Rect(r) = &self.geometry {
            let inside_x = r.lo.x <= p.x && p.x <= r.hi.x;
            let inside_y = r.lo.y <= p.y && p.y <= r.hi.y;
            if !(inside_x && inside_y) {
                return Location::Outside;
            }
            if p.x == r.lo.x || p.x == r.hi.x || p.y == r.lo.y || p.y == r.hi.y {
                return Location::Boundary;
            }
            return Location::Inside;
        }
        let (outer, hole) = self.rings();
        match outer.locate(p) {
            Location::Outside => Location::Outside,
            loc => match hole.map(|h| h.locate(p)) {
                Some(Location::Inside) => Location::Outside,
                Some(Location::Boundary) => Location::Boundary,
                _ => loc,
            },
        }
    }

    /// Boundary segments of all rings.
    pub fn edges(&self) -> Vec<(Point, Point)> {
        let (outer, hole) = self.rings();
        let mut edges: Vec<_> = outer.edges().collect();
        if let Some(h) = hole {
            edges.extend(h.edges());
        }
        edges
    }

    /// Boundary segments oriented so the shape interior lies to their left.
    pub fn interior_left_edges(&self) -> Vec<(Point, Point)> {
        let (outer, hole) = self.rings();
        let mut edges: Vec<_> = outer.to_ccw().edges().collect();
        if let Some(h) = hole {
            edges.extend(h.to_ccw().reversed().edges());
        }
        edges
    }
}

/// Builds a rectangle with all four corners chamfered at 45° by `corner`.
pub fn chamfered_rect(r: &Rect, corner: Coord) -> Result<Polygon, GeometryError> {
    if corner < 0 || 2 * corner > r.width().min(r.height()) {
        return Err(GeometryError::CornerTooLarge {
            corner,
            width: r.width(),
            height: r.height(),
        });
    }
    let (x0, y0, x1, y1, c) = (r.lo.x, r.lo.y, r.hi.x, r.hi.y, corner);
    Polygon::new([
        Point::new(x0 + c, y0),
        Point::new(x1 - c, y0),
        Point::new(x1, y0 + c),
        Point::new(x1, y1 - c),
        Point::new(x1 - c, y1),
        Point::new(x0 + c, y1),
        Point::new(x0, y1 - c),
        Point::new(x0, y0 + c),
    ])
}

/// Octagonal ring with a hole: `outer` chamfered by `corner`, the hole is
/// `inner` chamfered by `hole_corner` (0 keeps a rectangular hole).
pub fn octagon_with_hole(
    layer: impl Into<String>,
    outer: Rect,
    inner: Rect,
    corner: Coord,
    hole_corner: Coord,
) -> Result<Shape, GeometryError> {
    let body = chamfered_rect(&outer, corner)?;
    let hole = chamfered_rect(&inner, hole_corner)?;
    if !hole
        .vertices()
        .iter()
        .all(|&p| body.locate(p) == Location::Inside)
    {
        return Err(GeometryError::HoleOutsideBody);
    }
    Ok(Shape::new(layer, Geometry::Holed { outer: body, hole }))
}

/// Signed area (dbu²) by the shoelace formula; positive for CCW rings.
pub fn polygon_area(p: &Polygon) -> f64 {
    p.twice_area() as f64 / 2.0
}

/// Nearest multiple of `grid`; ties round away from zero.
pub fn snap(value: Coord, grid: Coord) -> Coord {
    assert!(grid > 0, "snap grid must be positive");
    let q = value.abs();
    let r = q % grid;
    let m = if 2 * r >= grid { q - r + grid } else { q - r };
    if value < 0 {
        -m
    } else {
        m
    }
}

/// Largest multiple of `grid` not above `value`.
pub fn snap_down(value: Coord, grid: Coord) -> Coord {
    value.div_euclid(grid) * grid
}

/// Smallest multiple of `grid` not below `value`.
pub fn snap_up(value: Coord, grid: Coord) -> Coord {
    -snap_down(-value, grid)
}

pub fn bbox(shape: &Shape) -> Rect {
    match &shape.geometry {
        Geometry::Rect(r) => *r,
        Geometry::Polygon(p) => p.bbox(),
        Geometry::Holed { outer, .. } => outer.bbox(),
        Geometry::Path { points, width } => path_outline(points, *width).bbox(),
    }
}

/// Quarter-turn rotation, counter-clockwise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rotation {
    #[default]
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270];

    pub fn quarter_turns(self) -> u8 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 1,
            Rotation::R180 => 2,
            Rotation::R270 => 3,
        }
    }

    pub fn from_quarter_turns(n: i64) -> Self {
        Self::ALL[n.rem_euclid(4) as usize]
    }

    pub fn degrees(self) -> f64 {
        90.0 * self.quarter_turns() as f64
    }

    fn apply(self, p: Point) -> Point {
        match self {
            Rotation::R0 => p,
            Rotation::R90 => Point::new(-p.y, p.x),
            Rotation::R180 => Point::new(-p.x, -p.y),
            Rotation::R270 => Point::new(p.y, -p.x),
        }
    }
}

/// Placement transform: mirror about the x axis (optional), then rotate, then translate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transform {
    pub translation: Point,
    pub rotation: Rotation,
    pub mirror_x: bool,
}

impl Transform {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn translate(dx: Coord, dy: Coord) -> Self {
        Self {
            translation: Point::new(dx, dy),
            ..Self::default()
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        let m = if self.mirror_x { Point::new(p.x, -p.y) } else { p };
        let r = self.rotation.apply(m);
        r.translate(self.translation.x, self.translation.y)
    }

    /// Applies only the linear part (no translation).
    pub fn apply_vector(&self, p: Point) -> Point {
        let m = if self.mirror_x { Point::new(p.x, -p.y) } else { p };
        self.rotation.apply(m)
    }

    /// Transform equivalent to applying `self` and then `next`.
    pub fn then(&self, next: &Transform) -> Transform {
        let turns = if next.mirror_x {
            next.rotation.quarter_turns() as i64 - self.rotation.quarter_turns() as i64
        } else {
            next.rotation.quarter_turns() as i64 + self.rotation.quarter_turns() as i64
        };
        Transform {
            translation: next.apply(self.translation),
            rotation: Rotation::from_quarter_turns(turns),
            mirror_x: self.mirror_x ^ next.mirror_x,
        }
    }

    pub fn inverse(&self) -> Transform {
        // Linear part L = R·M; its inverse is M·R⁻¹, which in (mirror, rotation) form
        // is R' = R⁻¹ without mirror, or R' = R with mirror.
        let turns = self.rotation.quarter_turns() as i64;
        let linear = Transform {
            translation: Point::default(),
            rotation: Rotation::from_quarter_turns(if self.mirror_x { turns } else { -turns }),
            mirror_x: self.mirror_x,
        };
        let t = linear.apply(self.translation);
        Transform {
            translation: Point::new(-t.x, -t.y),
            ..linear
        }
    }

    pub fn apply_rect(&self, r: &Rect) -> Rect {
        Rect::from_points(self.apply(r.lo), self.apply(r.hi))
    }
}

/// Applies `t` to every vertex. Vertex order is preserved, so a mirrored
/// polygon changes orientation.
pub fn apply_transform(shape: &Shape, t: &Transform) -> Shape {
    let geometry = match &shape.geometry {
        Geometry::Rect(r) => Geometry::Rect(t.apply_rect(r)),
        Geometry::Polygon(p) => Geometry::Polygon(p.map(|v| t.apply(v))),
        Geometry::Holed { outer, hole } => Geometry::Holed {
            outer: outer.map(|v| t.apply(v)),
            hole: hole.map(|v| t.apply(v)),
        },
        Geometry::Path { points, width } => Geometry::Path {
            points: points.iter().map(|&v| t.apply(v)).collect(),
            width: *width,
        },
    };
    Shape {
        layer: shape.layer.clone(),
        geometry,
        net: shape.net.clone(),
    }
}

/// Builds a Manhattan path, merging collinear runs.
pub fn manhattan_path(points: &[Point], width: Coord) -> Result<Geometry, GeometryError> {
    if width <= 0 || points.len() < 2 {
        return Err(GeometryError::InvalidPath);
    }
    let mut pts: Vec<Point> = Vec::with_capacity(points.len());
    for &p in points {
        if pts.last() == Some(&p) {
            continue;
        }
        if pts.len() >= 2 {
            let a = pts[pts.len() - 2];
            let b = pts[pts.len() - 1];
            if cross(a, b, p) == 0 {
                pts.pop();
            }
        }
        pts.push(p);
    }
    if pts.len() < 2 || pts.windows(2).any(|w| w[0].x != w[1].x && w[0].y != w[1].y) {
        return Err(GeometryError::InvalidPath);
    }
    Ok(Geometry::Path { points: pts, width })
}

/// Sum of the segment lengths of a path centerline.
pub fn centerline_length(points: &[Point]) -> Coord {
    points
        .windows(2)
        .map(|w| (w[1].x - w[0].x).abs() + (w[1].y - w[0].y).abs())
        .sum()
}

fn unit_dir(a: Point, b: Point) -> Point {
    Point::new((b.x - a.x).signum(), (b.y - a.y).signum())
}

/// Outline of a Manhattan path. The left side is offset by `width / 2`
/// (rounded down), the right side by the remainder, so odd widths stay exact.
pub fn path_outline(points: &[Point], width: Coord) -> Polygon {
    let left_off = width / 2;
    let right_off = width - left_off;
    let n = points.len();
    let normal = |d: Point| Point::new(-d.y, d.x);
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for i in 0..n {
        let (n1, n2) = if i == 0 {
            let d = normal(unit_dir(points[0], points[1]));
            (d, Point::default())
        } else if i == n - 1 {
            let d = normal(unit_dir(points[n - 2], points[n - 1]));
            (d, Point::default())
        } else {
            (
                normal(unit_dir(points[i - 1], points[i])),
                normal(unit_dir(points[i], points[i + 1])),
            )
        };
        let s = Point::new(n1.x + n2.x, n1.y + n2.y);
        let p = points[i];
        left.push(Point::new(p.x + left_off * s.x, p.y + left_off * s.y));
        right.push(Point::new(p.x - right_off * s.x, p.y - right_off * s.y));
    }
    right.reverse();
    left.extend(right);
    Polygon::new(left).expect("path outline is never degenerate")
}

/// 2-D cross product of (b - a) and (c - a).
pub(crate) fn cross(a: Point, b: Point, c: Point) -> i128 {
    (b.x - a.x) as i128 * (c.y - a.y) as i128 - (b.y - a.y) as i128 * (c.x - a.x) as i128
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    cross(a, b, p) == 0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// True if the closed segments share at least one point.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a).signum();
    let d2 = cross(c, d, b).signum();
    let d3 = cross(a, b, c).signum();
    let d4 = cross(a, b, d).signum();
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(a, c, d))
        || (d2 == 0 && on_segment(b, c, d))
        || (d3 == 0 && on_segment(c, a, b))
        || (d4 == 0 && on_segment(d, a, b))
}

/// Euclidean distance from `p` to the closed segment `ab`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = ((b.x - a.x) as f64, (b.y - a.y) as f64);
    let (px, py) = ((p.x - a.x) as f64, (p.y - a.y) as f64);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((px * dx + py * dy) / len2).clamp(0.0, 1.0)
    };
    let (ex, ey) = (px - t * dx, py - t * dy);
    (ex * ex + ey * ey).sqrt()
}

pub fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Gap between two rectangles (0 when touching or overlapping).
pub fn rect_distance(a: &Rect, b: &Rect) -> f64 {
    let dx = (b.lo.x - a.hi.x).max(a.lo.x - b.hi.x).max(0) as f64;
    let dy = (b.lo.y - a.hi.y).max(a.lo.y - b.hi.y).max(0) as f64;
    (dx * dx + dy * dy).sqrt()
}

/// Exact minimum Euclidean edge-to-edge distance; 0 if the shapes touch or overlap.
pub fn distance(a: &Shape, b: &Shape) -> f64 {
    if let (Geometry::Rect(ra), Geometry::Rect(rb)) = (&a.geometry, &b.geometry) {
        return rect_distance(ra, rb);
    }
    let ea = a.edges();
    let eb = b.edges();
    for &(p, q) in &ea {
        for &(r, s) in &eb {
            if segments_intersect(p, q, r, s) {
                return 0.0;
            }
        }
    }
    // No boundary contact: either one contains the other or they are apart.
    if b.locate(ea[0].0) != Location::Outside || a.locate(eb[0].0) != Location::Outside {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for &(p, q) in &ea {
        for &(r, s) in &eb {
            best = best.min(segment_distance(p, q, r, s));
        }
    }
    best
}

/// [`distance`] rounded to the nearest dbu (ties away from zero).
pub fn min_spacing(a: &Shape, b: &Shape) -> Coord {
    distance(a, b).round() as Coord
}

/// True when the two shapes share interior area.
pub fn interiors_overlap(a: &Shape, b: &Shape) -> bool {
    if !a.bbox().overlaps(&b.bbox()) {
        return false;
    }
    if let (Geometry::Rect(ra), Geometry::Rect(rb)) = (&a.geometry, &b.geometry) {
        return ra.overlaps(rb);
    }
    // Proper crossings of boundaries imply overlap.
    let ea = a.edges();
    let eb = b.edges();
    for &(p, q) in &ea {
        for &(r, s) in &eb {
            let d1 = cross(r, s, p).signum();
            let d2 = cross(r, s, q).signum();
            let d3 = cross(p, q, r).signum();
            let d4 = cross(p, q, s).signum();
            if d1 * d2 < 0 && d3 * d4 < 0 {
                return true;
            }
        }
    }
    // Otherwise test midpoints of edges and vertices for strict containment.
    let probe = |edges: &[(Point, Point)], other: &Shape| {
        edges.iter().any(|&(p, q)| {
            other.locate(p) == Location::Inside
                || (p.x + q.x) % 2 == 0
                    && (p.y + q.y) % 2 == 0
                    && other.locate(Point::new((p.x + q.x) / 2, (p.y + q.y) / 2))
                        == Location::Inside
        })
    };
    probe(&ea, b) || probe(&eb, a) || {
        // Coincident shapes: compare interior sample points.
        let c = a.bbox().center();
        a.locate(c) == Location::Inside && b.locate(c) == Location::Inside
    }
}

/// Minimum width: the smallest distance between two facing, opposing
/// boundary edges with the interior between them.
pub fn min_width(shape: &Shape) -> f64 {
    if let Geometry::Rect(r) = &shape.geometry {
        return r.width().min(r.height()) as f64;
    }
    let edges = shape.interior_left_edges();
    let mut best = f64::INFINITY;
    for (i, &(a, b)) in edges.iter().enumerate() {
        for &(c, d) in &edges[i + 1..] {
            if a == d || b == c || a == c || b == d {
                continue;
            }
            let dot = (b.x - a.x) as i128 * (d.x - c.x) as i128 + (b.y - a.y) as i128 * (d.y - c.y) as i128;
            if dot >= 0 {
                continue;
            }
            let cd_left_of_ab = cross(a, b, c) > 0 || cross(a, b, d) > 0;
            let ab_left_of_cd = cross(c, d, a) > 0 || cross(c, d, b) > 0;
            if cd_left_of_ab && ab_left_of_cd {
                best = best.min(segment_distance(a, b, c, d));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(x0: Coord, y0: Coord, x1: Coord, y1: Coord) -> Shape {
        Shape::rect("met1", Rect::new(x0, y0, x1, y1))
    }

    #[test]
    fn octagon_example_vertices_and_area() {
        let s = octagon_with_hole(
            "poly1",
            Rect::new(0, 0, 10000, 10000),
            Rect::new(4000, 4000, 6000, 6000),
            2000,
            0,
        )
        .unwrap();
        let Geometry::Holed { outer, hole } = &s.geometry else {
            panic!("expected holed shape")
        };
        let expected = [
            (2000, 0),
            (8000, 0),
            (10000, 2000),
            (10000, 8000),
            (8000, 10000),
            (2000, 10000),
            (0, 8000),
            (0, 2000),
        ]
        .map(|(x, y)| Point::new(x, y));
        assert_eq!(outer.vertices(), &expected);
        assert_eq!(hole.bbox(), Rect::new(4000, 4000, 6000, 6000));
        assert_eq!(polygon_area(outer), 92e6);
        assert_eq!(s.area(), 88_000_000);
        assert_eq!(bbox(&s), Rect::new(0, 0, 10000, 10000));
        assert!(s.is_octagon_with_hole());
    }

    #[test]
    fn zero_corner_is_rectangle() {
        let p = chamfered_rect(&Rect::new(0, 0, 10, 20), 0).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.twice_area(), 400);
    }

    #[test]
    fn octagon_errors() {
        let outer = Rect::new(0, 0, 1000, 1000);
        assert!(matches!(
            octagon_with_hole("poly1", outer, Rect::new(400, 400, 600, 600), 501, 0),
            Err(GeometryError::CornerTooLarge { .. })
        ));
        assert!(matches!(
            octagon_with_hole("poly1", outer, Rect::new(400, 400, 1000, 600), 100, 0),
            Err(GeometryError::HoleOutsideBody)
        ));
        // Hole corner reaching into the chamfer.
        assert!(matches!(
            octagon_with_hole("poly1", outer, Rect::new(50, 50, 600, 600), 200, 0),
            Err(GeometryError::HoleOutsideBody)
        ));
    }

    #[test]
    fn area_examples() {
        let unit = Polygon::new([(0, 0), (1, 0), (1, 1), (0, 1)].map(|(x, y)| Point::new(x, y))).unwrap();
        assert_eq!(polygon_area(&unit), 1.0);
        assert_eq!(polygon_area(&unit.reversed()), -1.0);
        assert_eq!(polygon_area(&Rect::new(0, 0, 10000, 10000).to_polygon()), 1e8);
    }

    #[test]
    fn snap_examples() {
        assert_eq!(snap(123, 5), 125);
        assert_eq!(snap(0, 5), 0);
        assert_eq!(snap(-123, 5), -125);
        assert_eq!(snap(1003, 5), 1005);
        assert_eq!(snap(122, 5), 120);
        assert_eq!(snap(-122, 5), -120);
        assert_eq!(snap_down(-3, 5), -5);
        assert_eq!(snap_up(3, 5), 5);
    }

    #[test]
    fn spacing_examples() {
        assert_eq!(min_spacing(&sq(0, 0, 1, 1), &sq(3, 0, 4, 1)), 2);
        assert_eq!(min_spacing(&sq(0, 0, 2, 2), &sq(1, 1, 3, 3)), 0);
        assert_eq!(min_spacing(&sq(0, 0, 2, 2), &sq(2, 0, 3, 2)), 0);
        assert_eq!(min_spacing(&sq(0, 0, 2000, 2000), &sq(5000, 5000, 7000, 7000)), 4243);
        assert!((distance(&sq(0, 0, 2, 2), &sq(5, 5, 7, 7)) - 18f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn spacing_respects_holes() {
        let ring = octagon_with_hole(
            "poly1",
            Rect::new(0, 0, 10000, 10000),
            Rect::new(3000, 3000, 7000, 7000),
            1000,
            0,
        )
        .unwrap();
        let inside = Shape::rect("cont", Rect::new(4000, 4000, 5000, 5000));
        assert_eq!(min_spacing(&ring, &inside), 1000);
        assert!(!interiors_overlap(&ring, &inside));
        let across = Shape::rect("cont", Rect::new(2500, 4000, 3500, 5000));
        assert_eq!(min_spacing(&ring, &across), 0);
        assert!(interiors_overlap(&ring, &across));
    }

    #[test]
    fn width_of_ring_and_path() {
        let ring = octagon_with_hole(
            "poly1",
            Rect::new(0, 0, 10000, 10000),
            Rect::new(3000, 3000, 7000, 7000),
            400,
            0,
        )
        .unwrap();
        assert_eq!(min_width(&ring), 3000.0);
        let path = Shape::new(
            "poly1",
            manhattan_path(
                &[Point::new(0, 0), Point::new(5000, 0), Point::new(5000, 2000), Point::new(0, 2000)],
                310,
            )
            .unwrap(),
        );
        assert_eq!(min_width(&path), 310.0);
        assert_eq!(path.area(), 310 * 12000);
    }

    #[test]
    fn path_outline_area_matches_centerline() {
        let pts = [Point::new(0, 0), Point::new(1000, 0), Point::new(1000, 800)];
        let outline = path_outline(&pts, 200);
        assert_eq!(outline.twice_area().abs(), 2 * 200 * 1800);
        assert_eq!(centerline_length(&pts), 1800);
    }

    #[test]
    fn transform_identities() {
        let s = Shape::new(
            "poly1",
            Geometry::Polygon(
                Polygon::new([(0, 0), (7, 1), (3, 9)].map(|(x, y)| Point::new(x, y))).unwrap(),
            ),
        );
        let fwd = Transform::translate(5, 7);
        let back = Transform::translate(-5, -7);
        assert_eq!(apply_transform(&apply_transform(&s, &fwd), &back), s);
        let rot = Transform {
            rotation: Rotation::R90,
            ..Transform::default()
        };
        let mut r = s.clone();
        for _ in 0..4 {
            r = apply_transform(&r, &rot);
        }
        assert_eq!(r, s);
    }

    #[test]
    fn transform_inverse_all_variants() {
        let p = Point::new(13, -4);
        for rotation in Rotation::ALL {
            for mirror_x in [false, true] {
                let t = Transform {
                    translation: Point::new(100, -30),
                    rotation,
                    mirror_x,
                };
                assert_eq!(t.inverse().apply(t.apply(p)), p, "{t:?}");
                assert_eq!(t.then(&t.inverse()), Transform::identity(), "{t:?}");
            }
        }
    }
}
