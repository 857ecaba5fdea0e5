// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{distance, interiors_overlap, min_width, segment_distance, Coord, Geometry, Location, Rect, Shape};
use crate::pcell::CellLayout;
use crate::techdb::{DesignRule, RuleKind, TechnologyData};

use super::{Design, ShapeIndex, UnionFind};

/// One design-rule violation. `shapes` index the checked shape list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub rule: DesignRule,
    pub measured: Coord,
    pub location: Rect,
    pub shapes: Vec<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = &self.location;
        write!(
            f,
            "{}: measured {} at ({}, {})-({}, {}) shapes {:?}",
            self.rule, self.measured, l.lo.x, l.lo.y, l.hi.x, l.hi.y, self.shapes
        )
    }
}

pub fn check_cell(cell: &CellLayout, tech: &TechnologyData) -> Vec<Violation> {
    run_drc_shapes(&cell.shapes, tech)
}

pub fn run_drc(design: &Design, tech: &TechnologyData) -> Vec<Violation> {
    run_drc_shapes(&design.shapes(), tech)
}

struct LayerData {
    members: Vec<usize>,
    index: ShapeIndex,
    /// Merged-region root per shape index, filled on demand.
    roots: Option<HashMap<usize, usize>>,
}

struct Checker<'a> {
    shapes: &'a [Shape],
    bboxes: Vec<Rect>,
    layers: BTreeMap<&'a str, LayerData>,
    out: Vec<Violation>,
}

impl<'a> Checker<'a> {
    fn new(shapes: &'a [Shape]) -> Self {
        let bboxes: Vec<Rect> = shapes.iter().map(Shape::bbox).collect();
        let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, s) in shapes.iter().enumerate() {
            members.entry(s.layer.as_str()).or_default().push(i);
        }
        let layers = members
            .into_iter()
            .map(|(layer, members)| {
                let index = ShapeIndex::new(members.iter().map(|&i| (i, bboxes[i])));
                (
                    layer,
                    LayerData {
                        members,
                        index,
                        roots: None,
                    },
                )
            })
            .collect();
        Self {
            shapes,
            bboxes,
            layers,
            out: Vec::new(),
        }
    }

    fn members(&self, layer: &str) -> &[usize] {
        self.layers.get(layer).map(|d| d.members.as_slice()).unwrap_or(&[])
    }

    fn near(&self, layer: &str, r: &Rect, margin: Coord) -> Vec<usize> {
        self.layers
            .get(layer)
            .map(|d| d.index.near(r, margin).collect())
            .unwrap_or_default()
    }

    /// Merged-region roots of the shapes on `layer`: touching or
    /// overlapping shapes share a root.
    fn roots(&mut self, layer: &str) -> HashMap<usize, usize> {
        let Some(data) = self.layers.get(layer) else {
            return HashMap::new();
        };
        if let Some(r) = &data.roots {
            return r.clone();
        }
        let pos: HashMap<usize, usize> = data.members.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut uf = UnionFind::new(data.members.len());
        for (k, &i) in data.members.iter().enumerate() {
            for j in data.index.near(&self.bboxes[i], 0) {
                if j > i && distance(&self.shapes[i], &self.shapes[j]) == 0.0 {
                    uf.union(k, pos[&j]);
                }
            }
        }
        let roots: HashMap<usize, usize> = data
            .members
            .iter()
            .enumerate()
            .map(|(k, &i)| (i, data.members[uf.find(k)]))
            .collect();
        self.layers.get_mut(layer).expect("layer exists").roots = Some(roots.clone());
        roots
    }

    fn push(&mut self, rule: &DesignRule, measured: Coord, location: Rect, mut shapes: Vec<usize>) {
        shapes.sort_unstable();
        self.out.push(Violation {
            rule: rule.clone(),
            measured,
            location,
            shapes,
        });
    }

    fn width(&mut self, rule: &DesignRule) {
        let layer = rule.layers[0].as_str();
        for &i in self.members(layer).to_vec().iter() {
            let w = min_width(&self.shapes[i]);
            if w < rule.value as f64 {
                self.push(rule, w.floor() as Coord, self.bboxes[i], vec![i]);
            }
        }
    }

    fn spacing_same(&mut self, rule: &DesignRule) {
        let layer = rule.layers[0].as_str();
        let roots = self.roots(layer);
        for &i in self.members(layer).to_vec().iter() {
            for j in self.near(layer, &self.bboxes[i], rule.value) {
                if j <= i || roots[&i] == roots[&j] {
                    continue;
                }
                let d = distance(&self.shapes[i], &self.shapes[j]);
                if d < rule.value as f64 {
                    self.push(rule, d.floor() as Coord, self.bboxes[i].union(&self.bboxes[j]), vec![i, j]);
                }
            }
        }
    }

    /// Spacing from each shape on the second layer to merged regions of the
    /// first layer. Regions the shape lands on are exempt.
    fn spacing_cross(&mut self, rule: &DesignRule) {
        let (la, lb) = (rule.layers[0].as_str(), rule.layers[1].as_str());
        let roots = self.roots(la);
        for &b in self.members(lb).to_vec().iter() {
            let mut regions: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for a in self.near(la, &self.bboxes[b], rule.value) {
                regions.entry(roots[&a]).or_default().push(a);
            }
            for members in regions.values() {
                let sb = &self.shapes[b];
                if members.iter().any(|&a| interiors_overlap(&self.shapes[a], sb)) {
                    continue;
                }
                let (d, a) = members
                    .iter()
                    .map(|&a| (distance(&self.shapes[a], sb), a))
                    .fold((f64::INFINITY, 0), |acc, x| if x.0 < acc.0 { x } else { acc });
                if d < rule.value as f64 {
                    self.push(rule, d.floor() as Coord, self.bboxes[a].union(&self.bboxes[b]), vec![a, b]);
                }
            }
        }
    }

    /// Inner shapes that overlap the outer layer must sit inside one outer
    /// shape with at least the rule margin.
    fn enclosure(&mut self, rule: &DesignRule) {
        let (lo, li) = (rule.layers[0].as_str(), rule.layers[1].as_str());
        for &i in self.members(li).to_vec().iter() {
            let inner = &self.shapes[i];
            let mut touched = false;
            let mut best: Option<(f64, usize)> = None;
            for o in self.near(lo, &self.bboxes[i], 0) {
                let outer = &self.shapes[o];
                if !interiors_overlap(outer, inner) {
                    continue;
                }
                touched = true;
                if contains(outer, inner) {
                    let m = margin(outer, inner);
                    if best.is_none_or(|(bm, _)| m > bm) {
                        best = Some((m, o));
                    }
                }
            }
            if !touched {
                continue;
            }
            match best {
                Some((m, o)) if m < rule.value as f64 => self.push(rule, m.floor() as Coord, self.bboxes[i], vec![o, i]),
                None => self.push(rule, 0, self.bboxes[i], vec![i]),
                _ => {}
            }
        }
    }

    /// Where an extending shape crosses a base shape, every side on which its
    /// bounding box passes the base's must overhang by the rule value.
    fn extension(&mut self, rule: &DesignRule) {
        let (le, lb) = (rule.layers[0].as_str(), rule.layers[1].as_str());
        for &e in self.members(le).to_vec().iter() {
            for b in self.near(lb, &self.bboxes[e], 0) {
                if !interiors_overlap(&self.shapes[e], &self.shapes[b]) {
                    continue;
                }
                let (re, rb) = (self.bboxes[e], self.bboxes[b]);
                let overhangs = [
                    (re.lo.x < rb.lo.x).then(|| rb.lo.x - re.lo.x),
                    (re.hi.x > rb.hi.x).then(|| re.hi.x - rb.hi.x),
                    (re.lo.y < rb.lo.y).then(|| rb.lo.y - re.lo.y),
                    (re.hi.y > rb.hi.y).then(|| re.hi.y - rb.hi.y),
                ];
                if let Some(m) = overhangs.iter().flatten().min() {
                    if *m < rule.value {
                        self.push(rule, *m, re, vec![e, b]);
                    }
                }
            }
        }
    }
}

/// True when `inner` lies inside `outer` (boundaries may touch).
pub(crate) fn contains(outer: &Shape, inner: &Shape) -> bool {
    if let (Geometry::Rect(o), Geometry::Rect(i)) = (&outer.geometry, &inner.geometry) {
        return o.contains_rect(i);
    }
    if !outer.bbox().contains_rect(&inner.bbox()) {
        return false;
    }
    let ei = inner.edges();
    let eo = outer.edges();
    let mid = |p: crate::geometry::Point, q: crate::geometry::Point| {
        crate::geometry::Point::new((p.x + q.x).div_euclid(2), (p.y + q.y).div_euclid(2))
    };
    if ei
        .iter()
        .any(|&(p, q)| outer.locate(p) == Location::Outside || outer.locate(mid(p, q)) == Location::Outside)
    {
        return false;
    }
    if eo.iter().any(|&(p, _)| inner.locate(p) == Location::Inside) {
        return false;
    }
    for &(p, q) in &ei {
        for &(r, s) in &eo {
            if proper_cross(p, q, r, s) {
                return false;
            }
        }
    }
    true
}

fn proper_cross(
    a: crate::geometry::Point,
    b: crate::geometry::Point,
    c: crate::geometry::Point,
    d: crate::geometry::Point,
) -> bool {
    use crate::geometry::cross;
    let d1 = cross(c, d, a).signum();
    let d2 = cross(c, d, b).signum();
    let d3 = cross(a, b, c).signum();
    let d4 = cross(a, b, d).signum();
    d1 * d2 < 0 && d3 * d4 < 0
}

/// Smallest boundary-to-boundary distance of a contained shape.
pub(crate) fn margin(outer: &Shape, inner: &Shape) -> f64 {
    if let (Geometry::Rect(o), Geometry::Rect(i)) = (&outer.geometry, &inner.geometry) {
        return (i.lo.x - o.lo.x)
            .min(o.hi.x - i.hi.x)
            .min(i.lo.y - o.lo.y)
            .min(o.hi.y - i.hi.y) as f64;
    }
    let ei = inner.edges();
    let mut best = f64::INFINITY;
    for (r, s) in outer.edges() {
        for &(p, q) in &ei {
            best = best.min(segment_distance(p, q, r, s));
        }
    }
    best
}

/// Checks every rule of `tech` on a flat shape list.
pub fn run_drc_shapes(shapes: &[Shape], tech: &TechnologyData) -> Vec<Violation> {
    let mut c = Checker::new(shapes);
    for rule in &tech.rules {
        match (rule.kind, rule.layers.len()) {
            (RuleKind::MinWidth, _) => c.width(rule),
            (RuleKind::MinSpacing, 1) => c.spacing_same(rule),
            (RuleKind::MinSpacing, _) => c.spacing_cross(rule),
            (RuleKind::MinEnclosure, _) => c.enclosure(rule),
            (RuleKind::MinExtension, _) => c.extension(rule),
        }
    }
    let mut out = c.out;
    out.sort_by(|a, b| (&a.rule, a.location, &a.shapes).cmp(&(&b.rule, b.location, &b.shapes)));
    out
}
