// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::gdsio::{GdsElement, GdsLibrary};
use crate::geometry::{Coord, Point};

/// Shapes present on one side only for a (structure, layer, datatype).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerDiff {
    pub structure: String,
    pub layer: i16,
    pub datatype: i16,
    pub only_in_a: Vec<ShapeDiff>,
    pub only_in_b: Vec<ShapeDiff>,
}

impl LayerDiff {
    pub fn count(&self) -> usize {
        self.only_in_a.len().max(self.only_in_b.len())
    }
}

/// One canonical element that has no partner on the other side.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ShapeDiff {
    pub kind: String,
    pub points: Vec<Point>,
    pub width: Coord,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceReport {
    pub congruent: bool,
    pub structures_only_in_a: Vec<String>,
    pub structures_only_in_b: Vec<String>,
    pub layer_diffs: Vec<LayerDiff>,
    pub reference_diffs: Vec<String>,
}

impl CongruenceReport {
    /// Differing shapes summed over all layers.
    pub fn shape_difference_count(&self) -> usize {
        self.layer_diffs.iter().map(LayerDiff::count).sum()
    }
}

impl fmt::Display for CongruenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.congruent {
            return writeln!(f, "congruent");
        }
        for s in &self.structures_only_in_a {
            writeln!(f, "structure {s} only in A")?;
        }
        for s in &self.structures_only_in_b {
            writeln!(f, "structure {s} only in B")?;
        }
        for d in &self.layer_diffs {
            writeln!(
                f,
                "{} {}/{}: {} only in A, {} only in B",
                d.structure,
                d.layer,
                d.datatype,
                d.only_in_a.len(),
                d.only_in_b.len()
            )?;
        }
        for r in &self.reference_diffs {
            writeln!(f, "reference {r}")?;
        }
        Ok(())
    }
}

fn twice_area(p: &[Point]) -> i128 {
    (0..p.len())
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % p.len()]);
            a.x as i128 * b.y as i128 - b.x as i128 * a.y as i128
        })
        .sum()
}

/// Counter-clockwise ring starting at its smallest vertex, without the closing point
/// and without collinear vertices.
pub(crate) fn canonical_ring(points: &[Point]) -> Vec<Point> {
    let mut p: Vec<Point> = points.to_vec();
    if p.len() > 1 && p.first() == p.last() {
        p.pop();
    }
    p.dedup();
    loop {
        let n = p.len();
        if n < 3 {
            break;
        }
        let drop = (0..n).find(|&i| {
            let (a, b, c) = (p[(i + n - 1) % n], p[i], p[(i + 1) % n]);
            let cross = (b.x - a.x) as i128 * (c.y - b.y) as i128 - (b.y - a.y) as i128 * (c.x - b.x) as i128;
            let dot = (b.x - a.x) as i128 * (c.x - b.x) as i128 + (b.y - a.y) as i128 * (c.y - b.y) as i128;
            a == b || (cross == 0 && dot > 0)
        });
        match drop {
            Some(i) => {
                p.remove(i);
            }
            None => break,
        }
    }
    if twice_area(&p) < 0 {
        p.reverse();
    }
    if let Some(start) = (0..p.len()).min_by_key(|&i| (p[i].x, p[i].y)) {
        p.rotate_left(start);
    }
    p
}

fn canonical(e: &GdsElement) -> Option<((i16, i16), ShapeDiff)> {
    match e {
        GdsElement::Boundary { layer, datatype, points } => Some((
            (*layer, *datatype),
            ShapeDiff {
                kind: "boundary".into(),
                points: canonical_ring(points),
                width: 0,
            },
        )),
        GdsElement::Path {
            layer,
            datatype,
            width,
            points,
            ..
        } => {
            let mut pts = points.clone();
            pts.dedup();
            let mut rev = pts.clone();
            rev.reverse();
            Some((
                (*layer, *datatype),
                ShapeDiff {
                    kind: "path".into(),
                    points: pts.min(rev),
                    width: *width,
                },
            ))
        }
        GdsElement::Sref { .. } => None,
    }
}

fn multiset_diff(a: &[ShapeDiff], b: &[ShapeDiff]) -> (Vec<ShapeDiff>, Vec<ShapeDiff>) {
    let mut count: BTreeMap<&ShapeDiff, i64> = BTreeMap::new();
    for s in a {
        *count.entry(s).or_default() += 1;
    }
    for s in b {
        *count.entry(s).or_default() -= 1;
    }
    let mut only_a = Vec::new();
    let mut only_b = Vec::new();
    for (s, c) in count {
        for _ in 0..c.max(0) {
            only_a.push(s.clone());
        }
        for _ in 0..(-c).max(0) {
            only_b.push(s.clone());
        }
    }
    (only_a, only_b)
}

type LayerMap = BTreeMap<(i16, i16), Vec<ShapeDiff>>;

fn collect(lib: &GdsLibrary) -> BTreeMap<&str, (LayerMap, Vec<String>)> {
    let mut out = BTreeMap::new();
    for s in &lib.structures {
        let mut layers: LayerMap = BTreeMap::new();
        let mut refs = Vec::new();
        for e in &s.elements {
            match e {
                GdsElement::Sref { name, transform } => refs.push(format!("{name} {transform:?}")),
                _ => {
                    if let Some((k, d)) = canonical(e) {
                        layers.entry(k).or_default().push(d);
                    }
                }
            }
        }
        refs.sort();
        out.insert(s.name.as_str(), (layers, refs));
    }
    out
}

/// Compares two libraries shape by shape, independent of element order,
/// vertex start point and ring orientation.
pub fn dbcomp(a: &GdsLibrary, b: &GdsLibrary) -> CongruenceReport {
    let ca = collect(a);
    let cb = collect(b);
    let mut report = CongruenceReport::default();
    let names: BTreeSet<&str> = ca.keys().chain(cb.keys()).copied().collect();
    let empty = (LayerMap::new(), Vec::new());
    for name in names {
        let (la, ra) = match ca.get(name) {
            Some(x) => x,
            None => {
                report.structures_only_in_b.push(name.to_string());
                &empty
            }
        };
        let (lb, rb) = match cb.get(name) {
            Some(x) => x,
            None => {
                report.structures_only_in_a.push(name.to_string());
                &empty
            }
        };
        let keys: BTreeSet<(i16, i16)> = la.keys().chain(lb.keys()).copied().collect();
        for key in keys {
            let sa = la.get(&key).map(Vec::as_slice).unwrap_or_default();
            let sb = lb.get(&key).map(Vec::as_slice).unwrap_or_default();
            let (only_in_a, only_in_b) = multiset_diff(sa, sb);
            if !only_in_a.is_empty() || !only_in_b.is_empty() {
                report.layer_diffs.push(LayerDiff {
                    structure: name.to_string(),
                    layer: key.0,
                    datatype: key.1,
                    only_in_a,
                    only_in_b,
                });
            }
        }
        if ra != rb {
            let set_a: BTreeSet<&String> = ra.iter().collect();
            let set_b: BTreeSet<&String> = rb.iter().collect();
            for r in set_a.symmetric_difference(&set_b) {
                report.reference_diffs.push(format!("{name}: {r}"));
            }
            if set_a == set_b {
                report.reference_diffs.push(format!("{name}: reference multiplicity differs"));
            }
        }
    }
    report.congruent = report.structures_only_in_a.is_empty()
        && report.structures_only_in_b.is_empty()
        && report.layer_diffs.is_empty()
        && report.reference_diffs.is_empty();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gdsio::GdsStructure;

    fn lib(rings: Vec<Vec<(i64, i64)>>) -> GdsLibrary {
        let mut l = GdsLibrary::new("T");
        l.structures.push(GdsStructure {
            name: "A".into(),
            elements: rings
                .into_iter()
                .map(|r| GdsElement::Boundary {
                    layer: 1,
                    datatype: 0,
                    points: r.into_iter().map(|(x, y)| Point::new(x, y)).collect(),
                })
                .collect(),
        });
        l
    }

    #[test]
    fn order_and_orientation_do_not_matter() {
        let a = lib(vec![vec![(0, 0), (10, 0), (10, 10), (0, 10), (0, 0)], vec![(20, 0), (30, 0), (30, 5), (20, 5)]]);
        let b = lib(vec![vec![(30, 5), (30, 0), (20, 0), (20, 5)], vec![(10, 10), (0, 10), (0, 5), (0, 0), (10, 0)]]);
        assert!(dbcomp(&a, &b).congruent);
    }

    #[test]
    fn shifted_shape_counts_once() {
        let a = lib(vec![vec![(0, 0), (10, 0), (10, 10), (0, 10)], vec![(20, 0), (30, 0), (30, 5), (20, 5)]]);
        let b = lib(vec![vec![(0, 0), (10, 0), (10, 10), (0, 10)], vec![(25, 0), (35, 0), (35, 5), (25, 5)]]);
        let r = dbcomp(&a, &b);
        assert!(!r.congruent);
        assert_eq!(r.shape_difference_count(), 1);
    }

    #[test]
    fn missing_structure() {
        let a = lib(vec![]);
        let b = GdsLibrary::new("T");
        let r = dbcomp(&a, &b);
        assert_eq!(r.structures_only_in_a, vec!["A".to_string()]);
    }
}
