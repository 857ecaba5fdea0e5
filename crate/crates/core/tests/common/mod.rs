// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::collections::BTreeMap;

use hvcell::gdsio::{GdsElement, GdsLibrary, GdsStructure};
use hvcell::geometry::{Point, Rect, Rotation, Shape};
use hvcell::interact::PlacedInstance;
use hvcell::pcell::{evaluate_params, generate, CellLayout, DeviceParams, GuardRing, PcellError};
use hvcell::{Coord, TechnologyData, Transform};
use rand::seq::SliceRandom;
use rand::Rng;

pub const DEVICES: [&str; 4] = ["pmos20t", "nmos5", "respoly", "capmim"];

pub fn tech() -> TechnologyData {
    TechnologyData::demo()
}

pub fn on_grid(rng: &mut impl Rng, lo: Coord, hi: Coord) -> Coord {
    rng.gen_range(lo.div_euclid(5)..=hi.div_euclid(5)) * 5
}

/// Random parameters inside the device limits. Widths and finger counts
/// are drawn from a sub-range to keep cells small.
pub fn random_params(device: &str, rng: &mut impl Rng, tech: &TechnologyData) -> DeviceParams {
    let lim = tech.limits(device).unwrap();
    let mut p = DeviceParams::defaults(device).unwrap();
    let l = lim["l"];
    let w = lim["w"];
    match device {
        "pmos20t" | "nmos5" => {
            p.l = on_grid(rng, l.min, l.max);
            p.w = on_grid(rng, w.min, w.max.min(50_000));
            p.fingers = rng.gen_range(1..=6);
            p.wtot = p.w * p.fingers as Coord;
            p.multiplier = rng.gen_range(1..=3);
            p.guard_ring = GuardRing::style(["none", "20v", "50v"].choose(rng).unwrap());
        }
        "respoly" => {
            p.l = on_grid(rng, l.min, l.max.min(400_000));
            p.w = on_grid(rng, w.min, w.max);
            p.bends = rng.gen_range(0..=lim["bends"].max as u32);
        }
        _ => {
            p.l = on_grid(rng, l.min, l.max);
            p.w = on_grid(rng, w.min, w.max);
            p.wtot = p.w;
        }
    }
    p
}

/// Random feasible cell: points whose snake does not fit are redrawn.
pub fn random_cell(device: &str, rng: &mut impl Rng, tech: &TechnologyData) -> CellLayout {
    for _ in 0..1000 {
        let p = evaluate_params(&random_params(device, rng, tech), tech).unwrap();
        match generate(&p, tech) {
            Ok(c) => return c,
            Err(PcellError::GeometryInfeasible(_)) => continue,
            Err(e) => panic!("{device} {p:?}: {e}"),
        }
    }
    panic!("no feasible {device} point");
}

pub fn default_cell(device: &str, tech: &TechnologyData) -> CellLayout {
    generate(&evaluate_params(&DeviceParams::defaults(device).unwrap(), tech).unwrap(), tech).unwrap()
}

pub fn nmos(fingers: u32, w: Coord, tech: &TechnologyData) -> CellLayout {
    let mut p = DeviceParams::defaults("nmos5").unwrap();
    p.fingers = fingers;
    p.w = w;
    p.wtot = w * fingers as Coord;
    generate(&evaluate_params(&p, tech).unwrap(), tech).unwrap()
}

pub fn place(id: &str, cell: &CellLayout, x: Coord, y: Coord, nets: &[(&str, &str)]) -> PlacedInstance {
    PlacedInstance::new(id, cell.clone(), Transform::translate(x, y)).with_nets(nets.iter().copied())
}

pub fn rect(layer: &str, x0: Coord, y0: Coord, x1: Coord, y1: Coord) -> Shape {
    Shape::rect(layer, Rect::new(x0, y0, x1, y1))
}

/// Euclidean distance between two rectangles, 0 when they touch or overlap.
pub fn rect_gap(a: &Rect, b: &Rect) -> f64 {
    let dx = (b.lo.x - a.hi.x).max(a.lo.x - b.hi.x).max(0) as f64;
    let dy = (b.lo.y - a.hi.y).max(a.lo.y - b.hi.y).max(0) as f64;
    dx.hypot(dy)
}

/// Pairs of rectangles on one layer that are closer than `rule` but belong
/// to different touching groups, by exhaustive comparison.
pub fn brute_spacing_pairs(rects: &[Rect], rule: Coord) -> Vec<(usize, usize)> {
    let n = rects.len();
    let mut group: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if rect_gap(&rects[i], &rects[j]) == 0.0 && group[j] < group[i] {
                    group[i] = group[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if group[i] != group[j] && rect_gap(&rects[i], &rects[j]) < rule as f64 {
                out.push((i, j));
            }
        }
    }
    out
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Minimum spanning tree weight by enumerating every (n-1)-edge subset.
pub fn exhaustive_mst_weight(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << edges.len()) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut comp: Vec<usize> = (0..n).collect();
        let mut w = 0.0;
        for (k, &(a, b)) in edges.iter().enumerate() {
            if mask & (1 << k) != 0 {
                w += dist(points[a], points[b]);
                let (ca, cb) = (comp[a], comp[b]);
                for c in comp.iter_mut() {
                    if *c == cb {
                        *c = ca;
                    }
                }
            }
        }
        if comp.iter().all(|&c| c == comp[0]) {
            best = best.min(w);
        }
    }
    best
}

pub fn tree_weight(points: &[(f64, f64)], edges: &[(usize, usize)]) -> f64 {
    edges.iter().map(|&(a, b)| dist(points[a], points[b])).sum()
}

fn random_name(rng: &mut impl Rng) -> String {
    const CHARS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_";
    let len = rng.gen_range(1..=32);
    (0..len).map(|_| *CHARS.choose(rng).unwrap() as char).collect()
}

fn random_point(rng: &mut impl Rng) -> Point {
    Point::new(
        rng.gen_range(i32::MIN as i64..=i32::MAX as i64),
        rng.gen_range(i32::MIN as i64..=i32::MAX as i64),
    )
}

/// Random library using every element kind the writer supports.
pub fn random_library(rng: &mut impl Rng) -> GdsLibrary {
    let mut lib = GdsLibrary::new(random_name(rng));
    let mut names: Vec<String> = (0..rng.gen_range(1..6)).map(|_| random_name(rng)).collect();
    names.sort();
    names.dedup();
    for name in &names {
        let mut elements = Vec::new();
        for _ in 0..rng.gen_range(0..12) {
            let e = match rng.gen_range(0..3) {
                0 => {
                    let mut pts: Vec<Point> = (0..rng.gen_range(3..40)).map(|_| random_point(rng)).collect();
                    pts.push(pts[0]);
                    GdsElement::Boundary {
                        layer: rng.gen_range(0..256),
                        datatype: rng.gen_range(0..256),
                        points: pts,
                    }
                }
                1 => GdsElement::Path {
                    layer: rng.gen_range(0..256),
                    datatype: rng.gen_range(0..256),
                    pathtype: 0,
                    width: rng.gen_range(0..100_000),
                    points: (0..rng.gen_range(2..20)).map(|_| random_point(rng)).collect(),
                },
                _ => GdsElement::Sref {
                    name: names.choose(rng).unwrap().clone(),
                    transform: Transform {
                        translation: random_point(rng),
                        rotation: *Rotation::ALL.choose(rng).unwrap(),
                        mirror_x: rng.gen(),
                    },
                },
            };
            elements.push(e);
        }
        lib.structures.push(GdsStructure {
            name: name.clone(),
            elements,
        });
    }
    lib
}

/// Shape count per layer.
pub fn layer_counts<'a>(shapes: impl Iterator<Item = &'a Shape>) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for s in shapes {
        *m.entry(s.layer.clone()).or_default() += 1;
    }
    m
}
