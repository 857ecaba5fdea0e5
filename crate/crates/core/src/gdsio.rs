// SPDX-License-Identifier: Apache-2.0

//! GDSII stream reading and writing.
//!
//! Only the subset needed for device cells is supported: boundaries, paths
//! and structure references with 90-degree rotations. Units are fixed at
//! 1 nm database units and 1 µm user units.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{apply_transform, manhattan_path, Coord, Geometry, Point, Polygon, Rotation, Shape, Transform};
use crate::pcell::CellLayout;
use crate::techdb::TechnologyData;
use crate::verify::Design;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GdsError {
    #[error("truncated record at byte {0}")]
    TruncatedRecord(usize),
    #[error("stream does not start with a HEADER record")]
    BadMagic,
    #[error("unsupported element: {0}")]
    UnsupportedElement(String),
    #[error("unexpected record 0x{record:04x} at byte {offset}")]
    UnexpectedRecord { record: u16, offset: usize },
    #[error("name `{0}` longer than 32 characters")]
    NameTooLong(String),
    #[error("invalid structure name `{0}`")]
    InvalidName(String),
    #[error("coordinate {0} does not fit in 32 bits")]
    CoordinateOverflow(Coord),
    #[error("layer `{0}` has no GDS mapping")]
    UnmappedLayer(String),
    #[error("unknown structure `{0}`")]
    UnknownStructure(String),
}

mod rec {
    pub const HEADER: u16 = 0x0002;
    pub const BGNLIB: u16 = 0x0102;
    pub const LIBNAME: u16 = 0x0206;
    pub const UNITS: u16 = 0x0305;
    pub const ENDLIB: u16 = 0x0400;
    pub const BGNSTR: u16 = 0x0502;
    pub const STRNAME: u16 = 0x0606;
    pub const ENDSTR: u16 = 0x0700;
    pub const BOUNDARY: u16 = 0x0800;
    pub const PATH: u16 = 0x0900;
    pub const SREF: u16 = 0x0A00;
    pub const AREF: u16 = 0x0B00;
    pub const TEXT: u16 = 0x0C00;
    pub const LAYER: u16 = 0x0D02;
    pub const DATATYPE: u16 = 0x0E02;
    pub const WIDTH: u16 = 0x0F03;
    pub const XY: u16 = 0x1003;
    pub const ENDEL: u16 = 0x1100;
    pub const SNAME: u16 = 0x1206;
    pub const NODE: u16 = 0x1500;
    pub const STRANS: u16 = 0x1A01;
    pub const MAG: u16 = 0x1B05;
    pub const ANGLE: u16 = 0x1C05;
    pub const PATHTYPE: u16 = 0x2102;
    pub const BOX: u16 = 0x2D00;
}

const GDS_VERSION: i16 = 600;
const USER_UNIT: f64 = 1e-3;
const DB_UNIT: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GdsElement {
    /// Closed polygon; `points` repeats the first vertex at the end.
    Boundary {
        layer: i16,
        datatype: i16,
        points: Vec<Point>,
    },
    Path {
        layer: i16,
        datatype: i16,
        pathtype: i16,
        width: Coord,
        points: Vec<Point>,
    },
    Sref {
        name: String,
        transform: Transform,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GdsStructure {
    pub name: String,
    pub elements: Vec<GdsElement>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GdsLibrary {
    pub name: String,
    pub user_unit: f64,
    pub db_unit: f64,
    pub structures: Vec<GdsStructure>,
}

impl GdsLibrary {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            user_unit: USER_UNIT,
            db_unit: DB_UNIT,
            structures: Vec::new(),
        }
    }

    pub fn structure(&self, name: &str) -> Option<&GdsStructure> {
        self.structures.iter().find(|s| s.name == name)
    }

    /// Structures not referenced by any other structure.
    pub fn top_structures(&self) -> Vec<&GdsStructure> {
        let referenced: BTreeSet<&str> = self
            .structures
            .iter()
            .flat_map(|s| &s.elements)
            .filter_map(|e| match e {
                GdsElement::Sref { name, .. } => Some(name.as_str()),
                _ => None,
            })
            .collect();
        self.structures
            .iter()
            .filter(|s| !referenced.contains(s.name.as_str()))
            .collect()
    }
}

/// Encodes an 8-byte excess-64 base-16 real.
pub fn encode_real8(v: f64) -> [u8; 8] {
    if v == 0.0 {
        return [0; 8];
    }
    let sign = if v < 0.0 { 0x80u8 } else { 0 };
    let mut m = v.abs();
    let mut exp: i32 = 64;
    while m >= 1.0 {
        m /= 16.0;
        exp += 1;
    }
    while m < 1.0 / 16.0 {
        m *= 16.0;
        exp -= 1;
    }
    let mut mant = (m * (1u64 << 56) as f64).round() as u64;
    if mant >= 1u64 << 56 {
        mant >>= 4;
        exp += 1;
    }
    let mut out = [0u8; 8];
    out[0] = sign | (exp as u8 & 0x7f);
    out[1..].copy_from_slice(&mant.to_be_bytes()[1..]);
    out
}

pub fn decode_real8(b: [u8; 8]) -> f64 {
    let sign = if b[0] & 0x80 != 0 { -1.0 } else { 1.0 };
    let exp = (b[0] & 0x7f) as i32 - 64;
    let mut mb = [0u8; 8];
    mb[1..].copy_from_slice(&b[1..]);
    let mant = u64::from_be_bytes(mb) as f64 / (1u64 << 56) as f64;
    sign * mant * 16f64.powi(exp)
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn record(&mut self, rt: u16, data: &[u8]) {
        let len = (data.len() + 4) as u16;
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(&rt.to_be_bytes());
        self.buf.extend_from_slice(data);
    }

    fn i16s(&mut self, rt: u16, v: &[i16]) {
        let d: Vec<u8> = v.iter().flat_map(|x| x.to_be_bytes()).collect();
        self.record(rt, &d);
    }

    fn string(&mut self, rt: u16, s: &str) {
        let mut d = s.as_bytes().to_vec();
        if d.len() % 2 == 1 {
            d.push(0);
        }
        self.record(rt, &d);
    }

    fn xy(&mut self, pts: &[Point]) -> Result<(), GdsError> {
        let mut d = Vec::with_capacity(pts.len() * 8);
        for p in pts {
            for v in [p.x, p.y] {
                let v32 = i32::try_from(v).map_err(|_| GdsError::CoordinateOverflow(v))?;
                d.extend_from_slice(&v32.to_be_bytes());
            }
        }
        self.record(rec::XY, &d);
        Ok(())
    }
}

fn check_name(name: &str) -> Result<(), GdsError> {
    if name.len() > 32 {
        return Err(GdsError::NameTooLong(name.to_string()));
    }
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_') {
        return Err(GdsError::InvalidName(name.to_string()));
    }
    Ok(())
}

const EPOCH: [i16; 12] = [1970, 1, 1, 0, 0, 0, 1970, 1, 1, 0, 0, 0];

/// Serializes a library to GDSII bytes.
pub fn write_gds(lib: &GdsLibrary) -> Result<Vec<u8>, GdsError> {
    let mut w = Writer { buf: Vec::new() };
    w.i16s(rec::HEADER, &[GDS_VERSION]);
    w.i16s(rec::BGNLIB, &EPOCH);
    if lib.name.len() > 32 {
        return Err(GdsError::NameTooLong(lib.name.clone()));
    }
    w.string(rec::LIBNAME, &lib.name);
    let mut units = encode_real8(lib.user_unit).to_vec();
    units.extend(encode_real8(lib.db_unit));
    w.record(rec::UNITS, &units);
    for s in &lib.structures {
        check_name(&s.name)?;
        w.i16s(rec::BGNSTR, &EPOCH);
        w.string(rec::STRNAME, &s.name);
        for e in &s.elements {
            match e {
                GdsElement::Boundary { layer, datatype, points } => {
                    w.record(rec::BOUNDARY, &[]);
                    w.i16s(rec::LAYER, &[*layer]);
                    w.i16s(rec::DATATYPE, &[*datatype]);
                    w.xy(points)?;
                }
                GdsElement::Path {
                    layer,
                    datatype,
                    pathtype,
                    width,
                    points,
                } => {
                    w.record(rec::PATH, &[]);
                    w.i16s(rec::LAYER, &[*layer]);
                    w.i16s(rec::DATATYPE, &[*datatype]);
                    w.i16s(rec::PATHTYPE, &[*pathtype]);
                    let w32 = i32::try_from(*width).map_err(|_| GdsError::CoordinateOverflow(*width))?;
                    w.record(rec::WIDTH, &w32.to_be_bytes());
                    w.xy(points)?;
                }
                GdsElement::Sref { name, transform } => {
                    check_name(name)?;
                    w.record(rec::SREF, &[]);
                    w.string(rec::SNAME, name);
                    if transform.mirror_x || transform.rotation != Rotation::R0 {
                        let flags: u16 = if transform.mirror_x { 0x8000 } else { 0 };
                        w.record(rec::STRANS, &flags.to_be_bytes());
                        if transform.rotation != Rotation::R0 {
                            w.record(rec::ANGLE, &encode_real8(transform.rotation.degrees()));
                        }
                    }
                    w.xy(&[transform.translation])?;
                }
            }
            w.record(rec::ENDEL, &[]);
        }
        w.record(rec::ENDSTR, &[]);
    }
    w.record(rec::ENDLIB, &[]);
    Ok(w.buf)
}

struct Record<'a> {
    rt: u16,
    data: &'a [u8],
    offset: usize,
}

impl Record<'_> {
    fn i16(&self) -> Result<i16, GdsError> {
        self.data
            .get(..2)
            .map(|b| i16::from_be_bytes([b[0], b[1]]))
            .ok_or(GdsError::TruncatedRecord(self.offset))
    }

    fn i32(&self) -> Result<i32, GdsError> {
        self.data
            .get(..4)
            .map(|b| i32::from_be_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or(GdsError::TruncatedRecord(self.offset))
    }

    fn real(&self, k: usize) -> Result<f64, GdsError> {
        let b = self.data.get(k * 8..k * 8 + 8).ok_or(GdsError::TruncatedRecord(self.offset))?;
        Ok(decode_real8(b.try_into().expect("eight bytes")))
    }

    fn string(&self) -> String {
        let end = self.data.iter().position(|&b| b == 0).unwrap_or(self.data.len());
        String::from_utf8_lossy(&self.data[..end]).into_owned()
    }

    fn points(&self) -> Result<Vec<Point>, GdsError> {
        if !self.data.len().is_multiple_of(8) {
            return Err(GdsError::TruncatedRecord(self.offset));
        }
        Ok(self
            .data
            .chunks_exact(8)
            .map(|c| {
                let x = i32::from_be_bytes([c[0], c[1], c[2], c[3]]);
                let y = i32::from_be_bytes([c[4], c[5], c[6], c[7]]);
                Point::new(x as Coord, y as Coord)
            })
            .collect())
    }
}

fn records(bytes: &[u8]) -> Result<Vec<Record<'_>>, GdsError> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        if bytes.len() - pos < 4 {
            // Trailing zero padding after ENDLIB is allowed.
            if bytes[pos..].iter().all(|&b| b == 0) && out.last().is_some_and(|r: &Record| r.rt == rec::ENDLIB) {
                break;
            }
            return Err(GdsError::TruncatedRecord(pos));
        }
        let len = u16::from_be_bytes([bytes[pos], bytes[pos + 1]]) as usize;
        if len == 0 && out.last().is_some_and(|r: &Record| r.rt == rec::ENDLIB) {
            break;
        }
        if len < 4 || len % 2 == 1 || pos + len > bytes.len() {
            return Err(GdsError::TruncatedRecord(pos));
        }
        let rt = u16::from_be_bytes([bytes[pos + 2], bytes[pos + 3]]);
        out.push(Record {
            rt,
            data: &bytes[pos + 4..pos + len],
            offset: pos,
        });
        pos += len;
        if rt == rec::ENDLIB {
            break;
        }
    }
    Ok(out)
}

#[derive(Default)]
struct ElementState {
    kind: u16,
    layer: i16,
    datatype: i16,
    pathtype: i16,
    width: Coord,
    sname: String,
    mirror: bool,
    angle: f64,
    points: Vec<Point>,
}

/// Parses GDSII bytes.
pub fn read_gds(bytes: &[u8]) -> Result<GdsLibrary, GdsError> {
    let recs = records(bytes)?;
    if recs.first().map(|r| r.rt) != Some(rec::HEADER) {
        return Err(GdsError::BadMagic);
    }
    let mut lib = GdsLibrary::new("");
    let mut current: Option<GdsStructure> = None;
    let mut el: Option<ElementState> = None;
    let mut ended = false;
    for r in &recs[1..] {
        match r.rt {
            rec::BGNLIB | rec::HEADER => {}
            rec::LIBNAME => lib.name = r.string(),
            rec::UNITS => {
                lib.user_unit = r.real(0)?;
                lib.db_unit = r.real(1)?;
            }
            rec::BGNSTR => {
                current = Some(GdsStructure {
                    name: String::new(),
                    elements: Vec::new(),
                })
            }
            rec::STRNAME => {
                if let Some(s) = current.as_mut() {
                    s.name = r.string();
                }
            }
            rec::ENDSTR => {
                let s = current.take().ok_or(GdsError::UnexpectedRecord { record: r.rt, offset: r.offset })?;
                lib.structures.push(s);
            }
            rec::BOUNDARY | rec::PATH | rec::SREF => {
                if current.is_none() || el.is_some() {
                    return Err(GdsError::UnexpectedRecord { record: r.rt, offset: r.offset });
                }
                el = Some(ElementState {
                    kind: r.rt,
                    ..Default::default()
                });
            }
            rec::AREF => return Err(GdsError::UnsupportedElement("AREF".into())),
            rec::TEXT => return Err(GdsError::UnsupportedElement("TEXT".into())),
            rec::NODE => return Err(GdsError::UnsupportedElement("NODE".into())),
            rec::BOX => return Err(GdsError::UnsupportedElement("BOX".into())),
            rec::LAYER | rec::DATATYPE | rec::PATHTYPE | rec::WIDTH | rec::XY | rec::SNAME | rec::STRANS | rec::MAG | rec::ANGLE => {
                let e = el
                    .as_mut()
                    .ok_or(GdsError::UnexpectedRecord { record: r.rt, offset: r.offset })?;
                match r.rt {
                    rec::LAYER => e.layer = r.i16()?,
                    rec::DATATYPE => e.datatype = r.i16()?,
                    rec::PATHTYPE => e.pathtype = r.i16()?,
                    rec::WIDTH => e.width = r.i32()? as Coord,
                    rec::XY => e.points = r.points()?,
                    rec::SNAME => e.sname = r.string(),
                    rec::STRANS => e.mirror = (r.i16()? as u16) & 0x8000 != 0,
                    rec::MAG => {
                        let m = r.real(0)?;
                        if (m - 1.0).abs() > 1e-12 {
                            return Err(GdsError::UnsupportedElement(format!("magnification {m}")));
                        }
                    }
                    _ => e.angle = r.real(0)?,
                }
            }
            rec::ENDEL => {
                let e = el.take().ok_or(GdsError::UnexpectedRecord { record: r.rt, offset: r.offset })?;
                let s = current.as_mut().expect("element inside structure");
                s.elements.push(finish_element(e)?);
            }
            rec::ENDLIB => ended = true,
            other => log::warn!("skipping GDS record 0x{other:04x} at byte {}", r.offset),
        }
    }
    if !ended {
        return Err(GdsError::TruncatedRecord(bytes.len()));
    }
    Ok(lib)
}

fn finish_element(e: ElementState) -> Result<GdsElement, GdsError> {
    Ok(match e.kind {
        rec::BOUNDARY => GdsElement::Boundary {
            layer: e.layer,
            datatype: e.datatype,
            points: e.points,
        },
        rec::PATH => GdsElement::Path {
            layer: e.layer,
            datatype: e.datatype,
            pathtype: e.pathtype,
            width: e.width,
            points: e.points,
        },
        _ => {
            let turns = e.angle / 90.0;
            if (turns - turns.round()).abs() > 1e-9 {
                return Err(GdsError::UnsupportedElement(format!("rotation {}", e.angle)));
            }
            let origin = *e
                .points
                .first()
                .ok_or_else(|| GdsError::UnsupportedElement("SREF without origin".into()))?;
            GdsElement::Sref {
                name: e.sname,
                transform: Transform {
                    translation: origin,
                    rotation: Rotation::from_quarter_turns(turns.round() as i64),
                    mirror_x: e.mirror,
                },
            }
        }
    })
}

/// Single closed ring for a shape with a hole: the cut runs from the hole's
/// lowest-leftmost vertex straight down to the outer ring.
pub fn keyhole(outer: &Polygon, hole: &Polygon) -> Vec<Point> {
    let outer = outer.to_ccw();
    let hole = hole.to_ccw().reversed();
    let hv = hole.vertices();
    let start = (0..hv.len()).min_by_key(|&i| (hv[i].y, hv[i].x)).expect("hole has vertices");
    let h = hv[start];
    let ov = outer.vertices();
    // Closest outer edge crossed by the downward ray from `h`.
    let mut best: Option<(usize, Coord)> = None;
    for i in 0..ov.len() {
        let (a, b) = (ov[i], ov[(i + 1) % ov.len()]);
        if a.x == b.x || h.x < a.x.min(b.x) || h.x > a.x.max(b.x) {
            continue;
        }
        let t_num = (h.x - a.x) as i128;
        let t_den = (b.x - a.x) as i128;
        let y = a.y as i128 + (b.y - a.y) as i128 * t_num / t_den;
        let y = y as Coord;
        if y <= h.y && best.is_none_or(|(_, by)| y > by) {
            best = Some((i, y));
        }
    }
    let (edge, y) = best.expect("hole lies inside the outer ring");
    let o = Point::new(h.x, y);
    let mut pts = Vec::with_capacity(ov.len() + hv.len() + 4);
    pts.extend_from_slice(&ov[..=edge]);
    pts.push(o);
    for k in 0..=hv.len() {
        pts.push(hv[(start + k) % hv.len()]);
    }
    pts.push(o);
    pts.extend_from_slice(&ov[edge + 1..]);
    pts.dedup();
    pts
}

/// Splits a keyhole ring back into outer ring and hole.
pub fn split_keyhole(points: &[Point]) -> Option<(Polygon, Polygon)> {
    let n = points.len();
    for a in 0..n {
        for b in (a + 3..n).rev() {
            if points[a] == points[b] && points[a + 1] == points[b - 1] {
                let mut outer: Vec<Point> = points[..=a].to_vec();
                outer.extend_from_slice(&points[b + 1..]);
                let hole = &points[a + 1..b - 1];
                return Some((Polygon::new(outer).ok()?, Polygon::new(hole.iter().copied()).ok()?));
            }
        }
    }
    None
}

fn closed(mut pts: Vec<Point>) -> Vec<Point> {
    if let Some(&first) = pts.first() {
        pts.push(first);
    }
    pts
}

/// Boundary element for one shape.
pub fn shape_element(shape: &Shape, tech: &TechnologyData) -> Result<GdsElement, GdsError> {
    let layer = tech
        .layer(&shape.layer)
        .map_err(|_| GdsError::UnmappedLayer(shape.layer.clone()))?;
    let pts = match &shape.geometry {
        Geometry::Holed { outer, hole } => keyhole(outer, hole),
        _ => shape.rings().0.to_ccw().vertices().to_vec(),
    };
    Ok(GdsElement::Boundary {
        layer: layer.gds_layer,
        datatype: layer.gds_datatype,
        points: closed(pts),
    })
}

fn cell_structure(cell: &CellLayout, tech: &TechnologyData) -> Result<GdsStructure, GdsError> {
    Ok(GdsStructure {
        name: cell.name.clone(),
        elements: cell
            .shapes
            .iter()
            .map(|s| shape_element(s, tech))
            .collect::<Result<_, _>>()?,
    })
}

/// Library holding one structure for the cell.
pub fn export_cell(cell: &CellLayout, tech: &TechnologyData) -> Result<GdsLibrary, GdsError> {
    let mut lib = GdsLibrary::new("HVCELL");
    lib.structures.push(cell_structure(cell, tech)?);
    Ok(lib)
}

/// Library with one structure per distinct cell and a top structure that
/// references them and holds the wires.
pub fn export_design(design: &Design, top: &str, tech: &TechnologyData) -> Result<GdsLibrary, GdsError> {
    check_name(top)?;
    let mut lib = GdsLibrary::new("HVCELL");
    let mut seen = BTreeSet::new();
    let mut top_elements = Vec::new();
    for inst in &design.instances {
        if seen.insert(inst.cell.name.clone()) {
            lib.structures.push(cell_structure(&inst.cell, tech)?);
        }
        top_elements.push(GdsElement::Sref {
            name: inst.cell.name.clone(),
            transform: inst.transform,
        });
    }
    for w in &design.wires {
        top_elements.push(shape_element(w, tech)?);
    }
    lib.structures.push(GdsStructure {
        name: top.to_string(),
        elements: top_elements,
    });
    Ok(lib)
}

fn element_shape(e: &GdsElement, tech: &TechnologyData) -> Result<Option<Shape>, GdsError> {
    let name = |l: i16, d: i16| {
        tech.layer_by_gds(l, d)
            .map(|x| x.name.clone())
            .unwrap_or_else(|| format!("L{l}D{d}"))
    };
    Ok(match e {
        GdsElement::Boundary { layer, datatype, points } => {
            let mut pts = points.clone();
            if pts.len() > 1 && pts.first() == pts.last() {
                pts.pop();
            }
            let geometry = match split_keyhole(&pts) {
                Some((outer, hole)) => Geometry::Holed { outer, hole },
                None => {
                    let p = Polygon::new(pts).map_err(|e| GdsError::UnsupportedElement(e.to_string()))?;
                    let bb = p.bbox();
                    if p.vertices().len() == 4 && p.twice_area().abs() == 2 * bb.area() {
                        Geometry::Rect(bb)
                    } else {
                        Geometry::Polygon(p)
                    }
                }
            };
            Some(Shape::new(name(*layer, *datatype), geometry))
        }
        GdsElement::Path {
            layer,
            datatype,
            pathtype,
            width,
            points,
        } => {
            if *pathtype != 0 {
                return Err(GdsError::UnsupportedElement(format!("path type {pathtype}")));
            }
            let g = manhattan_path(points, *width).map_err(|e| GdsError::UnsupportedElement(e.to_string()))?;
            Some(Shape::new(name(*layer, *datatype), g))
        }
        GdsElement::Sref { .. } => None,
    })
}

/// Flattens a structure and its references into shapes, naming layers
/// through the technology (unknown pairs become `L<layer>D<datatype>`).
pub fn flatten_structure(lib: &GdsLibrary, top: &str, tech: &TechnologyData) -> Result<Vec<Shape>, GdsError> {
    let by_name: HashMap<&str, &GdsStructure> = lib.structures.iter().map(|s| (s.name.as_str(), s)).collect();
    let mut out = Vec::new();
    let mut stack = vec![(top.to_string(), Transform::identity(), 0usize)];
    while let Some((name, t, depth)) = stack.pop() {
        if depth > 64 {
            return Err(GdsError::UnsupportedElement("reference depth above 64".into()));
        }
        let s = by_name
            .get(name.as_str())
            .ok_or_else(|| GdsError::UnknownStructure(name.clone()))?;
        for e in &s.elements {
            match e {
                GdsElement::Sref { name, transform } => stack.push((name.clone(), transform.then(&t), depth + 1)),
                _ => {
                    if let Some(shape) = element_shape(e, tech)? {
                        out.push(apply_transform(&shape, &t));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{octagon_with_hole, Rect};

    #[test]
    fn real8_round_trip() {
        for v in [1e-3, 1e-9, 1.0, 90.0, 270.0, -2.5, 0.0, 123456.789] {
            assert_eq!(decode_real8(encode_real8(v)), v, "{v}");
        }
        assert_eq!(encode_real8(1.0), [0x41, 0x10, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn names_are_validated() {
        let mut lib = GdsLibrary::new("L");
        lib.structures.push(GdsStructure {
            name: "A".repeat(33),
            elements: vec![],
        });
        assert!(matches!(write_gds(&lib), Err(GdsError::NameTooLong(_))));
        lib.structures[0].name = "lower".into();
        assert!(matches!(write_gds(&lib), Err(GdsError::InvalidName(_))));
    }

    #[test]
    fn keyhole_area_and_split() {
        let s = octagon_with_hole("poly1", Rect::new(0, 0, 10000, 10000), Rect::new(4000, 4000, 6000, 6000), 2000, 0).unwrap();
        let Geometry::Holed { outer, hole } = &s.geometry else { unreachable!() };
        let k = keyhole(outer, hole);
        let p = Polygon::new(k.clone()).unwrap();
        assert_eq!(p.twice_area().abs(), 2 * 88_000_000);
        let (o, h) = split_keyhole(&k).unwrap();
        assert_eq!(o.twice_area().abs(), outer.twice_area().abs());
        assert_eq!(h.twice_area().abs(), hole.twice_area().abs());
    }

    #[test]
    fn coordinate_overflow() {
        let mut lib = GdsLibrary::new("L");
        lib.structures.push(GdsStructure {
            name: "A".into(),
            elements: vec![GdsElement::Boundary {
                layer: 1,
                datatype: 0,
                points: vec![Point::new(0, 0), Point::new(1 << 40, 0), Point::new(0, 5), Point::new(0, 0)],
            }],
        });
        assert_eq!(write_gds(&lib), Err(GdsError::CoordinateOverflow(1 << 40)));
    }

    #[test]
    fn bad_streams() {
        assert_eq!(read_gds(&[0, 6, 1, 2, 0, 0]), Err(GdsError::BadMagic));
        assert!(matches!(read_gds(&[0, 6, 0, 2, 2]), Err(GdsError::TruncatedRecord(_))));
        let mut ok = write_gds(&GdsLibrary::new("X")).unwrap();
        ok.truncate(ok.len() - 4);
        assert!(matches!(read_gds(&ok), Err(GdsError::TruncatedRecord(_))));
    }
}
