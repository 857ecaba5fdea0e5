// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use crate::geometry::{snap_down, Coord, Geometry, Rect, Shape};
use crate::interact::{AbutmentSpec, StretchHandle};
use crate::techdb::{RuleKind, TechnologyData};

use super::{CellLayout, ConnectionKind, ConstructionStep, DeviceParams, PcellError};

/// Contact cuts centered in `region`, keeping the diffusion enclosure margin
/// on every side.
pub fn contact_array(region: &Rect, tech: &TechnologyData) -> Result<Vec<Rect>, PcellError> {
    let enc = tech.rule(RuleKind::MinEnclosure, &["diff", "cont"])?;
    contact_array_with_margins(region, enc, enc, tech)
}

/// Contact cuts centered in `region` with explicit x and y margins.
pub fn contact_array_with_margins(
    region: &Rect,
    margin_x: Coord,
    margin_y: Coord,
    tech: &TechnologyData,
) -> Result<Vec<Rect>, PcellError> {
    let c = tech.constant("cont_size")?;
    let s = tech.rule(RuleKind::MinSpacing, &["cont"])?;
    let cols = (region.width() - 2 * margin_x + s).div_euclid(c + s);
    let rows = (region.height() - 2 * margin_y + s).div_euclid(c + s);
    if cols < 1 || rows < 1 {
        return Err(PcellError::GeometryInfeasible(format!(
            "region {}x{} too small for a contact",
            region.width(),
            region.height()
        )));
    }
    let used = |n: Coord| n * c + (n - 1) * s;
    let x0 = region.lo.x + snap_down((region.width() - used(cols)) / 2, tech.grid);
    let y0 = region.lo.y + snap_down((region.height() - used(rows)) / 2, tech.grid);
    let mut out = Vec::with_capacity((rows * cols) as usize);
    for j in 0..rows {
        for i in 0..cols {
            let x = x0 + i * (c + s);
            let y = y0 + j * (c + s);
            out.push(Rect::new(x, y, x + c, y + c));
        }
    }
    Ok(out)
}

/// Drift wells under a high-voltage drain: the shallow well extends the
/// drain by `drift_ext`, the deep well encloses the shallow one.
pub fn well_stack(drain_region: &Rect, tech: &TechnologyData) -> Result<Vec<Shape>, PcellError> {
    let shallow = drain_region.expand(tech.constant("drift_ext")?);
    let deep = shallow.expand(tech.rule(RuleKind::MinEnclosure, &["pwell_deep", "pwell_shallow"])?);
    Ok(vec![Shape::rect("pwell_shallow", shallow), Shape::rect("pwell_deep", deep)])
}

pub(crate) fn ring(layer: &str, hole: &Rect, width: Coord) -> Shape {
    Shape::new(
        layer,
        Geometry::Holed {
            outer: hole.expand(width).to_polygon(),
            hole: hole.to_polygon(),
        },
    )
}

/// Diffusion ring with contacts on all four sides and a matching metal ring.
pub(crate) struct ContactRing {
    pub diff: Shape,
    pub contacts: Vec<Shape>,
    pub metal: Shape,
}

pub(crate) fn contact_ring(hole: &Rect, width: Coord, tech: &TechnologyData) -> Result<ContactRing, PcellError> {
    let outer = hole.expand(width);
    let strips = [
        Rect::new(outer.lo.x, outer.lo.y, outer.hi.x, hole.lo.y),
        Rect::new(outer.lo.x, hole.hi.y, outer.hi.x, outer.hi.y),
        Rect::new(outer.lo.x, hole.lo.y, hole.lo.x, hole.hi.y),
        Rect::new(hole.hi.x, hole.lo.y, outer.hi.x, hole.hi.y),
    ];
    let enc = tech.rule(RuleKind::MinEnclosure, &["diff", "cont"])?;
    let mut contacts = Vec::new();
    for strip in &strips {
        for r in contact_array_with_margins(strip, enc, enc, tech)? {
            contacts.push(Shape::rect("cont", r));
        }
    }
    Ok(ContactRing {
        diff: ring("diff", hole, width),
        contacts,
        metal: ring("met1", hole, width),
    })
}

/// Guard ring around `core_bbox` for a named style; style `none` yields no
/// shapes.
pub fn guard_ring(core_bbox: &Rect, style: &str, tech: &TechnologyData) -> Result<Vec<Shape>, PcellError> {
    if style.is_empty() || style.eq_ignore_ascii_case("none") {
        return Ok(Vec::new());
    }
    let style = style.to_ascii_lowercase();
    let space = tech.constant(&format!("guard_{style}_space"))?;
    let width = tech.constant(&format!("guard_{style}_width"))?;
    let imp = tech.rule(RuleKind::MinEnclosure, &["pimp", "diff"])?;
    let hole = core_bbox.expand(space);
    let r = contact_ring(&hole, width, tech)?;
    let mut out = vec![r.diff];
    out.extend(r.contacts);
    out.push(r.metal);
    out.push(ring("pimp", &hole.expand(-imp), width + 2 * imp));
    Ok(out)
}

/// Accumulates shapes, pins and groups while a generator runs.
pub(crate) struct Builder {
    pub shapes: Vec<Shape>,
    pub pins: BTreeMap<String, Vec<usize>>,
    pub groups: BTreeMap<String, Vec<usize>>,
    pub steps: Vec<ConstructionStep>,
    group: Option<String>,
}

impl Builder {
    pub fn new() -> Self {
        Self {
            shapes: Vec::new(),
            pins: BTreeMap::new(),
            groups: BTreeMap::new(),
            steps: Vec::new(),
            group: None,
        }
    }

    pub fn group(&mut self, name: &str) {
        self.groups.entry(name.to_string()).or_default();
        self.group = Some(name.to_string());
    }

    pub fn step(&mut self, step: ConstructionStep) {
        self.steps.push(step);
    }

    pub fn push(&mut self, shape: Shape) -> usize {
        let idx = self.shapes.len();
        self.shapes.push(shape);
        if let Some(g) = &self.group {
            self.groups.get_mut(g).expect("group opened").push(idx);
        }
        idx
    }

    pub fn rect(&mut self, layer: &str, r: Rect) -> usize {
        self.push(Shape::rect(layer, r))
    }

    /// Adds a shape that belongs to a terminal.
    pub fn pin(&mut self, pin: &str, shape: Shape) -> usize {
        let idx = self.push(shape.with_net(pin));
        self.pins.entry(pin.to_string()).or_default().push(idx);
        idx
    }

    pub fn pin_rect(&mut self, pin: &str, layer: &str, r: Rect) -> usize {
        self.pin(pin, Shape::rect(layer, r))
    }

    /// Adds a device body shape that does not conduct between terminals.
    pub fn body(&mut self, shape: Shape) -> usize {
        let idx = self.push(shape);
        self.groups.entry("body".to_string()).or_default().push(idx);
        idx
    }

    pub fn contacts(&mut self, pin: &str, cuts: &[Rect]) {
        for c in cuts {
            self.pin_rect(pin, "cont", *c);
        }
    }

    pub fn finish(
        self,
        params: &DeviceParams,
        connection_kind: BTreeMap<String, ConnectionKind>,
        handles: Vec<StretchHandle>,
        abut_specs: Vec<AbutmentSpec>,
        properties: BTreeMap<String, Coord>,
    ) -> CellLayout {
        CellLayout {
            name: String::new(),
            params: params.clone(),
            shapes: self.shapes,
            pins: self.pins,
            connection_kind,
            handles,
            abut_specs,
            groups: self.groups,
            steps: self.steps,
            edges: Default::default(),
            properties,
        }
    }
}

pub(crate) fn bbox_of_rects(rects: &[Rect]) -> Option<Rect> {
    rects.iter().copied().reduce(|a, b| a.union(&b))
}
