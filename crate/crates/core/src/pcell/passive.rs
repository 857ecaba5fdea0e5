// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use crate::geometry::{manhattan_path, snap_down, snap_up, Coord, Point, Rect, Shape};
use crate::interact::{HandlePosition, StretchAxis, StretchHandle, StretchType};
use crate::techdb::{RuleKind, TechnologyData};

use super::common::{bbox_of_rects, contact_array_with_margins, Builder};
use super::{CellLayout, ConnectionKind, ConstructionStep as Step, DeviceParams, GeneratorSpec, PcellError};

fn metal_pins() -> BTreeMap<String, ConnectionKind> {
    ["PLUS", "MINUS"]
        .iter()
        .map(|p| (p.to_string(), ConnectionKind::StrongMetal))
        .collect()
}

/// Centerline of a snake resistor with `bends` bends and total length `l`.
///
/// Runs alternate direction along x and are joined by jogs of length
/// `pitch` along y. All runs but the last share one length; the last one
/// absorbs the remainder so the centerline length is exactly `l`.
pub fn snake_centerline(
    l: Coord,
    bends: u32,
    pitch: Coord,
    min_run: Coord,
    grid: Coord,
) -> Result<Vec<Point>, PcellError> {
    let segments = bends as Coord + 1;
    let runs = (segments + 1) / 2;
    let jogs = segments - runs;
    let run_total = l - jogs * pitch;
    if run_total < runs * min_run {
        return Err(PcellError::GeometryInfeasible(format!(
            "length {l} too short for {bends} bends (needs {})",
            runs * min_run + jogs * pitch
        )));
    }
    let run = snap_down(run_total / runs, grid);
    let last = run_total - (runs - 1) * run;
    let mut pts = vec![Point::new(0, 0)];
    let (mut x, mut y, mut dir) = (0, 0, 1);
    let mut run_idx = 0;
    for s in 0..segments {
        if s % 2 == 0 {
            run_idx += 1;
            x += dir * if run_idx == runs { last } else { run };
        } else {
            y += pitch;
            dir = -dir;
        }
        pts.push(Point::new(x, y));
    }
    Ok(pts)
}

/// Square head of side `s` at a path end, extending away from the body.
fn head(end: Point, toward: Point, s: Coord) -> Rect {
    let (dx, dy) = ((end.x - toward.x).signum(), (end.y - toward.y).signum());
    // Left normal of the outward direction.
    let (nx, ny) = (-dy, dx);
    let a = Point::new(end.x + nx * (s / 2), end.y + ny * (s / 2));
    let b = Point::new(
        end.x - nx * (s - s / 2) + dx * s,
        end.y - ny * (s - s / 2) + dy * s,
    );
    Rect::from_points(a, b)
}

/// Poly snake resistor with contacted heads at both ends.
pub(super) fn resistor(_spec: &GeneratorSpec, p: &DeviceParams, tech: &TechnologyData) -> Result<CellLayout, PcellError> {
    let cont = tech.constant("cont_size")?;
    let enc = tech.rule(RuleKind::MinEnclosure, &["poly1", "cont"])?;
    let menc = tech.rule(RuleKind::MinEnclosure, &["met1", "cont"])?;
    let space = tech.rule(RuleKind::MinSpacing, &["poly1"])?;
    let s = snap_up(p.w.max(cont + 2 * enc), 2 * tech.grid);
    let pitch = s + space;
    let pts = snake_centerline(p.l, p.bends, pitch, s + space, tech.grid)?;

    let mut b = Builder::new();
    b.step(Step::ResistorBody);
    b.body(Shape::new("poly1", manhattan_path(&pts, p.w)?));

    b.step(Step::Terminals);
    let n = pts.len();
    for (pin, end, toward) in [("PLUS", pts[0], pts[1]), ("MINUS", pts[n - 1], pts[n - 2])] {
        let h = head(end, toward, s);
        b.pin_rect(pin, "poly1", h);
        let cuts = contact_array_with_margins(&h, enc, enc, tech)?;
        b.contacts(pin, &cuts);
        let cb = bbox_of_rects(&cuts).expect("at least one cut");
        b.pin_rect(pin, "met1", cb.expand(menc));
    }

    let limit = tech.limits(&p.device)?.get("l").copied();
    let handles = vec![StretchHandle {
        name: "length_handle".into(),
        shape_ref: 0,
        position: HandlePosition::TopCenter,
        direction: StretchAxis::NorthSouth,
        stretch_type: StretchType::Relative,
        parameter: "l".into(),
        min_val: limit.map_or(0.0, |l| crate::geometry::to_um(l.min)),
        max_val: limit.map_or(f64::MAX, |l| crate::geometry::to_um(l.max)),
        snap_res: crate::geometry::to_um(tech.grid),
    }];
    let props = BTreeMap::from([("head_size".to_string(), s), ("row_pitch".to_string(), pitch)]);
    Ok(b.finish(p, metal_pins(), handles, Vec::new(), props))
}

/// Poly/metal plate capacitor. The metal top plate (`PLUS`) is `w` by `l`;
/// the poly bottom plate (`MINUS`) extends past it and carries a contacted
/// terminal column on its west side.
pub(super) fn capacitor(_spec: &GeneratorSpec, p: &DeviceParams, tech: &TechnologyData) -> Result<CellLayout, PcellError> {
    let cont = tech.constant("cont_size")?;
    let enc = tech.rule(RuleKind::MinEnclosure, &["poly1", "cont"])?;
    let menc = tech.rule(RuleKind::MinEnclosure, &["met1", "cont"])?;
    let ext = tech.constant("cap_ext")?;
    let term = cont + 2 * enc;

    let mut b = Builder::new();
    b.step(Step::Plates);
    let top = b.pin_rect("PLUS", "met1", Rect::new(0, 0, p.w, p.l));
    b.pin_rect("MINUS", "poly1", Rect::new(-ext - term, -ext, p.w + ext, p.l + ext));

    b.step(Step::Terminals);
    let column = Rect::new(-ext - term, -ext, -ext, p.l + ext);
    let cuts = contact_array_with_margins(&column, enc, enc, tech)?;
    b.contacts("MINUS", &cuts);
    let cb = bbox_of_rects(&cuts).expect("at least one cut");
    b.pin_rect("MINUS", "met1", cb.expand(menc));

    let limit = tech.limits(&p.device)?.get("w").copied();
    let handles = vec![StretchHandle {
        name: "width_handle_right".into(),
        shape_ref: top,
        position: HandlePosition::CenterRight,
        direction: StretchAxis::EastWest,
        stretch_type: StretchType::Relative,
        parameter: "w".into(),
        min_val: limit.map_or(0.0, |l| crate::geometry::to_um(l.min)),
        max_val: limit.map_or(f64::MAX, |l| crate::geometry::to_um(l.max)),
        snap_res: crate::geometry::to_um(tech.grid),
    }];
    Ok(b.finish(p, metal_pins(), handles, Vec::new(), BTreeMap::new()))
}
