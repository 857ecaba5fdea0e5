// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use crate::geometry::{octagon_with_hole, snap_down, Coord, Geometry, Rect, Shape};
use crate::interact::{mos_width_handles, AbutCases, AbutDirection, AbutmentSpec};
use crate::techdb::{RuleKind, TechnologyData};

use super::common::{bbox_of_rects, contact_array_with_margins, contact_ring, guard_ring, ring, well_stack, Builder};
use super::{bbox_of, CellLayout, ConnectionKind, ConstructionStep as Step, DeviceParams, EdgeVariant, EdgeVariants, GeneratorSpec, PcellError};

fn connection_kinds(pins: &[&str]) -> BTreeMap<String, ConnectionKind> {
    pins.iter()
        .map(|&p| {
            let kind = if p == "G" { ConnectionKind::WeakPoly } else { ConnectionKind::StrongMetal };
            (p.to_string(), kind)
        })
        .collect()
}

struct MosRules {
    cont: Coord,
    poly_cont: Coord,
    diff_cont: Coord,
    met_cont: Coord,
    grid: Coord,
}

impl MosRules {
    fn new(tech: &TechnologyData) -> Result<Self, PcellError> {
        Ok(Self {
            cont: tech.constant("cont_size")?,
            poly_cont: tech.rule(RuleKind::MinSpacing, &["poly1", "cont"])?,
            diff_cont: tech.rule(RuleKind::MinEnclosure, &["diff", "cont"])?,
            met_cont: tech.rule(RuleKind::MinEnclosure, &["met1", "cont"])?,
            grid: tech.grid,
        })
    }
}

/// High-voltage PMOS with annular (octagonal) gates around a central drain.
///
/// Each finger is a cell of width `2*col + 2*l + hole` holding a drain
/// opening, the gate ring and two source contact columns. Adjacent fingers
/// share their source metal. Cores (multiplier copies) are placed with
/// touching n-wells so the bars run continuously; one bulk ring surrounds all
/// cores.
pub(super) fn annular(spec: &GeneratorSpec, p: &DeviceParams, tech: &TechnologyData) -> Result<CellLayout, PcellError> {
    let r = MosRules::new(tech)?;
    let (l, w) = (p.l, p.w);
    let f = p.fingers as Coord;
    let corner = tech.constant("p1_corn")?;
    let nwell_enc = tech.rule(RuleKind::MinEnclosure, &["nwell", "diff"])?;
    let pimp_enc = tech.rule(RuleKind::MinEnclosure, &["pimp", "diff"])?;
    let nimp_enc = tech.rule(RuleKind::MinEnclosure, &["nimp", "diff"])?;
    let ns_enc = tech.rule(RuleKind::MinEnclosure, &["nwell_shallow", "diff"])?;
    let tox_enc = tech.rule(RuleKind::MinEnclosure, &["thickox", "poly1"])?;
    let bulk_gap = tech.constant("bulk_gap")?;
    let gox = tech.constant(&format!("gox_{}", spec.voltage_class))?;

    let hole_w = r.cont + 2 * r.poly_cont;
    let col = hole_w;
    let cell_w = 2 * col + 2 * l + hole_w;
    let cell_h = 2 * col + 2 * l + w;
    let pitch = f * cell_w + 2 * nwell_enc;
    let (gy0, gy1) = (col, col + 2 * l + w);
    let sbar = (gy0 - 550, gy0 - 250);
    let dbar = (gy1 + 250, gy1 + 550);
    let pbar = (gy0 - 1050, gy0 - 750);
    let stub_w = 600;

    let mut b = Builder::new();
    let mut first_gate = None;
    let mut thickox = Vec::new();
    for k in 0..p.multiplier as Coord {
        b.group(&format!("core{k}"));
        let cx0 = k * pitch;
        let cx1 = cx0 + pitch;
        let fx = |i: Coord| cx0 + nwell_enc + i * cell_w;
        let record = k == 0;

        if record {
            b.step(Step::Gate);
        }
        let mut gates = Vec::new();
        for i in 0..f {
            let (gx0, gx1) = (fx(i) + col, fx(i) + col + 2 * l + hole_w);
            let hole = Rect::new(gx0 + l, gy0 + l, gx1 - l, gy1 - l);
            let gate = octagon_with_hole("poly1", Rect::new(gx0, gy0, gx1, gy1), hole, corner, 0)?;
            gates.push((gate.clone(), hole));
            let idx = b.pin("G", gate);
            first_gate.get_or_insert(idx);
            let sx = gx0 + snap_down((gx1 - gx0) / 2 - stub_w / 2, r.grid);
            b.pin_rect("G", "poly1", Rect::new(sx, pbar.0, sx + stub_w, gy0 + snap_down(l / 2, r.grid)));
        }
        b.pin_rect("G", "poly1", Rect::new(cx0, pbar.0, cx1, pbar.1));

        if record {
            b.step(Step::Diffusion);
        }
        let mut source_outer = Vec::new();
        for (i, (gate, hole)) in gates.iter().enumerate() {
            let Geometry::Holed { outer: octagon, .. } = &gate.geometry else {
                unreachable!("gate is a holed shape")
            };
            b.pin_rect("D", "diff", *hole);
            b.body(Shape::new(
                "diff",
                Geometry::Holed {
                    outer: octagon.clone(),
                    hole: hole.to_polygon(),
                },
            ));
            let x0 = fx(i as Coord);
            let outer = Rect::new(x0, 0, x0 + cell_w, cell_h);
            source_outer.push(outer);
            b.pin(
                "S",
                Shape::new(
                    "diff",
                    Geometry::Holed {
                        outer: outer.to_polygon(),
                        hole: octagon.clone(),
                    },
                ),
            );
        }

        if record {
            b.step(Step::Contacts);
        }
        let mut s_strips = Vec::new();
        for (i, (_, hole)) in gates.iter().enumerate() {
            let cuts = contact_array_with_margins(hole, r.poly_cont, r.poly_cont, tech)?;
            b.contacts("D", &cuts);
            let cb = bbox_of_rects(&cuts).expect("at least one cut");
            b.pin_rect("D", "met1", Rect::new(cb.lo.x - r.met_cont, cb.lo.y - r.met_cont, cb.hi.x + r.met_cont, dbar.1));
            let x0 = fx(i as Coord);
            let gx0 = x0 + col;
            let gx1 = gx0 + 2 * l + hole_w;
            for region in [Rect::new(x0, gy0, gx0, gy1), Rect::new(gx1, gy0, gx1 + col, gy1)] {
                let cuts = contact_array_with_margins(&region, r.poly_cont, r.poly_cont, tech)?;
                b.contacts("S", &cuts);
                let top = bbox_of_rects(&cuts).expect("at least one cut").hi.y + r.met_cont;
                s_strips.push(Rect::new(region.lo.x, sbar.0, region.hi.x, top));
            }
        }
        for s in s_strips {
            b.pin_rect("S", "met1", s);
        }
        b.pin_rect("S", "met1", Rect::new(cx0, sbar.0, cx1, sbar.1));
        b.pin_rect("D", "met1", Rect::new(cx0, dbar.0, cx1, dbar.1));

        if record {
            b.step(Step::DrainWells);
        }
        for (_, hole) in &gates {
            for s in well_stack(hole, tech)? {
                b.push(s);
            }
        }

        let diff_box = bbox_of_rects(&source_outer).expect("at least one finger");
        if record {
            b.step(Step::BodyWell);
        }
        let nwell = Rect::new(cx0, diff_box.lo.y - nwell_enc, cx1, diff_box.hi.y + nwell_enc);
        b.rect("nwell", nwell);

        if record {
            b.step(Step::Implant);
        }
        b.rect("pimp", diff_box.expand(pimp_enc));
        thickox.push(nwell.expand(tox_enc));
    }

    b.step(Step::BulkRing);
    b.group("bulk_ring");
    let cores = bbox_of_rects(&thickox).expect("at least one core");
    let hole = cores.expand(bulk_gap);
    let ring_w = r.cont + 2 * r.diff_cont;
    let cr = contact_ring(&hole, ring_w, tech)?;
    b.pin("B", cr.diff);
    for c in cr.contacts {
        b.pin("B", c);
    }
    b.pin("B", cr.metal);
    b.push(ring("nimp", &hole.expand(-nimp_enc), ring_w + 2 * nimp_enc));
    b.push(ring("nwell_shallow", &hole.expand(-ns_enc), ring_w + 2 * ns_enc));

    b.step(Step::OxideDefinition);
    for (k, t) in thickox.into_iter().enumerate() {
        b.group(&format!("core{k}"));
        b.rect("thickox", t);
    }

    add_guard_ring(&mut b, p, tech)?;

    let props = BTreeMap::from([
        ("gate_oxide".to_string(), gox),
        ("finger_pitch".to_string(), cell_w),
        ("core_pitch".to_string(), pitch),
    ]);
    let handles = mos_width_handles(first_gate.expect("at least one gate"), tech.limits(&p.device)?.get("wtot").copied());
    Ok(b.finish(p, connection_kinds(&["G", "S", "D", "B"]), handles, Vec::new(), props))
}

fn add_guard_ring(b: &mut Builder, p: &DeviceParams, tech: &TechnologyData) -> Result<(), PcellError> {
    if let Some(style) = &p.guard_ring.0 {
        b.step(Step::GuardRing);
        let core = bbox_of(b.shapes.iter());
        b.group("guard_ring");
        for s in guard_ring(&core, style, tech)? {
            b.push(s);
        }
    }
    Ok(())
}

/// Low-voltage NMOS with straight gate fingers between shared source/drain
/// columns. Even columns are sources, odd columns drains.
pub(super) fn linear(
    spec: &GeneratorSpec,
    p: &DeviceParams,
    edges: &EdgeVariants,
    tech: &TechnologyData,
) -> Result<CellLayout, PcellError> {
    let r = MosRules::new(tech)?;
    let (l, w) = (p.l, p.w);
    let f = p.fingers as Coord;
    let m = p.multiplier as Coord;
    let ext = tech.rule(RuleKind::MinExtension, &["poly1", "diff"])?;
    let nimp_enc = tech.rule(RuleKind::MinEnclosure, &["nimp", "diff"])?;
    let pimp_enc = tech.rule(RuleKind::MinEnclosure, &["pimp", "diff"])?;
    let diff_space = tech.rule(RuleKind::MinSpacing, &["diff"])?;
    let gox = tech.constant(&format!("gox_{}", spec.voltage_class))?;

    let col = (r.cont + 2 * r.poly_cont).max(2 * tech.rule(RuleKind::MinWidth, &["diff"])?);
    let half = snap_down(col / 2, r.grid);
    let mx = (col - r.cont) / 2;
    let width = (f + 1) * col + f * l;
    let pitch = width + diff_space;
    let sbar = (-550, -250);
    let dbar = (w + 250, w + 550);
    let pbar = (w + ext, w + ext + 300);
    let tap = (-1200, -800);
    let last_col = f;

    let mut b = Builder::new();
    let mut first_gate = None;
    let mut spec_shapes = (None, None);
    let mut bar_ends = Vec::new();
    for k in 0..m {
        b.group(&format!("core{k}"));
        let ox = k * pitch;
        let cx = |j: Coord| ox + j * (col + l);
        let record = k == 0;
        let edge_of = |j: Coord| -> Option<(EdgeVariant, bool)> {
            if k == 0 && j == 0 {
                edges.west.map(|e| (e, true))
            } else if k == m - 1 && j == last_col {
                edges.east.map(|e| (e, false))
            } else {
                None
            }
        };

        if record {
            b.step(Step::Gate);
        }
        for i in 0..f {
            let gx = cx(i) + col;
            let idx = b.pin_rect("G", "poly1", Rect::new(gx, -ext, gx + l, pbar.0));
            first_gate.get_or_insert(idx);
        }
        b.pin_rect("G", "poly1", Rect::new(cx(0) + col, pbar.0, cx(f - 1) + col + l, pbar.1));

        if record {
            b.step(Step::Diffusion);
        }
        for j in 0..=f {
            let pin = if j % 2 == 0 { "S" } else { "D" };
            let x0 = cx(j);
            let rect = match edge_of(j) {
                Some((e, true)) if e.half_diffusion() => Rect::new(x0 + half, 0, x0 + col, w),
                Some((e, false)) if e.half_diffusion() => Rect::new(x0, 0, x0 + col - half, w),
                _ => Rect::new(x0, 0, x0 + col, w),
            };
            let idx = b.pin_rect(pin, "diff", rect);
            if k == 0 && j == 0 {
                spec_shapes.0 = Some(idx);
            }
            if k == m - 1 && j == last_col {
                spec_shapes.1 = Some(idx);
            }
            if j < f {
                b.body(Shape::rect("diff", Rect::new(x0 + col, 0, x0 + col + l, w)));
            }
        }

        if record {
            b.step(Step::Contacts);
        }
        let mut strips: [Vec<Rect>; 2] = [Vec::new(), Vec::new()];
        for j in 0..=f {
            if matches!(edge_of(j), Some((e, _)) if !e.keep_contacts) {
                continue;
            }
            let pin = if j % 2 == 0 { "S" } else { "D" };
            let x0 = cx(j);
            let cuts = contact_array_with_margins(&Rect::new(x0, 0, x0 + col, w), mx, r.diff_cont, tech)?;
            b.contacts(pin, &cuts);
            let cb = bbox_of_rects(&cuts).expect("at least one cut");
            let (y0, y1) = if j % 2 == 0 {
                (sbar.0, cb.hi.y + r.met_cont)
            } else {
                (cb.lo.y - r.met_cont, dbar.1)
            };
            let strip = Rect::new(cb.lo.x - r.met_cont, y0, cb.hi.x + r.met_cont, y1);
            b.pin_rect(pin, "met1", strip);
            strips[(j % 2) as usize].push(strip);
        }
        let mut ends = [None, None];
        for (kind, (pin, bar)) in [("S", sbar), ("D", dbar)].into_iter().enumerate() {
            if let (Some(a), Some(z)) = (strips[kind].first(), strips[kind].last()) {
                b.pin_rect(pin, "met1", Rect::new(a.lo.x, bar.0, z.hi.x, bar.1));
                ends[kind] = Some((a.lo.x, z.hi.x));
            }
        }

        if record {
            b.step(Step::Implant);
        }
        b.rect("nimp", Rect::new(cx(0), 0, cx(f) + col, w).expand(nimp_enc));

        if record {
            b.step(Step::BulkTap);
        }
        let mut tx0 = cx(0);
        let mut tx1 = cx(f) + col;
        if k == 0 && edges.west.is_some() {
            tx0 += half;
        }
        if k == m - 1 && edges.east.is_some() {
            tx1 -= col - half;
        }
        let tap_rect = Rect::new(tx0, tap.0, tx1, tap.1);
        b.pin_rect("B", "diff", tap_rect);
        let cuts = contact_array_with_margins(&tap_rect, r.diff_cont, r.diff_cont, tech)?;
        b.contacts("B", &cuts);
        b.pin_rect("B", "met1", tap_rect);
        b.rect("pimp", Rect::new(cx(0), tap.0, cx(f) + col, tap.1).expand(pimp_enc));
        bar_ends.push((ends, (cx(0) + col, cx(f - 1) + col + l)));
    }

    if m > 1 {
        b.group("links");
        for k in 0..(m - 1) as usize {
            let ox = k as Coord * pitch;
            let (ends, poly) = bar_ends[k];
            let (next_ends, next_poly) = bar_ends[k + 1];
            let gap = Rect::new(ox + width, tap.0, ox + pitch, tap.1);
            b.pin_rect("B", "diff", gap);
            b.pin_rect("B", "met1", gap);
            b.rect("pimp", gap.expand(pimp_enc));
            for (kind, (pin, bar)) in [("S", sbar), ("D", dbar)].into_iter().enumerate() {
                if let (Some(a), Some(z)) = (ends[kind], next_ends[kind]) {
                    b.pin_rect(pin, "met1", Rect::new(a.1, bar.0, z.0, bar.1));
                }
            }
            b.pin_rect("G", "poly1", Rect::new(poly.1, pbar.0, next_poly.0, pbar.1));
        }
    }

    add_guard_ring(&mut b, p, tech)?;

    let mut abut_specs = Vec::new();
    if p.guard_ring.is_none() && m == 1 {
        let class = |j: Coord| if j % 2 == 0 { ("S", "mos_source") } else { ("D", "mos_drain") };
        for (idx, j, dir) in [
            (spec_shapes.0, 0, AbutDirection::West),
            (spec_shapes.1, last_col, AbutDirection::East),
        ] {
            let (pin, abut_class) = class(j);
            abut_specs.push(AbutmentSpec {
                shape_ref: idx.expect("edge column"),
                pin: pin.to_string(),
                pin_size: w,
                directions: vec![dir],
                abut_class: abut_class.to_string(),
                cases: AbutCases::mos_default(),
                no_abut_spacing: 400,
            });
        }
    }

    let props = BTreeMap::from([
        ("gate_oxide".to_string(), gox),
        ("column_width".to_string(), col),
        ("core_pitch".to_string(), pitch),
    ]);
    let handles = mos_width_handles(first_gate.expect("at least one gate"), tech.limits(&p.device)?.get("wtot").copied());
    Ok(b.finish(p, connection_kinds(&["G", "S", "D", "B"]), handles, abut_specs, props))
}
