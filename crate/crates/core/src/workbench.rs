// SPDX-License-Identifier: Apache-2.0

//! Editing session shared by the command line and the HTTP service.
//!
//! Every mutation is an [`Operation`]; successful operations are appended
//! to the journal, and replaying the journal on a fresh session rebuilds
//! the same cells and design.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gdsio::{export_design, write_gds, GdsError};
use crate::geometry::{Coord, Point, Rect, Shape, Transform};
use crate::interact::{
    apply_abutment, apply_stretch, detect_abutment, undo_abutment, AbutCase, AbutRecord, HandlePosition, InteractError,
    PlacedInstance, StretchAxis, StretchHandle,
};
use crate::pcell::{evaluate_params, generate, CellLayout, DeviceParams, PcellError};
use crate::techdb::TechnologyData;
use crate::verify::{compute_flylines, parse_schematic, run_drc, Design, Flyline, Netlist, VerifyError, Violation};

pub const API_VERSION: &str = "v1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorkbenchError {
    #[error(transparent)]
    Pcell(#[from] PcellError),
    #[error(transparent)]
    Interact(#[from] InteractError),
    #[error(transparent)]
    Gds(#[from] GdsError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("instance id `{0}` already in use")]
    DuplicateInstance(String),
    #[error("cell `{0}` is placed in an abutted pair; undo the abutment first")]
    CellLocked(String),
}

/// Partial parameter set; missing fields take the device defaults.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamOverrides {
    pub l: Option<Coord>,
    pub w: Option<Coord>,
    pub wtot: Option<Coord>,
    pub fingers: Option<u32>,
    pub multiplier: Option<u32>,
    pub guard_ring: Option<String>,
    pub bends: Option<u32>,
}

impl ParamOverrides {
    pub fn resolve(&self, device: &str) -> Result<DeviceParams, WorkbenchError> {
        let mut p = DeviceParams::defaults(device).ok_or_else(|| PcellError::UnknownDevice(device.to_string()))?;
        if let Some(v) = self.l {
            p.l = v;
        }
        if let Some(v) = self.w {
            p.w = v;
        }
        if let Some(v) = self.fingers {
            p.fingers = v;
        }
        match self.wtot {
            Some(v) => {
                p.wtot = v;
                p.driver = crate::pcell::WidthDriver::TotalWidth;
            }
            None => p.wtot = p.w * p.fingers as Coord,
        }
        if let Some(v) = self.multiplier {
            p.multiplier = v;
        }
        if let Some(v) = &self.guard_ring {
            p.guard_ring = crate::pcell::GuardRing::style(v);
        }
        if let Some(v) = self.bends {
            p.bends = v;
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operation {
    CreateCell {
        device: String,
        #[serde(default)]
        params: ParamOverrides,
    },
    Stretch {
        cell_id: String,
        handle: String,
        dx: Coord,
        dy: Coord,
    },
    Place {
        cell_id: String,
        x: Coord,
        y: Coord,
        #[serde(default)]
        id: Option<String>,
        #[serde(default)]
        nets: BTreeMap<String, String>,
    },
    Move {
        instance: String,
        x: Coord,
        y: Coord,
    },
    Abut {
        a: String,
        b: String,
    },
    Unabut {
        a: String,
        b: String,
    },
    SetSchematic {
        spice: String,
    },
    AddWire {
        shape: Shape,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    Cell(CellPayload),
    Instance(InstancePayload),
    Abut(AbutPayload),
    Done {},
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapePayload {
    pub layer: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub net: Option<String>,
    pub points: Vec<[Coord; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hole: Option<Vec<[Coord; 2]>>,
}

impl ShapePayload {
    pub fn from_shape(s: &Shape) -> Self {
        let pts = |v: &[Point]| v.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>();
        let (outer, hole) = s.rings();
        Self {
            layer: s.layer.clone(),
            net: s.net.clone(),
            points: pts(outer.vertices()),
            hole: hole.map(|h| pts(h.vertices())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandlePayload {
    pub name: String,
    pub parameter: String,
    pub position: HandlePosition,
    pub direction: StretchAxis,
    pub location: [Coord; 2],
    pub min_val: f64,
    pub max_val: f64,
    pub snap_res: f64,
    pub value: Coord,
}

/// Handle anchor: the midpoint of the bound shape's side.
pub fn handle_location(cell: &CellLayout, h: &StretchHandle) -> Point {
    let r: Rect = cell.shapes[h.shape_ref].bbox();
    let c = r.center();
    match h.position {
        HandlePosition::CenterLeft => Point::new(r.lo.x, c.y),
        HandlePosition::CenterRight => Point::new(r.hi.x, c.y),
        HandlePosition::TopCenter => Point::new(c.x, r.hi.y),
        HandlePosition::BottomCenter => Point::new(c.x, r.lo.y),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPayload {
    pub cell_id: String,
    pub name: String,
    pub device: String,
    pub params: DeviceParams,
    pub bbox: [Coord; 4],
    pub shapes: Vec<ShapePayload>,
    pub pins: BTreeMap<String, Vec<usize>>,
    pub handles: Vec<HandlePayload>,
}

impl CellPayload {
    pub fn new(cell_id: &str, cell: &CellLayout) -> Self {
        let b = cell.bbox();
        Self {
            cell_id: cell_id.to_string(),
            name: cell.name.clone(),
            device: cell.params.device.clone(),
            params: cell.params.clone(),
            bbox: [b.lo.x, b.lo.y, b.hi.x, b.hi.y],
            shapes: cell.shapes.iter().map(ShapePayload::from_shape).collect(),
            pins: cell.pins.clone(),
            handles: cell
                .handles
                .iter()
                .map(|h| {
                    let loc = handle_location(cell, h);
                    HandlePayload {
                        name: h.name.clone(),
                        parameter: h.parameter.clone(),
                        position: h.position,
                        direction: h.direction,
                        location: [loc.x, loc.y],
                        min_val: h.min_val,
                        max_val: h.max_val,
                        snap_res: h.snap_res,
                        value: cell.params.length(&h.parameter).unwrap_or_default(),
                    }
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstancePayload {
    pub id: String,
    pub cell_id: String,
    pub transform: Transform,
    pub pin_nets: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abutment: Option<AbutRecord>,
    pub cell: CellPayload,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbutPayload {
    #[serde(flatten)]
    pub case: AbutCase,
    pub gap: Coord,
    pub instances: Vec<InstancePayload>,
}

/// Single-user editing session.
#[derive(Clone, Debug)]
pub struct Session {
    pub tech: TechnologyData,
    pub cells: BTreeMap<String, CellLayout>,
    pub design: Design,
    /// Instance id to the library cell it was placed from.
    pub instance_cells: BTreeMap<String, String>,
    pub schematic: Option<Netlist>,
    journal: Vec<Operation>,
    next_cell: u64,
    next_instance: u64,
}

impl Session {
    pub fn new(tech: TechnologyData) -> Self {
        Self {
            tech,
            cells: BTreeMap::new(),
            design: Design::new(),
            instance_cells: BTreeMap::new(),
            schematic: None,
            journal: Vec::new(),
            next_cell: 1,
            next_instance: 1,
        }
    }

    pub fn journal(&self) -> &[Operation] {
        &self.journal
    }

    /// Rebuilds a session by applying `journal` in order.
    pub fn replay(tech: TechnologyData, journal: &[Operation]) -> Result<Self, WorkbenchError> {
        let mut s = Self::new(tech);
        for op in journal {
            s.apply(op.clone())?;
        }
        Ok(s)
    }

    /// Drops the last journal entry and rebuilds the session without it.
    pub fn undo(&mut self) -> Result<Option<Operation>, WorkbenchError> {
        let mut journal = self.journal.clone();
        let last = journal.pop();
        if last.is_some() {
            *self = Self::replay(self.tech.clone(), &journal)?;
        }
        Ok(last)
    }

    pub fn cell_payload(&self, id: &str) -> Result<CellPayload, WorkbenchError> {
        let cell = self.cells.get(id).ok_or_else(|| WorkbenchError::UnknownCell(id.to_string()))?;
        Ok(CellPayload::new(id, cell))
    }

    pub fn instance_payload(&self, id: &str) -> Result<InstancePayload, WorkbenchError> {
        let inst = self
            .design
            .instance(id)
            .ok_or_else(|| WorkbenchError::UnknownInstance(id.to_string()))?;
        let cell_id = self.instance_cells.get(id).cloned().unwrap_or_default();
        Ok(InstancePayload {
            id: inst.id.clone(),
            cell: CellPayload::new(&cell_id, &inst.cell),
            cell_id,
            transform: inst.transform,
            pin_nets: inst.pin_nets.clone(),
            abutment: inst.abutment.clone(),
        })
    }

    pub fn instances(&self) -> Vec<InstancePayload> {
        self.design
            .instances
            .iter()
            .map(|i| self.instance_payload(&i.id).expect("instance exists"))
            .collect()
    }

    fn instance_mut(&mut self, id: &str) -> Result<usize, WorkbenchError> {
        self.design
            .instance_index(id)
            .ok_or_else(|| WorkbenchError::UnknownInstance(id.to_string()))
    }

    fn pair(&mut self, a: &str, b: &str) -> Result<(PlacedInstance, PlacedInstance, usize, usize), WorkbenchError> {
        let ia = self.instance_mut(a)?;
        let ib = self.instance_mut(b)?;
        if ia == ib {
            return Err(InteractError::IncompatibleCase(format!("`{a}` cannot abut itself")).into());
        }
        Ok((self.design.instances[ia].clone(), self.design.instances[ib].clone(), ia, ib))
    }

    /// Netlist used for pin-degree decisions during abutment.
    pub fn reference_netlist(&self) -> Netlist {
        self.schematic.clone().unwrap_or_else(|| self.design.declared_netlist())
    }

    /// Applies one operation; on success it is appended to the journal.
    pub fn apply(&mut self, op: Operation) -> Result<Outcome, WorkbenchError> {
        let out = self.execute(&op)?;
        self.journal.push(op);
        Ok(out)
    }

    fn execute(&mut self, op: &Operation) -> Result<Outcome, WorkbenchError> {
        match op {
            Operation::CreateCell { device, params } => {
                let p = evaluate_params(&params.resolve(device)?, &self.tech)?;
                let cell = generate(&p, &self.tech)?;
                let id = format!("c{}", self.next_cell);
                self.next_cell += 1;
                self.cells.insert(id.clone(), cell);
                Ok(Outcome::Cell(self.cell_payload(&id)?))
            }
            Operation::Stretch { cell_id, handle, dx, dy } => {
                let cell = self.cells.get(cell_id).ok_or_else(|| WorkbenchError::UnknownCell(cell_id.clone()))?;
                let placed: Vec<usize> = self
                    .design
                    .instances
                    .iter()
                    .enumerate()
                    .filter(|(_, i)| self.instance_cells.get(&i.id) == Some(cell_id))
                    .map(|(k, _)| k)
                    .collect();
                if placed.iter().any(|&k| self.design.instances[k].abutment.is_some()) {
                    return Err(WorkbenchError::CellLocked(cell_id.clone()));
                }
                let new = apply_stretch(cell, handle, Point::new(*dx, *dy), &self.tech)?;
                for k in placed {
                    self.design.instances[k].cell = new.clone();
                }
                self.cells.insert(cell_id.clone(), new);
                Ok(Outcome::Cell(self.cell_payload(cell_id)?))
            }
            Operation::Place { cell_id, x, y, id, nets } => {
                let cell = self.cells.get(cell_id).ok_or_else(|| WorkbenchError::UnknownCell(cell_id.clone()))?;
                let id = match id {
                    Some(id) => id.clone(),
                    None => {
                        let id = format!("i{}", self.next_instance);
                        self.next_instance += 1;
                        id
                    }
                };
                if self.design.instance(&id).is_some() {
                    return Err(WorkbenchError::DuplicateInstance(id));
                }
                let mut pin_nets: BTreeMap<String, String> =
                    cell.pins.keys().map(|p| (p.clone(), format!("{id}.{p}"))).collect();
                pin_nets.extend(nets.clone());
                let inst = PlacedInstance::new(id.clone(), cell.clone(), Transform::translate(*x, *y)).with_nets(pin_nets);
                self.design.instances.push(inst);
                self.instance_cells.insert(id.clone(), cell_id.clone());
                Ok(Outcome::Instance(self.instance_payload(&id)?))
            }
            Operation::Move { instance, x, y } => {
                let k = self.instance_mut(instance)?;
                let inst = &mut self.design.instances[k];
                if inst.abutment.is_some() {
                    return Err(InteractError::IncompatibleCase(format!("`{instance}` is abutted")).into());
                }
                inst.transform.translation = Point::new(*x, *y);
                Ok(Outcome::Instance(self.instance_payload(instance)?))
            }
            Operation::Abut { a, b } => {
                let (mut ia, mut ib, ka, kb) = self.pair(a, b)?;
                let netlist = self.reference_netlist();
                let det = detect_abutment(&ia, &ib, Some(&netlist));
                let det = if det.case == AbutCase::NoAbut {
                    det
                } else {
                    let d = apply_abutment(&mut ia, &mut ib, Some(&netlist), &self.tech)?;
                    self.design.instances[ka] = ia;
                    self.design.instances[kb] = ib;
                    d
                };
                Ok(Outcome::Abut(AbutPayload {
                    case: det.case,
                    gap: det.gap,
                    instances: vec![self.instance_payload(a)?, self.instance_payload(b)?],
                }))
            }
            Operation::Unabut { a, b } => {
                let (mut ia, mut ib, ka, kb) = self.pair(a, b)?;
                undo_abutment(&mut ia, &mut ib, &self.tech)?;
                self.design.instances[ka] = ia;
                self.design.instances[kb] = ib;
                Ok(Outcome::Abut(AbutPayload {
                    case: AbutCase::NoAbut,
                    gap: 0,
                    instances: vec![self.instance_payload(a)?, self.instance_payload(b)?],
                }))
            }
            Operation::SetSchematic { spice } => {
                self.schematic = Some(parse_schematic(spice)?);
                Ok(Outcome::Done {})
            }
            Operation::AddWire { shape } => {
                self.tech.layer(&shape.layer).map_err(PcellError::from)?;
                self.design.wires.push(shape.clone());
                Ok(Outcome::Done {})
            }
        }
    }

    pub fn drc(&self) -> Vec<Violation> {
        run_drc(&self.design, &self.tech)
    }

    pub fn flylines(&self) -> Vec<Flyline> {
        compute_flylines(&self.design, &self.tech)
    }

    pub fn gds(&self) -> Result<Vec<u8>, WorkbenchError> {
        Ok(write_gds(&export_design(&self.design, "TOP", &self.tech)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn create(s: &mut Session, device: &str) -> String {
        match s
            .apply(Operation::CreateCell {
                device: device.into(),
                params: ParamOverrides::default(),
            })
            .unwrap()
        {
            Outcome::Cell(c) => c.cell_id,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn replay_reproduces_design() {
        let mut s = Session::new(TechnologyData::demo());
        let c = create(&mut s, "nmos5");
        s.apply(Operation::Stretch {
            cell_id: c.clone(),
            handle: "width_handle_right".into(),
            dx: 1000,
            dy: 0,
        })
        .unwrap();
        s.apply(Operation::Place {
            cell_id: c.clone(),
            x: 0,
            y: 0,
            id: None,
            nets: BTreeMap::new(),
        })
        .unwrap();
        let r = Session::replay(TechnologyData::demo(), s.journal()).unwrap();
        assert_eq!(r.design, s.design);
        assert_eq!(r.cells, s.cells);
    }

    #[test]
    fn failed_operations_are_not_journaled() {
        let mut s = Session::new(TechnologyData::demo());
        assert!(s
            .apply(Operation::CreateCell {
                device: "bogus".into(),
                params: ParamOverrides::default()
            })
            .is_err());
        assert!(s.journal().is_empty());
    }

    #[test]
    fn undo_removes_last_operation() {
        let mut s = Session::new(TechnologyData::demo());
        create(&mut s, "capmim");
        create(&mut s, "respoly");
        s.undo().unwrap();
        assert_eq!(s.cells.len(), 1);
        assert_eq!(s.journal().len(), 1);
    }

    #[test]
    fn operations_round_trip_through_json() {
        let op = Operation::Place {
            cell_id: "c1".into(),
            x: 5,
            y: -5,
            id: Some("M1".into()),
            nets: BTreeMap::from([("G".into(), "in".into())]),
        };
        let text = serde_json::to_string(&op).unwrap();
        assert!(text.contains("\"op\":\"place\""));
        assert_eq!(serde_json::from_str::<Operation>(&text).unwrap(), op);
    }
}
