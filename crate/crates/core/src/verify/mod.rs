// SPDX-License-Identifier: Apache-2.0

//! Layout verification: DRC, netlist extraction and LVS, flylines and
//! database comparison.

mod dbcomp;
mod drc;
mod flylines;
mod lvs;

use rstar::primitives::{GeomWithData, Rectangle};
use rstar::{RTree, AABB};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{apply_transform, Rect, Shape};
use crate::interact::PlacedInstance;

pub use dbcomp::{dbcomp, CongruenceReport, LayerDiff, ShapeDiff};
pub use drc::{check_cell, run_drc, run_drc_shapes, Violation};
pub use flylines::{compute_flylines, minimum_spanning_tree, Flyline};
pub use lvs::{
    compare_netlists, extract_netlist, extract_components, parse_schematic, Component, DeviceInstance,
    DeviceMismatch, Extraction, FragmentedNode, LvsReport, NetShort, Netlist, ParamMismatch,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
}

/// A placed set of cells plus free routing shapes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub instances: Vec<PlacedInstance>,
    #[serde(default)]
    pub wires: Vec<Shape>,
}

/// Shape in design coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatShape {
    pub shape: Shape,
    /// Owning instance index; `None` for wires.
    pub instance: Option<usize>,
    /// Index of the shape inside its cell (or in `wires`).
    pub local: usize,
    /// Device body that does not conduct between terminals.
    pub body: bool,
    /// Design net attached to the shape, if any.
    pub net: Option<String>,
}

impl Design {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn instance(&self, id: &str) -> Option<&PlacedInstance> {
        self.instances.iter().find(|i| i.id == id)
    }

    pub fn instance_index(&self, id: &str) -> Option<usize> {
        self.instances.iter().position(|i| i.id == id)
    }

    /// All shapes in design coordinates; instance shapes first, in instance
    /// order, then wires.
    pub fn flatten(&self) -> Vec<FlatShape> {
        let mut out = Vec::new();
        for (k, inst) in self.instances.iter().enumerate() {
            for (i, s) in inst.cell.shapes.iter().enumerate() {
                let net = s.net.as_ref().and_then(|pin| inst.pin_nets.get(pin).cloned());
                out.push(FlatShape {
                    shape: apply_transform(s, &inst.transform),
                    instance: Some(k),
                    local: i,
                    body: inst.cell.is_body(i),
                    net,
                });
            }
        }
        for (i, w) in self.wires.iter().enumerate() {
            out.push(FlatShape {
                shape: w.clone(),
                instance: None,
                local: i,
                body: false,
                net: w.net.clone(),
            });
        }
        out
    }

    pub fn shapes(&self) -> Vec<Shape> {
        self.flatten().into_iter().map(|f| f.shape).collect()
    }

    /// Netlist built from the instances' declared pin nets.
    pub fn declared_netlist(&self) -> Netlist {
        Netlist::from_instances(&self.instances)
    }
}

type Entry = GeomWithData<Rectangle<[i64; 2]>, usize>;

/// Bounding-box index over a subset of shapes.
pub(crate) struct ShapeIndex {
    tree: RTree<Entry>,
}

impl ShapeIndex {
    pub fn new(items: impl Iterator<Item = (usize, Rect)>) -> Self {
        let entries: Vec<Entry> = items
            .map(|(i, r)| GeomWithData::new(Rectangle::from_corners([r.lo.x, r.lo.y], [r.hi.x, r.hi.y]), i))
            .collect();
        Self {
            tree: RTree::bulk_load(entries),
        }
    }

    /// Indices whose boxes intersect or touch `r` grown by `margin`.
    pub fn near(&self, r: &Rect, margin: i64) -> impl Iterator<Item = usize> + '_ {
        let env = AABB::from_corners([r.lo.x - margin, r.lo.y - margin], [r.hi.x + margin, r.hi.y + margin]);
        self.tree.locate_in_envelope_intersecting(env).map(|e| e.data)
    }
}

/// Disjoint-set forest with path halving and union by size.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big;
        self.size[big] += self.size[small];
    }
}
