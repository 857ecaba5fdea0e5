// SPDX-License-Identifier: Apache-2.0

//! Parametric layout generation for high-voltage devices, with interactive
//! stretching and abutment, design rule checking, layout-versus-schematic
//! comparison and GDSII interchange.
//!
//! Coordinates are integer database units of 1 nm.

pub mod gdsio;
pub mod geometry;
pub mod interact;
pub mod pcell;
pub mod techdb;
pub mod verify;
pub mod workbench;

pub use gdsio::{read_gds, write_gds, GdsError, GdsLibrary};
pub use geometry::{Coord, Geometry, Point, Polygon, Rect, Shape, Transform};
pub use interact::{AbutCase, InteractError, PlacedInstance, StretchHandle};
pub use pcell::{generate, CellLayout, DeviceParams, PcellError};
pub use techdb::{load_technology, TechError, TechnologyData};
pub use verify::{Design, LvsReport, Netlist, Violation};
pub use workbench::{Operation, Session, WorkbenchError};
