// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use hvcell::gdsio::{export_cell, flatten_structure, GdsLibrary};
use hvcell::geometry::um;
use hvcell::pcell::evaluate_params;
use hvcell::verify::{compare_netlists, dbcomp, extract_netlist, parse_schematic, run_drc_shapes};
use hvcell::workbench::{CellPayload, ParamOverrides};
use hvcell::{generate, load_technology, read_gds, write_gds, Design, TechnologyData};
use thiserror::Error;

/// Process exit status for a finished command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Clean,
    Findings,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Clean => 0,
            Status::Findings => 1,
        }
    }
}

/// Anything that stops a command before it can report; exits with 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Tech(#[from] hvcell::TechError),
    #[error(transparent)]
    Pcell(#[from] hvcell::PcellError),
    #[error(transparent)]
    Gds(#[from] hvcell::GdsError),
    #[error(transparent)]
    Verify(#[from] hvcell::verify::VerifyError),
    #[error(transparent)]
    Workbench(#[from] hvcell::WorkbenchError),
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl CliError {
    pub const EXIT_CODE: i32 = 2;
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.into(), source })
}

/// Technology from `path`, or the bundled demo process.
pub fn technology(path: Option<&Path>) -> Result<TechnologyData, CliError> {
    match path {
        Some(p) => Ok(load_technology(&read_text(p)?)?),
        None => Ok(TechnologyData::demo()),
    }
}

/// Device parameters as given on the command line, lengths in micrometres.
#[derive(Clone, Debug, Default)]
pub struct GenerateArgs {
    pub device: String,
    pub l: Option<f64>,
    pub w: Option<f64>,
    pub wtot: Option<f64>,
    pub fingers: Option<u32>,
    pub multiplier: Option<u32>,
    pub guard_ring: Option<String>,
    pub bends: Option<u32>,
}

impl GenerateArgs {
    pub fn overrides(&self) -> ParamOverrides {
        ParamOverrides {
            l: self.l.map(um),
            w: self.w.map(um),
            wtot: self.wtot.map(um),
            fingers: self.fingers,
            multiplier: self.multiplier,
            guard_ring: self.guard_ring.clone(),
            bends: self.bends,
        }
    }
}

pub fn generate_cmd(
    args: &GenerateArgs,
    tech: &TechnologyData,
    output: Option<&Path>,
    json: bool,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    let params = evaluate_params(&args.overrides().resolve(&args.device)?, tech)?;
    let cell = generate(&params, tech)?;
    if let Some(path) = output {
        write(path, &write_gds(&export_cell(&cell, tech)?)?)?;
    }
    if json {
        let payload = CellPayload::new(&cell.name, &cell);
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&payload).expect("payload serializes"));
    } else {
        let b = cell.bbox();
        let _ = writeln!(
            out,
            "{}: {} shapes, {} pins, {} handles, bbox ({}, {})..({}, {})",
            cell.name,
            cell.shapes.len(),
            cell.pins.len(),
            cell.handles.len(),
            b.lo.x,
            b.lo.y,
            b.hi.x,
            b.hi.y
        );
    }
    Ok(Status::Clean)
}

fn top_name(lib: &GdsLibrary, top: Option<&str>) -> Result<String, CliError> {
    if let Some(t) = top {
        return Ok(t.to_string());
    }
    match lib.top_structures().as_slice() {
        [one] => Ok(one.name.clone()),
        [] => Err(CliError::Usage("library has no top structure".into())),
        many => Err(CliError::Usage(format!(
            "library has {} top structures ({}); pick one with --top",
            many.len(),
            many.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

pub fn drc_cmd(
    gds: &Path,
    top: Option<&str>,
    tech: &TechnologyData,
    json: bool,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    let lib = read_gds(&read(gds)?)?;
    let top = top_name(&lib, top)?;
    let shapes = flatten_structure(&lib, &top, tech)?;
    let violations = run_drc_shapes(&shapes, tech);
    if json {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&violations).expect("violations serialize"));
    } else {
        for v in &violations {
            let _ = writeln!(out, "{v}");
        }
        let _ = writeln!(out, "{top}: {} shapes, {} violations", shapes.len(), violations.len());
    }
    Ok(if violations.is_empty() { Status::Clean } else { Status::Findings })
}

pub fn lvs_cmd(
    design: &Path,
    schematic: &Path,
    tech: &TechnologyData,
    json: bool,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    let d: Design = serde_json::from_str(&read_text(design)?).map_err(|source| CliError::Json {
        path: design.into(),
        source,
    })?;
    let sch = parse_schematic(&read_text(schematic)?)?;
    let report = compare_netlists(&extract_netlist(&d, tech), &sch);
    if json {
        let _ = writeln!(out, "{}", report.to_json());
    } else {
        let _ = write!(out, "{report}");
    }
    Ok(if report.clean { Status::Clean } else { Status::Findings })
}

pub fn dbcomp_cmd(a: &Path, b: &Path, out: &mut dyn Write) -> Result<Status, CliError> {
    let la = read_gds(&read(a)?)?;
    let lb = read_gds(&read(b)?)?;
    let report = dbcomp(&la, &lb);
    let _ = write!(out, "{report}");
    Ok(if report.congruent { Status::Clean } else { Status::Findings })
}
