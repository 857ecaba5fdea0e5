// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hvcell::Session;
use hvcell_cli::commands::{self, CliError, GenerateArgs, Status};

/// High-voltage parameterized cell generator and checker.
#[derive(Parser)]
#[command(name = "hvcell", version)]
struct Cli {
    /// Technology file; the bundled demo process when omitted.
    #[arg(long, global = true)]
    tech: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one device cell. Lengths are in micrometres.
    Generate {
        device: String,
        #[arg(long)]
        l: Option<f64>,
        #[arg(long)]
        w: Option<f64>,
        /// Total width; takes precedence over --w.
        #[arg(long)]
        wtot: Option<f64>,
        #[arg(long)]
        fingers: Option<u32>,
        #[arg(long)]
        multiplier: Option<u32>,
        /// Guard ring style, e.g. none, 20v or 50v.
        #[arg(long)]
        guard_ring: Option<String>,
        #[arg(long)]
        bends: Option<u32>,
        /// Write the cell as a GDSII stream.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print the cell as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Check a GDSII file against the technology rules.
    Drc {
        gds: PathBuf,
        #[arg(long)]
        top: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Compare a design (JSON) against a SPICE schematic.
    Lvs {
        design: PathBuf,
        schematic: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Compare two GDSII files shape by shape.
    Dbcomp { a: PathBuf, b: PathBuf },
    /// Serve the JSON API.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let tech = commands::technology(cli.tech.as_deref())?;
    let mut out = std::io::stdout().lock();
    let status = match cli.command {
        Command::Generate {
            device,
            l,
            w,
            wtot,
            fingers,
            multiplier,
            guard_ring,
            bends,
            output,
            json,
        } => {
            let args = GenerateArgs {
                device,
                l,
                w,
                wtot,
                fingers,
                multiplier,
                guard_ring,
                bends,
            };
            commands::generate_cmd(&args, &tech, output.as_deref(), json, &mut out)?
        }
        Command::Drc { gds, top, json } => commands::drc_cmd(&gds, top.as_deref(), &tech, json, &mut out)?,
        Command::Lvs { design, schematic, json } => commands::lvs_cmd(&design, &schematic, &tech, json, &mut out)?,
        Command::Dbcomp { a, b } => commands::dbcomp_cmd(&a, &b, &mut out)?,
        Command::Serve { host, port } => {
            let rt = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
                path: PathBuf::from("<runtime>"),
                source,
            })?;
            rt.block_on(hvcell_cli::service::serve(Session::new(tech), SocketAddr::new(host, port)))
                .map_err(|source| CliError::Io {
                    path: PathBuf::from(format!("{host}:{port}")),
                    source,
                })?;
            Status::Clean
        }
    };
    let _ = out.flush();
    Ok(status)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CliError::EXIT_CODE as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(s) => ExitCode::from(s.code() as u8),
        Err(e) => {
            eprintln!("hvcell: {e}");
            ExitCode::from(CliError::EXIT_CODE as u8)
        }
    }
}
