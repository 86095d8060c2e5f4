//! `tcbforge` command line: check, compile, gcode, plan and serve.

mod commands;
pub mod server;

use clap::{Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;

pub use commands::output_stem;

/// Process exit status. The numeric values are a stable contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    /// Design rule or semantic failure.
    Failed = 1,
    /// Unparseable input, bad arguments or a missing file.
    Parse = 2,
    Io = 3,
    /// The environment refused something, such as a busy port.
    Environment = 4,
}

#[derive(Debug, Parser)]
#[command(
    name = "tcbforge",
    version,
    about = "Design compiler and rule checker for thermoformed circuit boards"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpeedArg {
    None,
    M220,
    Feedrate,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the design rule checks.
    Check {
        design: PathBuf,
        #[arg(long)]
        json: bool,
        /// Override a rule or material value, e.g. `rule.min_trace_width=0.6`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Write substrate and conductor STL files and the process plan.
    Compile {
        design: PathBuf,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
        /// Write outputs even when the design has DRC errors.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        json: bool,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Turn slicer tool changes into temperature changes and filament swaps.
    Gcode {
        gcode: PathBuf,
        /// Tool material, e.g. `1=conductive` or `0=insulator`. Defaults: T0 insulator, T1 conductive.
        #[arg(long = "tool", value_name = "N=MATERIAL")]
        tools: Vec<String>,
        #[arg(long, value_enum, default_value = "m220")]
        speed: SpeedArg,
        /// Speed the slicer planned for, mm/s.
        #[arg(long, default_value_t = 45.0)]
        sliced_speed: f64,
        /// Leave out the purge reminder comments.
        #[arg(long)]
        no_purge: bool,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Print the fabrication process plan.
    Plan {
        design: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Serve the editing API for one design on localhost.
    Serve {
        design: PathBuf,
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let exit = match cli.command {
        Command::Check { design, json, set } => commands::check(&design, json, &set, out, err),
        Command::Compile {
            design,
            out: dir,
            force,
            json,
            set,
        } => commands::compile(&design, &dir, force, json, &set, out, err),
        Command::Gcode {
            gcode,
            tools,
            speed,
            sliced_speed,
            no_purge,
            set,
        } => commands::gcode(
            &gcode,
            &tools,
            speed,
            sliced_speed,
            !no_purge,
            &set,
            out,
            err,
        ),
        Command::Plan { design, json, set } => commands::plan(&design, json, &set, out, err),
        Command::Serve { design, port, set } => commands::serve(&design, port, &set, out, err),
    };
    exit as i32
}
