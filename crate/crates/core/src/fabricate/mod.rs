//! Fabrication outputs: flat printable solids, binary STL, tool-change
//! patching for single-extruder multi-material G-code and the process plan.

mod arrangement;
mod gcode;
mod plan;
mod solids;
mod stl;

use crate::layout::StructuralError;
use thiserror::Error;

pub use gcode::{
    parse_gcode, parse_gcode_bytes, patch_gcode, GcodeDialect, GcodeError, GcodeProgram,
    PatchOptions, PatchSummary, SpeedMode, ToolProfile, ToolTable, PATCH_MARKER,
};
pub use plan::{
    plan_process, plan_process_with, Phase, ProcessPlan, ProcessStep, BED_TEMP, BEND_AIR_TEMP,
    FINE_TRACE_WIDTH, INSULATOR_SPEED, INSULATOR_TEMP, PASTE_CURE_MINUTES, STIR_RPM,
};
pub use solids::{generate_solids, SolidSet, CYLINDER_FACETS};
pub use stl::{export_stl, STL_HEADER};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FabricateError {
    #[error("design is structurally invalid ({} error(s))", .0.len())]
    Structural(Vec<StructuralError>),
    #[error("design has {0} DRC error(s); fix them before fabricating")]
    DrcErrors(usize),
    #[error("conductors `{a}` and `{b}` belong to different nets but overlap or touch")]
    Overlap { a: String, b: String },
    #[error("{mesh} mesh is not watertight: {}", .defects.join("; "))]
    NotWatertight { mesh: String, defects: Vec<String> },
    #[error("geometry error: {0}")]
    Geometry(String),
}
