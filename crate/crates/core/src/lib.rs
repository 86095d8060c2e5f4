//! Design compiler and rule checker for thermoformed circuit boards.
//!
//! A board is authored flat on a pitch grid (`.tcb` text format), checked
//! against measured electrical and mechanical limits, and compiled into
//! printable solids, patched multi-material G-code and a fabrication plan.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod drc;
pub mod dsl;
pub mod fabricate;
pub mod geometry;
pub mod layout;
