//! The `.tcb` board description format: a line-oriented block syntax with
//! `#` comments. Lengths are millimetres, angles degrees; anchors are
//! integer grid indices `(u,v)`.
//!
//! ```text
//! board {
//!   name "demo"
//!   outline rect 60 40
//!   pitch 2.54
//!   stackup 0.3 0.3 0.3 0.3
//!   trace t1 {
//!     layer top
//!     path (0,0) (4,0) (4,3)
//!     width 1
//!   }
//! }
//! ```

mod lexer;
mod parser;
mod serialize;

use serde::{Deserialize, Serialize};
use std::fmt;

pub use parser::{parse, parse_bytes};
pub use serialize::serialize;

/// Parsing stops collecting after this many errors.
pub const MAX_ERRORS: usize = 64;

/// 1-based position of a slice of the input, counted in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Lexical,
    Syntax,
    /// Well-formed text describing an invalid board.
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseError {
    pub kind: ErrorKind,
    pub span: SourceSpan,
    pub message: String,
    /// Token names that would have been accepted here.
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn new(
        kind: ErrorKind,
        span: SourceSpan,
        message: String,
        expected: Vec<String>,
    ) -> Self {
        Self {
            kind,
            span,
            message,
            expected,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

/// True when any error is lexical or syntactic (as opposed to a board that
/// parsed but is invalid).
pub fn has_syntax_errors(errors: &[ParseError]) -> bool {
    errors.iter().any(|e| e.kind != ErrorKind::Semantic)
}
