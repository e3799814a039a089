//! Line-oriented model DSL (`.scm`) and query syntax.
//!
//! ```text
//! model Laser
//! in event startLaser
//! event deactivateVen
//! var SpO: int[0..100] = 100
//! order 1, 2
//! chart Laser priority 1
//!   initial Off
//!   state Off
//!   state On
//!   transition Off -> On on startLaser if SpO > 96 do raise deactivateVen
//! ```
//!
//! Queries are `E<> pred` or `A[] pred`, where `pred` may use `Chart.State`
//! atoms and `imply`.

mod lexer;
mod parser;
mod print;

use std::fmt;

use crate::model::{Model, SourceSpan};
use crate::query::Query;

pub use print::{print_expr, serialize_model};

/// Words that cannot be used as declared names.
pub const KEYWORDS: &[&str] = &[
    "model", "in", "event", "var", "int", "order", "pattern", "chart", "priority", "manager",
    "initial", "state", "transition", "on", "after", "if", "do", "raise", "true", "false", "imply",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    /// Token descriptions that would have been accepted at `span`.
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    pub(crate) fn at(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError { span, message: message.into(), expected: Vec::new(), found: String::new() }
    }
}

/// Parses a `.scm` model. The result is not validated; run
/// [`crate::model::validate_model`] before executing it.
pub fn parse_model(text: &str) -> Result<Model, ParseError> {
    parser::Parser::new(text, false)?.model()
}

pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    parser::Parser::new(text, true)?.query()
}

/// Parses a `.q` file: one formula per non-blank line, `#` comments allowed.
/// Reported spans refer to lines of the whole file.
pub fn parse_query_file(text: &str) -> Result<Vec<(String, Query)>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let q = parse_query(body).map_err(|mut e| {
            e.span.line = i as u32 + 1;
            e
        })?;
        out.push((body.to_string(), q));
    }
    Ok(out)
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_model(self))
    }
}

#[cfg(test)]
mod tests;
