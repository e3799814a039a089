//! Prioritized synchronous statecharts with two model patterns: two-way
//! communication between charts of any priority (`twc`) and configurable
//! execution order (`ceo`).
//!
//! * [`text`] parses and prints the `.scm` model language and queries.
//! * [`engine`] executes models deterministically.
//! * [`patterns`] rewrites models to apply the patterns.
//! * [`verifier`] decides `A[]`/`E<>` reachability queries exhaustively.

pub mod engine;
pub mod gen;
pub mod model;
pub mod patterns;
pub mod query;
pub mod text;
pub mod verifier;

pub use engine::{Executable, RuntimeState, Session};
pub use model::{validate_model, Model};
pub use patterns::{apply_both, apply_ceo, apply_twc, PatternError, PatternRuntime};
pub use query::{Query, QueryMode};
pub use text::{parse_model, parse_query, serialize_model, ParseError};
pub use verifier::{check_query, explore, replay, EnvPolicy, VerificationResult};
