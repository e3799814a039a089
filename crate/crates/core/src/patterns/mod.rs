//! The two model patterns and the runtime their native functions act on.

pub mod runtime;
mod transform;

pub use runtime::{ContractError, PatternRuntime};
pub use transform::{apply_both, apply_ceo, apply_twc, order_by_names, order_names, Pattern, PatternError};
