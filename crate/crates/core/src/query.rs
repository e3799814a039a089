//! Queries in the two temporal forms the checker supports.

use std::fmt;

use crate::model::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryMode {
    /// `E<> p`: some reachable state satisfies `p`.
    ExistsEventually,
    /// `A[] p`: every reachable state satisfies `p`.
    AlwaysGlobally,
}

impl QueryMode {
    pub fn keyword(self) -> &'static str {
        match self {
            QueryMode::ExistsEventually => "E<>",
            QueryMode::AlwaysGlobally => "A[]",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    pub mode: QueryMode,
    pub pred: Expr,
}

impl Query {
    pub fn exists(pred: Expr) -> Self {
        Query { mode: QueryMode::ExistsEventually, pred }
    }

    pub fn always(pred: Expr) -> Self {
        Query { mode: QueryMode::AlwaysGlobally, pred }
    }

    /// The dual query: `A[] p` ↔ `E<> !p`.
    pub fn dual(&self) -> Query {
        let mode = match self.mode {
            QueryMode::ExistsEventually => QueryMode::AlwaysGlobally,
            QueryMode::AlwaysGlobally => QueryMode::ExistsEventually,
        };
        Query { mode, pred: Expr::not(self.pred.clone()) }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.mode.keyword(), crate::text::print_expr(&self.pred))
    }
}
