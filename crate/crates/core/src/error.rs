use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The clique search visited more nodes than the caller allowed.
    /// The caller should raise the budget or shrink the instance; the
    /// engine never substitutes an approximate answer.
    #[error("clique search budget exceeded after {nodes} nodes{}", edge_note(.edge))]
    BudgetExceeded { nodes: u64, edge: Option<(u32, u32)> },

    #[error("({u},{v}) is not an edge of the graph")]
    NonEdge { u: u32, v: u32 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Bounded-composition enumeration would exceed the hard term cap.
    #[error("expectation enumeration exceeds {cap} terms")]
    WorkCapExceeded { cap: u64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

fn edge_note(edge: &Option<(u32, u32)>) -> String {
    match edge {
        Some((u, v)) => format!(" (edge {u}-{v})"),
        None => String::new(),
    }
}

impl Error {
    /// True for budget/infeasibility failures (CLI exit code 3); everything
    /// else is treated as a usage or environment error.
    pub fn is_budget_or_infeasible(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. } | Error::WorkCapExceeded { .. }
        )
    }
}
