use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Constraint of the tour-count fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Capacity,
    Shift,
    LeadTime,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Capacity => "capacity",
            Constraint::Shift => "shift",
            Constraint::LeadTime => "lead_time",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("invalid argument: {0}")]
    Domain(String),

    /// The tour count has no fixed point below the iteration cap.
    #[error("infeasible: {constraint} ceiling diverges{}", context_suffix(.context))]
    Infeasible {
        constraint: Constraint,
        context: String,
    },

    /// A computed quantity broke a model invariant.
    #[error("consistency violation: {0}")]
    Consistency(String),

    #[error("allocation grid has {points:.3e} points, above the limit of {limit}")]
    GridTooLarge { points: f64, limit: u64 },
}

fn context_suffix(context: &str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        format!(" ({context})")
    }
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. })
    }

    /// Prefixes the context of an infeasibility with `scope`.
    pub fn within(self, scope: &str) -> Self {
        match self {
            Error::Infeasible {
                constraint,
                context,
            } => Error::Infeasible {
                constraint,
                context: if context.is_empty() {
                    scope.to_string()
                } else {
                    format!("{scope}: {context}")
                },
            },
            Error::Domain(msg) => Error::Domain(format!("{scope}: {msg}")),
            Error::Consistency(msg) => Error::Consistency(format!("{scope}: {msg}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
