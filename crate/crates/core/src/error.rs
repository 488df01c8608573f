use thiserror::Error;

use crate::metric::Violation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Matrix or label data has the wrong shape; no axiom was checked.
    #[error("structural error: {0}")]
    Structure(String),
    #[error("metric axiom violated: {0}")]
    Axiom(Violation),
    #[error("empty point set: {0}")]
    EmptySet(&'static str),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("not a Katetov function: {0}")]
    NotKatetov(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not an isometry: {0}")]
    NotIsometry(String),
    #[error("invalid group: {0}")]
    Group(String),
    #[error("invalid action: {0}")]
    Action(String),
    #[error("pseudometric is not left-invariant: {0}")]
    NotInvariant(String),
    #[error("space mismatch")]
    SpaceMismatch,
    #[error("point budget exceeded: {needed} points > budget {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("linear program: {0}")]
    Lp(String),
    #[error("map is not affine: {0}")]
    NotAffine(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Structure(_) => "structure",
            Error::Axiom(_) => "axiom",
            Error::EmptySet(_) => "empty_set",
            Error::UnknownPoint(_) => "unknown_point",
            Error::NotKatetov(_) => "not_katetov",
            Error::Domain(_) => "domain",
            Error::NotIsometry(_) => "not_isometry",
            Error::Group(_) => "group",
            Error::Action(_) => "action",
            Error::NotInvariant(_) => "not_invariant",
            Error::SpaceMismatch => "space_mismatch",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::Lp(_) => "lp",
            Error::NotAffine(_) => "not_affine",
            Error::Precondition(_) => "precondition",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
