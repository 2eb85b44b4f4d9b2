//! Counting, parameter fitting, independence testing and network scores.
//!
//! Everything here is a pure function of a [`DiscreteDataset`] and, where
//! relevant, a graph. Logarithms are natural throughout.
//!
//! [`DiscreteDataset`]: crate::data::DiscreteDataset

mod citest;
mod counts;
mod network;
mod score;

use thiserror::Error;

use crate::graph::GraphError;

pub use citest::{chi_square_ci, mutual_information, CiResult};
pub use counts::{counts, Contingency};
pub use network::{fit_bayes, fit_mle, BayesNet, Cpt, DEFAULT_ESS};
pub use score::{family_score, score, ScoreMethod};

pub(crate) use citest::{chi_square_idx, mutual_information_idx};
pub(crate) use score::family_score_idx;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("dataset has no records")]
    EmptyDataset,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("parent `{0}` listed twice or equal to the child")]
    DuplicateParent(String),
    #[error("equivalent sample size must be positive, got {0}")]
    NonPositiveEss(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
}

impl EstimationError {
    pub fn code(&self) -> &'static str {
        match self {
            EstimationError::Graph(g) => g.code(),
            EstimationError::EmptyDataset => "EmptyDataset",
            EstimationError::UnknownColumn(_) => "UnknownColumn",
            EstimationError::DuplicateParent(_) => "DuplicateParent",
            EstimationError::NonPositiveEss(_) => "NonPositiveEss",
            EstimationError::InsufficientData(_) => "InsufficientData",
            EstimationError::InvalidArgument(_) => "InvalidArgument",
            EstimationError::InvalidNetwork(_) => "InvalidNetwork",
        }
    }
}
