use thiserror::Error;

use crate::data::DataError;
use crate::domain::DomainError;
use crate::estimation::EstimationError;
use crate::graph::GraphError;
use crate::impact::ImpactError;
use crate::inference::InferenceError;
use crate::sim::SimError;
use crate::structure::LearnError;

/// Any error raised by the library, tagged by the module that produced it.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Impact(#[from] ImpactError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Broad class of a failure, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or inconsistent input data.
    Data,
    /// The model (graph, network, query) cannot be built or evaluated.
    Model,
}

impl Error {
    /// Stable machine-readable code, e.g. `RaggedRow` or `CyclicGraph`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Data(e) => e.code(),
            Error::Graph(e) => e.code(),
            Error::Domain(e) => e.code(),
            Error::Estimation(e) => e.code(),
            Error::Learn(e) => e.code(),
            Error::Inference(e) => e.code(),
            Error::Impact(e) => e.code(),
            Error::Sim(e) => e.code(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Data(_) | Error::Domain(_) => ErrorClass::Data,
            Error::Estimation(EstimationError::EmptyDataset)
            | Error::Estimation(EstimationError::UnknownColumn(_))
            | Error::Learn(LearnError::InsufficientData(_)) => ErrorClass::Data,
            _ => ErrorClass::Model,
        }
    }
}
