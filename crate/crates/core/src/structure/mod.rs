//! Structure learning: PC (constraint-based), hill climbing (score-based)
//! and Chow-Liu trees.
//!
//! All learners are deterministic for a given dataset and configuration.
//! Every returned edge has kind [`EdgeKind::Learnt`].
//!
//! [`EdgeKind::Learnt`]: crate::graph::EdgeKind::Learnt

mod cl;
mod extend;
mod hc;
mod pc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::DiscreteDataset;
use crate::estimation::{EstimationError, ScoreMethod};
use crate::graph::GraphError;

pub use cl::{learn_cl, tree_weight};
pub use extend::extend_to_dag;
pub use hc::{learn_hc, HcResult};
pub use pc::{learn_pc, PcResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("root `{0}` is not a dataset column")]
    UnknownRoot(String),
    #[error("the partially directed graph has no consistent DAG extension")]
    NoConsistentExtension,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

impl LearnError {
    pub fn code(&self) -> &'static str {
        match self {
            LearnError::InsufficientData(_) => "InsufficientData",
            LearnError::InvalidConfig(_) => "InvalidConfig",
            LearnError::UnknownRoot(_) => "UnknownRoot",
            LearnError::NoConsistentExtension => "NoConsistentExtension",
            LearnError::Graph(e) => e.code(),
            LearnError::Estimation(e) => e.code(),
        }
    }
}

pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcConfig {
    pub alpha: f64,
    /// Largest conditioning set tried; `None` means `n_vars - 2`.
    pub max_cond_size: Option<usize>,
}

impl Default for PcConfig {
    fn default() -> Self {
        PcConfig { alpha: DEFAULT_ALPHA, max_cond_size: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcConfig {
    pub score: ScoreMethod,
    pub plateau_k: usize,
    pub max_iter: usize,
    pub max_parents: Option<usize>,
    /// Skip add moves between pairs whose marginal χ² p-value exceeds 0.5.
    pub prefilter: bool,
}

impl Default for HcConfig {
    fn default() -> Self {
        HcConfig { score: ScoreMethod::Bic, plateau_k: 1, max_iter: 10_000, max_parents: None, prefilter: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClConfig {
    pub root: String,
}

fn require_data(ds: &DiscreteDataset) -> Result<(), LearnError> {
    if ds.n_vars() < 2 {
        return Err(LearnError::InsufficientData("at least two variables are required".into()));
    }
    if ds.n_records() == 0 {
        return Err(LearnError::InsufficientData("dataset has no records".into()));
    }
    Ok(())
}

fn names_sorted(ds: &DiscreteDataset) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..ds.n_vars()).collect();
    idx.sort_by(|&a, &b| ds.specs()[a].name.cmp(&ds.specs()[b].name));
    idx
}
