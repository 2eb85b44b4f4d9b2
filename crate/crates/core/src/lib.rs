//! Causal graphs over the design parameters (sensors and actuators) of a
//! cyber-physical system.
//!
//! The crate covers the whole pipeline: historian logs are parsed and
//! discretized ([`data`]), causal graphs are authored or learnt
//! ([`graph`], [`domain`], [`structure`]), fitted with conditional
//! probability tables ([`estimation`]), queried exactly ([`inference`]) and
//! finally used to discover which parameters are impacted by an attack on a
//! set of targeted parameters ([`impact`]). Synthetic historian data for
//! testing comes from [`sim`] and the networks in [`fixtures`].

pub mod data;
pub mod domain;
pub mod error;
pub mod estimation;
pub mod fixtures;
pub mod graph;
pub mod impact;
pub mod inference;
pub mod rng;
pub mod sim;
pub mod structure;

pub use data::{DiscreteDataset, RawLog, VariableKind, VariableSpec};
pub use error::Error;
pub use estimation::{BayesNet, Cpt, ScoreMethod};
pub use graph::{CausalGraph, EdgeDiff, EdgeKind};
pub use impact::{AttackSpec, ImpactConfig, ImpactReport};
pub use inference::Query;
