use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::data::DiscreteDataset;
use crate::graph::CausalGraph;

use super::counts::{counts_idx, Contingency};
use super::EstimationError;

/// Decomposable network score; higher is better.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum ScoreMethod {
    Bic,
    K2,
    Bdeu { ess: f64 },
}

impl Default for ScoreMethod {
    fn default() -> Self {
        ScoreMethod::Bic
    }
}

impl fmt::Display for ScoreMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreMethod::Bic => f.write_str("bic"),
            ScoreMethod::K2 => f.write_str("k2"),
            ScoreMethod::Bdeu { .. } => f.write_str("bdeu"),
        }
    }
}

impl FromStr for ScoreMethod {
    type Err = EstimationError;

    /// `bdeu` takes an optional `:ess` suffix, defaulting to 1.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        match lower.split_once(':') {
            None if lower == "bic" => Ok(ScoreMethod::Bic),
            None if lower == "k2" => Ok(ScoreMethod::K2),
            None if lower == "bdeu" => Ok(ScoreMethod::Bdeu { ess: super::DEFAULT_ESS }),
            Some(("bdeu", ess)) => {
                let ess: f64 = ess
                    .parse()
                    .map_err(|_| EstimationError::InvalidArgument(format!("bad ess `{ess}`")))?;
                if !(ess > 0.0 && ess.is_finite()) {
                    return Err(EstimationError::NonPositiveEss(ess));
                }
                Ok(ScoreMethod::Bdeu { ess })
            }
            _ => Err(EstimationError::InvalidArgument(format!("unknown score `{s}`"))),
        }
    }
}

fn contingency_score(c: &Contingency, n: u64, method: ScoreMethod) -> f64 {
    let r = c.child_card as f64;
    let q = c.n_rows();
    match method {
        ScoreMethod::Bic => {
            let mut ll = 0.0;
            for row in 0..q {
                let nr = c.row_total(row);
                for &nc in c.row(row) {
                    if nc > 0 {
                        ll += nc as f64 * (nc as f64 / nr as f64).ln();
                    }
                }
            }
            ll - (n as f64).ln() / 2.0 * (r - 1.0) * q as f64
        }
        ScoreMethod::K2 => {
            let mut s = 0.0;
            for row in 0..q {
                let nr = c.row_total(row) as f64;
                s += ln_gamma(r) - ln_gamma(nr + r);
                for &nc in c.row(row) {
                    s += ln_gamma(nc as f64 + 1.0);
                }
            }
            s
        }
        ScoreMethod::Bdeu { ess } => {
            let aj = ess / q as f64;
            let ajk = aj / r;
            let mut s = 0.0;
            for row in 0..q {
                let nr = c.row_total(row);
                if nr == 0 {
                    continue;
                }
                s += ln_gamma(aj) - ln_gamma(aj + nr as f64);
                for &nc in c.row(row) {
                    if nc > 0 {
                        s += ln_gamma(ajk + nc as f64) - ln_gamma(ajk);
                    }
                }
            }
            s
        }
    }
}

pub(crate) fn family_score_idx(ds: &DiscreteDataset, child: usize, parents: &[usize], method: ScoreMethod) -> f64 {
    contingency_score(&counts_idx(ds, child, parents), ds.n_records() as u64, method)
}

/// Score of one family `child | parents`.
pub fn family_score(
    ds: &DiscreteDataset,
    child: &str,
    parents: &[&str],
    method: ScoreMethod,
) -> Result<f64, EstimationError> {
    if ds.n_records() == 0 {
        return Err(EstimationError::EmptyDataset);
    }
    let c = super::counts(ds, child, parents)?;
    Ok(contingency_score(&c, ds.n_records() as u64, method))
}

/// Sum of family scores over the nodes of a DAG.
pub fn score(ds: &DiscreteDataset, graph: &CausalGraph, method: ScoreMethod) -> Result<f64, EstimationError> {
    graph.require_dag()?;
    if ds.n_records() == 0 {
        return Err(EstimationError::EmptyDataset);
    }
    if let ScoreMethod::Bdeu { ess } = method {
        if !(ess > 0.0) {
            return Err(EstimationError::NonPositiveEss(ess));
        }
    }
    let mut total = 0.0;
    for v in 0..graph.n_nodes() {
        let col = |name: &str| ds.index_of(name).ok_or_else(|| EstimationError::UnknownColumn(name.to_string()));
        let child = col(graph.name(v))?;
        let parents = graph
            .parents_idx(v)
            .into_iter()
            .map(|p| col(graph.name(p)))
            .collect::<Result<Vec<_>, _>>()?;
        total += family_score_idx(ds, child, &parents, method);
    }
    Ok(total)
}
