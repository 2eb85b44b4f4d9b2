//! Synthetic historian data by ancestral sampling.
//!
//! Each record draws exactly one uniform per node, in topological order,
//! so clamping a node changes its value without shifting the random
//! stream of any other node.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::data::{DiscreteDataset, RawLog, VariableKind, VariableSpec};
use crate::estimation::BayesNet;
use crate::graph::GraphError;
use crate::rng::{pick, SplitMix64};

/// Mixed into the seed for the stream that places sensor values inside bins.
const JITTER_SALT: u64 = 0xD1B5_4A32_D192_ED03;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{variable}` has no state {state}")]
    InvalidState { variable: String, state: usize },
    #[error("record count must be at least 1")]
    NoRecords,
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::Graph(g) => g.code(),
            SimError::UnknownVariable(_) => "UnknownVariable",
            SimError::InvalidState { .. } => "InvalidState",
            SimError::NoRecords => "NoRecords",
        }
    }
}

pub fn forward_sample(net: &BayesNet, n: usize, seed: u64) -> Result<DiscreteDataset, SimError> {
    sample_with_clamp(net, n, seed, &BTreeMap::new())
}

/// Ancestral sampling with the listed nodes forced to fixed states.
pub fn sample_with_clamp(
    net: &BayesNet,
    n: usize,
    seed: u64,
    clamp: &BTreeMap<String, usize>,
) -> Result<DiscreteDataset, SimError> {
    if n == 0 {
        return Err(SimError::NoRecords);
    }
    let k = net.n_nodes();
    let mut fixed = vec![None; k];
    for (name, &state) in clamp {
        let i = net.index_of(name).ok_or_else(|| SimError::UnknownVariable(name.clone()))?;
        if state >= net.cardinality(i) {
            return Err(SimError::InvalidState { variable: name.clone(), state });
        }
        fixed[i] = Some(state);
    }
    let order = net.graph().topo_indices()?;
    let mut rng = SplitMix64::new(seed);
    let mut columns = vec![Vec::with_capacity(n); k];
    let mut record = vec![0usize; k];
    for _ in 0..n {
        for &v in &order {
            let u = rng.next_f64();
            record[v] = match fixed[v] {
                Some(s) => s,
                None => {
                    pick(&net.cpts()[v].table[net.row_index(v, &record)], u)
                }
            };
        }
        for v in 0..k {
            columns[v].push(record[v]);
        }
    }
    Ok(DiscreteDataset::new(net.variables().to_vec(), columns).expect("sampled states are in range"))
}

/// Bounds `[lo, hi)` of the raw values rendered for a sensor bin.
fn bin_bounds(spec: &VariableSpec, bin: usize) -> (f64, f64) {
    let e = &spec.bin_edges;
    let typical = if e.len() >= 2 {
        (e[e.len() - 1] - e[0]) / (e.len() - 1) as f64
    } else {
        e[0].abs().max(1.0)
    };
    let lo = if bin == 0 { e[0] - typical } else { e[bin - 1] };
    let hi = if bin == e.len() { e[e.len() - 1] + typical } else { e[bin] };
    (lo, hi)
}

/// Raw historian values that discretize back to `ds`.
///
/// Actuators emit their state code (or state index when no codes are
/// declared). Sensors emit a value drawn uniformly inside their bin, with
/// the open outer bins given the width of a typical inner bin.
pub fn render_log(ds: &DiscreteDataset, seed: u64) -> RawLog {
    let mut rng = SplitMix64::new(seed ^ JITTER_SALT);
    let specs = ds.specs();
    let mut rows = Vec::with_capacity(ds.n_records());
    for r in 0..ds.n_records() {
        let mut row = Vec::with_capacity(specs.len());
        for (v, spec) in specs.iter().enumerate() {
            let s = ds.column(v)[r];
            let value = match spec.kind {
                VariableKind::Actuator => spec.codes.as_ref().map_or(s as f64, |c| c[s] as f64),
                VariableKind::Sensor => {
                    let (lo, hi) = bin_bounds(spec, s);
                    let x = ((lo + rng.next_f64() * (hi - lo)) * 1e4).round() / 1e4;
                    if spec.bin_of(x) == s && x < hi {
                        x
                    } else {
                        lo
                    }
                }
            };
            row.push(value);
        }
        rows.push(row);
    }
    RawLog::new(specs.iter().map(|s| s.name.clone()).collect(), rows).expect("rectangular rows")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::discretize;
    use crate::estimation::fit_mle;
    use crate::fixtures;
    use crate::inference::{posterior, Query};

    #[test]
    fn degenerate_prior() {
        let net = fixtures::single_node(&[1.0, 0.0]);
        let d = forward_sample(&net, 500, 3).unwrap();
        assert!(d.column(0).iter().all(|&s| s == 0));
    }

    #[test]
    fn deterministic_per_seed() {
        let net = fixtures::net("stage1").unwrap();
        assert_eq!(forward_sample(&net, 300, 9).unwrap(), forward_sample(&net, 300, 9).unwrap());
        assert_ne!(forward_sample(&net, 300, 9).unwrap(), forward_sample(&net, 300, 10).unwrap());
        let empty = BTreeMap::new();
        assert_eq!(forward_sample(&net, 300, 9).unwrap(), sample_with_clamp(&net, 300, 9, &empty).unwrap());
    }

    #[test]
    fn marginals_converge() {
        let net = fixtures::net("stage1").unwrap();
        let d = forward_sample(&net, 50_000, 2024).unwrap();
        for (v, name) in net.graph().nodes().iter().enumerate() {
            let truth = posterior(&net, &Query::new(name.clone())).unwrap();
            let h = d.histogram(d.index_of(name).unwrap());
            for (s, &p) in truth.iter().enumerate() {
                let freq = h[s] as f64 / d.n_records() as f64;
                assert!((freq - p).abs() < 0.01, "{name} state {s}: {freq} vs {p} (node {v})");
            }
        }
    }

    #[test]
    fn clamping() {
        let net = fixtures::net("stage1").unwrap();
        let clamp = BTreeMap::from([("MV101".to_string(), 1)]);
        let d = sample_with_clamp(&net, 20_000, 5, &clamp).unwrap();
        let mv = d.index_of("MV101").unwrap();
        assert!(d.column(mv).iter().all(|&s| s == 1));
        let fit = d.index_of("FIT101").unwrap();
        let high = d.column(fit).iter().filter(|&&s| s == 1).count() as f64 / 20_000.0;
        assert!((high - 0.98).abs() < 0.01);
        let root = BTreeMap::from([("LIT101".to_string(), 2)]);
        let d = sample_with_clamp(&net, 100, 5, &root).unwrap();
        assert!(d.column(d.index_of("LIT101").unwrap()).iter().all(|&s| s == 2));
        assert_eq!(
            sample_with_clamp(&net, 10, 1, &BTreeMap::from([("X".to_string(), 0)])),
            Err(SimError::UnknownVariable("X".into()))
        );
        assert!(matches!(
            sample_with_clamp(&net, 10, 1, &BTreeMap::from([("MV101".to_string(), 2)])),
            Err(SimError::InvalidState { .. })
        ));
        assert_eq!(forward_sample(&net, 0, 1), Err(SimError::NoRecords));
    }

    #[test]
    fn rendered_log_round_trips() {
        for name in fixtures::NETS {
            let net = fixtures::net(name).unwrap();
            let d = forward_sample(&net, 400, 77).unwrap();
            let log = render_log(&d, 77);
            assert_eq!(discretize(&log, d.specs()).unwrap(), d, "{name}");
            let reparsed = crate::data::parse_log(&log.to_csv()).unwrap();
            assert_eq!(discretize(&reparsed, d.specs()).unwrap(), d, "{name}");
        }
    }

    #[test]
    fn mle_recovers_fixture_cpts() {
        for name in fixtures::NETS {
            let net = fixtures::net(name).unwrap();
            let d = forward_sample(&net, 100_000, 31).unwrap();
            let fitted = fit_mle(&d, net.graph()).unwrap();
            for (truth, est) in net.cpts().iter().zip(fitted.cpts()) {
                for (r, (a, b)) in truth.table.iter().zip(&est.table).enumerate() {
                    if est.unseen_rows.contains(&r) {
                        continue;
                    }
                    for (x, y) in a.iter().zip(b) {
                        assert!((x - y).abs() < 0.02, "{name} {} row {r}: {a:?} vs {b:?}", truth.child);
                    }
                }
            }
        }
    }
}
