//! Exact queries on a [`BayesNet`].
//!
//! [`posterior`] runs variable elimination over log-space factors with a
//! dynamic min-degree order (ties by node name). [`brute_force_posterior`]
//! enumerates the full joint and exists as a reference oracle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::BayesNet;

/// Limit on the joint state space enumerated by [`brute_force_posterior`].
pub const MAX_BRUTE_FORCE_STATES: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },
    #[error("target `{0}` also appears in the evidence")]
    TargetInEvidence(String),
    #[error("assignment does not cover `{0}`")]
    IncompleteAssignment(String),
    #[error("evidence has probability zero")]
    ZeroProbabilityEvidence,
    #[error("joint state space of {0} configurations is too large to enumerate")]
    StateSpaceTooLarge(u128),
}

impl InferenceError {
    pub fn code(&self) -> &'static str {
        match self {
            InferenceError::UnknownVariable(_) => "UnknownVariable",
            InferenceError::UnknownState { .. } => "UnknownState",
            InferenceError::TargetInEvidence(_) => "TargetInEvidence",
            InferenceError::IncompleteAssignment(_) => "IncompleteAssignment",
            InferenceError::ZeroProbabilityEvidence => "ZeroProbabilityEvidence",
            InferenceError::StateSpaceTooLarge(_) => "StateSpaceTooLarge",
        }
    }
}

/// `P(target | evidence)` with evidence given as state indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub target: String,
    #[serde(default)]
    pub evidence: BTreeMap<String, usize>,
}

impl Query {
    pub fn new(target: impl Into<String>) -> Self {
        Query { target: target.into(), evidence: BTreeMap::new() }
    }

    pub fn given(mut self, var: impl Into<String>, state: usize) -> Self {
        self.evidence.insert(var.into(), state);
        self
    }
}

/// Resolve a state given as a label or as a decimal index.
pub fn state_of(net: &BayesNet, var: &str, state: &str) -> Result<usize, InferenceError> {
    let spec = net.variable(var).ok_or_else(|| InferenceError::UnknownVariable(var.to_string()))?;
    spec.state_index(state)
        .or_else(|| state.parse::<usize>().ok().filter(|&s| s < spec.cardinality()))
        .ok_or_else(|| InferenceError::UnknownState { variable: var.to_string(), state: state.to_string() })
}

/// Parse `A=Low,B=1` into evidence indices; empty text gives no evidence.
pub fn parse_evidence(net: &BayesNet, text: &str) -> Result<BTreeMap<String, usize>, InferenceError> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (var, state) = item.split_once('=').ok_or_else(|| InferenceError::UnknownState {
            variable: item.to_string(),
            state: String::new(),
        })?;
        let (var, state) = (var.trim(), state.trim());
        out.insert(var.to_string(), state_of(net, var, state)?);
    }
    Ok(out)
}

fn check_state(net: &BayesNet, var: &str, state: usize) -> Result<usize, InferenceError> {
    let i = net.index_of(var).ok_or_else(|| InferenceError::UnknownVariable(var.to_string()))?;
    if state >= net.cardinality(i) {
        return Err(InferenceError::UnknownState { variable: var.to_string(), state: state.to_string() });
    }
    Ok(i)
}

fn validate(net: &BayesNet, q: &Query) -> Result<(usize, Vec<Option<usize>>), InferenceError> {
    let target = net.index_of(&q.target).ok_or_else(|| InferenceError::UnknownVariable(q.target.clone()))?;
    let mut ev = vec![None; net.n_nodes()];
    for (var, &state) in &q.evidence {
        if *var == q.target {
            return Err(InferenceError::TargetInEvidence(var.clone()));
        }
        ev[check_state(net, var, state)?] = Some(state);
    }
    Ok((target, ev))
}

/// `P(assignment)` as the product of CPT entries, accumulated in log space.
pub fn joint_prob(net: &BayesNet, assignment: &BTreeMap<String, usize>) -> Result<f64, InferenceError> {
    let mut full = vec![usize::MAX; net.n_nodes()];
    for (var, &state) in assignment {
        full[check_state(net, var, state)?] = state;
    }
    if let Some(i) = full.iter().position(|&s| s == usize::MAX) {
        return Err(InferenceError::IncompleteAssignment(net.graph().name(i).to_string()));
    }
    Ok(log_joint(net, &full).exp())
}

fn log_joint(net: &BayesNet, full: &[usize]) -> f64 {
    (0..net.n_nodes()).map(|i| net.prob(i, full[i], full).ln()).sum()
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn normalize(log_values: &[f64]) -> Result<Vec<f64>, InferenceError> {
    let z = log_sum_exp(log_values.iter().copied());
    if z == f64::NEG_INFINITY || z.is_nan() {
        return Err(InferenceError::ZeroProbabilityEvidence);
    }
    Ok(log_values.iter().map(|&v| (v - z).exp()).collect())
}

/// Log-space table over `vars` (ascending node indices), last variable fastest.
#[derive(Debug, Clone)]
struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.vars.len()];
        for k in (0..self.vars.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.cards[k + 1];
        }
        s
    }

    /// CPT of `node` with evidence variables fixed and dropped from scope.
    fn from_cpt(net: &BayesNet, node: usize, ev: &[Option<usize>]) -> Factor {
        let mut scope: Vec<usize> = net.parents_of(node).to_vec();
        scope.push(node);
        let free: Vec<usize> = {
            let mut f: Vec<usize> = scope.iter().copied().filter(|&v| ev[v].is_none()).collect();
            f.sort_unstable();
            f
        };
        let cards: Vec<usize> = free.iter().map(|&v| net.cardinality(v)).collect();
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut full = vec![0usize; net.n_nodes()];
        for &v in &scope {
            if let Some(s) = ev[v] {
                full[v] = s;
            }
        }
        let mut odo = vec![0usize; free.len()];
        for _ in 0..size {
            for (k, &v) in free.iter().enumerate() {
                full[v] = odo[k];
            }
            values.push(net.prob(node, full[node], &full).ln());
            advance(&mut odo, &cards);
        }
        Factor { vars: free, cards, values }
    }

    fn product(&self, other: &Factor) -> Factor {
        let mut vars: Vec<usize> = self.vars.iter().chain(&other.vars).copied().collect();
        vars.sort_unstable();
        vars.dedup();
        let cards: Vec<usize> = vars
            .iter()
            .map(|v| {
                let k = self.vars.iter().position(|x| x == v);
                k.map(|k| self.cards[k])
                    .unwrap_or_else(|| other.cards[other.vars.iter().position(|x| x == v).unwrap()])
            })
            .collect();
        let proj = |f: &Factor| -> Vec<usize> {
            let st = f.strides();
            vars.iter()
                .map(|v| f.vars.iter().position(|x| x == v).map_or(0, |k| st[k]))
                .collect()
        };
        let (sa, sb) = (proj(self), proj(other));
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut odo = vec![0usize; vars.len()];
        for _ in 0..size {
            let ia: usize = odo.iter().zip(&sa).map(|(a, b)| a * b).sum();
            let ib: usize = odo.iter().zip(&sb).map(|(a, b)| a * b).sum();
            values.push(self.values[ia] + other.values[ib]);
            advance(&mut odo, &cards);
        }
        Factor { vars, cards, values }
    }

    fn sum_out(&self, var: usize) -> Factor {
        let k = self.vars.iter().position(|&v| v == var).expect("variable in scope");
        let st = self.strides();
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(k);
        let card = cards.remove(k);
        let size: usize = cards.iter().product();
        let keep: Vec<usize> = (0..self.vars.len()).filter(|&j| j != k).map(|j| st[j]).collect();
        let mut values = Vec::with_capacity(size);
        let mut odo = vec![0usize; vars.len()];
        for _ in 0..size {
            let base: usize = odo.iter().zip(&keep).map(|(a, b)| a * b).sum();
            values.push(log_sum_exp((0..card).map(|s| self.values[base + s * st[k]])));
            advance(&mut odo, &cards);
        }
        Factor { vars, cards, values }
    }
}

/// Odometer increment, last digit fastest.
fn advance(odo: &mut [usize], cards: &[usize]) {
    for k in (0..odo.len()).rev() {
        odo[k] += 1;
        if odo[k] < cards[k] {
            return;
        }
        odo[k] = 0;
    }
}

/// `P(target | evidence)` by variable elimination.
pub fn posterior(net: &BayesNet, q: &Query) -> Result<Vec<f64>, InferenceError> {
    let (target, ev) = validate(net, q)?;
    let mut factors: Vec<Factor> = (0..net.n_nodes()).map(|i| Factor::from_cpt(net, i, &ev)).collect();
    let mut remaining: Vec<usize> = (0..net.n_nodes()).filter(|&v| v != target && ev[v].is_none()).collect();
    let names = net.graph().nodes();
    while !remaining.is_empty() {
        // Min-degree in the current interaction graph, ties by name.
        let degree = |v: usize| {
            let mut nb: Vec<usize> = factors
                .iter()
                .filter(|f| f.vars.contains(&v))
                .flat_map(|f| f.vars.iter().copied())
                .filter(|&u| u != v)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb.len()
        };
        let (pos, &var) = remaining
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| degree(a).cmp(&degree(b)).then_with(|| names[a].cmp(&names[b])))
            .expect("non-empty");
        remaining.remove(pos);
        let (with, without): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.vars.contains(&var));
        factors = without;
        if let Some(first) = with.first() {
            let joint = with[1..].iter().fold(first.clone(), |acc, f| acc.product(f));
            factors.push(joint.sum_out(var));
        }
    }
    let card = net.cardinality(target);
    let mut result = Factor { vars: vec![target], cards: vec![card], values: vec![0.0; card] };
    let mut scalar = 0.0;
    for f in &factors {
        if f.vars.is_empty() {
            scalar += f.values[0];
        } else {
            result = result.product(f);
        }
    }
    let log_values: Vec<f64> = result.values.iter().map(|v| v + scalar).collect();
    normalize(&log_values)
}

/// `P(target | evidence)` by summing the full joint; exponential, for testing.
pub fn brute_force_posterior(net: &BayesNet, q: &Query) -> Result<Vec<f64>, InferenceError> {
    let (target, ev) = validate(net, q)?;
    let cards: Vec<usize> = (0..net.n_nodes()).map(|i| net.cardinality(i)).collect();
    let space = cards.iter().try_fold(1u128, |acc, &c| acc.checked_mul(c as u128)).unwrap_or(u128::MAX);
    if space > MAX_BRUTE_FORCE_STATES {
        return Err(InferenceError::StateSpaceTooLarge(space));
    }
    let mut sums = vec![0.0f64; cards[target]];
    let mut odo = vec![0usize; cards.len()];
    for _ in 0..space {
        if ev.iter().zip(&odo).all(|(e, s)| e.map_or(true, |e| e == *s)) {
            sums[odo[target]] += log_joint(net, &odo).exp();
        }
        advance(&mut odo, &cards);
    }
    let total: f64 = sums.iter().sum();
    if total <= 0.0 {
        return Err(InferenceError::ZeroProbabilityEvidence);
    }
    Ok(sums.iter().map(|s| s / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn single_node_joint() {
        let net = fixtures::single_node(&[0.75, 0.25]);
        let a = BTreeMap::from([("A".to_string(), 0)]);
        assert!((joint_prob(&net, &a).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(joint_prob(&net, &BTreeMap::new()), Err(InferenceError::IncompleteAssignment("A".into())));
    }

    #[test]
    fn stage1_joint_is_product_of_rows() {
        let net = fixtures::net("stage1").unwrap();
        // LIT101=Medium, MV101=Open, P101=On, P102=Off, FIT101=High
        let a: BTreeMap<String, usize> = [("LIT101", 1), ("MV101", 1), ("P101", 1), ("P102", 0), ("FIT101", 1)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let expect = 0.74 * 0.85 * 0.82 * 0.9 * 0.98;
        assert!((joint_prob(&net, &a).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn root_marginal_is_prior() {
        let net = fixtures::net("stage1").unwrap();
        let p = posterior(&net, &Query::new("LIT101")).unwrap();
        assert!(close(&p, &[0.04, 0.74, 0.22], 1e-12));
    }

    #[test]
    fn bayes_rule_on_two_nodes() {
        let net = fixtures::net("attack1").unwrap();
        // P(MV101=Close | FIT101=Low) = 0.98*0.5 / (0.98*0.5 + 0.02*0.5)
        let p = posterior(&net, &Query::new("MV101").given("FIT101", 0)).unwrap();
        assert!((p[0] - 0.98).abs() < 1e-12);
    }

    #[test]
    fn stage1_p101_given_lit101_low() {
        let net = fixtures::net("stage1").unwrap();
        let p = posterior(&net, &Query::new("P101").given("LIT101", 0)).unwrap();
        // P(P101=On | LIT101=Low) reads straight from the CPT row.
        assert!((p[1] - 0.02).abs() < 1e-12);
        let q = posterior(&net, &Query::new("LIT101").given("P101", 1)).unwrap();
        let num = [0.04 * 0.02, 0.74 * 0.82, 0.22 * 0.33];
        let z: f64 = num.iter().sum();
        assert!(close(&q, &num.map(|x| x / z), 1e-12));
    }

    #[test]
    fn matches_brute_force_on_fixtures() {
        for name in fixtures::NETS {
            let net = fixtures::net(name).unwrap();
            if net.n_nodes() > 14 {
                continue;
            }
            for t in net.graph().nodes() {
                for e in net.graph().nodes().iter().filter(|e| *e != t) {
                    for s in 0..net.variable(e).unwrap().cardinality() {
                        let q = Query::new(t.clone()).given(e.clone(), s);
                        match (posterior(&net, &q), brute_force_posterior(&net, &q)) {
                            (Ok(a), Ok(b)) => assert!(close(&a, &b, 1e-9), "{name} {q:?}"),
                            (Err(a), Err(b)) => assert_eq!(a, b),
                            (a, b) => panic!("{name} {q:?}: {a:?} vs {b:?}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic_chain_forces_ancestor() {
        let net = fixtures::deterministic_chain(4);
        let p = posterior(&net, &Query::new("X0").given("X3", 1)).unwrap();
        assert!(close(&p, &[0.0, 1.0], 1e-12));
    }

    #[test]
    fn query_errors() {
        let net = fixtures::net("stage1").unwrap();
        assert_eq!(posterior(&net, &Query::new("NOPE")), Err(InferenceError::UnknownVariable("NOPE".into())));
        assert_eq!(
            posterior(&net, &Query::new("P101").given("P101", 0)),
            Err(InferenceError::TargetInEvidence("P101".into()))
        );
        assert!(matches!(
            posterior(&net, &Query::new("P101").given("LIT101", 3)),
            Err(InferenceError::UnknownState { .. })
        ));
        let det = fixtures::deterministic_chain(2);
        // X1 copies X0 exactly; X0=1,X1=0 is impossible.
        assert_eq!(
            posterior(&det, &Query::new("X0").given("X1", 1)).unwrap(),
            vec![0.0, 1.0]
        );
        let three = fixtures::deterministic_chain(3);
        assert_eq!(
            posterior(&three, &Query::new("X1").given("X0", 0).given("X2", 1)),
            Err(InferenceError::ZeroProbabilityEvidence)
        );
    }

    #[test]
    fn evidence_parsing() {
        let net = fixtures::net("stage1").unwrap();
        let ev = parse_evidence(&net, "LIT101=Low, MV101=1").unwrap();
        assert_eq!(ev, BTreeMap::from([("LIT101".to_string(), 0), ("MV101".to_string(), 1)]));
        assert!(parse_evidence(&net, "").unwrap().is_empty());
        assert!(parse_evidence(&net, "LIT101=Huge").is_err());
        assert!(parse_evidence(&net, "LIT101").is_err());
    }
}
