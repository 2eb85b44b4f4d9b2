use serde::{Deserialize, Serialize};

use crate::data::{DiscreteDataset, VariableSpec};
use crate::graph::CausalGraph;

use super::counts::{config_index, counts_idx, Contingency};
use super::EstimationError;

pub const DEFAULT_ESS: f64 = 1.0;

const ROW_TOLERANCE: f64 = 1e-9;

/// Conditional probability table of one node.
///
/// `table[r][c] = P(child = c | parents = r)` where `r` enumerates parent
/// configurations row-major over `parents` (first parent varies slowest).
/// `unseen_rows` lists rows with no supporting records; MLE fills them
/// uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub child: String,
    pub parents: Vec<String>,
    pub parent_cards: Vec<usize>,
    pub table: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unseen_rows: Vec<usize>,
}

impl Cpt {
    pub fn n_rows(&self) -> usize {
        self.table.len()
    }

    pub fn row(&self, parent_states: &[usize]) -> &[f64] {
        &self.table[config_index(&self.parent_cards, parent_states.iter().copied())]
    }
}

#[derive(Serialize, Deserialize)]
struct BayesNetFile {
    graph: CausalGraph,
    variables: Vec<VariableSpec>,
    cpts: Vec<Cpt>,
}

/// A DAG with one CPT per node; the joint is the product of the CPTs.
///
/// Variables and CPTs are stored in graph node order. CPT parent lists are
/// the graph parents sorted by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BayesNetFile", into = "BayesNetFile")]
pub struct BayesNet {
    graph: CausalGraph,
    variables: Vec<VariableSpec>,
    cpts: Vec<Cpt>,
    parent_idx: Vec<Vec<usize>>,
}

impl TryFrom<BayesNetFile> for BayesNet {
    type Error = EstimationError;

    fn try_from(f: BayesNetFile) -> Result<Self, Self::Error> {
        BayesNet::new(f.graph, f.variables, f.cpts)
    }
}

impl From<BayesNet> for BayesNetFile {
    fn from(n: BayesNet) -> Self {
        BayesNetFile { graph: n.graph, variables: n.variables, cpts: n.cpts }
    }
}

fn invalid(msg: impl Into<String>) -> EstimationError {
    EstimationError::InvalidNetwork(msg.into())
}

impl BayesNet {
    /// Validate and assemble a network. `variables` and `cpts` may come in
    /// any order; they are rearranged to graph node order.
    pub fn new(graph: CausalGraph, variables: Vec<VariableSpec>, cpts: Vec<Cpt>) -> Result<Self, EstimationError> {
        graph.require_dag()?;
        let n = graph.n_nodes();
        let mut vars: Vec<Option<VariableSpec>> = vec![None; n];
        for v in variables {
            v.validate().map_err(|e| invalid(e.to_string()))?;
            let i = graph.node_index(&v.name).map_err(|_| invalid(format!("variable `{}` is not a graph node", v.name)))?;
            if vars[i].replace(v).is_some() {
                return Err(invalid(format!("variable `{}` declared twice", graph.name(i))));
            }
        }
        let variables: Vec<VariableSpec> = vars
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| invalid(format!("no variable for node `{}`", graph.name(i)))))
            .collect::<Result<_, _>>()?;

        let mut slots: Vec<Option<Cpt>> = vec![None; n];
        for c in cpts {
            let i = graph.node_index(&c.child).map_err(|_| invalid(format!("cpt for unknown node `{}`", c.child)))?;
            if slots[i].replace(c).is_some() {
                return Err(invalid(format!("two cpts for `{}`", graph.name(i))));
            }
        }
        let mut parent_idx = Vec::with_capacity(n);
        let mut cpts = Vec::with_capacity(n);
        for (i, slot) in slots.into_iter().enumerate() {
            let name = graph.name(i);
            let cpt = slot.ok_or_else(|| invalid(format!("no cpt for `{name}`")))?;
            let mut expected: Vec<usize> = graph.parents_idx(i);
            expected.sort_by(|&a, &b| graph.name(a).cmp(graph.name(b)));
            let expected_names: Vec<&str> = expected.iter().map(|&p| graph.name(p)).collect();
            if cpt.parents != expected_names {
                return Err(invalid(format!(
                    "cpt parents of `{name}` are {:?}, graph parents are {:?}",
                    cpt.parents, expected_names
                )));
            }
            let cards: Vec<usize> = expected.iter().map(|&p| variables[p].cardinality()).collect();
            if cpt.parent_cards != cards {
                return Err(invalid(format!("parent cardinalities of `{name}` do not match the variables")));
            }
            let rows: usize = cards.iter().product();
            let card = variables[i].cardinality();
            if cpt.table.len() != rows {
                return Err(invalid(format!("cpt of `{name}` has {} rows, expected {rows}", cpt.table.len())));
            }
            for (r, row) in cpt.table.iter().enumerate() {
                if row.len() != card {
                    return Err(invalid(format!("row {r} of `{name}` has {} entries, expected {card}", row.len())));
                }
                if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(invalid(format!("row {r} of `{name}` has an entry outside [0, 1]")));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_TOLERANCE {
                    return Err(invalid(format!("row {r} of `{name}` sums to {sum}")));
                }
            }
            if cpt.unseen_rows.iter().any(|&r| r >= rows) {
                return Err(invalid(format!("unseen row index out of range for `{name}`")));
            }
            parent_idx.push(expected);
            cpts.push(cpt);
        }
        Ok(BayesNet { graph, variables, cpts, parent_idx })
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.graph.node_index(name).ok()
    }

    pub fn variable(&self, name: &str) -> Option<&VariableSpec> {
        self.index_of(name).map(|i| &self.variables[i])
    }

    pub fn cpt(&self, name: &str) -> Option<&Cpt> {
        self.index_of(name).map(|i| &self.cpts[i])
    }

    pub fn cardinality(&self, node: usize) -> usize {
        self.variables[node].cardinality()
    }

    /// Parent node indices in CPT order.
    pub fn parents_of(&self, node: usize) -> &[usize] {
        &self.parent_idx[node]
    }

    /// CPT row of `node` selected by a full assignment indexed by node.
    pub fn row_index(&self, node: usize, assignment: &[usize]) -> usize {
        config_index(&self.cpts[node].parent_cards, self.parent_idx[node].iter().map(|&p| assignment[p]))
    }

    /// `P(node = state | parents)` read from a full assignment indexed by node.
    pub fn prob(&self, node: usize, state: usize, assignment: &[usize]) -> f64 {
        self.cpts[node].table[self.row_index(node, assignment)][state]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EstimationError> {
        serde_json::from_str(text).map_err(|e| invalid(e.to_string()))
    }
}

/// Map graph nodes to dataset columns.
fn columns_for(ds: &DiscreteDataset, graph: &CausalGraph) -> Result<Vec<usize>, EstimationError> {
    graph.require_dag()?;
    if ds.n_records() == 0 {
        return Err(EstimationError::EmptyDataset);
    }
    graph
        .nodes()
        .iter()
        .map(|n| ds.index_of(n).ok_or_else(|| EstimationError::UnknownColumn(n.clone())))
        .collect()
}

fn fit_with(
    ds: &DiscreteDataset,
    graph: &CausalGraph,
    row_fn: impl Fn(&Contingency, usize) -> Option<Vec<f64>>,
) -> Result<BayesNet, EstimationError> {
    let cols = columns_for(ds, graph)?;
    let mut cpts = Vec::with_capacity(graph.n_nodes());
    for v in 0..graph.n_nodes() {
        let mut parents = graph.parents_idx(v);
        parents.sort_by(|&a, &b| graph.name(a).cmp(graph.name(b)));
        let pcols: Vec<usize> = parents.iter().map(|&p| cols[p]).collect();
        let c = counts_idx(ds, cols[v], &pcols);
        let mut table = Vec::with_capacity(c.n_rows());
        let mut unseen_rows = Vec::new();
        for r in 0..c.n_rows() {
            match row_fn(&c, r) {
                Some(row) => table.push(row),
                None => {
                    unseen_rows.push(r);
                    table.push(vec![1.0 / c.child_card as f64; c.child_card]);
                }
            }
        }
        cpts.push(Cpt {
            child: graph.name(v).to_string(),
            parents: parents.iter().map(|&p| graph.name(p).to_string()).collect(),
            parent_cards: c.parent_cards.clone(),
            table,
            unseen_rows,
        });
    }
    let variables = cols.iter().map(|&c| ds.specs()[c].clone()).collect();
    BayesNet::new(graph.clone(), variables, cpts)
}

/// Maximum-likelihood CPTs: `P(c | r) = N(c, r) / N(r)`; rows with
/// `N(r) = 0` are uniform and listed in `unseen_rows`.
pub fn fit_mle(ds: &DiscreteDataset, graph: &CausalGraph) -> Result<BayesNet, EstimationError> {
    fit_with(ds, graph, |c, r| {
        let nr = c.row_total(r);
        (nr > 0).then(|| c.row(r).iter().map(|&n| n as f64 / nr as f64).collect())
    })
}

/// Posterior-mean CPTs under a BDeu Dirichlet prior of total mass `ess`:
/// `P(c | r) = (N(c, r) + ess/(q r_i)) / (N(r) + ess/q)`.
pub fn fit_bayes(ds: &DiscreteDataset, graph: &CausalGraph, ess: f64) -> Result<BayesNet, EstimationError> {
    if !(ess > 0.0 && ess.is_finite()) {
        return Err(EstimationError::NonPositiveEss(ess));
    }
    fit_with(ds, graph, |c, r| {
        let q = c.n_rows() as f64;
        let card = c.child_card as f64;
        let nr = c.row_total(r) as f64;
        let row: Vec<f64> = c
            .row(r)
            .iter()
            .map(|&n| (n as f64 + ess / (q * card)) / (nr + ess / q))
            .collect();
        // Flag rows with no data even though the prior defines them.
        (nr > 0.0).then_some(row)
    })
}
