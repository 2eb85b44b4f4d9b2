use std::collections::BTreeSet;

use serde::Serialize;

use super::{CausalGraph, GraphError};

/// Edge-level difference between two graphs over the same nodes.
///
/// `reversed` holds unordered pairs (smaller name first) so that
/// `compare(a, b).reversed == compare(b, a).reversed`. An undirected edge
/// matches an edge of either orientation and lands in `common`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EdgeDiff {
    pub common: Vec<(String, String)>,
    pub reversed: Vec<(String, String)>,
    pub only_left: Vec<(String, String)>,
    pub only_right: Vec<(String, String)>,
}

impl EdgeDiff {
    /// One-line-per-category text summary.
    pub fn summary(&self) -> String {
        let fmt = |v: &[(String, String)]| {
            v.iter().map(|(a, b)| format!("{a}->{b}")).collect::<Vec<_>>().join(" ")
        };
        format!(
            "common     {:>3}  {}\nreversed   {:>3}  {}\nonly_left  {:>3}  {}\nonly_right {:>3}  {}\n",
            self.common.len(),
            fmt(&self.common),
            self.reversed.len(),
            fmt(&self.reversed),
            self.only_left.len(),
            fmt(&self.only_left),
            self.only_right.len(),
            fmt(&self.only_right),
        )
    }
}

fn node_set(g: &CausalGraph) -> BTreeSet<&str> {
    g.nodes().iter().map(String::as_str).collect()
}

fn check_nodes(a: &CausalGraph, b: &CausalGraph) -> Result<(), GraphError> {
    if node_set(a) != node_set(b) {
        return Err(GraphError::NodeSetMismatch);
    }
    Ok(())
}

#[derive(Clone)]
struct Named {
    src: String,
    dst: String,
    directed: bool,
}

impl Named {
    fn same_pair(&self, o: &Named) -> bool {
        (self.src == o.src && self.dst == o.dst) || (self.src == o.dst && self.dst == o.src)
    }

    fn pair(&self) -> (String, String) {
        (self.src.clone(), self.dst.clone())
    }

    fn sorted_pair(&self) -> (String, String) {
        if self.src <= self.dst {
            self.pair()
        } else {
            (self.dst.clone(), self.src.clone())
        }
    }
}

fn named_edges(g: &CausalGraph) -> Vec<Named> {
    g.edges()
        .into_iter()
        .map(|e| Named { src: e.src, dst: e.dst, directed: e.directed })
        .collect()
}

impl CausalGraph {
    /// Partition the edges of `self` (left) and `other` (right).
    pub fn compare(&self, other: &CausalGraph) -> Result<EdgeDiff, GraphError> {
        check_nodes(self, other)?;
        let left = named_edges(self);
        let right = named_edges(other);
        let mut used_l = vec![false; left.len()];
        let mut used_r = vec![false; right.len()];
        let mut diff = EdgeDiff::default();

        // Exact matches first, so a 2-cycle on one side pairs its matching half.
        for (i, l) in left.iter().enumerate() {
            if let Some(j) = (0..right.len()).find(|&j| {
                !used_r[j] && right[j].src == l.src && right[j].dst == l.dst && right[j].directed == l.directed
            }) {
                used_l[i] = true;
                used_r[j] = true;
                diff.common.push(l.pair());
            }
        }
        // Undirected edges match either orientation.
        for (i, l) in left.iter().enumerate() {
            if used_l[i] {
                continue;
            }
            if let Some(j) = (0..right.len())
                .find(|&j| !used_r[j] && right[j].same_pair(l) && (!l.directed || !right[j].directed))
            {
                used_l[i] = true;
                used_r[j] = true;
                diff.common.push(if l.directed { l.pair() } else { right[j].pair() });
            }
        }
        for (i, l) in left.iter().enumerate() {
            if used_l[i] {
                continue;
            }
            if let Some(j) = (0..right.len()).find(|&j| !used_r[j] && right[j].same_pair(l)) {
                used_l[i] = true;
                used_r[j] = true;
                diff.reversed.push(l.sorted_pair());
            }
        }
        diff.only_left = left.iter().zip(&used_l).filter(|(_, u)| !**u).map(|(e, _)| e.pair()).collect();
        diff.only_right = right.iter().zip(&used_r).filter(|(_, u)| !**u).map(|(e, _)| e.pair()).collect();
        for v in [&mut diff.common, &mut diff.reversed, &mut diff.only_left, &mut diff.only_right] {
            v.sort();
        }
        Ok(diff)
    }

    /// Unordered adjacent pairs, smaller name first.
    pub fn skeleton(&self) -> BTreeSet<(String, String)> {
        named_edges(self).iter().map(Named::sorted_pair).collect()
    }

    /// Unshielded colliders `a -> k <- b` with `a < b`, as `(a, k, b)`.
    pub fn v_structures(&self) -> Result<BTreeSet<(String, String, String)>, GraphError> {
        self.require_dag()?;
        let mut out = BTreeSet::new();
        for k in 0..self.n_nodes() {
            let parents = self.parents_idx(k);
            for (i, &a) in parents.iter().enumerate() {
                for &b in &parents[i + 1..] {
                    if !self.adjacent_idx(a, b) {
                        let (x, y) = if self.name(a) < self.name(b) { (a, b) } else { (b, a) };
                        out.insert((
                            self.name(x).to_string(),
                            self.name(k).to_string(),
                            self.name(y).to_string(),
                        ));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Same skeleton and same unshielded colliders.
pub fn markov_equivalent(a: &CausalGraph, b: &CausalGraph) -> Result<bool, GraphError> {
    check_nodes(a, b)?;
    a.require_dag()?;
    b.require_dag()?;
    Ok(a.skeleton() == b.skeleton() && a.v_structures()? == b.v_structures()?)
}
