use std::collections::VecDeque;

use crate::data::DiscreteDataset;
use crate::estimation::mutual_information_idx;
use crate::graph::{CausalGraph, EdgeKind, GraphError};

use super::{require_data, ClConfig, LearnError};

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Sum of pairwise mutual information over the adjacencies of `g`.
///
/// Terms are added in descending order, so two trees with the same
/// multiset of weights get bit-identical totals.
pub fn tree_weight(ds: &DiscreteDataset, g: &CausalGraph) -> Result<f64, LearnError> {
    let mut w = Vec::new();
    for e in g.edges() {
        let a = ds.index_of(&e.src).ok_or_else(|| GraphError::UnknownNode(e.src.clone()))?;
        let b = ds.index_of(&e.dst).ok_or_else(|| GraphError::UnknownNode(e.dst.clone()))?;
        w.push(mutual_information_idx(ds, a, b));
    }
    w.sort_by(|a, b| b.total_cmp(a));
    Ok(w.iter().sum())
}

/// Maximum mutual-information spanning tree oriented away from `cfg.root`.
///
/// Equal weights are taken in order of the sorted name pair. Breadth-first
/// orientation visits neighbours in name order.
pub fn learn_cl(ds: &DiscreteDataset, cfg: &ClConfig) -> Result<CausalGraph, LearnError> {
    require_data(ds)?;
    let root = ds.index_of(&cfg.root).ok_or_else(|| LearnError::UnknownRoot(cfg.root.clone()))?;
    let n = ds.n_vars();
    let name = |v: usize| ds.specs()[v].name.as_str();

    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = if name(i) < name(j) { (i, j) } else { (j, i) };
            pairs.push((mutual_information_idx(ds, a, b), a, b));
        }
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then_with(|| (name(x.1), name(x.2)).cmp(&(name(y.1), name(y.2)))));

    let mut uf: Vec<usize> = (0..n).collect();
    let mut adj = vec![Vec::new(); n];
    for &(_, a, b) in &pairs {
        let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
        if ra != rb {
            uf[ra] = rb;
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_by(|&x, &y| name(x).cmp(name(y)));
    }

    let mut g = CausalGraph::new(ds.names())?;
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &c in &adj[v] {
            if !seen[c] {
                seen[c] = true;
                g.add_edge_idx(v, c, EdgeKind::Learnt);
                queue.push_back(c);
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::VariableSpec;
    use crate::fixtures;
    use crate::rng::SplitMix64;
    use crate::sim::forward_sample;

    /// All spanning trees of the complete graph on `n` nodes, as edge lists.
    fn spanning_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let mut out = Vec::new();
        let mut pick = Vec::new();
        fn rec(pairs: &[(usize, usize)], start: usize, n: usize, pick: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
            if pick.len() == n - 1 {
                let mut uf: Vec<usize> = (0..n).collect();
                for &(a, b) in pick.iter() {
                    let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
                    if ra == rb {
                        return;
                    }
                    uf[ra] = rb;
                }
                out.push(pick.clone());
                return;
            }
            for k in start..pairs.len() {
                pick.push(pairs[k]);
                rec(pairs, k + 1, n, pick, out);
                pick.pop();
            }
        }
        rec(&pairs, 0, n, &mut pick, &mut out);
        out
    }

    fn brute_force_max(ds: &DiscreteDataset) -> f64 {
        spanning_trees(ds.n_vars())
            .into_iter()
            .map(|t| {
                let mut g = CausalGraph::new(ds.names()).unwrap();
                for (a, b) in t {
                    g.add_edge_idx(a, b, EdgeKind::Learnt);
                }
                tree_weight(ds, &g).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn cayley_count() {
        assert_eq!(spanning_trees(4).len(), 16);
        assert_eq!(spanning_trees(5).len(), 125);
    }

    #[test]
    fn copy_is_joined_to_its_source() {
        let mut rng = SplitMix64::new(4);
        let a: Vec<usize> = (0..5_000).map(|_| (rng.next_f64() < 0.5) as usize).collect();
        let b: Vec<usize> = (0..5_000).map(|_| (rng.next_f64() < 0.5) as usize).collect();
        let specs = ["A", "B", "C"].iter().map(|n| VariableSpec::indexed(n, 2)).collect();
        let d = DiscreteDataset::new(specs, vec![a.clone(), b, a]).unwrap();
        let g = learn_cl(&d, &ClConfig { root: "A".into() }).unwrap();
        assert!(g.has_edge("A", "C"));
        assert_eq!(tree_weight(&d, &g).unwrap(), brute_force_max(&d));
    }

    #[test]
    fn tree_shape() {
        let net = fixtures::net("stage1").unwrap();
        let d = forward_sample(&net, 3_000, 6).unwrap();
        for root in d.names() {
            let g = learn_cl(&d, &ClConfig { root: root.into() }).unwrap();
            assert_eq!(g.n_edges(), d.n_vars() - 1);
            assert!(g.is_dag());
            for v in g.nodes() {
                let k = g.parents(v).unwrap().len();
                assert_eq!(k, usize::from(v != root), "{v}");
            }
            assert_eq!(tree_weight(&d, &g).unwrap(), brute_force_max(&d));
        }
    }

    #[test]
    fn stage6_root_orients_toward_flow() {
        let net = fixtures::net("stage6").unwrap();
        let d = forward_sample(&net, 20_000, 12).unwrap();
        let g = learn_cl(&d, &ClConfig { root: "P602".into() }).unwrap();
        assert!(g.has_edge("P602", "FIT601"));
    }

    #[test]
    fn unknown_root() {
        let net = fixtures::net("chain3").unwrap();
        let d = forward_sample(&net, 100, 1).unwrap();
        assert_eq!(learn_cl(&d, &ClConfig { root: "Z".into() }), Err(LearnError::UnknownRoot("Z".into())));
    }
}
