//! Reference implementations kept deliberately naive: path enumeration,
//! subset enumeration and exact rational counting.

#![allow(dead_code)]

use cpscausal::{CausalGraph, DiscreteDataset};
use num_rational::Ratio;

/// Names `N0..N{n-1}`.
pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("N{i}")).collect()
}

/// The DAG on `N0..` whose edge `Ni -> Nj` (i < j) is present when bit `k`
/// of `mask` is set, pairs numbered in row-major order. Every DAG on `n`
/// nodes is isomorphic to one of these.
pub fn upper_triangular_dag(n: usize, mask: u64) -> CausalGraph {
    let names = names(n);
    let mut g = CausalGraph::new(names.iter().map(String::as_str)).unwrap();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if mask >> k & 1 == 1 {
                g.add_edge(&names[i], &names[j], cpscausal::EdgeKind::Learnt).unwrap();
            }
            k += 1;
        }
    }
    g
}

struct Adj {
    n: usize,
    parent: Vec<Vec<bool>>,
}

impl Adj {
    fn of(g: &CausalGraph) -> Self {
        let n = g.n_nodes();
        let mut parent = vec![vec![false; n]; n];
        for e in g.edges() {
            let s = g.node_index(&e.src).unwrap();
            let d = g.node_index(&e.dst).unwrap();
            parent[d][s] = true;
        }
        Adj { n, parent }
    }

    fn edge(&self, a: usize, b: usize) -> bool {
        self.parent[b][a]
    }

    fn descendants_or_self(&self, v: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![v];
        seen[v] = true;
        while let Some(x) = stack.pop() {
            for c in 0..self.n {
                if self.edge(x, c) && !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        seen
    }
}

/// d-separation by enumerating every simple path of the skeleton and
/// checking each interior node for blocking. Graph structure is cached so
/// many queries on one graph stay cheap.
pub struct PathOracle {
    adj: Adj,
    /// `desc[v]` has bit `u` set when `u` is `v` or a descendant of `v`.
    desc: Vec<u64>,
}

impl PathOracle {
    pub fn new(g: &CausalGraph) -> Self {
        let adj = Adj::of(g);
        assert!(adj.n <= 64);
        let desc = (0..adj.n)
            .map(|v| adj.descendants_or_self(v).iter().enumerate().filter(|(_, &d)| d).map(|(u, _)| 1u64 << u).sum())
            .collect();
        PathOracle { adj, desc }
    }

    /// `z` is a bit set over node indices.
    pub fn separated(&self, x: usize, y: usize, z: u64) -> bool {
        let opens: Vec<bool> = self.desc.iter().map(|&d| d & z != 0).collect();
        let in_z: Vec<bool> = (0..self.adj.n).map(|v| z >> v & 1 == 1).collect();
        let mut path = vec![x];
        let mut on_path = vec![false; self.adj.n];
        on_path[x] = true;
        !active_path_exists(&self.adj, &mut path, &mut on_path, y, &in_z, &opens)
    }
}

pub fn d_separated_by_paths(g: &CausalGraph, x: &str, y: &str, z: &[&str]) -> bool {
    let mask = z.iter().map(|v| 1u64 << g.node_index(v).unwrap()).sum();
    PathOracle::new(g).separated(g.node_index(x).unwrap(), g.node_index(y).unwrap(), mask)
}

fn active_path_exists(
    adj: &Adj,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    target: usize,
    in_z: &[bool],
    opens: &[bool],
) -> bool {
    let last = *path.last().unwrap();
    for next in 0..adj.n {
        if on_path[next] || !(adj.edge(last, next) || adj.edge(next, last)) {
            continue;
        }
        if path.len() >= 2 {
            let prev = path[path.len() - 2];
            let collider = adj.edge(prev, last) && adj.edge(next, last);
            let blocked = if collider { !opens[last] } else { in_z[last] };
            if blocked {
                continue;
            }
        }
        if next == target {
            return true;
        }
        path.push(next);
        on_path[next] = true;
        let found = active_path_exists(adj, path, on_path, target, in_z, opens);
        on_path[next] = false;
        path.pop();
        if found {
            return true;
        }
    }
    false
}

/// Every d-separation statement `(x, y, Z)` with `x < y` holding in `g`.
pub fn independence_statements(g: &CausalGraph) -> Vec<(usize, usize, u32)> {
    let n = g.n_nodes();
    let oracle = PathOracle::new(g);
    let mut out = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            for mask in 0u32..1 << n {
                if mask >> x & 1 == 1 || mask >> y & 1 == 1 {
                    continue;
                }
                if oracle.separated(x, y, mask as u64) {
                    out.push((x, y, mask));
                }
            }
        }
    }
    out
}

/// Every spanning tree of the complete graph on `n` nodes as a pair list.
pub fn spanning_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn root(uf: &mut [usize], mut x: usize) -> usize {
        while uf[x] != x {
            x = uf[x];
        }
        x
    }
    fn rec(pairs: &[(usize, usize)], start: usize, n: usize, pick: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if pick.len() == n - 1 {
            let mut uf: Vec<usize> = (0..n).collect();
            for &(a, b) in pick.iter() {
                let (ra, rb) = (root(&mut uf, a), root(&mut uf, b));
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
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    rec(&pairs, 0, n, &mut Vec::new(), &mut out);
    out
}

/// Largest tree weight over all spanning trees of the dataset's variables.
pub fn max_spanning_tree_weight(ds: &DiscreteDataset) -> f64 {
    let names = ds.names();
    spanning_trees(ds.n_vars())
        .into_iter()
        .map(|t| {
            let mut g = CausalGraph::new(names.iter().copied()).unwrap();
            for (a, b) in t {
                g.add_edge(names[a], names[b], cpscausal::EdgeKind::Learnt).unwrap();
            }
            cpscausal::structure::tree_weight(ds, &g).unwrap()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Exact `P(child = c | parents = row)` from counts, uniform on unseen rows.
pub fn mle_ratio(ds: &DiscreteDataset, child: usize, parents: &[usize], row: &[usize], c: usize) -> Ratio<u64> {
    let matches = |r: usize| parents.iter().zip(row).all(|(&p, &s)| ds.column(p)[r] == s);
    let n_r = (0..ds.n_records()).filter(|&r| matches(r)).count() as u64;
    if n_r == 0 {
        return Ratio::new(1, ds.cardinality(child) as u64);
    }
    let n_rc = (0..ds.n_records()).filter(|&r| matches(r) && ds.column(child)[r] == c).count() as u64;
    Ratio::new(n_rc, n_r)
}

/// The double nearest to `r`: IEEE division of exactly representable
/// integers is correctly rounded.
pub fn nearest_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
