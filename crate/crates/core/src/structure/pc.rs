use std::collections::BTreeMap;

use crate::data::DiscreteDataset;
use crate::estimation::{chi_square_idx, EstimationError};
use crate::graph::{CausalGraph, EdgeKind};

use super::{names_sorted, require_data, LearnError, PcConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct PcResult {
    /// Partially directed: edges the data cannot orient stay undirected.
    pub graph: CausalGraph,
    /// Separating set of every removed pair, keyed by the sorted name pair.
    pub sepsets: BTreeMap<(String, String), Vec<String>>,
    pub tests_run: usize,
}

/// Lexicographic `k`-subsets of `items`.
fn subsets(items: &[usize], k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    let n = items.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0usize; k];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = items[i];
        }
        if f(&buf) {
            return;
        }
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else { return };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Stable PC: adjacencies are frozen at the start of each level, so the
/// skeleton does not depend on the order in which pairs are visited.
pub fn learn_pc(ds: &DiscreteDataset, cfg: &PcConfig) -> Result<PcResult, LearnError> {
    require_data(ds)?;
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(LearnError::InvalidConfig(format!("alpha must lie in (0, 1), got {}", cfg.alpha)));
    }
    let n = ds.n_vars();
    let name = |v: usize| ds.specs()[v].name.as_str();
    let order = names_sorted(ds);
    let max_level = cfg.max_cond_size.unwrap_or(n - 2);

    let mut adj = vec![vec![true; n]; n];
    for (v, row) in adj.iter_mut().enumerate() {
        row[v] = false;
    }
    let mut sepset: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut tests_run = 0usize;

    for level in 0..=max_level {
        let frozen = adj.clone();
        let neighbours = |x: usize, y: usize| -> Vec<usize> {
            order.iter().copied().filter(|&z| z != y && frozen[x][z]).collect()
        };
        let mut any_testable = false;
        for (a, &i) in order.iter().enumerate() {
            for &j in &order[a + 1..] {
                if !adj[i][j] {
                    continue;
                }
                let mut found: Option<Vec<usize>> = None;
                for (x, y) in [(i, j), (j, i)] {
                    let cands = neighbours(x, y);
                    if cands.len() < level {
                        continue;
                    }
                    any_testable = true;
                    let mut err = None;
                    subsets(&cands, level, |s| {
                        tests_run += 1;
                        match chi_square_idx(ds, i, j, s, cfg.alpha) {
                            Ok(r) if r.independent => {
                                found = Some(s.to_vec());
                                true
                            }
                            Ok(_) => false,
                            // A constant variable carries no information about anything.
                            Err(EstimationError::InsufficientData(_)) => {
                                found = Some(s.to_vec());
                                true
                            }
                            Err(e) => {
                                err = Some(e);
                                true
                            }
                        }
                    });
                    if let Some(e) = err {
                        return Err(e.into());
                    }
                    if found.is_some() {
                        break;
                    }
                }
                if let Some(s) = found {
                    adj[i][j] = false;
                    adj[j][i] = false;
                    sepset.insert((i.min(j), i.max(j)), s);
                }
            }
        }
        if !any_testable {
            break;
        }
    }

    let mut g = CausalGraph::new(ds.names()).map_err(LearnError::Graph)?;
    for (a, &i) in order.iter().enumerate() {
        for &j in &order[a + 1..] {
            if adj[i][j] {
                g.add_undirected_idx(i, j, EdgeKind::Learnt);
            }
        }
    }

    // Unshielded triples i - k - j with k outside sepset(i, j).
    for &k in &order {
        for (a, &i) in order.iter().enumerate() {
            for &j in &order[a + 1..] {
                if i == k || j == k || adj[i][j] || !adj[i][k] || !adj[j][k] {
                    continue;
                }
                let s = &sepset[&(i.min(j), i.max(j))];
                if s.contains(&k) {
                    continue;
                }
                // Orient each arm only if still undirected; conflicts leave it as is.
                g.orient_idx(i, k);
                g.orient_idx(j, k);
            }
        }
    }
    apply_meek(&mut g, &order);

    let sepsets = sepset
        .into_iter()
        .map(|((a, b), s)| {
            let (x, y) = if name(a) <= name(b) { (a, b) } else { (b, a) };
            let mut names: Vec<String> = s.into_iter().map(|v| name(v).to_string()).collect();
            names.sort();
            ((name(x).to_string(), name(y).to_string()), names)
        })
        .collect();
    Ok(PcResult { graph: g, sepsets, tests_run })
}

/// Meek rules R1-R4 applied until nothing changes; edges visited in name order.
pub(crate) fn apply_meek(g: &mut CausalGraph, order: &[usize]) {
    loop {
        let mut changed = false;
        for &a in order {
            for &b in order {
                if a == b || !g.has_undirected_idx(a, b) {
                    continue;
                }
                if meek_orients(g, a, b) {
                    g.orient_idx(a, b);
                    changed = true;
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// Whether some Meek rule forces the undirected edge `a - b` into `a -> b`.
fn meek_orients(g: &CausalGraph, a: usize, b: usize) -> bool {
    let n = g.n_nodes();
    let directed = |x: usize, y: usize| g.has_directed_idx(x, y);
    let undirected = |x: usize, y: usize| g.has_undirected_idx(x, y);
    let adjacent = |x: usize, y: usize| g.adjacent_idx(x, y);
    // R1: c -> a - b, c and b non-adjacent.
    if (0..n).any(|c| c != b && directed(c, a) && !adjacent(c, b)) {
        return true;
    }
    // R2: a -> c -> b.
    if (0..n).any(|c| directed(a, c) && directed(c, b)) {
        return true;
    }
    // R3: a - c -> b and a - d -> b with c, d non-adjacent.
    let mids: Vec<usize> = (0..n).filter(|&c| undirected(a, c) && directed(c, b)).collect();
    for (x, &c) in mids.iter().enumerate() {
        if mids[x + 1..].iter().any(|&d| !adjacent(c, d)) {
            return true;
        }
    }
    // R4: a - c -> d -> b with c, b non-adjacent and a adjacent to d.
    for c in (0..n).filter(|&c| c != b && undirected(a, c) && !adjacent(c, b)) {
        if (0..n).any(|d| d != a && directed(c, d) && directed(d, b) && adjacent(a, d)) {
            return true;
        }
    }
    false
}
