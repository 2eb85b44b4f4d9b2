use std::collections::BTreeMap;

use super::{CausalGraph, EdgeKind, GraphError};

/// Enumeration stops after this many cycles; counts are then a lower bound.
const MAX_CYCLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CycleRepair {
    /// Remove exactly these `(src, dst)` edges.
    Explicit(Vec<(String, String)>),
    /// Greedily remove the edge lying on the most cycles, learnt edges first.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairedGraph {
    pub graph: CausalGraph,
    pub removed: Vec<(String, String)>,
}

/// Remove edges until the directed part of `g` is acyclic.
///
/// Heuristic mode repeatedly picks, among edges on a remaining cycle, the
/// learnt edge that lies on the most cycles (ties by `(src, dst)` name);
/// control and physical edges are only considered when no learnt edge sits
/// on any cycle.
pub fn break_cycles(g: &CausalGraph, repair: &CycleRepair) -> Result<RepairedGraph, GraphError> {
    let mut graph = g.clone();
    let mut removed = Vec::new();
    match repair {
        CycleRepair::Explicit(edges) => {
            for (s, d) in edges {
                graph.remove_edge(s, d)?;
                removed.push((s.clone(), d.clone()));
            }
            if graph.has_directed_cycle() {
                return Err(GraphError::StillCyclic);
            }
        }
        CycleRepair::Heuristic => loop {
            let cycles = simple_cycles(&graph);
            if cycles.is_empty() {
                break;
            }
            let mut hits: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            for cyc in &cycles {
                for k in 0..cyc.len() {
                    *hits.entry((cyc[k], cyc[(k + 1) % cyc.len()])).or_default() += 1;
                }
            }
            let is_learnt = |&(s, d): &(usize, usize)| graph.edge_kind(graph.name(s), graph.name(d)) == Some(EdgeKind::Learnt);
            let prefer_learnt = hits.keys().any(is_learnt);
            let (s, d) = hits
                .iter()
                .filter(|(e, _)| !prefer_learnt || is_learnt(e))
                .max_by(|(ea, ca), (eb, cb)| {
                    ca.cmp(cb).then_with(|| {
                        // Smaller name pair wins ties, so compare reversed.
                        let na = (graph.name(ea.0), graph.name(ea.1));
                        let nb = (graph.name(eb.0), graph.name(eb.1));
                        nb.cmp(&na)
                    })
                })
                .map(|(e, _)| *e)
                .expect("a cycle has at least one edge");
            removed.push((graph.name(s).to_string(), graph.name(d).to_string()));
            graph.remove_edge_idx(s, d);
        },
    }
    Ok(RepairedGraph { graph, removed })
}

/// Simple directed cycles, each rooted at its smallest node index.
fn simple_cycles(g: &CausalGraph) -> Vec<Vec<usize>> {
    let n = g.n_nodes();
    let children: Vec<Vec<usize>> = (0..n).map(|v| g.children_idx(v)).collect();
    let mut out = Vec::new();
    for start in 0..n {
        let mut path = vec![start];
        let mut on_path = vec![false; n];
        on_path[start] = true;
        let mut stack: Vec<usize> = vec![0];
        while let Some(next) = stack.last_mut() {
            let v = *path.last().unwrap();
            if *next < children[v].len() {
                let c = children[v][*next];
                *next += 1;
                if c == start {
                    out.push(path.clone());
                    if out.len() >= MAX_CYCLES {
                        return out;
                    }
                } else if c > start && !on_path[c] {
                    on_path[c] = true;
                    path.push(c);
                    stack.push(0);
                }
            } else {
                stack.pop();
                if let Some(v) = path.pop() {
                    on_path[v] = false;
                }
            }
        }
    }
    out
}
