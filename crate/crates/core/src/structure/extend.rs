use crate::graph::{CausalGraph, GraphError};

use super::LearnError;

/// Orient every undirected edge without creating a cycle or a new
/// v-structure (Dor and Tarsi).
///
/// Repeatedly removes a node `x` that has no outgoing directed edge and
/// whose undirected neighbours are adjacent to all of `x`'s other
/// neighbours, orienting its undirected edges into `x`. Among eligible
/// nodes the greatest name is taken, so `A - B` becomes `A -> B`.
pub fn extend_to_dag(pdag: &CausalGraph) -> Result<CausalGraph, LearnError> {
    if pdag.has_directed_cycle() {
        return Err(GraphError::CyclicGraph.into());
    }
    let mut out = pdag.clone();
    let mut work = pdag.clone();
    let n = pdag.n_nodes();
    let mut alive = vec![true; n];
    let mut by_name: Vec<usize> = (0..n).collect();
    by_name.sort_by(|&a, &b| pdag.name(b).cmp(pdag.name(a)));
    for _ in 0..n {
        let eligible = by_name.iter().copied().find(|&x| {
            if !alive[x] || !work.children_idx(x).is_empty() {
                return false;
            }
            let adj = work.adjacents_idx(x);
            work.undirected_neighbors_idx(x)
                .into_iter()
                .all(|y| adj.iter().all(|&z| z == y || work.adjacent_idx(y, z)))
        });
        let Some(x) = eligible else {
            return Err(LearnError::NoConsistentExtension);
        };
        for y in work.undirected_neighbors_idx(x) {
            out.orient_idx(y, x);
        }
        for y in work.adjacents_idx(x) {
            work.remove_adjacency_idx(x, y);
        }
        alive[x] = false;
    }
    Ok(out)
}
