use std::collections::VecDeque;

use super::CausalGraph;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    /// Arrived from a child, travelling against the edge.
    Up,
    /// Arrived from a parent, travelling along the edge.
    Down,
}

/// Nodes reachable from `x` through an active trail given the observed set `z`.
///
/// Bayes-ball style traversal over (node, direction) states. A collider
/// passes the ball back up only when it or one of its descendants is
/// observed, which is checked via the ancestor closure of `z`.
pub(super) fn reachable(g: &CausalGraph, x: usize, z: &[usize]) -> Vec<bool> {
    let n = g.n_nodes();
    let parents: Vec<Vec<usize>> = (0..n).map(|v| g.parents_idx(v)).collect();
    let children: Vec<Vec<usize>> = (0..n).map(|v| g.children_idx(v)).collect();

    let mut observed = vec![false; n];
    for &v in z {
        observed[v] = true;
    }
    // Ancestors of z, including z itself.
    let mut anc = vec![false; n];
    let mut stack: Vec<usize> = z.to_vec();
    while let Some(v) = stack.pop() {
        if !anc[v] {
            anc[v] = true;
            stack.extend(&parents[v]);
        }
    }

    let mut visited = vec![[false; 2]; n];
    let mut reach = vec![false; n];
    let mut queue = VecDeque::from([(x, Dir::Up)]);
    while let Some((v, dir)) = queue.pop_front() {
        let slot = dir as usize;
        if visited[v][slot] {
            continue;
        }
        visited[v][slot] = true;
        if !observed[v] {
            reach[v] = true;
        }
        match dir {
            Dir::Up if !observed[v] => {
                queue.extend(parents[v].iter().map(|&p| (p, Dir::Up)));
                queue.extend(children[v].iter().map(|&c| (c, Dir::Down)));
            }
            Dir::Up => {}
            Dir::Down => {
                if !observed[v] {
                    queue.extend(children[v].iter().map(|&c| (c, Dir::Down)));
                }
                if anc[v] {
                    queue.extend(parents[v].iter().map(|&p| (p, Dir::Up)));
                }
            }
        }
    }
    reach[x] = false;
    reach
}
