use crate::data::DiscreteDataset;
use crate::estimation::{chi_square_idx, family_score_idx, ScoreMethod};
use crate::graph::{CausalGraph, EdgeKind};

use super::{require_data, HcConfig, LearnError};

/// Improvements at or below this are treated as no change.
const EPS: f64 = 1e-9;
/// Marginal p-value above which the prefilter drops a pair from add moves.
const PREFILTER_P: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct HcResult {
    pub graph: CausalGraph,
    /// `trace[0]` is the empty-graph score, then one entry per accepted move.
    pub trace: Vec<f64>,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum MoveKind {
    Add,
    Remove,
    Reverse,
}

/// Whether a directed path `from ->* to` exists, optionally ignoring one edge.
fn reaches(g: &CausalGraph, from: usize, to: usize, skip: Option<(usize, usize)>) -> bool {
    let mut seen = vec![false; g.n_nodes()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        for c in g.children_idx(v) {
            if Some((v, c)) == skip || seen[c] {
                continue;
            }
            if c == to {
                return true;
            }
            seen[c] = true;
            stack.push(c);
        }
    }
    false
}

fn validate(cfg: &HcConfig) -> Result<(), LearnError> {
    if cfg.plateau_k == 0 || cfg.max_iter == 0 {
        return Err(LearnError::InvalidConfig("plateau_k and max_iter must be at least 1".into()));
    }
    if cfg.plateau_k > cfg.max_iter {
        return Err(LearnError::InvalidConfig(format!(
            "plateau_k ({}) exceeds max_iter ({})",
            cfg.plateau_k, cfg.max_iter
        )));
    }
    if let ScoreMethod::Bdeu { ess } = cfg.score {
        if !(ess > 0.0 && ess.is_finite()) {
            return Err(LearnError::InvalidConfig(format!("equivalent sample size must be positive, got {ess}")));
        }
    }
    Ok(())
}

/// Greedy search over single-edge moves starting from the empty graph.
///
/// Every candidate is scored before one is chosen; among moves whose gain
/// is within `1e-9` of the best, the smallest `(kind, src, dst)` wins with
/// add < remove < reverse and names compared lexicographically.
pub fn learn_hc(ds: &DiscreteDataset, cfg: &HcConfig) -> Result<HcResult, LearnError> {
    require_data(ds)?;
    validate(cfg)?;
    let n = ds.n_vars();
    let name = |v: usize| ds.specs()[v].name.as_str();
    let mut g = CausalGraph::new(ds.names())?;

    let allowed: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    i != j
                        && (!cfg.prefilter
                            || matches!(chi_square_idx(ds, i, j, &[], 0.05), Ok(r) if r.p_value <= PREFILTER_P))
                })
                .collect()
        })
        .collect();

    let family = |g: &CausalGraph, v: usize, extra: Option<usize>, without: Option<usize>| -> f64 {
        let mut ps: Vec<usize> = g.parents_idx(v).into_iter().filter(|&p| Some(p) != without).collect();
        ps.extend(extra);
        ps.sort_by(|&a, &b| name(a).cmp(name(b)));
        family_score_idx(ds, v, &ps, cfg.score)
    };
    let mut local: Vec<f64> = (0..n).map(|v| family(&g, v, None, None)).collect();
    let total = |local: &[f64]| local.iter().sum::<f64>();
    let mut trace = vec![total(&local)];
    let cap = cfg.max_parents.unwrap_or(usize::MAX);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| name(a).cmp(name(b)));

    for _ in 0..cfg.max_iter {
        // (gain, kind, src, dst) for the incumbent.
        let mut best: Option<(f64, MoveKind, usize, usize)> = None;
        let mut consider = |gain: f64, kind: MoveKind, s: usize, d: usize| {
            let better = match best {
                None => true,
                Some((b, bk, bs, bd)) => {
                    gain > b + EPS
                        || (gain >= b - EPS && (kind, name(s), name(d)) < (bk, name(bs), name(bd)))
                }
            };
            if better {
                best = Some((gain, kind, s, d));
            }
        };
        for &s in &order {
            for &d in &order {
                if s == d {
                    continue;
                }
                if g.has_directed_idx(s, d) {
                    consider(family(&g, d, None, Some(s)) - local[d], MoveKind::Remove, s, d);
                    if g.parents_idx(s).len() < cap && !reaches(&g, s, d, Some((s, d))) {
                        let gain = family(&g, d, None, Some(s)) - local[d] + family(&g, s, Some(d), None) - local[s];
                        consider(gain, MoveKind::Reverse, s, d);
                    }
                } else if !g.adjacent_idx(s, d)
                    && allowed[s][d]
                    && g.parents_idx(d).len() < cap
                    && !reaches(&g, d, s, None)
                {
                    consider(family(&g, d, Some(s), None) - local[d], MoveKind::Add, s, d);
                }
            }
        }
        match best {
            Some((gain, kind, s, d)) if gain > EPS => {
                match kind {
                    MoveKind::Add => g.add_edge_idx(s, d, EdgeKind::Learnt),
                    MoveKind::Remove => {
                        g.remove_edge_idx(s, d);
                    }
                    MoveKind::Reverse => {
                        g.remove_edge_idx(s, d);
                        g.add_edge_idx(d, s, EdgeKind::Learnt);
                    }
                }
                local[s] = family(&g, s, None, None);
                local[d] = family(&g, d, None, None);
                trace.push(total(&local));
            }
            // A round without improvement leaves the graph unchanged, so every
            // later round repeats it and any plateau length is reached at once.
            _ => break,
        }
    }
    let score = *trace.last().expect("trace starts non-empty");
    Ok(HcResult { graph: g, trace, score })
}
