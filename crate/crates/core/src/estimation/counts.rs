use crate::data::DiscreteDataset;

use super::EstimationError;

/// Joint counts `N(child = c, parents = r)`.
///
/// Rows enumerate parent configurations row-major over the parent state
/// indices: the first parent varies slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contingency {
    pub child_card: usize,
    pub parent_cards: Vec<usize>,
    pub counts: Vec<u64>,
}

impl Contingency {
    pub fn n_rows(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.counts[r * self.child_card..(r + 1) * self.child_card]
    }

    pub fn row_total(&self, r: usize) -> u64 {
        self.row(r).iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Row index of a parent configuration, first parent most significant.
pub(crate) fn config_index(cards: &[usize], states: impl IntoIterator<Item = usize>) -> usize {
    cards.iter().zip(states).fold(0, |acc, (&card, s)| acc * card + s)
}

pub(crate) fn counts_idx(ds: &DiscreteDataset, child: usize, parents: &[usize]) -> Contingency {
    let child_card = ds.cardinality(child);
    let parent_cards: Vec<usize> = parents.iter().map(|&p| ds.cardinality(p)).collect();
    let rows: usize = parent_cards.iter().product();
    let mut counts = vec![0u64; rows * child_card];
    let child_col = ds.column(child);
    let parent_cols: Vec<&[usize]> = parents.iter().map(|&p| ds.column(p)).collect();
    for (r, &c) in child_col.iter().enumerate() {
        let row = config_index(&parent_cards, parent_cols.iter().map(|col| col[r]));
        counts[row * child_card + c] += 1;
    }
    Contingency { child_card, parent_cards, counts }
}

/// Contingency counts of `child` against the listed `parents`, in that order.
pub fn counts(ds: &DiscreteDataset, child: &str, parents: &[&str]) -> Result<Contingency, EstimationError> {
    let col = |name: &str| ds.index_of(name).ok_or_else(|| EstimationError::UnknownColumn(name.to_string()));
    let c = col(child)?;
    let mut ps = Vec::with_capacity(parents.len());
    for &p in parents {
        let idx = col(p)?;
        if idx == c || ps.contains(&idx) {
            return Err(EstimationError::DuplicateParent(p.to_string()));
        }
        ps.push(idx);
    }
    Ok(counts_idx(ds, c, &ps))
}
