use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::DiscreteDataset;

use super::counts::config_index;
use super::EstimationError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CiResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// `p_value > alpha`.
    pub independent: bool,
}

fn resolve(ds: &DiscreteDataset, name: &str) -> Result<usize, EstimationError> {
    ds.index_of(name).ok_or_else(|| EstimationError::UnknownColumn(name.to_string()))
}

/// Pearson χ² test of `i ⊥ j | S` stratified over the configurations of `S`.
pub fn chi_square_ci(
    ds: &DiscreteDataset,
    i: &str,
    j: &str,
    given: &[&str],
    alpha: f64,
) -> Result<CiResult, EstimationError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EstimationError::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let a = resolve(ds, i)?;
    let b = resolve(ds, j)?;
    let mut s = Vec::with_capacity(given.len());
    for &g in given {
        let idx = resolve(ds, g)?;
        if idx == a || idx == b || s.contains(&idx) {
            return Err(EstimationError::InvalidArgument(format!("`{g}` cannot be in the conditioning set")));
        }
        s.push(idx);
    }
    if a == b {
        return Err(EstimationError::InvalidArgument(format!("cannot test `{i}` against itself")));
    }
    chi_square_idx(ds, a, b, &s, alpha)
}

pub(crate) fn chi_square_idx(
    ds: &DiscreteDataset,
    i: usize,
    j: usize,
    given: &[usize],
    alpha: f64,
) -> Result<CiResult, EstimationError> {
    // Canonical orientation keeps the floating-point sum identical for (i, j) and (j, i).
    let (i, j) = if ds.specs()[i].name <= ds.specs()[j].name { (i, j) } else { (j, i) };
    let mut given = given.to_vec();
    given.sort_by(|&a, &b| ds.specs()[a].name.cmp(&ds.specs()[b].name));
    for v in [i, j] {
        let col = ds.column(v);
        if col.iter().all(|&x| x == col[0]) {
            return Err(EstimationError::InsufficientData(format!(
                "`{}` is constant",
                ds.specs()[v].name
            )));
        }
    }
    let ci = ds.cardinality(i);
    let cj = ds.cardinality(j);
    let s_cards: Vec<usize> = given.iter().map(|&v| ds.cardinality(v)).collect();
    let strata: usize = s_cards.iter().product();
    let cell = ci * cj;
    let mut table = vec![0u64; strata * cell];
    let (col_i, col_j) = (ds.column(i), ds.column(j));
    let s_cols: Vec<&[usize]> = given.iter().map(|&v| ds.column(v)).collect();
    for r in 0..ds.n_records() {
        let z = config_index(&s_cards, s_cols.iter().map(|c| c[r]));
        table[z * cell + col_i[r] * cj + col_j[r]] += 1;
    }

    let mut statistic = 0.0;
    let mut dof = 0usize;
    let mut row = vec![0u64; ci];
    let mut col = vec![0u64; cj];
    for z in 0..strata {
        let t = &table[z * cell..(z + 1) * cell];
        let n: u64 = t.iter().sum();
        if n == 0 {
            continue;
        }
        row.iter_mut().for_each(|x| *x = 0);
        col.iter_mut().for_each(|x| *x = 0);
        for a in 0..ci {
            for b in 0..cj {
                row[a] += t[a * cj + b];
                col[b] += t[a * cj + b];
            }
        }
        dof += (ci - 1) * (cj - 1);
        for a in 0..ci {
            for b in 0..cj {
                if row[a] == 0 || col[b] == 0 {
                    continue;
                }
                let expected = row[a] as f64 * col[b] as f64 / n as f64;
                let d = t[a * cj + b] as f64 - expected;
                statistic += d * d / expected;
            }
        }
    }
    if dof == 0 {
        return Err(EstimationError::InsufficientData("every stratum is empty".into()));
    }
    let p_value = ChiSquared::new(dof as f64)
        .expect("dof is positive")
        .sf(statistic)
        .clamp(0.0, 1.0);
    Ok(CiResult { statistic, dof, p_value, independent: p_value > alpha })
}

/// Empirical mutual information in nats.
pub fn mutual_information(ds: &DiscreteDataset, i: &str, j: &str) -> Result<f64, EstimationError> {
    let a = resolve(ds, i)?;
    let b = resolve(ds, j)?;
    if a == b {
        return Err(EstimationError::InvalidArgument(format!("mutual information of `{i}` with itself")));
    }
    Ok(mutual_information_idx(ds, a, b))
}

pub(crate) fn mutual_information_idx(ds: &DiscreteDataset, i: usize, j: usize) -> f64 {
    let (i, j) = if ds.specs()[i].name <= ds.specs()[j].name { (i, j) } else { (j, i) };
    let ci = ds.cardinality(i);
    let cj = ds.cardinality(j);
    let mut joint = vec![0u64; ci * cj];
    for (&a, &b) in ds.column(i).iter().zip(ds.column(j)) {
        joint[a * cj + b] += 1;
    }
    let n = ds.n_records() as u64;
    let mut mi_ = vec![0u64; ci];
    let mut mj = vec![0u64; cj];
    for a in 0..ci {
        for b in 0..cj {
            mi_[a] += joint[a * cj + b];
            mj[b] += joint[a * cj + b];
        }
    }
    let mut w = 0.0;
    for a in 0..ci {
        for b in 0..cj {
            let nab = joint[a * cj + b];
            if nab == 0 {
                continue;
            }
            // Integer numerator and denominator: a factorizing cell gives ln(1) = 0 exactly.
            let ratio = (nab as f64 * n as f64) / (mi_[a] as f64 * mj[b] as f64);
            w += nab as f64 / n as f64 * ratio.ln();
        }
    }
    w.max(0.0)
}
