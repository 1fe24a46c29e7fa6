//! Kozachenko–Leonenko differential entropy under the max norm:
//! `H = psi(N) - psi(k) + d * < ln(2 eps_i) >`, with `eps_i` the distance
//! from sample `i` to its `k`-th nearest neighbor.

use ndarray::ArrayView2;
use rayon::prelude::*;

use super::{check_finite, dedup_by_jitter, ordered_mean, psi, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::neighbors::NeighborIndex;

pub fn knn_entropy(x: ArrayView2<'_, f64>, k: usize) -> Result<f64> {
    knn_entropy_seeded(x, k, DEFAULT_SEED)
}

pub fn knn_entropy_seeded(x: ArrayView2<'_, f64>, k: usize, seed: u64) -> Result<f64> {
    check_finite(&x)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let (n, d) = x.dim();
    if d == 0 {
        return Err(Error::EmptyInput);
    }
    if n <= k {
        return Err(Error::TooFewSamples { n, min: k });
    }
    let x = dedup_by_jitter(x.as_standard_layout().into_owned(), seed)?;
    let index = NeighborIndex::build(x.view())?;
    let logs: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = x.row(i);
            let row = row.as_slice().expect("standard layout");
            let nn = index.knn_filtered(row, k, |id| id != i);
            (2.0 * nn[k - 1].distance).ln()
        })
        .collect();
    if logs.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("zero k-th neighbor distance".into()));
    }
    Ok(psi(n as f64) - psi(k as f64) + d as f64 * ordered_mean(&logs))
}
