//! Kraskov–Stögbauer–Grassberger mutual information, second algorithm.
//!
//! For each sample the `k` nearest joint-space neighbors are found under the
//! max norm, where the joint distance is the larger of the two marginal
//! max-norm distances. The marginal radii `r_x`, `r_y` are the largest
//! marginal distances among those `k` neighbors. `n_x` counts the other
//! samples within `r_x` in X (boundary included), `n_y` likewise, and
//!
//! ```text
//! I(X;Y) = psi(k) - 1/k - < psi(n_x) + psi(n_y) > + psi(N)
//! ```
//!
//! Counts are floored at 1 before `psi` is applied.

use ndarray::{ArrayView2, Axis};
use rayon::prelude::*;

use super::{check_pair, dedup_by_jitter, hstack, ordered_mean, psi, EstimatorKind, MIEstimate, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::neighbors::{NeighborIndex, SortedAxis};

/// Radius counts in one marginal space.
pub(crate) enum Marginal {
    Line(SortedAxis),
    Tree(NeighborIndex),
}

impl Marginal {
    pub(crate) fn new(x: ArrayView2<'_, f64>) -> Result<Self> {
        if x.ncols() == 1 {
            Ok(Marginal::Line(SortedAxis::new(x.column(0).iter().cloned())))
        } else {
            Ok(Marginal::Tree(NeighborIndex::build(x)?))
        }
    }

    /// Points within `r` of `point` (boundary included), other than `self_id`.
    pub(crate) fn count_others(&self, point: &[f64], self_id: usize, r: f64) -> usize {
        match self {
            // The centre is always within an inclusive radius of itself.
            Marginal::Line(axis) => axis.count_within(point[0], r, true) - 1,
            Marginal::Tree(tree) => tree.count_within_filtered(point, r, true, |id| id != self_id),
        }
    }

    /// Points within `r` of `point` (boundary included), the point itself counted.
    pub(crate) fn count_all(&self, point: &[f64], r: f64) -> usize {
        match self {
            Marginal::Line(axis) => axis.count_within(point[0], r, true),
            Marginal::Tree(tree) => tree.count_within_filtered(point, r, true, |_| true),
        }
    }
}

#[inline]
fn block_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

/// KSG estimate with the default jitter seed.
pub fn ksg_mi(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, k: usize) -> Result<MIEstimate> {
    ksg_mi_seeded(x, y, k, DEFAULT_SEED)
}

/// KSG estimate; `seed` drives the jitter applied when joint rows repeat.
pub fn ksg_mi_seeded(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, k: usize, seed: u64) -> Result<MIEstimate> {
    check_pair(&x, &y)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let n = x.nrows();
    if n <= k {
        return Err(Error::TooFewSamples { n, min: k });
    }
    let dx = x.ncols();
    let joint = dedup_by_jitter(hstack(&x, &y), seed)?;
    let (xs, ys) = joint.view().split_at(Axis(1), dx);
    let joint_index = NeighborIndex::build(joint.view())?;
    let mx = Marginal::new(xs)?;
    let my = Marginal::new(ys)?;

    let terms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = joint.row(i);
            let row = row.as_slice().expect("standard layout");
            let (xi, yi) = row.split_at(dx);
            let neighbors = joint_index.knn_filtered(row, k, |id| id != i);
            let (mut rx, mut ry) = (0.0f64, 0.0f64);
            for nb in &neighbors {
                let other = joint.row(nb.id);
                let other = other.as_slice().expect("standard layout");
                let (ox, oy) = other.split_at(dx);
                rx = rx.max(block_dist(xi, ox));
                ry = ry.max(block_dist(yi, oy));
            }
            let nx = mx.count_others(xi, i, rx).max(1);
            let ny = my.count_others(yi, i, ry).max(1);
            psi(nx as f64) + psi(ny as f64)
        })
        .collect();

    let kf = k as f64;
    let value = psi(kf) - 1.0 / kf - ordered_mean(&terms) + psi(n as f64);
    if !value.is_finite() {
        return Err(Error::DegenerateData("non-finite estimate".into()));
    }
    Ok(MIEstimate {
        value,
        estimator: EstimatorKind::Ksg2,
        k_or_r: kf,
        n_samples: n,
    })
}
