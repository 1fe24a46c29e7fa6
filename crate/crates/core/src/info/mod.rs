//! Information-theoretic estimators on continuous samples.
//!
//! All quantities are in nats. Samples are given as matrices whose rows are
//! observations; row `i` of one variable pairs with row `i` of another.

mod composite;
mod digamma;
mod entropy;
mod kernel;
mod ksg;
mod spi;

pub use composite::{co_information, multi_information};
pub use digamma::digamma;
pub use entropy::{knn_entropy, knn_entropy_seeded};
pub use kernel::box_kernel_mi;
pub use ksg::{ksg_mi, ksg_mi_seeded};
pub use spi::{r_of_p, spi, Estimator, RatioPoint, SpiRequest};

pub(crate) use digamma::psi;

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default neighbor count for the k-NN estimators.
pub const DEFAULT_K: usize = 4;

/// Default seed for tie-breaking jitter.
pub const DEFAULT_SEED: u64 = 42;

const JITTER_SCALE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Ksg2,
    BoxKernel,
}

/// A mutual-information value with the settings that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MIEstimate {
    /// Nats.
    pub value: f64,
    pub estimator: EstimatorKind,
    /// `k` for KSG, the bandwidth `r` for the box kernel.
    pub k_or_r: f64,
    pub n_samples: usize,
}

impl MIEstimate {
    pub fn bits(&self) -> f64 {
        self.value / std::f64::consts::LN_2
    }
}

pub(crate) fn check_pair(x: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>) -> Result<()> {
    if x.nrows() != y.nrows() {
        return Err(Error::InvalidParameter(format!(
            "paired samples differ in length: {} vs {}",
            x.nrows(),
            y.nrows()
        )));
    }
    if x.ncols() == 0 || y.ncols() == 0 {
        return Err(Error::EmptyInput);
    }
    check_finite(x)?;
    check_finite(y)
}

pub(crate) fn check_finite(x: &ArrayView2<'_, f64>) -> Result<()> {
    if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            index: pos / x.ncols().max(1),
        });
    }
    Ok(())
}

/// Row-major `[x | y]`.
pub(crate) fn hstack(x: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>) -> Array2<f64> {
    let joined = concatenate(Axis(1), &[x.view(), y.view()]).expect("row counts checked");
    if joined.is_standard_layout() {
        joined
    } else {
        joined.as_standard_layout().into_owned()
    }
}

/// Row indices sorted lexicographically by row content.
fn lex_order(m: &ArrayView2<'_, f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| {
        m.row(a)
            .iter()
            .zip(m.row(b).iter())
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order
}

/// What duplicate rows look like in a sample.
pub(crate) enum Duplicates {
    None,
    Some,
    AllIdentical,
}

pub(crate) fn duplicates(m: &ArrayView2<'_, f64>) -> Duplicates {
    let order = lex_order(m);
    let same = |a: usize, b: usize| m.row(a) == m.row(b);
    let dup_pairs = order.windows(2).filter(|w| same(w[0], w[1])).count();
    if m.nrows() > 1 && dup_pairs == m.nrows() - 1 {
        Duplicates::AllIdentical
    } else if dup_pairs > 0 {
        Duplicates::Some
    } else {
        Duplicates::None
    }
}

/// Adds uniform noise of half-width `1e-10 * range` to every column that
/// has a nonzero range. Deterministic for a given seed.
pub(crate) fn jitter(m: &mut Array2<f64>, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranges: Vec<f64> = m
        .columns()
        .into_iter()
        .map(|c| {
            let (lo, hi) = c.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
            hi - lo
        })
        .collect();
    for mut row in m.rows_mut() {
        for (v, &r) in row.iter_mut().zip(&ranges) {
            if r > 0.0 {
                *v += JITTER_SCALE * r * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
    }
}

/// Returns the sample itself or a jittered copy when rows repeat.
pub(crate) fn dedup_by_jitter(m: Array2<f64>, seed: u64) -> Result<Array2<f64>> {
    match duplicates(&m.view()) {
        Duplicates::None => Ok(m),
        Duplicates::AllIdentical => Err(Error::DegenerateData("all points are identical".into())),
        Duplicates::Some => {
            let mut m = m;
            jitter(&mut m, seed);
            Ok(m)
        }
    }
}

/// Mean of per-sample terms in index order, independent of thread count.
pub(crate) fn ordered_mean(terms: &[f64]) -> f64 {
    terms.iter().sum::<f64>() / terms.len() as f64
}
