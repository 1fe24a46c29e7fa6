//! Box-kernel mutual information.
//!
//! Each probability is the fraction of the `N` samples within max-norm
//! distance `r` of the sample, itself included, so no estimate can be zero.
//! The local values `ln(p_xy / (p_x p_y))` are averaged over the samples.

use ndarray::{ArrayView2, Axis};
use rayon::prelude::*;

use super::ksg::Marginal;
use super::{check_pair, hstack, ordered_mean, EstimatorKind, MIEstimate};
use crate::error::{Error, Result};

pub fn box_kernel_mi(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, r: f64) -> Result<MIEstimate> {
    check_pair(&x, &y)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {r}")));
    }
    let n = x.nrows();
    if n < 2 {
        return Err(Error::TooFewSamples { n, min: 1 });
    }
    let dx = x.ncols();
    let joint = hstack(&x, &y);
    let mj = Marginal::new(joint.view())?;
    let (xs, ys) = joint.view().split_at(Axis(1), dx);
    let mx = Marginal::new(xs)?;
    let my = Marginal::new(ys)?;
    let nf = n as f64;

    let locals: Vec<Result<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = joint.row(i);
            let row = row.as_slice().expect("standard layout");
            let (xi, yi) = row.split_at(dx);
            let cj = mj.count_all(row, r) as f64;
            let cx = mx.count_all(xi, r) as f64;
            let cy = my.count_all(yi, r) as f64;
            if cj == 0.0 || cx == 0.0 || cy == 0.0 {
                return Err(Error::ZeroProbability(i));
            }
            Ok((cj * nf / (cx * cy)).ln())
        })
        .collect();
    let locals: Vec<f64> = locals.into_iter().collect::<Result<_>>()?;
    Ok(MIEstimate {
        value: ordered_mean(&locals),
        estimator: EstimatorKind::BoxKernel,
        k_or_r: r,
        n_samples: n,
    })
}
