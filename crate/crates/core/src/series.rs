//! Scalar time series, reconstruction parameters and delay matrices.
//!
//! Indexing is 0-based throughout. A delay vector anchored at sample `j` is
//! `[x[j], x[j - tau], ..., x[j - (m - 1) * tau]]` and its target is
//! `x[j + p]`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Synthetic,
    File,
}

/// A uniformly sampled, finite, scalar signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    sample_step: f64,
    name: String,
    source: Source,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, sample_step: f64, name: impl Into<String>, source: Source) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SeriesTooShort {
                required: 1,
                available: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if !(sample_step > 0.0 && sample_step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sample_step must be positive, got {sample_step}"
            )));
        }
        Ok(Self {
            values,
            sample_step,
            name: name.into(),
            source,
        })
    }

    /// Convenience constructor for unit-step synthetic data.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1.0, "series", Source::Synthetic)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_step(&self) -> f64 {
        self.sample_step
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> Source {
        self.source
    }

    /// The first `len` samples, keeping metadata.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len > self.len() {
            return Err(Error::SeriesTooShort {
                required: len,
                available: self.len(),
            });
        }
        Self::new(
            self.values[..len].to_vec(),
            self.sample_step,
            self.name.clone(),
            self.source,
        )
    }

    /// Population standard deviation.
    pub fn std_dev(&self) -> f64 {
        let n = self.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        (self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
    }
}

/// Dimension `m`, delay `tau` and horizon `p` of a delay reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReconstructionParams {
    pub m: usize,
    pub tau: usize,
    pub p: usize,
}

impl ReconstructionParams {
    pub fn new(m: usize, tau: usize, p: usize) -> Result<Self> {
        if m == 0 || tau == 0 || p == 0 {
            return Err(Error::InvalidParameter(format!(
                "m, tau and p must all be >= 1 (got m={m}, tau={tau}, p={p})"
            )));
        }
        Ok(Self { m, tau, p })
    }

    /// Samples spanned by the delay vector beyond its anchor, `(m - 1) * tau`.
    pub fn span(&self) -> usize {
        (self.m - 1) * self.tau
    }

    /// Number of rows a series of length `n` yields, if any.
    pub fn rows_for(&self, n: usize) -> Option<usize> {
        n.checked_sub(self.span() + self.p).filter(|&r| r > 0)
    }

    pub fn check_len(&self, n: usize) -> Result<usize> {
        self.rows_for(n).ok_or(Error::SeriesTooShort {
            required: self.span() + self.p,
            available: n,
        })
    }
}

/// Aligned delay vectors and their `p`-step-ahead targets.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayMatrix {
    pub vectors: Array2<f64>,
    pub targets: Vec<f64>,
    pub params: ReconstructionParams,
    pub base_indices: Vec<usize>,
}

impl DelayMatrix {
    pub fn rows(&self) -> usize {
        self.targets.len()
    }

    /// Targets as an `R x 1` matrix, the shape the estimators take.
    pub fn targets_column(&self) -> Array2<f64> {
        Array2::from_shape_vec((self.targets.len(), 1), self.targets.clone()).expect("targets length matches")
    }
}

/// Builds every delay vector whose target lies inside the series.
pub fn build_delay_vectors(ts: &TimeSeries, params: ReconstructionParams) -> Result<DelayMatrix> {
    build_from_slice(ts.values(), params)
}

pub(crate) fn build_from_slice(x: &[f64], params: ReconstructionParams) -> Result<DelayMatrix> {
    let rows = params.check_len(x.len())?;
    let first = params.span();
    let mut vectors = Array2::zeros((rows, params.m));
    let mut targets = Vec::with_capacity(rows);
    let mut base_indices = Vec::with_capacity(rows);
    for (r, mut row) in vectors.outer_iter_mut().enumerate() {
        let j = first + r;
        for (c, v) in row.iter_mut().enumerate() {
            *v = x[j - c * params.tau];
        }
        targets.push(x[j + params.p]);
        base_indices.push(j);
    }
    Ok(DelayMatrix {
        vectors,
        targets,
        params,
        base_indices,
    })
}

/// Splits off a training prefix of `n` samples and the following `k` test samples.
pub fn split_train_test(ts: &TimeSeries, n: usize, k: usize) -> Result<(TimeSeries, TimeSeries)> {
    if n + k > ts.len() || n < 2 || k < 1 {
        return Err(Error::InvalidSplit {
            train: n,
            test: k,
            len: ts.len(),
        });
    }
    let part = |range: std::ops::Range<usize>| TimeSeries {
        values: ts.values[range].to_vec(),
        sample_step: ts.sample_step,
        name: ts.name.clone(),
        source: ts.source,
    };
    // A one-sample test segment is legal here even though `new` would refuse it.
    Ok((part(0..n), part(n..n + k)))
}

/// Maps every sample to `scale * x + offset`.
pub fn affine_transform(ts: &TimeSeries, scale: f64, offset: f64) -> Result<TimeSeries> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    TimeSeries::new(
        ts.values.iter().map(|v| scale * v + offset).collect(),
        ts.sample_step,
        ts.name.clone(),
        ts.source,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn scalar_reconstruction() {
        let dm = build_delay_vectors(&ts(&[1., 2., 3., 4., 5.]), ReconstructionParams::new(1, 1, 1).unwrap()).unwrap();
        assert_eq!(dm.vectors.column(0).to_vec(), vec![1., 2., 3., 4.]);
        assert_eq!(dm.targets, vec![2., 3., 4., 5.]);
    }

    #[test]
    fn first_row_with_delay_two() {
        let dm = build_delay_vectors(
            &ts(&[1., 2., 3., 4., 5., 6.]),
            ReconstructionParams::new(2, 2, 1).unwrap(),
        )
        .unwrap();
        assert_eq!(dm.vectors.row(0).to_vec(), vec![3., 1.]);
        assert_eq!(dm.targets[0], 4.);
    }

    #[test]
    fn row_count_for_hundred_samples() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let dm = build_delay_vectors(&ts(&x), ReconstructionParams::new(3, 2, 1).unwrap()).unwrap();
        assert_eq!(dm.rows(), 95);
    }

    #[test]
    fn too_short() {
        let err = build_delay_vectors(&ts(&[1., 2., 3.]), ReconstructionParams::new(2, 1, 1).unwrap());
        assert!(err.is_ok());
        let err = build_delay_vectors(&ts(&[1., 2., 3.]), ReconstructionParams::new(2, 2, 1).unwrap());
        assert!(matches!(err, Err(Error::SeriesTooShort { .. })));
    }

    #[test]
    fn rejects_bad_series() {
        assert!(matches!(
            TimeSeries::from_values(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(TimeSeries::from_values(vec![1.0]).is_err());
        assert!(TimeSeries::new(vec![1.0, 2.0], 0.0, "x", Source::File).is_err());
        assert!(ReconstructionParams::new(0, 1, 1).is_err());
    }

    #[test]
    fn splits() {
        let s = ts(&(1..=10).map(f64::from).collect::<Vec<_>>());
        let (train, test) = split_train_test(&s, 8, 2).unwrap();
        assert_eq!(train.values(), &s.values()[..8]);
        assert_eq!(test.values(), &[9., 10.]);
        let (_, test) = split_train_test(&s, 9, 1).unwrap();
        assert_eq!(test.values(), &[10.]);
        assert!(matches!(split_train_test(&s, 9, 2), Err(Error::InvalidSplit { .. })));
    }

    #[test]
    fn affine() {
        let s = ts(&[1., 2.]);
        assert_eq!(affine_transform(&s, 1.0, 0.0).unwrap(), s);
        assert_eq!(affine_transform(&s, 2.0, 1.0).unwrap().values(), &[3., 5.]);
        assert!(affine_transform(&s, 0.0, 1.0).is_err());

        let wide = ts(&[-3.0, 0.5, 7.0, 2.0]);
        let range = |t: &TimeSeries| {
            let v = t.values();
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        };
        let halved = affine_transform(&wide, 0.5, 0.0).unwrap();
        assert_eq!(range(&halved), range(&wide) / 2.0);
    }

    /// Independent enumeration of the valid anchors.
    fn brute_force_rows(n: usize, m: usize, tau: usize, p: usize) -> Vec<usize> {
        (0..n).filter(|&j| (0..m).all(|c| j >= c * tau) && j + p < n).collect()
    }

    #[test]
    fn row_count_law_exhaustive() {
        for n in 2..=50 {
            for m in 1..=5 {
                for tau in 1..=5 {
                    for p in 1..=5 {
                        let params = ReconstructionParams::new(m, tau, p).unwrap();
                        let expected = brute_force_rows(n, m, tau, p);
                        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.5).collect();
                        match build_delay_vectors(&ts(&x), params) {
                            Ok(dm) => {
                                assert_eq!(dm.base_indices, expected);
                                assert_eq!(dm.rows() as isize, n as isize - ((m - 1) * tau) as isize - p as isize);
                            }
                            Err(_) => assert!(expected.is_empty()),
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn elements_are_source_samples(
            x in proptest::collection::vec(-1e3f64..1e3, 30..80),
            m in 1usize..5, tau in 1usize..5, p in 1usize..5,
        ) {
            let params = ReconstructionParams::new(m, tau, p).unwrap();
            let dm = build_delay_vectors(&ts(&x), params).unwrap();
            for (r, &j) in dm.base_indices.iter().enumerate() {
                for c in 0..m {
                    prop_assert_eq!(dm.vectors[[r, c]], x[j - c * tau]);
                }
                prop_assert_eq!(dm.targets[r], x[j + p]);
            }
        }

        #[test]
        fn reconstruction_commutes_with_affine(
            x in proptest::collection::vec(-1e3f64..1e3, 30..60),
            scale in 0.01f64..100.0, offset in -50.0f64..50.0,
            m in 1usize..4, tau in 1usize..4,
        ) {
            let params = ReconstructionParams::new(m, tau, 1).unwrap();
            let s = ts(&x);
            let lhs = build_delay_vectors(&affine_transform(&s, scale, offset).unwrap(), params).unwrap();
            let rhs = build_delay_vectors(&s, params).unwrap();
            prop_assert_eq!(lhs.vectors, rhs.vectors.mapv(|v| scale * v + offset));
            let t: Vec<f64> = rhs.targets.iter().map(|v| scale * v + offset).collect();
            prop_assert_eq!(lhs.targets, t);
        }
    }
}
