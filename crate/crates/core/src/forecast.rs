//! Lorenz's method of analogues on a delay reconstruction, the rolling
//! test protocol, and mean absolute scaled error.
//!
//! A forecast for sample `l` is made from the delay vector anchored at
//! `l - p`. Its analogues are the nearest stored delay vectors (max norm)
//! whose continuation is already known, skipping any row anchored fewer
//! than `exclusion_window` samples from the query.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighbors::NeighborIndex;
use crate::series::{build_from_slice, DelayMatrix, ReconstructionParams, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonMode {
    /// Chains `p` one-step forecasts, feeding predictions back in.
    RollingOneStep,
    /// Reads the analogue's own `p`-step continuation.
    DirectPStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastConfig {
    pub num_neighbors: usize,
    /// `None` means `(m - 1) * tau + p`.
    pub exclusion_window: Option<usize>,
    /// When false the analogue library stays frozen at the training data.
    pub rebuild_every_step: bool,
    pub horizon_mode: HorizonMode,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            num_neighbors: 1,
            exclusion_window: None,
            rebuild_every_step: true,
            horizon_mode: HorizonMode::DirectPStep,
        }
    }
}

impl ForecastConfig {
    pub fn window_for(&self, params: &ReconstructionParams) -> usize {
        self.exclusion_window.unwrap_or(params.span() + params.p)
    }

    fn validate(&self) -> Result<()> {
        if self.num_neighbors == 0 {
            return Err(Error::InvalidParameter("num_neighbors must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub predictions: Vec<f64>,
    pub truth: Vec<f64>,
    pub mase: f64,
    pub params: ReconstructionParams,
    pub config: ForecastConfig,
}

/// A delay matrix with a search index over its vectors.
pub struct AnalogueModel<'a> {
    matrix: &'a DelayMatrix,
    index: NeighborIndex,
}

impl<'a> AnalogueModel<'a> {
    pub fn new(matrix: &'a DelayMatrix) -> Result<Self> {
        Ok(Self {
            matrix,
            index: NeighborIndex::build(matrix.vectors.view())?,
        })
    }

    /// Mean target of the `num_neighbors` nearest rows accepted by `keep`
    /// (called with row numbers). Fewer rows are averaged when fewer qualify.
    pub fn predict_filtered<F: Fn(usize) -> bool>(&self, query: &[f64], num_neighbors: usize, keep: F) -> Result<f64> {
        if query.len() != self.matrix.params.m {
            return Err(Error::InvalidParameter(format!(
                "query has length {}, reconstruction dimension is {}",
                query.len(),
                self.matrix.params.m
            )));
        }
        let nn = self.index.knn_filtered(query, num_neighbors, keep);
        if nn.is_empty() {
            return Err(Error::NoValidNeighbors);
        }
        Ok(nn.iter().map(|n| self.matrix.targets[n.id]).sum::<f64>() / nn.len() as f64)
    }
}

/// One analogue forecast from `matrix` for the delay vector `query`
/// anchored at `query_base_index`.
pub fn lma_predict_next(
    matrix: &DelayMatrix,
    query: &[f64],
    query_base_index: usize,
    config: &ForecastConfig,
) -> Result<f64> {
    config.validate()?;
    let window = config.window_for(&matrix.params);
    let model = AnalogueModel::new(matrix)?;
    model.predict_filtered(query, config.num_neighbors, |r| {
        matrix.base_indices[r].abs_diff(query_base_index) >= window
    })
}

fn delay_vector(x: &[f64], anchor: usize, params: &ReconstructionParams) -> Vec<f64> {
    (0..params.m).map(|c| x[anchor - c * params.tau]).collect()
}

/// Forecasts samples `n..n + k` (0-based), each from data up to `l - p`,
/// and scores them against the held-out truth with MASE over the first `n`
/// samples.
pub fn rolling_forecast(
    ts: &TimeSeries,
    params: ReconstructionParams,
    n: usize,
    k: usize,
    config: &ForecastConfig,
) -> Result<ForecastResult> {
    config.validate()?;
    if n < 2 || k < 1 || n + k > ts.len() {
        return Err(Error::InvalidSplit {
            train: n,
            test: k,
            len: ts.len(),
        });
    }
    let x = &ts.values()[..n + k];
    let span = params.span();
    let p = params.p;
    // The first query is anchored at n - p and needs its full delay vector,
    // and at least one analogue must exist before it.
    if n < span + 2 * p + 1 {
        return Err(Error::SeriesTooShort {
            required: span + 2 * p,
            available: n,
        });
    }
    let window = config.window_for(&params);
    let predictions = match config.horizon_mode {
        HorizonMode::DirectPStep => direct(x, params, n, window, config)?,
        HorizonMode::RollingOneStep => chained(x, params, n, window, config)?,
    };
    let truth = x[n..].to_vec();
    let mase = mase(&predictions, &truth, &x[..n])?;
    Ok(ForecastResult {
        predictions,
        truth,
        mase,
        params,
        config: *config,
    })
}

/// Newest anchor whose continuation is usable for a query anchored at
/// `anchor`, given the targets are `horizon` steps ahead.
fn last_usable_anchor(anchor: usize, horizon: usize, window: usize, n: usize, rebuild: bool) -> Option<usize> {
    let mut last = anchor.checked_sub(horizon.max(window))?;
    if !rebuild {
        last = last.min(n.checked_sub(1 + horizon)?);
    }
    Some(last)
}

fn direct(
    x: &[f64],
    params: ReconstructionParams,
    n: usize,
    window: usize,
    config: &ForecastConfig,
) -> Result<Vec<f64>> {
    let span = params.span();
    let p = params.p;
    let matrix = build_from_slice(x, params)?;
    let model = AnalogueModel::new(&matrix)?;
    (n..x.len())
        .map(|l| {
            let anchor = l - p;
            let last = last_usable_anchor(anchor, p, window, n, config.rebuild_every_step)
                .filter(|&a| a >= span)
                .ok_or(Error::NoValidNeighbors)?;
            let query = delay_vector(x, anchor, &params);
            model.predict_filtered(&query, config.num_neighbors, |r| r + span <= last)
        })
        .collect()
}

fn chained(
    x: &[f64],
    params: ReconstructionParams,
    n: usize,
    window: usize,
    config: &ForecastConfig,
) -> Result<Vec<f64>> {
    let span = params.span();
    let p = params.p;
    let one_step = ReconstructionParams { p: 1, ..params };
    let matrix = build_from_slice(x, one_step)?;
    let model = AnalogueModel::new(&matrix)?;
    let mut buf = Vec::with_capacity(span + p + 1);
    (n..x.len())
        .map(|l| {
            let known = l - p;
            // Working copy: true samples through `known`, then predictions.
            let start = known - span;
            buf.clear();
            buf.extend_from_slice(&x[start..=known]);
            for s in 0..p {
                let anchor = known + s;
                let last = last_usable_anchor(anchor, 1, window, n, config.rebuild_every_step)
                    .map(|a| a.min(known - 1))
                    .filter(|&a| a >= span)
                    .ok_or(Error::NoValidNeighbors)?;
                let query = delay_vector(&buf, anchor - start, &one_step);
                let next = model.predict_filtered(&query, config.num_neighbors, |r| r + span <= last)?;
                buf.push(next);
            }
            Ok(*buf.last().expect("p >= 1"))
        })
        .collect()
}

/// Mean absolute scaled error: the mean absolute forecast error divided by
/// the mean absolute one-step change over `train`.
pub fn mase(predictions: &[f64], truth: &[f64], train: &[f64]) -> Result<f64> {
    if predictions.len() != truth.len() || predictions.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "predictions ({}) and truth ({}) must be non-empty and equal in length",
            predictions.len(),
            truth.len()
        )));
    }
    if train.len() < 2 {
        return Err(Error::TooFewSamples { n: train.len(), min: 1 });
    }
    let k = predictions.len() as f64;
    let n = train.len() as f64;
    let numerator: f64 = predictions.iter().zip(truth).map(|(a, b)| (a - b).abs()).sum();
    let walk: f64 = train.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let scale = k / (n - 1.0) * walk;
    if !(scale > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    Ok(numerator / scale)
}
