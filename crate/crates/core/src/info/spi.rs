//! Shared prediction information: the mutual information between a delay
//! vector and the observation `p` steps after its anchor.

use serde::{Deserialize, Serialize};

use super::{box_kernel_mi, knn_entropy_seeded, ksg_mi_seeded, MIEstimate, DEFAULT_K, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::series::{build_delay_vectors, ReconstructionParams, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    Ksg { k: usize },
    BoxKernel { r: f64 },
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator::Ksg { k: DEFAULT_K }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiRequest {
    pub params: ReconstructionParams,
    pub estimator: Estimator,
    pub seed: u64,
}

impl SpiRequest {
    /// KSG with the default `k` and seed.
    pub fn new(params: ReconstructionParams) -> Self {
        Self {
            params,
            estimator: Estimator::default(),
            seed: DEFAULT_SEED,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.estimator = Estimator::Ksg { k };
        self
    }
}

pub fn spi(ts: &TimeSeries, req: &SpiRequest) -> Result<MIEstimate> {
    let dm = build_delay_vectors(ts, req.params)?;
    let targets = dm.targets_column();
    match req.estimator {
        Estimator::Ksg { k } => ksg_mi_seeded(dm.vectors.view(), targets.view(), k, req.seed),
        Estimator::BoxKernel { r } => box_kernel_mi(dm.vectors.view(), targets.view(), r),
    }
}

/// SPI at one horizon together with the entropy of the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub p: usize,
    pub spi: f64,
    pub entropy: f64,
    /// `spi / entropy`; `None` when the entropy estimate is not positive.
    pub ratio: Option<f64>,
}

/// Fraction of the target's uncertainty explained by the delay vector, for
/// `p = 1..=p_max`. `m` and `tau` come from `base`; its `p` is ignored.
pub fn r_of_p(ts: &TimeSeries, base: ReconstructionParams, p_max: usize, k: usize) -> Result<Vec<RatioPoint>> {
    if p_max == 0 {
        return Err(Error::InvalidParameter("p_max must be >= 1".into()));
    }
    ReconstructionParams::new(base.m, base.tau, p_max)?.check_len(ts.len())?;
    (1..=p_max)
        .map(|p| {
            let params = ReconstructionParams::new(base.m, base.tau, p)?;
            let dm = build_delay_vectors(ts, params)?;
            let targets = dm.targets_column();
            let mi = ksg_mi_seeded(dm.vectors.view(), targets.view(), k, DEFAULT_SEED)?.value;
            let entropy = knn_entropy_seeded(targets.view(), k, DEFAULT_SEED)?;
            Ok(RatioPoint {
                p,
                spi: mi,
                entropy,
                ratio: (entropy > 0.0).then(|| mi / entropy),
            })
        })
        .collect()
}
