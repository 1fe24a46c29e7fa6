//! Exhaustive `(m, tau)` grids of SPI and forecast error, SPI-optimal
//! selection, and the horizon and data-length curves.
//!
//! Cells are evaluated in parallel and stored by position, so a grid does
//! not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{rolling_forecast, ForecastConfig};
use crate::info::{spi, Estimator, SpiRequest, DEFAULT_SEED};
use crate::series::{ReconstructionParams, TimeSeries};
use crate::stats::spearman;

/// Cells within this fraction of the best SPI form the plateau.
pub const DEFAULT_PLATEAU_FRACTION: f64 = 0.05;

/// Antisymmetry is scored on cells with `m` at least this.
pub const DEFAULT_ANTISYMMETRY_M_MIN: usize = 3;

const MIN_ANTISYMMETRY_CELLS: usize = 10;

/// Which quantity a failed cell could not produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Spi,
    Mase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub m: usize,
    pub tau: usize,
    pub quantity: Quantity,
    pub error: String,
}

/// Train/test split and forecaster used for every MASE cell of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaseSetup {
    pub train: usize,
    pub test: usize,
    pub config: ForecastConfig,
}

impl MaseSetup {
    /// First 90% for training, the rest for testing.
    pub fn default_split(len: usize) -> Self {
        let train = len * 9 / 10;
        Self {
            train,
            test: len - train,
            config: ForecastConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub p: usize,
    pub estimator: Estimator,
    pub seed: u64,
    /// `None` skips forecasting.
    pub mase: Option<MaseSetup>,
}

impl SweepOptions {
    /// SPI only, default estimator.
    pub fn spi_only(p: usize) -> Self {
        Self {
            p,
            estimator: Estimator::default(),
            seed: DEFAULT_SEED,
            mase: None,
        }
    }

    pub fn with_mase(mut self, setup: MaseSetup) -> Self {
        self.mase = Some(setup);
        self
    }
}

/// SPI (nats) and optionally MASE over `m_values x tau_values`. Matrices
/// are indexed `[m index][tau index]`; a `None` cell is listed in
/// `failures`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub m_values: Vec<usize>,
    pub tau_values: Vec<usize>,
    pub p: usize,
    pub spi: Vec<Vec<Option<f64>>>,
    pub mase: Option<Vec<Vec<Option<f64>>>>,
    pub failures: Vec<CellFailure>,
}

/// One cell of a grid with its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub m: usize,
    pub tau: usize,
    pub value: f64,
}

impl SweepGrid {
    /// Cells in m-major, tau-minor order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        self.m_values
            .iter()
            .enumerate()
            .flat_map(move |(i, &m)| self.tau_values.iter().enumerate().map(move |(j, &tau)| (i, j, m, tau)))
    }

    pub fn spi_at(&self, m: usize, tau: usize) -> Option<f64> {
        let (i, j) = self.position(m, tau)?;
        self.spi[i][j]
    }

    pub fn mase_at(&self, m: usize, tau: usize) -> Option<f64> {
        let (i, j) = self.position(m, tau)?;
        self.mase.as_ref()?[i][j]
    }

    fn position(&self, m: usize, tau: usize) -> Option<(usize, usize)> {
        let i = self.m_values.iter().position(|&v| v == m)?;
        let j = self.tau_values.iter().position(|&v| v == tau)?;
        Some((i, j))
    }

    /// Largest SPI, ties to the smallest `m` then `tau`.
    pub fn spi_argmax(&self) -> Option<Cell> {
        self.extreme(&self.spi, |a, b| a > b)
    }

    /// Smallest MASE, ties to the smallest `m` then `tau`.
    pub fn mase_argmin(&self) -> Option<Cell> {
        self.extreme(self.mase.as_ref()?, |a, b| a < b)
    }

    fn extreme(&self, values: &[Vec<Option<f64>>], better: impl Fn(f64, f64) -> bool) -> Option<Cell> {
        let mut best: Option<Cell> = None;
        for (i, j, m, tau) in self.cells() {
            if let Some(v) = values[i][j] {
                if best.map_or(true, |b| better(v, b.value)) {
                    best = Some(Cell { m, tau, value: v });
                }
            }
        }
        best
    }
}

fn check_axis(name: &str, values: &[usize]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} range is empty")));
    }
    if values.contains(&0) {
        return Err(Error::InvalidParameter(format!("{name} values must be >= 1")));
    }
    Ok(())
}

/// Evaluates every cell. Cell errors are recorded, never propagated.
pub fn grid_sweep(ts: &TimeSeries, m_values: &[usize], tau_values: &[usize], opts: &SweepOptions) -> Result<SweepGrid> {
    check_axis("m", m_values)?;
    check_axis("tau", tau_values)?;
    let m_max = *m_values.iter().max().expect("nonempty");
    let tau_max = *tau_values.iter().max().expect("nonempty");
    ReconstructionParams::new(m_max, tau_max, opts.p)?.check_len(ts.len())?;

    let cells: Vec<(usize, usize)> = m_values
        .iter()
        .flat_map(|&m| tau_values.iter().map(move |&tau| (m, tau)))
        .collect();
    let results: Vec<(Result<f64>, Option<Result<f64>>)> = cells
        .par_iter()
        .map(|&(m, tau)| {
            let params = ReconstructionParams::new(m, tau, opts.p).expect("checked above");
            let req = SpiRequest {
                params,
                estimator: opts.estimator,
                seed: opts.seed,
            };
            let s = spi(ts, &req).map(|e| e.value);
            let f = opts
                .mase
                .map(|setup| rolling_forecast(ts, params, setup.train, setup.test, &setup.config).map(|r| r.mase));
            (s, f)
        })
        .collect();

    let cols = tau_values.len();
    let mut spi_grid = vec![vec![None; cols]; m_values.len()];
    let mut mase_grid = opts.mase.map(|_| vec![vec![None; cols]; m_values.len()]);
    let mut failures = Vec::new();
    for (idx, ((m, tau), (s, f))) in cells.into_iter().zip(results).enumerate() {
        let (i, j) = (idx / cols, idx % cols);
        match s {
            Ok(v) => spi_grid[i][j] = Some(v),
            Err(e) => failures.push(CellFailure {
                m,
                tau,
                quantity: Quantity::Spi,
                error: e.to_string(),
            }),
        }
        match (f, mase_grid.as_mut()) {
            (Some(Ok(v)), Some(g)) => g[i][j] = Some(v),
            (Some(Err(e)), _) => failures.push(CellFailure {
                m,
                tau,
                quantity: Quantity::Mase,
                error: e.to_string(),
            }),
            _ => {}
        }
    }
    Ok(SweepGrid {
        m_values: m_values.to_vec(),
        tau_values: tau_values.to_vec(),
        p: opts.p,
        spi: spi_grid,
        mase: mase_grid,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// The chosen cell is the best SPI on the grid.
    GlobalArgmax,
    /// A smaller-`m` cell on the plateau below the best was preferred.
    PlateauMinM,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub m: usize,
    pub tau: usize,
    pub value: f64,
    pub rule: SelectionRule,
}

/// Among cells with SPI within `plateau_fraction` of the maximum, picks
/// the smallest `m`, then the smallest `tau`.
pub fn select_spi_optimal(grid: &SweepGrid, plateau_fraction: f64) -> Result<Selection> {
    if !(0.0..1.0).contains(&plateau_fraction) {
        return Err(Error::InvalidParameter(format!(
            "plateau_fraction must lie in [0, 1), got {plateau_fraction}"
        )));
    }
    let best = grid.spi_argmax().ok_or(Error::AllCellsFailed)?;
    let floor = best.value - plateau_fraction * best.value.abs();
    // Cells run m-major, so the first plateau cell has the smallest m,
    // then the smallest tau.
    let (m, tau, value) = grid
        .cells()
        .filter_map(|(i, j, m, tau)| grid.spi[i][j].map(|v| (m, tau, v)))
        .filter(|&(_, _, v)| v >= floor)
        .min_by_key(|&(m, tau, _)| (m, tau))
        .expect("the maximum is on its own plateau");
    let rule = if (m, tau) == (best.m, best.tau) {
        SelectionRule::GlobalArgmax
    } else {
        SelectionRule::PlateauMinM
    };
    Ok(Selection { m, tau, value, rule })
}

/// Spearman correlation between SPI and MASE over cells with `m >= m_min`.
/// Strongly negative values mean high SPI goes with low forecast error.
pub fn antisymmetry_score(grid: &SweepGrid, m_min: usize) -> Result<f64> {
    let mase = grid
        .mase
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("grid has no MASE values".into()))?;
    let (s, e): (Vec<f64>, Vec<f64>) = grid
        .cells()
        .filter(|&(_, _, m, _)| m >= m_min)
        .filter_map(|(i, j, _, _)| Some((grid.spi[i][j]?, mase[i][j]?)))
        .unzip();
    if s.len() < MIN_ANTISYMMETRY_CELLS {
        return Err(Error::InsufficientCells {
            have: s.len(),
            need: MIN_ANTISYMMETRY_CELLS,
        });
    }
    spearman(&s, &e).ok_or_else(|| Error::DegenerateData("SPI or MASE is constant over the region".into()))
}

/// The parameter held fixed across a family of horizon curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fixed", rename_all = "snake_case")]
pub enum HorizonFamily {
    /// One curve per `tau`.
    FixedM { m: usize, tau_values: Vec<usize> },
    /// One curve per `m`.
    FixedTau { tau: usize, m_values: Vec<usize> },
}

impl HorizonFamily {
    fn pairs(&self) -> Vec<(usize, usize)> {
        match self {
            HorizonFamily::FixedM { m, tau_values } => tau_values.iter().map(|&t| (*m, t)).collect(),
            HorizonFamily::FixedTau { tau, m_values } => m_values.iter().map(|&m| (m, *tau)).collect(),
        }
    }
}

/// A long-form row; exactly one of `spi` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: usize,
    pub m: usize,
    pub tau: usize,
    /// Series length; the full series for horizon curves.
    pub length: usize,
    pub spi: Option<f64>,
    pub error: Option<String>,
}

fn point(p: usize, m: usize, tau: usize, length: usize, r: Result<f64>) -> CurvePoint {
    let (spi, error) = match r {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    CurvePoint {
        p,
        m,
        tau,
        length,
        spi,
        error,
    }
}

fn spi_value(ts: &TimeSeries, m: usize, tau: usize, p: usize, k: usize) -> Result<f64> {
    let params = ReconstructionParams::new(m, tau, p)?;
    Ok(spi(ts, &SpiRequest::new(params).with_k(k))?.value)
}

/// SPI over the family's `(m, tau)` pairs crossed with `p_values`, ordered
/// by pair, then `p`.
pub fn horizon_curves(
    ts: &TimeSeries,
    family: &HorizonFamily,
    p_values: &[usize],
    k: usize,
) -> Result<Vec<CurvePoint>> {
    let pairs = family.pairs();
    if pairs.is_empty() || p_values.is_empty() {
        return Err(Error::InvalidParameter(
            "horizon family and p range must be nonempty".into(),
        ));
    }
    let tasks: Vec<(usize, usize, usize)> = pairs
        .iter()
        .flat_map(|&(m, tau)| p_values.iter().map(move |&p| (m, tau, p)))
        .collect();
    Ok(tasks
        .par_iter()
        .map(|&(m, tau, p)| point(p, m, tau, ts.len(), spi_value(ts, m, tau, p, k)))
        .collect())
}

/// SPI on the first `length` samples for every length and `m`, ordered by
/// length, then `m`.
pub fn data_length_curve(
    ts: &TimeSeries,
    lengths: &[usize],
    m_values: &[usize],
    tau: usize,
    p: usize,
    k: usize,
) -> Result<Vec<CurvePoint>> {
    if lengths.is_empty() || m_values.is_empty() {
        return Err(Error::InvalidParameter("lengths and m values must be nonempty".into()));
    }
    if lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("lengths must be strictly ascending".into()));
    }
    let longest = *lengths.last().expect("nonempty");
    if longest > ts.len() {
        return Err(Error::SeriesTooShort {
            required: longest,
            available: ts.len(),
        });
    }
    let tasks: Vec<(usize, usize)> = lengths
        .iter()
        .flat_map(|&n| m_values.iter().map(move |&m| (n, m)))
        .collect();
    Ok(tasks
        .par_iter()
        .map(|&(n, m)| {
            let r = ts.prefix(n).and_then(|prefix| spi_value(&prefix, m, tau, p, k));
            point(p, m, tau, n, r)
        })
        .collect())
}
