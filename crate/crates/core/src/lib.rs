//! Choosing delay-reconstruction parameters for forecasting by maximizing
//! shared prediction information (SPI), the mutual information between a
//! delay vector and the observation `p` steps ahead.
//!
//! The crate covers the whole experimental loop:
//!
//! * [`series`]: scalar series, `(m, tau, p)` parameters, delay matrices.
//! * [`dynamics`]: Lorenz 63, Lorenz 96, Hénon and logistic generators.
//! * [`neighbors`]: exact max-norm k-nearest-neighbor search.
//! * [`info`]: KSG and box-kernel mutual information, k-NN entropy, SPI.
//! * [`heuristics`]: first-minimum AMI delay and false-nearest-neighbor dimension.
//! * [`forecast`]: method-of-analogues forecasting scored by MASE.
//! * [`sweep`]: `(m, tau)` grids, plateau-aware selection, horizon and data-length curves.
//! * [`io`]: CSV and JSON formats.
//!
//! ```
//! use delayspi::dynamics::{generate_benchmark_trace, GenerationProtocol, System};
//! use delayspi::info::{spi, SpiRequest};
//! use delayspi::series::ReconstructionParams;
//!
//! let trace = generate_benchmark_trace(&System::HENON, &GenerationProtocol::map().with_length(3000))?;
//! let two = spi(&trace, &SpiRequest::new(ReconstructionParams::new(2, 1, 1)?))?;
//! let one = spi(&trace, &SpiRequest::new(ReconstructionParams::new(1, 1, 1)?))?;
//! assert!(two.value > one.value);
//! # Ok::<(), delayspi::Error>(())
//! ```

// `!(x > 0.0)` is used deliberately: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod forecast;
pub mod heuristics;
pub mod info;
pub mod io;
pub mod neighbors;
pub mod series;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
pub use series::{DelayMatrix, ReconstructionParams, Source, TimeSeries};
