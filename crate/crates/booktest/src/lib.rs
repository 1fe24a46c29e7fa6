// Each chapter of the guide becomes the doc comment of an empty module, so
// `cargo test --doc -p delayspi-book` runs every listing in the book.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/series.md")]
pub mod series {}
#[doc = include_str!("../../../book/src/generators.md")]
pub mod generators {}
#[doc = include_str!("../../../book/src/neighbors.md")]
pub mod neighbors {}
#[doc = include_str!("../../../book/src/information.md")]
pub mod information {}
#[doc = include_str!("../../../book/src/heuristics.md")]
pub mod heuristics {}
#[doc = include_str!("../../../book/src/forecasting.md")]
pub mod forecasting {}
#[doc = include_str!("../../../book/src/sweeps.md")]
pub mod sweeps {}
#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
