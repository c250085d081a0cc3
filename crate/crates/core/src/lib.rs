//! Co-movement and connectedness analysis for daily crypto-asset markets.
//!
//! The pipeline turns per-asset OHLC histories into aligned panels of log
//! returns and Garman-Klass log-volatilities, then measures commonality
//! (principal components), cross-sectional dependence (the CD test),
//! generalized variance-decomposition connectedness, its split into
//! frequency bands, and rolling-window dynamics of all of these.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod connectedness;
pub mod cross_section;
pub mod error;
pub mod frequency;
pub mod io;
pub mod linalg;
pub mod market_data;
pub mod pca;
pub mod presets;
pub mod rolling;
pub mod synthetic;

pub use connectedness::{connectedness_table, estimate_var, gfevd, ConnectednessTable, VarModel};
pub use cross_section::{cd_test, CdResult};
pub use error::{LinkError, Result};
pub use frequency::{decompose, default_bands, FrequencyBand, FrequencyDecomposition};
pub use market_data::{align_panel, parse_ohlc_csv, AssetSeries, OhlcBar, SampleSpec, SeriesKind, SeriesPanel};
pub use pca::{pca_summary, PcaResult};
pub use rolling::{rolling_connectedness, RollingConfig, RollingPoint};
