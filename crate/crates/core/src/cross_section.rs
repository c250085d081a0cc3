//! Average pairwise correlation and the CD test for cross-sectional dependence.

use std::io::Write;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{LinkError, Result};
use crate::io::fmt_f64;
use crate::market_data::{SeriesKind, SeriesPanel};
use crate::pca::correlation_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdResult {
    pub rho_bar: f64,
    pub cd_stat: f64,
    pub t: usize,
    pub n: usize,
    /// Two-sided standard-normal tail probability of `cd_stat`.
    pub p_value: f64,
}

/// Pairwise Pearson correlations; same contract as [`correlation_matrix`].
pub fn pairwise_correlations(panel: &SeriesPanel) -> Result<DMatrix<f64>> {
    correlation_matrix(panel)
}

/// Mean of the strictly upper-triangular entries.
pub fn average_correlation(corr: &DMatrix<f64>) -> Result<f64> {
    let n = corr.nrows();
    if corr.ncols() != n {
        return Err(LinkError::Dimension("correlation matrix must be square".into()));
    }
    if n < 2 {
        return Err(LinkError::TooShort { needed: 2, got: n });
    }
    let sum: f64 = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| corr[(i, j)]).sum();
    Ok(2.0 * sum / (n * (n - 1)) as f64)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// CD = sqrt(T N (N-1) / 2) * rho_bar with its two-sided normal p-value.
pub fn cd_statistic(rho_bar: f64, t: usize, n: usize) -> Result<CdResult> {
    if t < 2 {
        return Err(LinkError::TooShort { needed: 2, got: t });
    }
    if n < 2 {
        return Err(LinkError::TooShort { needed: 2, got: n });
    }
    let scale = ((t * n * (n - 1)) as f64 / 2.0).sqrt();
    let cd_stat = scale * rho_bar;
    // 2 (1 - Phi(|z|)) = erfc(|z| / sqrt 2), evaluated without cancellation
    let p_value = erfc(cd_stat.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0);
    Ok(CdResult { rho_bar, cd_stat, t, n, p_value })
}

/// Correlations, their average and the CD test for one panel.
pub fn cd_test(panel: &SeriesPanel) -> Result<CdResult> {
    let corr = pairwise_correlations(panel)?;
    cd_statistic(average_correlation(&corr)?, panel.n_obs(), panel.n_assets())
}

/// One row of the per-window CD report.
#[derive(Debug, Clone, PartialEq)]
pub struct CdRow {
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub kind: SeriesKind,
    pub result: CdResult,
}

/// CSV with columns `window_start,window_end,kind,rho_bar,cd_stat,p_value`.
pub fn write_cd_csv<W: Write>(out: W, rows: &[CdRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["window_start", "window_end", "kind", "rho_bar", "cd_stat", "p_value"])?;
    for r in rows {
        w.write_record([
            r.window_start.to_string(),
            r.window_end.to_string(),
            r.kind.label().to_string(),
            fmt_f64(r.result.rho_bar),
            fmt_f64(r.result.cd_stat),
            fmt_f64(r.result.p_value),
        ])?;
    }
    w.flush().map_err(|e| LinkError::io("<cd csv>", e))?;
    Ok(())
}
