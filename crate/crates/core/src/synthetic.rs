//! Seeded simulation helpers: random stable VARs, VAR sample paths and
//! synthetic OHLC histories with time-varying co-movement.
//!
//! Used by the examples, the self-test in the CLI and the test suites.

use chrono::{Days, NaiveDate};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::connectedness::VarModel;
use crate::error::{LinkError, Result};
use crate::market_data::{AssetSeries, OhlcBar};

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Random VAR(p) whose lag matrices satisfy sum_j ||A_j||_inf < 0.85, hence
/// companion spectral radius below 0.85, with a dense positive-definite
/// innovation covariance.
pub fn random_stable_var<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> VarModel {
    let target: f64 = rng.random_range(0.2..0.85);
    let mut lags: Vec<DMatrix<f64>> = (0..p).map(|_| DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))).collect();
    let norm_sum: f64 = lags
        .iter()
        .map(|a| (0..n).map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max))
        .sum();
    for a in &mut lags {
        *a *= target / norm_sum;
    }
    let l = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let sigma = &l * l.transpose() + DMatrix::identity(n, n) * 0.1;
    let intercept = DVector::from_fn(n, |_, _| rng.random_range(-0.1..0.1));
    VarModel::from_parts(intercept, lags, sigma).expect("consistent shapes")
}

/// Simulates `t` observations after discarding `burn` warm-up draws.
pub fn simulate_var<R: Rng + ?Sized>(model: &VarModel, t: usize, burn: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    let n = model.n_vars();
    let chol = model
        .resid_cov
        .clone()
        .cholesky()
        .ok_or_else(|| LinkError::InvalidArgument("innovation covariance is not positive definite".into()))?;
    let l = chol.l();
    let total = t + burn + model.p;
    let mut y = DMatrix::<f64>::zeros(total, n);
    for s in model.p..total {
        let shock = &l * DVector::from_fn(n, |_, _| normal(rng));
        let mut row = &model.intercept + shock;
        for (j, a) in model.lag_coeffs.iter().enumerate() {
            row += a * y.row(s - j - 1).transpose();
        }
        y.set_row(s, &row.transpose());
    }
    Ok(y.rows(total - t, t).into_owned())
}

/// Parameters of the synthetic OHLC generator.
#[derive(Debug, Clone)]
pub struct SyntheticMarket {
    pub assets: Vec<String>,
    /// Listing date of each asset (same order as `assets`).
    pub listed: Vec<NaiveDate>,
    pub end: NaiveDate,
    /// Loading on the common return factor at the start and end of the sample.
    pub loading_start: f64,
    pub loading_end: f64,
    /// Daily idiosyncratic return scale.
    pub idio_scale: f64,
}

impl SyntheticMarket {
    /// Every asset listed on `start`.
    pub fn uniform(assets: &[&str], start: NaiveDate, end: NaiveDate) -> Self {
        SyntheticMarket {
            assets: assets.iter().map(|s| s.to_string()).collect(),
            listed: vec![start; assets.len()],
            end,
            loading_start: 0.3,
            loading_end: 1.5,
            idio_scale: 0.02,
        }
    }
}

/// Generates daily OHLC bars in which co-movement of returns and of
/// log-volatilities rises linearly over the calendar.
///
/// Returns are `beta_t * f_t + e_t`; log-volatility follows a persistent
/// AR(1) with a shared component. Bars are then drawn around the close path
/// so that the OHLC envelope always holds.
pub fn synthetic_ohlc<R: Rng + ?Sized>(market: &SyntheticMarket, rng: &mut R) -> Result<Vec<AssetSeries>> {
    if market.listed.len() != market.assets.len() {
        return Err(LinkError::Dimension("one listing date per asset".into()));
    }
    let start = market.listed.iter().min().copied().ok_or_else(|| LinkError::InvalidArgument("no assets".into()))?;
    if start >= market.end {
        return Err(LinkError::InvalidArgument("listing dates must precede the end date".into()));
    }
    let days = (market.end - start).num_days() as usize + 1;
    let n = market.assets.len();

    let mut log_close: Vec<f64> = (0..n).map(|i| (10.0 + 90.0 * i as f64).ln()).collect();
    let mut log_vol = vec![0.0f64; n];
    let mut common_vol = 0.0f64;
    let mut bars: Vec<Vec<OhlcBar>> = vec![Vec::with_capacity(days); n];

    for d in 0..days {
        let date = start + Days::new(d as u64);
        let progress = d as f64 / (days - 1).max(1) as f64;
        let beta = market.loading_start + (market.loading_end - market.loading_start) * progress;
        let factor = 0.02 * normal(rng);
        common_vol = 0.97 * common_vol + 0.15 * normal(rng);
        let vol_share = 0.2 + 0.6 * progress;

        for i in 0..n {
            log_vol[i] = 0.95 * log_vol[i] + 0.1 * ((1.0 - vol_share) * normal(rng) + vol_share * common_vol);
            let sigma = market.idio_scale * log_vol[i].exp();
            let ret = beta * factor + sigma * normal(rng);
            let open = log_close[i] + 0.001 * normal(rng);
            let close = open + ret;
            let hi = open.max(close) + sigma * normal::<R>(rng).abs() * 0.8;
            let lo = open.min(close) - sigma * normal::<R>(rng).abs() * 0.8;
            log_close[i] = close;
            if date >= market.listed[i] {
                let bar = OhlcBar::new(date, open.exp(), hi.exp(), lo.exp(), close.exp())
                    .map_err(LinkError::InvalidArgument)?;
                bars[i].push(bar);
            }
        }
    }
    market
        .assets
        .iter()
        .zip(bars)
        .map(|(a, b)| AssetSeries::new(a.clone(), b))
        .collect()
}

/// Writes one `date,open,high,low,close` CSV per asset into `dir`.
pub fn write_ohlc_dir(dir: &std::path::Path, series: &[AssetSeries]) -> Result<()> {
    crate::io::create_dir_all(dir)?;
    for s in series {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["date", "open", "high", "low", "close"])?;
        for b in s.bars() {
            w.write_record([
                b.date.to_string(),
                format!("{}", b.open),
                format!("{}", b.high),
                format!("{}", b.low),
                format!("{}", b.close),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| LinkError::InvalidArgument(e.to_string()))?;
        crate::io::write_file(&dir.join(format!("{}.csv", s.asset_id())), &bytes)?;
    }
    Ok(())
}
