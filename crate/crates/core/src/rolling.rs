//! Rolling-window connectedness in the time and frequency domains.

use std::io::Write;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use crate::connectedness::{connectedness_table, estimate_var, gfevd, DEFAULT_HORIZON, DEFAULT_VAR_ORDER};
use crate::error::{LinkError, Result};
use crate::frequency::{check_partition, decompose_grid, default_bands, BandDecomposition, FrequencyBand, SpectralGrid, DEFAULT_MA_TRUNCATION};
use crate::io::fmt_f64;
use crate::market_data::{SeriesKind, SeriesPanel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollingConfig {
    /// Observations per window.
    pub window: usize,
    pub step: usize,
    pub var_order: usize,
    /// Horizon of the time-domain index `total_h10`.
    pub horizon: usize,
    pub bands: Vec<FrequencyBand>,
    /// MA truncation of the spectral objects.
    pub ma_truncation: usize,
    /// Fourier grid size; the window length when `None`.
    pub grid: Option<usize>,
}

impl Default for RollingConfig {
    fn default() -> Self {
        RollingConfig {
            window: 365,
            step: 1,
            var_order: DEFAULT_VAR_ORDER,
            horizon: DEFAULT_HORIZON,
            bands: default_bands(),
            ma_truncation: DEFAULT_MA_TRUNCATION,
            grid: None,
        }
    }
}

impl RollingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.step == 0 {
            return Err(LinkError::InvalidArgument("window and step must be positive".into()));
        }
        if self.var_order == 0 || self.horizon == 0 || self.ma_truncation == 0 {
            return Err(LinkError::InvalidArgument("VAR order, horizon and MA truncation must be positive".into()));
        }
        check_partition(&self.bands)
    }

    fn grid_size(&self) -> usize {
        self.grid.unwrap_or(self.window)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum WindowStatus {
    Ok,
    Skipped(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowEstimate {
    /// Long-horizon total connectedness from the spectral decomposition.
    pub total: f64,
    /// Time-domain total connectedness at the configured horizon.
    pub total_h10: f64,
    pub bands: Vec<BandDecomposition>,
    pub jittered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RollingPoint {
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub status: WindowStatus,
    pub estimate: Option<WindowEstimate>,
}

impl RollingPoint {
    pub fn total(&self) -> Option<f64> {
        self.estimate.as_ref().map(|e| e.total)
    }
}

/// Number of windows `floor((T - window) / step) + 1`, or 0 when `T < window`.
pub fn window_count(t: usize, window: usize, step: usize) -> usize {
    if t < window || step == 0 {
        0
    } else {
        (t - window) / step + 1
    }
}

fn estimate_window(panel: &SeriesPanel, config: &RollingConfig) -> Result<WindowEstimate> {
    let model = estimate_var(panel, config.var_order)?;
    let table = connectedness_table(&gfevd(&model, config.horizon)?, panel.assets())?;
    let spectral = SpectralGrid::new(&model, config.grid_size(), config.ma_truncation)?;
    let decomposition = decompose_grid(&spectral, &config.bands)?;
    Ok(WindowEstimate {
        total: decomposition.total,
        total_h10: table.total,
        bands: decomposition.bands,
        jittered: model.jittered,
    })
}

/// Estimates every window in parallel; output is ordered by window end.
/// Windows whose estimation fails are kept with a `Skipped` status.
pub fn rolling_connectedness(panel: &SeriesPanel, config: &RollingConfig) -> Result<Vec<RollingPoint>> {
    config.validate()?;
    let t = panel.n_obs();
    if t < config.window {
        return Err(LinkError::TooShort { needed: config.window, got: t });
    }
    let count = window_count(t, config.window, config.step);
    let points = (0..count)
        .into_par_iter()
        .map(|i| {
            let start = i * config.step;
            let sub = panel.rows(start, start + config.window);
            let window_start = panel.dates()[start];
            let window_end = panel.dates()[start + config.window - 1];
            match estimate_window(&sub, config) {
                Ok(e) => RollingPoint { window_start, window_end, status: WindowStatus::Ok, estimate: Some(e) },
                Err(e) => RollingPoint {
                    window_start,
                    window_end,
                    status: WindowStatus::Skipped(e.to_string()),
                    estimate: None,
                },
            }
        })
        .collect();
    Ok(points)
}

/// True when the band connectedness of the point adds up to its total within `tol`.
/// Skipped windows pass vacuously.
pub fn aggregate_check(point: &RollingPoint, tol: f64) -> bool {
    match &point.estimate {
        Some(e) => {
            let fc: f64 = e.bands.iter().map(|b| b.frequency_conn).sum();
            (fc - e.total).abs() < tol
        }
        None => true,
    }
}

/// Long-format CSV: `window_end,kind,metric,band,value,status`.
pub fn write_rolling_csv<W: Write>(out: W, kind: SeriesKind, points: &[RollingPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["window_end", "kind", "metric", "band", "value", "status"])?;
    let kind = kind.label();
    for p in points {
        let date = p.window_end.to_string();
        match (&p.status, &p.estimate) {
            (WindowStatus::Ok, Some(e)) => {
                w.write_record([date.as_str(), kind, "total", "all", &fmt_f64(e.total), "ok"])?;
                w.write_record([date.as_str(), kind, "total_h10", "all", &fmt_f64(e.total_h10), "ok"])?;
                for b in &e.bands {
                    for (metric, v) in [("within", b.within), ("weight", b.weight), ("fc", b.frequency_conn)] {
                        w.write_record([date.as_str(), kind, metric, &b.band.label, &fmt_f64(v), "ok"])?;
                    }
                }
            }
            (WindowStatus::Skipped(reason), _) => {
                w.write_record([date.as_str(), kind, "total", "all", "", &format!("skipped: {reason}")])?;
            }
            (WindowStatus::Ok, None) => unreachable!("ok windows carry an estimate"),
        }
    }
    w.flush().map_err(|e| LinkError::io("<rolling csv>", e))?;
    Ok(())
}

/// Band table `date,band,within,weight,frequency_conn` over estimated windows.
pub fn write_rolling_bands_csv<W: Write>(out: W, points: &[RollingPoint]) -> Result<()> {
    let rows: Vec<(NaiveDate, &BandDecomposition)> = points
        .iter()
        .filter_map(|p| p.estimate.as_ref().map(|e| (p.window_end, e)))
        .flat_map(|(d, e)| e.bands.iter().map(move |b| (d, b)))
        .collect();
    crate::frequency::write_band_csv(out, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{random_stable_var, simulate_var};
    use chrono::Days;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn panel(values: DMatrix<f64>) -> SeriesPanel {
        let start = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
        let dates = (0..values.nrows()).map(|i| start + Days::new(i as u64)).collect();
        let assets = (0..values.ncols()).map(|i| format!("C{i}")).collect();
        SeriesPanel::new(assets, dates, values, SeriesKind::Returns).unwrap()
    }

    fn small_config() -> RollingConfig {
        RollingConfig { window: 120, step: 7, var_order: 2, ..RollingConfig::default() }
    }

    #[test]
    fn window_counts() {
        assert_eq!(window_count(365, 365, 1), 1);
        assert_eq!(window_count(1000, 365, 1), 636);
        assert_eq!(window_count(1000, 365, 10), 64);
        assert_eq!(window_count(100, 365, 1), 0);
    }

    #[test]
    fn too_short_panel_is_an_error() {
        let p = panel(DMatrix::from_fn(50, 2, |i, j| ((i * 7 + j * 3) % 11) as f64));
        assert!(matches!(rolling_connectedness(&p, &small_config()), Err(LinkError::TooShort { .. })));
    }

    #[test]
    fn ordered_and_aggregated() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_stable_var(&mut rng, 3, 1);
        let y = simulate_var(&m, 400, 100, &mut rng).unwrap();
        let p = panel(y);
        let cfg = small_config();
        let points = rolling_connectedness(&p, &cfg).unwrap();
        assert_eq!(points.len(), window_count(400, 120, 7));
        assert!(points.windows(2).all(|w| w[0].window_end < w[1].window_end));
        assert_eq!(points[0].window_end, p.dates()[119]);
        for pt in &points {
            assert_eq!(pt.status, WindowStatus::Ok);
            assert!(aggregate_check(pt, 1e-4));
            let e = pt.estimate.as_ref().unwrap();
            assert!((0.0..=1.0).contains(&e.total) && (0.0..=1.0).contains(&e.total_h10));
        }
        let again = rolling_connectedness(&p, &cfg).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_rolling_csv(&mut a, SeriesKind::Returns, &points).unwrap();
        write_rolling_csv(&mut b, SeriesKind::Returns, &again).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constant_window_is_skipped() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = random_stable_var(&mut rng, 2, 1);
        let mut y = simulate_var(&m, 300, 50, &mut rng).unwrap();
        for i in 0..130 {
            y[(i, 1)] = 1.0;
        }
        let points = rolling_connectedness(&panel(y), &small_config()).unwrap();
        assert!(matches!(points[0].status, WindowStatus::Skipped(_)));
        assert!(points.last().unwrap().estimate.is_some());
        let mut buf = Vec::new();
        write_rolling_csv(&mut buf, SeriesKind::Returns, &points).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().contains("skipped"));
    }

    #[test]
    fn csv_layouts() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = random_stable_var(&mut rng, 2, 1);
        let p = panel(simulate_var(&m, 130, 50, &mut rng).unwrap());
        let points = rolling_connectedness(&p, &small_config()).unwrap();
        let mut buf = Vec::new();
        write_rolling_csv(&mut buf, SeriesKind::LogVolatility, &points).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "window_end,kind,metric,band,value,status");
        // 2 windows x (total, total_h10, 2 bands x 3 metrics)
        assert_eq!(lines.len(), 1 + 2 * 8);
        assert!(lines[1].starts_with("2018-04-30,volatility,total,all,"));
        let mut buf = Vec::new();
        write_rolling_bands_csv(&mut buf, &points).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("date,band,within,weight,frequency_conn\n2018-04-30,high,"));
        assert_eq!(text.lines().count(), 1 + 2 * 2);
    }
}
