//! OHLC ingestion, return and range-based volatility construction, and
//! date alignment of multi-asset panels.
//!
//! Everything here is a pure function of its inputs. Raw bars come in through
//! [`parse_ohlc_csv`]; per-asset [`DatedSeries`] are built with
//! [`log_returns`] or [`log_volatility_series`]; [`align_panel`] intersects
//! their calendars into a [`SeriesPanel`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LinkError, Result};
use crate::io::fmt_f64;

/// Default floor applied to the Garman-Klass variance before taking logs.
pub const DEFAULT_VOLATILITY_FLOOR: f64 = 1e-12;

/// 2 ln 2 - 1, the close-to-open weight in the Garman-Klass estimator.
const GK_DRIFT_WEIGHT: f64 = 2.0 * std::f64::consts::LN_2 - 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhlcBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl OhlcBar {
    /// Builds a bar, checking positivity and the high/low envelope.
    pub fn new(date: NaiveDate, open: f64, high: f64, low: f64, close: f64) -> std::result::Result<Self, String> {
        let bar = OhlcBar { date, open, high, low, close };
        bar.check()?;
        Ok(bar)
    }

    fn check(&self) -> std::result::Result<(), String> {
        for (name, v) in [("open", self.open), ("high", self.high), ("low", self.low), ("close", self.close)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("{name} must be a positive finite price, got {v}"));
            }
        }
        if self.high < self.open {
            return Err(format!("high < open ({} < {})", self.high, self.open));
        }
        if self.high < self.close {
            return Err(format!("high < close ({} < {})", self.high, self.close));
        }
        if self.low > self.open {
            return Err(format!("low > open ({} > {})", self.low, self.open));
        }
        if self.low > self.close {
            return Err(format!("low > close ({} > {})", self.low, self.close));
        }
        Ok(())
    }
}

/// Date-ordered bars for one asset.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetSeries {
    asset_id: String,
    bars: Vec<OhlcBar>,
}

impl AssetSeries {
    /// Sorts the bars by date and rejects duplicated days.
    pub fn new(asset_id: impl Into<String>, mut bars: Vec<OhlcBar>) -> Result<Self> {
        let asset_id = asset_id.into();
        bars.sort_by_key(|b| b.date);
        if let Some(w) = bars.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(LinkError::DuplicateDate { asset: asset_id, date: w[0].date, line: 0 });
        }
        for bar in &bars {
            bar.check().map_err(|reason| LinkError::MalformedRow { asset: asset_id.clone(), line: 0, reason })?;
        }
        Ok(AssetSeries { asset_id, bars })
    }

    pub fn asset_id(&self) -> &str {
        &self.asset_id
    }

    pub fn bars(&self) -> &[OhlcBar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }
}

/// A dated sequence of derived values (returns or log-volatilities) for one asset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedSeries {
    pub asset_id: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl DatedSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub name: String,
    pub assets: Vec<String>,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
}

impl SampleSpec {
    pub fn new(name: impl Into<String>, assets: &[&str], start_date: NaiveDate, end_date: NaiveDate) -> Result<Self> {
        let spec = SampleSpec {
            name: name.into(),
            assets: assets.iter().map(|s| s.to_string()).collect(),
            start_date,
            end_date,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: String| LinkError::InvalidSample { name: self.name.clone(), reason };
        if self.assets.is_empty() {
            return Err(invalid("asset list is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for a in &self.assets {
            if !seen.insert(a.as_str()) {
                return Err(invalid(format!("asset {a} listed twice")));
            }
        }
        if self.start_date >= self.end_date {
            return Err(invalid(format!("start {} is not before end {}", self.start_date, self.end_date)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Returns,
    #[serde(alias = "volatility")]
    LogVolatility,
}

impl SeriesKind {
    /// Short label used in file names and CSV columns.
    pub fn label(self) -> &'static str {
        match self {
            SeriesKind::Returns => "returns",
            SeriesKind::LogVolatility => "volatility",
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Date-aligned T x N panel with asset labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPanel {
    assets: Vec<String>,
    dates: Vec<NaiveDate>,
    values: DMatrix<f64>,
    kind: SeriesKind,
}

impl SeriesPanel {
    pub fn new(assets: Vec<String>, dates: Vec<NaiveDate>, values: DMatrix<f64>, kind: SeriesKind) -> Result<Self> {
        if values.nrows() != dates.len() || values.ncols() != assets.len() {
            return Err(LinkError::Dimension(format!(
                "panel values are {}x{}, expected {}x{}",
                values.nrows(),
                values.ncols(),
                dates.len(),
                assets.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(LinkError::InvalidArgument(format!("panel dates not strictly increasing at {}", w[1])));
        }
        if let Some((idx, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let col = idx / values.nrows().max(1);
            return Err(LinkError::InvalidArgument(format!("non-finite value in column {}", assets[col])));
        }
        Ok(SeriesPanel { assets, dates, values, kind })
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    /// Number of observations T.
    pub fn n_obs(&self) -> usize {
        self.dates.len()
    }

    /// Number of assets N.
    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.dates.first().copied()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.dates.last().copied()
    }

    /// Contiguous block of rows `start..end`.
    pub fn rows(&self, start: usize, end: usize) -> SeriesPanel {
        let len = end - start;
        SeriesPanel {
            assets: self.assets.clone(),
            dates: self.dates[start..end].to_vec(),
            values: self.values.rows(start, len).into_owned(),
            kind: self.kind,
        }
    }

    /// Rows dated within `[start, end]`, inclusive.
    pub fn between(&self, start: NaiveDate, end: NaiveDate) -> SeriesPanel {
        let lo = self.dates.partition_point(|d| *d < start);
        let hi = self.dates.partition_point(|d| *d <= end);
        self.rows(lo, hi.max(lo))
    }

    /// Panel with columns reordered by `order` (indices into the current columns).
    pub fn select_columns(&self, order: &[usize]) -> SeriesPanel {
        let values = DMatrix::from_fn(self.n_obs(), order.len(), |r, c| self.values[(r, order[c])]);
        SeriesPanel {
            assets: order.iter().map(|&i| self.assets[i].clone()).collect(),
            dates: self.dates.clone(),
            values,
            kind: self.kind,
        }
    }

    pub(crate) fn with_values(&self, values: DMatrix<f64>) -> SeriesPanel {
        SeriesPanel {
            assets: self.assets.clone(),
            dates: self.dates.clone(),
            values,
            kind: self.kind,
        }
    }

    /// Writes the panel as `date,<ticker1>,...,<tickerN>` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["date".to_string()];
        header.extend(self.assets.iter().cloned());
        w.write_record(&header)?;
        for (r, date) in self.dates.iter().enumerate() {
            let mut rec = Vec::with_capacity(self.n_assets() + 1);
            rec.push(date.format("%Y-%m-%d").to_string());
            for c in 0..self.n_assets() {
                rec.push(fmt_f64(self.values[(r, c)]));
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| LinkError::io("<panel csv>", e))?;
        Ok(())
    }

    /// Reads a panel written by [`SeriesPanel::write_csv`].
    pub fn read_csv<R: Read>(input: R, kind: SeriesKind) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = rdr.headers()?.clone();
        if header.get(0) != Some("date") || header.len() < 2 {
            return Err(LinkError::InvalidArgument("panel header must be date,<ticker>...".into()));
        }
        let assets: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut dates = Vec::new();
        let mut flat = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            let bad = |reason: String| LinkError::MalformedRow { asset: "panel".into(), line, reason };
            if rec.len() != assets.len() + 1 {
                return Err(bad(format!("expected {} fields, got {}", assets.len() + 1, rec.len())));
            }
            dates.push(parse_date(&rec[0]).map_err(bad)?);
            for field in rec.iter().skip(1) {
                flat.push(field.parse::<f64>().map_err(|e| bad(format!("bad value {field:?}: {e}")))?);
            }
        }
        let values = DMatrix::from_row_slice(dates.len(), assets.len(), &flat);
        SeriesPanel::new(assets, dates, values, kind)
    }
}

fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("bad date {s:?}: {e}"))
}

/// Parses a `date,open,high,low,close` CSV into a date-sorted series.
///
/// Rows that violate the OHLC envelope are rejected with their line number.
pub fn parse_ohlc_csv<R: Read>(raw: R, asset_id: &str) -> Result<AssetSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(raw);
    let header = rdr.headers()?.clone();
    let expected = ["date", "open", "high", "low", "close"];
    if header.len() != expected.len() || header.iter().zip(expected).any(|(h, e)| !h.eq_ignore_ascii_case(e)) {
        return Err(LinkError::MalformedRow {
            asset: asset_id.to_string(),
            line: 1,
            reason: format!("expected header date,open,high,low,close, got {:?}", header.iter().collect::<Vec<_>>()),
        });
    }

    let mut rows: Vec<(usize, OhlcBar)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let bad = |reason: String| LinkError::MalformedRow { asset: asset_id.to_string(), line, reason };
        if rec.len() != 5 {
            return Err(bad(format!("expected 5 fields, got {}", rec.len())));
        }
        let date = parse_date(&rec[0]).map_err(bad)?;
        let mut px = [0.0; 4];
        for (i, slot) in px.iter_mut().enumerate() {
            let field = &rec[i + 1];
            *slot = field.parse::<f64>().map_err(|e| bad(format!("bad number {field:?}: {e}")))?;
        }
        let bar = OhlcBar::new(date, px[0], px[1], px[2], px[3]).map_err(bad)?;
        rows.push((line, bar));
    }
    if rows.is_empty() {
        return Err(LinkError::EmptyFile(asset_id.to_string()));
    }

    rows.sort_by_key(|(_, b)| b.date);
    if let Some(w) = rows.windows(2).find(|w| w[0].1.date == w[1].1.date) {
        return Err(LinkError::DuplicateDate {
            asset: asset_id.to_string(),
            date: w[1].1.date,
            line: w[0].0.max(w[1].0),
        });
    }
    Ok(AssetSeries {
        asset_id: asset_id.to_string(),
        bars: rows.into_iter().map(|(_, b)| b).collect(),
    })
}

/// Close-to-close log returns, dated at the later bar.
pub fn log_returns(series: &AssetSeries) -> Result<DatedSeries> {
    let bars = series.bars();
    if bars.len() < 2 {
        return Err(LinkError::TooShort { needed: 2, got: bars.len() });
    }
    let (dates, values) = bars
        .windows(2)
        .map(|w| (w[1].date, w[1].close.ln() - w[0].close.ln()))
        .unzip();
    Ok(DatedSeries { asset_id: series.asset_id().to_string(), dates, values })
}

/// Garman-Klass daily variance: 0.5 ln(H/L)^2 - (2 ln 2 - 1) ln(C/O)^2.
pub fn garman_klass_variance(bar: &OhlcBar) -> f64 {
    let range = (bar.high / bar.low).ln();
    let drift = (bar.close / bar.open).ln();
    0.5 * range * range - GK_DRIFT_WEIGHT * drift * drift
}

/// Per-bar ln(sigma) with sigma = sqrt(max(GK variance, floor)).
pub fn log_volatility_series(series: &AssetSeries, floor: f64) -> Result<DatedSeries> {
    if series.is_empty() {
        return Err(LinkError::TooShort { needed: 1, got: 0 });
    }
    if !(floor > 0.0) {
        return Err(LinkError::InvalidArgument(format!("volatility floor must be positive, got {floor}")));
    }
    let (dates, values) = series
        .bars()
        .iter()
        .map(|b| (b.date, 0.5 * garman_klass_variance(b).max(floor).ln()))
        .unzip();
    Ok(DatedSeries { asset_id: series.asset_id().to_string(), dates, values })
}

/// Intersects the calendars of the sample's assets within its date range.
///
/// Columns follow `spec.assets`; dates missing from any asset are dropped.
pub fn align_panel(series_list: &[DatedSeries], spec: &SampleSpec, kind: SeriesKind) -> Result<SeriesPanel> {
    spec.validate()?;
    let mut by_asset: HashMap<&str, &DatedSeries> = HashMap::new();
    for s in series_list {
        if by_asset.insert(s.asset_id.as_str(), s).is_some() && spec.assets.contains(&s.asset_id) {
            return Err(LinkError::DuplicateAsset(s.asset_id.clone()));
        }
    }

    let mut lookups: Vec<HashMap<NaiveDate, f64>> = Vec::with_capacity(spec.assets.len());
    let mut common: Option<BTreeSet<NaiveDate>> = None;
    for asset in &spec.assets {
        let s = by_asset.get(asset.as_str()).ok_or_else(|| LinkError::MissingAsset(asset.clone()))?;
        let map: HashMap<NaiveDate, f64> = s
            .dates
            .iter()
            .zip(&s.values)
            .filter(|(d, _)| **d >= spec.start_date && **d <= spec.end_date)
            .map(|(d, v)| (*d, *v))
            .collect();
        let days: BTreeSet<NaiveDate> = map.keys().copied().collect();
        common = Some(match common {
            None => days,
            Some(c) => c.intersection(&days).copied().collect(),
        });
        lookups.push(map);
    }

    let dates: Vec<NaiveDate> = common.unwrap_or_default().into_iter().collect();
    if dates.is_empty() {
        return Err(LinkError::EmptyIntersection(spec.name.clone()));
    }
    let values = DMatrix::from_fn(dates.len(), spec.assets.len(), |r, c| lookups[c][&dates[r]]);
    SeriesPanel::new(spec.assets.clone(), dates, values, kind)
}

/// Cuts the panel into sub-panels, one per inclusive `(start, end)` anchor.
///
/// Anchors that run past either end of the panel are clipped to it; an
/// anchor with no overlap at all is an error.
pub fn yearly_windows(panel: &SeriesPanel, anchors: &[(NaiveDate, NaiveDate)]) -> Result<Vec<SeriesPanel>> {
    let (first, last) = match (panel.first_date(), panel.last_date()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(LinkError::TooShort { needed: 1, got: 0 }),
    };
    anchors
        .iter()
        .map(|&(start, end)| {
            let out_of_range = LinkError::WindowOutOfRange { start, end, first, last };
            if start > end || start > last || end < first {
                return Err(out_of_range);
            }
            let sub = panel.between(start, end);
            if sub.n_obs() == 0 {
                return Err(out_of_range);
            }
            Ok(sub)
        })
        .collect()
}
