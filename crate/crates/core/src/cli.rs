//! Batch pipeline behind the `cryptolink` binary: configuration, the
//! per-analysis commands and the run report.
//!
//! Output layout under the output directory:
//!
//! ```text
//! panels/<sample>_<kind>.csv
//! pca/<sample>_<kind>.csv
//! cd/<sample>.csv
//! spillover/<sample>_<kind>_<start>_<end>.csv   (+ .json sidecar)
//! rolling/<sample>_<kind>.csv                   (long format)
//! rolling/<sample>_<kind>_bands.csv
//! report.json                                   (`report` only)
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::connectedness::{connectedness_table, estimate_var, gfevd, ConnectednessTable, DEFAULT_HORIZON, DEFAULT_VAR_ORDER};
use crate::cross_section::{cd_test, write_cd_csv, CdRow};
use crate::error::{LinkError, Result};
use crate::frequency::{FrequencyBand, DEFAULT_MA_TRUNCATION};
use crate::io::{open_file, write_file};
use crate::market_data::{
    align_panel, log_returns, log_volatility_series, parse_ohlc_csv, yearly_windows, AssetSeries, DatedSeries, SampleSpec,
    SeriesKind, SeriesPanel, DEFAULT_VOLATILITY_FLOOR,
};
use crate::pca::{pca_summary, write_pca_table};
use crate::rolling::{aggregate_check, rolling_connectedness, write_rolling_bands_csv, write_rolling_csv, RollingConfig, WindowStatus};
use crate::synthetic::{synthetic_ohlc, write_ohlc_dir, SyntheticMarket};

/// Tolerance of the per-window aggregation self-check.
pub const AGGREGATE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindSelection {
    Returns,
    Volatility,
    #[default]
    Both,
}

impl KindSelection {
    pub fn kinds(self) -> Vec<SeriesKind> {
        match self {
            KindSelection::Returns => vec![SeriesKind::Returns],
            KindSelection::Volatility => vec![SeriesKind::LogVolatility],
            KindSelection::Both => vec![SeriesKind::Returns, SeriesKind::LogVolatility],
        }
    }
}

impl FromStr for KindSelection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "returns" => Ok(KindSelection::Returns),
            "volatility" => Ok(KindSelection::Volatility),
            "both" => Ok(KindSelection::Both),
            other => Err(format!("expected returns, volatility or both, got {other:?}")),
        }
    }
}

impl fmt::Display for KindSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KindSelection::Returns => "returns",
            KindSelection::Volatility => "volatility",
            KindSelection::Both => "both",
        })
    }
}

/// Parses `START:END` with ISO dates.
pub fn parse_window(s: &str) -> std::result::Result<(NaiveDate, NaiveDate), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected START:END, got {s:?}"))?;
    let parse = |x: &str| NaiveDate::parse_from_str(x.trim(), "%Y-%m-%d").map_err(|e| format!("{x:?}: {e}"));
    let (start, end) = (parse(a)?, parse(b)?);
    if start > end {
        return Err(format!("window start {start} is after its end {end}"));
    }
    Ok((start, end))
}

/// A frequency band given by its range of cycle periods in days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    pub label: String,
    pub min_period: f64,
    /// Omitted for a band reaching down to frequency zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_period: Option<f64>,
}

impl BandSpec {
    pub fn to_band(&self) -> Result<FrequencyBand> {
        FrequencyBand::from_periods(self.min_period, self.max_period, self.label.clone())
    }
}

fn default_band_specs() -> Vec<BandSpec> {
    vec![
        BandSpec { label: "high".into(), min_period: 2.0, max_period: Some(7.0) },
        BandSpec { label: "low".into(), min_period: 7.0, max_period: None },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RollingSection {
    pub window: usize,
    pub step: usize,
    pub var_order: usize,
    pub horizon: usize,
    pub ma_truncation: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    pub bands: Vec<BandSpec>,
}

impl Default for RollingSection {
    fn default() -> Self {
        RollingSection {
            window: 365,
            step: 1,
            var_order: DEFAULT_VAR_ORDER,
            horizon: DEFAULT_HORIZON,
            ma_truncation: DEFAULT_MA_TRUNCATION,
            grid: None,
            bands: default_band_specs(),
        }
    }
}

impl RollingSection {
    pub fn to_config(&self) -> Result<RollingConfig> {
        let cfg = RollingConfig {
            window: self.window,
            step: self.step,
            var_order: self.var_order,
            horizon: self.horizon,
            bands: self.bands.iter().map(BandSpec::to_band).collect::<Result<_>>()?,
            ma_truncation: self.ma_truncation,
            grid: self.grid,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub name: String,
    pub assets: Vec<String>,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    /// Inclusive yearly windows for PCA and the CD test.
    pub pca_windows: Vec<(NaiveDate, NaiveDate)>,
    /// Windows for static connectedness tables.
    #[serde(default)]
    pub spillover_windows: Vec<(NaiveDate, NaiveDate)>,
}

impl SampleConfig {
    pub fn spec(&self) -> Result<SampleSpec> {
        let spec = SampleSpec {
            name: self.name.clone(),
            assets: self.assets.clone(),
            start_date: self.start_date,
            end_date: self.end_date,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn default_floor() -> f64 {
    DEFAULT_VOLATILITY_FLOOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Directory with one `<TICKER>.csv` OHLC file per asset.
    pub data_dir: PathBuf,
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub kind: KindSelection,
    #[serde(default = "default_floor")]
    pub volatility_floor: f64,
    #[serde(default)]
    pub rolling: RollingSection,
    pub samples: Vec<SampleConfig>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| LinkError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative directories are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LinkError::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for dir in [&mut cfg.data_dir, &mut cfg.output_dir] {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(LinkError::Config("no samples defined".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for s in &self.samples {
            s.spec()?;
            if !names.insert(&s.name) {
                return Err(LinkError::Config(format!("sample {} defined twice", s.name)));
            }
        }
        if !(self.volatility_floor > 0.0) {
            return Err(LinkError::Config("volatility_floor must be positive".into()));
        }
        self.rolling.to_config()?;
        Ok(())
    }
}

/// Command-line overrides applied on top of a [`RunConfig`].
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunOptions {
    pub sample: Option<String>,
    pub kind: Option<KindSelection>,
    pub window: Option<(NaiveDate, NaiveDate)>,
    /// Replace the data directory by a synthetic market drawn with this seed.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ingest,
    Pca,
    Cd,
    Spillover,
    Rolling,
    Report,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowRecord {
    pub window: String,
    pub status: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RollingSummary {
    pub windows: usize,
    pub estimated: usize,
    pub skipped: usize,
    pub jittered: usize,
    pub aggregate_check_failures: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisRecord {
    pub analysis: String,
    pub sample: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub windows: Vec<WindowRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rolling: Option<RollingSummary>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
}

impl AnalysisRecord {
    fn new(analysis: &str, sample: &str, kind: Option<SeriesKind>) -> Self {
        AnalysisRecord {
            analysis: analysis.into(),
            sample: sample.into(),
            kind: kind.map(|k| k.label().to_string()),
            status: Status::Ok,
            error: None,
            windows: Vec::new(),
            rolling: None,
            files: Vec::new(),
        }
    }

    fn fail(mut self, err: impl ToString) -> Self {
        self.status = Status::Failed;
        self.error = Some(err.to_string());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: String,
    pub config: RunConfig,
    pub options: RunOptions,
    pub analyses: Vec<AnalysisRecord>,
}

impl RunReport {
    /// True when some analysis produced nothing.
    pub fn any_failed(&self) -> bool {
        self.analyses.iter().any(|a| a.status == Status::Failed)
    }

    pub fn files(&self) -> Vec<&str> {
        self.analyses.iter().flat_map(|a| a.files.iter().map(String::as_str)).collect()
    }
}

pub(crate) struct Context<'a> {
    config: &'a RunConfig,
    out: PathBuf,
    data_dir: PathBuf,
    samples: Vec<&'a SampleConfig>,
    kinds: Vec<SeriesKind>,
    window: Option<(NaiveDate, NaiveDate)>,
}

impl Context<'_> {
    fn emit(&self, record: &mut AnalysisRecord, rel: String, bytes: &[u8]) -> Result<()> {
        write_file(&self.out.join(&rel), bytes)?;
        record.files.push(rel);
        Ok(())
    }

    fn load_panel(&self, sample: &str, kind: SeriesKind) -> Result<SeriesPanel> {
        let path = self.out.join(panel_path(sample, kind));
        if !path.exists() {
            return Err(LinkError::Config(format!("{} not found; run ingest first", path.display())));
        }
        SeriesPanel::read_csv(open_file(&path)?, kind)
    }
}

fn panel_path(sample: &str, kind: SeriesKind) -> String {
    format!("panels/{sample}_{}.csv", kind.label())
}

fn window_label((start, end): (NaiveDate, NaiveDate)) -> String {
    format!("{start}_{end}")
}

/// Runs one command (or all of them for [`Command::Report`]).
///
/// Errors are returned only for problems with the configuration or the
/// output directory; failures of individual analyses are recorded in the
/// report and later analyses still run.
pub fn execute(command: Command, config: &RunConfig, options: &RunOptions) -> Result<RunReport> {
    config.validate()?;
    let samples: Vec<&SampleConfig> = match &options.sample {
        Some(name) => vec![config
            .samples
            .iter()
            .find(|s| &s.name == name)
            .ok_or_else(|| LinkError::Config(format!("unknown sample {name}")))?],
        None => config.samples.iter().collect(),
    };
    let out = config.output_dir.clone();
    crate::io::create_dir_all(&out)?;
    let mut ctx = Context {
        config,
        out,
        data_dir: config.data_dir.clone(),
        samples,
        kinds: options.kind.unwrap_or(config.kind).kinds(),
        window: options.window,
    };

    let mut analyses = Vec::new();
    if let Some(seed) = options.seed {
        let record = synthesize(&mut ctx, seed);
        let failed = record.status == Status::Failed;
        analyses.push(record);
        if failed {
            return Ok(finish(config, options, analyses));
        }
    }
    let steps: &[Command] = match command {
        Command::Report => &[Command::Ingest, Command::Pca, Command::Cd, Command::Spillover, Command::Rolling],
        Command::Ingest => &[Command::Ingest],
        Command::Pca => &[Command::Pca],
        Command::Cd => &[Command::Cd],
        Command::Spillover => &[Command::Spillover],
        Command::Rolling => &[Command::Rolling],
    };
    for step in steps {
        analyses.extend(match step {
            Command::Ingest => cmd_ingest(&ctx),
            Command::Pca => cmd_pca(&ctx),
            Command::Cd => cmd_cd(&ctx),
            Command::Spillover => cmd_spillover(&ctx),
            Command::Rolling => cmd_rolling(&ctx),
            Command::Report => unreachable!(),
        });
    }
    let report = finish(config, options, analyses);
    if command == Command::Report {
        let mut bytes = serde_json::to_vec_pretty(&report)?;
        bytes.push(b'\n');
        write_file(&ctx.out.join("report.json"), &bytes)?;
    }
    Ok(report)
}

fn finish(config: &RunConfig, options: &RunOptions, analyses: Vec<AnalysisRecord>) -> RunReport {
    RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        options: options.clone(),
        analyses,
    }
}

/// Draws a synthetic OHLC market covering the selected samples and points
/// the run at it.
fn synthesize(ctx: &mut Context, seed: u64) -> AnalysisRecord {
    let mut record = AnalysisRecord::new("synthesize", "all", None);
    let mut listed: BTreeMap<&str, NaiveDate> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    for s in &ctx.samples {
        for a in &s.assets {
            // one day before the sample start so the first return is available
            let day = s.start_date - Days::new(1);
            match listed.get_mut(a.as_str()) {
                Some(d) => *d = (*d).min(day),
                None => {
                    listed.insert(a, day);
                    order.push(a);
                }
            }
        }
    }
    let end = ctx.samples.iter().map(|s| s.end_date).max().expect("at least one sample");
    let first = *listed.values().min().expect("at least one asset");
    let mut market = SyntheticMarket::uniform(&order, first, end);
    market.listed = order.iter().map(|a| listed[a]).collect();
    let dir = "synthetic_data";
    let result = synthetic_ohlc(&market, &mut ChaCha8Rng::seed_from_u64(seed))
        .and_then(|series| write_ohlc_dir(&ctx.out.join(dir), &series).map(|_| series));
    match result {
        Ok(series) => {
            record.files = series.iter().map(|s| format!("{dir}/{}.csv", s.asset_id())).collect();
            ctx.data_dir = ctx.out.join(dir);
            record
        }
        Err(e) => record.fail(e),
    }
}

fn load_asset(data_dir: &Path, ticker: &str) -> Result<AssetSeries> {
    let path = data_dir.join(format!("{ticker}.csv"));
    if !path.exists() {
        return Err(LinkError::MissingAsset(format!("{ticker} ({} not found)", path.display())));
    }
    parse_ohlc_csv(open_file(&path)?, ticker)
}

/// Builds the aligned returns and log-volatility panels of each sample.
pub(crate) fn cmd_ingest(ctx: &Context) -> Vec<AnalysisRecord> {
    let mut cache: HashMap<String, std::result::Result<(DatedSeries, DatedSeries), String>> = HashMap::new();
    let mut records = Vec::new();
    for sample in &ctx.samples {
        let mut derived: Vec<(DatedSeries, DatedSeries)> = Vec::new();
        let mut error = None;
        for a in &sample.assets {
            let entry = cache.entry(a.clone()).or_insert_with(|| {
                load_asset(&ctx.data_dir, a)
                    .and_then(|s| Ok((log_returns(&s)?, log_volatility_series(&s, ctx.config.volatility_floor)?)))
                    .map_err(|e| e.to_string())
            });
            match entry {
                Ok(pair) => derived.push(pair.clone()),
                Err(e) => {
                    error = Some(e.clone());
                    break;
                }
            }
        }
        for &kind in &ctx.kinds {
            let mut record = AnalysisRecord::new("ingest", &sample.name, Some(kind));
            if let Some(e) = &error {
                records.push(record.fail(e));
                continue;
            }
            let series: Vec<DatedSeries> = derived
                .iter()
                .map(|(r, v)| if kind == SeriesKind::Returns { r.clone() } else { v.clone() })
                .collect();
            let result = sample.spec().and_then(|spec| align_panel(&series, &spec, kind)).and_then(|panel| {
                let mut buf = Vec::new();
                panel.write_csv(&mut buf)?;
                ctx.emit(&mut record, panel_path(&sample.name, kind), &buf)
            });
            records.push(match result {
                Ok(()) => record,
                Err(e) => record.fail(e),
            });
        }
    }
    records
}

fn analysis_windows(ctx: &Context, defaults: &[(NaiveDate, NaiveDate)]) -> Vec<(NaiveDate, NaiveDate)> {
    match ctx.window {
        Some(w) => vec![w],
        None => defaults.to_vec(),
    }
}

fn single_window(panel: &SeriesPanel, anchor: (NaiveDate, NaiveDate)) -> Result<SeriesPanel> {
    Ok(yearly_windows(panel, &[anchor])?.remove(0))
}

/// First-component share and squared loadings per yearly window.
pub(crate) fn cmd_pca(ctx: &Context) -> Vec<AnalysisRecord> {
    let mut records = Vec::new();
    for sample in &ctx.samples {
        for &kind in &ctx.kinds {
            let mut record = AnalysisRecord::new("pca", &sample.name, Some(kind));
            let panel = match ctx.load_panel(&sample.name, kind) {
                Ok(p) => p,
                Err(e) => {
                    records.push(record.fail(e));
                    continue;
                }
            };
            let mut labels = Vec::new();
            let mut results = Vec::new();
            for anchor in analysis_windows(ctx, &sample.pca_windows) {
                let label = window_label(anchor);
                match single_window(&panel, anchor).and_then(|w| pca_summary(&w)) {
                    Ok(r) => {
                        labels.push(label.clone());
                        results.push(r);
                        record.windows.push(WindowRecord { window: label, status: "ok".into() });
                    }
                    Err(e) => record.windows.push(WindowRecord { window: label, status: format!("failed: {e}") }),
                }
            }
            if results.is_empty() {
                records.push(record.fail("no window could be analysed"));
                continue;
            }
            let mut buf = Vec::new();
            let result = write_pca_table(&mut buf, &labels, &results)
                .and_then(|_| ctx.emit(&mut record, format!("pca/{}_{}.csv", sample.name, kind.label()), &buf));
            records.push(match result {
                Ok(()) => record,
                Err(e) => record.fail(e),
            });
        }
    }
    records
}

/// Average correlation and CD statistic per yearly window and kind.
pub(crate) fn cmd_cd(ctx: &Context) -> Vec<AnalysisRecord> {
    let mut records = Vec::new();
    for sample in &ctx.samples {
        let mut record = AnalysisRecord::new("cd", &sample.name, None);
        let mut rows = Vec::new();
        for &kind in &ctx.kinds {
            let panel = match ctx.load_panel(&sample.name, kind) {
                Ok(p) => p,
                Err(e) => {
                    record.windows.push(WindowRecord { window: kind.label().into(), status: format!("failed: {e}") });
                    continue;
                }
            };
            for anchor in analysis_windows(ctx, &sample.pca_windows) {
                let label = format!("{}_{}", kind.label(), window_label(anchor));
                match single_window(&panel, anchor).and_then(|w| cd_test(&w)) {
                    Ok(result) => {
                        rows.push(CdRow { window_start: anchor.0, window_end: anchor.1, kind, result });
                        record.windows.push(WindowRecord { window: label, status: "ok".into() });
                    }
                    Err(e) => record.windows.push(WindowRecord { window: label, status: format!("failed: {e}") }),
                }
            }
        }
        if rows.is_empty() {
            records.push(record.fail("no window could be analysed"));
            continue;
        }
        let mut buf = Vec::new();
        let result = write_cd_csv(&mut buf, &rows).and_then(|_| ctx.emit(&mut record, format!("cd/{}.csv", sample.name), &buf));
        records.push(match result {
            Ok(()) => record,
            Err(e) => record.fail(e),
        });
    }
    records
}

#[derive(Serialize)]
struct SpilloverSidecar<'a> {
    sample: &'a str,
    kind: SeriesKind,
    window_start: NaiveDate,
    window_end: NaiveDate,
    first_date: NaiveDate,
    last_date: NaiveDate,
    observations: usize,
    var_order: usize,
    horizon: usize,
    t_eff: usize,
    condition: f64,
    jittered: bool,
    table: &'a ConnectednessTable,
}

/// Static connectedness tables for the configured windows.
pub(crate) fn cmd_spillover(ctx: &Context) -> Vec<AnalysisRecord> {
    let rolling = &ctx.config.rolling;
    let mut records = Vec::new();
    for sample in &ctx.samples {
        for &kind in &ctx.kinds {
            let mut record = AnalysisRecord::new("spillover", &sample.name, Some(kind));
            let panel = match ctx.load_panel(&sample.name, kind) {
                Ok(p) => p,
                Err(e) => {
                    records.push(record.fail(e));
                    continue;
                }
            };
            let windows = analysis_windows(ctx, &sample.spillover_windows);
            if windows.is_empty() {
                continue;
            }
            for anchor in windows {
                let label = window_label(anchor);
                let result = single_window(&panel, anchor).and_then(|w| {
                    let model = estimate_var(&w, rolling.var_order)?;
                    let table = connectedness_table(&gfevd(&model, rolling.horizon)?, w.assets())?;
                    let stem = format!("spillover/{}_{}_{}", sample.name, kind.label(), label);
                    let mut buf = Vec::new();
                    table.write_csv(&mut buf)?;
                    ctx.emit(&mut record, format!("{stem}.csv"), &buf)?;
                    let sidecar = SpilloverSidecar {
                        sample: &sample.name,
                        kind,
                        window_start: anchor.0,
                        window_end: anchor.1,
                        first_date: w.dates()[0],
                        last_date: w.dates()[w.n_obs() - 1],
                        observations: w.n_obs(),
                        var_order: model.p,
                        horizon: rolling.horizon,
                        t_eff: model.t_eff,
                        condition: model.condition,
                        jittered: model.jittered,
                        table: &table,
                    };
                    let mut json = serde_json::to_vec_pretty(&sidecar)?;
                    json.push(b'\n');
                    ctx.emit(&mut record, format!("{stem}.json"), &json)?;
                    Ok(model.jittered)
                });
                let status = match result {
                    Ok(false) => "ok".to_string(),
                    Ok(true) => "ok (ridge jitter applied)".to_string(),
                    Err(e) => format!("failed: {e}"),
                };
                record.windows.push(WindowRecord { window: label, status });
            }
            if record.files.is_empty() {
                record = record.fail("no window could be analysed");
            }
            records.push(record);
        }
    }
    records
}

/// Rolling total, within, weight and band connectedness.
pub(crate) fn cmd_rolling(ctx: &Context) -> Vec<AnalysisRecord> {
    let mut records = Vec::new();
    let cfg = match ctx.config.rolling.to_config() {
        Ok(c) => c,
        Err(e) => return vec![AnalysisRecord::new("rolling", "all", None).fail(e)],
    };
    for sample in &ctx.samples {
        for &kind in &ctx.kinds {
            let mut record = AnalysisRecord::new("rolling", &sample.name, Some(kind));
            let result = ctx.load_panel(&sample.name, kind).and_then(|panel| {
                let points = rolling_connectedness(&panel, &cfg)?;
                let mut summary = RollingSummary { windows: points.len(), ..Default::default() };
                for p in &points {
                    match (&p.status, &p.estimate) {
                        (WindowStatus::Ok, Some(e)) => {
                            summary.estimated += 1;
                            summary.jittered += e.jittered as usize;
                            if !aggregate_check(p, AGGREGATE_TOLERANCE) {
                                summary.aggregate_check_failures += 1;
                                record.windows.push(WindowRecord {
                                    window: p.window_end.to_string(),
                                    status: "aggregate check failed".into(),
                                });
                            }
                        }
                        (WindowStatus::Skipped(reason), _) => {
                            summary.skipped += 1;
                            record.windows.push(WindowRecord { window: p.window_end.to_string(), status: format!("skipped: {reason}") });
                        }
                        _ => {}
                    }
                }
                if summary.estimated == 0 {
                    return Err(LinkError::InvalidArgument("every rolling window was skipped".into()));
                }
                let stem = format!("rolling/{}_{}", sample.name, kind.label());
                let mut buf = Vec::new();
                write_rolling_csv(&mut buf, kind, &points)?;
                ctx.emit(&mut record, format!("{stem}.csv"), &buf)?;
                let mut buf = Vec::new();
                write_rolling_bands_csv(&mut buf, &points)?;
                ctx.emit(&mut record, format!("{stem}_bands.csv"), &buf)?;
                record.rolling = Some(summary);
                Ok(())
            });
            records.push(match result {
                Ok(()) => record,
                Err(e) => record.fail(e),
            });
        }
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::replication_config;

    #[test]
    fn window_parsing() {
        let (a, b) = parse_window("2015-08-08:2016-08-07").unwrap();
        assert_eq!(a, NaiveDate::from_ymd_opt(2015, 8, 8).unwrap());
        assert_eq!(b, NaiveDate::from_ymd_opt(2016, 8, 7).unwrap());
        assert!(parse_window("2016-01-01:2015-01-01").is_err());
        assert!(parse_window("2016-01-01").is_err());
    }

    #[test]
    fn kind_selection() {
        assert_eq!("both".parse::<KindSelection>().unwrap().kinds().len(), 2);
        assert_eq!("volatility".parse::<KindSelection>().unwrap().kinds(), vec![SeriesKind::LogVolatility]);
        assert!("prices".parse::<KindSelection>().is_err());
    }

    #[test]
    fn default_bands_roundtrip() {
        let cfg = RollingSection::default().to_config().unwrap();
        assert_eq!(cfg, RollingConfig::default());
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_bands() {
        assert!(RunConfig::from_toml("data_dir = 'd'\noutput_dir = 'o'\nsamples = []\n").is_err());
        let mut text = crate::presets::REPLICATION_TOML.to_string();
        text.push_str("\n[extra]\nx = 1\n");
        assert!(RunConfig::from_toml(&text).is_err());
        let mut cfg = replication_config();
        cfg.rolling.bands.pop();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn missing_asset_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = replication_config();
        cfg.data_dir = dir.path().join("nothing");
        cfg.output_dir = dir.path().join("out");
        let opts = RunOptions { sample: Some("sample1".into()), ..Default::default() };
        let report = execute(Command::Ingest, &cfg, &opts).unwrap();
        assert!(report.any_failed());
        assert!(report.analyses[0].error.as_ref().unwrap().contains("BTC"));
    }
}
