//! Built-in sample definitions: the three nested coin samples with their
//! yearly windows and the first/last-year spillover windows.

use std::path::PathBuf;

use chrono::NaiveDate;

use crate::cli::{KindSelection, RollingSection, RunConfig, SampleConfig};
use crate::market_data::DEFAULT_VOLATILITY_FLOOR;

/// The shipped `config/replication.toml`.
pub const REPLICATION_TOML: &str = include_str!("../config/replication.toml");

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).expect("valid preset date")
}

/// Yearly windows `(y-m-d, (y+1)-m-(d-1))` from `first_year`, the last one
/// running from its anchor to `end`.
fn yearly(first_year: i32, years: i32, m: u32, day: u32, end: NaiveDate) -> Vec<(NaiveDate, NaiveDate)> {
    let mut out: Vec<(NaiveDate, NaiveDate)> = (0..years - 1)
        .map(|i| {
            let y = first_year + i;
            (d(y, m, day), d(y + 1, m, day).pred_opt().expect("valid preset date"))
        })
        .collect();
    out.push((d(first_year + years - 1, m, day), end));
    out
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

pub const SAMPLE1_ASSETS: [&str; 7] = ["BTC", "DASH", "ETH", "LTC", "XLM", "XMR", "XRP"];
pub const SAMPLE2_EXTRA: [&str; 3] = ["ETC", "NEO", "ZEC"];
pub const SAMPLE3_EXTRA: [&str; 7] = ["ADA", "BCH", "BNB", "EOS", "MIOTA", "TRX", "XTZ"];

pub fn replication_samples() -> Vec<SampleConfig> {
    let end = d(2020, 7, 17);
    let last_year = (d(2019, 7, 19), d(2020, 7, 18));
    let s1: Vec<&str> = SAMPLE1_ASSETS.to_vec();
    let s2: Vec<&str> = s1.iter().chain(&SAMPLE2_EXTRA).copied().collect();
    let s3: Vec<&str> = s2.iter().chain(&SAMPLE3_EXTRA).copied().collect();
    vec![
        SampleConfig {
            name: "sample1".into(),
            assets: strings(&s1),
            start_date: d(2015, 8, 8),
            end_date: end,
            pca_windows: yearly(2015, 5, 8, 8, end),
            spillover_windows: vec![(d(2015, 8, 8), d(2016, 8, 7)), last_year],
        },
        SampleConfig {
            name: "sample2".into(),
            assets: strings(&s2),
            start_date: d(2016, 10, 30),
            end_date: end,
            pca_windows: yearly(2016, 4, 10, 30, end),
            spillover_windows: vec![last_year],
        },
        SampleConfig {
            name: "sample3".into(),
            assets: strings(&s3),
            start_date: d(2017, 10, 3),
            end_date: end,
            pca_windows: yearly(2017, 3, 10, 3, end),
            spillover_windows: vec![last_year],
        },
    ]
}

/// The full replication configuration reading from `data/` and writing to `out/`.
pub fn replication_config() -> RunConfig {
    RunConfig {
        data_dir: PathBuf::from("data"),
        output_dir: PathBuf::from("out"),
        kind: KindSelection::Both,
        volatility_floor: DEFAULT_VOLATILITY_FLOOR,
        rolling: RollingSection::default(),
        samples: replication_samples(),
    }
}
