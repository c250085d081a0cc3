// Writes a small synthetic OHLC directory, reads it back and builds the
// aligned returns and Garman-Klass log-volatility panels.

use chrono::{Days, NaiveDate};
use cryptolink::market_data::{align_panel, log_returns, log_volatility_series, parse_ohlc_csv, DEFAULT_VOLATILITY_FLOOR};
use cryptolink::synthetic::{synthetic_ohlc, write_ohlc_dir, SyntheticMarket};
use cryptolink::{SampleSpec, SeriesKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> cryptolink::Result<()> {
    let start = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(2016, 12, 31).unwrap();
    let mut market = SyntheticMarket::uniform(&["BTC", "ETH", "LTC"], start, end);
    // ETH lists three months late, so the panel starts then
    market.listed[1] = start + Days::new(90);
    let series = synthetic_ohlc(&market, &mut ChaCha8Rng::seed_from_u64(1))?;

    let dir = tempfile::tempdir().map_err(|e| cryptolink::LinkError::InvalidArgument(e.to_string()))?;
    write_ohlc_dir(dir.path(), &series)?;

    let mut returns = Vec::new();
    let mut vols = Vec::new();
    for ticker in ["BTC", "ETH", "LTC"] {
        let file = std::fs::File::open(dir.path().join(format!("{ticker}.csv")))
            .map_err(|e| cryptolink::LinkError::InvalidArgument(e.to_string()))?;
        let s = parse_ohlc_csv(file, ticker)?;
        returns.push(log_returns(&s)?);
        vols.push(log_volatility_series(&s, DEFAULT_VOLATILITY_FLOOR)?);
    }
    let spec = SampleSpec::new("demo", &["BTC", "ETH", "LTC"], start, end)?;
    let r = align_panel(&returns, &spec, SeriesKind::Returns)?;
    let v = align_panel(&vols, &spec, SeriesKind::LogVolatility)?;
    println!("returns panel: {} x {} from {}", r.n_obs(), r.n_assets(), r.dates()[0]);
    println!("volatility panel: {} x {} from {}", v.n_obs(), v.n_assets(), v.dates()[0]);

    let mut csv = Vec::new();
    v.write_csv(&mut csv)?;
    for line in String::from_utf8_lossy(&csv).lines().take(3) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cryptolink::Result<()> {
    run_example()
}
