// First-component share of return variance in consecutive yearly windows
// of a market whose common factor strengthens over time.

use chrono::NaiveDate;
use cryptolink::market_data::{align_panel, log_returns, yearly_windows};
use cryptolink::pca::write_pca_table;
use cryptolink::synthetic::{synthetic_ohlc, SyntheticMarket};
use cryptolink::{pca_summary, SampleSpec, SeriesKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> cryptolink::Result<()> {
    let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).unwrap();
    let assets = ["BTC", "DASH", "ETH", "LTC", "XRP"];
    let market = SyntheticMarket::uniform(&assets, d(2016, 12, 31), d(2019, 12, 31));
    let series = synthetic_ohlc(&market, &mut ChaCha8Rng::seed_from_u64(2))?;
    let returns = series.iter().map(log_returns).collect::<cryptolink::Result<Vec<_>>>()?;
    let spec = SampleSpec::new("demo", &assets, d(2017, 1, 1), d(2019, 12, 31))?;
    let panel = align_panel(&returns, &spec, SeriesKind::Returns)?;

    let anchors = [
        (d(2017, 1, 1), d(2017, 12, 31)),
        (d(2018, 1, 1), d(2018, 12, 31)),
        (d(2019, 1, 1), d(2019, 12, 31)),
    ];
    let results = yearly_windows(&panel, &anchors)?
        .iter()
        .map(pca_summary)
        .collect::<cryptolink::Result<Vec<_>>>()?;
    for (a, r) in anchors.iter().zip(&results) {
        println!("{}..{}: PC1 explains {:.1}%", a.0, a.1, 100.0 * r.pc1_share);
    }
    let labels: Vec<String> = anchors.iter().map(|a| a.0.format("%Y").to_string()).collect();
    write_pca_table(std::io::stdout(), &labels, &results)
}

#[allow(dead_code)]
fn main() -> cryptolink::Result<()> {
    run_example()
}
