// Estimates a VAR(2) on simulated data and prints its connectedness table.

use chrono::{Days, NaiveDate};
use cryptolink::connectedness::DEFAULT_HORIZON;
use cryptolink::synthetic::simulate_var;
use cryptolink::{connectedness_table, estimate_var, gfevd, SeriesKind, SeriesPanel, VarModel};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> cryptolink::Result<()> {
    // BTC leads the other two coins
    let a1 = DMatrix::from_row_slice(3, 3, &[0.2, 0.0, 0.0, 0.4, 0.1, 0.0, 0.3, 0.0, 0.1]);
    let a2 = DMatrix::from_row_slice(3, 3, &[0.05, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let sigma = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.3, 0.3, 1.0, 0.2, 0.3, 0.2, 1.0]);
    let truth = VarModel::from_parts(DVector::zeros(3), vec![a1, a2], sigma)?;
    let y = simulate_var(&truth, 1000, 200, &mut ChaCha8Rng::seed_from_u64(4))?;

    let start = NaiveDate::from_ymd_opt(2017, 1, 1).unwrap();
    let dates = (0..y.nrows()).map(|i| start + Days::new(i as u64)).collect();
    let assets: Vec<String> = ["BTC", "ETH", "LTC"].iter().map(|s| s.to_string()).collect();
    let panel = SeriesPanel::new(assets.clone(), dates, y, SeriesKind::Returns)?;

    let model = estimate_var(&panel, 2)?;
    let table = connectedness_table(&gfevd(&model, DEFAULT_HORIZON)?, &assets)?;
    println!("estimated: total connectedness {:.3}", table.total);
    let exact = connectedness_table(&gfevd(&truth, DEFAULT_HORIZON)?, &assets)?;
    println!("true model: total connectedness {:.3}", exact.total);
    table.write_csv(std::io::stdout())
}

#[allow(dead_code)]
fn main() -> cryptolink::Result<()> {
    run_example()
}
