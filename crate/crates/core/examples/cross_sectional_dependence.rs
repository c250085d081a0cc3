// CD test on independent noise and on a panel with a common factor.

use chrono::{Days, NaiveDate};
use cryptolink::{cd_test, SeriesKind, SeriesPanel};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn panel(values: DMatrix<f64>) -> cryptolink::Result<SeriesPanel> {
    let start = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap();
    let dates = (0..values.nrows()).map(|i| start + Days::new(i as u64)).collect();
    let assets = (0..values.ncols()).map(|i| format!("C{i}")).collect();
    SeriesPanel::new(assets, dates, values, SeriesKind::Returns)
}

pub fn run_example() -> cryptolink::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (t, n) = (365, 7);
    let noise: DMatrix<f64> = DMatrix::from_fn(t, n, |_, _| StandardNormal.sample(&mut rng));
    let factor: Vec<f64> = (0..t).map(|_| StandardNormal.sample(&mut rng)).collect();
    let common = DMatrix::from_fn(t, n, |r, c| factor[r] + noise[(r, c)]);

    for (name, values) in [("independent", noise), ("common factor", common)] {
        let r = cd_test(&panel(values)?)?;
        println!("{name:>14}: rho_bar = {:.3}, CD = {:.2}, p = {:.3e}", r.rho_bar, r.cd_stat, r.p_value);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cryptolink::Result<()> {
    run_example()
}
