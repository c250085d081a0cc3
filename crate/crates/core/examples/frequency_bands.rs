// Splits the connectedness of two VARs into short- and long-cycle bands:
// one driven by persistent common dynamics, one by same-day comovement.

use cryptolink::frequency::{decompose, DEFAULT_MA_TRUNCATION};
use cryptolink::{default_bands, VarModel};
use nalgebra::{DMatrix, DVector};

pub fn run_example() -> cryptolink::Result<()> {
    let persistent = VarModel::from_parts(
        DVector::zeros(2),
        vec![DMatrix::from_row_slice(2, 2, &[0.9, 0.05, 0.05, 0.9])],
        DMatrix::identity(2, 2),
    )?;
    let contemporaneous = VarModel::from_parts(
        DVector::zeros(2),
        vec![DMatrix::from_row_slice(2, 2, &[-0.3, 0.0, 0.0, -0.3])],
        DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 1.0]),
    )?;

    for (name, model) in [("persistent", persistent), ("contemporaneous", contemporaneous)] {
        let d = decompose(&model, &default_bands(), 365, DEFAULT_MA_TRUNCATION)?;
        println!("{name}: total {:.4}", d.total);
        for b in &d.bands {
            println!(
                "  {:>4}: within {:.4}  weight {:.4}  frequency connectedness {:.4}",
                b.band.label, b.within, b.weight, b.frequency_conn
            );
        }
        println!("  sum over bands {:.4}", d.fc_sum());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> cryptolink::Result<()> {
    run_example()
}
