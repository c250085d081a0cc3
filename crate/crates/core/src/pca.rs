//! Correlation-matrix principal components: first-PC variance share and
//! squared component loadings.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{LinkError, Result};
use crate::io::fmt_f64;
use crate::linalg::eigen_symmetric;
use crate::market_data::SeriesPanel;

#[derive(Debug, Clone)]
pub struct PcaResult {
    pub assets: Vec<String>,
    /// Descending, sums to N.
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub pc1_share: f64,
    /// Squared correlation of each standardized series with the PC1 scores.
    pub squared_loadings: Vec<f64>,
}

pub(crate) fn column_moments(panel: &SeriesPanel) -> Result<Vec<(f64, f64)>> {
    let t = panel.n_obs();
    if t < 2 {
        return Err(LinkError::TooShort { needed: 2, got: t });
    }
    let x = panel.values();
    (0..panel.n_assets())
        .map(|c| {
            let col = x.column(c);
            let mean = col.sum() / t as f64;
            let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
            let sd = (ss / (t - 1) as f64).sqrt();
            // relative test so tiny-but-real variation is kept
            if !(sd > 0.0) || sd <= 1e-14 * mean.abs() {
                return Err(LinkError::ZeroVariance(panel.assets()[c].clone()));
            }
            Ok((mean, sd))
        })
        .collect()
}

/// Centers each column and scales it to unit sample standard deviation (T-1).
pub fn standardize(panel: &SeriesPanel) -> Result<SeriesPanel> {
    let moments = column_moments(panel)?;
    let x = panel.values();
    let z = DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| (x[(r, c)] - moments[c].0) / moments[c].1);
    Ok(panel.with_values(z))
}

/// Pearson correlation matrix, two-pass.
pub fn correlation_matrix(panel: &SeriesPanel) -> Result<DMatrix<f64>> {
    let z = standardize(panel)?;
    let zv = z.values();
    let t = zv.nrows() as f64;
    let mut corr = zv.tr_mul(zv) / (t - 1.0);
    let n = corr.nrows();
    for i in 0..n {
        corr[(i, i)] = 1.0;
        for j in 0..i {
            let v = (0.5 * (corr[(i, j)] + corr[(j, i)])).clamp(-1.0, 1.0);
            corr[(i, j)] = v;
            corr[(j, i)] = v;
        }
    }
    Ok(corr)
}

/// First-principal-component summary of a panel on the correlation scale.
pub fn pca_summary(panel: &SeriesPanel) -> Result<PcaResult> {
    let n = panel.n_assets();
    if panel.n_obs() <= n {
        return Err(LinkError::TooShort { needed: n + 1, got: panel.n_obs() });
    }
    let corr = correlation_matrix(panel)?;
    let eig = eigen_symmetric(&corr)?;
    let lambda1 = eig.values[0];
    let total: f64 = eig.values.sum();
    let squared_loadings = eig.vectors.column(0).iter().map(|v| lambda1 * v * v).collect();
    Ok(PcaResult {
        assets: panel.assets().to_vec(),
        pc1_share: lambda1 / total,
        squared_loadings,
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
    })
}

/// PC1 scores of the standardized panel.
pub fn pc1_scores(panel: &SeriesPanel, result: &PcaResult) -> Result<DVector<f64>> {
    let z = standardize(panel)?;
    Ok(z.values() * result.eigenvectors.column(0))
}

/// Writes a Table-1-shaped CSV: a `pc1_share` row, then one row per asset,
/// one column per window.
pub fn write_pca_table<W: Write>(out: W, window_labels: &[String], results: &[PcaResult]) -> Result<()> {
    if window_labels.len() != results.len() {
        return Err(LinkError::Dimension("one label per window is required".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["row".to_string()];
    header.extend(window_labels.iter().cloned());
    w.write_record(&header)?;

    let mut row = vec!["pc1_share".to_string()];
    row.extend(results.iter().map(|r| fmt_f64(r.pc1_share)));
    w.write_record(&row)?;

    if let Some(first) = results.first() {
        for (i, asset) in first.assets.iter().enumerate() {
            let mut row = vec![asset.clone()];
            row.extend(results.iter().map(|r| fmt_f64(r.squared_loadings[i])));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| LinkError::io("<pca csv>", e))?;
    Ok(())
}
