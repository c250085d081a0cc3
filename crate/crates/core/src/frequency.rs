//! Frequency-band decomposition of generalized variance shares.
//!
//! For a band `R` the share of shocks to `k` in the fluctuations of `j` is
//! approximated on the Fourier grid `omega_s = 2 pi s / G`:
//!
//! ```text
//! Theta^R_jk = sum_{s in R} sigma_kk^-1 |(Psi(omega_s) Sigma)_jk|^2
//!            / sum_{all s}  (Psi(omega_s) Sigma Psi(omega_s)^*)_jj
//! ```
//!
//! which is the integral of the power-weighted causation spectrum with the
//! power normalized by the same quadrature. Sums run over the whole circle;
//! because the MA coefficients are real only `0 <= s <= G/2` is evaluated and
//! interior points are counted twice. With `G >= H` (the MA truncation) the
//! full-circle sums reproduce the horizon-`H` GFEVD exactly, so band
//! frequency connectedness adds up to the time-domain index.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::connectedness::{check_resid_variances, ma_coefficients, VarModel};
use crate::error::{LinkError, Result};
use crate::io::fmt_f64;

/// Default MA truncation for spectral objects.
pub const DEFAULT_MA_TRUNCATION: usize = 100;

const EDGE_TOL: f64 = 1e-12;

/// Band of angular frequencies between `omega_low` and `omega_high` on `[0, pi]`.
///
/// A Fourier frequency lying exactly on an edge shared with a neighbouring
/// band counts half in each (trapezoid weights); `0` and `pi` count fully.
/// Negative frequencies are covered by symmetry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyBand {
    pub omega_low: f64,
    pub omega_high: f64,
    pub label: String,
}

impl FrequencyBand {
    pub fn new(omega_low: f64, omega_high: f64, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if !(omega_low >= 0.0 && omega_low < omega_high && omega_high <= PI + EDGE_TOL) {
            return Err(LinkError::InvalidBand(format!(
                "{label}: need 0 <= low < high <= pi, got [{omega_low}, {omega_high}]"
            )));
        }
        Ok(FrequencyBand { omega_low, omega_high: omega_high.min(PI), label })
    }

    /// Band of cycles whose period in days lies in `[min_days, max_days)`.
    /// `max_days = None` extends the band down to frequency zero.
    pub fn from_periods(min_days: f64, max_days: Option<f64>, label: impl Into<String>) -> Result<Self> {
        if !(min_days >= 2.0) {
            return Err(LinkError::InvalidBand(format!("shortest period must be >= 2 days, got {min_days}")));
        }
        let high = 2.0 * PI / min_days;
        let low = match max_days {
            Some(d) => 2.0 * PI / d,
            None => 0.0,
        };
        FrequencyBand::new(low, high, label)
    }

    /// Quadrature weight of a folded frequency in `[0, pi]`: 1 inside, 1/2 on
    /// an interior edge, 0 outside.
    pub fn weight(&self, omega: f64) -> f64 {
        if omega < self.omega_low - EDGE_TOL || omega > self.omega_high + EDGE_TOL {
            return 0.0;
        }
        let on_low = self.omega_low > EDGE_TOL && (omega - self.omega_low).abs() <= EDGE_TOL;
        let on_high = self.omega_high < PI - EDGE_TOL && (omega - self.omega_high).abs() <= EDGE_TOL;
        if on_low || on_high {
            0.5
        } else {
            1.0
        }
    }

    pub fn contains(&self, omega: f64) -> bool {
        self.weight(omega) > 0.0
    }

    pub fn full() -> Self {
        FrequencyBand { omega_low: 0.0, omega_high: PI, label: "all".into() }
    }
}

/// High band: periods of 2 to 7 days, `[2 pi / 7, pi]`. Low band: periods
/// longer than a week, `[0, 2 pi / 7)`.
pub fn default_bands() -> Vec<FrequencyBand> {
    let edge = 2.0 * PI / 7.0;
    vec![
        FrequencyBand { omega_low: edge, omega_high: PI, label: "high".into() },
        FrequencyBand { omega_low: 0.0, omega_high: edge, label: "low".into() },
    ]
}

/// Checks that the bands tile `[0, pi]` without gaps or overlaps.
pub fn check_partition(bands: &[FrequencyBand]) -> Result<()> {
    if bands.is_empty() {
        return Err(LinkError::NotAPartition("no bands".into()));
    }
    let mut sorted: Vec<&FrequencyBand> = bands.iter().collect();
    sorted.sort_by(|a, b| a.omega_low.total_cmp(&b.omega_low));
    if sorted[0].omega_low.abs() > EDGE_TOL {
        return Err(LinkError::NotAPartition(format!("lowest band starts at {}", sorted[0].omega_low)));
    }
    for w in sorted.windows(2) {
        if (w[0].omega_high - w[1].omega_low).abs() > EDGE_TOL {
            return Err(LinkError::NotAPartition(format!(
                "{} ends at {} but {} starts at {}",
                w[0].label, w[0].omega_high, w[1].label, w[1].omega_low
            )));
        }
    }
    let top = sorted[sorted.len() - 1].omega_high;
    if (top - PI).abs() > EDGE_TOL {
        return Err(LinkError::NotAPartition(format!("highest band ends at {top}")));
    }
    Ok(())
}

/// `Psi(omega) = sum_h Psi_h e^{-i omega h}`.
pub fn frequency_response(psi: &[DMatrix<f64>], omega: f64) -> Result<DMatrix<Complex64>> {
    let first = psi.first().ok_or_else(|| LinkError::InvalidArgument("empty MA sequence".into()))?;
    let (r, c) = first.shape();
    let mut out = DMatrix::<Complex64>::zeros(r, c);
    for (h, m) in psi.iter().enumerate() {
        let z = Complex64::from_polar(1.0, -omega * h as f64);
        out.zip_apply(m, |o, v| *o += z * v);
    }
    Ok(out)
}

/// Spectral quantities of one VAR on the folded Fourier grid, reusable across bands.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    n: usize,
    grid: usize,
    /// Folded frequencies `2 pi s / G`, `s = 0..=G/2`.
    omegas: Vec<f64>,
    /// Multiplicity of each folded point on the full circle (1 or 2).
    weights: Vec<f64>,
    /// `sigma_kk^-1 |(Psi Sigma)_jk|^2` per point, row-major N x N.
    cross: Vec<Vec<f64>>,
    /// Full-circle power of each variable.
    total_power: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(model: &VarModel, grid: usize, ma_truncation: usize) -> Result<Self> {
        if grid < 2 {
            return Err(LinkError::InvalidArgument(format!("Fourier grid must have at least 2 points, got {grid}")));
        }
        let sigma = &model.resid_cov;
        check_resid_variances(sigma)?;
        let n = model.n_vars();
        let psi = ma_coefficients(model, ma_truncation)?;
        let b: Vec<DMatrix<f64>> = psi.iter().map(|p| p * sigma).collect();

        let half = grid / 2;
        let mut omegas = Vec::with_capacity(half + 1);
        let mut weights = Vec::with_capacity(half + 1);
        let mut cross = Vec::with_capacity(half + 1);
        let mut total_power = vec![0.0; n];

        let mut psi_w = vec![Complex64::new(0.0, 0.0); n * n];
        let mut b_w = vec![Complex64::new(0.0, 0.0); n * n];
        for s in 0..=half {
            let omega = 2.0 * PI * s as f64 / grid as f64;
            let mult = if s == 0 || 2 * s == grid { 1.0 } else { 2.0 };
            psi_w.iter_mut().chain(b_w.iter_mut()).for_each(|z| *z = Complex64::new(0.0, 0.0));
            for (h, (ph, bh)) in psi.iter().zip(&b).enumerate() {
                // reduce the phase exactly before converting to radians
                let phase = 2.0 * PI * ((s * h) % grid) as f64 / grid as f64;
                let z = Complex64::new(phase.cos(), -phase.sin());
                for j in 0..n {
                    for k in 0..n {
                        psi_w[j * n + k] += z * ph[(j, k)];
                        b_w[j * n + k] += z * bh[(j, k)];
                    }
                }
            }
            let mut point = vec![0.0; n * n];
            for j in 0..n {
                let mut power = 0.0;
                for k in 0..n {
                    let v = b_w[j * n + k];
                    point[j * n + k] = v.norm_sqr() / sigma[(k, k)];
                    power += (v * psi_w[j * n + k].conj()).re;
                }
                total_power[j] += mult * power;
            }
            omegas.push(omega);
            weights.push(mult);
            cross.push(point);
        }
        for (j, p) in total_power.iter().enumerate() {
            if !(*p > 0.0) {
                return Err(LinkError::ZeroPower(j));
            }
        }
        Ok(SpectralGrid { n, grid, omegas, weights, cross, total_power })
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Weighted count of full-circle Fourier points in the band.
    pub fn points_in(&self, band: &FrequencyBand) -> f64 {
        self.omegas.iter().zip(&self.weights).map(|(o, w)| w * band.weight(*o)).sum()
    }

    /// Unnormalized band shares `Theta^R`.
    pub fn band_shares(&self, band: &FrequencyBand) -> Result<DMatrix<f64>> {
        let n = self.n;
        let mut acc = vec![0.0; n * n];
        let mut hit = false;
        for ((omega, mult), point) in self.omegas.iter().zip(&self.weights).zip(&self.cross) {
            let w = mult * band.weight(*omega);
            if w > 0.0 {
                hit = true;
                for (a, v) in acc.iter_mut().zip(point) {
                    *a += w * v;
                }
            }
        }
        if !hit {
            return Err(LinkError::EmptyBand(band.label.clone()));
        }
        Ok(DMatrix::from_fn(n, n, |j, k| acc[j * n + k] / self.total_power[j]))
    }
}

/// Unnormalized band shares `Theta^R` for one band.
pub fn band_shares(model: &VarModel, band: &FrequencyBand, grid: usize, ma_truncation: usize) -> Result<DMatrix<f64>> {
    SpectralGrid::new(model, grid, ma_truncation)?.band_shares(band)
}

/// Divides each band matrix row-wise by the row sums of their total.
pub fn normalize_band_shares(theta_bands: &[DMatrix<f64>]) -> Result<Vec<DMatrix<f64>>> {
    let first = theta_bands.first().ok_or_else(|| LinkError::InvalidArgument("no bands".into()))?;
    let n = first.nrows();
    let mut row_sums = vec![0.0; n];
    for m in theta_bands {
        if m.shape() != (n, n) {
            return Err(LinkError::Dimension("band matrices differ in size".into()));
        }
        for (j, s) in row_sums.iter_mut().enumerate() {
            *s += m.row(j).sum();
        }
    }
    if let Some(j) = row_sums.iter().position(|s| !(*s > 0.0)) {
        return Err(LinkError::ZeroRow(j));
    }
    Ok(theta_bands
        .iter()
        .map(|m| DMatrix::from_fn(n, n, |j, k| m[(j, k)] / row_sums[j]))
        .collect())
}

/// `WC = 1 - tr(Theta) / sum(Theta)`.
pub fn within_connectedness(theta_band: &DMatrix<f64>) -> Result<f64> {
    let total = theta_band.sum();
    if !(total > 0.0) {
        return Err(LinkError::InvalidArgument("band share matrix is all zero".into()));
    }
    Ok(1.0 - theta_band.trace() / total)
}

/// Band weight `sum(Theta^R) / N` and `FC = WC * weight`, for globally
/// normalized shares.
pub fn frequency_connectedness(within: f64, theta_band: &DMatrix<f64>) -> (f64, f64) {
    let weight = theta_band.sum() / theta_band.nrows() as f64;
    (weight, within * weight)
}

#[derive(Debug, Clone, Serialize)]
pub struct BandDecomposition {
    pub band: FrequencyBand,
    #[serde(skip)]
    pub theta_band: DMatrix<f64>,
    pub within: f64,
    pub weight: f64,
    pub frequency_conn: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrequencyDecomposition {
    pub bands: Vec<BandDecomposition>,
    /// `1 - tr(Theta~^inf) / N`, the long-horizon total connectedness.
    pub total: f64,
}

impl FrequencyDecomposition {
    pub fn fc_sum(&self) -> f64 {
        self.bands.iter().map(|b| b.frequency_conn).sum()
    }

    pub fn weight_sum(&self) -> f64 {
        self.bands.iter().map(|b| b.weight).sum()
    }
}

/// Full band decomposition over a partition of `[0, pi]`.
pub fn decompose(model: &VarModel, bands: &[FrequencyBand], grid: usize, ma_truncation: usize) -> Result<FrequencyDecomposition> {
    check_partition(bands)?;
    let spectral = SpectralGrid::new(model, grid, ma_truncation)?;
    decompose_grid(&spectral, bands)
}

/// Same as [`decompose`] on a precomputed grid.
pub fn decompose_grid(spectral: &SpectralGrid, bands: &[FrequencyBand]) -> Result<FrequencyDecomposition> {
    check_partition(bands)?;
    let n = spectral.n;
    // a band that misses every grid point contributes nothing
    let raw: Vec<DMatrix<f64>> = bands
        .iter()
        .map(|b| match spectral.band_shares(b) {
            Err(LinkError::EmptyBand(_)) => Ok(DMatrix::zeros(n, n)),
            other => other,
        })
        .collect::<Result<_>>()?;
    let normalized = normalize_band_shares(&raw)?;
    let mut trace_all = 0.0;
    let mut out = Vec::with_capacity(bands.len());
    for (band, theta) in bands.iter().zip(normalized) {
        trace_all += theta.trace();
        let within = if theta.sum() > 0.0 { within_connectedness(&theta)? } else { 0.0 };
        let (weight, frequency_conn) = frequency_connectedness(within, &theta);
        out.push(BandDecomposition { band: band.clone(), theta_band: theta, within, weight, frequency_conn });
    }
    Ok(FrequencyDecomposition { bands: out, total: 1.0 - trace_all / n as f64 })
}

/// CSV with columns `date,band,within,weight,frequency_conn`.
pub fn write_band_csv<W: Write>(out: W, rows: &[(chrono::NaiveDate, &BandDecomposition)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["date", "band", "within", "weight", "frequency_conn"])?;
    for (date, b) in rows {
        w.write_record([
            date.to_string(),
            b.band.label.clone(),
            fmt_f64(b.within),
            fmt_f64(b.weight),
            fmt_f64(b.frequency_conn),
        ])?;
    }
    w.flush().map_err(|e| LinkError::io("<band csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectedness::{connectedness_table, gfevd};
    use crate::synthetic::random_stable_var;
    use nalgebra::DVector;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn white_noise(sigma: DMatrix<f64>) -> VarModel {
        let n = sigma.nrows();
        VarModel::from_parts(DVector::zeros(n), vec![DMatrix::zeros(n, n)], sigma).unwrap()
    }

    fn ar1(a: f64) -> VarModel {
        VarModel::from_parts(DVector::zeros(1), vec![DMatrix::from_element(1, 1, a)], DMatrix::identity(1, 1)).unwrap()
    }

    /// Band shares summed over every grid point of the full circle, each
    /// frequency response evaluated from scratch.
    fn full_circle_band_shares(model: &VarModel, band: &FrequencyBand, grid: usize, trunc: usize) -> DMatrix<f64> {
        let psi = ma_coefficients(model, trunc).unwrap();
        let sigma = &model.resid_cov;
        let n = model.n_vars();
        let mut num = DMatrix::<f64>::zeros(n, n);
        let mut den = vec![0.0; n];
        let sigma_c = sigma.map(|v| Complex64::new(v, 0.0));
        for s in 0..grid {
            let omega = 2.0 * PI * s as f64 / grid as f64;
            let folded = if omega > PI { 2.0 * PI - omega } else { omega };
            let resp = frequency_response(&psi, omega).unwrap();
            let b = &resp * &sigma_c;
            let full = &b * resp.adjoint();
            let w = band.weight(folded);
            for j in 0..n {
                den[j] += full[(j, j)].re;
                for k in 0..n {
                    num[(j, k)] += w * b[(j, k)].norm_sqr() / sigma[(k, k)];
                }
            }
        }
        DMatrix::from_fn(n, n, |j, k| num[(j, k)] / den[j])
    }

    #[test]
    fn response_examples() {
        let psi = ma_coefficients(&white_noise(DMatrix::identity(3, 3)), 1).unwrap();
        let r = frequency_response(&psi, 0.0).unwrap();
        assert!((r - DMatrix::<Complex64>::identity(3, 3)).iter().all(|z| z.norm() < 1e-15));

        let psi = ma_coefficients(&ar1(0.5), 60).unwrap();
        let r = frequency_response(&psi, PI).unwrap();
        assert!((r[(0, 0)].re - 1.0 / 1.5).abs() < 1e-4);
        assert!(r[(0, 0)].im.abs() < 1e-4);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = ma_coefficients(&random_stable_var(&mut rng, 3, 2), 30).unwrap();
        for omega in [0.1, 1.0, 2.5] {
            let a = frequency_response(&psi, omega).unwrap();
            let b = frequency_response(&psi, -omega).unwrap();
            assert!(a.iter().zip(b.iter()).all(|(x, y)| (x - y.conj()).norm() < 1e-12));
        }
    }

    #[test]
    fn full_band_white_noise_is_identity() {
        let theta = band_shares(&white_noise(DMatrix::identity(3, 3)), &FrequencyBand::full(), 365, 100).unwrap();
        let norm = normalize_band_shares(&[theta]).unwrap();
        assert!((&norm[0] - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn full_band_matches_long_horizon_gfevd() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let m = random_stable_var(&mut rng, 4, 2);
            let theta = band_shares(&m, &FrequencyBand::full(), 365, 100).unwrap();
            let reference = gfevd(&m, 100).unwrap();
            assert!((&theta - &reference).amax() < 1e-4);
            // grid >= truncation makes the quadrature exact
            assert!((&theta - &reference).amax() < 1e-12);
        }
    }

    #[test]
    fn disjoint_bands_add_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_stable_var(&mut rng, 3, 1);
        let grid = SpectralGrid::new(&m, 365, 100).unwrap();
        let full = grid.band_shares(&FrequencyBand::full()).unwrap();
        let parts: Vec<DMatrix<f64>> = default_bands().iter().map(|b| grid.band_shares(b).unwrap()).collect();
        assert!((&parts[0] + &parts[1] - full).amax() < 1e-10);
    }

    #[test]
    fn normalization_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_stable_var(&mut rng, 4, 2);
        let grid = SpectralGrid::new(&m, 300, 100).unwrap();
        let single = normalize_band_shares(&[grid.band_shares(&FrequencyBand::full()).unwrap()]).unwrap();
        for j in 0..4 {
            assert!((single[0].row(j).sum() - 1.0).abs() < 1e-12);
        }
        let parts: Vec<DMatrix<f64>> = default_bands().iter().map(|b| grid.band_shares(b).unwrap()).collect();
        let norm = normalize_band_shares(&parts).unwrap();
        for j in 0..4 {
            assert!((norm[0].row(j).sum() + norm[1].row(j).sum() - 1.0).abs() < 1e-10);
        }
        assert!(matches!(normalize_band_shares(&[DMatrix::zeros(2, 2)]), Err(LinkError::ZeroRow(0))));
    }

    #[test]
    fn white_noise_band_share_is_point_share() {
        let m = white_noise(DMatrix::identity(3, 3));
        let grid = SpectralGrid::new(&m, 365, 100).unwrap();
        let bands = default_bands();
        let parts: Vec<DMatrix<f64>> = bands.iter().map(|b| grid.band_shares(b).unwrap()).collect();
        let norm = normalize_band_shares(&parts).unwrap();
        for (band, theta) in bands.iter().zip(&norm) {
            let share = grid.points_in(band) / 365.0;
            assert!((theta - DMatrix::identity(3, 3) * share).amax() < 1e-14);
        }
        // points with 2 pi s / 365 >= 2 pi / 7, i.e. s >= 52.14, on both half-circles
        assert_eq!(grid.points_in(&bands[0]), 2.0 * (182 - 53 + 1) as f64);
        assert_eq!(grid.points_in(&bands[0]) + grid.points_in(&bands[1]), 365.0);
        // on a grid of 14 points s = 2 sits on the edge 2 pi / 7 and is shared
        let grid = SpectralGrid::new(&m, 14, 10).unwrap();
        assert_eq!(grid.points_in(&bands[0]), 2.0 * 4.0 + 1.0 + 2.0 * 0.5);
        assert_eq!(grid.points_in(&bands[1]), 1.0 + 2.0 + 2.0 * 0.5);
    }

    #[test]
    fn within_examples() {
        assert_eq!(within_connectedness(&DMatrix::from_diagonal(&DVector::from_vec(vec![0.2, 0.3]))).unwrap(), 0.0);
        let zero_diag = DMatrix::from_row_slice(2, 2, &[0.0, 0.4, 0.1, 0.0]);
        assert_eq!(within_connectedness(&zero_diag).unwrap(), 1.0);
        let uniform = DMatrix::from_element(5, 5, 0.3);
        assert!((within_connectedness(&uniform).unwrap() - 0.8).abs() < 1e-15);
        assert!(within_connectedness(&DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn frequency_connectedness_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_stable_var(&mut rng, 3, 1);
        let d = decompose(&m, &[FrequencyBand::full()], 365, 100).unwrap();
        let b = &d.bands[0];
        assert!((b.weight - 1.0).abs() < 1e-12);
        assert!((b.frequency_conn - b.within).abs() < 1e-12);
        assert!((b.frequency_conn - d.total).abs() < 1e-12);
        let total = connectedness_table(&gfevd(&m, 100).unwrap(), &["a".into(), "b".into(), "c".into()]).unwrap().total;
        assert!((d.total - total).abs() < 1e-10);

        let (w, fc) = frequency_connectedness(0.7, &DMatrix::zeros(3, 3));
        assert_eq!((w, fc), (0.0, 0.0));
    }

    #[test]
    fn default_band_edges() {
        let bands = default_bands();
        assert!((bands[0].omega_low - 0.897_597_901_025_655_2).abs() < 1e-12);
        assert_eq!(bands[0].omega_high, PI);
        check_partition(&bands).unwrap();
        let two_day = FrequencyBand::from_periods(2.0, Some(7.0), "h").unwrap();
        assert_eq!(two_day.omega_high, PI);
        assert_eq!(bands[0].weight(2.0 * PI / 7.0), 0.5);
        assert_eq!(bands[1].weight(2.0 * PI / 7.0), 0.5);
        assert_eq!(bands[1].weight(0.0), 1.0);
        assert_eq!(bands[0].weight(PI), 1.0);
        for i in 0..=1000 {
            let omega = PI * i as f64 / 1000.0;
            assert_eq!(bands.iter().map(|b| b.weight(omega)).sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn partition_errors() {
        let gap = vec![
            FrequencyBand::new(0.0, 1.0, "a").unwrap(),
            FrequencyBand::new(1.5, PI, "b").unwrap(),
        ];
        assert!(matches!(check_partition(&gap), Err(LinkError::NotAPartition(_))));
        assert!(FrequencyBand::new(1.0, 0.5, "bad").is_err());
        assert!(FrequencyBand::new(0.0, 4.0, "bad").is_err());
    }

    #[test]
    fn empty_band_is_reported() {
        let m = white_noise(DMatrix::identity(2, 2));
        let narrow = FrequencyBand::new(0.1, 0.11, "narrow").unwrap();
        assert!(matches!(band_shares(&m, &narrow, 16, 10), Err(LinkError::EmptyBand(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn aggregation_identity(seed in 0u64..100_000, n in 2usize..6, p in 1usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_stable_var(&mut rng, n, p);
            let d = decompose(&m, &default_bands(), 365, 100).unwrap();
            let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
            let total = connectedness_table(&gfevd(&m, 100).unwrap(), &names).unwrap().total;
            prop_assert!((d.fc_sum() - total).abs() < 1e-4);
            prop_assert!((d.weight_sum() - 1.0).abs() < 1e-8);
            for b in &d.bands {
                for v in [b.within, b.weight, b.frequency_conn] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
                prop_assert!((b.frequency_conn - b.within * b.weight).abs() < 1e-12);
            }
        }

        #[test]
        fn folded_grid_equals_full_circle(seed in 0u64..100_000, grid in 100usize..260) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_stable_var(&mut rng, 3, 2);
            let spectral = SpectralGrid::new(&m, grid, 100).unwrap();
            for band in default_bands() {
                let folded = spectral.band_shares(&band).unwrap();
                let direct = full_circle_band_shares(&m, &band, grid, 100);
                prop_assert!((folded - direct).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_refinement_converges_on_edge_aligned_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let m = random_stable_var(&mut rng, 3, 2);
            let coarse = SpectralGrid::new(&m, 7 * 1000, 100).unwrap();
            let fine = SpectralGrid::new(&m, 7 * 2000, 100).unwrap();
            let full_c = coarse.band_shares(&FrequencyBand::full()).unwrap();
            let full_f = fine.band_shares(&FrequencyBand::full()).unwrap();
            assert!((full_c - full_f).amax() < 1e-12);
            for band in default_bands() {
                let diff = (coarse.band_shares(&band).unwrap() - fine.band_shares(&band).unwrap()).amax();
                assert!(diff < 1e-6, "{} changed by {diff:e}", band.label);
            }
        }
    }
}
