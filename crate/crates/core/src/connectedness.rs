//! VAR(p) estimation, moving-average coefficients, generalized forecast-error
//! variance decomposition and time-domain connectedness tables.
//!
//! The GFEVD share of variable `k` in the `H`-step forecast-error variance of
//! variable `j` is
//!
//! ```text
//! theta_jk(H) = sigma_kk^-1 * sum_h (e_j' Psi_h Sigma e_k)^2 / sum_h (e_j' Psi_h Sigma Psi_h' e_j)
//! ```
//!
//! with `h = 0..H-1`. Rows do not sum to one in general; [`connectedness_table`]
//! normalizes them and builds the FROM/TO/total aggregates.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{LinkError, Result};
use crate::io::fmt_2dp;
use crate::linalg::condition_number;
use crate::market_data::SeriesPanel;

/// Condition number of X'X above which the ridge jitter is applied.
pub const CONDITION_THRESHOLD: f64 = 1e12;
/// Jitter added to the diagonal of X'X, relative to its trace.
const RIDGE_JITTER: f64 = 1e-10;

pub const DEFAULT_VAR_ORDER: usize = 4;
pub const DEFAULT_HORIZON: usize = 10;

#[derive(Debug, Clone)]
pub struct VarModel {
    pub p: usize,
    pub intercept: DVector<f64>,
    /// A_1..A_p, each N x N.
    pub lag_coeffs: Vec<DMatrix<f64>>,
    /// Residual covariance with the 1/T_eff denominator.
    pub resid_cov: DMatrix<f64>,
    pub t_eff: usize,
    /// Condition number of the regressor cross-product.
    pub condition: f64,
    /// True when the ridge jitter had to be applied.
    pub jittered: bool,
}

impl VarModel {
    /// Builds a model from known coefficients (simulation and tests).
    pub fn from_parts(intercept: DVector<f64>, lag_coeffs: Vec<DMatrix<f64>>, resid_cov: DMatrix<f64>) -> Result<Self> {
        let n = intercept.len();
        if lag_coeffs.is_empty() {
            return Err(LinkError::InvalidArgument("VAR order must be at least 1".into()));
        }
        if lag_coeffs.iter().any(|a| a.shape() != (n, n)) || resid_cov.shape() != (n, n) {
            return Err(LinkError::Dimension(format!("VAR blocks must be {n}x{n}")));
        }
        Ok(VarModel {
            p: lag_coeffs.len(),
            intercept,
            lag_coeffs,
            resid_cov,
            t_eff: 0,
            condition: 1.0,
            jittered: false,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.intercept.len()
    }

    /// Companion-form matrix of the lag polynomial.
    pub fn companion(&self) -> DMatrix<f64> {
        let n = self.n_vars();
        let np = n * self.p;
        let mut c = DMatrix::zeros(np, np);
        for (j, a) in self.lag_coeffs.iter().enumerate() {
            c.view_mut((0, j * n), (n, n)).copy_from(a);
        }
        for i in n..np {
            c[(i, i - n)] = 1.0;
        }
        c
    }
}

/// Equation-by-equation least squares with an intercept.
pub fn estimate_var(panel: &SeriesPanel, p: usize) -> Result<VarModel> {
    if p == 0 {
        return Err(LinkError::InvalidArgument("VAR order must be at least 1".into()));
    }
    let y = panel.values();
    let (t, n) = y.shape();
    let required = n * p + 1;
    let t_eff = t.saturating_sub(p);
    if t_eff <= required {
        return Err(LinkError::InsufficientObservations { t_eff, required });
    }
    // a constant series has no innovations to decompose
    crate::pca::column_moments(panel)?;

    let k = required;
    let x = DMatrix::from_fn(t_eff, k, |r, c| {
        if c == 0 {
            1.0
        } else {
            let lag = (c - 1) / n + 1;
            let var = (c - 1) % n;
            y[(r + p - lag, var)]
        }
    });
    let yy = y.rows(p, t_eff).into_owned();

    let xtx = x.tr_mul(&x);
    let condition = condition_number(&xtx)?;
    let (coef, jittered) = if condition > CONDITION_THRESHOLD || !condition.is_finite() {
        let mut ridge = xtx.clone();
        let jitter = RIDGE_JITTER * xtx.trace();
        for i in 0..k {
            ridge[(i, i)] += jitter;
        }
        let chol = ridge.cholesky().ok_or(LinkError::Singular(condition))?;
        (chol.solve(&x.tr_mul(&yy)), true)
    } else {
        let qr = x.clone().qr();
        let rhs = qr.q().tr_mul(&yy);
        let coef = qr.r().solve_upper_triangular(&rhs).ok_or(LinkError::Singular(condition))?;
        (coef, false)
    };
    if coef.iter().any(|v| !v.is_finite()) {
        return Err(LinkError::Singular(condition));
    }

    let resid = &yy - &x * &coef;
    let mut resid_cov = resid.tr_mul(&resid) / t_eff as f64;
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (resid_cov[(i, j)] + resid_cov[(j, i)]);
            resid_cov[(i, j)] = v;
            resid_cov[(j, i)] = v;
        }
    }

    let intercept = coef.row(0).transpose();
    let lag_coeffs = (0..p)
        .map(|j| coef.rows(1 + j * n, n).transpose())
        .collect();
    Ok(VarModel { p, intercept, lag_coeffs, resid_cov, t_eff, condition, jittered })
}

/// Psi_0 = I, Psi_h = sum_{j=1..min(h,p)} A_j Psi_{h-j}.
pub fn ma_coefficients(model: &VarModel, horizon: usize) -> Result<Vec<DMatrix<f64>>> {
    if horizon == 0 {
        return Err(LinkError::InvalidArgument("horizon must be at least 1".into()));
    }
    let n = model.n_vars();
    let mut psi: Vec<DMatrix<f64>> = Vec::with_capacity(horizon);
    psi.push(DMatrix::identity(n, n));
    for h in 1..horizon {
        let mut next = DMatrix::zeros(n, n);
        for j in 1..=h.min(model.p) {
            next += &model.lag_coeffs[j - 1] * &psi[h - j];
        }
        psi.push(next);
    }
    Ok(psi)
}

pub(crate) fn check_resid_variances(sigma: &DMatrix<f64>) -> Result<()> {
    let max_diag = sigma.diagonal().iter().copied().fold(0.0f64, f64::max);
    for k in 0..sigma.nrows() {
        let s = sigma[(k, k)];
        if !(s > 0.0) || !s.is_finite() || s <= 1e-24 * max_diag {
            return Err(LinkError::ZeroResidualVariance(k));
        }
    }
    Ok(())
}

/// Raw (unnormalized) GFEVD shares from MA coefficients and innovation covariance.
pub fn gfevd_from_ma(psi: &[DMatrix<f64>], sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_resid_variances(sigma)?;
    let n = sigma.nrows();
    let mut num = DMatrix::<f64>::zeros(n, n);
    let mut den = DVector::<f64>::zeros(n);
    for p in psi {
        let b = p * sigma;
        for j in 0..n {
            let mut row_power = 0.0;
            for k in 0..n {
                num[(j, k)] += b[(j, k)] * b[(j, k)];
                row_power += b[(j, k)] * p[(j, k)];
            }
            den[j] += row_power;
        }
    }
    Ok(DMatrix::from_fn(n, n, |j, k| num[(j, k)] / (sigma[(k, k)] * den[j])))
}

/// Raw GFEVD shares at forecast horizon `horizon`.
pub fn gfevd(model: &VarModel, horizon: usize) -> Result<DMatrix<f64>> {
    let psi = ma_coefficients(model, horizon)?;
    gfevd_from_ma(&psi, &model.resid_cov)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectednessTable {
    pub assets: Vec<String>,
    /// Row-normalized shares; row j is the variance decomposition of asset j.
    pub shares: Vec<Vec<f64>>,
    pub total_from: Vec<f64>,
    pub total_to: Vec<f64>,
    pub total: f64,
}

impl ConnectednessTable {
    pub fn n(&self) -> usize {
        self.assets.len()
    }

    /// Writes the Table-2 layout with two decimals.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.n();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(self.assets.iter().cloned());
        header.push("total_from".into());
        w.write_record(&header)?;
        for j in 0..n {
            let mut row = vec![self.assets[j].clone()];
            row.extend(self.shares[j].iter().map(|&v| fmt_2dp(v)));
            row.push(fmt_2dp(self.total_from[j]));
            w.write_record(&row)?;
        }
        let mut row = vec!["total_to".to_string()];
        row.extend(self.total_to.iter().map(|&v| fmt_2dp(v)));
        row.push(String::new());
        w.write_record(&row)?;
        let mut row = vec!["total_connectedness".to_string(), fmt_2dp(self.total)];
        row.resize(n + 2, String::new());
        w.write_record(&row)?;
        w.flush().map_err(|e| LinkError::io("<connectedness csv>", e))?;
        Ok(())
    }
}

/// Row-normalizes raw shares and computes FROM/TO/total aggregates.
pub fn connectedness_table(theta: &DMatrix<f64>, assets: &[String]) -> Result<ConnectednessTable> {
    let n = theta.nrows();
    if theta.ncols() != n || assets.len() != n {
        return Err(LinkError::Dimension(format!(
            "theta is {}x{} for {} assets",
            n,
            theta.ncols(),
            assets.len()
        )));
    }
    if theta.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(LinkError::InvalidArgument("variance shares must be finite and nonnegative".into()));
    }
    let mut shares = vec![vec![0.0; n]; n];
    for j in 0..n {
        let row_sum: f64 = theta.row(j).sum();
        if !(row_sum > 0.0) {
            return Err(LinkError::ZeroRow(j));
        }
        for k in 0..n {
            shares[j][k] = theta[(j, k)] / row_sum;
        }
    }
    let total_from: Vec<f64> = (0..n).map(|j| (0..n).filter(|&k| k != j).map(|k| shares[j][k]).sum()).collect();
    let total_to: Vec<f64> = (0..n).map(|k| (0..n).filter(|&j| j != k).map(|j| shares[j][k]).sum()).collect();
    let total = total_from.iter().sum::<f64>() / n as f64;
    Ok(ConnectednessTable { assets: assets.to_vec(), shares, total_from, total_to, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::SeriesKind;
    use crate::synthetic::{random_stable_var, simulate_var};
    use chrono::{Days, NaiveDate};
    use num::{BigRational, ToPrimitive, Zero};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn panel_from(values: DMatrix<f64>) -> SeriesPanel {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        let dates = (0..values.nrows()).map(|i| start + Days::new(i as u64)).collect();
        let assets = (0..values.ncols()).map(|i| format!("V{i}")).collect();
        SeriesPanel::new(assets, dates, values, SeriesKind::Returns).unwrap()
    }

    fn white_noise_model(sigma: DMatrix<f64>) -> VarModel {
        let n = sigma.nrows();
        VarModel::from_parts(DVector::zeros(n), vec![DMatrix::zeros(n, n)], sigma).unwrap()
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("V{i}")).collect()
    }

    #[test]
    fn recovers_scalar_ar1() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let truth = VarModel::from_parts(
            DVector::from_element(1, 0.0),
            vec![DMatrix::from_element(1, 1, 0.5)],
            DMatrix::identity(1, 1),
        )
        .unwrap();
        let y = simulate_var(&truth, 5000, 200, &mut rng).unwrap();
        let m = estimate_var(&panel_from(y), 1).unwrap();
        assert!((m.lag_coeffs[0][(0, 0)] - 0.5).abs() < 0.03);
        assert_eq!(m.t_eff, 4999);
        assert!(!m.jittered);
    }

    #[test]
    fn white_noise_has_no_dynamics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = simulate_var(&white_noise_model(DMatrix::identity(3, 3)), 5000, 0, &mut rng).unwrap();
        let m = estimate_var(&panel_from(y), 2).unwrap();
        for a in &m.lag_coeffs {
            assert!(a.amax() < 0.05);
        }
        assert!((m.resid_cov.clone() - DMatrix::identity(3, 3)).amax() < 0.1);
    }

    #[test]
    fn boundary_sample_size() {
        let (n, p) = (3, 2);
        let y = DMatrix::from_fn(n * p + 1, n, |r, c| ((r * 7 + c * 3) % 5) as f64);
        assert!(matches!(
            estimate_var(&panel_from(y), p),
            Err(LinkError::InsufficientObservations { .. })
        ));
    }

    #[test]
    fn collinear_regressors_are_jittered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut y = simulate_var(&white_noise_model(DMatrix::identity(2, 2)), 300, 0, &mut rng).unwrap();
        let copy = y.column(0).into_owned();
        y = y.insert_column(2, 0.0);
        y.set_column(2, &(copy * 2.0));
        let m = estimate_var(&panel_from(y), 1).unwrap();
        assert!(m.jittered);
        assert!(m.condition > CONDITION_THRESHOLD);
    }

    #[test]
    fn ma_examples() {
        let m = white_noise_model(DMatrix::identity(2, 2));
        assert_eq!(ma_coefficients(&m, 1).unwrap()[0], DMatrix::identity(2, 2));

        let ar = VarModel::from_parts(
            DVector::zeros(1),
            vec![DMatrix::from_element(1, 1, 0.5)],
            DMatrix::identity(1, 1),
        )
        .unwrap();
        for (h, psi) in ma_coefficients(&ar, 12).unwrap().iter().enumerate() {
            assert!((psi[(0, 0)] - 0.5f64.powi(h as i32)).abs() < 1e-15);
        }

        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.0, 0.3]);
        let var1 = VarModel::from_parts(DVector::zeros(2), vec![a], DMatrix::identity(2, 2)).unwrap();
        let psi = ma_coefficients(&var1, 3).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.25, 0.16, 0.0, 0.09]);
        assert!((&psi[2] - expected).amax() < 1e-15);
        assert!(ma_coefficients(&var1, 0).is_err());
    }

    #[test]
    fn ma_of_var2_matches_companion_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_stable_var(&mut rng, 3, 2);
        let psi = ma_coefficients(&m, 8).unwrap();
        let c = m.companion();
        let mut power = DMatrix::identity(6, 6);
        for p in &psi {
            assert!((p - power.view((0, 0), (3, 3))).amax() < 1e-12);
            power = &c * power;
        }
    }

    #[test]
    fn white_noise_identity_sigma() {
        let m = white_noise_model(DMatrix::identity(3, 3));
        for h in [1, 4, 10] {
            let theta = gfevd(&m, h).unwrap();
            assert!((theta - DMatrix::identity(3, 3)).amax() < 1e-15);
        }
    }

    #[test]
    fn equicorrelated_white_noise_closed_form() {
        for rho in [0.0, 0.3, 0.5, 0.9, 1.0] {
            let sigma = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
            let theta = gfevd(&white_noise_model(sigma), 1).unwrap();
            let table = connectedness_table(&theta, &names(2)).unwrap();
            let expected = rho * rho / (1.0 + rho * rho);
            assert!((table.shares[0][1] - expected).abs() < 1e-15);
            assert!((table.total - expected).abs() < 1e-15);
        }
    }

    /// Exact rational evaluation of the GFEVD sums for A=[[1/2,1/5],[0,3/10]], Sigma=I.
    fn exact_bivariate_gfevd(h: usize) -> [[f64; 2]; 2] {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        let a = [[r(1, 2), r(1, 5)], [r(0, 1), r(3, 10)]];
        let mut psi = [[r(1, 1), r(0, 1)], [r(0, 1), r(1, 1)]];
        let mut num = [[BigRational::zero(), BigRational::zero()], [BigRational::zero(), BigRational::zero()]];
        let mut den = [BigRational::zero(), BigRational::zero()];
        for _ in 0..h {
            for j in 0..2 {
                for k in 0..2 {
                    num[j][k] += &psi[j][k] * &psi[j][k];
                    den[j] += &psi[j][k] * &psi[j][k];
                }
            }
            let mut next = [[BigRational::zero(), BigRational::zero()], [BigRational::zero(), BigRational::zero()]];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        next[i][j] += &a[i][k] * &psi[k][j];
                    }
                }
            }
            psi = next;
        }
        let mut out = [[0.0; 2]; 2];
        for j in 0..2 {
            for k in 0..2 {
                out[j][k] = (&num[j][k] / &den[j]).to_f64().unwrap();
            }
        }
        out
    }

    #[test]
    fn bivariate_var1_matches_exact_rational_oracle() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.0, 0.3]);
        let m = VarModel::from_parts(DVector::zeros(2), vec![a], DMatrix::identity(2, 2)).unwrap();
        let theta = gfevd(&m, 10).unwrap();
        let exact = exact_bivariate_gfevd(10);
        for j in 0..2 {
            for k in 0..2 {
                assert!((theta[(j, k)] - exact[j][k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gfevd_rejects_degenerate_equation() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(gfevd(&white_noise_model(sigma), 3), Err(LinkError::ZeroResidualVariance(1))));
    }

    #[test]
    fn table_of_identity_is_disconnected() {
        let t = connectedness_table(&DMatrix::identity(4, 4), &names(4)).unwrap();
        assert_eq!(t.total, 0.0);
        assert!(t.total_from.iter().chain(&t.total_to).all(|v| *v == 0.0));
        let mut zero_row = DMatrix::identity(2, 2);
        zero_row[(1, 1)] = 0.0;
        assert!(matches!(connectedness_table(&zero_row, &names(2)), Err(LinkError::ZeroRow(1))));
    }

    #[test]
    fn table_csv_layout() {
        let theta = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 1.0]);
        let t = connectedness_table(&theta, &["BTC".into(), "ETH".into()]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            ",BTC,ETH,total_from\nBTC,0.75,0.25,0.25\nETH,0.50,0.50,0.50\ntotal_to,0.50,0.25,\ntotal_connectedness,0.38,,\n"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn rows_normalize_and_totals_agree(seed in 0u64..10_000, n in 2usize..6, p in 1usize..3, h in 1usize..15) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_stable_var(&mut rng, n, p);
            let t = connectedness_table(&gfevd(&m, h).unwrap(), &names(n)).unwrap();
            for row in &t.shares {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                prop_assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
            }
            let to: f64 = t.total_to.iter().sum::<f64>() / n as f64;
            prop_assert!((to - t.total).abs() < 1e-12);
            prop_assert!(t.total >= 0.0 && t.total <= (n as f64 - 1.0) / n as f64 + 1e-12);
        }

        #[test]
        fn relabeling_permutes_table(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_stable_var(&mut rng, 3, 2);
            let y = simulate_var(&m, 400, 50, &mut rng).unwrap();
            let panel = panel_from(y);
            let order = [2usize, 0, 1];
            let base = connectedness_table(&gfevd(&estimate_var(&panel, 2).unwrap(), 10).unwrap(), panel.assets()).unwrap();
            let perm_panel = panel.select_columns(&order);
            let perm = connectedness_table(&gfevd(&estimate_var(&perm_panel, 2).unwrap(), 10).unwrap(), perm_panel.assets()).unwrap();
            prop_assert!((base.total - perm.total).abs() < 1e-10);
            for (a, &i) in order.iter().enumerate() {
                for (b, &k) in order.iter().enumerate() {
                    prop_assert!((perm.shares[a][b] - base.shares[i][k]).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn rescaling_a_series_leaves_shares_unchanged(seed in 0u64..10_000, scale in 0.01f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_stable_var(&mut rng, 3, 1);
            let y = simulate_var(&m, 400, 50, &mut rng).unwrap();
            let mut scaled = y.clone();
            scaled.column_mut(1).scale_mut(scale);
            let a = connectedness_table(&gfevd(&estimate_var(&panel_from(y), 1).unwrap(), 10).unwrap(), &names(3)).unwrap();
            let b = connectedness_table(&gfevd(&estimate_var(&panel_from(scaled), 1).unwrap(), 10).unwrap(), &names(3)).unwrap();
            for j in 0..3 {
                for k in 0..3 {
                    prop_assert!((a.shares[j][k] - b.shares[j][k]).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn white_noise_is_horizon_free(seed in 0u64..10_000, n in 2usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sigma = random_stable_var(&mut rng, n, 1).resid_cov;
            let m = white_noise_model(sigma);
            let base = connectedness_table(&gfevd(&m, 1).unwrap(), &names(n)).unwrap();
            for h in [5, 10] {
                let t = connectedness_table(&gfevd(&m, h).unwrap(), &names(n)).unwrap();
                for j in 0..n {
                    for k in 0..n {
                        prop_assert!((t.shares[j][k] - base.shares[j][k]).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
