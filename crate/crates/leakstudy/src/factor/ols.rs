//! Ordinary least squares via singular value decomposition, with a
//! condition-number guard and classical inference.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Designs with a condition number above this are rejected as singular.
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e10;

#[derive(Debug, Error)]
pub enum OlsError {
    #[error("need more rows than columns: {rows} rows, {cols} columns")]
    Underdetermined { rows: usize, cols: usize },
    #[error("singular design (condition {condition:.3e}); near-collinear columns: {columns:?}")]
    SingularDesign { condition: f64, columns: Vec<usize> },
    #[error("dimension mismatch: y has {y_len} rows, X has {x_rows}")]
    DimensionMismatch { y_len: usize, x_rows: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct OlsOptions {
    /// Column 0 of the design is an all-ones intercept.
    pub intercept: bool,
    pub condition_limit: f64,
}

impl Default for OlsOptions {
    fn default() -> Self {
        OlsOptions {
            intercept: false,
            condition_limit: DEFAULT_CONDITION_LIMIT,
        }
    }
}

/// A least-squares solution with classical (homoskedastic) inference.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    /// Residual standard deviation, `sqrt(SSR / (n - p))`.
    pub residual_std: f64,
    /// Centered R² when an intercept is present, uncentered otherwise.
    /// Zero by convention when the response has no variance to explain.
    pub r2: f64,
    /// F statistic for the joint significance of the slope coefficients;
    /// `None` when there are no slopes.
    pub f_stat: Option<f64>,
    pub n_obs: usize,
    pub df_resid: usize,
    pub condition: f64,
    pub residuals: DVector<f64>,
}

/// Solve `min ||y - X b||²`.
///
/// Uses an orthogonal decomposition (SVD) rather than the normal equations;
/// the normal-equations route is reserved for test oracles. A design whose
/// condition number exceeds the limit is rejected, naming the columns that
/// participate in the near-null space.
pub fn ols(y: &DVector<f64>, x: &DMatrix<f64>, opts: &OlsOptions) -> Result<OlsFit, OlsError> {
    let n = x.nrows();
    let p = x.ncols();
    if y.len() != n {
        return Err(OlsError::DimensionMismatch {
            y_len: y.len(),
            x_rows: n,
        });
    }
    if n <= p {
        return Err(OlsError::Underdetermined { rows: n, cols: p });
    }

    let svd = x.clone().svd(true, true);
    let s = &svd.singular_values;
    let s_max = s.iter().cloned().fold(0.0_f64, f64::max);
    let s_min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if !condition.is_finite() || condition > opts.condition_limit {
        let v_t = svd.v_t.as_ref().expect("v_t requested");
        // The right singular vector of the smallest singular value spans the
        // near-null space; its big entries name the collinear columns.
        let min_idx = (0..s.len())
            .min_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap())
            .unwrap();
        let null_vec = v_t.row(min_idx);
        let peak = null_vec.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
        let columns = (0..p)
            .filter(|&j| null_vec[j].abs() > 0.25 * peak)
            .collect();
        return Err(OlsError::SingularDesign { condition, columns });
    }

    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    // b = V S^-1 U^T y
    let mut uty = u.transpose() * y;
    for i in 0..s.len() {
        uty[i] /= s[i];
    }
    let beta = v_t.transpose() * uty;

    let fitted = x * &beta;
    let residuals = y - fitted;
    let ssr = residuals.norm_squared();
    let df_resid = n - p;
    let sigma2 = ssr / df_resid as f64;
    let residual_std = sigma2.sqrt();

    // cov(b) = sigma^2 V S^-2 V^T; only the diagonal is needed here.
    let mut std_errors = Vec::with_capacity(p);
    for j in 0..p {
        let mut acc = 0.0;
        for i in 0..s.len() {
            let vji = v_t[(i, j)];
            acc += vji * vji / (s[i] * s[i]);
        }
        std_errors.push((sigma2 * acc).sqrt());
    }
    let coefficients: Vec<f64> = beta.iter().cloned().collect();
    let t_stats = coefficients
        .iter()
        .zip(&std_errors)
        .map(|(c, se)| if *se > 0.0 { c / se } else { 0.0 })
        .collect();

    let sst = if opts.intercept {
        let ybar = y.mean();
        y.iter().map(|v| (v - ybar).powi(2)).sum::<f64>()
    } else {
        y.norm_squared()
    };
    let r2 = if sst > 0.0 { 1.0 - ssr / sst } else { 0.0 };

    let n_slopes = p - usize::from(opts.intercept);
    let f_stat = if n_slopes == 0 {
        None
    } else if ssr > 0.0 {
        Some(((sst - ssr) / n_slopes as f64) / (ssr / df_resid as f64))
    } else {
        Some(f64::INFINITY)
    };

    Ok(OlsFit {
        coefficients,
        std_errors,
        t_stats,
        residual_std,
        r2,
        f_stat,
        n_obs: n,
        df_resid,
        condition,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::CounterRng;

    fn design(rows: usize, cols: usize, rng: &mut CounterRng) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.next_normal())
    }

    #[test]
    fn exact_fit_recovers_coefficients() {
        let mut rng = CounterRng::new(11, 0);
        let x = design(40, 3, &mut rng);
        let b = DVector::from_vec(vec![2.0, -1.5, 0.25]);
        let y = &x * &b;
        let fit = ols(&y, &x, &OlsOptions::default()).unwrap();
        for (est, truth) in fit.coefficients.iter().zip(b.iter()) {
            assert!((est - truth).abs() < 1e-10, "{est} vs {truth}");
        }
        assert!(fit.residual_std < 1e-10);
    }

    #[test]
    fn constant_response_intercept_only() {
        let y = DVector::from_element(20, 3.5);
        let x = DMatrix::from_element(20, 1, 1.0);
        let fit = ols(
            &y,
            &x,
            &OlsOptions {
                intercept: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((fit.coefficients[0] - 3.5).abs() < 1e-12);
        assert_eq!(fit.r2, 0.0); // nothing to explain
        assert!(fit.f_stat.is_none()); // no slopes
    }

    #[test]
    fn matches_normal_equations_oracle() {
        // independent oracle: b = (X'X)^-1 X'y
        let mut rng = CounterRng::new(99, 1);
        let x = design(50, 3, &mut rng);
        let b_true = DVector::from_vec(vec![0.7, -0.3, 1.1]);
        let noise = DVector::from_fn(50, |_, _| 0.01 * rng.next_normal());
        let y = &x * &b_true + noise;
        let fit = ols(&y, &x, &OlsOptions::default()).unwrap();

        let xtx = x.transpose() * &x;
        let xty = x.transpose() * &y;
        let oracle = xtx.try_inverse().unwrap() * xty;
        for (est, ora) in fit.coefficients.iter().zip(oracle.iter()) {
            assert!(
                (est - ora).abs() <= 1e-8 * ora.abs().max(1.0),
                "{est} vs {ora}"
            );
        }
    }

    #[test]
    fn duplicated_column_is_singular() {
        let mut rng = CounterRng::new(3, 0);
        let base = design(30, 2, &mut rng);
        let mut x = DMatrix::zeros(30, 3);
        x.set_column(0, &base.column(0));
        x.set_column(1, &base.column(1));
        x.set_column(2, &base.column(0)); // exact copy of column 0
        let y = DVector::from_fn(30, |_, _| rng.next_normal());
        let err = ols(&y, &x, &OlsOptions::default()).unwrap_err();
        match err {
            OlsError::SingularDesign { columns, .. } => {
                assert!(columns.contains(&0) && columns.contains(&2), "{columns:?}");
            }
            other => panic!("expected singular design, got {other}"),
        }
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let mut rng = CounterRng::new(17, 0);
        let x = design(80, 4, &mut rng);
        let y = DVector::from_fn(80, |_, _| rng.next_normal());
        let fit = ols(&y, &x, &OlsOptions::default()).unwrap();
        for j in 0..4 {
            let col = x.column(j);
            let dot: f64 = col.dot(&fit.residuals);
            let bound = 1e-8 * col.norm() * fit.residuals.norm().max(1.0);
            assert!(dot.abs() <= bound, "col {j}: {dot}");
        }
    }

    #[test]
    fn underdetermined_is_rejected() {
        let x = DMatrix::from_element(3, 5, 1.0);
        let y = DVector::from_element(3, 1.0);
        assert!(matches!(
            ols(&y, &x, &OlsOptions::default()),
            Err(OlsError::Underdetermined { .. })
        ));
    }
}
