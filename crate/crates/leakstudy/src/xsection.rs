//! Cross-sectional regressions explaining per-event cumulative abnormal
//! returns, and the covariate correlation matrix.
//!
//! The design puts bond characteristics (log issue size, term, coupon,
//! option flag, bond count) and firm fundamentals (FTI, ROA, D/E,
//! signed-log free cash flow, Tobin's Q) on the right-hand side, with
//! time-of-day, day-of-week, year, and region fixed effects, one reference
//! category dropped per effect. Samples are split by sector. Coefficient
//! stars use conventional two-sided tests, unlike the one-sided event-study
//! p-values.

use crate::factor::{ols, OlsError, OlsOptions};
use crate::leak::TimingClass;
use crate::model::{Region, SectorClass, TimeOfDay};
use crate::study::two_sided_p;
use chrono::Weekday;
use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum XsError {
    #[error("no events left after sample filtering")]
    EmptySample,
    #[error("singular design; collinear columns: {0:?}")]
    SingularDesign(Vec<String>),
    #[error("issue size must be positive to take logs, got {0}")]
    NonPositiveIssueSize(f64),
    #[error(transparent)]
    Ols(#[from] OlsError),
    #[error("correlation needs at least 2 rows, got {0}")]
    TooFewRows(usize),
}

/// Session bucket of the leak timestamp, the time-of-day fixed effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeOfDayBucket {
    PreMarket,
    FirstHour,
    MidSession,
    LastHour,
    PostMarket,
}

impl TimeOfDayBucket {
    /// Bucket a classified timestamp. Non-trading-day leaks anchor to the
    /// next session's open and bucket as pre-market.
    pub fn from_time_of_day(tod: TimeOfDay, session_minutes: u32) -> Self {
        match tod {
            TimeOfDay::PreMarket | TimeOfDay::NonTradingDay => TimeOfDayBucket::PreMarket,
            TimeOfDay::PostMarket => TimeOfDayBucket::PostMarket,
            TimeOfDay::InSession { offset_minutes } => {
                if offset_minutes < 60 {
                    TimeOfDayBucket::FirstHour
                } else if offset_minutes + 60 >= session_minutes {
                    TimeOfDayBucket::LastHour
                } else {
                    TimeOfDayBucket::MidSession
                }
            }
        }
    }
}

impl std::fmt::Display for TimeOfDayBucket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TimeOfDayBucket::PreMarket => f.write_str("pre-market"),
            TimeOfDayBucket::FirstHour => f.write_str("first-hour"),
            TimeOfDayBucket::MidSession => f.write_str("mid-session"),
            TimeOfDayBucket::LastHour => f.write_str("last-hour"),
            TimeOfDayBucket::PostMarket => f.write_str("post-market"),
        }
    }
}

/// One event's regression inputs: the dependent CAR (percent) plus raw
/// covariates before transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRow {
    pub key: String,
    pub car_pct: f64,
    pub issue_size_usd_m: f64,
    pub term_years: f64,
    pub coupon_pct: f64,
    pub has_option: bool,
    pub bonds_in_issue: f64,
    pub fti: bool,
    pub roa: f64,
    pub de: f64,
    pub fcf_usd_m: f64,
    pub tobins_q: f64,
    pub mktcap_usd_m: f64,
    pub assets_usd_m: f64,
    pub sector: SectorClass,
    pub timing: TimingClass,
    pub time_of_day: TimeOfDayBucket,
    pub day_of_week: Weekday,
    pub year: i32,
    pub region: Region,
}

/// Which fixed-effect sets enter the design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FixedEffects {
    pub time_of_day: bool,
    pub day_of_week: bool,
    pub year: bool,
    pub region: bool,
}

impl FixedEffects {
    pub fn all() -> Self {
        FixedEffects {
            time_of_day: true,
            day_of_week: true,
            year: true,
            region: true,
        }
    }
}

/// Signed log transform, `sign(x)·ln(1+|x|)`: keeps negative free cash flow
/// observations in the sample, with 0 as a fixed point.
pub fn signed_log(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * (1.0 + x.abs()).ln()
    }
}

const COVARIATE_NAMES: [&str; 10] = [
    "issue_size", "term", "cpn", "option_in_issue", "bonds_in_issue", "fti", "roa", "de", "fcf",
    "tobins_q",
];

fn covariate_values(row: &EventRow) -> Result<Vec<f64>, XsError> {
    if !(row.issue_size_usd_m > 0.0) {
        return Err(XsError::NonPositiveIssueSize(row.issue_size_usd_m));
    }
    Ok(vec![
        row.issue_size_usd_m.ln(),
        row.term_years,
        row.coupon_pct,
        f64::from(row.has_option),
        row.bonds_in_issue,
        f64::from(row.fti),
        row.roa,
        row.de,
        signed_log(row.fcf_usd_m),
        row.tobins_q,
    ])
}

/// A fully encoded design matrix with named columns.
#[derive(Debug, Clone)]
pub struct RegressionDesign {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub names: Vec<String>,
}

/// Build the design for one sample split and fixed-effect selection.
///
/// Transforms are applied here; dummies are encoded with the first category
/// (in sort order) as the dropped reference.
pub fn build_design(
    rows: &[EventRow],
    sample: SectorClass,
    fe: FixedEffects,
) -> Result<RegressionDesign, XsError> {
    let sample_rows: Vec<&EventRow> = rows.iter().filter(|r| r.sector == sample).collect();
    if sample_rows.is_empty() {
        return Err(XsError::EmptySample);
    }

    let mut names: Vec<String> = vec!["const".to_owned()];
    names.extend(COVARIATE_NAMES.iter().map(|s| s.to_string()));

    // Dummy columns per enabled fixed effect, reference = first category.
    fn dummy_levels<T: Ord + Clone + std::fmt::Display>(
        values: impl Iterator<Item = T>,
    ) -> Vec<T> {
        let mut lv: Vec<T> = values.collect();
        lv.sort();
        lv.dedup();
        lv.into_iter().skip(1).collect() // drop the reference
    }

    let tod_levels: Vec<TimeOfDayBucket> = if fe.time_of_day {
        dummy_levels(sample_rows.iter().map(|r| r.time_of_day))
    } else {
        vec![]
    };
    let dow_levels: Vec<u32> = if fe.day_of_week {
        dummy_levels(sample_rows.iter().map(|r| r.day_of_week.number_from_monday()))
    } else {
        vec![]
    };
    let year_levels: Vec<i32> = if fe.year {
        dummy_levels(sample_rows.iter().map(|r| r.year))
    } else {
        vec![]
    };
    let region_levels: Vec<Region> = if fe.region {
        dummy_levels(sample_rows.iter().map(|r| r.region.clone()))
    } else {
        vec![]
    };

    for l in &tod_levels {
        names.push(format!("tod_{l}"));
    }
    for l in &dow_levels {
        names.push(format!("dow_{l}"));
    }
    for l in &year_levels {
        names.push(format!("year_{l}"));
    }
    for l in &region_levels {
        names.push(format!("region_{l}"));
    }

    let n = sample_rows.len();
    let p = names.len();
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    for (i, row) in sample_rows.iter().enumerate() {
        y[i] = row.car_pct;
        x[(i, 0)] = 1.0;
        for (j, v) in covariate_values(row)?.into_iter().enumerate() {
            x[(i, 1 + j)] = v;
        }
        let mut col = 1 + COVARIATE_NAMES.len();
        for l in &tod_levels {
            x[(i, col)] = f64::from(row.time_of_day == *l);
            col += 1;
        }
        for l in &dow_levels {
            x[(i, col)] = f64::from(row.day_of_week.number_from_monday() == *l);
            col += 1;
        }
        for l in &year_levels {
            x[(i, col)] = f64::from(row.year == *l);
            col += 1;
        }
        for l in &region_levels {
            x[(i, col)] = f64::from(row.region == *l);
            col += 1;
        }
    }
    Ok(RegressionDesign { y, x, names })
}

/// One coefficient of a fitted cross-sectional regression.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow {
    pub name: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub t_stat: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// Significance at the 10/5/1% levels: "", "*", "**", "***".
    pub stars: &'static str,
}

#[derive(Debug, Clone)]
pub struct RegressionOutput {
    pub coefficients: Vec<CoefficientRow>,
    pub r2: f64,
    pub f_stat: Option<f64>,
    pub f_p_value: Option<f64>,
    pub n_obs: usize,
}

pub fn stars_for(p: f64) -> &'static str {
    if p <= 0.01 {
        "***"
    } else if p <= 0.05 {
        "**"
    } else if p <= 0.10 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RegressOptions {
    /// Heteroskedasticity-robust (HC1) standard errors instead of classical.
    pub robust: bool,
}

/// Fit a built design by OLS with classical standard errors (robust as an
/// option), two-sided coefficient tests, and the model F for joint slopes.
pub fn regress(design: &RegressionDesign, opts: RegressOptions) -> Result<RegressionOutput, XsError> {
    let fit = ols(
        &design.y,
        &design.x,
        &OlsOptions {
            intercept: true,
            ..Default::default()
        },
    )
    .map_err(|e| match e {
        OlsError::SingularDesign { columns, .. } => XsError::SingularDesign(
            columns.iter().map(|&j| design.names[j].clone()).collect(),
        ),
        other => XsError::Ols(other),
    })?;

    let std_errors: Vec<f64> = if opts.robust {
        hc1_std_errors(&design.x, &fit.residuals, fit.df_resid)
    } else {
        fit.std_errors.clone()
    };

    let df = fit.df_resid as f64;
    let coefficients = design
        .names
        .iter()
        .zip(fit.coefficients.iter().zip(&std_errors))
        .map(|(name, (&coef, &se))| {
            let t = if se > 0.0 { coef / se } else { 0.0 };
            let p = two_sided_p(t, df);
            CoefficientRow {
                name: name.clone(),
                coefficient: coef,
                std_error: se,
                t_stat: t,
                p_value: p,
                stars: stars_for(p),
            }
        })
        .collect();

    let k = design.names.len() - 1;
    let f_p_value = fit.f_stat.filter(|f| f.is_finite()).and_then(|f| {
        FisherSnedecor::new(k as f64, df)
            .ok()
            .map(|dist| 1.0 - dist.cdf(f))
    });

    Ok(RegressionOutput {
        coefficients,
        r2: fit.r2,
        f_stat: fit.f_stat,
        f_p_value,
        n_obs: fit.n_obs,
    })
}

/// HC1 sandwich standard errors: `(n/(n-p)) (X'X)^-1 X' diag(e^2) X (X'X)^-1`.
fn hc1_std_errors(x: &DMatrix<f64>, residuals: &DVector<f64>, df_resid: usize) -> Vec<f64> {
    let n = x.nrows();
    let xtx_inv = (x.transpose() * x)
        .try_inverse()
        .expect("design passed the condition guard");
    let mut meat = DMatrix::zeros(x.ncols(), x.ncols());
    for i in 0..n {
        let xi = x.row(i).transpose();
        meat += &xi * xi.transpose() * (residuals[i] * residuals[i]);
    }
    let cov = &xtx_inv * meat * &xtx_inv * (n as f64 / df_resid as f64);
    (0..x.ncols()).map(|j| cov[(j, j)].sqrt()).collect()
}

/// Pearson correlation matrix over named covariate columns.
///
/// Constant columns have no defined correlation; their entries are `None`
/// (flagged) rather than poisoning the matrix.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

pub fn correlations(names: &[String], columns: &[Vec<f64>]) -> Result<CorrelationMatrix, XsError> {
    let n_rows = columns.first().map(|c| c.len()).unwrap_or(0);
    if n_rows < 2 {
        return Err(XsError::TooFewRows(n_rows));
    }
    let k = columns.len();
    let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / n_rows as f64).collect();
    let sds: Vec<f64> = columns
        .iter()
        .zip(&means)
        .map(|(c, m)| (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n_rows - 1) as f64).sqrt())
        .collect();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let cell = if i == j {
                // unit diagonal even for constant columns
                Some(1.0)
            } else if sds[i] == 0.0 || sds[j] == 0.0 {
                None
            } else {
                let cov = columns[i]
                    .iter()
                    .zip(&columns[j])
                    .map(|(a, b)| (a - means[i]) * (b - means[j]))
                    .sum::<f64>()
                    / (n_rows - 1) as f64;
                Some((cov / (sds[i] * sds[j])).clamp(-1.0, 1.0))
            };
            values[i][j] = cell;
            values[j][i] = cell;
        }
    }
    Ok(CorrelationMatrix {
        names: names.to_vec(),
        values,
    })
}

/// The Appendix-style covariate matrix (12 transformed columns, including
/// log market cap and log assets) for the correlation table.
pub fn covariate_columns(rows: &[EventRow]) -> (Vec<String>, Vec<Vec<f64>>) {
    let names: Vec<String> = [
        "issue_size", "term", "cpn", "option_in_issue", "bonds_in_issue", "fti", "mktcap",
        "assets", "roa", "de", "fcf", "tobins_q",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(rows.len()); names.len()];
    for r in rows {
        cols[0].push(r.issue_size_usd_m.ln());
        cols[1].push(r.term_years);
        cols[2].push(r.coupon_pct);
        cols[3].push(f64::from(r.has_option));
        cols[4].push(r.bonds_in_issue);
        cols[5].push(f64::from(r.fti));
        cols[6].push(r.mktcap_usd_m.ln());
        cols[7].push(r.assets_usd_m.ln());
        cols[8].push(r.roa);
        cols[9].push(r.de);
        cols[10].push(signed_log(r.fcf_usd_m));
        cols[11].push(r.tobins_q);
    }
    (names, cols)
}
