//! Expected-return models and abnormal returns.
//!
//! Four models are supported. The market-adjusted model needs no estimation:
//! the expected return is the market return itself. CAPM, the three-factor
//! model, and the four-factor model are estimated by regressing excess
//! returns on the factor set over a pre-event estimation window, and predict
//! `rf + Σ β·factor` in the event window. The equations carry no intercept;
//! estimating and applying one is available as a configuration switch.

mod ols;

pub use ols::{ols, OlsError, OlsFit, OlsOptions, DEFAULT_CONDITION_LIMIT};

use crate::model::ReturnObservation;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Expected-return model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[serde(rename = "madj")]
    MarketAdjusted,
    Capm,
    #[serde(rename = "ff3")]
    FamaFrench3,
    Carhart4,
}

impl ModelKind {
    /// Number of factor loadings the model estimates.
    pub fn n_factors(&self) -> usize {
        match self {
            ModelKind::MarketAdjusted => 0,
            ModelKind::Capm => 1,
            ModelKind::FamaFrench3 => 3,
            ModelKind::Carhart4 => 4,
        }
    }

    pub fn needs_estimation(&self) -> bool {
        !matches!(self, ModelKind::MarketAdjusted)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::MarketAdjusted => f.write_str("market-adjusted"),
            ModelKind::Capm => f.write_str("capm"),
            ModelKind::FamaFrench3 => f.write_str("ff3"),
            ModelKind::Carhart4 => f.write_str("carhart"),
        }
    }
}

/// What the event anchor is: the leak or the public announcement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorRole {
    Leak,
    Announcement,
}

impl AnchorRole {
    /// Estimation window in trading days relative to the anchor:
    /// `[-300, -1]` for leaks, `[-310, -11]` for announcements.
    pub fn default_estimation_window(&self) -> (i32, i32) {
        match self {
            AnchorRole::Leak => (-300, -1),
            AnchorRole::Announcement => (-310, -11),
        }
    }
}

impl std::fmt::Display for AnchorRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnchorRole::Leak => f.write_str("leak"),
            AnchorRole::Announcement => f.write_str("announce"),
        }
    }
}

/// Fallback minimum number of aligned observations in the estimation window.
pub const DEFAULT_MIN_OBS: usize = 100;

/// An expected-return model plus its estimation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Estimation window in trading days relative to the event anchor;
    /// `None` for the market-adjusted model, which estimates nothing.
    pub estimation_window: Option<(i32, i32)>,
    pub min_obs: usize,
    /// Estimate an intercept and include it in predictions.
    pub include_intercept: bool,
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("only {have} aligned observations in the estimation window, need {need}")]
    ThinHistory { have: usize, need: usize },
    #[error("factor set lacks {0} values required by the model")]
    FactorGap(&'static str),
    #[error("estimation window shorter than min_obs: {len} days < {min_obs}")]
    WindowTooShort { len: usize, min_obs: usize },
    #[error(transparent)]
    Singular(#[from] OlsError),
}

impl ModelSpec {
    pub fn market_adjusted() -> Self {
        ModelSpec {
            kind: ModelKind::MarketAdjusted,
            estimation_window: None,
            min_obs: 0,
            include_intercept: false,
        }
    }

    /// A model with the default estimation window for the anchor role.
    pub fn for_anchor(kind: ModelKind, anchor: AnchorRole) -> Self {
        if kind.needs_estimation() {
            ModelSpec {
                kind,
                estimation_window: Some(anchor.default_estimation_window()),
                min_obs: DEFAULT_MIN_OBS,
                include_intercept: false,
            }
        } else {
            ModelSpec::market_adjusted()
        }
    }

    pub fn validate(&self) -> Result<(), FitError> {
        if let Some((a, b)) = self.estimation_window {
            let len = (b - a + 1).max(0) as usize;
            if len < self.min_obs {
                return Err(FitError::WindowTooShort {
                    len,
                    min_obs: self.min_obs,
                });
            }
        }
        Ok(())
    }
}

/// Estimated factor loadings for one security under one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFit {
    pub kind: ModelKind,
    /// Loadings in factor order: market, then SMB, HML, MOM as applicable.
    /// The market-adjusted model is the fixed unit loading on the market.
    pub betas: Vec<f64>,
    pub intercept: Option<f64>,
    pub residual_std: Option<f64>,
    pub n_obs: usize,
    pub r2: Option<f64>,
}

impl ModelFit {
    /// The market-adjusted "fit": β ≡ 1 on the market, nothing estimated.
    pub fn market_adjusted() -> Self {
        ModelFit {
            kind: ModelKind::MarketAdjusted,
            betas: vec![1.0],
            intercept: None,
            residual_std: None,
            n_obs: 0,
            r2: None,
        }
    }
}

/// Factor values of one observation, in model order.
fn factor_values(kind: ModelKind, obs: &ReturnObservation) -> Result<Vec<f64>, FitError> {
    let mut out = vec![obs.mkt_rf()];
    if matches!(kind, ModelKind::FamaFrench3 | ModelKind::Carhart4) {
        out.push(obs.smb.ok_or(FitError::FactorGap("smb"))?);
        out.push(obs.hml.ok_or(FitError::FactorGap("hml"))?);
    }
    if matches!(kind, ModelKind::Carhart4) {
        out.push(obs.mom.ok_or(FitError::FactorGap("mom"))?);
    }
    Ok(out)
}

/// Fit a model over the aligned observations of its estimation window.
///
/// `window_obs` must already be restricted to the estimation window relative
/// to the event anchor (the event day itself never enters estimation).
/// Observations missing a required factor are dropped; if the whole window
/// lacks a required factor the factor set is at fault and a factor-gap error
/// is raised. Factor columns that are identically zero across the window
/// carry no information and receive a zero loading rather than poisoning the
/// design.
pub fn fit_model(spec: &ModelSpec, window_obs: &[ReturnObservation]) -> Result<ModelFit, FitError> {
    spec.validate()?;
    if !spec.kind.needs_estimation() {
        return Ok(ModelFit::market_adjusted());
    }
    if matches!(spec.kind, ModelKind::Carhart4) && window_obs.iter().all(|o| o.mom.is_none()) {
        return Err(FitError::FactorGap("mom"));
    }

    let mut rows: Vec<(f64, Vec<f64>)> = Vec::with_capacity(window_obs.len());
    for obs in window_obs {
        if let Ok(factors) = factor_values(spec.kind, obs) {
            rows.push((obs.r_i - obs.rf, factors));
        }
    }
    if rows.len() < spec.min_obs.max(2) {
        return Err(FitError::ThinHistory {
            have: rows.len(),
            need: spec.min_obs.max(2),
        });
    }

    let n_factors = spec.kind.n_factors();
    let live: Vec<usize> = (0..n_factors)
        .filter(|&j| rows.iter().any(|(_, f)| f[j] != 0.0))
        .collect();

    let n = rows.len();
    let p = live.len() + usize::from(spec.include_intercept);
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    for (i, (yi, factors)) in rows.iter().enumerate() {
        y[i] = *yi;
        let mut col = 0;
        if spec.include_intercept {
            x[(i, 0)] = 1.0;
            col = 1;
        }
        for &j in &live {
            x[(i, col)] = factors[j];
            col += 1;
        }
    }

    let fit = ols(
        &y,
        &x,
        &OlsOptions {
            intercept: spec.include_intercept,
            condition_limit: DEFAULT_CONDITION_LIMIT,
        },
    )?;

    let mut betas = vec![0.0; n_factors];
    let offset = usize::from(spec.include_intercept);
    for (slot, &j) in live.iter().enumerate() {
        betas[j] = fit.coefficients[offset + slot];
    }
    Ok(ModelFit {
        kind: spec.kind,
        betas,
        intercept: spec.include_intercept.then(|| fit.coefficients[0]),
        residual_std: Some(fit.residual_std),
        n_obs: n,
        r2: Some(fit.r2),
    })
}

/// Abnormal return of one observation under a fitted model: realized return
/// minus the model's expected return for the same period.
pub fn abnormal_return(fit: &ModelFit, obs: &ReturnObservation) -> Result<f64, FitError> {
    if !fit.kind.needs_estimation() {
        return Ok(obs.r_i - obs.r_m);
    }
    let factors = factor_values(fit.kind, obs)?;
    let mut expected = obs.rf + fit.intercept.unwrap_or(0.0);
    for (beta, factor) in fit.betas.iter().zip(&factors) {
        expected += beta * factor;
    }
    Ok(obs.r_i - expected)
}
