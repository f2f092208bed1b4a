//! Domain types shared by the whole engine: securities, bars, factor rows,
//! return arithmetic, and exchange calendars.
//!
//! Everything here is an immutable value after construction; instances can be
//! shared or sent across worker threads freely.

mod calendar;

pub use calendar::{CalendarError, ExchangeCalendar, TimeOfDay, BAR_MINUTES};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Listing ticker symbol.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ticker(pub String);

impl Ticker {
    pub fn new(s: impl Into<String>) -> Self {
        Ticker(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for Ticker {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Ticker {
    fn from(s: &str) -> Self {
        Ticker(s.to_owned())
    }
}

/// ISO currency code, e.g. `USD`, `EUR`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Currency(pub String);

impl Currency {
    pub fn new(s: impl Into<String>) -> Self {
        Currency(s.into())
    }

    pub fn usd() -> Self {
        Currency("USD".to_owned())
    }

    pub fn is_usd(&self) -> bool {
        self.0 == "USD"
    }
}

impl std::fmt::Display for Currency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Region label used for factor-set selection and regression fixed effects.
///
/// Regions are enumerated by the data (the factor-file map in the run
/// configuration), not hardcoded.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Region(pub String);

impl Region {
    pub fn new(s: impl Into<String>) -> Self {
        Region(s.into())
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Financial vs. non-financial issuer, used for sample splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SectorClass {
    Financial,
    NonFinancial,
}

impl SectorClass {
    /// Classify an industry tag. Financial covers banks, government agencies,
    /// real estate, wider financial services, and consumer/commercial finance;
    /// everything else is non-financial.
    pub fn from_industry(tag: &str) -> Self {
        let t = tag.trim().to_lowercase();
        const FINANCIAL_TAGS: [&str; 9] = [
            "bank",
            "banks",
            "banking",
            "government agency",
            "government agencies",
            "real estate",
            "financial services",
            "consumer finance",
            "commercial finance",
        ];
        if FINANCIAL_TAGS.contains(&t.as_str()) {
            SectorClass::Financial
        } else {
            SectorClass::NonFinancial
        }
    }
}

impl std::fmt::Display for SectorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SectorClass::Financial => f.write_str("financial"),
            SectorClass::NonFinancial => f.write_str("non-financial"),
        }
    }
}

/// A listed firm and where it trades.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Security {
    pub ticker: Ticker,
    pub exchange_id: String,
    pub region: Region,
    pub sector_class: SectorClass,
    pub currency: Currency,
    /// Ticker of the market index series used for market-adjusted returns.
    pub market_ticker: Ticker,
}

/// One daily price/volume observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyBar {
    pub date: NaiveDate,
    pub close: f64,
    pub volume: u64,
    pub shares_outstanding: u64,
}

impl DailyBar {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.close > 0.0) || !self.close.is_finite() {
            return Err(ModelError::NonPositivePrice(self.close));
        }
        if self.shares_outstanding == 0 {
            return Err(ModelError::NonPositiveShares);
        }
        Ok(())
    }
}

/// One 5-minute price/volume bar. `ts` is the bar start, aligned to the
/// 5-minute grid anchored at session open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntradayBar {
    pub ts: DateTime<Utc>,
    pub price: f64,
    pub volume: u64,
}

impl IntradayBar {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.price > 0.0) || !self.price.is_finite() {
            return Err(ModelError::NonPositivePrice(self.price));
        }
        Ok(())
    }
}

/// A security return aligned with its market return, risk-free rate, and any
/// factor values available for the same period. Simple (not log) returns,
/// decimals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReturnObservation {
    /// Security return over the period.
    pub r_i: f64,
    /// Return on the market the security is listed on, same period.
    pub r_m: f64,
    /// Risk-free rate, same periodicity.
    pub rf: f64,
    pub smb: Option<f64>,
    pub hml: Option<f64>,
    pub mom: Option<f64>,
}

impl ReturnObservation {
    /// Market-adjusted observation: no factor data attached.
    pub fn market_adjusted(r_i: f64, r_m: f64) -> Self {
        ReturnObservation {
            r_i,
            r_m,
            rf: 0.0,
            ..Default::default()
        }
    }

    /// Market excess return over the risk-free rate.
    pub fn mkt_rf(&self) -> f64 {
        self.r_m - self.rf
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.r_i <= -1.0 || !self.r_i.is_finite() {
            return Err(ModelError::ImpossibleReturn(self.r_i));
        }
        if self.r_m <= -1.0 || !self.r_m.is_finite() {
            return Err(ModelError::ImpossibleReturn(self.r_m));
        }
        Ok(())
    }
}

/// One row of a daily factor file. `mom` is absent in three-factor-only
/// factor sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorRow {
    pub date: NaiveDate,
    pub mkt_rf: f64,
    pub smb: f64,
    pub hml: f64,
    pub mom: Option<f64>,
    pub rf: f64,
}

impl FactorRow {
    pub fn validate(&self) -> Result<(), ModelError> {
        let vals = [
            self.mkt_rf,
            self.smb,
            self.hml,
            self.rf,
            self.mom.unwrap_or(0.0),
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteFactor(self.date));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("price must be positive, got {0}")]
    NonPositivePrice(f64),
    #[error("shares outstanding must be positive")]
    NonPositiveShares,
    #[error("simple return must exceed -1, got {0}")]
    ImpossibleReturn(f64),
    #[error("non-finite factor value on {0}")]
    NonFiniteFactor(NaiveDate),
}

/// Simple return `p_curr / p_prev - 1`.
///
/// Both prices must be strictly positive.
pub fn simple_return(p_prev: f64, p_curr: f64) -> Result<f64, ModelError> {
    if !(p_prev > 0.0) || !p_prev.is_finite() {
        return Err(ModelError::NonPositivePrice(p_prev));
    }
    if !(p_curr > 0.0) || !p_curr.is_finite() {
        return Err(ModelError::NonPositivePrice(p_curr));
    }
    Ok(p_curr / p_prev - 1.0)
}
