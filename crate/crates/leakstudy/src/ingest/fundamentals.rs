//! Firm fundamentals preparation: three-year averaging with the first-45-days
//! trailing-twelve-month fallback, and the Macaulay duration proxy for
//! perpetual bonds.

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

/// Announcements inside the first 45 calendar days of a year predate the
/// latest annual filing, so trailing figures are used instead of averages.
const EARLY_YEAR_CUTOFF_ORDINAL: u32 = 45;

#[derive(Debug, Error, PartialEq)]
pub enum FundamentalsError {
    #[error("{ticker_years} fiscal years available before {announcement}, need {needed}")]
    InsufficientHistory {
        ticker_years: usize,
        needed: usize,
        announcement: NaiveDate,
    },
    #[error("yield must be positive for a perpetual, got {0}")]
    BadYield(f64),
}

/// One fiscal-year filing, monetary fields in the firm's listing currency
/// (millions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalsRow {
    pub fiscal_year: i32,
    pub mktcap: f64,
    pub assets: f64,
    pub roa: f64,
    pub de: f64,
    pub fcf: f64,
    pub first_time_issuer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FundamentalsBasis {
    ThreeYearAverage,
    Trailing12M,
}

/// Prepared firm fundamentals for one announcement. Monetary fields stay in
/// the filing currency until [`FirmFundamentals::to_usd`] applies the FX rate
/// in force at the leak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirmFundamentals {
    pub fti: bool,
    pub mktcap: f64,
    pub assets: f64,
    pub fcf: f64,
    pub roa: f64,
    pub de: f64,
    pub tobins_q: f64,
    pub basis: FundamentalsBasis,
}

impl FirmFundamentals {
    /// Rebase the monetary fields with a USD rate. Ratios are unaffected.
    pub fn to_usd(mut self, rate: f64) -> Self {
        self.mktcap *= rate;
        self.assets *= rate;
        self.fcf *= rate;
        self
    }
}

/// Macaulay duration of a perpetual bond, `(1 + yield) / yield`, in years.
/// Stands in for the infinite maturity when aggregating bond terms.
pub fn macaulay_perpetual(yield_rate: f64) -> Result<f64, FundamentalsError> {
    if !(yield_rate > 0.0) || !yield_rate.is_finite() {
        return Err(FundamentalsError::BadYield(yield_rate));
    }
    Ok((1.0 + yield_rate) / yield_rate)
}

/// Prepare fundamentals for an announcement date.
///
/// Normally the three fiscal years immediately preceding the announcement
/// year are averaged. When the announcement falls in the first 45 calendar
/// days of the year the latest annual filing is not yet public, so the most
/// recent available filing is used alone (trailing-12-month basis). Firms
/// with insufficient history are rejected so they can be excluded upstream.
pub fn prepare_fundamentals(
    rows: &[FundamentalsRow],
    announcement: NaiveDate,
) -> Result<FirmFundamentals, FundamentalsError> {
    let year = announcement.year();
    let trailing = announcement.ordinal() <= EARLY_YEAR_CUTOFF_ORDINAL;
    let mut available: Vec<&FundamentalsRow> =
        rows.iter().filter(|r| r.fiscal_year < year).collect();
    available.sort_by_key(|r| r.fiscal_year);

    if trailing {
        let latest = available.last().ok_or(FundamentalsError::InsufficientHistory {
            ticker_years: 0,
            needed: 1,
            announcement,
        })?;
        return Ok(FirmFundamentals {
            fti: latest.first_time_issuer,
            mktcap: latest.mktcap,
            assets: latest.assets,
            fcf: latest.fcf,
            roa: latest.roa,
            de: latest.de,
            tobins_q: latest.mktcap / latest.assets,
            basis: FundamentalsBasis::Trailing12M,
        });
    }

    // Exactly the three preceding fiscal years; a gap means the firm lacks a
    // clean three-year record and is excluded.
    let wanted = [year - 3, year - 2, year - 1];
    let picked: Vec<&&FundamentalsRow> = available
        .iter()
        .filter(|r| wanted.contains(&r.fiscal_year))
        .collect();
    if picked.len() < 3 {
        return Err(FundamentalsError::InsufficientHistory {
            ticker_years: picked.len(),
            needed: 3,
            announcement,
        });
    }
    let mean = |f: fn(&FundamentalsRow) -> f64| picked.iter().map(|r| f(r)).sum::<f64>() / 3.0;
    let mktcap = mean(|r| r.mktcap);
    let assets = mean(|r| r.assets);
    Ok(FirmFundamentals {
        fti: picked.last().unwrap().first_time_issuer,
        mktcap,
        assets,
        fcf: mean(|r| r.fcf),
        roa: mean(|r| r.roa),
        de: mean(|r| r.de),
        tobins_q: mktcap / assets,
        basis: FundamentalsBasis::ThreeYearAverage,
    })
}
