//! Input loading and validation.
//!
//! All inputs are UTF-8 CSV with a header row, comma separators, `.` decimal
//! points, ISO-8601 dates, and RFC 3339 instants with a zone offset. Ingest
//! is the single validation gate: every record handed to the rest of the
//! engine satisfies its type invariants, and the first failure is reported
//! with its file and row.
//!
//! Schemas:
//!
//! | file | columns |
//! |------|---------|
//! | `securities.csv` | `ticker,exchange_id,region,currency,industry,market_ticker` |
//! | `prices_daily.csv` | `ticker,date,close,volume,shares_outstanding` |
//! | `prices_intraday.csv` | `ticker,timestamp,price,volume` |
//! | `factors_<region>.csv` | `date,mkt_rf,smb,hml,mom,rf` (`mom` optional) |
//! | `headlines.csv` | `feed,timestamp,headline,article_chars,tickers,green_label` |
//! | `announcements.csv` | `ticker,announce_date,currency,amount,maturity_date,perpetual,coupon_pct,has_option,yield` |
//! | `fundamentals.csv` | `ticker,fiscal_year,mktcap,assets,roa,de,fcf,first_time_issuer` |
//! | `fx.csv` | `pair,timestamp,rate` (pairs quoted in USD, e.g. `EURUSD`) |
//! | `calendar.csv` | `exchange_id,timezone,open,close,holiday_dates` plus optional `weekend_days,coverage_start,coverage_end` |
//!
//! List-valued cells (`tickers`, `holiday_dates`, `weekend_days`) use `;` as
//! the inner separator.

mod fundamentals;
mod fx;

pub use fundamentals::{
    macaulay_perpetual, prepare_fundamentals, FirmFundamentals, FundamentalsBasis,
    FundamentalsError, FundamentalsRow,
};
pub use fx::{FxError, FxTable};

use crate::leak::{BondRecord, Headline};
use crate::model::{
    Currency, DailyBar, ExchangeCalendar, FactorRow, IntradayBar, Region, SectorClass, Security,
    Ticker,
};
use chrono::{DateTime, NaiveDate, NaiveTime, Utc, Weekday};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },
    #[error("{path} row {row}, column {column}: {message}")]
    Invalid {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },
}

impl IngestError {
    fn invalid(path: &Path, row: usize, column: &str, message: impl Into<String>) -> Self {
        IngestError::Invalid {
            path: path.to_owned(),
            row,
            column: column.to_owned(),
            message: message.into(),
        }
    }
}

/// Deserialize every row of a CSV file, tagging each with its 1-based file
/// row number (header = row 1, first record = row 2).
fn load_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => IngestError::Io {
                path: path.to_owned(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => IngestError::Parse {
                path: path.to_owned(),
                row: 1,
                message: e.to_string(),
            },
        })?;
    let mut out = Vec::new();
    for (i, rec) in reader.deserialize::<T>().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| IngestError::Parse {
            path: path.to_owned(),
            row,
            message: e.to_string(),
        })?;
        out.push((row, rec));
    }
    Ok(out)
}

fn parse_instant(s: &str, path: &Path, row: usize, column: &str) -> Result<DateTime<Utc>, IngestError> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| IngestError::invalid(path, row, column, format!("bad instant {s:?}: {e}")))
}

fn parse_date(s: &str, path: &Path, row: usize, column: &str) -> Result<NaiveDate, IngestError> {
    s.parse::<NaiveDate>()
        .map_err(|e| IngestError::invalid(path, row, column, format!("bad date {s:?}: {e}")))
}

// ---------------------------------------------------------------------------
// securities.csv
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct SecurityRaw {
    ticker: String,
    exchange_id: String,
    region: String,
    currency: String,
    industry: String,
    market_ticker: String,
}

pub fn load_securities(path: &Path) -> Result<BTreeMap<Ticker, Security>, IngestError> {
    let mut out = BTreeMap::new();
    for (row, raw) in load_rows::<SecurityRaw>(path)? {
        if raw.ticker.is_empty() {
            return Err(IngestError::invalid(path, row, "ticker", "empty ticker"));
        }
        let sec = Security {
            ticker: Ticker::new(&raw.ticker),
            exchange_id: raw.exchange_id,
            region: Region::new(raw.region),
            sector_class: SectorClass::from_industry(&raw.industry),
            currency: Currency::new(raw.currency),
            market_ticker: Ticker::new(raw.market_ticker),
        };
        if out.insert(sec.ticker.clone(), sec).is_some() {
            return Err(IngestError::invalid(
                path,
                row,
                "ticker",
                format!("duplicate ticker {}", raw.ticker),
            ));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// calendar.csv
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct CalendarRaw {
    exchange_id: String,
    timezone: String,
    open: String,
    close: String,
    holiday_dates: String,
    #[serde(default)]
    weekend_days: Option<String>,
    #[serde(default)]
    coverage_start: Option<String>,
    #[serde(default)]
    coverage_end: Option<String>,
}

fn parse_weekday_num(n: &str) -> Option<Weekday> {
    match n {
        "1" => Some(Weekday::Mon),
        "2" => Some(Weekday::Tue),
        "3" => Some(Weekday::Wed),
        "4" => Some(Weekday::Thu),
        "5" => Some(Weekday::Fri),
        "6" => Some(Weekday::Sat),
        "7" => Some(Weekday::Sun),
        _ => None,
    }
}

pub fn load_calendars(path: &Path) -> Result<BTreeMap<String, ExchangeCalendar>, IngestError> {
    let mut out = BTreeMap::new();
    for (row, raw) in load_rows::<CalendarRaw>(path)? {
        let tz: chrono_tz::Tz = raw
            .timezone
            .parse()
            .map_err(|_| IngestError::invalid(path, row, "timezone", format!("unknown timezone {:?}", raw.timezone)))?;
        let open = raw
            .open
            .parse::<NaiveTime>()
            .map_err(|e| IngestError::invalid(path, row, "open", e.to_string()))?;
        let close = raw
            .close
            .parse::<NaiveTime>()
            .map_err(|e| IngestError::invalid(path, row, "close", e.to_string()))?;
        let mut holidays = Vec::new();
        for piece in raw.holiday_dates.split(';').filter(|p| !p.is_empty()) {
            holidays.push(parse_date(piece, path, row, "holiday_dates")?);
        }
        let mut cal = ExchangeCalendar::new(&raw.exchange_id, tz, open, close, holidays)
            .map_err(|e| IngestError::invalid(path, row, "open", e.to_string()))?;
        if let Some(w) = &raw.weekend_days {
            let mut days = Vec::new();
            for piece in w.split(';').filter(|p| !p.is_empty()) {
                days.push(parse_weekday_num(piece).ok_or_else(|| {
                    IngestError::invalid(path, row, "weekend_days", format!("bad weekday {piece:?}"))
                })?);
            }
            cal = cal.with_weekend(days);
        }
        if let (Some(s), Some(e)) = (&raw.coverage_start, &raw.coverage_end) {
            if !s.is_empty() && !e.is_empty() {
                let from = parse_date(s, path, row, "coverage_start")?;
                let to = parse_date(e, path, row, "coverage_end")?;
                cal = cal.with_coverage(from, to);
            }
        }
        out.insert(raw.exchange_id, cal);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// prices_daily.csv
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct DailyRaw {
    ticker: String,
    date: String,
    close: f64,
    volume: u64,
    shares_outstanding: u64,
}

pub fn load_daily_bars(path: &Path) -> Result<BTreeMap<Ticker, Vec<DailyBar>>, IngestError> {
    let mut out: BTreeMap<Ticker, Vec<DailyBar>> = BTreeMap::new();
    for (row, raw) in load_rows::<DailyRaw>(path)? {
        let bar = DailyBar {
            date: parse_date(&raw.date, path, row, "date")?,
            close: raw.close,
            volume: raw.volume,
            shares_outstanding: raw.shares_outstanding,
        };
        bar.validate()
            .map_err(|e| IngestError::invalid(path, row, "close", e.to_string()))?;
        out.entry(Ticker::new(&raw.ticker)).or_default().push(bar);
    }
    for bars in out.values_mut() {
        bars.sort_by_key(|b| b.date);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// prices_intraday.csv
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct IntradayRaw {
    ticker: String,
    timestamp: String,
    price: f64,
    volume: u64,
}

pub fn load_intraday_bars(path: &Path) -> Result<BTreeMap<Ticker, Vec<IntradayBar>>, IngestError> {
    let mut out: BTreeMap<Ticker, Vec<IntradayBar>> = BTreeMap::new();
    for (row, raw) in load_rows::<IntradayRaw>(path)? {
        let bar = IntradayBar {
            ts: parse_instant(&raw.timestamp, path, row, "timestamp")?,
            price: raw.price,
            volume: raw.volume,
        };
        bar.validate()
            .map_err(|e| IngestError::invalid(path, row, "price", e.to_string()))?;
        out.entry(Ticker::new(&raw.ticker)).or_default().push(bar);
    }
    for (ticker, bars) in &mut out {
        bars.sort_by_key(|b| b.ts);
        for w in bars.windows(2) {
            if w[1].ts <= w[0].ts {
                return Err(IngestError::invalid(
                    path,
                    0,
                    "timestamp",
                    format!("duplicate bar timestamp {} for {ticker}", w[1].ts),
                ));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// factors_<region>.csv
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct FactorRaw {
    date: String,
    mkt_rf: f64,
    smb: f64,
    hml: f64,
    #[serde(default)]
    mom: Option<f64>,
    rf: f64,
}

/// Load one region's factor file. `percent_units` divides the numeric columns
/// by 100 (for files published in percent rather than decimal).
pub fn load_factors(path: &Path, percent_units: bool) -> Result<Vec<FactorRow>, IngestError> {
    let scale = if percent_units { 0.01 } else { 1.0 };
    let mut out = Vec::new();
    for (row, raw) in load_rows::<FactorRaw>(path)? {
        let fr = FactorRow {
            date: parse_date(&raw.date, path, row, "date")?,
            mkt_rf: raw.mkt_rf * scale,
            smb: raw.smb * scale,
            hml: raw.hml * scale,
            mom: raw.mom.map(|m| m * scale),
            rf: raw.rf * scale,
        };
        fr.validate()
            .map_err(|e| IngestError::invalid(path, row, "mkt_rf", e.to_string()))?;
        out.push(fr);
    }
    out.sort_by_key(|f| f.date);
    Ok(out)
}

// ---------------------------------------------------------------------------
// headlines.csv
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct HeadlineRaw {
    feed: String,
    timestamp: String,
    headline: String,
    article_chars: u32,
    tickers: String,
    green_label: bool,
}

pub fn load_headlines(path: &Path) -> Result<Vec<Headline>, IngestError> {
    let mut out = Vec::new();
    for (row, raw) in load_rows::<HeadlineRaw>(path)? {
        let tickers: Vec<Ticker> = raw
            .tickers
            .split(';')
            .filter(|p| !p.is_empty())
            .map(Ticker::from)
            .collect();
        out.push(Headline {
            feed: raw.feed,
            ts: parse_instant(&raw.timestamp, path, row, "timestamp")?,
            text: raw.headline,
            article_chars: raw.article_chars,
            tickers,
            green_label: raw.green_label,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// announcements.csv
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct BondRaw {
    ticker: String,
    announce_date: String,
    currency: String,
    amount: f64,
    #[serde(default)]
    maturity_date: Option<String>,
    perpetual: bool,
    coupon_pct: f64,
    has_option: bool,
    #[serde(rename = "yield", default)]
    yield_rate: Option<f64>,
}

pub fn load_announcements(path: &Path) -> Result<Vec<BondRecord>, IngestError> {
    let mut out = Vec::new();
    for (row, raw) in load_rows::<BondRaw>(path)? {
        if !(raw.amount > 0.0) {
            return Err(IngestError::invalid(path, row, "amount", "amount must be positive"));
        }
        let maturity = match raw.maturity_date.as_deref() {
            Some(s) if !s.is_empty() => Some(parse_date(s, path, row, "maturity_date")?),
            _ => None,
        };
        if !raw.perpetual && maturity.is_none() {
            return Err(IngestError::invalid(
                path,
                row,
                "maturity_date",
                "non-perpetual bond needs a maturity date",
            ));
        }
        out.push(BondRecord {
            ticker: Ticker::new(&raw.ticker),
            announce_date: parse_date(&raw.announce_date, path, row, "announce_date")?,
            currency: Currency::new(raw.currency),
            amount: raw.amount,
            maturity_date: maturity,
            perpetual: raw.perpetual,
            coupon_pct: raw.coupon_pct,
            has_option: raw.has_option,
            yield_rate: raw.yield_rate,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// fundamentals.csv
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct FundamentalsRaw {
    ticker: String,
    fiscal_year: i32,
    mktcap: f64,
    assets: f64,
    roa: f64,
    de: f64,
    fcf: f64,
    first_time_issuer: bool,
}

pub fn load_fundamentals(
    path: &Path,
) -> Result<BTreeMap<Ticker, Vec<FundamentalsRow>>, IngestError> {
    let mut out: BTreeMap<Ticker, Vec<FundamentalsRow>> = BTreeMap::new();
    for (row, raw) in load_rows::<FundamentalsRaw>(path)? {
        if !(raw.assets > 0.0) {
            return Err(IngestError::invalid(path, row, "assets", "assets must be positive"));
        }
        if !(raw.mktcap > 0.0) {
            return Err(IngestError::invalid(path, row, "mktcap", "mktcap must be positive"));
        }
        out.entry(Ticker::new(&raw.ticker)).or_default().push(FundamentalsRow {
            fiscal_year: raw.fiscal_year,
            mktcap: raw.mktcap,
            assets: raw.assets,
            roa: raw.roa,
            de: raw.de,
            fcf: raw.fcf,
            first_time_issuer: raw.first_time_issuer,
        });
    }
    for rows in out.values_mut() {
        rows.sort_by_key(|r| r.fiscal_year);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// fx.csv
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct FxRaw {
    pair: String,
    timestamp: String,
    rate: f64,
}

pub fn load_fx(path: &Path) -> Result<FxTable, IngestError> {
    let mut table = FxTable::new();
    for (row, raw) in load_rows::<FxRaw>(path)? {
        if !(raw.rate > 0.0) || !raw.rate.is_finite() {
            return Err(IngestError::invalid(path, row, "rate", "rate must be positive"));
        }
        let pair = raw.pair.trim();
        let base = pair.strip_suffix("USD").ok_or_else(|| {
            IngestError::invalid(path, row, "pair", format!("pair {pair:?} must be quoted in USD, e.g. EURUSD"))
        })?;
        if base.is_empty() {
            return Err(IngestError::invalid(path, row, "pair", "empty base currency"));
        }
        let ts = parse_instant(&raw.timestamp, path, row, "timestamp")?;
        table.insert(Currency::new(base), ts, raw.rate);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(name: &str, content: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("leakstudy-ingest-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("{}-{}", std::process::id(), name));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn daily_happy_path() {
        let p = write_tmp(
            "daily_ok.csv",
            "ticker,date,close,volume,shares_outstanding\n\
             AAA,2021-03-01,10.0,1000,500000\n\
             AAA,2021-03-02,10.1,1200,500000\n\
             BBB,2021-03-01,55.0,900,100000\n",
        );
        let bars = load_daily_bars(&p).unwrap();
        assert_eq!(bars[&Ticker::from("AAA")].len(), 2);
        assert_eq!(bars[&Ticker::from("BBB")].len(), 1);
    }

    #[test]
    fn daily_invalid_close_names_row() {
        let p = write_tmp(
            "daily_bad.csv",
            "ticker,date,close,volume,shares_outstanding\n\
             AAA,2021-03-01,10.0,1000,500000\n\
             AAA,2021-03-02,-1.0,1200,500000\n",
        );
        let err = load_daily_bars(&p).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 3"), "got: {msg}");
    }

    #[test]
    fn header_only_is_empty() {
        let p = write_tmp("daily_empty.csv", "ticker,date,close,volume,shares_outstanding\n");
        let bars = load_daily_bars(&p).unwrap();
        assert!(bars.is_empty());
    }

    #[test]
    fn factors_mom_column_optional() {
        let with = write_tmp(
            "factors_mom.csv",
            "date,mkt_rf,smb,hml,mom,rf\n2021-03-01,0.001,0.0,0.0,0.002,0.0001\n",
        );
        let rows = load_factors(&with, false).unwrap();
        assert_eq!(rows[0].mom, Some(0.002));

        let without = write_tmp(
            "factors_nomom.csv",
            "date,mkt_rf,smb,hml,rf\n2021-03-01,0.001,0.0,0.0,0.0001\n",
        );
        let rows = load_factors(&without, false).unwrap();
        assert_eq!(rows[0].mom, None);

        let empty_cell = write_tmp(
            "factors_momempty.csv",
            "date,mkt_rf,smb,hml,mom,rf\n2021-03-01,0.001,0.0,0.0,,0.0001\n",
        );
        let rows = load_factors(&empty_cell, false).unwrap();
        assert_eq!(rows[0].mom, None);
    }

    #[test]
    fn percent_units_rescale() {
        let p = write_tmp(
            "factors_pct.csv",
            "date,mkt_rf,smb,hml,mom,rf\n2021-03-01,1.0,0.5,-0.5,0.2,0.01\n",
        );
        let rows = load_factors(&p, true).unwrap();
        assert!((rows[0].mkt_rf - 0.01).abs() < 1e-15);
        assert!((rows[0].rf - 0.0001).abs() < 1e-15);
    }

    #[test]
    fn headlines_ticker_list() {
        let p = write_tmp(
            "headlines.csv",
            "feed,timestamp,headline,article_chars,tickers,green_label\n\
             BN,2021-03-01T08:00:00+00:00,Mandate for Green Bond,500,AAA;BBB,true\n\
             FW,2021-03-01T08:05:00+00:00,Something else,200,,false\n",
        );
        let hs = load_headlines(&p).unwrap();
        assert_eq!(hs[0].tickers.len(), 2);
        assert!(hs[1].tickers.is_empty());
    }

    #[test]
    fn announcement_requires_maturity_or_perpetual() {
        let p = write_tmp(
            "ann_bad.csv",
            "ticker,announce_date,currency,amount,maturity_date,perpetual,coupon_pct,has_option,yield\n\
             AAA,2021-03-05,USD,300,,false,2.0,false,\n",
        );
        assert!(load_announcements(&p).is_err());
    }

    #[test]
    fn fx_pair_must_be_usd_quoted() {
        let p = write_tmp(
            "fx_bad.csv",
            "pair,timestamp,rate\nEURGBP,2021-03-01T00:00:00+00:00,0.85\n",
        );
        assert!(load_fx(&p).is_err());
    }

    #[test]
    fn calendar_roundtrip() {
        let p = write_tmp(
            "calendar.csv",
            "exchange_id,timezone,open,close,holiday_dates,weekend_days,coverage_start,coverage_end\n\
             XSIM,UTC,09:00:00,17:00:00,2021-07-05;2021-12-24,6;7,2020-01-01,2022-12-31\n",
        );
        let cals = load_calendars(&p).unwrap();
        let cal = &cals["XSIM"];
        assert_eq!(cal.session_minutes(), 480);
        assert!(!cal.is_trading_day(NaiveDate::from_ymd_opt(2021, 7, 5).unwrap()));
        assert!(cal.is_trading_day(NaiveDate::from_ymd_opt(2021, 7, 6).unwrap()));
    }
}
