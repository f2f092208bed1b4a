//! Leak identification: condense bond announcements into per-day events,
//! filter and dedup candidate headlines, match headlines to later
//! announcements, classify their timing, and apply liquidity screens.

use crate::ingest::{macaulay_perpetual, FxError, FxTable};
use crate::model::{
    CalendarError, Currency, ExchangeCalendar, IntradayBar, Security, Ticker, TimeOfDay,
};
use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Leaks are matched to announcements no further than this many calendar days
/// ahead, unless overridden.
pub const DEFAULT_HORIZON_DAYS: i64 = 60;

/// News inside the first hour of trading counts as early-market.
pub const FIRST_HOUR_MINUTES: u32 = 60;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("perpetual bond for {ticker} announced {date} has no yield")]
    PerpetualMissingYield { ticker: Ticker, date: NaiveDate },
    #[error("no calendar for ticker {ticker} (exchange {exchange:?})")]
    CalendarGap { ticker: Ticker, exchange: String },
    #[error(transparent)]
    Calendar(#[from] CalendarError),
    #[error(transparent)]
    Fx(#[from] FxError),
}

/// A raw announcement row: one bond.
#[derive(Debug, Clone, PartialEq)]
pub struct BondRecord {
    pub ticker: Ticker,
    pub announce_date: NaiveDate,
    pub currency: Currency,
    /// Face amount in millions of the bond's currency.
    pub amount: f64,
    pub maturity_date: Option<NaiveDate>,
    pub perpetual: bool,
    pub coupon_pct: f64,
    pub has_option: bool,
    pub yield_rate: Option<f64>,
}

/// One bond inside a condensed announcement event.
#[derive(Debug, Clone, PartialEq)]
pub struct BondTerms {
    pub amount: f64,
    pub currency: Currency,
    pub term_years: f64,
    pub coupon_pct: f64,
    pub has_option: bool,
}

/// All green bonds announced by one issuer on one date.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnouncementEvent {
    pub ticker: Ticker,
    pub announce_date: NaiveDate,
    pub bonds: Vec<BondTerms>,
}

impl AnnouncementEvent {
    pub fn n_bonds(&self) -> usize {
        self.bonds.len()
    }

    pub fn avg_coupon(&self) -> f64 {
        self.bonds.iter().map(|b| b.coupon_pct).sum::<f64>() / self.bonds.len() as f64
    }

    pub fn avg_term_years(&self) -> f64 {
        self.bonds.iter().map(|b| b.term_years).sum::<f64>() / self.bonds.len() as f64
    }

    pub fn has_option(&self) -> bool {
        self.bonds.iter().any(|b| b.has_option)
    }

    /// Cumulative announced size in USD millions, at the FX rates in force
    /// at `ts` (the leak instant).
    pub fn total_amount_usd(&self, fx: &FxTable, ts: DateTime<Utc>) -> Result<f64, FxError> {
        let mut total = 0.0;
        for b in &self.bonds {
            total += fx.rebase_usd(b.amount, &b.currency, ts)?;
        }
        Ok(total)
    }
}

/// Condense bond rows into one event per (ticker, announcement date).
///
/// Perpetual bonds enter with their Macaulay duration `(1+yield)/yield` in
/// place of the undefined time to maturity; a perpetual without a yield is a
/// data error.
pub fn condense_announcements(
    records: &[BondRecord],
) -> Result<Vec<AnnouncementEvent>, MatchError> {
    let mut grouped: BTreeMap<(Ticker, NaiveDate), Vec<BondTerms>> = BTreeMap::new();
    for rec in records {
        let term_years = if rec.perpetual {
            let y = rec.yield_rate.ok_or_else(|| MatchError::PerpetualMissingYield {
                ticker: rec.ticker.clone(),
                date: rec.announce_date,
            })?;
            macaulay_perpetual(y).map_err(|_| MatchError::PerpetualMissingYield {
                ticker: rec.ticker.clone(),
                date: rec.announce_date,
            })?
        } else {
            let maturity = rec.maturity_date.expect("validated at ingest");
            (maturity - rec.announce_date).num_days() as f64 / 365.25
        };
        grouped
            .entry((rec.ticker.clone(), rec.announce_date))
            .or_default()
            .push(BondTerms {
                amount: rec.amount,
                currency: rec.currency.clone(),
                term_years,
                coupon_pct: rec.coupon_pct,
                has_option: rec.has_option,
            });
    }
    Ok(grouped
        .into_iter()
        .map(|((ticker, announce_date), bonds)| AnnouncementEvent {
            ticker,
            announce_date,
            bonds,
        })
        .collect())
}

/// A news headline from one of the monitored feeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Headline {
    pub feed: String,
    pub ts: DateTime<Utc>,
    pub text: String,
    pub article_chars: u32,
    pub tickers: Vec<Ticker>,
    pub green_label: bool,
}

impl Headline {
    pub fn primary_ticker(&self) -> Option<&Ticker> {
        self.tickers.first()
    }
}

fn contains_word(text: &str, word: &str) -> bool {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .any(|w| w == word)
}

/// Search-term screen: the headline text must contain both "Mandate" and
/// "Green" as whole words (case-insensitive) and carry the green-bond label.
pub fn is_candidate(h: &Headline) -> bool {
    h.green_label && contains_word(&h.text, "mandate") && contains_word(&h.text, "green")
}

/// Keep headlines that pass the search-term screen and mention at least one
/// primary ticker.
pub fn filter_headlines(headlines: &[Headline]) -> Vec<Headline> {
    headlines
        .iter()
        .filter(|h| is_candidate(h) && !h.tickers.is_empty())
        .cloned()
        .collect()
}

/// Drop duplicate and superseded headlines.
///
/// Two rules, applied in order:
/// 1. Same text and tickers posted to both feeds: keep the copy with the
///    larger article, ties broken by the earlier timestamp.
/// 2. Update chains: headlines for the same primary ticker within
///    `horizon_days` of the last retained one refer to the same issue; only
///    the earliest is retained.
///
/// The result is canonically ordered by (timestamp, ticker, text), so output
/// does not depend on input order. Idempotent.
pub fn dedup_headlines(candidates: &[Headline], horizon_days: i64) -> Vec<Headline> {
    // Rule 1: exact-duplicate collapse.
    let mut best: BTreeMap<(String, Vec<Ticker>), Headline> = BTreeMap::new();
    for h in candidates {
        let key = (h.text.trim().to_lowercase(), {
            let mut t = h.tickers.clone();
            t.sort();
            t
        });
        let replace = match best.get(&key) {
            None => true,
            Some(kept) => {
                h.article_chars > kept.article_chars
                    || (h.article_chars == kept.article_chars && h.ts < kept.ts)
            }
        };
        if replace {
            best.insert(key, h.clone());
        }
    }
    let mut unique: Vec<Headline> = best.into_values().collect();
    unique.sort_by(|a, b| {
        (a.ts, a.primary_ticker(), &a.text).cmp(&(b.ts, b.primary_ticker(), &b.text))
    });

    // Rule 2: collapse update chains per primary ticker.
    let mut last_kept: BTreeMap<Ticker, DateTime<Utc>> = BTreeMap::new();
    let mut out = Vec::new();
    for h in unique {
        match h.primary_ticker() {
            Some(t) => {
                if let Some(&prev) = last_kept.get(t) {
                    if h.ts - prev <= Duration::days(horizon_days) {
                        continue; // update to an already-retained headline
                    }
                }
                last_kept.insert(t.clone(), h.ts);
                out.push(h);
            }
            None => out.push(h),
        }
    }
    out
}

/// Early vs. late arrival of a leak relative to the trading session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimingClass {
    /// Pre-market (including after the previous session's close and
    /// non-trading days) or within the first hour of trading.
    EarlyMarket,
    /// More than an hour into the session.
    LateMarket,
}

impl std::fmt::Display for TimingClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TimingClass::EarlyMarket => f.write_str("early"),
            TimingClass::LateMarket => f.write_str("late"),
        }
    }
}

/// Classify a leak instant as early- or late-market news on its exchange.
pub fn classify_timing(
    ts: DateTime<Utc>,
    cal: &ExchangeCalendar,
) -> Result<TimingClass, CalendarError> {
    Ok(match cal.classify(ts)? {
        TimeOfDay::PreMarket | TimeOfDay::PostMarket | TimeOfDay::NonTradingDay => {
            TimingClass::EarlyMarket
        }
        TimeOfDay::InSession { offset_minutes } if offset_minutes < FIRST_HOUR_MINUTES => {
            TimingClass::EarlyMarket
        }
        TimeOfDay::InSession { .. } => TimingClass::LateMarket,
    })
}

/// Outcome of the liquidity screen for one leak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiquidityStatus {
    Pass,
    Fail,
    /// No intraday coverage for the leak session; excluded from analysis.
    Unknown,
}

impl std::fmt::Display for LiquidityStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LiquidityStatus::Pass => f.write_str("true"),
            LiquidityStatus::Fail => f.write_str("false"),
            LiquidityStatus::Unknown => f.write_str("unknown"),
        }
    }
}

/// A headline matched to a later announcement by the same issuer.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakEvent {
    /// Index into the deduped candidate headlines.
    pub headline_index: usize,
    /// Index into the condensed announcement events.
    pub event_index: usize,
    pub ticker: Ticker,
    pub leak_ts: DateTime<Utc>,
    pub announce_date: NaiveDate,
    pub timing: TimingClass,
    pub liquidity: LiquidityStatus,
    pub n_bonds: usize,
    /// Cumulative announced size, USD millions at leak-time FX.
    pub size_usd: f64,
    pub avg_coupon: f64,
    pub avg_term_years: f64,
    pub has_option: bool,
}

/// Everything matching needs besides the headlines and events themselves.
pub struct MatchContext<'a> {
    pub securities: &'a BTreeMap<Ticker, Security>,
    pub calendars: &'a BTreeMap<String, ExchangeCalendar>,
    pub fx: &'a FxTable,
}

impl<'a> MatchContext<'a> {
    /// Calendar for a ticker's listing exchange.
    pub fn calendar_for(&self, ticker: &Ticker) -> Result<&'a ExchangeCalendar, MatchError> {
        let sec = self.securities.get(ticker).ok_or_else(|| MatchError::CalendarGap {
            ticker: ticker.clone(),
            exchange: String::new(),
        })?;
        self.calendars
            .get(&sec.exchange_id)
            .ok_or_else(|| MatchError::CalendarGap {
                ticker: ticker.clone(),
                exchange: sec.exchange_id.clone(),
            })
    }
}

/// Match deduped candidate headlines to announcement events.
///
/// A headline becomes a leak when the same ticker announces within
/// `horizon_days` calendar days and the headline precedes the announcement
/// date by at least one business day on the listing exchange. Each headline
/// takes the earliest qualifying event; unmatched headlines are discarded.
/// Output is ordered by (leak timestamp, ticker).
pub fn match_leaks(
    candidates: &[Headline],
    events: &[AnnouncementEvent],
    ctx: &MatchContext<'_>,
    horizon_days: i64,
) -> Result<Vec<LeakEvent>, MatchError> {
    // Events per ticker, ordered by date (events are already sorted).
    let mut by_ticker: BTreeMap<&Ticker, Vec<(usize, &AnnouncementEvent)>> = BTreeMap::new();
    for (i, ev) in events.iter().enumerate() {
        by_ticker.entry(&ev.ticker).or_default().push((i, ev));
    }

    let mut leaks = Vec::new();
    for (hi, h) in candidates.iter().enumerate() {
        let Some(ticker) = h.primary_ticker() else {
            continue;
        };
        let Some(ticker_events) = by_ticker.get(ticker) else {
            continue; // no announcements for this ticker at all
        };
        let cal = ctx.calendar_for(ticker)?;
        let leak_date = cal.local_date(h.ts);
        let mut matched: Option<(usize, &AnnouncementEvent)> = None;
        for &(ei, ev) in ticker_events {
            if ev.announce_date <= leak_date {
                continue;
            }
            let gap_days = (ev.announce_date - leak_date).num_days();
            if gap_days > horizon_days {
                break; // events are date-ordered; nothing closer follows
            }
            if cal.business_days_between(leak_date, ev.announce_date)? >= 1 {
                matched = Some((ei, ev));
                break; // earliest qualifying event
            }
        }
        let Some((ei, ev)) = matched else {
            continue;
        };
        leaks.push(LeakEvent {
            headline_index: hi,
            event_index: ei,
            ticker: ticker.clone(),
            leak_ts: h.ts,
            announce_date: ev.announce_date,
            timing: classify_timing(h.ts, cal)?,
            liquidity: LiquidityStatus::Unknown,
            n_bonds: ev.n_bonds(),
            size_usd: ev.total_amount_usd(ctx.fx, h.ts)?,
            avg_coupon: ev.avg_coupon(),
            avg_term_years: ev.avg_term_years(),
            has_option: ev.has_option(),
        });
    }
    leaks.sort_by(|a, b| (a.leak_ts, &a.ticker).cmp(&(b.leak_ts, &b.ticker)));
    Ok(leaks)
}

/// Volume a leak must strictly exceed over the 24 hours following it.
pub const LIQUIDITY_VOLUME_FLOOR: u64 = 10_000;

/// Minimum count of active (nonzero-volume) 5-minute bars in the first hour.
pub const LIQUIDITY_MIN_ACTIVE_BARS: usize = 2;

/// Apply the liquidity screens to matched leaks.
///
/// A leak passes when the hour after it (the first trading hour, for leaks
/// arriving outside the session) contains at least two bars with nonzero
/// volume, and the intraday volume over the 24 hours following the leak
/// strictly exceeds 10,000 units. Leaks whose anchor session has no intraday
/// coverage are flagged unknown.
pub fn apply_liquidity(
    leaks: &mut [LeakEvent],
    intraday: &BTreeMap<Ticker, Vec<IntradayBar>>,
    ctx: &MatchContext<'_>,
) -> Result<(), MatchError> {
    for leak in leaks.iter_mut() {
        let cal = ctx.calendar_for(&leak.ticker)?;
        let anchor = cal.grid_anchor(leak.leak_ts)?;
        let bars = intraday.get(&leak.ticker).map(Vec::as_slice).unwrap_or(&[]);

        let session_date = cal.local_date(anchor);
        let session_open = cal.session_open_utc(session_date);
        let session_close = cal.session_close_utc(session_date);
        let has_session_coverage = bars
            .iter()
            .any(|b| b.ts >= session_open && b.ts < session_close);
        if !has_session_coverage {
            leak.liquidity = LiquidityStatus::Unknown;
            continue;
        }

        let hour_end = anchor + Duration::minutes(FIRST_HOUR_MINUTES as i64);
        let active_bars = bars
            .iter()
            .filter(|b| b.ts >= anchor && b.ts < hour_end && b.volume > 0)
            .count();

        let day_end = leak.leak_ts + Duration::hours(24);
        let volume_24h: u64 = bars
            .iter()
            .filter(|b| b.ts >= anchor && b.ts < day_end)
            .map(|b| b.volume)
            .sum();

        leak.liquidity = if active_bars >= LIQUIDITY_MIN_ACTIVE_BARS
            && volume_24h > LIQUIDITY_VOLUME_FLOOR
        {
            LiquidityStatus::Pass
        } else {
            LiquidityStatus::Fail
        };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{NaiveTime, TimeZone};
    use proptest::prelude::*;

    fn utc_ts(y: i32, m: u32, d: u32, hh: u32, mm: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, hh, mm, 0).unwrap()
    }

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn headline(ts: DateTime<Utc>, text: &str, chars: u32, tickers: &[&str]) -> Headline {
        Headline {
            feed: "BN".into(),
            ts,
            text: text.into(),
            article_chars: chars,
            tickers: tickers.iter().map(|t| Ticker::from(*t)).collect(),
            green_label: true,
        }
    }

    fn bond(ticker: &str, announce: NaiveDate, amount: f64) -> BondRecord {
        BondRecord {
            ticker: Ticker::from(ticker),
            announce_date: announce,
            currency: Currency::usd(),
            amount,
            maturity_date: Some(announce + Duration::days(365 * 5)),
            perpetual: false,
            coupon_pct: 2.0,
            has_option: false,
            yield_rate: None,
        }
    }

    fn test_world() -> (BTreeMap<Ticker, Security>, BTreeMap<String, ExchangeCalendar>) {
        let cal = ExchangeCalendar::new(
            "XSIM",
            chrono_tz::UTC,
            NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
            NaiveTime::from_hms_opt(17, 0, 0).unwrap(),
            [],
        )
        .unwrap();
        let mut calendars = BTreeMap::new();
        calendars.insert("XSIM".to_owned(), cal);
        let mut securities = BTreeMap::new();
        for t in ["AAA", "BBB"] {
            securities.insert(
                Ticker::from(t),
                Security {
                    ticker: Ticker::from(t),
                    exchange_id: "XSIM".to_owned(),
                    region: crate::model::Region::new("SIM"),
                    sector_class: crate::model::SectorClass::NonFinancial,
                    currency: Currency::usd(),
                    market_ticker: Ticker::from("MKT"),
                },
            );
        }
        (securities, calendars)
    }

    #[test]
    fn condense_groups_by_ticker_and_date() {
        let d = date(2021, 3, 5);
        let records = vec![bond("AAA", d, 300.0), bond("AAA", d, 200.0), bond("BBB", d, 100.0)];
        let events = condense_announcements(&records).unwrap();
        assert_eq!(events.len(), 2);
        let aaa = events.iter().find(|e| e.ticker.as_str() == "AAA").unwrap();
        assert_eq!(aaa.n_bonds(), 2);
        let usd = aaa.total_amount_usd(&FxTable::new(), utc_ts(2021, 3, 1, 9, 0)).unwrap();
        assert_eq!(usd, 500.0);
    }

    #[test]
    fn condense_adjacent_dates_stay_separate() {
        let records = vec![bond("AAA", date(2021, 3, 5), 300.0), bond("AAA", date(2021, 3, 6), 200.0)];
        let events = condense_announcements(&records).unwrap();
        assert_eq!(events.len(), 2);
    }

    #[test]
    fn condense_perpetual_uses_macaulay_term() {
        let d = date(2021, 3, 5);
        let mut rec = bond("AAA", d, 300.0);
        rec.perpetual = true;
        rec.maturity_date = None;
        rec.yield_rate = Some(0.05);
        let events = condense_announcements(&[rec]).unwrap();
        assert_eq!(events[0].bonds[0].term_years, 21.0);

        let mut bad = bond("AAA", d, 300.0);
        bad.perpetual = true;
        bad.maturity_date = None;
        bad.yield_rate = None;
        assert!(condense_announcements(&[bad]).is_err());
    }

    #[test]
    fn filter_requires_terms_label_and_ticker() {
        let ts = utc_ts(2021, 3, 1, 8, 0);
        let kept = headline(ts, "Mandate for Green Bond issue", 500, &["AAA"]);
        let no_mandate = headline(ts, "Green Bond priced today", 500, &["AAA"]);
        let no_ticker = headline(ts, "Mandate for Green Bond issue", 500, &[]);
        let mut no_label = kept.clone();
        no_label.green_label = false;
        let out = filter_headlines(&[kept.clone(), no_mandate, no_ticker, no_label]);
        assert_eq!(out, vec![kept]);
    }

    #[test]
    fn filter_matches_whole_words_case_insensitive() {
        let ts = utc_ts(2021, 3, 1, 8, 0);
        assert!(is_candidate(&headline(ts, "GREEN bond MANDATE signed", 1, &[])));
        assert!(!is_candidate(&headline(ts, "Greenfield mandates reviewed", 1, &[])));
        assert!(!is_candidate(&headline(ts, "Mandated green-washing", 1, &[]))); // "mandated" is not "mandate"
    }

    #[test]
    fn dedup_keeps_larger_article() {
        let ts = utc_ts(2021, 3, 1, 8, 0);
        let small = Headline { feed: "BN".into(), ..headline(ts, "Mandate Green AAA", 500, &["AAA"]) };
        let big = Headline { feed: "FW".into(), ..headline(ts, "Mandate Green AAA", 900, &["AAA"]) };
        let out = dedup_headlines(&[small, big.clone()], DEFAULT_HORIZON_DAYS);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].article_chars, 900);
        assert_eq!(out[0].feed, "FW");
    }

    #[test]
    fn dedup_tie_prefers_earlier() {
        let early = headline(utc_ts(2021, 3, 1, 8, 0), "Mandate Green AAA", 500, &["AAA"]);
        let late = headline(utc_ts(2021, 3, 1, 9, 0), "Mandate Green AAA", 500, &["AAA"]);
        let out = dedup_headlines(&[late, early.clone()], DEFAULT_HORIZON_DAYS);
        assert_eq!(out, vec![early]);
    }

    #[test]
    fn dedup_collapses_update_chain_to_earliest() {
        let first = headline(utc_ts(2021, 3, 1, 8, 0), "Mandate Green AAA issue", 500, &["AAA"]);
        let update = headline(utc_ts(2021, 3, 4, 8, 0), "Update Mandate Green AAA issue", 600, &["AAA"]);
        let out = dedup_headlines(&[update, first.clone()], DEFAULT_HORIZON_DAYS);
        assert_eq!(out, vec![first]);
    }

    #[test]
    fn dedup_keeps_unrelated_tickers() {
        let a = headline(utc_ts(2021, 3, 1, 8, 0), "Mandate Green AAA", 500, &["AAA"]);
        let b = headline(utc_ts(2021, 3, 1, 8, 0), "Mandate Green BBB", 500, &["BBB"]);
        let out = dedup_headlines(&[a, b], DEFAULT_HORIZON_DAYS);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn timing_first_hour_boundary() {
        let (_, cals) = test_world();
        let cal = &cals["XSIM"];
        assert_eq!(classify_timing(utc_ts(2021, 3, 1, 9, 59), cal).unwrap(), TimingClass::EarlyMarket);
        assert_eq!(classify_timing(utc_ts(2021, 3, 1, 10, 1), cal).unwrap(), TimingClass::LateMarket);
        // Previous-day post-close counts as early for the next session.
        assert_eq!(classify_timing(utc_ts(2021, 3, 1, 17, 30), cal).unwrap(), TimingClass::EarlyMarket);
        // Weekend too.
        assert_eq!(classify_timing(utc_ts(2021, 3, 6, 12, 0), cal).unwrap(), TimingClass::EarlyMarket);
    }

    fn run_match(headlines: &[Headline], records: &[BondRecord], horizon: i64) -> Vec<LeakEvent> {
        let (securities, calendars) = test_world();
        let fx = FxTable::new();
        let ctx = MatchContext { securities: &securities, calendars: &calendars, fx: &fx };
        let events = condense_announcements(records).unwrap();
        match_leaks(headlines, &events, &ctx, horizon).unwrap()
    }

    #[test]
    fn match_accepts_next_business_day() {
        // leak Monday 09:00, announce Tuesday
        let h = headline(utc_ts(2021, 3, 1, 9, 0), "Mandate Green", 500, &["AAA"]);
        let leaks = run_match(&[h], &[bond("AAA", date(2021, 3, 2), 300.0)], DEFAULT_HORIZON_DAYS);
        assert_eq!(leaks.len(), 1);
        assert_eq!(leaks[0].announce_date, date(2021, 3, 2));
    }

    #[test]
    fn match_accepts_friday_to_monday() {
        let h = headline(utc_ts(2021, 3, 5, 9, 0), "Mandate Green", 500, &["AAA"]);
        let leaks = run_match(&[h], &[bond("AAA", date(2021, 3, 8), 300.0)], DEFAULT_HORIZON_DAYS);
        assert_eq!(leaks.len(), 1);
    }

    #[test]
    fn match_rejects_same_day() {
        let h = headline(utc_ts(2021, 3, 1, 9, 0), "Mandate Green", 500, &["AAA"]);
        let leaks = run_match(&[h], &[bond("AAA", date(2021, 3, 1), 300.0)], DEFAULT_HORIZON_DAYS);
        assert!(leaks.is_empty());
    }

    #[test]
    fn match_rejects_beyond_horizon() {
        // 61 calendar days ahead at the default horizon of 60.
        let h = headline(utc_ts(2021, 3, 1, 9, 0), "Mandate Green", 500, &["AAA"]);
        let leaks = run_match(&[h], &[bond("AAA", date(2021, 5, 1), 300.0)], DEFAULT_HORIZON_DAYS);
        assert!(leaks.is_empty());
        // exactly 60 days is accepted
        let h = headline(utc_ts(2021, 3, 2, 9, 0), "Mandate Green", 500, &["AAA"]);
        let leaks = run_match(&[h], &[bond("AAA", date(2021, 5, 1), 300.0)], DEFAULT_HORIZON_DAYS);
        assert_eq!(leaks.len(), 1);
    }

    #[test]
    fn match_takes_earliest_qualifying_event() {
        let h = headline(utc_ts(2021, 3, 1, 9, 0), "Mandate Green", 500, &["AAA"]);
        let records = vec![bond("AAA", date(2021, 3, 10), 100.0), bond("AAA", date(2021, 3, 3), 200.0)];
        let leaks = run_match(&[h], &records, DEFAULT_HORIZON_DAYS);
        assert_eq!(leaks.len(), 1);
        assert_eq!(leaks[0].announce_date, date(2021, 3, 3));
    }

    #[test]
    fn match_errors_on_missing_calendar() {
        let (securities, _) = test_world();
        let calendars = BTreeMap::new();
        let fx = FxTable::new();
        let ctx = MatchContext { securities: &securities, calendars: &calendars, fx: &fx };
        let h = headline(utc_ts(2021, 3, 1, 9, 0), "Mandate Green", 500, &["AAA"]);
        let events = condense_announcements(&[bond("AAA", date(2021, 3, 2), 300.0)]).unwrap();
        let err = match_leaks(&[h], &events, &ctx, DEFAULT_HORIZON_DAYS).unwrap_err();
        assert!(matches!(err, MatchError::CalendarGap { .. }));
    }

    fn flat_bars(ticker: &str, day: NaiveDate, volume_per_bar: u64) -> (Ticker, Vec<IntradayBar>) {
        let (_, cals) = test_world();
        let cal = &cals["XSIM"];
        let bars = cal
            .session_bar_starts(day)
            .into_iter()
            .map(|ts| IntradayBar { ts, price: 10.0, volume: volume_per_bar })
            .collect();
        (Ticker::from(ticker), bars)
    }

    fn screened(leak_ts: DateTime<Utc>, bars: Vec<(Ticker, Vec<IntradayBar>)>) -> LiquidityStatus {
        let (securities, calendars) = test_world();
        let fx = FxTable::new();
        let ctx = MatchContext { securities: &securities, calendars: &calendars, fx: &fx };
        let mut leaks = vec![LeakEvent {
            headline_index: 0,
            event_index: 0,
            ticker: Ticker::from("AAA"),
            leak_ts,
            announce_date: date(2021, 3, 2),
            timing: TimingClass::EarlyMarket,
            liquidity: LiquidityStatus::Unknown,
            n_bonds: 1,
            size_usd: 300.0,
            avg_coupon: 2.0,
            avg_term_years: 5.0,
            has_option: false,
        }];
        let intraday: BTreeMap<Ticker, Vec<IntradayBar>> = bars.into_iter().collect();
        apply_liquidity(&mut leaks, &intraday, &ctx).unwrap();
        leaks[0].liquidity
    }

    #[test]
    fn liquidity_boundary_is_strict() {
        let day = date(2021, 3, 1);
        let leak = utc_ts(2021, 3, 1, 7, 0); // pre-market

        // 96 bars summing to exactly 10,000 units: excluded (strict floor).
        let (t, mut bars) = flat_bars("AAA", day, 100); // 96 * 100 = 9,600
        bars[90].volume += 400;
        assert_eq!(bars.iter().map(|b| b.volume).sum::<u64>(), 10_000);
        assert_eq!(screened(leak, vec![(t, bars)]), LiquidityStatus::Fail);

        // 10,001 with plenty of active first-hour bars: included.
        let (t, mut bars) = flat_bars("AAA", day, 104); // 96 * 104 = 9,984
        bars[95].volume += 17;
        assert_eq!(bars.iter().map(|b| b.volume).sum::<u64>(), 10_001);
        assert_eq!(screened(leak, vec![(t, bars)]), LiquidityStatus::Pass);
    }

    #[test]
    fn liquidity_needs_multiple_active_bars() {
        let day = date(2021, 3, 1);
        let leak = utc_ts(2021, 3, 1, 7, 0);
        // One single massive trade in the first hour: fails the activity test.
        let (t, mut bars) = flat_bars("AAA", day, 0);
        bars[0].volume = 50_000;
        assert_eq!(screened(leak, vec![(t, bars)]), LiquidityStatus::Fail);
    }

    #[test]
    fn liquidity_unknown_without_coverage() {
        let leak = utc_ts(2021, 3, 1, 7, 0);
        assert_eq!(screened(leak, vec![]), LiquidityStatus::Unknown);
    }

    #[test]
    fn liquidity_in_session_leak_uses_hour_after() {
        use chrono::Timelike;
        let day = date(2021, 3, 1);
        let leak = utc_ts(2021, 3, 1, 13, 2); // in-session; anchor 13:05
        let (t, mut bars) = flat_bars("AAA", day, 0);
        // Two active bars inside [13:05, 14:05), enough volume over 24h.
        for b in bars.iter_mut() {
            let hm = (b.ts.time().hour(), b.ts.time().minute());
            if hm == (13, 5) || hm == (13, 40) {
                b.volume = 8_000;
            }
        }
        assert_eq!(screened(leak, vec![(t, bars)]), LiquidityStatus::Pass);
    }

    proptest! {
        // dedup is idempotent and order-insensitive
        #[test]
        fn dedup_idempotent_and_order_free(seed in 0u64..500) {
            let base = utc_ts(2021, 3, 1, 8, 0);
            let mut hs = Vec::new();
            let mut s = seed;
            for i in 0..12u64 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let ticker = if s % 3 == 0 { "AAA" } else { "BBB" };
                let day = (s >> 8) % 130;
                let chars = 100 + ((s >> 16) % 5) as u32 * 100;
                let text = if s % 2 == 0 { "Mandate Green one" } else { "Mandate Green two" };
                hs.push(headline(base + Duration::days(day as i64) + Duration::minutes(i as i64), text, chars, &[ticker]));
            }
            let once = dedup_headlines(&hs, DEFAULT_HORIZON_DAYS);
            let twice = dedup_headlines(&once, DEFAULT_HORIZON_DAYS);
            prop_assert_eq!(&once, &twice);

            let mut reversed = hs.clone();
            reversed.reverse();
            let rev = dedup_headlines(&reversed, DEFAULT_HORIZON_DAYS);
            prop_assert_eq!(once, rev);
        }

        // every matched leak satisfies both temporal invariants
        #[test]
        fn leaks_satisfy_temporal_invariants(day_gap in 0i64..90, hour in 0u32..24) {
            let leak_ts = utc_ts(2021, 3, 1, hour, 0);
            let h = headline(leak_ts, "Mandate Green", 500, &["AAA"]);
            let records = vec![bond("AAA", date(2021, 3, 1) + Duration::days(day_gap), 300.0)];
            let leaks = run_match(&[h], &records, DEFAULT_HORIZON_DAYS);
            let (_, cals) = test_world();
            let cal = &cals["XSIM"];
            for leak in leaks {
                let leak_date = cal.local_date(leak.leak_ts);
                prop_assert!(cal.business_days_between(leak_date, leak.announce_date).unwrap() >= 1);
                prop_assert!((leak.announce_date - leak_date).num_days() <= DEFAULT_HORIZON_DAYS);
            }
        }
    }
}
