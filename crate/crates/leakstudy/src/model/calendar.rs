//! Exchange sessions: trading-day arithmetic and timestamp classification.
//!
//! A calendar is one exchange's timezone, session hours, holiday set, and
//! weekend pattern. All instants are stored UTC and converted to exchange
//! wall-clock time for classification, so a leak timestamped in any zone
//! lands in the right session.

use chrono::{DateTime, Datelike, Duration, NaiveDate, NaiveTime, TimeZone, Utc, Weekday};
use chrono_tz::Tz;
use std::collections::BTreeSet;
use thiserror::Error;

/// Width of the intraday bar grid, minutes.
pub const BAR_MINUTES: i64 = 5;

#[derive(Debug, Error, PartialEq)]
pub enum CalendarError {
    #[error("session_open must precede session_close ({open} >= {close})")]
    InvertedSession { open: NaiveTime, close: NaiveTime },
    #[error("calendar {exchange} does not cover {date}")]
    OutsideCoverage { exchange: String, date: NaiveDate },
    #[error("date range inverted: {a} > {b}")]
    InvertedRange { a: NaiveDate, b: NaiveDate },
    #[error("no calendar for exchange {0}")]
    UnknownExchange(String),
    #[error("unknown timezone {0:?}")]
    UnknownTimezone(String),
}

/// Where a timestamp falls relative to one exchange's trading day.
///
/// The four classes partition every covered instant: exactly one applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeOfDay {
    /// Trading day, before session open.
    PreMarket,
    /// Inside the session; offset is whole minutes since open.
    InSession { offset_minutes: u32 },
    /// Trading day, at or after session close.
    PostMarket,
    /// Weekend or holiday.
    NonTradingDay,
}

/// One exchange's trading sessions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeCalendar {
    pub exchange_id: String,
    pub timezone: Tz,
    pub session_open: NaiveTime,
    pub session_close: NaiveTime,
    holidays: BTreeSet<NaiveDate>,
    weekend: Vec<Weekday>,
    /// Inclusive date range the calendar is valid for; `None` = unbounded.
    coverage: Option<(NaiveDate, NaiveDate)>,
}

impl ExchangeCalendar {
    pub fn new(
        exchange_id: impl Into<String>,
        timezone: Tz,
        session_open: NaiveTime,
        session_close: NaiveTime,
        holidays: impl IntoIterator<Item = NaiveDate>,
    ) -> Result<Self, CalendarError> {
        if session_open >= session_close {
            return Err(CalendarError::InvertedSession {
                open: session_open,
                close: session_close,
            });
        }
        Ok(ExchangeCalendar {
            exchange_id: exchange_id.into(),
            timezone,
            session_open,
            session_close,
            holidays: holidays.into_iter().collect(),
            weekend: vec![Weekday::Sat, Weekday::Sun],
            coverage: None,
        })
    }

    /// Replace the default Saturday/Sunday weekend.
    pub fn with_weekend(mut self, weekend: Vec<Weekday>) -> Self {
        self.weekend = weekend;
        self
    }

    /// Restrict the calendar to an inclusive date range; classification and
    /// day arithmetic outside it report a coverage gap.
    pub fn with_coverage(mut self, from: NaiveDate, to: NaiveDate) -> Self {
        self.coverage = Some((from, to));
        self
    }

    pub fn session_minutes(&self) -> u32 {
        (self.session_close - self.session_open).num_minutes() as u32
    }

    fn check_coverage(&self, date: NaiveDate) -> Result<(), CalendarError> {
        if let Some((from, to)) = self.coverage {
            if date < from || date > to {
                return Err(CalendarError::OutsideCoverage {
                    exchange: self.exchange_id.clone(),
                    date,
                });
            }
        }
        Ok(())
    }

    pub fn is_trading_day(&self, date: NaiveDate) -> bool {
        !self.weekend.contains(&date.weekday()) && !self.holidays.contains(&date)
    }

    /// First trading day strictly after `date`.
    pub fn next_trading_day(&self, date: NaiveDate) -> Result<NaiveDate, CalendarError> {
        let mut d = date + Duration::days(1);
        loop {
            self.check_coverage(d)?;
            if self.is_trading_day(d) {
                return Ok(d);
            }
            d += Duration::days(1);
        }
    }

    /// Last trading day strictly before `date`.
    pub fn prev_trading_day(&self, date: NaiveDate) -> Result<NaiveDate, CalendarError> {
        let mut d = date - Duration::days(1);
        loop {
            self.check_coverage(d)?;
            if self.is_trading_day(d) {
                return Ok(d);
            }
            d -= Duration::days(1);
        }
    }

    /// Trading day `offset` relative trading days away from `base`.
    ///
    /// `base` itself is offset 0 and must be a trading day. Offsets walk the
    /// trading-day sequence in either direction.
    pub fn trading_day_offset(
        &self,
        base: NaiveDate,
        offset: i32,
    ) -> Result<NaiveDate, CalendarError> {
        self.check_coverage(base)?;
        let mut d = base;
        let mut remaining = offset.abs();
        while remaining > 0 {
            d = if offset > 0 {
                self.next_trading_day(d)?
            } else {
                self.prev_trading_day(d)?
            };
            remaining -= 1;
        }
        Ok(d)
    }

    /// Count trading days strictly after `a`, up to and including `b`.
    pub fn business_days_between(
        &self,
        a: NaiveDate,
        b: NaiveDate,
    ) -> Result<u32, CalendarError> {
        if a > b {
            return Err(CalendarError::InvertedRange { a, b });
        }
        self.check_coverage(a)?;
        self.check_coverage(b)?;
        let mut count = 0;
        let mut d = a + Duration::days(1);
        while d <= b {
            if self.is_trading_day(d) {
                count += 1;
            }
            d += Duration::days(1);
        }
        Ok(count)
    }

    /// The exchange-local calendar date of an instant.
    pub fn local_date(&self, ts: DateTime<Utc>) -> NaiveDate {
        ts.with_timezone(&self.timezone).date_naive()
    }

    /// Session open as an instant, for a given local trading date.
    pub fn session_open_utc(&self, date: NaiveDate) -> DateTime<Utc> {
        self.local_instant(date, self.session_open)
    }

    /// Session close as an instant, for a given local trading date.
    pub fn session_close_utc(&self, date: NaiveDate) -> DateTime<Utc> {
        self.local_instant(date, self.session_close)
    }

    fn local_instant(&self, date: NaiveDate, time: NaiveTime) -> DateTime<Utc> {
        // DST transitions happen in the small hours on every exchange zone;
        // take the earliest mapping if the wall-clock time is ambiguous.
        self.timezone
            .from_local_datetime(&date.and_time(time))
            .earliest()
            .expect("session time does not exist in timezone")
            .with_timezone(&Utc)
    }

    /// Classify an instant as pre-market, in-session (with minute offset),
    /// post-market, or non-trading-day, on this exchange.
    pub fn classify(&self, ts: DateTime<Utc>) -> Result<TimeOfDay, CalendarError> {
        let local = ts.with_timezone(&self.timezone);
        let date = local.date_naive();
        self.check_coverage(date)?;
        if !self.is_trading_day(date) {
            return Ok(TimeOfDay::NonTradingDay);
        }
        let t = local.time();
        if t < self.session_open {
            Ok(TimeOfDay::PreMarket)
        } else if t >= self.session_close {
            Ok(TimeOfDay::PostMarket)
        } else {
            let offset = (t - self.session_open).num_minutes() as u32;
            Ok(TimeOfDay::InSession {
                offset_minutes: offset,
            })
        }
    }

    /// The trading date an event timestamped `ts` belongs to: the same local
    /// date for pre-market and in-session timestamps, the next session for
    /// post-close and non-trading-day timestamps.
    pub fn event_day(&self, ts: DateTime<Utc>) -> Result<NaiveDate, CalendarError> {
        let date = self.local_date(ts);
        match self.classify(ts)? {
            TimeOfDay::PreMarket | TimeOfDay::InSession { .. } => Ok(date),
            TimeOfDay::PostMarket | TimeOfDay::NonTradingDay => self.next_trading_day(date),
        }
    }

    /// Snap an instant forward to the start of the first full 5-minute bar at
    /// or after it: the anchor bar ("minute 0") of the intraday event grid.
    ///
    /// Pre-market snaps to the session open; post-close and non-trading
    /// timestamps snap to the next session's open; an in-session timestamp
    /// with no full bar left before the close also rolls to the next session.
    pub fn grid_anchor(&self, ts: DateTime<Utc>) -> Result<DateTime<Utc>, CalendarError> {
        match self.classify(ts)? {
            TimeOfDay::PreMarket => Ok(self.session_open_utc(self.local_date(ts))),
            TimeOfDay::PostMarket | TimeOfDay::NonTradingDay => {
                let next = self.next_trading_day(self.local_date(ts))?;
                Ok(self.session_open_utc(next))
            }
            TimeOfDay::InSession { .. } => {
                let date = self.local_date(ts);
                let open = self.session_open_utc(date);
                let close = self.session_close_utc(date);
                let elapsed_secs = (ts - open).num_seconds();
                let bar_secs = BAR_MINUTES * 60;
                let k = (elapsed_secs + bar_secs - 1) / bar_secs; // ceil
                let anchor = open + Duration::seconds(k * bar_secs);
                if anchor + Duration::minutes(BAR_MINUTES) <= close {
                    Ok(anchor)
                } else {
                    let next = self.next_trading_day(date)?;
                    Ok(self.session_open_utc(next))
                }
            }
        }
    }

    /// Bar-start instants of one session, on the 5-minute grid from open.
    pub fn session_bar_starts(&self, date: NaiveDate) -> Vec<DateTime<Utc>> {
        let open = self.session_open_utc(date);
        let close = self.session_close_utc(date);
        let mut out = Vec::new();
        let mut t = open;
        while t + Duration::minutes(BAR_MINUTES) <= close {
            out.push(t);
            t += Duration::minutes(BAR_MINUTES);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nyse_like() -> ExchangeCalendar {
        ExchangeCalendar::new(
            "XTEST",
            chrono_tz::America::New_York,
            NaiveTime::from_hms_opt(9, 30, 0).unwrap(),
            NaiveTime::from_hms_opt(16, 0, 0).unwrap(),
            [NaiveDate::from_ymd_opt(2021, 7, 5).unwrap()],
        )
        .unwrap()
    }

    fn utc_cal() -> ExchangeCalendar {
        ExchangeCalendar::new(
            "XUTC",
            chrono_tz::UTC,
            NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
            NaiveTime::from_hms_opt(17, 0, 0).unwrap(),
            [],
        )
        .unwrap()
    }

    fn utc_ts(y: i32, m: u32, d: u32, hh: u32, mm: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, hh, mm, 0).unwrap()
    }

    #[test]
    fn rejects_inverted_session() {
        let r = ExchangeCalendar::new(
            "X",
            chrono_tz::UTC,
            NaiveTime::from_hms_opt(17, 0, 0).unwrap(),
            NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
            [],
        );
        assert!(r.is_err());
    }

    #[test]
    fn classify_before_open_is_premarket() {
        let cal = utc_cal();
        // Monday 2021-03-01, 08:30 = open - 30min
        let c = cal.classify(utc_ts(2021, 3, 1, 8, 30)).unwrap();
        assert_eq!(c, TimeOfDay::PreMarket);
    }

    #[test]
    fn classify_first_hour_boundary() {
        let cal = utc_cal();
        let c = cal.classify(utc_ts(2021, 3, 1, 9, 59)).unwrap();
        assert_eq!(c, TimeOfDay::InSession { offset_minutes: 59 });
        let c = cal.classify(utc_ts(2021, 3, 1, 10, 1)).unwrap();
        assert_eq!(c, TimeOfDay::InSession { offset_minutes: 61 });
    }

    #[test]
    fn classify_holiday_is_non_trading() {
        let cal = nyse_like();
        // 2021-07-05 listed as holiday; noon local.
        let c = cal.classify(utc_ts(2021, 7, 5, 16, 0)).unwrap();
        assert_eq!(c, TimeOfDay::NonTradingDay);
    }

    #[test]
    fn classify_respects_exchange_timezone() {
        let cal = nyse_like();
        // 14:30 UTC = 09:30 EST (winter) = session open.
        let c = cal.classify(utc_ts(2021, 1, 4, 14, 30)).unwrap();
        assert_eq!(c, TimeOfDay::InSession { offset_minutes: 0 });
        // 14:30 UTC = 10:30 EDT in summer.
        let c = cal.classify(utc_ts(2021, 6, 7, 14, 30)).unwrap();
        assert_eq!(c, TimeOfDay::InSession { offset_minutes: 60 });
    }

    #[test]
    fn business_days_adjacent_and_weekend() {
        let cal = utc_cal();
        let mon = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
        let tue = NaiveDate::from_ymd_opt(2021, 3, 2).unwrap();
        let fri = NaiveDate::from_ymd_opt(2021, 3, 5).unwrap();
        let next_mon = NaiveDate::from_ymd_opt(2021, 3, 8).unwrap();
        assert_eq!(cal.business_days_between(mon, tue).unwrap(), 1);
        assert_eq!(cal.business_days_between(fri, next_mon).unwrap(), 1);
        assert_eq!(cal.business_days_between(mon, mon).unwrap(), 0);
        assert!(cal.business_days_between(tue, mon).is_err());
    }

    #[test]
    fn coverage_gap_reported() {
        let cal = utc_cal().with_coverage(
            NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(),
            NaiveDate::from_ymd_opt(2021, 12, 31).unwrap(),
        );
        let r = cal.classify(utc_ts(2022, 1, 3, 10, 0));
        assert!(matches!(r, Err(CalendarError::OutsideCoverage { .. })));
    }

    #[test]
    fn event_day_rolls_post_close_forward() {
        let cal = utc_cal();
        // Friday 18:00 is post-close; event day = Monday.
        let d = cal.event_day(utc_ts(2021, 3, 5, 18, 0)).unwrap();
        assert_eq!(d, NaiveDate::from_ymd_opt(2021, 3, 8).unwrap());
        // Saturday noon -> Monday.
        let d = cal.event_day(utc_ts(2021, 3, 6, 12, 0)).unwrap();
        assert_eq!(d, NaiveDate::from_ymd_opt(2021, 3, 8).unwrap());
        // In-session stays put.
        let d = cal.event_day(utc_ts(2021, 3, 5, 10, 0)).unwrap();
        assert_eq!(d, NaiveDate::from_ymd_opt(2021, 3, 5).unwrap());
    }

    #[test]
    fn grid_anchor_snaps_forward() {
        let cal = utc_cal();
        // 09:31 -> next full bar starts 09:35.
        let a = cal.grid_anchor(utc_ts(2021, 3, 1, 9, 31)).unwrap();
        assert_eq!(a, utc_ts(2021, 3, 1, 9, 35));
        // Exactly on the grid stays.
        let a = cal.grid_anchor(utc_ts(2021, 3, 1, 9, 35)).unwrap();
        assert_eq!(a, utc_ts(2021, 3, 1, 9, 35));
        // Pre-market -> open.
        let a = cal.grid_anchor(utc_ts(2021, 3, 1, 7, 0)).unwrap();
        assert_eq!(a, utc_ts(2021, 3, 1, 9, 0));
        // One minute before close: no full bar left, roll to next open.
        let a = cal.grid_anchor(utc_ts(2021, 3, 1, 16, 59)).unwrap();
        assert_eq!(a, utc_ts(2021, 3, 2, 9, 0));
    }

    #[test]
    fn session_bar_count() {
        let cal = utc_cal(); // 8h session = 96 bars
        let bars = cal.session_bar_starts(NaiveDate::from_ymd_opt(2021, 3, 1).unwrap());
        assert_eq!(bars.len(), 96);
        assert_eq!(bars[0], utc_ts(2021, 3, 1, 9, 0));
        assert_eq!(*bars.last().unwrap(), utc_ts(2021, 3, 1, 16, 55));
    }

    #[test]
    fn trading_day_offset_walks_both_ways() {
        let cal = utc_cal();
        let fri = NaiveDate::from_ymd_opt(2021, 3, 5).unwrap();
        assert_eq!(
            cal.trading_day_offset(fri, 1).unwrap(),
            NaiveDate::from_ymd_opt(2021, 3, 8).unwrap()
        );
        assert_eq!(
            cal.trading_day_offset(fri, -5).unwrap(),
            NaiveDate::from_ymd_opt(2021, 2, 26).unwrap()
        );
        assert_eq!(cal.trading_day_offset(fri, 0).unwrap(), fri);
    }

    proptest! {
        // classify() is total over covered dates and the classes partition
        // the day: every minute maps to exactly one class, and in-session
        // offsets tile [0, session length).
        #[test]
        fn classification_partitions_the_day(minute in 0u32..1440) {
            let cal = utc_cal();
            let ts = utc_ts(2021, 3, 3, minute / 60, minute % 60);
            let c = cal.classify(ts).unwrap();
            let expected = if minute < 9 * 60 {
                TimeOfDay::PreMarket
            } else if minute < 17 * 60 {
                TimeOfDay::InSession { offset_minutes: minute - 9 * 60 }
            } else {
                TimeOfDay::PostMarket
            };
            prop_assert_eq!(c, expected);
        }

        // business_days_between is additive over a <= b <= c.
        #[test]
        fn business_days_additive(a in 0i64..200, d1 in 0i64..100, d2 in 0i64..100) {
            let cal = utc_cal();
            let base = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
            let x = base + Duration::days(a);
            let y = x + Duration::days(d1);
            let z = y + Duration::days(d2);
            let xy = cal.business_days_between(x, y).unwrap();
            let yz = cal.business_days_between(y, z).unwrap();
            let xz = cal.business_days_between(x, z).unwrap();
            prop_assert_eq!(xy + yz, xz);
        }
    }
}
