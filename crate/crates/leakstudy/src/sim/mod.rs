//! Deterministic synthetic-market generator.
//!
//! Generates a complete input dataset — factor paths, a market index, a
//! cross-section of securities with known loadings, bond announcements with
//! matching leak headlines, fundamentals, FX, and a calendar — in the exact
//! file formats ingest reads. Event effects (return shocks in basis points,
//! volume multipliers) are injected at chosen offsets relative to the event
//! day, so estimators can be validated against their construction.
//!
//! All randomness flows from one seed through the counter-based generator in
//! [`rng`]; identical specs produce byte-identical datasets.

pub mod rng;

use crate::factor::{abnormal_return, fit_model, AnchorRole, ModelKind, ModelSpec};
use crate::ingest::FundamentalsRow;
use crate::leak::{BondRecord, Headline};
use crate::model::{
    Currency, DailyBar, ExchangeCalendar, FactorRow, IntradayBar, Region, ReturnObservation,
    SectorClass, Security, Ticker,
};
use chrono::{Datelike, Duration, NaiveDate, NaiveTime};
use rng::{mix64, CounterRng};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("bad spec: {0}")]
    BadSpec(String),
    #[error("spec line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("power/size needs at least 100 trials, got {0}")]
    TooFewTrials(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Synthetic world parameters. Parsed from a plain `key=value` spec file.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub seed: u64,
    pub n_securities: usize,
    /// Trading days of daily history.
    pub n_days: usize,
    pub intraday: bool,
    /// Market loading; security i gets `beta + beta_spread·u_i`, u ∈ [-1, 1).
    pub beta: f64,
    pub beta_spread: f64,
    pub smb_loading: f64,
    pub hml_loading: f64,
    pub mom_loading: f64,
    /// Daily idiosyncratic return standard deviation.
    pub sigma: f64,
    pub market_sigma: f64,
    pub factor_sigma: f64,
    pub rf_daily: f64,
    pub base_volume: u64,
    pub volume_sigma: f64,
    pub shares_outstanding: u64,
    /// Index into the trading-day sequence where every event's day 0 lands.
    pub event_day_index: usize,
    /// Leak timestamp in minutes relative to session open (negative =
    /// pre-market).
    pub leak_minute: i64,
    /// Business days between the leak day and the announcement.
    pub announce_gap_days: u32,
    /// (relative trading day, shock in basis points) on security returns.
    pub return_injections: Vec<(i32, f64)>,
    /// (relative trading day, multiplier) on daily volumes.
    pub volume_injections: Vec<(i32, f64)>,
    /// (bar offset from the anchor bar, shock in basis points), intraday.
    pub intraday_return_injections: Vec<(i32, f64)>,
    /// (bar offset from the anchor bar, multiplier), intraday.
    pub intraday_volume_injections: Vec<(i32, f64)>,
    /// Sessions of intraday data generated before/after the event session.
    pub intraday_sessions_before: usize,
    pub intraday_sessions_after: usize,
    pub financial_fraction: f64,
    pub start_date: NaiveDate,
}

impl Default for SimSpec {
    fn default() -> Self {
        SimSpec {
            seed: 42,
            n_securities: 50,
            n_days: 340,
            intraday: false,
            beta: 1.0,
            beta_spread: 0.0,
            smb_loading: 0.0,
            hml_loading: 0.0,
            mom_loading: 0.0,
            sigma: 0.02,
            market_sigma: 0.01,
            factor_sigma: 0.004,
            rf_daily: 0.0001,
            base_volume: 50_000,
            volume_sigma: 0.3,
            shares_outstanding: 10_000_000,
            event_day_index: 310,
            leak_minute: 30,
            announce_gap_days: 2,
            return_injections: Vec::new(),
            volume_injections: Vec::new(),
            intraday_return_injections: Vec::new(),
            intraday_volume_injections: Vec::new(),
            intraday_sessions_before: 2,
            intraday_sessions_after: 1,
            financial_fraction: 0.5,
            start_date: NaiveDate::from_ymd_opt(2020, 1, 6).unwrap(),
        }
    }
}

impl SimSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_securities == 0 {
            return Err(SimError::BadSpec("n_securities must be positive".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(SimError::BadSpec(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.event_day_index + self.announce_gap_days as usize + 31 > self.n_days {
            return Err(SimError::BadSpec(format!(
                "n_days {} leaves no room for the event window after day index {}",
                self.n_days, self.event_day_index
            )));
        }
        let all_finite = self
            .return_injections
            .iter()
            .chain(&self.intraday_return_injections)
            .all(|(_, v)| v.is_finite())
            && self
                .volume_injections
                .iter()
                .chain(&self.intraday_volume_injections)
                .all(|(_, v)| v.is_finite() && *v >= 0.0);
        if !all_finite {
            return Err(SimError::BadSpec("injections must be finite (multipliers non-negative)".into()));
        }
        Ok(())
    }

    /// Parse the plain-text `key=value` spec format. Unknown keys are
    /// rejected; `#` starts a comment. Injection lists are
    /// `offset:value;offset:value`.
    pub fn parse(text: &str) -> Result<SimSpec, SimError> {
        let mut spec = SimSpec::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| SimError::Parse {
                line: idx + 1,
                message: format!("expected key=value, got {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let err = |message: String| SimError::Parse { line: idx + 1, message };
            macro_rules! set {
                ($field:ident, $ty:ty) => {
                    spec.$field = value
                        .parse::<$ty>()
                        .map_err(|e| err(format!("{key}: {e}")))?
                };
            }
            match key {
                "seed" => set!(seed, u64),
                "securities" => set!(n_securities, usize),
                "days" => set!(n_days, usize),
                "intraday" => set!(intraday, bool),
                "beta" => set!(beta, f64),
                "beta_spread" => set!(beta_spread, f64),
                "smb_loading" => set!(smb_loading, f64),
                "hml_loading" => set!(hml_loading, f64),
                "mom_loading" => set!(mom_loading, f64),
                "sigma" => set!(sigma, f64),
                "market_sigma" => set!(market_sigma, f64),
                "factor_sigma" => set!(factor_sigma, f64),
                "rf_daily" => set!(rf_daily, f64),
                "base_volume" => set!(base_volume, u64),
                "volume_sigma" => set!(volume_sigma, f64),
                "shares_outstanding" => set!(shares_outstanding, u64),
                "event_day_index" => set!(event_day_index, usize),
                "leak_minute" => set!(leak_minute, i64),
                "announce_gap_days" => set!(announce_gap_days, u32),
                "financial_fraction" => set!(financial_fraction, f64),
                "intraday_sessions_before" => set!(intraday_sessions_before, usize),
                "intraday_sessions_after" => set!(intraday_sessions_after, usize),
                "start_date" => set!(start_date, NaiveDate),
                "inject_return_bp" => {
                    spec.return_injections = parse_injections(value).map_err(err)?
                }
                "inject_volume_mult" => {
                    spec.volume_injections = parse_injections(value).map_err(err)?
                }
                "inject_intraday_return_bp" => {
                    spec.intraday_return_injections = parse_injections(value).map_err(err)?
                }
                "inject_intraday_volume_mult" => {
                    spec.intraday_volume_injections = parse_injections(value).map_err(err)?
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    /// The spec rendered back to the key=value format.
    pub fn to_spec_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "securities={}", self.n_securities);
        let _ = writeln!(s, "days={}", self.n_days);
        let _ = writeln!(s, "intraday={}", self.intraday);
        let _ = writeln!(s, "beta={}", self.beta);
        let _ = writeln!(s, "sigma={}", self.sigma);
        let _ = writeln!(s, "event_day_index={}", self.event_day_index);
        if !self.return_injections.is_empty() {
            let _ = writeln!(s, "inject_return_bp={}", render_injections(&self.return_injections));
        }
        if !self.volume_injections.is_empty() {
            let _ = writeln!(s, "inject_volume_mult={}", render_injections(&self.volume_injections));
        }
        s
    }
}

fn parse_injections(value: &str) -> Result<Vec<(i32, f64)>, String> {
    let mut out = Vec::new();
    for piece in value.split(';').filter(|p| !p.trim().is_empty()) {
        let (off, v) = piece
            .split_once(':')
            .ok_or_else(|| format!("expected offset:value, got {piece:?}"))?;
        out.push((
            off.trim().parse::<i32>().map_err(|e| e.to_string())?,
            v.trim().parse::<f64>().map_err(|e| e.to_string())?,
        ));
    }
    Ok(out)
}

fn render_injections(list: &[(i32, f64)]) -> String {
    list.iter()
        .map(|(o, v)| format!("{o}:{v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// The generated world, both as typed records and ready to serialize.
#[derive(Debug, Clone)]
pub struct SimData {
    pub spec: SimSpec,
    pub trading_days: Vec<NaiveDate>,
    pub calendar: ExchangeCalendar,
    pub securities: Vec<Security>,
    pub factors: Vec<FactorRow>,
    /// Daily bars per ticker, market index included under `MKT`.
    pub daily: BTreeMap<Ticker, Vec<DailyBar>>,
    pub intraday: BTreeMap<Ticker, Vec<IntradayBar>>,
    pub headlines: Vec<Headline>,
    pub announcements: Vec<BondRecord>,
    pub fundamentals: BTreeMap<Ticker, Vec<FundamentalsRow>>,
    /// Simple returns per security per day index (for direct validation).
    pub security_returns: Vec<Vec<f64>>,
    /// Market simple returns per day index.
    pub market_returns: Vec<f64>,
}

pub const SIM_EXCHANGE: &str = "XSIM";
pub const SIM_REGION: &str = "SIM";
pub const MARKET_TICKER: &str = "MKT";

fn sim_calendar() -> ExchangeCalendar {
    ExchangeCalendar::new(
        SIM_EXCHANGE,
        chrono_tz::UTC,
        NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
        NaiveTime::from_hms_opt(17, 0, 0).unwrap(),
        [],
    )
    .expect("static session times")
}

fn ticker_for(i: usize) -> Ticker {
    Ticker::new(format!("S{:04}", i + 1))
}

/// Generate the synthetic world for a spec.
pub fn generate(spec: &SimSpec) -> Result<SimData, SimError> {
    spec.validate()?;
    let calendar = sim_calendar();

    // Trading-day sequence.
    let mut trading_days = Vec::with_capacity(spec.n_days);
    let mut d = spec.start_date;
    while trading_days.len() < spec.n_days {
        if calendar.is_trading_day(d) {
            trading_days.push(d);
        }
        d += Duration::days(1);
    }

    // Factor paths, streams 1-4; risk-free is flat.
    let mut market_rng = CounterRng::new(spec.seed, 1);
    let mut smb_rng = CounterRng::new(spec.seed, 2);
    let mut hml_rng = CounterRng::new(spec.seed, 3);
    let mut mom_rng = CounterRng::new(spec.seed, 4);
    let factors: Vec<FactorRow> = trading_days
        .iter()
        .map(|&date| FactorRow {
            date,
            mkt_rf: market_rng.next_gaussian(0.0, spec.market_sigma),
            smb: smb_rng.next_gaussian(0.0, spec.factor_sigma),
            hml: hml_rng.next_gaussian(0.0, spec.factor_sigma),
            mom: Some(mom_rng.next_gaussian(0.0, spec.factor_sigma)),
            rf: spec.rf_daily,
        })
        .collect();
    let market_returns: Vec<f64> = factors.iter().map(|f| f.rf + f.mkt_rf).collect();

    let mut daily: BTreeMap<Ticker, Vec<DailyBar>> = BTreeMap::new();

    // Market index bars.
    let market_bars = price_path(&trading_days, &market_returns, 1000.0, |_| 0, 1);
    daily.insert(Ticker::new(MARKET_TICKER), market_bars);

    // Securities.
    let event_idx = spec.event_day_index;
    let mut securities = Vec::with_capacity(spec.n_securities);
    let mut security_returns = Vec::with_capacity(spec.n_securities);
    let mut fundamentals = BTreeMap::new();
    let mut announcements = Vec::new();
    let mut headlines = Vec::new();

    let leak_day = trading_days[event_idx];
    let leak_ts = calendar.session_open_utc(leak_day) + Duration::minutes(spec.leak_minute);
    let announce_date = calendar
        .trading_day_offset(leak_day, spec.announce_gap_days as i32)
        .expect("within generated range");

    for i in 0..spec.n_securities {
        let ticker = ticker_for(i);
        let mut ret_rng = CounterRng::new(spec.seed, 100 + i as u64);
        let mut vol_rng = CounterRng::new(spec.seed, 10_000 + i as u64);
        let mut misc_rng = CounterRng::new(spec.seed, 20_000 + i as u64);

        let beta_i = spec.beta + spec.beta_spread * (2.0 * misc_rng.next_uniform() - 1.0);
        let financial = (i as f64 + 0.5) / spec.n_securities as f64 <= spec.financial_fraction;

        // Daily returns under the true model, with injected shocks.
        let mut returns = Vec::with_capacity(spec.n_days);
        for (k, f) in factors.iter().enumerate() {
            let mut r = f.rf
                + beta_i * f.mkt_rf
                + spec.smb_loading * f.smb
                + spec.hml_loading * f.hml
                + spec.mom_loading * f.mom.unwrap()
                + ret_rng.next_gaussian(0.0, spec.sigma);
            let rel = k as i64 - event_idx as i64;
            for &(off, bp) in &spec.return_injections {
                if i64::from(off) == rel {
                    r += bp * 1e-4;
                }
            }
            returns.push(r);
        }

        // Daily volumes, lognormal around the base with injected multipliers.
        let volumes: Vec<u64> = (0..spec.n_days)
            .map(|k| {
                let z = vol_rng.next_normal();
                let mut v = spec.base_volume as f64
                    * (spec.volume_sigma * z - 0.5 * spec.volume_sigma * spec.volume_sigma).exp();
                let rel = k as i64 - event_idx as i64;
                for &(off, mult) in &spec.volume_injections {
                    if i64::from(off) == rel {
                        v *= mult;
                    }
                }
                v.round().max(1.0) as u64
            })
            .collect();

        let bars = price_path(&trading_days, &returns, 100.0, |k| volumes[k], spec.shares_outstanding);
        daily.insert(ticker.clone(), bars);

        securities.push(Security {
            ticker: ticker.clone(),
            exchange_id: SIM_EXCHANGE.to_owned(),
            region: Region::new(SIM_REGION),
            sector_class: if financial {
                SectorClass::Financial
            } else {
                SectorClass::NonFinancial
            },
            currency: Currency::usd(),
            market_ticker: Ticker::new(MARKET_TICKER),
        });

        // One announcement per security, leaked `announce_gap_days` early.
        let amount = 50.0 + 950.0 * misc_rng.next_uniform();
        let coupon = 4.0 * misc_rng.next_uniform();
        let has_option = misc_rng.next_uniform() < 0.4;
        announcements.push(BondRecord {
            ticker: ticker.clone(),
            announce_date,
            currency: Currency::usd(),
            amount,
            maturity_date: Some(announce_date + Duration::days(365 * 5)),
            perpetual: false,
            coupon_pct: coupon,
            has_option,
            yield_rate: None,
        });
        headlines.push(Headline {
            feed: "BN".to_owned(),
            ts: leak_ts,
            text: format!("Mandate for Green Bond issue by {ticker}"),
            article_chars: 500,
            tickers: vec![ticker.clone()],
            green_label: true,
        });

        // Three fiscal years before the event year.
        let event_year = leak_day.year();
        let rows: Vec<FundamentalsRow> = (1..=3)
            .map(|back| {
                let assets = 1_000.0 + 50_000.0 * misc_rng.next_uniform();
                FundamentalsRow {
                    fiscal_year: event_year - back,
                    mktcap: assets * (0.2 + misc_rng.next_uniform()),
                    assets,
                    roa: misc_rng.next_gaussian(3.0, 2.0),
                    de: misc_rng.next_uniform() * 4.0,
                    fcf: misc_rng.next_gaussian(1_000.0, 4_000.0),
                    first_time_issuer: misc_rng.next_uniform() < 0.5,
                }
            })
            .collect();
        fundamentals.insert(ticker, rows);
        security_returns.push(returns);
    }

    // Intraday bars for sessions around the event, when requested.
    let mut intraday = BTreeMap::new();
    if spec.intraday {
        let from = event_idx.saturating_sub(spec.intraday_sessions_before);
        let to = (event_idx + spec.intraday_sessions_after).min(spec.n_days - 1);
        let anchor_ts = calendar.grid_anchor(leak_ts).expect("leak within coverage");

        for (si, sec) in securities.iter().enumerate() {
            let mut bar_rng = CounterRng::new(spec.seed, 30_000 + si as u64);
            let day_bars = &daily[&sec.ticker];
            let mut bars = Vec::new();
            for day_idx in from..=to {
                let date = trading_days[day_idx];
                let starts = calendar.session_bar_starts(date);
                let n_bars = starts.len() as f64;
                let mut price = if day_idx == 0 {
                    100.0
                } else {
                    day_bars[day_idx - 1].close
                };
                for ts in starts {
                    let bar_offset = ((ts - anchor_ts).num_minutes() / 5) as i32;
                    let mut r = bar_rng.next_gaussian(0.0, spec.sigma / n_bars.sqrt());
                    for &(off, bp) in &spec.intraday_return_injections {
                        if off == bar_offset {
                            r += bp * 1e-4;
                        }
                    }
                    price *= 1.0 + r;
                    let z = bar_rng.next_normal();
                    let mut v = spec.base_volume as f64 / n_bars
                        * (spec.volume_sigma * z - 0.5 * spec.volume_sigma * spec.volume_sigma).exp();
                    for &(off, mult) in &spec.intraday_volume_injections {
                        if off == bar_offset {
                            v *= mult;
                        }
                    }
                    bars.push(IntradayBar {
                        ts,
                        price,
                        volume: v.round().max(0.0) as u64,
                    });
                }
            }
            intraday.insert(sec.ticker.clone(), bars);
        }

        // Market index intraday path (no injections).
        let mut bar_rng = CounterRng::new(spec.seed, 29_999);
        let mkt_daily = &daily[&Ticker::new(MARKET_TICKER)];
        let mut bars = Vec::new();
        for day_idx in from..=to {
            let date = trading_days[day_idx];
            let starts = calendar.session_bar_starts(date);
            let n_bars = starts.len() as f64;
            let mut price = if day_idx == 0 { 1000.0 } else { mkt_daily[day_idx - 1].close };
            for ts in starts {
                price *= 1.0 + bar_rng.next_gaussian(0.0, spec.market_sigma / n_bars.sqrt());
                bars.push(IntradayBar { ts, price, volume: 0 });
            }
        }
        intraday.insert(Ticker::new(MARKET_TICKER), bars);
    }

    Ok(SimData {
        spec: spec.clone(),
        trading_days,
        calendar,
        securities,
        factors,
        daily,
        intraday,
        headlines,
        announcements,
        fundamentals,
        security_returns,
        market_returns,
    })
}

fn price_path(
    days: &[NaiveDate],
    returns: &[f64],
    start_price: f64,
    volume_at: impl Fn(usize) -> u64,
    shares: u64,
) -> Vec<DailyBar> {
    let mut price = start_price;
    days.iter()
        .zip(returns)
        .enumerate()
        .map(|(k, (&date, &r))| {
            price *= 1.0 + r;
            DailyBar {
                date,
                close: price,
                volume: volume_at(k),
                shares_outstanding: shares,
            }
        })
        .collect()
}

/// Per-security abnormal returns at one relative trading day under a model,
/// computed straight from the generated series (market-adjusted) or from a
/// per-security fit over the leak estimation window.
pub fn event_ars(data: &SimData, model: ModelKind, offset: i32) -> Vec<f64> {
    let day = (data.spec.event_day_index as i64 + i64::from(offset)) as usize;
    let spec = ModelSpec::for_anchor(model, AnchorRole::Leak);
    let mut out = Vec::with_capacity(data.securities.len());
    for (i, _sec) in data.securities.iter().enumerate() {
        let obs_at = |k: usize| ReturnObservation {
            r_i: data.security_returns[i][k],
            r_m: data.market_returns[k],
            rf: data.factors[k].rf,
            smb: Some(data.factors[k].smb),
            hml: Some(data.factors[k].hml),
            mom: data.factors[k].mom,
        };
        let ar = if model.needs_estimation() {
            let (w0, w1) = spec.estimation_window.unwrap();
            let from = (data.spec.event_day_index as i64 + i64::from(w0)).max(0) as usize;
            let to = (data.spec.event_day_index as i64 + i64::from(w1)).max(0) as usize;
            let window: Vec<ReturnObservation> = (from..=to).map(obs_at).collect();
            let fit = fit_model(&spec, &window).expect("generated history is long enough");
            abnormal_return(&fit, &obs_at(day)).expect("factors present")
        } else {
            let o = obs_at(day);
            o.r_i - o.r_m
        };
        out.push(ar);
    }
    out
}

/// Empirical power and size of the event-study t-test over seeded trials.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSizeRow {
    pub model: ModelKind,
    pub offset: i32,
    pub shock_bp: f64,
    /// Rejection rate with the shock injected.
    pub power: f64,
    /// Rejection rate with injections removed (empirical size).
    pub size: f64,
}

/// Run `trials` seeded generations and report rejection rates of the
/// one-sided AAR t-test (fixed direction: the shock's sign) at level
/// `alpha`, for each injected return shock. Needs at least 100 trials.
pub fn power_size(
    spec: &SimSpec,
    model: ModelKind,
    alpha: f64,
    trials: usize,
) -> Result<Vec<PowerSizeRow>, SimError> {
    if trials < 100 {
        return Err(SimError::TooFewTrials(trials));
    }
    spec.validate()?;
    if spec.return_injections.is_empty() {
        return Err(SimError::BadSpec("power_size needs at least one return injection".into()));
    }

    let mut rows = Vec::new();
    for &(offset, shock_bp) in &spec.return_injections {
        let direction = if shock_bp < 0.0 { -1.0 } else { 1.0 };
        let mut reject_shock = 0usize;
        let mut reject_null = 0usize;
        for trial in 0..trials {
            let trial_seed = mix64(spec.seed ^ mix64(0x7472_6961_6c00 + trial as u64));
            let mut shocked = spec.clone();
            shocked.seed = trial_seed;
            let mut null = shocked.clone();
            null.return_injections.clear();
            null.volume_injections.clear();

            for (s, counter) in [(&shocked, &mut reject_shock), (&null, &mut reject_null)] {
                let data = generate(s)?;
                let ars = event_ars(&data, model, offset);
                if rejects_one_sided(&ars, direction, alpha) {
                    *counter += 1;
                }
            }
        }
        rows.push(PowerSizeRow {
            model,
            offset,
            shock_bp,
            power: reject_shock as f64 / trials as f64,
            size: reject_null as f64 / trials as f64,
        });
    }
    Ok(rows)
}

/// Fixed-direction one-sided t-test at level `alpha` on a cross-section.
pub fn rejects_one_sided(values: &[f64], direction: f64, alpha: f64) -> bool {
    let Some(cell) = crate::study::cross_section_cell(values, false) else {
        return false;
    };
    let (Some(t), _) = (cell.t_stat, cell.p_value) else {
        return false;
    };
    let directed = t * direction.signum();
    if !directed.is_finite() {
        return directed > 0.0;
    }
    crate::study::one_sided_p(directed.abs(), (cell.n - 1) as f64) < alpha && directed > 0.0
}

// ---------------------------------------------------------------------------
// File output, in the exact ingest formats
// ---------------------------------------------------------------------------

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> std::io::Result<()> {
    let mut out = String::with_capacity(4096);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    std::fs::write(path, out)
}

impl SimData {
    /// Write the dataset into a directory as the standard input files.
    /// Returns the paths written, in a stable order.
    pub fn write_files(&self, dir: &Path) -> Result<Vec<PathBuf>, SimError> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut emit = |name: &str, header: &str, rows: Vec<String>| -> Result<(), SimError> {
            let path = dir.join(name);
            write_csv(&path, header, rows.into_iter())?;
            written.push(path);
            Ok(())
        };

        emit(
            "securities.csv",
            "ticker,exchange_id,region,currency,industry,market_ticker",
            self.securities
                .iter()
                .map(|s| {
                    let industry = match s.sector_class {
                        SectorClass::Financial => "bank",
                        SectorClass::NonFinancial => "utilities",
                    };
                    format!(
                        "{},{},{},{},{industry},{}",
                        s.ticker, s.exchange_id, s.region, s.currency, s.market_ticker
                    )
                })
                .collect(),
        )?;

        emit(
            "calendar.csv",
            "exchange_id,timezone,open,close,holiday_dates",
            vec![format!("{SIM_EXCHANGE},UTC,09:00:00,17:00:00,")],
        )?;

        emit(
            "prices_daily.csv",
            "ticker,date,close,volume,shares_outstanding",
            self.daily
                .iter()
                .flat_map(|(t, bars)| {
                    bars.iter().map(move |b| {
                        format!("{t},{},{},{},{}", b.date, b.close, b.volume, b.shares_outstanding)
                    })
                })
                .collect(),
        )?;

        if !self.intraday.is_empty() {
            emit(
                "prices_intraday.csv",
                "ticker,timestamp,price,volume",
                self.intraday
                    .iter()
                    .flat_map(|(t, bars)| {
                        bars.iter().map(move |b| {
                            format!("{t},{},{},{}", b.ts.to_rfc3339(), b.price, b.volume)
                        })
                    })
                    .collect(),
            )?;
        }

        emit(
            "factors_sim.csv",
            "date,mkt_rf,smb,hml,mom,rf",
            self.factors
                .iter()
                .map(|f| {
                    format!(
                        "{},{},{},{},{},{}",
                        f.date,
                        f.mkt_rf,
                        f.smb,
                        f.hml,
                        f.mom.unwrap_or(0.0),
                        f.rf
                    )
                })
                .collect(),
        )?;

        emit(
            "headlines.csv",
            "feed,timestamp,headline,article_chars,tickers,green_label",
            self.headlines
                .iter()
                .map(|h| {
                    let tickers = h
                        .tickers
                        .iter()
                        .map(|t| t.as_str())
                        .collect::<Vec<_>>()
                        .join(";");
                    format!(
                        "{},{},{},{},{tickers},{}",
                        h.feed,
                        h.ts.to_rfc3339(),
                        h.text,
                        h.article_chars,
                        h.green_label
                    )
                })
                .collect(),
        )?;

        emit(
            "announcements.csv",
            "ticker,announce_date,currency,amount,maturity_date,perpetual,coupon_pct,has_option,yield",
            self.announcements
                .iter()
                .map(|b| {
                    format!(
                        "{},{},{},{},{},{},{},{},{}",
                        b.ticker,
                        b.announce_date,
                        b.currency,
                        b.amount,
                        b.maturity_date.map_or(String::new(), |d| d.to_string()),
                        b.perpetual,
                        b.coupon_pct,
                        b.has_option,
                        b.yield_rate.map_or(String::new(), |y| y.to_string()),
                    )
                })
                .collect(),
        )?;

        emit(
            "fundamentals.csv",
            "ticker,fiscal_year,mktcap,assets,roa,de,fcf,first_time_issuer",
            self.fundamentals
                .iter()
                .flat_map(|(t, rows)| {
                    rows.iter().map(move |r| {
                        format!(
                            "{t},{},{},{},{},{},{},{}",
                            r.fiscal_year, r.mktcap, r.assets, r.roa, r.de, r.fcf, r.first_time_issuer
                        )
                    })
                })
                .collect(),
        )?;

        emit(
            "fx.csv",
            "pair,timestamp,rate",
            vec![format!(
                "EURUSD,{}T00:00:00+00:00,1.1",
                self.spec.start_date
            )],
        )?;

        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_data() {
        let spec = SimSpec {
            n_securities: 5,
            n_days: 60,
            event_day_index: 20,
            ..Default::default()
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.security_returns, b.security_returns);
        assert_eq!(a.daily, b.daily);
    }

    #[test]
    fn seed_changes_data() {
        let spec = SimSpec {
            n_securities: 5,
            n_days: 60,
            event_day_index: 20,
            ..Default::default()
        };
        let mut other = spec.clone();
        other.seed = 43;
        let a = generate(&spec).unwrap();
        let b = generate(&other).unwrap();
        assert_ne!(a.security_returns, b.security_returns);
    }

    #[test]
    fn noiseless_null_has_zero_abnormal_returns() {
        let spec = SimSpec {
            n_securities: 4,
            n_days: 60,
            event_day_index: 20,
            sigma: 1e-12,
            beta: 1.0,
            beta_spread: 0.0,
            ..Default::default()
        };
        let data = generate(&spec).unwrap();
        for ar in event_ars(&data, ModelKind::MarketAdjusted, 0) {
            assert!(ar.abs() < 1e-9, "{ar}");
        }
    }

    #[test]
    fn injection_is_recovered_in_the_mean() {
        let spec = SimSpec {
            n_securities: 214,
            n_days: 60,
            event_day_index: 20,
            sigma: 0.02,
            return_injections: vec![(2, -21.0)],
            ..Default::default()
        };
        let data = generate(&spec).unwrap();
        let ars = event_ars(&data, ModelKind::MarketAdjusted, 2);
        let mean = ars.iter().sum::<f64>() / ars.len() as f64;
        let se = 0.02 / (214f64).sqrt();
        assert!((mean - (-0.0021)).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn volume_multiplier_recovered_as_ln2() {
        let spec = SimSpec {
            n_securities: 3,
            n_days: 60,
            event_day_index: 30,
            volume_sigma: 1e-9,
            volume_injections: vec![(0, 2.0)],
            ..Default::default()
        };
        let data = generate(&spec).unwrap();
        let bars = &data.daily[&ticker_for(0)];
        let event = data.spec.event_day_index;
        let tau_event = (bars[event].volume as f64 / bars[event].shares_outstanding as f64).ln();
        let tau_base = (bars[event - 1].volume as f64 / bars[event - 1].shares_outstanding as f64).ln();
        assert!((tau_event - tau_base - std::f64::consts::LN_2).abs() < 1e-4);
    }

    #[test]
    fn spec_parses_key_value_lines() {
        let text = "\
# synthetic world
seed=7
securities=12
days=80
event_day_index=40
sigma=0.01
inject_return_bp=2:-21;0:5
intraday=true
";
        let spec = SimSpec::parse(text).unwrap();
        assert_eq!(spec.seed, 7);
        assert_eq!(spec.n_securities, 12);
        assert_eq!(spec.return_injections, vec![(2, -21.0), (0, 5.0)]);
        assert!(spec.intraday);
    }

    #[test]
    fn spec_rejects_unknown_keys() {
        assert!(SimSpec::parse("bogus=1").is_err());
    }

    #[test]
    fn power_size_guards_trials() {
        let spec = SimSpec {
            return_injections: vec![(2, -50.0)],
            ..Default::default()
        };
        assert!(matches!(
            power_size(&spec, ModelKind::MarketAdjusted, 0.05, 0),
            Err(SimError::TooFewTrials(0))
        ));
    }
}
