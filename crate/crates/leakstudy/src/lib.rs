//! Event-study engine for news-leak detection around green bond announcements.
//!
//! The crate takes flat CSV inputs (prices, news headlines, bond announcements,
//! fundamentals, FX, exchange calendars), matches headlines to later
//! announcements to identify pre-announcement leaks, and measures the equity
//! market reaction around those leaks:
//!
//! * abnormal returns under four expected-return models (market-adjusted,
//!   CAPM, three-factor, four-factor), aggregated to AAR/CAAR panels with
//!   one-sided significance tests,
//! * abnormal trading volumes (log turnover against a pre-event baseline),
//!   aggregated to AAV/CAAV panels, on daily and 5-minute grids,
//! * cross-sectional regressions explaining per-event cumulative abnormal
//!   returns with bond- and firm-level covariates plus fixed effects.
//!
//! A deterministic synthetic-market generator ([`sim`]) produces full input
//! datasets with known factor loadings and injected event effects, so every
//! estimator can be validated against its construction.
//!
//! The accompanying `leakstudy` binary wires these pieces into a CLI
//! (`match`, `study`, `volume`, `regress`, `correlations`, `simulate`,
//! `report`). See the book under `book/` for a guided tour.

pub mod factor;
pub mod ingest;
pub mod leak;
pub mod model;
pub mod pipeline;
pub mod sim;
pub mod study;
pub mod xsection;

pub use model::{
    Currency, DailyBar, ExchangeCalendar, FactorRow, IntradayBar, Region, ReturnObservation,
    SectorClass, Security, Ticker, TimeOfDay,
};

// The book's code samples double as doc-tests so the guide can never drift
// from the library. `cargo test --doc` compiles and runs every snippet.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/calendars.md")]
    mod calendars {}
    #[doc = include_str!("../../../book/src/leak-matching.md")]
    mod leak_matching {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/event-study.md")]
    mod event_study {}
    #[doc = include_str!("../../../book/src/volume.md")]
    mod volume {}
    #[doc = include_str!("../../../book/src/cross-section.md")]
    mod cross_section {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
}
