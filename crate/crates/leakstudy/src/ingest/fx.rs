//! USD rebasing with last-observation-carried-forward FX lookup.

use crate::model::Currency;
use chrono::{DateTime, Utc};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FxError {
    #[error("no {currency} FX rate at or before {ts}")]
    NoRate {
        currency: Currency,
        ts: DateTime<Utc>,
    },
}

/// Time series of USD rates per foreign currency (USD per unit of foreign).
#[derive(Debug, Clone, Default)]
pub struct FxTable {
    rates: BTreeMap<Currency, Vec<(DateTime<Utc>, f64)>>,
}

impl FxTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, currency: Currency, ts: DateTime<Utc>, rate: f64) {
        let series = self.rates.entry(currency).or_default();
        series.push((ts, rate));
        series.sort_by_key(|(t, _)| *t);
    }

    /// Most recent rate at or before `ts`. USD is identity.
    pub fn rate_at(&self, currency: &Currency, ts: DateTime<Utc>) -> Result<f64, FxError> {
        if currency.is_usd() {
            return Ok(1.0);
        }
        let series = self.rates.get(currency).ok_or_else(|| FxError::NoRate {
            currency: currency.clone(),
            ts,
        })?;
        let idx = series.partition_point(|(t, _)| *t <= ts);
        if idx == 0 {
            return Err(FxError::NoRate {
                currency: currency.clone(),
                ts,
            });
        }
        Ok(series[idx - 1].1)
    }

    /// Rebase an amount into USD at the rate in force at `ts`.
    pub fn rebase_usd(
        &self,
        amount: f64,
        currency: &Currency,
        ts: DateTime<Utc>,
    ) -> Result<f64, FxError> {
        Ok(amount * self.rate_at(currency, ts)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn ts(h: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2021, 3, 1, h, 0, 0).unwrap()
    }

    #[test]
    fn usd_passes_through() {
        let fx = FxTable::new();
        assert_eq!(fx.rebase_usd(100.0, &Currency::usd(), ts(12)).unwrap(), 100.0);
    }

    #[test]
    fn direct_multiplication() {
        let mut fx = FxTable::new();
        fx.insert(Currency::new("EUR"), ts(12), 1.10);
        let v = fx.rebase_usd(100.0, &Currency::new("EUR"), ts(12)).unwrap();
        assert!((v - 110.0).abs() < 1e-12);
    }

    #[test]
    fn last_observation_carried_forward() {
        // rates at t-1h (1.10) and t+1h (1.20); lookup at t uses 1.10
        let mut fx = FxTable::new();
        fx.insert(Currency::new("EUR"), ts(11), 1.10);
        fx.insert(Currency::new("EUR"), ts(13), 1.20);
        let v = fx.rebase_usd(100.0, &Currency::new("EUR"), ts(12)).unwrap();
        assert!((v - 110.0).abs() < 1e-12);
    }

    #[test]
    fn gap_before_first_rate() {
        let mut fx = FxTable::new();
        fx.insert(Currency::new("EUR"), ts(13), 1.20);
        assert!(fx.rebase_usd(100.0, &Currency::new("EUR"), ts(12)).is_err());
    }

    proptest! {
        // rebase is homogeneous: rebase(k*a) = k*rebase(a)
        #[test]
        fn rebase_homogeneous(amount in -1e9f64..1e9, k in -1e3f64..1e3, rate in 1e-4f64..1e4) {
            let mut fx = FxTable::new();
            fx.insert(Currency::new("EUR"), ts(0), rate);
            let eur = Currency::new("EUR");
            let lhs = fx.rebase_usd(k * amount, &eur, ts(12)).unwrap();
            let rhs = k * fx.rebase_usd(amount, &eur, ts(12)).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()).max(1.0));
        }
    }
}
