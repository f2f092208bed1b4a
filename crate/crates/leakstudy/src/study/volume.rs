//! Log-turnover abnormal volume.
//!
//! Daily turnover is `ln(volume / shares outstanding)`. Intraday, shares
//! outstanding barely move within a session, so turnover reduces to the log
//! of volume alone; quiet bars would leave `ln(0)` undefined, so the intraday
//! form is `ln(1 + volume)`. Abnormal volume is turnover minus its mean over
//! a pre-event baseline window: 20 trading days daily, 96 five-minute bars
//! (8 trading hours) intraday.

use super::StudyError;

/// Daily or 5-minute turnover semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeScope {
    Daily,
    Intraday,
}

impl VolumeScope {
    /// Baseline length: trading days before the event day, or 5-minute bars
    /// before the anchor bar.
    pub fn baseline_window(&self) -> usize {
        match self {
            VolumeScope::Daily => 20,
            VolumeScope::Intraday => 96,
        }
    }
}

/// Log turnover of one observation.
///
/// Daily scope requires nonzero volume and shares (a zero-volume day has no
/// defined turnover and drops the observation); intraday scope is total.
pub fn log_turnover(volume: u64, shares_outstanding: u64, scope: VolumeScope) -> Result<f64, StudyError> {
    match scope {
        VolumeScope::Daily => {
            if volume == 0 || shares_outstanding == 0 {
                return Err(StudyError::UndefinedTurnover);
            }
            Ok((volume as f64 / shares_outstanding as f64).ln())
        }
        VolumeScope::Intraday => Ok((1.0 + volume as f64).ln()),
    }
}

/// Abnormal volume: event-period turnover minus the baseline mean.
///
/// `baseline` holds the valid turnover observations out of the `t_window`
/// pre-event periods; at least half of the window must be valid.
pub fn abnormal_volume(tau: f64, baseline: &[f64], t_window: usize) -> Result<f64, StudyError> {
    let need = t_window.div_ceil(2);
    if baseline.len() < need {
        return Err(StudyError::InsufficientBaseline {
            have: baseline.len(),
            need,
        });
    }
    let mean = baseline.iter().sum::<f64>() / baseline.len() as f64;
    Ok(tau - mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn daily_turnover_direct_value() {
        // ln(10_000 / 1_000_000) = ln(0.01)
        let tau = log_turnover(10_000, 1_000_000, VolumeScope::Daily).unwrap();
        assert!((tau - (-4.605170185988091)).abs() < 1e-12);
    }

    #[test]
    fn doubling_volume_raises_turnover_by_ln2() {
        let a = log_turnover(10_000, 1_000_000, VolumeScope::Daily).unwrap();
        let b = log_turnover(20_000, 1_000_000, VolumeScope::Daily).unwrap();
        assert!((b - a - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn daily_zero_volume_is_undefined() {
        assert_eq!(
            log_turnover(0, 1_000_000, VolumeScope::Daily),
            Err(StudyError::UndefinedTurnover)
        );
    }

    #[test]
    fn intraday_zero_volume_is_zero() {
        assert_eq!(log_turnover(0, 1, VolumeScope::Intraday).unwrap(), 0.0);
    }

    #[test]
    fn xi_zero_at_baseline_mean() {
        let baseline = vec![1.5; 20];
        assert_eq!(abnormal_volume(1.5, &baseline, 20).unwrap(), 0.0);
    }

    #[test]
    fn xi_ln2_when_volume_doubles() {
        let tau_base = log_turnover(5_000, 1_000_000, VolumeScope::Daily).unwrap();
        let tau_event = log_turnover(10_000, 1_000_000, VolumeScope::Daily).unwrap();
        let baseline = vec![tau_base; 20];
        let xi = abnormal_volume(tau_event, &baseline, 20).unwrap();
        assert!((xi - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn half_window_baseline_rule() {
        let baseline = vec![0.0; 10];
        assert!(abnormal_volume(0.0, &baseline, 20).is_ok());
        let thin = vec![0.0; 9];
        assert_eq!(
            abnormal_volume(0.0, &thin, 20),
            Err(StudyError::InsufficientBaseline { have: 9, need: 10 })
        );
        // odd window rounds the requirement up
        assert_eq!(
            abnormal_volume(0.0, &vec![0.0; 48], 97),
            Err(StudyError::InsufficientBaseline { have: 48, need: 49 })
        );
    }

    proptest! {
        // Scaling every daily volume by a constant leaves xi unchanged.
        #[test]
        fn daily_scale_invariance(
            base in 100u64..1_000_000,
            event in 100u64..1_000_000,
            k in 1u64..1000,
        ) {
            let shares = 10_000_000u64;
            let taus: Vec<f64> = (0..20)
                .map(|_| log_turnover(base, shares, VolumeScope::Daily).unwrap())
                .collect();
            let xi = abnormal_volume(
                log_turnover(event, shares, VolumeScope::Daily).unwrap(), &taus, 20,
            ).unwrap();

            let taus_k: Vec<f64> = (0..20)
                .map(|_| log_turnover(base * k, shares, VolumeScope::Daily).unwrap())
                .collect();
            let xi_k = abnormal_volume(
                log_turnover(event * k, shares, VolumeScope::Daily).unwrap(), &taus_k, 20,
            ).unwrap();
            prop_assert!((xi - xi_k).abs() < 1e-9);
        }

        // Intraday the ln(1+v) convention deviates from exact scale
        // invariance by less than 1% once volumes reach 100 units.
        #[test]
        fn intraday_scale_near_invariance(
            base in 100u64..100_000,
            k in 2u64..50,
        ) {
            let taus: Vec<f64> = (0..96)
                .map(|_| log_turnover(base, 0, VolumeScope::Intraday).unwrap())
                .collect();
            let xi = abnormal_volume(
                log_turnover(base * 2, 0, VolumeScope::Intraday).unwrap(), &taus, 96,
            ).unwrap();

            let taus_k: Vec<f64> = (0..96)
                .map(|_| log_turnover(base * k, 0, VolumeScope::Intraday).unwrap())
                .collect();
            let xi_k = abnormal_volume(
                log_turnover(base * k * 2, 0, VolumeScope::Intraday).unwrap(), &taus_k, 96,
            ).unwrap();
            prop_assert!((xi - xi_k).abs() < 0.01, "{xi} vs {xi_k}");
        }
    }
}
