//! Cross-sectional t-tests over event panels.
//!
//! Standard errors are cross-sectional: the sample standard deviation across
//! events at a given relative time, divided by √n. p-values come from the
//! central t-distribution with n−1 degrees of freedom and are one-sided in
//! the direction of the estimate's sign by default; two-sided is a flag.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// One-sided p-value in the direction of the statistic's sign.
pub fn one_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 0.5;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive df");
    if t < 0.0 {
        dist.cdf(t)
    } else {
        1.0 - dist.cdf(t)
    }
}

/// Conventional two-sided p-value.
pub fn two_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive df");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

/// Point estimate with its cross-sectional inference at one relative time or
/// window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyCell {
    pub n: usize,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
}

/// Mean, standard error, t, and p over one cross-section of event values.
///
/// With fewer than two observations the estimate is still reported but
/// inference is unavailable. A degenerate zero-variance cross-section gets
/// an infinite t and a boundary p of 0 (0.5 for an all-zero section).
pub fn cross_section_cell(values: &[f64], two_sided: bool) -> Option<StudyCell> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let estimate = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Some(StudyCell {
            n,
            estimate,
            std_error: None,
            t_stat: None,
            p_value: None,
        });
    }
    let var = values.iter().map(|v| (v - estimate).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (var / n as f64).sqrt();
    let t = if se > 0.0 {
        estimate / se
    } else if estimate == 0.0 {
        0.0
    } else {
        f64::INFINITY * estimate.signum()
    };
    let df = (n - 1) as f64;
    let p = if two_sided {
        two_sided_p(t, df)
    } else {
        one_sided_p(t, df)
    };
    Some(StudyCell {
        n,
        estimate,
        std_error: Some(se),
        t_stat: Some(t),
        p_value: Some(p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sided_matches_leaked_news_pairs() {
        // Frozen (t, p) pairs at df = 213, one-sided in the sign direction.
        let pairs = [
            (-0.411, 0.341),
            (-2.218, 0.014),
            (0.060, 0.476),
            (0.880, 0.190),
        ];
        for (t, p) in pairs {
            assert!(
                (one_sided_p(t, 213.0) - p).abs() <= 0.002,
                "t={t}: {} vs {p}",
                one_sided_p(t, 213.0)
            );
        }
    }

    #[test]
    fn zero_t_is_half() {
        assert_eq!(one_sided_p(0.0, 213.0), 0.5);
        assert_eq!(two_sided_p(0.0, 213.0), 1.0);
    }

    #[test]
    fn two_sided_doubles_the_tail() {
        let t = -1.5;
        let df = 50.0;
        assert!((two_sided_p(t, df) - 2.0 * one_sided_p(t, df)).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_cell_hits_boundary() {
        let cell = cross_section_cell(&[0.001; 5], false).unwrap();
        assert_eq!(cell.estimate, 0.001);
        assert_eq!(cell.std_error, Some(0.0));
        assert_eq!(cell.p_value, Some(0.0));
        assert!(cell.t_stat.unwrap().is_infinite());
    }

    #[test]
    fn single_observation_reports_estimate_only() {
        let cell = cross_section_cell(&[0.02], false).unwrap();
        assert_eq!(cell.n, 1);
        assert_eq!(cell.estimate, 0.02);
        assert!(cell.t_stat.is_none());
        assert!(cell.p_value.is_none());
    }

    #[test]
    fn empty_cross_section_is_none() {
        assert!(cross_section_cell(&[], false).is_none());
    }
}
