//! Intraday table emitters.
//!
//! Intraday panels live on a 5-minute grid of bar indices from the anchor
//! bar (minute 0 = the first full bar at or after the leak). Return panels
//! hold per-bar market-adjusted ARs from bar 1 on; volume panels hold
//! per-bar abnormal volumes from bar 0 on. Published tables report 5-minute
//! steps through the first hour and hourly marks out to 8 trading hours, so
//! the emitters here aggregate over the bar grid at those offsets.

use super::{caar, cross_section_cell, Panel, StudyRow, StudyTable};

/// Reported minute offsets: 0, 5, …, 60, then hourly to 480.
pub fn intraday_report_offsets() -> Vec<i32> {
    let mut out: Vec<i32> = (0..=12).map(|k| k * 5).collect();
    out.extend((2..=8).map(|h| h * 60));
    out
}

/// Intraday CAAR table: cumulative market-adjusted abnormal return from the
/// anchor bar out to each reported minute offset. The minute-0 row carries
/// the event count but no estimate (no return has accrued yet), matching the
/// published layout.
pub fn intraday_caar_table(panel: &Panel, title: &str, two_sided: bool) -> StudyTable {
    let mut rows = Vec::new();
    for &minutes in &intraday_report_offsets() {
        let bar = minutes / 5;
        if bar == 0 {
            let n = panel
                .values_at(0)
                .map(|v| v.len())
                .unwrap_or(0);
            rows.push(StudyRow {
                label: "0".to_owned(),
                cell: cross_section_cell(&vec![0.0; n], two_sided).map(|mut c| {
                    c.std_error = None;
                    c.t_stat = None;
                    c.p_value = None;
                    c
                }),
                display_pct: None,
            });
            continue;
        }
        let cell = caar(panel, (1, bar), two_sided).ok().flatten();
        rows.push(StudyRow {
            label: minutes.to_string(),
            cell,
            display_pct: None,
        });
    }
    StudyTable {
        title: title.to_owned(),
        rows,
    }
}

/// Intraday AAV table: the abnormal volume of the single bar at each
/// reported minute offset (not cumulative), with display percentages.
pub fn intraday_aav_table(panel: &Panel, title: &str, two_sided: bool) -> StudyTable {
    let mut rows = Vec::new();
    for &minutes in &intraday_report_offsets() {
        let bar = minutes / 5;
        let cell = panel
            .values_at(bar)
            .ok()
            .and_then(|vals| cross_section_cell(&vals, two_sided));
        rows.push(StudyRow {
            label: minutes.to_string(),
            display_pct: cell.map(|c| 100.0 * (c.estimate.exp() - 1.0)),
            cell,
        });
    }
    StudyTable {
        title: title.to_owned(),
        rows,
    }
}
