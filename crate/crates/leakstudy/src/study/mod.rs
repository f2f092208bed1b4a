//! Event panels and their aggregation into AAR/CAAR and AAV/CAAV tables.
//!
//! A [`Panel`] holds one value per (event, relative time) with an
//! availability mask: markets close, histories run short, and turnover can
//! be undefined, so not every cell exists. Averages are taken over available
//! events; window statistics are complete-case (an event missing any period
//! inside the window drops out of that window).

mod inference;
mod intraday;
mod volume;

pub use inference::{cross_section_cell, one_sided_p, two_sided_p, StudyCell};
pub use intraday::{intraday_aav_table, intraday_caar_table, intraday_report_offsets};
pub use volume::{abnormal_volume, log_turnover, VolumeScope};

use crate::leak::TimingClass;
use crate::model::SectorClass;
use thiserror::Error;

/// Daily CAAR window presets: the event windows of the daily return tables.
pub const DAILY_WINDOW_PRESETS: [(i32, i32); 11] = [
    (-10, 10),
    (-5, 5),
    (-3, 3),
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 5),
    (0, 7),
    (0, 10),
    (11, 21),
    (21, 30),
];

#[derive(Debug, Error, PartialEq)]
pub enum StudyError {
    #[error("offset {0} is not on the panel grid")]
    OffsetNotOnGrid(i32),
    #[error("window [{0}, {1}] extends beyond the panel grid")]
    WindowOutsideGrid(i32, i32),
    #[error("turnover undefined: zero volume or shares on a daily bar")]
    UndefinedTurnover,
    #[error("only {have} valid baseline periods, need at least {need}")]
    InsufficientBaseline { have: usize, need: usize },
}

/// Sample-split identity of one event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventMeta {
    pub key: String,
    pub sector: SectorClass,
    pub timing: TimingClass,
}

/// Values per event over a shared relative-time grid, with availability.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    offsets: Vec<i32>,
    events: Vec<EventMeta>,
    values: Vec<Vec<Option<f64>>>,
}

impl Panel {
    /// A panel over a strictly increasing relative-time grid.
    pub fn new(offsets: Vec<i32>) -> Self {
        debug_assert!(offsets.windows(2).all(|w| w[0] < w[1]));
        Panel {
            offsets,
            events: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push_event(&mut self, meta: EventMeta, values: Vec<Option<f64>>) {
        assert_eq!(values.len(), self.offsets.len(), "row width must match grid");
        self.events.push(meta);
        self.values.push(values);
    }

    pub fn offsets(&self) -> &[i32] {
        &self.offsets
    }

    pub fn n_events(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[EventMeta] {
        &self.events
    }

    pub fn offset_index(&self, offset: i32) -> Result<usize, StudyError> {
        self.offsets
            .binary_search(&offset)
            .map_err(|_| StudyError::OffsetNotOnGrid(offset))
    }

    /// Available values across events at one offset.
    pub fn values_at(&self, offset: i32) -> Result<Vec<f64>, StudyError> {
        let idx = self.offset_index(offset)?;
        Ok(self.values.iter().filter_map(|row| row[idx]).collect())
    }

    /// Complete-case per-event sums over an inclusive window of grid offsets.
    pub fn window_sums(&self, from: i32, to: i32) -> Result<Vec<f64>, StudyError> {
        let a = self.offset_index(from).map_err(|_| StudyError::WindowOutsideGrid(from, to))?;
        let b = self.offset_index(to).map_err(|_| StudyError::WindowOutsideGrid(from, to))?;
        let mut sums = Vec::new();
        'events: for row in &self.values {
            let mut acc = 0.0;
            for cell in &row[a..=b] {
                match cell {
                    Some(v) => acc += v,
                    None => continue 'events, // complete-case
                }
            }
            sums.push(acc);
        }
        Ok(sums)
    }

    /// Sub-panel of events matching a predicate.
    pub fn filter(&self, pred: impl Fn(&EventMeta) -> bool) -> Panel {
        let mut out = Panel::new(self.offsets.clone());
        for (meta, row) in self.events.iter().zip(&self.values) {
            if pred(meta) {
                out.push_event(meta.clone(), row.clone());
            }
        }
        out
    }
}

/// Average abnormal value across events at one relative time, with
/// cross-sectional inference. `None` when no event is available there.
pub fn aar(panel: &Panel, offset: i32, two_sided: bool) -> Result<Option<StudyCell>, StudyError> {
    let values = panel.values_at(offset)?;
    Ok(cross_section_cell(&values, two_sided))
}

/// Cumulative average abnormal value over an inclusive window: per-event
/// complete-case sums, averaged, with a t-test on the cross-section of sums.
pub fn caar(
    panel: &Panel,
    window: (i32, i32),
    two_sided: bool,
) -> Result<Option<StudyCell>, StudyError> {
    let sums = panel.window_sums(window.0, window.1)?;
    Ok(cross_section_cell(&sums, two_sided))
}

/// The cumulative value over the leading part of a window, implied by the
/// full window and its tail: `caar[a, c-1] = caar[a, b] - caar[c, b]`.
pub fn implied_leading_caar(full_window: f64, tail_window: f64) -> f64 {
    full_window - tail_window
}

/// One emitted table row: a labelled relative time or window.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub label: String,
    pub cell: Option<StudyCell>,
    /// `100·(exp(estimate)−1)`, emitted beside log points on volume tables.
    pub display_pct: Option<f64>,
}

/// A rendered study: one row per relative time or window.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub title: String,
    pub rows: Vec<StudyRow>,
}

impl StudyTable {
    /// CSV with the columns `window,n,estimate,std_err,t,p` (plus
    /// `display_pct` when any row carries one).
    pub fn to_csv(&self) -> String {
        let has_display = self.rows.iter().any(|r| r.display_pct.is_some());
        let mut out = String::from("window,n,estimate,std_err,t,p");
        if has_display {
            out.push_str(",display_pct");
        }
        out.push('\n');
        for row in &self.rows {
            let mut line = match &row.cell {
                Some(c) => format!(
                    "{},{},{:.6},{},{},{}",
                    row.label,
                    c.n,
                    c.estimate,
                    c.std_error.map_or(String::new(), |v| format!("{v:.6}")),
                    c.t_stat.map_or(String::new(), |v| format!("{v:.4}")),
                    c.p_value.map_or(String::new(), |v| format!("{v:.4}")),
                ),
                None => format!("{},0,,,,", row.label),
            };
            if has_display {
                match row.display_pct {
                    Some(d) => line.push_str(&format!(",{d:.2}")),
                    None => line.push(','),
                }
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Markdown rendering mirroring the published table layout: the estimate
    /// with significance stars, standard error in parentheses.
    pub fn to_markdown(&self, unit: EstimateUnit) -> String {
        let mut out = format!("### {}\n\n", self.title);
        out.push_str("| window | n | estimate (std. err.) | t | p |\n");
        out.push_str("|---|---|---|---|---|\n");
        for row in &self.rows {
            match &row.cell {
                Some(c) => {
                    let stars = match c.p_value {
                        Some(p) if p <= 0.01 => "***",
                        Some(p) if p <= 0.05 => "**",
                        Some(p) if p <= 0.10 => "*",
                        _ => "",
                    };
                    let (est, se) = unit.render(c.estimate, c.std_error, row.display_pct);
                    out.push_str(&format!(
                        "| {} | {} | {est}{stars} {se} | {} | {} |\n",
                        row.label,
                        c.n,
                        c.t_stat.map_or("–".into(), |v| format!("{v:.3}")),
                        c.p_value.map_or("–".into(), |v| format!("{v:.3}")),
                    ));
                }
                None => out.push_str(&format!("| {} | – | – | – | – |\n", row.label)),
            }
        }
        out
    }
}

/// How to print a study estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateUnit {
    /// Decimal return shown in basis points.
    BasisPoints,
    /// Decimal return shown in percent.
    Percent,
    /// Log points shown with the exp-transformed percent beside them.
    LogPoints,
}

impl EstimateUnit {
    fn render(&self, estimate: f64, se: Option<f64>, display_pct: Option<f64>) -> (String, String) {
        match self {
            EstimateUnit::BasisPoints => (
                format!("{:+.2}bp", estimate * 1e4),
                se.map_or(String::new(), |s| format!("({:.2})", s * 1e4)),
            ),
            EstimateUnit::Percent => (
                format!("{:+.2}%", estimate * 1e2),
                se.map_or(String::new(), |s| format!("({:.2})", s * 1e2)),
            ),
            EstimateUnit::LogPoints => (
                format!(
                    "{:+.2}% [{:+.4} log]",
                    display_pct.unwrap_or(100.0 * (estimate.exp() - 1.0)),
                    estimate
                ),
                se.map_or(String::new(), |s| format!("({:.4})", s)),
            ),
        }
    }
}

/// AAR table over every grid offset.
pub fn aar_table(panel: &Panel, title: &str, two_sided: bool) -> StudyTable {
    let rows = panel
        .offsets()
        .iter()
        .map(|&t| StudyRow {
            label: t.to_string(),
            cell: aar(panel, t, two_sided).expect("offset from grid"),
            display_pct: None,
        })
        .collect();
    StudyTable {
        title: title.to_owned(),
        rows,
    }
}

/// CAAR table over a set of windows. Windows that extend beyond the panel
/// grid produce placeholder rows, mirroring the dashes in the published
/// tables for windows undefined at a given anchor.
pub fn caar_table(
    panel: &Panel,
    windows: &[(i32, i32)],
    title: &str,
    two_sided: bool,
) -> StudyTable {
    let rows = windows
        .iter()
        .map(|&(a, b)| StudyRow {
            label: format!("[{a},{b}]"),
            cell: caar(panel, (a, b), two_sided).ok().flatten(),
            display_pct: None,
        })
        .collect();
    StudyTable {
        title: title.to_owned(),
        rows,
    }
}

/// Daily AAV/CAAV rows: per-offset average abnormal volume and the running
/// cumulative window from the grid start, both with display percentages.
pub fn aav_caav_table(panel: &Panel, title: &str, two_sided: bool) -> (StudyTable, StudyTable) {
    let first = *panel.offsets().first().expect("non-empty grid");
    let mut aav_rows = Vec::new();
    let mut caav_rows = Vec::new();
    for &t in panel.offsets() {
        let aav_cell = aar(panel, t, two_sided).expect("offset from grid");
        aav_rows.push(StudyRow {
            label: t.to_string(),
            display_pct: aav_cell.map(|c| 100.0 * (c.estimate.exp() - 1.0)),
            cell: aav_cell,
        });
        let caav_cell = caar(panel, (first, t), two_sided).expect("window from grid");
        caav_rows.push(StudyRow {
            label: format!("[{first},{t}]"),
            display_pct: caav_cell.map(|c| 100.0 * (c.estimate.exp() - 1.0)),
            cell: caav_cell,
        });
    }
    (
        StudyTable {
            title: format!("{title} (AAV)"),
            rows: aav_rows,
        },
        StudyTable {
            title: format!("{title} (CAAV)"),
            rows: caav_rows,
        },
    )
}
