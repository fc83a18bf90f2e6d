//! Numerical checks of the potential inequalities: each reports the observed
//! constant over a deterministic sample family and its drift under refinement.

mod combination;
mod compose;
mod hardy;

pub use combination::{combination_check, CombinationReport, CombinationSetup};
pub use compose::{compose_lower_check, compose_truncated_check, compose_upper_check, composed_params, ComposeSetup};
pub use hardy::{hardy_check, hardy_constant, HardyProbe};

use std::fmt::Write as _;

/// Which extreme of the per-sample ratios is the reported constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    /// NaN when undefined (both sides zero).
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub name: String,
    pub rows: Vec<SampleRow>,
    pub extreme: Extreme,
    /// Extreme ratio over rows with a defined ratio; NaN if there are none.
    pub ratio: f64,
    /// Reported ratio at successive refinement levels, starting with `ratio`.
    pub refinement: Vec<f64>,
    /// Constructive bound the ratio must respect, when one is known.
    pub bound: Option<f64>,
    pub divergent: bool,
    pub notes: Vec<String>,
}

impl InequalityReport {
    pub(crate) fn new(name: &str, rows: Vec<SampleRow>, extreme: Extreme) -> Self {
        let ratio = extreme_of(&rows, extreme);
        let divergent = rows.iter().any(|r| r.lhs.is_infinite() || r.rhs.is_infinite());
        InequalityReport { name: name.into(), rows, extreme, ratio, refinement: vec![ratio], bound: None, divergent, notes: Vec::new() }
    }

    /// Largest over smallest defined entry of the refinement series (1 if
    /// stable or if no entry is defined).
    pub fn drift(&self) -> f64 {
        let defined = self.refinement.iter().cloned().filter(|v| !v.is_nan());
        let lo = defined.clone().fold(f64::INFINITY, f64::min);
        let hi = defined.fold(0.0, f64::max);
        if lo == f64::INFINITY && hi == 0.0 {
            1.0
        } else if hi.is_infinite() {
            f64::INFINITY
        } else if lo > 0.0 {
            hi / lo
        } else if hi == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    }

    /// Rows whose ratio is undefined.
    pub fn skipped(&self) -> usize {
        self.rows.iter().filter(|r| r.ratio.is_nan()).count()
    }

    /// One row per sample, then a summary row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("sample,lhs,rhs,ratio\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{:e},{:e},{:e}", r.label, r.lhs, r.rhs, r.ratio);
        }
        let series: Vec<String> = self.refinement.iter().map(|v| format!("{v:e}")).collect();
        let kind = match self.extreme {
            Extreme::Min => "min",
            Extreme::Max => "max",
        };
        let _ = writeln!(s, "# {kind} ratio={:e} drift={:e} series={}", self.ratio, self.drift(), series.join(" "));
        s
    }
}

pub(crate) fn extreme_of(rows: &[SampleRow], extreme: Extreme) -> f64 {
    let mut it = rows.iter().map(|r| r.ratio).filter(|r| !r.is_nan());
    let first = match it.next() {
        Some(v) => v,
        None => return f64::NAN,
    };
    it.fold(first, |a, b| match extreme {
        Extreme::Min => a.min(b),
        Extreme::Max => a.max(b),
    })
}

pub(crate) fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        f64::NAN
    } else if rhs == 0.0 || lhs.is_infinite() && rhs.is_finite() {
        f64::INFINITY
    } else if rhs.is_infinite() && lhs.is_finite() {
        0.0
    } else {
        lhs / rhs
    }
}

pub(crate) fn point_label(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
    format!("x=({})", parts.join(" "))
}
