//! Error aggregation and the analysis protocols: basin profiles, domain
//! shift, and perturbation convergence studies.

mod basin;
mod convergence;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::PoseError;

pub use basin::{
    apply_offset, basin_offsets, basin_profile, domain_shift_profile, spearman, BasinAxis, BasinProfile,
    DomainShiftReport,
};
pub use convergence::{convergence_study, CellSummary, ConvergenceMatrix};

/// Standard recall thresholds as (meters, degrees).
pub const RECALL_THRESHOLDS: [(f64, f64); 3] = [(0.25, 2.0), (0.5, 5.0), (5.0, 10.0)];

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSummary {
    pub count: usize,
    pub median_trans: f64,
    pub median_rot: f64,
    /// `((meters, degrees), fraction)` in the order the thresholds were given.
    pub recalls: Vec<((f64, f64), f64)>,
}

/// Element at index `(n - 1) / 2` of the sorted values.
pub fn lower_median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("median of an empty list".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v[(v.len() - 1) / 2])
}

/// Lower medians of both components, and the fraction of errors within
/// each `(meters, degrees)` pair (both bounds inclusive).
pub fn summarize_errors(errors: &[PoseError], thresholds: &[(f64, f64)]) -> Result<ErrorSummary> {
    if errors.is_empty() {
        return Err(Error::EmptyInput("no pose errors to summarize".into()));
    }
    let trans: Vec<f64> = errors.iter().map(|e| e.trans_err).collect();
    let rot: Vec<f64> = errors.iter().map(|e| e.rot_err).collect();
    let n = errors.len() as f64;
    let recalls = thresholds
        .iter()
        .map(|&(t, r)| {
            let hits = errors.iter().filter(|e| e.trans_err <= t && e.rot_err <= r).count();
            ((t, r), hits as f64 / n)
        })
        .collect();
    Ok(ErrorSummary {
        count: errors.len(),
        median_trans: lower_median(&trans)?,
        median_rot: lower_median(&rot)?,
        recalls,
    })
}

impl ErrorSummary {
    /// `metric,value` rows after a `# comment` line.
    pub fn to_csv(&self, comment: &str) -> String {
        let mut out = format!("# {comment}\nmetric,value\n");
        let _ = writeln!(out, "count,{}", self.count);
        let _ = writeln!(out, "median_trans_m,{}", self.median_trans);
        let _ = writeln!(out, "median_rot_deg,{}", self.median_rot);
        for ((t, r), v) in &self.recalls {
            let _ = writeln!(out, "recall_{t}m_{r}deg,{v}");
        }
        out
    }
}
