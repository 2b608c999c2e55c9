//! CSV time series, JSON run summaries and monitor evaluation for a finished run.

use std::fmt::Write;

use serde::Serialize;

use super::config::{MonitorKind, RunConfig};
use crate::diagnostics::{
    derivative_decay_monitor, pinching_monitor, scalar_min_monitor, volume_conservation_check, volume_rate_monitor,
    FlowRecord, MonitorReport, Tolerance,
};
use crate::flow::{RunOutcome, RunStatus};
use crate::geometry::GeometryKind;
use crate::params::FlowParams;

pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn records_to_csv(records: &[FlowRecord]) -> String {
    let mut s = String::with_capacity(64 + records.len() * 240);
    s.push_str(FlowRecord::CSV_HEADER);
    s.push('\n');
    for r in records {
        let row: Vec<String> = r.csv_values().iter().map(|v| fmt17(*v)).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

/// Monitor reports for a run plus the monitors that were not applicable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorSet {
    pub reports: Vec<MonitorReport>,
    pub skipped: Vec<String>,
}

impl MonitorSet {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }
}

/// Runs the requested monitors over a finished run with tolerance `c_disc (h^2 + dt_max)`.
pub fn evaluate_monitors(outcome: &RunOutcome, params: &FlowParams, kinds: &[MonitorKind], c_disc: f64) -> MonitorSet {
    let recs = &outcome.records;
    let tol = Tolerance::for_records(c_disc, outcome.h, recs).value();
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for kind in kinds {
        match kind {
            MonitorKind::ScalarMin => {
                if params.in_regime() {
                    let a = recs.first().map_or(0.0, |r| r.r_min);
                    reports.push(scalar_min_monitor(recs, a, params, tol));
                } else {
                    skipped.push("scalar_min: outside the parabolic regime".to_string());
                }
            }
            MonitorKind::Volume => {
                reports.push(volume_rate_monitor(recs, params, tol));
                if outcome.final_state.kind() == GeometryKind::Conformal2d {
                    reports.push(volume_conservation_check(recs, tol));
                }
            }
            MonitorKind::Pinching => match pinching_monitor(recs, params.dim) {
                Ok(p) => reports.push(p.report),
                Err(e) => skipped.push(format!("pinching: {e}")),
            },
            MonitorKind::Decay => reports.push(derivative_decay_monitor(recs).report),
        }
    }
    MonitorSet { reports, skipped }
}

/// 0: reached `t_end` with all monitors passing; 2: blow-up or degenerate metric;
/// 3: monitor violation or exhausted step budget.
pub fn exit_code(status: RunStatus, monitors_passed: bool) -> i32 {
    if !monitors_passed {
        return 3;
    }
    match status {
        RunStatus::ReachedTEnd => 0,
        RunStatus::BlowupDetected | RunStatus::DegenerateMetric => 2,
        RunStatus::MaxSteps => 3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStatistics {
    pub records: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    pub pinching_b: f64,
    /// `sup (|Ric| + |hess R|)` over the run.
    pub ric_hess_sup: f64,
    pub decay_max: [f64; 2],
    pub pinching_ratio_max: f64,
}

impl RunStatistics {
    pub fn from_outcome(outcome: &RunOutcome) -> Self {
        let recs = &outcome.records;
        let steps = recs.iter().skip(1).map(|r| r.dt);
        let dt_min = steps.clone().fold(f64::INFINITY, f64::min);
        let dt_max = steps.fold(0.0, f64::max);
        let decay = derivative_decay_monitor(recs);
        let pinching_ratio_max = pinching_monitor(recs, outcome.final_state.dim())
            .map(|p| p.series.iter().map(|s| s.ratio).fold(0.0, f64::max))
            .unwrap_or(0.0);
        Self {
            records: recs.len(),
            dt_min: if dt_min.is_finite() { dt_min } else { 0.0 },
            dt_max,
            pinching_b: outcome.pinching.b,
            ric_hess_sup: recs.iter().map(|r| r.ric_hess_sup).fold(0.0, f64::max),
            decay_max: decay.max_weighted,
            pinching_ratio_max,
        }
    }
}

/// The JSON document written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub status: RunStatus,
    pub t_final: f64,
    pub steps: usize,
    pub message: String,
    pub exit_code: i32,
    pub monitors_passed: bool,
    pub monitors: Vec<MonitorReport>,
    pub skipped_monitors: Vec<String>,
    pub statistics: RunStatistics,
    pub config: RunConfig,
}

impl RunSummary {
    pub fn new(outcome: &RunOutcome, monitors: MonitorSet, config: &RunConfig) -> Self {
        let passed = monitors.all_passed();
        Self {
            schema_version: SCHEMA_VERSION,
            status: outcome.status,
            t_final: outcome.t_final,
            steps: outcome.steps,
            message: outcome.message.clone(),
            exit_code: exit_code(outcome.status, passed),
            monitors_passed: passed,
            monitors: monitors.reports,
            skipped_monitors: monitors.skipped,
            statistics: RunStatistics::from_outcome(outcome),
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary is serializable")
    }
}
