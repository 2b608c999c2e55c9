use serde::Serialize;

use super::FlowRecord;
use crate::error::{Error, Result};
use crate::oracles::scalar_min_comparison;
use crate::params::FlowParams;

/// Discretisation budget `c_disc (h^2 + dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub c_disc: f64,
    pub h: f64,
    pub dt: f64,
}

impl Tolerance {
    /// Budget for a record series, with `dt` the largest step taken.
    pub fn for_records(c_disc: f64, h: f64, records: &[FlowRecord]) -> Self {
        let dt = records.iter().map(|r| r.dt).fold(0.0, f64::max);
        Self { c_disc, h, dt }
    }

    pub fn value(&self) -> f64 {
        self.c_disc * (self.h * self.h + self.dt)
    }
}

/// Verdict of one monitor: pass/fail, worst margin (negative means violated before
/// tolerance) and when it happened.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub name: String,
    pub passed: bool,
    pub worst_margin: f64,
    pub worst_t: f64,
    pub tolerance: f64,
    pub checked: usize,
    pub detail: String,
}

impl MonitorReport {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: true,
            worst_margin: f64::INFINITY,
            worst_t: f64::NAN,
            tolerance,
            checked: 0,
            detail: String::new(),
        }
    }

    /// Registers `margin = value - bound`; the check fails when `margin < -tolerance`.
    fn observe(&mut self, t: f64, margin: f64, what: &str) {
        self.checked += 1;
        let bad = !(margin >= -self.tolerance);
        if margin < self.worst_margin || (bad && self.passed) || margin.is_nan() {
            self.worst_margin = margin;
            self.worst_t = t;
            if bad {
                self.detail = format!(
                    "{what} violated at t = {t} (margin {margin:e}, tolerance {:e})",
                    self.tolerance
                );
            }
        }
        if bad {
            self.passed = false;
        }
    }
}

/// Checks `R_min(t) >= a`, monotone `R_min`, and (for `a > 0`, `n >= 3`) the comparison
/// bound, all within `tol`.
pub fn scalar_min_monitor(records: &[FlowRecord], a: f64, params: &FlowParams, tol: f64) -> MonitorReport {
    let mut rep = MonitorReport::new("scalar_min", tol);
    let use_comparison = a > 0.0 && params.dim >= 3;
    for (i, rec) in records.iter().enumerate() {
        rep.observe(rec.t, rec.r_min - a, "R_min >= R_min(0)");
        if i > 0 {
            rep.observe(rec.t, rec.r_min - records[i - 1].r_min, "R_min nondecreasing");
        }
        if use_comparison {
            match scalar_min_comparison(a, params, rec.t) {
                Ok(bound) if !bound.past_extinction => rep.observe(rec.t, rec.r_min - bound.value, "comparison bound"),
                // A smooth solution cannot outlive the comparison bound.
                Ok(_) => rep.observe(rec.t, f64::NEG_INFINITY, "lifetime bound"),
                Err(_) => {}
            }
        }
    }
    rep
}

/// Checks `|dVol/dt + (alpha + n beta/2) int R dVol| <= tol (1 + |int R dVol|)` wherever
/// a three-point rate is available.
pub fn volume_rate_monitor(records: &[FlowRecord], params: &FlowParams, tol: f64) -> MonitorReport {
    let mut rep = MonitorReport::new("volume_rate", tol);
    let c = params.alpha + 0.5 * params.n() * params.beta;
    for rec in records.iter().filter(|r| r.dvol_dt.is_finite()) {
        let scale = 1.0 + rec.total_scalar.abs();
        let defect = (rec.dvol_dt + c * rec.total_scalar).abs() / scale;
        rep.observe(rec.t, -defect, "volume identity");
    }
    rep
}

/// Checks `|Vol(t) - Vol(0)| <= rel_tol Vol(0)`; exact for the torus by Gauss-Bonnet.
pub fn volume_conservation_check(records: &[FlowRecord], rel_tol: f64) -> MonitorReport {
    let mut rep = MonitorReport::new("volume_conservation", rel_tol);
    if let Some(first) = records.first() {
        for rec in records {
            let rel = (rec.volume - first.volume).abs() / first.volume;
            rep.observe(rec.t, -rel, "volume conservation");
        }
    }
    rep
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinchingPoint {
    pub t: f64,
    pub f_max: f64,
    /// `f_max / (1 + running max of pinch_scale)`; reported, not bounded.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinchingReport {
    pub report: MonitorReport,
    pub series: Vec<PinchingPoint>,
}

/// Checks `R + b >= 1 - 1e-9` and finiteness of the pinching series. Refuses surfaces.
pub fn pinching_monitor(records: &[FlowRecord], dim: usize) -> Result<PinchingReport> {
    if dim < 3 {
        return Err(Error::UnsupportedDimension {
            dim,
            reason: "the pinching quantity is defined for n >= 3",
        });
    }
    let mut rep = MonitorReport::new("pinching", 1e-9);
    let mut running: f64 = 0.0;
    let mut series = Vec::with_capacity(records.len());
    for rec in records {
        rep.observe(rec.t, rec.rb_min - 1.0, "R + b >= 1");
        if !rec.f_max.is_finite() {
            rep.observe(rec.t, f64::NAN, "finite pinching");
        }
        running = running.max(rec.pinch_scale);
        series.push(PinchingPoint {
            t: rec.t,
            f_max: rec.f_max,
            ratio: rec.f_max / (1.0 + running),
        });
    }
    Ok(PinchingReport { report: rep, series })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub report: MonitorReport,
    /// `max_t t^{(k+1)/2} sup |nabla^k Rm|` for `k = 1, 2`.
    pub max_weighted: [f64; 2],
}

/// Running maxima of the time-weighted derivative proxies over rows with `t > 0`.
/// Only finiteness is asserted.
pub fn derivative_decay_monitor(records: &[FlowRecord]) -> DecayReport {
    let mut rep = MonitorReport::new("derivative_decay", 0.0);
    let mut max_weighted = [0.0f64; 2];
    for rec in records.iter().filter(|r| r.t > 0.0) {
        for (k, v) in [rec.decay_k1, rec.decay_k2].into_iter().enumerate() {
            if v.is_finite() {
                max_weighted[k] = max_weighted[k].max(v);
            } else {
                rep.observe(rec.t, f64::NAN, "finite derivative proxy");
            }
        }
        rep.checked += 1;
    }
    if rep.passed {
        rep.worst_margin = 0.0;
    }
    DecayReport {
        report: rep,
        max_weighted,
    }
}
