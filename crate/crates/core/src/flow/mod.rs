//! Explicit time integration of the symmetry-reduced flows.

pub mod rhs;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    evolution_residual_r, evolution_residual_ric, snapshot_metrics, volume_rate, FlowRecord, PinchingContext,
};
use crate::error::{Error, Result};
use crate::geometry::{GeometryKind, GeometryState};
use crate::params::FlowParams;

pub use rhs::{pack, rhs_conformal2d, rhs_warped, tendency, unpack, warped_rates_from_frame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub cfl_safety: f64,
    pub t_end: f64,
    pub max_steps: usize,
    pub blowup_r_cap: f64,
    /// Record a row every this many steps (the final state is always recorded).
    pub record_every: usize,
    pub scheme: Scheme,
    /// Upper bound on the step, on top of the stability limits.
    pub dt_fixed: Option<f64>,
    /// Evaluate curvature with rayon. Results are identical either way.
    pub parallel: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            cfl_safety: 0.2,
            t_end: 1.0,
            max_steps: 1_000_000,
            blowup_r_cap: 1e6,
            record_every: 1,
            scheme: Scheme::Rk4,
            dt_fixed: None,
            parallel: false,
        }
    }
}

impl IntegratorConfig {
    pub fn with_t_end(t_end: f64) -> Self {
        Self {
            t_end,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad("cfl_safety", "must lie in (0, 1]");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end", "must be positive and finite");
        }
        if !(self.blowup_r_cap > 0.0) {
            return bad("blowup_r_cap", "must be positive");
        }
        if self.record_every == 0 {
            return bad("record_every", "must be at least 1");
        }
        if self.max_steps == 0 {
            return bad("max_steps", "must be at least 1");
        }
        if let Some(dt) = self.dt_fixed {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad("dt_fixed", "must be positive and finite");
            }
        }
        Ok(())
    }
}

/// Step size chosen for one step and the limits it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtPlan {
    pub dt: f64,
    /// `cfl h^2 / (2 D_max)` with the metric factor folded into `D_max`.
    pub diffusion_limit: f64,
    /// `cfl / ((|alpha| + n |beta|) max |R|)`.
    pub reaction_limit: f64,
}

/// Stability-limited step for `state`, before clamping to `t_end`.
pub fn stable_dt(state: &GeometryState, params: &FlowParams, cfg: &IntegratorConfig, max_abs_r: f64) -> DtPlan {
    let metric_factor = match state {
        GeometryState::Conformal(s) => s.u.iter().map(|u| (-2.0 * u).exp()).fold(0.0, f64::max),
        GeometryState::Warped(s) => s.phi.iter().map(|p| 1.0 / (p * p)).fold(0.0, f64::max),
    };
    let mut d = params.max_diffusivity();
    if d <= 0.0 {
        // Outside the regime the larger eigenvalue may be non-positive; bound by magnitude.
        d = params.alpha.abs().max(params.trace_diffusivity().abs()).max(1e-12);
    }
    let h = state.h();
    let diffusion_limit = cfg.cfl_safety * h * h / (2.0 * d * metric_factor);
    let growth = (params.alpha.abs() + params.n() * params.beta.abs()) * max_abs_r;
    let reaction_limit = if growth > 0.0 {
        cfg.cfl_safety / growth
    } else {
        f64::INFINITY
    };
    let mut dt = diffusion_limit.min(reaction_limit);
    if let Some(cap) = cfg.dt_fixed {
        dt = dt.min(cap);
    }
    DtPlan {
        dt,
        diffusion_limit,
        reaction_limit,
    }
}

fn axpy(y: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(y, k)| y + a * k).collect()
}

/// Unknowns advanced by the Runge-Kutta stages: the metric factor `e^{2u}` on the torus,
/// `(phi, psi)` for warped states. The discrete torus volume is linear in `e^{2u}` and
/// is therefore conserved by every stage to roundoff.
fn metric_unknowns(state: &GeometryState) -> Vec<f64> {
    match state {
        GeometryState::Conformal(s) => s.u.iter().map(|u| (2.0 * u).exp()).collect(),
        GeometryState::Warped(_) => pack(state),
    }
}

/// Converts a packed tendency into the rate of [`metric_unknowns`].
fn metric_rate(state: &GeometryState, k: Vec<f64>) -> Vec<f64> {
    match state {
        GeometryState::Conformal(s) => s.u.iter().zip(&k).map(|(u, k)| 2.0 * (2.0 * u).exp() * k).collect(),
        GeometryState::Warped(_) => k,
    }
}

fn from_metric_unknowns(like: &GeometryState, y: Vec<f64>, t: f64) -> Result<GeometryState> {
    match like {
        GeometryState::Conformal(_) => unpack(like, y.iter().map(|v| 0.5 * v.ln()).collect(), t),
        GeometryState::Warped(_) => unpack(like, y, t),
    }
}

/// Advances `state` by `dt` given the tendency `k1` at the start of the step.
///
/// Euler updates the packed unknowns (`u` on the torus); RK4 works on the metric factors.
fn advance(
    state: &GeometryState,
    params: &FlowParams,
    scheme: Scheme,
    dt: f64,
    k1: Vec<f64>,
    parallel: bool,
) -> Result<GeometryState> {
    let t = state.t();
    match scheme {
        Scheme::Euler => unpack(state, axpy(&pack(state), dt, &k1), t + dt),
        Scheme::Rk4 => {
            let y = metric_unknowns(state);
            let stage_rate = |s: &GeometryState| -> Result<Vec<f64>> {
                let k = tendency(s, params, parallel)?.0;
                Ok(metric_rate(s, k))
            };
            let k1 = metric_rate(state, k1);
            let s2 = from_metric_unknowns(state, axpy(&y, 0.5 * dt, &k1), t + 0.5 * dt)?;
            let k2 = stage_rate(&s2)?;
            let s3 = from_metric_unknowns(state, axpy(&y, 0.5 * dt, &k2), t + 0.5 * dt)?;
            let k3 = stage_rate(&s3)?;
            let s4 = from_metric_unknowns(state, axpy(&y, dt, &k3), t + dt)?;
            let k4 = stage_rate(&s4)?;
            let out = (0..y.len())
                .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect();
            from_metric_unknowns(state, out, t + dt)
        }
    }
}

/// One step of size `dt` (no stability control).
pub fn step(state: &GeometryState, params: &FlowParams, scheme: Scheme, dt: f64) -> Result<GeometryState> {
    let k1 = tendency(state, params, false)?.0;
    advance(state, params, scheme, dt, k1, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    ReachedTEnd,
    BlowupDetected,
    DegenerateMetric,
    MaxSteps,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ReachedTEnd => "reached_t_end",
            Self::BlowupDetected => "blowup_detected",
            Self::DegenerateMetric => "degenerate_metric",
            Self::MaxSteps => "max_steps",
        }
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub t: f64,
    pub dt: f64,
    pub diffusion_limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    /// Time of the last finite state.
    pub t_final: f64,
    pub records: Vec<FlowRecord>,
    pub final_state: GeometryState,
    pub steps: usize,
    pub step_log: Vec<StepInfo>,
    pub message: String,
    pub pinching: PinchingContext,
    pub h: f64,
}

/// Builds records and fills in the three-point quantities once a neighbour is known.
struct Recorder<'a> {
    params: &'a FlowParams,
    ctx: PinchingContext,
    records: Vec<FlowRecord>,
    window: Vec<GeometryState>,
}

impl<'a> Recorder<'a> {
    fn push(&mut self, state: &GeometryState, dt: f64) -> Result<()> {
        let curv = state.curvature()?;
        let m = snapshot_metrics(state, &curv, &self.ctx);
        let t = state.t();
        self.records.push(FlowRecord {
            t,
            dt,
            r_min: m.r_min,
            r_max: m.r_max,
            volume: m.volume,
            f_max: m.f_max,
            res_r_evol: f64::NAN,
            res_ric_evol: f64::NAN,
            decay_k1: t * m.proxies[0],
            decay_k2: t.powf(1.5) * m.proxies[1],
            total_scalar: m.total_scalar,
            dvol_dt: f64::NAN,
            rb_min: m.rb_min,
            pinch_scale: m.pinch_scale,
            ric_hess_sup: m.ric_hess_sup,
        });
        self.window.push(state.clone());
        if self.window.len() == 3 {
            let (p, c, q) = (&self.window[0], &self.window[1], &self.window[2]);
            let k = self.records.len() - 2;
            let rec = &mut self.records[k];
            rec.res_r_evol = evolution_residual_r(p, c, q, self.params)?;
            if c.kind() == GeometryKind::Warped {
                rec.res_ric_evol = evolution_residual_ric(p, c, q, self.params)?;
            }
            rec.dvol_dt = volume_rate(p, c, q)?;
            self.window.remove(0);
        }
        Ok(())
    }
}

/// Status for an error raised inside the time loop, or `None` if it is not a flow event.
fn status_of(err: &Error) -> Option<RunStatus> {
    match err {
        Error::NonFinite { .. } => Some(RunStatus::BlowupDetected),
        Error::DegenerateMetric { .. } => Some(RunStatus::DegenerateMetric),
        _ => None,
    }
}

/// Integrates from `initial` until `t_end`, blow-up, degeneration or the step budget.
pub fn run(initial: &GeometryState, params: &FlowParams, cfg: &IntegratorConfig) -> Result<RunOutcome> {
    params.validate()?;
    cfg.validate()?;
    if params.dim != initial.dim() {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: format!(
                "flow parameters are for n = {}, geometry has n = {}",
                params.dim,
                initial.dim()
            ),
        });
    }
    let curv0 = initial.curvature()?;
    let ctx = PinchingContext::from_initial(&curv0);
    let mut rec = Recorder {
        params,
        ctx,
        records: Vec::new(),
        window: Vec::new(),
    };
    rec.push(initial, 0.0)?;

    let mut state = initial.clone();
    let mut steps = 0usize;
    let mut last_dt = 0.0;
    let mut recorded_at = 0usize;
    let mut step_log = Vec::new();
    let t_tol = 1e-14 * cfg.t_end.max(1.0);

    let (status, message) = loop {
        if cfg.t_end - state.t() <= t_tol {
            break (RunStatus::ReachedTEnd, String::new());
        }
        if steps >= cfg.max_steps {
            break (
                RunStatus::MaxSteps,
                format!("step budget of {} exhausted at t = {}", cfg.max_steps, state.t()),
            );
        }
        let (k1, scalar) = match tendency(&state, params, cfg.parallel) {
            Ok(v) => v,
            Err(e) => match status_of(&e) {
                Some(s) => break (s, e.to_string()),
                None => return Err(e),
            },
        };
        let max_abs_r = scalar.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if !max_abs_r.is_finite() || scalar.iter().any(|r| !r.is_finite()) {
            break (
                RunStatus::BlowupDetected,
                format!("non-finite curvature at t = {}", state.t()),
            );
        }
        if max_abs_r > cfg.blowup_r_cap {
            break (
                RunStatus::BlowupDetected,
                format!(
                    "max |R| = {max_abs_r:e} exceeds the cap {:e} at t = {}",
                    cfg.blowup_r_cap,
                    state.t()
                ),
            );
        }
        let plan = stable_dt(&state, params, cfg, max_abs_r);
        let remaining = cfg.t_end - state.t();
        let dt = if plan.dt >= remaining { remaining } else { plan.dt };
        let next = match advance(&state, params, cfg.scheme, dt, k1, cfg.parallel) {
            Ok(s) => s,
            Err(e) => match status_of(&e) {
                Some(s) => break (s, e.to_string()),
                None => return Err(e),
            },
        };
        // Land exactly on t_end for the final step.
        let mut next = next;
        if dt == remaining {
            next.set_t(cfg.t_end);
        }
        step_log.push(StepInfo {
            t: state.t(),
            dt,
            diffusion_limit: plan.diffusion_limit,
        });
        state = next;
        steps += 1;
        last_dt = dt;
        if steps.is_multiple_of(cfg.record_every) {
            if let Err(e) = rec.push(&state, dt) {
                match status_of(&e) {
                    Some(s) => break (s, e.to_string()),
                    None => return Err(e),
                }
            }
            recorded_at = steps;
        }
    };

    if recorded_at != steps {
        rec.push(&state, last_dt)?;
    }
    Ok(RunOutcome {
        status,
        t_final: state.t(),
        records: rec.records,
        h: state.h(),
        final_state: state,
        steps,
        step_log,
        message,
        pinching: ctx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConformalTorusState, WarpedProductState};

    fn torus(amp: f64, n: usize) -> GeometryState {
        GeometryState::Conformal(ConformalTorusState::from_fn(n, |x, _| amp * x.cos()).unwrap())
    }

    #[test]
    fn config_validation_names_the_key() {
        let c = IntegratorConfig {
            cfl_safety: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            c.validate(),
            Err(Error::InvalidParameter { name: "cfl_safety", .. })
        ));
        let c = IntegratorConfig {
            t_end: -1.0,
            ..Default::default()
        };
        assert!(matches!(
            c.validate(),
            Err(Error::InvalidParameter { name: "t_end", .. })
        ));
    }

    #[test]
    fn euler_step_is_u_plus_dt_rhs() {
        let s = torus(0.3, 16);
        let p = FlowParams::ricci(2).unwrap();
        let dt = 1e-3;
        let GeometryState::Conformal(c) = &s else {
            unreachable!()
        };
        let r = rhs_conformal2d(c, &p).unwrap();
        let GeometryState::Conformal(n) = step(&s, &p, Scheme::Euler, dt).unwrap() else {
            unreachable!()
        };
        for i in 0..r.len() {
            assert_eq!(n.u[i], c.u[i] + dt * r[i]);
        }
        assert_eq!(n.t, dt);
    }

    #[test]
    fn flat_torus_reaches_t_end_unchanged() {
        let s = torus(0.0, 16);
        let p = FlowParams::new(1.0, 0.7, 2).unwrap();
        let out = run(&s, &p, &IntegratorConfig::with_t_end(1.0)).unwrap();
        assert_eq!(out.status, RunStatus::ReachedTEnd);
        assert_eq!(out.t_final, 1.0);
        assert_eq!(out.final_state.t(), 1.0);
        let GeometryState::Conformal(c) = &out.final_state else {
            unreachable!()
        };
        assert!(c.u.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn records_increase_and_interior_rows_have_residuals() {
        let s = torus(0.3, 16);
        let p = FlowParams::ricci(2).unwrap();
        let mut cfg = IntegratorConfig::with_t_end(0.2);
        cfg.record_every = 3;
        let out = run(&s, &p, &cfg).unwrap();
        assert!(out.records.windows(2).all(|w| w[0].t < w[1].t));
        let n = out.records.len();
        assert!(n > 3);
        assert!(out.records[0].res_r_evol.is_nan());
        assert!(out.records[n - 1].res_r_evol.is_nan());
        assert!(out.records[1..n - 1].iter().all(|r| r.res_r_evol.is_finite()));
        assert!(out.records.iter().all(|r| r.res_ric_evol.is_nan()));
        assert_eq!(out.records[n - 1].t, 0.2);
    }

    #[test]
    fn every_step_respects_the_diffusion_limit() {
        let s = torus(0.3, 16);
        let p = FlowParams::new(1.0, 0.5, 2).unwrap();
        let out = run(&s, &p, &IntegratorConfig::with_t_end(0.1)).unwrap();
        assert!(out.step_log.iter().all(|e| e.dt <= e.diffusion_limit));
    }

    #[test]
    fn product_cylinder_dies_near_quarter() {
        let s = GeometryState::Warped(WarpedProductState::product(16, 4, 1.0, 1.0).unwrap());
        let p = FlowParams::ricci(4).unwrap();
        let out = run(&s, &p, &IntegratorConfig::with_t_end(1.0)).unwrap();
        assert!(matches!(
            out.status,
            RunStatus::BlowupDetected | RunStatus::DegenerateMetric
        ));
        assert!((out.t_final - 0.25).abs() < 1e-3, "{}", out.t_final);
    }

    #[test]
    fn step_budget_is_reported() {
        let s = torus(0.3, 16);
        let p = FlowParams::ricci(2).unwrap();
        let mut cfg = IntegratorConfig::with_t_end(1.0);
        cfg.max_steps = 3;
        let out = run(&s, &p, &cfg).unwrap();
        assert_eq!(out.status, RunStatus::MaxSteps);
        assert_eq!(out.steps, 3);
        assert_eq!(out.records.len(), 4);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s = torus(0.3, 16);
        assert!(run(&s, &FlowParams::ricci(3).unwrap(), &IntegratorConfig::default()).is_err());
    }
}
