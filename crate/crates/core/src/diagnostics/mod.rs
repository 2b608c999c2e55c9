//! Machine-checkable monitors built from the maximum principle, the volume identity,
//! the curvature evolution equations and the pinching quantity.

mod monitors;
mod snapshot;

pub use monitors::{
    derivative_decay_monitor, pinching_monitor, scalar_min_monitor, volume_conservation_check, volume_rate_monitor,
    DecayReport, MonitorReport, PinchingPoint, PinchingReport, Tolerance,
};
pub use snapshot::{
    derivative_proxies, evolution_residual_r, evolution_residual_ric, snapshot_metrics, three_point_derivative,
    volume_rate, SnapshotMetrics,
};

use serde::{Deserialize, Serialize};

use crate::geometry::CurvatureFields;

/// One time-series row of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub t: f64,
    /// Step that produced this state (0 for the initial row).
    pub dt: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub volume: f64,
    /// `max |Ric°|^2 / (R + b)^2`; zero in two dimensions.
    pub f_max: f64,
    /// Residual of the scalar-curvature evolution equation (NaN at the ends of a run).
    pub res_r_evol: f64,
    /// Residual of the Ricci eigenvalue evolution (warped only, NaN otherwise).
    pub res_ric_evol: f64,
    /// `t^{(k+1)/2} sup |nabla^k Rm|` proxies for `k = 1, 2`.
    pub decay_k1: f64,
    pub decay_k2: f64,
    /// `int R dVol`.
    pub total_scalar: f64,
    /// Three-point `dVol/dt` (NaN at the ends of a run).
    pub dvol_dt: f64,
    /// `min (R + b)`.
    pub rb_min: f64,
    /// `max ((|W| + |grad R| + |hess R|) / (R + b) + R + b)`.
    pub pinch_scale: f64,
    /// `sup (|Ric| + |hess R|)`.
    pub ric_hess_sup: f64,
}

impl FlowRecord {
    pub const CSV_HEADER: &'static str = "t,dt,R_min,R_max,volume,f_max,res_R_evol,res_Ric_evol,decay_k1,decay_k2";

    pub fn csv_values(&self) -> [f64; 10] {
        [
            self.t,
            self.dt,
            self.r_min,
            self.r_max,
            self.volume,
            self.f_max,
            self.res_r_evol,
            self.res_ric_evol,
            self.decay_k1,
            self.decay_k2,
        ]
    }
}

/// Offset `b = 2 max |R(., 0)| + 1` fixed from the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinchingContext {
    pub b: f64,
}

impl PinchingContext {
    pub fn from_initial(curv: &CurvatureFields) -> Self {
        Self {
            b: 2.0 * curv.max_abs_r() + 1.0,
        }
    }
}
