//! Method-of-lines right-hand sides.

use crate::error::{Error, Result};
use crate::geometry::{ConformalTorusState, GeometryState, WarpedFrame, WarpedProductState};
use crate::params::FlowParams;

fn require_dim(params: &FlowParams, dim: usize) -> Result<()> {
    if params.dim != dim {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: format!("flow parameters are for n = {}, geometry has n = {dim}", params.dim),
        });
    }
    Ok(())
}

/// `du/dt = -(alpha + beta) R / 2`.
pub fn rhs_conformal2d(state: &ConformalTorusState, params: &FlowParams) -> Result<Vec<f64>> {
    Ok(conformal_tendency(state, params, false)?.0)
}

fn conformal_tendency(
    state: &ConformalTorusState,
    params: &FlowParams,
    parallel: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    require_dim(params, 2)?;
    let scalar = state.scalar_curvature(parallel)?;
    let c = -0.5 * (params.alpha + params.beta);
    Ok((scalar.iter().map(|r| c * r).collect(), scalar))
}

/// `phi_t = -(alpha lambda_s + beta R/2) phi`, `psi_t = -(alpha lambda_sph + beta R/2) psi`.
pub fn rhs_warped(state: &WarpedProductState, params: &FlowParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let (packed, _) = warped_tendency(state, params)?;
    let n = state.len();
    Ok((packed[..n].to_vec(), packed[n..].to_vec()))
}

fn warped_tendency(state: &WarpedProductState, params: &FlowParams) -> Result<(Vec<f64>, Vec<f64>)> {
    require_dim(params, state.dim())?;
    let frame = state.frame_curvature()?;
    let out = warped_rates_from_frame(&frame, &state.phi, &state.psi, params);
    Ok((out, frame.scalar))
}

/// Packed `(phi_t, psi_t)` for given frame curvatures.
pub fn warped_rates_from_frame(frame: &WarpedFrame, phi: &[f64], psi: &[f64], params: &FlowParams) -> Vec<f64> {
    let n = phi.len();
    let mut out = vec![0.0; 2 * n];
    for i in 0..n {
        let half_r = 0.5 * params.beta * frame.scalar[i];
        out[i] = -(params.alpha * frame.axial[i] + half_r) * phi[i];
        out[n + i] = -(params.alpha * frame.spherical[i] + half_r) * psi[i];
    }
    out
}

/// Packed tendency of either family together with the scalar curvature of `state`.
pub fn tendency(state: &GeometryState, params: &FlowParams, parallel: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    match state {
        GeometryState::Conformal(s) => conformal_tendency(s, params, parallel),
        GeometryState::Warped(s) => warped_tendency(s, params),
    }
}

/// Flat vector of the evolved unknowns (`u`, or `phi` followed by `psi`).
pub fn pack(state: &GeometryState) -> Vec<f64> {
    match state {
        GeometryState::Conformal(s) => s.u.clone(),
        GeometryState::Warped(s) => s.phi.iter().chain(&s.psi).copied().collect(),
    }
}

/// Replaces the unknowns of `like` with `data`, validating the result.
pub fn unpack(like: &GeometryState, data: Vec<f64>, t: f64) -> Result<GeometryState> {
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t });
    }
    let mut out = like.clone();
    match &mut out {
        GeometryState::Conformal(s) => s.u = data,
        GeometryState::Warped(s) => {
            let n = s.len();
            s.phi.copy_from_slice(&data[..n]);
            s.psi.copy_from_slice(&data[n..]);
            s.check()?;
        }
    }
    out.set_t(t);
    Ok(out)
}
