use super::PinchingContext;
use crate::error::{Error, Result};
use crate::geometry::{CurvatureFields, GeometryState, RicciFrame, WarpedProductState};
use crate::grid::d2;
use crate::params::FlowParams;

/// Per-state quantities that go into a [`super::FlowRecord`].
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMetrics {
    pub r_min: f64,
    pub r_max: f64,
    pub volume: f64,
    pub total_scalar: f64,
    pub f_max: f64,
    pub rb_min: f64,
    pub pinch_scale: f64,
    pub ric_hess_sup: f64,
    /// Un-weighted `sup |nabla^k Rm|` proxies for `k = 1, 2`.
    pub proxies: [f64; 2],
}

/// Largest absolute pure second difference of `R`, divided by `h^2`.
fn hessian_proxy(state: &GeometryState, scalar: &[f64]) -> Vec<f64> {
    match state {
        GeometryState::Conformal(s) => {
            let g = s.grid();
            (0..scalar.len())
                .map(|i| g.max_second_difference_at(scalar, i / g.n, i % g.n))
                .collect()
        }
        GeometryState::Warped(s) => d2(scalar, s.h()).iter().map(|v| v.abs()).collect(),
    }
}

pub fn snapshot_metrics(state: &GeometryState, curv: &CurvatureFields, ctx: &PinchingContext) -> SnapshotMetrics {
    let b = ctx.b;
    let hess = hessian_proxy(state, &curv.scalar);
    let mut f_max: f64 = 0.0;
    let mut rb_min = f64::INFINITY;
    let mut pinch_scale = f64::NEG_INFINITY;
    let mut ric_hess_sup: f64 = 0.0;
    for i in 0..curv.len() {
        let rb = curv.scalar[i] + b;
        if curv.dim >= 3 {
            f_max = f_max.max(curv.ric0_norm2[i] / (rb * rb));
        }
        rb_min = rb_min.min(rb);
        let num = curv.weyl_norm2[i].sqrt() + curv.grad_r_norm2[i].sqrt() + hess[i];
        pinch_scale = pinch_scale.max(num / rb + rb);
        ric_hess_sup = ric_hess_sup.max(curv.ric_norm2(i).sqrt() + hess[i]);
    }
    SnapshotMetrics {
        r_min: curv.r_min(),
        r_max: curv.r_max(),
        volume: state.volume(),
        total_scalar: state.integrate(&curv.scalar),
        f_max,
        rb_min,
        pinch_scale,
        ric_hess_sup,
        proxies: derivative_proxies(state, curv),
    }
}

/// Finite-difference proxies for `sup |nabla Rm|` and `sup |nabla^2 Rm|`.
///
/// Each frame curvature component is weighted so that the `k = 0` proxy equals `|Rm|`.
pub fn derivative_proxies(state: &GeometryState, curv: &CurvatureFields) -> [f64; 2] {
    match state {
        GeometryState::Conformal(s) => {
            // |Rm| = |R| in two dimensions.
            let g = s.grid();
            let mut out = [0.0f64; 2];
            for i in 0..curv.len() {
                let (row, col) = (i / g.n, i % g.n);
                let w = (-2.0 * s.u[i]).exp();
                out[0] = out[0].max(curv.grad_r_norm2[i].sqrt());
                out[1] = out[1].max(w * g.max_second_difference_at(&curv.scalar, row, col));
            }
            out
        }
        GeometryState::Warped(s) => {
            let RicciFrame::Warped { axial, spherical } = &curv.ric_frame else {
                return [f64::NAN; 2];
            };
            let n = s.dim() as f64;
            let mixed: Vec<f64> = axial.iter().map(|a| a / (n - 1.0)).collect();
            let sphere: Vec<f64> = spherical
                .iter()
                .zip(&mixed)
                .map(|(sp, l)| (sp - l) / (n - 2.0))
                .collect();
            let (wl, wk) = (4.0 * (n - 1.0), 2.0 * (n - 1.0) * (n - 2.0));
            let combine = |dl: &[f64], dk: &[f64]| {
                dl.iter()
                    .zip(dk)
                    .map(|(a, b)| (wl * a * a + wk * b * b).sqrt())
                    .fold(0.0, f64::max)
            };
            [
                combine(&s.d_sigma(&mixed), &s.d_sigma(&sphere)),
                combine(&s.d2_sigma(&mixed), &s.d2_sigma(&sphere)),
            ]
        }
    }
}

/// Second-order derivative at `t0` from three samples at possibly unequal spacings.
pub fn three_point_derivative(t: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2]
}

fn scalar_of(state: &GeometryState) -> Result<Vec<f64>> {
    match state {
        GeometryState::Conformal(s) => s.scalar_curvature(false),
        GeometryState::Warped(s) => Ok(s.frame_curvature()?.scalar),
    }
}

fn check_neighbours(prev: &GeometryState, cur: &GeometryState, next: &GeometryState) -> Result<()> {
    if !(prev.t() < cur.t() && cur.t() < next.t()) {
        return Err(Error::RejectedInput(format!(
            "snapshots must be strictly increasing in time, got {}, {}, {}",
            prev.t(),
            cur.t(),
            next.t()
        )));
    }
    if prev.kind() != cur.kind() || cur.kind() != next.kind() {
        return Err(Error::RejectedInput("snapshots belong to different geometries".into()));
    }
    Ok(())
}

/// `|| dR/dt - [(n-1) beta + alpha] lap R - 2 alpha |Ric|^2 - beta R^2 ||_inf` at the middle
/// snapshot, with `dR/dt` from three-point differencing.
pub fn evolution_residual_r(
    prev: &GeometryState,
    cur: &GeometryState,
    next: &GeometryState,
    params: &FlowParams,
) -> Result<f64> {
    check_neighbours(prev, cur, next)?;
    let (r0, r2) = (scalar_of(prev)?, scalar_of(next)?);
    let curv = cur.curvature()?;
    let times = [prev.t(), cur.t(), next.t()];
    let diff = params.trace_diffusivity();
    let mut worst: f64 = 0.0;
    for i in 0..curv.len() {
        let r = curv.scalar[i];
        let dr = three_point_derivative(times, [r0[i], r, r2[i]]);
        let predicted = diff * curv.lap_r[i] + 2.0 * params.alpha * curv.ric_norm2(i) + params.beta * r * r;
        worst = worst.max((dr - predicted).abs());
    }
    Ok(worst)
}

/// Predicted time derivatives of the axial and sphere Ricci eigenvalues of a warped state.
fn ricci_eigen_rates(s: &WarpedProductState, params: &FlowParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let frame = s.frame_curvature()?;
    let n = s.dim() as f64;
    let (a, b) = (params.alpha, params.beta);
    // Ric = mu g + nu N (x) N with N the unit axial field.
    let mu = &frame.spherical;
    let nu: Vec<f64> = frame.axial.iter().zip(mu).map(|(x, y)| x - y).collect();
    let lap_mu = s.laplacian(mu);
    let lap_nu = s.laplacian(&nu);
    let lap_r = s.laplacian(&frame.scalar);
    let r_s = s.d_sigma(&frame.scalar);
    let r_ss = s.d2_sigma(&frame.scalar);
    let psi_s = s.d_sigma(&s.psi);
    let len = s.len();
    let mut axial_rate = Vec::with_capacity(len);
    let mut sphere_rate = Vec::with_capacity(len);
    for i in 0..len {
        let m = psi_s[i] / s.psi[i];
        let (l, k) = (frame.mixed[i], frame.sphere[i]);
        let (la, ls, r) = (frame.axial[i], frame.spherical[i], frame.scalar[i]);

        let lap_ric_axial = lap_mu[i] + lap_nu[i] - 2.0 * (n - 1.0) * nu[i] * m * m;
        let lap_ric_sphere = lap_mu[i] + 2.0 * nu[i] * m * m;
        let rm_ric_axial = (n - 1.0) * l * ls;
        let rm_ric_sphere = l * la + (n - 2.0) * k * ls;
        let hess_axial = r_ss[i];
        let hess_sphere = r_s[i] * m;

        let tensor_axial = a * lap_ric_axial + 2.0 * a * rm_ric_axial - 2.0 * a * la * la
            + 0.5 * b * ((n - 2.0) * hess_axial + lap_r[i]);
        let tensor_sphere = a * lap_ric_sphere + 2.0 * a * rm_ric_sphere - 2.0 * a * ls * ls
            + 0.5 * b * ((n - 2.0) * hess_sphere + lap_r[i]);
        // Frame eigenvalue = coordinate component / metric component.
        axial_rate.push(tensor_axial + la * (2.0 * a * la + b * r));
        sphere_rate.push(tensor_sphere + ls * (2.0 * a * ls + b * r));
    }
    Ok((axial_rate, sphere_rate))
}

/// Residual of the Ricci evolution equation restricted to the two frame eigenvalues of a
/// warped state. Not defined for the conformal family.
pub fn evolution_residual_ric(
    prev: &GeometryState,
    cur: &GeometryState,
    next: &GeometryState,
    params: &FlowParams,
) -> Result<f64> {
    check_neighbours(prev, cur, next)?;
    let (GeometryState::Warped(p), GeometryState::Warped(c), GeometryState::Warped(q)) = (prev, cur, next) else {
        return Err(Error::UnsupportedDimension {
            dim: cur.dim(),
            reason: "the Ricci eigenvalue residual is defined for warped states",
        });
    };
    let (fp, fc, fq) = (p.frame_curvature()?, c.frame_curvature()?, q.frame_curvature()?);
    let (axial_rate, sphere_rate) = ricci_eigen_rates(c, params)?;
    let times = [p.t, c.t, q.t];
    let mut worst: f64 = 0.0;
    for i in 0..c.len() {
        let da = three_point_derivative(times, [fp.axial[i], fc.axial[i], fq.axial[i]]);
        let ds = three_point_derivative(times, [fp.spherical[i], fc.spherical[i], fq.spherical[i]]);
        worst = worst.max((da - axial_rate[i]).abs()).max((ds - sphere_rate[i]).abs());
    }
    Ok(worst)
}

/// Three-point `dVol/dt` at the middle snapshot.
pub fn volume_rate(prev: &GeometryState, cur: &GeometryState, next: &GeometryState) -> Result<f64> {
    check_neighbours(prev, cur, next)?;
    Ok(three_point_derivative(
        [prev.t(), cur.t(), next.t()],
        [prev.volume(), cur.volume(), next.volume()],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConformalTorusState;

    #[test]
    fn three_point_derivative_is_exact_on_quadratics() {
        let f = |t: f64| 3.0 * t * t - 2.0 * t + 1.0;
        let t = [0.1, 0.13, 0.2];
        let d = three_point_derivative(t, [f(t[0]), f(t[1]), f(t[2])]);
        assert!((d - (6.0 * 0.13 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn flat_torus_residual_vanishes() {
        let mk = |t: f64| {
            let mut s = GeometryState::Conformal(ConformalTorusState::flat(16).unwrap());
            s.set_t(t);
            s
        };
        let p = FlowParams::new(1.0, 0.3, 2).unwrap();
        let r = evolution_residual_r(&mk(0.0), &mk(0.01), &mk(0.02), &p).unwrap();
        assert!(r <= 1e-14);
        assert!(evolution_residual_ric(&mk(0.0), &mk(0.01), &mk(0.02), &p).is_err());
    }

    #[test]
    fn out_of_order_snapshots_are_rejected() {
        let s = GeometryState::Conformal(ConformalTorusState::flat(8).unwrap());
        let p = FlowParams::ricci(2).unwrap();
        assert!(evolution_residual_r(&s, &s, &s, &p).is_err());
    }

    #[test]
    fn cylinder_has_zero_derivative_proxies() {
        let s = GeometryState::Warped(WarpedProductState::product(16, 4, 1.2, 1.0).unwrap());
        let c = s.curvature().unwrap();
        assert_eq!(derivative_proxies(&s, &c), [0.0, 0.0]);
    }
}
