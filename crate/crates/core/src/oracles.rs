//! Closed-form solutions and bounds used as ground truth.
//!
//! Queries past a finite extinction time are flagged rather than rejected, so parameter
//! sweeps can tabulate lifetimes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::FlowParams;

/// An oracle value with a flag set when the query time lies at or past extinction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Flagged<T> {
    pub value: T,
    pub past_extinction: bool,
}

/// Einstein metrics `g(t) = c(t) g0` with `Ric(g0) = lambda g0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EinsteinFamily {
    pub lambda: f64,
    pub c0: f64,
    pub dim: usize,
}

impl EinsteinFamily {
    pub fn new(lambda: f64, c0: f64, dim: usize) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "c0",
                reason: format!("initial scale must be positive, got {c0}"),
            });
        }
        if dim < 2 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: format!("dimension must be at least 2, got {dim}"),
            });
        }
        Ok(Self { lambda, c0, dim })
    }

    /// Round sphere of radius one: `lambda = n - 1`.
    pub fn round_sphere(dim: usize) -> Self {
        Self {
            lambda: dim as f64 - 1.0,
            c0: 1.0,
            dim,
        }
    }

    /// Scalar curvature of `g(t)` for a scale `c`: `n lambda / c`.
    pub fn scalar_at_scale(&self, c: f64) -> f64 {
        self.dim as f64 * self.lambda / c
    }

    /// Initial scalar curvature.
    pub fn initial_scalar(&self) -> f64 {
        self.scalar_at_scale(self.c0)
    }

    /// Rate `dc/dt = -lambda (2 alpha + n beta)`.
    pub fn scale_rate(&self, params: &FlowParams) -> f64 {
        -self.lambda * (2.0 * params.alpha + self.dim as f64 * params.beta)
    }

    /// Time at which the scale reaches zero, if it ever does.
    pub fn extinction_time(&self, params: &FlowParams) -> Option<f64> {
        let rate = self.scale_rate(params);
        (rate < 0.0).then(|| self.c0 / -rate)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "t",
            reason: format!("query time must be finite and non-negative, got {t}"),
        })
    }
}

/// `c(t) = c0 - lambda (2 alpha + n beta) t`; flagged when `c(t) <= 0`.
pub fn einstein_scale(fam: &EinsteinFamily, params: &FlowParams, t: f64) -> Result<Flagged<f64>> {
    check_time(t)?;
    let c = fam.c0 + fam.scale_rate(params) * t;
    Ok(Flagged {
        value: c,
        past_extinction: c <= 0.0,
    })
}

/// Closed-form round-cylinder profiles `(phi(t), psi(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductProfile {
    pub phi: f64,
    pub psi: f64,
}

/// `d(psi^2)/dt = -(n-2)(2 alpha + (n-1) beta)` on the round cylinder of radius `psi`.
pub fn product_psi2_rate(params: &FlowParams) -> f64 {
    let n = params.n();
    -(n - 2.0) * (2.0 * params.alpha + (n - 1.0) * params.beta)
}

/// Extinction time `r0^2 / ((n-2)(2 alpha + (n-1) beta))` when the cylinder shrinks.
pub fn product_extinction_time(r0: f64, params: &FlowParams) -> Option<f64> {
    let rate = product_psi2_rate(params);
    (rate < 0.0).then(|| r0 * r0 / -rate)
}

/// Exact evolution of `phi0^2 ds^2 + r0^2 g_{S^{n-1}}`. Past extinction the profile is NaN
/// and the flag is set.
pub fn product_metric_solution(r0: f64, phi0: f64, params: &FlowParams, t: f64) -> Result<Flagged<ProductProfile>> {
    check_time(t)?;
    if params.dim < 3 {
        return Err(Error::UnsupportedDimension {
            dim: params.dim,
            reason: "the cylinder S^1 x S^{n-1} needs n >= 3",
        });
    }
    if !(r0 > 0.0 && phi0 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "r0/phi0",
            reason: format!("initial radii must be positive, got r0 = {r0}, phi0 = {phi0}"),
        });
    }
    let n = params.n();
    let psi2 = r0 * r0 + product_psi2_rate(params) * t;
    if psi2 <= 0.0 {
        return Ok(Flagged {
            value: ProductProfile {
                phi: f64::NAN,
                psi: f64::NAN,
            },
            past_extinction: true,
        });
    }
    let denom = 2.0 * params.alpha + (n - 1.0) * params.beta;
    let phi2 = if denom != 0.0 {
        let exponent = params.beta * (n - 1.0) / denom;
        phi0 * phi0 * (psi2 / (r0 * r0)).powf(exponent)
    } else {
        // psi is frozen, so phi^2 decays exponentially at the constant rate beta R.
        phi0 * phi0 * (-params.beta * (n - 1.0) * (n - 2.0) * t / (r0 * r0)).exp()
    };
    Ok(Flagged {
        value: ProductProfile {
            phi: phi2.sqrt(),
            psi: psi2.sqrt(),
        },
        past_extinction: false,
    })
}

/// Time derivatives of the closed-form cylinder solution.
pub fn product_metric_rates(r0: f64, phi0: f64, params: &FlowParams, t: f64) -> Result<Flagged<ProductProfile>> {
    let sol = product_metric_solution(r0, phi0, params, t)?;
    if sol.past_extinction {
        return Ok(sol);
    }
    let n = params.n();
    let ProductProfile { phi, psi } = sol.value;
    let psi2_rate = product_psi2_rate(params);
    let phi2_rate_over_phi2 = -params.beta * (n - 1.0) * (n - 2.0) / (psi * psi);
    Ok(Flagged {
        value: ProductProfile {
            phi: 0.5 * phi * phi2_rate_over_phi2,
            psi: 0.5 * psi2_rate / psi,
        },
        past_extinction: false,
    })
}

/// Upper bound `n(n-1) / ((n-2) a alpha)` on the lifetime when `R >= a > 0` initially.
/// Infinite when `a <= 0`, `n = 2` or `alpha <= 0`.
pub fn blow_up_bound(a: f64, params: &FlowParams) -> f64 {
    let n = params.n();
    if a > 0.0 && params.dim >= 3 && params.alpha > 0.0 {
        n * (n - 1.0) / ((n - 2.0) * a * params.alpha)
    } else {
        f64::INFINITY
    }
}

/// Lower bound `n(n-1) a / (n(n-1) - (n-2) a alpha t)` on the scalar-curvature minimum.
/// Flagged (value `+inf`) once `t` reaches [`blow_up_bound`].
pub fn scalar_min_comparison(a: f64, params: &FlowParams, t: f64) -> Result<Flagged<f64>> {
    check_time(t)?;
    if !(a > 0.0) || params.dim < 3 {
        return Err(Error::InvalidParameter {
            name: "a",
            reason: format!("comparison bound needs a > 0 and n >= 3 (a = {a}, n = {})", params.dim),
        });
    }
    let n = params.n();
    let nn1 = n * (n - 1.0);
    let denom = nn1 - (n - 2.0) * a * params.alpha * t;
    if denom <= 0.0 {
        return Ok(Flagged {
            value: f64::INFINITY,
            past_extinction: true,
        });
    }
    Ok(Flagged {
        value: nn1 * a / denom,
        past_extinction: false,
    })
}
