//! Flow coefficients and the regime in which the flow is strongly parabolic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the flow `dg/dt = -2 alpha Ric - beta R g` on an `dim`-manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub alpha: f64,
    pub beta: f64,
    pub dim: usize,
    /// Skip the regime check, for experiments with alpha <= 0 or beta <= -alpha/(n-1).
    pub allow_degenerate: bool,
}

impl FlowParams {
    /// Builds validated parameters. Fails outside the regime `alpha > 0, beta > -alpha/(n-1)`.
    pub fn new(alpha: f64, beta: f64, dim: usize) -> Result<Self> {
        let params = Self {
            alpha,
            beta,
            dim,
            allow_degenerate: false,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds parameters that only need to be finite with `dim >= 2`.
    pub fn degenerate(alpha: f64, beta: f64, dim: usize) -> Result<Self> {
        let params = Self {
            alpha,
            beta,
            dim,
            allow_degenerate: true,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn ricci(dim: usize) -> Result<Self> {
        Self::new(1.0, 0.0, dim)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: format!("dimension must be at least 2, got {}", self.dim),
            });
        }
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha/beta",
                reason: "coefficients must be finite".into(),
            });
        }
        if !self.allow_degenerate && !self.in_regime() {
            return Err(Error::OutsideRegime {
                alpha: self.alpha,
                beta: self.beta,
                dim: self.dim,
            });
        }
        Ok(())
    }

    /// `alpha > 0` and `beta > -alpha/(n-1)`, both strict.
    pub fn in_regime(&self) -> bool {
        let n1 = (self.dim - 1) as f64;
        self.alpha > 0.0 && self.beta > -self.alpha / n1
    }

    /// Diffusivity of the trace (conformal) mode, `alpha + (n-1) beta`.
    pub fn trace_diffusivity(&self) -> f64 {
        self.alpha + (self.dim as f64 - 1.0) * self.beta
    }

    /// Largest of the two principal-symbol eigenvalues.
    pub fn max_diffusivity(&self) -> f64 {
        self.alpha.max(self.trace_diffusivity())
    }

    pub fn n(&self) -> f64 {
        self.dim as f64
    }
}
