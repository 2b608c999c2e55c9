//! Curvature of the two supported metric families.

pub mod algebraic;
pub mod conformal;
pub mod warped;

pub use algebraic::{
    b_identity_residual, decomposition_defect, decomposition_norms, hamilton_b, weyl_from_rm, AlgebraicCurvature,
    Tensor4,
};
pub use conformal::ConformalTorusState;
pub use warped::{WarpedFrame, WarpedProductState};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Below this value of `phi` or `psi` a warped metric counts as degenerate.
pub const POSITIVITY_FLOOR: f64 = 1e-8;

/// Orthonormal-frame Ricci eigenvalues per grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum RicciFrame {
    /// Surface case: `Ric = (R/2) g`, one value per point.
    Isotropic(Vec<f64>),
    /// Axial eigenvalue and the (n-1)-fold sphere eigenvalue.
    Warped { axial: Vec<f64>, spherical: Vec<f64> },
}

/// Pointwise curvature quantities on a grid. Norms are orthonormal-frame squared sums.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureFields {
    pub dim: usize,
    pub scalar: Vec<f64>,
    pub ric_frame: RicciFrame,
    pub rm_norm2: Vec<f64>,
    pub ric0_norm2: Vec<f64>,
    pub weyl_norm2: Vec<f64>,
    pub lap_r: Vec<f64>,
    pub grad_r_norm2: Vec<f64>,
}

impl CurvatureFields {
    pub fn len(&self) -> usize {
        self.scalar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scalar.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.scalar.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn r_max(&self) -> f64 {
        self.scalar.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_r(&self) -> f64 {
        self.scalar.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `|Ric|^2` at point `i`.
    pub fn ric_norm2(&self, i: usize) -> f64 {
        match &self.ric_frame {
            RicciFrame::Isotropic(r) => self.dim as f64 * r[i] * r[i],
            RicciFrame::Warped { axial, spherical } => {
                axial[i] * axial[i] + (self.dim as f64 - 1.0) * spherical[i] * spherical[i]
            }
        }
    }
}

/// Which metric family a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Conformal2d,
    Warped,
}

/// A metric snapshot of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryState {
    Conformal(ConformalTorusState),
    Warped(WarpedProductState),
}

impl GeometryState {
    pub fn kind(&self) -> GeometryKind {
        match self {
            Self::Conformal(_) => GeometryKind::Conformal2d,
            Self::Warped(_) => GeometryKind::Warped,
        }
    }

    pub fn t(&self) -> f64 {
        match self {
            Self::Conformal(s) => s.t,
            Self::Warped(s) => s.t,
        }
    }

    pub fn set_t(&mut self, t: f64) {
        match self {
            Self::Conformal(s) => s.t = t,
            Self::Warped(s) => s.t = t,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Conformal(_) => 2,
            Self::Warped(s) => s.dim(),
        }
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        match self {
            Self::Conformal(s) => s.h(),
            Self::Warped(s) => s.h(),
        }
    }

    pub fn curvature(&self) -> Result<CurvatureFields> {
        match self {
            Self::Conformal(s) => s.curvature(),
            Self::Warped(s) => s.curvature(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Self::Conformal(s) => s.volume(),
            Self::Warped(s) => s.volume(),
        }
    }

    /// Riemannian integral of a grid function.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        match self {
            Self::Conformal(s) => s.integrate(f),
            Self::Warped(s) => s.integrate(f),
        }
    }
}
