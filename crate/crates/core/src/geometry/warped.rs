use std::f64::consts::{PI, TAU};

use super::algebraic::{decomposition_norms, AlgebraicCurvature};
use super::{CurvatureFields, RicciFrame, POSITIVITY_FLOOR};
use crate::error::{Error, Result};
use crate::grid::{d1, d2};

/// `g = phi(s)^2 ds^2 + psi(s)^2 g_{S^{n-1}}` on `S^1 x S^{n-1}`, periodic in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedProductState {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    dim: usize,
    h: f64,
    pub t: f64,
}

/// Sectional and Ricci curvatures of a warped state in the orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedFrame {
    /// Curvature `L` of planes containing the axial direction.
    pub mixed: Vec<f64>,
    /// Curvature `K` of planes tangent to the sphere.
    pub sphere: Vec<f64>,
    /// `(n-1) L`.
    pub axial: Vec<f64>,
    /// `L + (n-2) K`.
    pub spherical: Vec<f64>,
    pub scalar: Vec<f64>,
}

impl WarpedProductState {
    /// Samples on `[0, 2 pi)`.
    pub fn new(phi: Vec<f64>, psi: Vec<f64>, dim: usize) -> Result<Self> {
        Self::with_period(phi, psi, dim, TAU)
    }

    /// Samples on `[0, period)`; used to compare reparametrised profiles.
    pub fn with_period(phi: Vec<f64>, psi: Vec<f64>, dim: usize, period: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::UnsupportedDimension {
                dim,
                reason: "warped products S^1 x S^{n-1} need n >= 3",
            });
        }
        if phi.len() != psi.len() {
            return Err(Error::RejectedInput(format!(
                "profile lengths differ: phi has {}, psi has {}",
                phi.len(),
                psi.len()
            )));
        }
        if phi.len() < 8 {
            return Err(Error::InvalidParameter {
                name: "grid_n",
                reason: format!("warped grid needs N >= 8, got {}", phi.len()),
            });
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "period",
                reason: format!("period must be positive, got {period}"),
            });
        }
        let h = period / phi.len() as f64;
        let state = Self {
            phi,
            psi,
            dim,
            h,
            t: 0.0,
        };
        state.check()?;
        Ok(state)
    }

    pub fn from_fn(n: usize, dim: usize, phi: impl Fn(f64) -> f64, psi: impl Fn(f64) -> f64) -> Result<Self> {
        let h = TAU / n as f64;
        let s = |i: usize| i as f64 * h;
        Self::new(
            (0..n).map(|i| phi(s(i))).collect(),
            (0..n).map(|i| psi(s(i))).collect(),
            dim,
        )
    }

    /// Round cylinder `phi0^2 ds^2 + r0^2 g_S`.
    pub fn product(n: usize, dim: usize, r0: f64, phi0: f64) -> Result<Self> {
        Self::new(vec![phi0; n], vec![r0; n], dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Finiteness and positivity; reports the location of the smallest offending value.
    pub fn check(&self) -> Result<()> {
        for (name, f) in [("phi", &self.phi), ("psi", &self.psi)] {
            if let Some(i) = f.iter().position(|v| !v.is_finite()) {
                return Err(Error::RejectedInput(format!("non-finite {name} at grid index {i}")));
            }
            let (index, value) =
                f.iter()
                    .copied()
                    .enumerate()
                    .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
            if value < POSITIVITY_FLOOR {
                return Err(Error::DegenerateMetric {
                    field: name,
                    index,
                    value,
                });
            }
        }
        Ok(())
    }

    /// Arclength derivative `d/dsigma = (1/phi) d/ds` of a grid function.
    pub fn d_sigma(&self, f: &[f64]) -> Vec<f64> {
        d1(f, self.h).iter().zip(&self.phi).map(|(df, p)| df / p).collect()
    }

    /// Second arclength derivative `(f'' phi - f' phi') / phi^3`.
    pub fn d2_sigma(&self, f: &[f64]) -> Vec<f64> {
        let f1 = d1(f, self.h);
        let f2 = d2(f, self.h);
        let p1 = d1(&self.phi, self.h);
        (0..self.len())
            .map(|i| {
                let p = self.phi[i];
                (f2[i] * p - f1[i] * p1[i]) / (p * p * p)
            })
            .collect()
    }

    /// Laplacian of an s-dependent function: `f_ss + (n-1) (psi_s / psi) f_s` in arclength.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let fs = self.d_sigma(f);
        let fss = self.d2_sigma(f);
        let mean = self.mean_curvature();
        (0..self.len()).map(|i| fss[i] + mean[i] * fs[i]).collect()
    }

    /// `(n-1) psi_sigma / psi`, the mean curvature of the sphere slices.
    pub fn mean_curvature(&self) -> Vec<f64> {
        let n1 = self.dim as f64 - 1.0;
        self.d_sigma(&self.psi)
            .iter()
            .zip(&self.psi)
            .map(|(ps, p)| n1 * ps / p)
            .collect()
    }

    pub fn frame_curvature(&self) -> Result<WarpedFrame> {
        self.check()?;
        let n = self.dim as f64;
        let psi_s = self.d_sigma(&self.psi);
        let psi_ss = self.d2_sigma(&self.psi);
        let len = self.len();
        let mut frame = WarpedFrame {
            mixed: Vec::with_capacity(len),
            sphere: Vec::with_capacity(len),
            axial: Vec::with_capacity(len),
            spherical: Vec::with_capacity(len),
            scalar: Vec::with_capacity(len),
        };
        for i in 0..len {
            let psi = self.psi[i];
            let l = -psi_ss[i] / psi;
            let k = (1.0 - psi_s[i] * psi_s[i]) / (psi * psi);
            let axial = (n - 1.0) * l;
            let spherical = l + (n - 2.0) * k;
            frame.mixed.push(l);
            frame.sphere.push(k);
            frame.axial.push(axial);
            frame.spherical.push(spherical);
            frame.scalar.push(axial + (n - 1.0) * spherical);
        }
        Ok(frame)
    }

    pub fn curvature(&self) -> Result<CurvatureFields> {
        let frame = self.frame_curvature()?;
        let n = self.dim as f64;
        let len = self.len();
        let mut rm_norm2 = Vec::with_capacity(len);
        let mut ric0_norm2 = Vec::with_capacity(len);
        let mut weyl_norm2 = Vec::with_capacity(len);
        for i in 0..len {
            let (l, k) = (frame.mixed[i], frame.sphere[i]);
            rm_norm2.push(4.0 * (n - 1.0) * l * l + 2.0 * (n - 1.0) * (n - 2.0) * k * k);
            let mean = frame.scalar[i] / n;
            let (a, b) = (frame.axial[i] - mean, frame.spherical[i] - mean);
            ric0_norm2.push(a * a + (n - 1.0) * b * b);
            let (_, _, w2, _) = decomposition_norms(&AlgebraicCurvature::warped_frame(self.dim, l, k))?;
            weyl_norm2.push(w2);
        }
        let lap_r = self.laplacian(&frame.scalar);
        let grad_r_norm2 = self.d_sigma(&frame.scalar).iter().map(|g| g * g).collect();
        Ok(CurvatureFields {
            dim: self.dim,
            scalar: frame.scalar,
            ric_frame: RicciFrame::Warped {
                axial: frame.axial,
                spherical: frame.spherical,
            },
            rm_norm2,
            ric0_norm2,
            weyl_norm2,
            lap_r,
            grad_r_norm2,
        })
    }

    /// Frame curvature tensor at grid point `i`.
    pub fn algebraic_at(&self, i: usize) -> Result<AlgebraicCurvature> {
        let frame = self.frame_curvature()?;
        Ok(AlgebraicCurvature::warped_frame(
            self.dim,
            frame.mixed[i],
            frame.sphere[i],
        ))
    }

    /// Riemannian integral `omega_{n-1} sum f phi psi^{n-1} h`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let m = self.dim as i32 - 1;
        let total: f64 = (0..self.len()).map(|i| f[i] * self.phi[i] * self.psi[i].powi(m)).sum();
        total * self.h * unit_sphere_area(self.dim - 1)
    }

    pub fn volume(&self) -> f64 {
        let m = self.dim as i32 - 1;
        let total: f64 = (0..self.len()).map(|i| self.phi[i] * self.psi[i].powi(m)).sum();
        total * self.h * unit_sphere_area(self.dim - 1)
    }
}

/// Area of the unit `m`-sphere, `2 pi^{(m+1)/2} / Gamma((m+1)/2)`.
pub fn unit_sphere_area(m: usize) -> f64 {
    // Gamma at integer and half-integer points by the recurrence.
    let k = m + 1;
    let mut gamma = if k.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if k.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < k as f64 / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(k as f64 / 2.0) / gamma
}
