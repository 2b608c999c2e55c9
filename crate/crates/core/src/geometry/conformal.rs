use rayon::prelude::*;

use super::{CurvatureFields, RicciFrame};
use crate::error::{Error, Result};
use crate::grid::Grid2;

/// `g = e^{2u} (dx1^2 + dx2^2)` on the square torus of side `2 pi`, sampled on an
/// `n x n` grid (row-major, `x1` along columns).
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalTorusState {
    pub u: Vec<f64>,
    n: usize,
    h: f64,
    pub t: f64,
}

impl ConformalTorusState {
    pub fn new(u: Vec<f64>, n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "grid_n",
                reason: format!("torus grid needs an even N >= 8, got {n}"),
            });
        }
        if u.len() != n * n {
            return Err(Error::RejectedInput(format!(
                "conformal exponent has {} samples, expected {}",
                u.len(),
                n * n
            )));
        }
        let state = Self {
            u,
            n,
            h: std::f64::consts::TAU / n as f64,
            t: 0.0,
        };
        state.check_finite()?;
        Ok(state)
    }

    /// Samples `u(x1, x2)` at the grid nodes.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let h = std::f64::consts::TAU / n as f64;
        let u = (0..n * n).map(|i| f((i % n) as f64 * h, (i / n) as f64 * h)).collect();
        Self::new(u, n)
    }

    pub fn flat(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n * n], n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn grid(&self) -> Grid2 {
        Grid2 { n: self.n, h: self.h }
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.u.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::RejectedInput(format!(
                "non-finite conformal exponent at grid index {i}"
            ))),
            None => Ok(()),
        }
    }

    /// `R = -2 e^{-2u} lap u`.
    pub fn scalar_curvature(&self, parallel: bool) -> Result<Vec<f64>> {
        self.check_finite()?;
        let grid = self.grid();
        let mut r = vec![0.0; self.u.len()];
        let fill = |(row, out): (usize, &mut [f64])| {
            for (col, v) in out.iter_mut().enumerate() {
                let u = self.u[grid.idx(row, col)];
                *v = -2.0 * (-2.0 * u).exp() * grid.laplacian_at(&self.u, row, col);
            }
        };
        if parallel {
            r.par_chunks_mut(self.n).enumerate().for_each(fill);
        } else {
            r.chunks_mut(self.n).enumerate().for_each(fill);
        }
        Ok(r)
    }

    pub fn curvature(&self) -> Result<CurvatureFields> {
        let scalar = self.scalar_curvature(false)?;
        let grid = self.grid();
        let len = scalar.len();
        let mut lap_r = vec![0.0; len];
        let mut grad_r_norm2 = vec![0.0; len];
        for row in 0..self.n {
            for col in 0..self.n {
                let i = grid.idx(row, col);
                let w = (-2.0 * self.u[i]).exp();
                lap_r[i] = w * grid.laplacian_at(&scalar, row, col);
                let (a, b) = grid.gradient_at(&scalar, row, col);
                grad_r_norm2[i] = w * (a * a + b * b);
            }
        }
        Ok(CurvatureFields {
            dim: 2,
            ric_frame: RicciFrame::Isotropic(scalar.iter().map(|r| 0.5 * r).collect()),
            rm_norm2: scalar.iter().map(|r| r * r).collect(),
            ric0_norm2: vec![0.0; len],
            weyl_norm2: vec![0.0; len],
            scalar,
            lap_r,
            grad_r_norm2,
        })
    }

    /// Riemannian integral `sum f e^{2u} h^2`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let cell = self.h * self.h;
        self.u.iter().zip(f).map(|(u, v)| v * (2.0 * u).exp()).sum::<f64>() * cell
    }

    pub fn volume(&self) -> f64 {
        let cell = self.h * self.h;
        self.u.iter().map(|u| (2.0 * u).exp()).sum::<f64>() * cell
    }
}
