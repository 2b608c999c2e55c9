//! Pointwise curvature algebra in an orthonormal frame.
//!
//! Index convention: `R_{ijkl}` with `Ric_{ik} = sum_j R_{ijkj}`, so a space form of
//! sectional curvature `K` has `R_{ijkl} = K (d_ik d_jl - d_il d_jk)` and the unit
//! sphere has scalar curvature `n (n-1)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense rank-4 tensor over an `dim`-dimensional orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim.pow(4)],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let v = f(i, j, k, l);
                        t.set(i, j, k, l, v);
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.dim + j) * self.dim + k) * self.dim + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let idx = self.idx(i, j, k, l);
        self.data[idx] = v;
    }

    /// Squared frame norm (sum of squares of all components).
    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest single trace `|sum_i T_{ijil}|` over `(j, l)`.
    pub fn max_trace(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for l in 0..n {
                let s: f64 = (0..n).map(|i| self.get(i, j, i, l)).sum();
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    /// Largest violation of the pair antisymmetries, pair symmetry and first Bianchi identity.
    pub fn curvature_symmetry_violation(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        worst = worst
                            .max((r + self.get(j, i, k, l)).abs())
                            .max((r + self.get(i, j, l, k)).abs())
                            .max((r - self.get(k, l, i, j)).abs())
                            .max((r + self.get(j, k, i, l) + self.get(k, i, j, l)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// A tensor with the algebraic symmetries of a Riemann curvature tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicCurvature {
    rm: Tensor4,
}

impl AlgebraicCurvature {
    /// Relative tolerance used when validating symmetries.
    pub const SYMMETRY_TOL: f64 = 1e-10;

    /// Wraps `rm` after checking its symmetries and the first Bianchi identity.
    pub fn new(rm: Tensor4) -> Result<Self> {
        if rm.dim() < 2 {
            return Err(Error::UnsupportedDimension {
                dim: rm.dim(),
                reason: "curvature needs at least two dimensions",
            });
        }
        if rm.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::RejectedInput("non-finite curvature component".into()));
        }
        let violation = rm.curvature_symmetry_violation();
        if violation > Self::SYMMETRY_TOL * (1.0 + rm.max_abs()) {
            return Err(Error::SymmetryViolation {
                max_violation: violation,
            });
        }
        Ok(Self { rm })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            rm: Tensor4::zeros(dim),
        }
    }

    /// Constant sectional curvature `k`.
    pub fn space_form(dim: usize, k: f64) -> Self {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        Self {
            rm: Tensor4::from_fn(dim, |i, j, k2, l| k * (d(i, k2) * d(j, l) - d(i, l) * d(j, k2))),
        }
    }

    /// Curvature operator diagonal in the basis `e_i ^ e_j`, with the plane `(i, j)`
    /// carrying sectional curvature `sectional(i, j)`.
    pub fn diagonal(dim: usize, sectional: impl Fn(usize, usize) -> f64) -> Self {
        let mut rm = Tensor4::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                if i == j {
                    continue;
                }
                let kij = sectional(i.min(j), i.max(j));
                rm.set(i, j, i, j, kij);
                rm.set(i, j, j, i, -kij);
            }
        }
        Self { rm }
    }

    /// Frame curvature of a warped product over a circle: index 0 is the axial
    /// direction, planes containing it have curvature `mixed`, sphere planes `sphere`.
    pub fn warped_frame(dim: usize, mixed: f64, sphere: f64) -> Self {
        Self::diagonal(dim, |i, _| if i == 0 { mixed } else { sphere })
    }

    /// Kulkarni-Nomizu product `h (.) k` of two symmetric matrices.
    pub fn kulkarni_nomizu(h: &DMatrix<f64>, k: &DMatrix<f64>) -> Result<Self> {
        let n = h.nrows();
        if h.shape() != (n, n) || k.shape() != (n, n) {
            return Err(Error::RejectedInput(
                "Kulkarni-Nomizu factors must be square and of equal size".into(),
            ));
        }
        let rm = Tensor4::from_fn(n, |i, j, a, b| {
            h[(i, a)] * k[(j, b)] + h[(j, b)] * k[(i, a)] - h[(i, b)] * k[(j, a)] - h[(j, a)] * k[(i, b)]
        });
        Self::new(rm)
    }

    pub fn dim(&self) -> usize {
        self.rm.dim()
    }

    pub fn tensor(&self) -> &Tensor4 {
        &self.rm
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.rm.get(i, j, k, l)
    }

    /// `Ric_{ik} = sum_j R_{ijkj}`.
    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, k| (0..n).map(|j| self.get(i, j, k, j)).sum())
    }

    pub fn scalar(&self) -> f64 {
        self.ricci().trace()
    }

    pub fn plus(&self, other: &Self) -> Self {
        let data = self
            .rm
            .as_slice()
            .iter()
            .zip(other.rm.as_slice())
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rm: Tensor4 { dim: self.dim(), data },
        }
    }
}

/// Hamilton's quadratic tensor `B_{ijkl} = sum_{p,q} R_{piqj} R_{pkql}`.
pub fn hamilton_b(curv: &AlgebraicCurvature) -> Tensor4 {
    let n = curv.dim();
    Tensor4::from_fn(n, |i, j, k, l| {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                s += curv.get(p, i, q, j) * curv.get(p, k, q, l);
            }
        }
        s
    })
}

/// `max_{i,k} |sum_j (B_{ijkj} - 2 B_{ijjk})|`, which vanishes for any tensor obeying Bianchi.
pub fn b_identity_residual(curv: &AlgebraicCurvature) -> f64 {
    let b = hamilton_b(curv);
    let n = curv.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for k in 0..n {
            let s: f64 = (0..n).map(|j| b.get(i, j, k, j) - 2.0 * b.get(i, j, j, k)).sum();
            worst = worst.max(s.abs());
        }
    }
    worst
}

/// Weyl tensor from the curvature, its Ricci contraction and scalar curvature.
pub fn weyl_from_rm(curv: &AlgebraicCurvature, ric: &DMatrix<f64>, scalar: f64) -> Result<Tensor4> {
    let n = curv.dim();
    if n < 3 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            reason: "the Weyl tensor is defined for n >= 3",
        });
    }
    if ric.shape() != (n, n) {
        return Err(Error::RejectedInput(format!(
            "Ricci matrix is {}x{}, expected {n}x{n}",
            ric.nrows(),
            ric.ncols()
        )));
    }
    let nf = n as f64;
    let c1 = 1.0 / (nf - 2.0);
    let c2 = scalar / ((nf - 1.0) * (nf - 2.0));
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    Ok(Tensor4::from_fn(n, |i, j, k, l| {
        curv.get(i, j, k, l)
            - c1 * (d(i, k) * ric[(j, l)] - d(i, l) * ric[(j, k)] - d(j, k) * ric[(i, l)] + d(j, l) * ric[(i, k)])
            + c2 * (d(i, k) * d(j, l) - d(i, l) * d(j, k))
    }))
}

/// Squared norms `(|Rm|^2, |Ric°|^2, |W|^2, R)` of an algebraic curvature tensor.
pub fn decomposition_norms(curv: &AlgebraicCurvature) -> Result<(f64, f64, f64, f64)> {
    let ric = curv.ricci();
    let scalar = ric.trace();
    let n = curv.dim() as f64;
    let ric0 = &ric - DMatrix::identity(curv.dim(), curv.dim()) * (scalar / n);
    let w = weyl_from_rm(curv, &ric, scalar)?;
    Ok((curv.tensor().norm2(), ric0.norm_squared(), w.norm2(), scalar))
}

/// `|Rm|^2 - |W|^2 - 4/(n-2) |Ric°|^2 - 2/(n(n-1)) R^2`.
pub fn decomposition_defect(rm2: f64, weyl2: f64, ric02: f64, scalar: f64, dim: usize) -> f64 {
    let n = dim as f64;
    rm2 - weyl2 - 4.0 / (n - 2.0) * ric02 - 2.0 / (n * (n - 1.0)) * scalar * scalar
}
