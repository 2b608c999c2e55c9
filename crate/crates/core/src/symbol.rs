//! Principal symbol of the gauge-fixed linearised flow operator in the direction
//! `xi = e_1`, acting on symmetric 2-tensors.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::FlowParams;

/// Ellipticity verdicts closer than this to zero count as boundary cases.
pub const BOUNDARY_TOL: f64 = 1e-14;

/// Symbol matrix in the basis `(h11, ..., hnn, h12, ..., h1n, h23, ..., h_{n-1,n})`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix {
    pub dim: usize,
    pub entries: DMatrix<f64>,
}

impl SymbolMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }
}

/// Index pairs of the symmetric-tensor basis: diagonal first, then the upper triangle
/// row by row.
pub fn basis_pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<_> = (0..dim).map(|i| (i, i)).collect();
    for i in 0..dim {
        for k in i + 1..dim {
            pairs.push((i, k));
        }
    }
    pairs
}

/// Coordinates of a symmetric matrix in the symbol basis.
pub fn to_basis(h: &DMatrix<f64>) -> DVector<f64> {
    let pairs = basis_pairs(h.nrows());
    DVector::from_iterator(pairs.len(), pairs.iter().map(|&(i, k)| h[(i, k)]))
}

/// Symmetric matrix from coordinates in the symbol basis.
pub fn from_basis(dim: usize, v: &DVector<f64>) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(dim, dim);
    for (c, &(i, k)) in basis_pairs(dim).iter().enumerate() {
        h[(i, k)] = v[c];
        h[(k, i)] = v[c];
    }
    h
}

/// `[U ⊕ alpha Id]` where `U` has first row `(alpha, beta, ..., beta)`, zeros below the
/// corner, and the trailing block `V = alpha Id + beta J`.
pub fn build_symbol_matrix(params: &FlowParams) -> Result<SymbolMatrix> {
    let n = params.dim;
    if n < 2 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            reason: "symbol analysis needs n >= 2",
        });
    }
    let size = n * (n + 1) / 2;
    let (a, b) = (params.alpha, params.beta);
    let mut m = DMatrix::zeros(size, size);
    for row in 0..size {
        m[(row, row)] = a;
    }
    for col in 1..n {
        m[(0, col)] = b;
        for row in 1..n {
            m[(row, col)] += b;
        }
    }
    Ok(SymbolMatrix { dim: n, entries: m })
}

/// Trailing `(n-1) x (n-1)` block `V` of `U`.
pub fn v_block(params: &FlowParams) -> DMatrix<f64> {
    let m = params.dim - 1;
    DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            params.alpha + params.beta
        } else {
            params.beta
        }
    })
}

/// An eigenvalue cluster of the symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub value: f64,
    pub multiplicity: usize,
}

/// Relative deflation threshold of the QR iteration. Machine epsilon itself can stall the
/// iteration on the repeated eigenvalue.
const SCHUR_EPS: f64 = 1e-14;

/// All eigenvalues of the symbol (real parts, ascending) from a general dense solver.
pub fn symbol_eigenvalues(m: &SymbolMatrix) -> Result<Vec<f64>> {
    let schur = nalgebra::linalg::Schur::try_new(m.entries.clone(), SCHUR_EPS, 10_000)
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
    let eig = schur.complex_eigenvalues();
    let scale = 1.0 + m.entries.amax();
    let mut values = Vec::with_capacity(eig.len());
    for z in eig.iter() {
        if z.im.abs() > 1e-8 * scale {
            return Err(Error::Numeric(format!("unexpected complex eigenvalue {z}")));
        }
        values.push(z.re);
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenvalues grouped into clusters with multiplicities.
pub fn symbol_spectrum(m: &SymbolMatrix) -> Result<Vec<Eigenvalue>> {
    let values = symbol_eigenvalues(m)?;
    let tol = 1e-8 * (1.0 + m.entries.amax());
    let mut out: Vec<Eigenvalue> = Vec::new();
    let mut sum = 0.0;
    for v in values {
        match out.last_mut() {
            Some(last) if (v - last.value).abs() <= tol => {
                sum += v;
                last.multiplicity += 1;
                last.value = sum / last.multiplicity as f64;
            }
            _ => {
                sum = v;
                out.push(Eigenvalue {
                    value: v,
                    multiplicity: 1,
                });
            }
        }
    }
    Ok(out)
}

/// The predicted multiset `{alpha x (n(n+1)/2 - 1), alpha + (n-1) beta x 1}`, ascending.
pub fn predicted_eigenvalues(params: &FlowParams) -> Vec<f64> {
    let n = params.dim;
    let mut v = vec![params.alpha; n * (n + 1) / 2 - 1];
    v.push(params.trace_diffusivity());
    v.sort_by(f64::total_cmp);
    v
}

/// `(alpha - lambda)^{n-2} (alpha + (n-1) beta - lambda)`.
pub fn char_poly_v(params: &FlowParams, lambda: f64) -> f64 {
    let n = params.dim as i32;
    (params.alpha - lambda).powi(n - 2) * (params.trace_diffusivity() - lambda)
}

/// `det(V - lambda Id)` by LU factorisation.
pub fn det_v_numeric(params: &FlowParams, lambda: f64) -> f64 {
    let v = v_block(params);
    let m = v.nrows();
    (v - DMatrix::identity(m, m) * lambda).lu().determinant()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ellipticity {
    Elliptic,
    Boundary,
    NotElliptic,
}

impl std::fmt::Display for Ellipticity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Elliptic => "elliptic",
            Self::Boundary => "boundary",
            Self::NotElliptic => "not_elliptic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticityVerdict {
    pub verdict: Ellipticity,
    pub min_eigenvalue: f64,
}

/// Strong ellipticity holds iff both `alpha` and `alpha + (n-1) beta` are positive.
pub fn is_strongly_elliptic(params: &FlowParams) -> EllipticityVerdict {
    let min = params.alpha.min(params.trace_diffusivity());
    let verdict = if min.abs() <= BOUNDARY_TOL {
        Ellipticity::Boundary
    } else if min > 0.0 {
        Ellipticity::Elliptic
    } else {
        Ellipticity::NotElliptic
    };
    EllipticityVerdict {
        verdict,
        min_eigenvalue: min,
    }
}
