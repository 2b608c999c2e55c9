//! Second-order central differences on uniform periodic grids.

#[inline]
fn wrap(i: usize, di: isize, n: usize) -> usize {
    (i as isize + di).rem_euclid(n as isize) as usize
}

/// First derivative at every point of a periodic 1D sample.
pub fn d1(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| (f[wrap(i, 1, n)] - f[wrap(i, -1, n)]) / (2.0 * h))
        .collect()
}

/// Second derivative at every point of a periodic 1D sample.
pub fn d2(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let h2 = h * h;
    (0..n)
        .map(|i| (f[wrap(i, 1, n)] - 2.0 * f[i] + f[wrap(i, -1, n)]) / h2)
        .collect()
}

/// Row-major `n x n` periodic field; `x1` runs along the fast (column) index.
#[derive(Debug, Clone, Copy)]
pub struct Grid2 {
    pub n: usize,
    pub h: f64,
}

impl Grid2 {
    #[inline]
    pub fn idx(&self, row: usize, col: usize) -> usize {
        row * self.n + col
    }

    /// Five-point Laplacian at a single point.
    #[inline]
    pub fn laplacian_at(&self, f: &[f64], row: usize, col: usize) -> f64 {
        let n = self.n;
        let c = f[self.idx(row, col)];
        let e = f[self.idx(row, wrap(col, 1, n))];
        let w = f[self.idx(row, wrap(col, -1, n))];
        let s = f[self.idx(wrap(row, 1, n), col)];
        let nn = f[self.idx(wrap(row, -1, n), col)];
        (e + w + s + nn - 4.0 * c) / (self.h * self.h)
    }

    /// Central-difference gradient `(d/dx1, d/dx2)` at a single point.
    #[inline]
    pub fn gradient_at(&self, f: &[f64], row: usize, col: usize) -> (f64, f64) {
        let n = self.n;
        let dx1 = f[self.idx(row, wrap(col, 1, n))] - f[self.idx(row, wrap(col, -1, n))];
        let dx2 = f[self.idx(wrap(row, 1, n), col)] - f[self.idx(wrap(row, -1, n), col)];
        (dx1 / (2.0 * self.h), dx2 / (2.0 * self.h))
    }

    /// Largest absolute pure second difference (either axis) at a point, divided by `h^2`.
    #[inline]
    pub fn max_second_difference_at(&self, f: &[f64], row: usize, col: usize) -> f64 {
        let n = self.n;
        let c = f[self.idx(row, col)];
        let xx = f[self.idx(row, wrap(col, 1, n))] - 2.0 * c + f[self.idx(row, wrap(col, -1, n))];
        let yy = f[self.idx(wrap(row, 1, n), col)] - 2.0 * c + f[self.idx(wrap(row, -1, n), col)];
        xx.abs().max(yy.abs()) / (self.h * self.h)
    }

    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for row in 0..self.n {
            for col in 0..self.n {
                out[self.idx(row, col)] = self.laplacian_at(f, row, col);
            }
        }
        out
    }
}
