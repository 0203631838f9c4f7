//! Dense real matrices and the handful of factorizations the operators need:
//! Householder tridiagonalization with implicit QL for symmetric spectra, tridiagonal
//! inertia counting, Cholesky, and one-sided Jacobi for singular values.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.concat() })
    }

    /// Entries are produced in row-major order.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, a) in self.row(i).iter().enumerate() {
                if *a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self - g * other`.
    pub fn sub_scaled(&self, g: f64, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("shape mismatch in sub_scaled".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - g * b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, g: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| g * a).collect() }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Exact bitwise symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Maximum absolute row sum (the ∞-norm), used as a cheap spectral-norm surrogate.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Symmetric tridiagonal matrix: `diag` has n entries, `off` has n-1 (off[i] couples i, i+1).
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// Orthogonal reduction of a symmetric matrix to tridiagonal form (Householder).
///
/// Only the lower triangle of `a` is read. The similarity preserves both the spectrum and,
/// being a congruence, the inertia.
pub fn tridiagonalize(a: &Matrix) -> Result<Tridiagonal> {
    if !a.is_square() {
        return Err(Error::Dimension("tridiagonalize needs a square matrix".into()));
    }
    let n = a.rows;
    if n == 0 {
        return Ok(Tridiagonal { diag: vec![], off: vec![] });
    }
    // lower triangle, row-major: element (i, j), j <= i, lives at w[i*n + j]
    let mut w = a.data.clone();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        // column k below the diagonal: entries (k+1+i, k)
        let mut norm2 = 0.0;
        for i in 0..m {
            let x = w[(k + 1 + i) * n + k];
            v[i] = x;
            norm2 += x * x;
        }
        diag[k] = w[k * n + k];
        let x0 = v[0];
        let tail = norm2 - x0 * x0;
        if tail == 0.0 {
            off[k] = x0;
            continue;
        }
        let norm = norm2.sqrt();
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        v[0] = x0 - alpha;
        let vnorm2 = tail + v[0] * v[0];
        let beta = 2.0 / vnorm2;

        // p = beta * A22 v using the lower triangle only
        for pi in p.iter_mut().take(m) {
            *pi = 0.0;
        }
        for i in 0..m {
            let row = &w[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + k + 1 + i + 1];
            let vi = v[i];
            let mut acc = 0.0;
            for j in 0..i {
                acc += row[j] * v[j];
                p[j] += row[j] * vi;
            }
            p[i] += acc + row[i] * vi;
        }
        let mut pv = 0.0;
        for i in 0..m {
            p[i] *= beta;
            pv += p[i] * v[i];
        }
        let kk = 0.5 * beta * pv;
        for i in 0..m {
            p[i] -= kk * v[i];
        }
        // A22 -= v pᵀ + p vᵀ (lower triangle)
        for i in 0..m {
            let (vi, pi) = (v[i], p[i]);
            let row = &mut w[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + k + 1 + i + 1];
            for j in 0..=i {
                row[j] -= vi * p[j] + pi * v[j];
            }
        }
        off[k] = alpha;
    }
    if n >= 2 {
        diag[n - 2] = w[(n - 2) * n + n - 2];
        off[n - 2] = w[(n - 1) * n + n - 2];
    }
    diag[n - 1] = w[(n - 1) * n + n - 1];
    Ok(Tridiagonal { diag, off })
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with Wilkinson-type shifts.
/// Returned in ascending order.
pub fn tridiagonal_eigenvalues(t: &Tridiagonal) -> Result<Vec<f64>> {
    let n = t.diag.len();
    let mut d = t.diag.clone();
    let mut e = t.off.clone();
    e.push(0.0);
    // absolute floor keeps clusters of (numerically) zero eigenvalues from stalling
    let floor = f64::EPSILON * d.iter().chain(&e).fold(0.0_f64, |a, x| a.max(x.abs()));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence(format!("QL iteration at index {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("tridiagonal eigenvalue".into()));
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    if !a.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if !a.all_finite() {
        return Err(Error::NonFinite("matrix entry".into()));
    }
    tridiagonal_eigenvalues(&tridiagonalize(a)?)
}

/// Signature of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub positive: usize,
}

/// Inertia of a symmetric tridiagonal matrix from the pivots of its LDLᵀ factorization.
///
/// A pivot with magnitude at or below `rel_tol` times the matrix scale means the matrix is
/// (numerically) singular; that is reported as `None`.
pub fn tridiagonal_inertia(t: &Tridiagonal, rel_tol: f64) -> Option<Inertia> {
    let n = t.diag.len();
    let scale = t
        .diag
        .iter()
        .map(|x| x.abs())
        .chain(t.off.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    let floor = rel_tol * scale.max(f64::MIN_POSITIVE);
    let mut negative = 0;
    let mut pivot = 0.0;
    for i in 0..n {
        pivot = if i == 0 { t.diag[0] } else { t.diag[i] - t.off[i - 1] * t.off[i - 1] / pivot };
        if pivot.abs() <= floor || !pivot.is_finite() {
            return None;
        }
        if pivot < 0.0 {
            negative += 1;
        }
    }
    Some(Inertia { negative, positive: n - negative })
}

/// Lower Cholesky factor L with A = L Lᵀ.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::Dimension("cholesky needs a square matrix".into()));
    }
    let n = a.rows;
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            let (ri, rj) = (&l.data[i * n..i * n + j], &l.data[j * n..j * n + j]);
            for (x, y) in ri.iter().zip(rj) {
                s -= x * y;
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                }
                l.data[i * n + i] = s.sqrt();
            } else {
                l.data[i * n + j] = s / l.data[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Solve L X = B for lower-triangular L (forward substitution, column by column of B).
pub fn solve_lower(l: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !l.is_square() || l.rows != b.rows {
        return Err(Error::Dimension("solve_lower shapes".into()));
    }
    let n = l.rows;
    let mut x = b.clone();
    for i in 0..n {
        for k in 0..i {
            let lik = l[(i, k)];
            if lik == 0.0 {
                continue;
            }
            for j in 0..b.cols {
                let v = x[(k, j)];
                x[(i, j)] -= lik * v;
            }
        }
        let d = l[(i, i)];
        for j in 0..b.cols {
            x[(i, j)] /= d;
        }
    }
    Ok(x)
}

/// Singular values by one-sided (Hestenes) Jacobi, descending.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    if !a.all_finite() {
        return Err(Error::NonFinite("matrix entry".into()));
    }
    // columns of `a` become contiguous rows of `u`
    let mut u = a.transpose();
    let (n, len) = (u.rows, u.cols);
    let mut norms: Vec<f64> = (0..n).map(|i| u.row(i).iter().map(|x| x * x).sum()).collect();
    let max_sweeps = 80;
    for sweep in 0..=max_sweeps {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (alpha, beta) = (norms[i], norms[j]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let (head, tail) = u.data.split_at_mut(j * len);
                let ui = &mut head[i * len..(i + 1) * len];
                let uj = &mut tail[..len];
                let gamma: f64 = ui.iter().zip(uj.iter()).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                for (x, y) in ui.iter_mut().zip(uj.iter_mut()) {
                    let (xi, yj) = (*x, *y);
                    *x = c * xi - s * yj;
                    *y = s * xi + c * yj;
                }
                norms[i] = ui.iter().map(|x| x * x).sum();
                norms[j] = uj.iter().map(|x| x * x).sum();
            }
        }
        if !rotated {
            break;
        }
        if sweep == max_sweeps {
            return Err(Error::NoConvergence("one-sided Jacobi SVD".into()));
        }
    }
    let mut sv: Vec<f64> = norms.iter().map(|x| x.sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    // a tall matrix has at most `cols` singular values; a wide one pads with zeros
    sv.truncate(a.rows.min(a.cols));
    Ok(sv)
}
