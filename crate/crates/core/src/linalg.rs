//! Small dense complex matrices: determinant, smallest singular value and
//! inverse.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative singularity threshold: a matrix counts as singular when
/// `sigma_min <= tol * max(K, L) * sigma_max`.
pub const DEFAULT_SINGULAR_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self
                .row(r)
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(rows.len(), cols, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Complex64::new(0.0, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// The N×N Fourier matrix `[e^{-2πi kl/N}]`.
    pub fn fourier(n: usize) -> Self {
        Self::from_fn(n, n, |k, l| root_of_unity(n, (k * l) % n))
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

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, |r, c| {
            (0..self.cols).map(|i| self.get(r, i) * other.get(i, c)).sum()
        }))
    }

    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Rows reordered so that row k of the result is row `perm[k]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self.get(perm[r], c))
    }

    /// Entrywise product with a 0/1 mask.
    pub fn hadamard_mask(&self, mask: &crate::mask::BinaryMask) -> Result<Self> {
        if mask.rows() != self.rows || mask.cols() != self.cols {
            return Err(Error::Shape(format!(
                "{}x{} mask against {}x{} matrix",
                mask.rows(),
                mask.cols(),
                self.rows,
                self.cols
            )));
        }
        Ok(Self::from_fn(self.rows, self.cols, |r, c| {
            if mask.get(r, c) {
                self.get(r, c)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// All singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Vec::new();
        }
        let mut sv: Vec<f64> = self.to_nalgebra().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }
}

/// `e^{-2πi e/N}`.
pub fn root_of_unity(n: usize, e: usize) -> Complex64 {
    let e = e % n;
    let theta = -2.0 * PI * e as f64 / n as f64;
    Complex64::new(theta.cos(), theta.sin())
}

/// `e^{-2πi p/q}` with the numerator reduced mod q before the float conversion.
pub fn unit_phase(p: i128, q: i128) -> Complex64 {
    let r = p.rem_euclid(q);
    let theta = -2.0 * PI * (r as f64) / (q as f64);
    Complex64::new(theta.cos(), theta.sin())
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(m: &ComplexMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "determinant of a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    Ok(det_in_place(m.rows, &mut m.data.clone()))
}

/// Determinant of the row-major `n×n` buffer `a`; destroys `a`.
pub fn det_in_place(n: usize, a: &mut [Complex64]) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].norm_sqr();
        for r in col + 1..n {
            let v = a[r * n + col].norm_sqr();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for c in col..n {
                a.swap(col * n + c, pivot * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        let inv = p.inv();
        for r in col + 1..n {
            let f = a[r * n + col] * inv;
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            for c in col + 1..n {
                let v = a[col * n + c];
                a[r * n + c] -= f * v;
            }
        }
    }
    det
}

/// Smallest singular value, `sigma_min(K×L) = s_{min(K,L)}`.
pub fn sigma_min(m: &ComplexMatrix) -> f64 {
    m.singular_values().last().copied().unwrap_or(0.0)
}

/// Whether `m` is numerically rank deficient under the relative threshold.
pub fn is_numerically_singular(m: &ComplexMatrix, tol: f64) -> bool {
    let sv = m.singular_values();
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) => min <= tol * m.rows.max(m.cols) as f64 * max,
        _ => true,
    }
}

/// Inverse via Gauss–Jordan elimination with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] when the smallest singular value is
/// below `tol * K * sigma_max`.
pub fn invert_with_tol(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::Shape(format!("inverse of a {}x{} matrix", m.rows, m.cols)));
    }
    let n = m.rows;
    let sv = m.singular_values();
    let (max, min) = (sv[0], sv[n - 1]);
    if min <= tol * n as f64 * max {
        return Err(Error::SingularMatrix { sigma_min: min });
    }
    let mut a = m.data.clone();
    let mut inv = ComplexMatrix::identity(n).data;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x * n + col].norm_sqr().total_cmp(&a[y * n + col].norm_sqr()))
            .unwrap();
        if pivot != col {
            for c in 0..n {
                a.swap(col * n + c, pivot * n + c);
                inv.swap(col * n + c, pivot * n + c);
            }
        }
        let p = a[col * n + col].inv();
        for c in 0..n {
            a[col * n + c] *= p;
            inv[col * n + c] *= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col];
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            for c in 0..n {
                let (av, iv) = (a[col * n + c], inv[col * n + c]);
                a[r * n + c] -= f * av;
                inv[r * n + c] -= f * iv;
            }
        }
    }
    Ok(ComplexMatrix {
        rows: n,
        cols: n,
        data: inv,
    })
}

pub fn invert(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    invert_with_tol(m, DEFAULT_SINGULAR_TOL)
}
