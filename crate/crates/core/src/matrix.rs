//! Small dense complex matrices.
//!
//! Operators here are 2×2 (one-qubit Kraus operators) or 4×4 (process
//! matrices), so storage is a flat row-major `Vec` and every product is the
//! naive triple loop.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: format!("{} entries for {rows}x{cols}", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// 2×2 matrix from its four entries `[[a, b], [c, d]]`.
    pub fn from_2x2(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> Self {
        Self {
            rows: 2,
            cols: 2,
            data: vec![a, b, c, d],
        }
    }

    pub fn from_diagonal(diag: &[C<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Outer product `u v†`.
    pub fn outer(u: &[C<T>], v: &[C<T>]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m[(i, j)] = *ui * vj.conj();
            }
        }
        m
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

    pub fn entries(&self) -> &[C<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(cr(s))
    }

    /// Squared Frobenius (Hilbert-Schmidt) norm, `Tr(A†A)`.
    pub fn norm_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Entrywise equality within an absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| (*a - *b).norm() <= tol)
    }

    /// Equality up to a global phase, judged by `|Tr(A†B)| = ‖A‖‖B‖`.
    pub fn eq_up_to_phase(&self, other: &Self, tol: T) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        let overlap = (self.adjoint() * other).trace().norm();
        let norms = (self.norm_sqr() * other.norm_sqr()).sqrt();
        (norms - overlap).abs() <= tol
    }

    /// Largest deviation of `A†A` from the identity.
    pub fn unitarity_defect(&self) -> T {
        (&(self.adjoint() * self) - &Self::identity(self.cols)).max_abs()
    }

    /// Largest deviation of `A` from `A†`.
    pub fn hermiticity_defect(&self) -> T {
        (self - &self.adjoint()).max_abs()
    }

    /// Hermitian part `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(T::lit(0.5))
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Only the Hermitian part of `self` is used. Eigenvalues come
    /// back ascending, eigenvectors as the matching columns of `vectors`.
    ///
    /// The sweep order is fixed, so identical input gives bit-identical output.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen<T>> {
        if !self.is_square() {
            return Err(Error::Dimension {
                expected: "square matrix".into(),
                found: format!("{}x{}", self.rows, self.cols),
            });
        }
        let n = self.rows;
        let mut a = self.hermitian_part();
        let mut v = Self::identity(n);
        let scale = a.max_abs().max(T::min_positive_value());
        let stop = scale * T::epsilon() * T::lit(n as f64);

        let mut converged = false;
        for _ in 0..100 {
            let off: T = (0..n)
                .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
                .map(|(p, q)| a[(p, q)].norm_sqr())
                .fold(T::zero(), |x, y| x + y);
            if off.sqrt() <= stop {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged {
            return Err(Error::Convergence {
                what: "hermitian eigen-decomposition".into(),
                best: f64::NAN,
            });
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| diag[i]).collect();
        let mut vectors = Self::zeros(n, n);
        for (new, &old) in order.iter().enumerate() {
            for r in 0..n {
                vectors[(r, new)] = v[(r, old)];
            }
        }
        Ok(HermitianEigen { values, vectors })
    }
}

/// Zeroes the `(p, q)` entry of Hermitian `a` and accumulates the rotation in `v`.
fn jacobi_rotate<T: Real>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let n = a.rows;
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == T::zero() {
        return;
    }
    // Rephase column/row q so that a[p][q] becomes real and positive.
    let phase = apq.conj() / cr(mag);
    for k in 0..n {
        a[(k, q)] *= phase;
    }
    for k in 0..n {
        a[(q, k)] *= phase.conj();
    }
    for k in 0..n {
        v[(k, q)] *= phase;
    }

    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (T::lit(2.0) * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
    let cs = T::one() / (t * t + T::one()).sqrt();
    let sn = t * cs;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp.scale(cs) - akq.scale(sn);
        a[(k, q)] = akp.scale(sn) + akq.scale(cs);
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk.scale(cs) - aqk.scale(sn);
        a[(q, k)] = apk.scale(sn) + aqk.scale(cs);
    }
    a[(p, q)] = C::zero();
    a[(q, p)] = C::zero();
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp.scale(cs) - vkq.scale(sn);
        v[(k, q)] = vkp.scale(sn) + vkq.scale(cs);
    }
}

/// Result of [`ComplexMatrix::hermitian_eigen`].
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = C<T>;

    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                for j in 0..rhs.cols {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Mul<&ComplexMatrix<T>> for ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        &self * rhs
    }
}

impl<T: Real> Mul for ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: ComplexMatrix<T>) -> ComplexMatrix<T> {
        &self * &rhs
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `1`, `X`, `Y`, `Z` as 2×2 matrices, in that order.
pub fn paulis<T: Real>() -> [ComplexMatrix<T>; 4] {
    let o = C::zero();
    let l = C::one();
    let i = Complex::i();
    [
        ComplexMatrix::from_2x2(l, o, o, l),
        ComplexMatrix::from_2x2(o, l, l, o),
        ComplexMatrix::from_2x2(o, -i, i, o),
        ComplexMatrix::from_2x2(l, o, o, -l),
    ]
}
