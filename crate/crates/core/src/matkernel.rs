//! Dense complex matrices: Kronecker products, Hermitian eigendecomposition
//! by cyclic Jacobi rotations, and projection onto the PSD cone.
//!
//! Matrices here are tiny (at most a few dozen rows), so everything is stored
//! row-major in a flat `Vec` and the algorithms favour robustness over speed.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use thiserror::Error;

/// Global Hermiticity tolerance used by every routine that requires `M = M†`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Jacobi sweeps stop once the off-diagonal Frobenius mass falls below this
/// (relative to `max(1, ‖M‖_F)`).
pub const JACOBI_OFFDIAG_TOL: f64 = 1e-13;

const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatError {
    #[error("matrix is not Hermitian: max |M - M†| = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// A complex number as an explicit `(re, im)` pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<[f64; 2]> for Complex {
    fn from(v: [f64; 2]) -> Self {
        Complex::new(v[0], v[1])
    }
}

impl From<Complex> for [f64; 2] {
    fn from(c: Complex) -> Self {
        [c.re, c.im]
    }
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };
    pub const ONE: Complex = Complex { re: 1.0, im: 0.0 };
    pub const I: Complex = Complex { re: 0.0, im: 1.0 };

    #[inline]
    pub const fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    #[inline]
    pub const fn real(re: f64) -> Self {
        Complex { re, im: 0.0 }
    }

    /// `r·e^{iφ}`
    #[inline]
    pub fn from_polar(r: f64, phi: f64) -> Self {
        Complex::new(r * phi.cos(), r * phi.sin())
    }

    #[inline]
    pub fn conj(self) -> Self {
        Complex::new(self.re, -self.im)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    #[inline]
    pub fn arg(self) -> f64 {
        self.im.atan2(self.re)
    }

    #[inline]
    pub fn scale(self, k: f64) -> Self {
        Complex::new(self.re * k, self.im * k)
    }
}

impl Add for Complex {
    type Output = Complex;
    #[inline]
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl AddAssign for Complex {
    #[inline]
    fn add_assign(&mut self, o: Complex) {
        self.re += o.re;
        self.im += o.im;
    }
}

impl Sub for Complex {
    type Output = Complex;
    #[inline]
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl SubAssign for Complex {
    #[inline]
    fn sub_assign(&mut self, o: Complex) {
        self.re -= o.re;
        self.im -= o.im;
    }
}

impl Mul for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, o: Complex) -> Complex {
        Complex::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

impl Mul<f64> for Complex {
    type Output = Complex;
    #[inline]
    fn mul(self, k: f64) -> Complex {
        self.scale(k)
    }
}

impl Div<f64> for Complex {
    type Output = Complex;
    #[inline]
    fn div(self, k: f64) -> Complex {
        Complex::new(self.re / k, self.im / k)
    }
}

impl Neg for Complex {
    type Output = Complex;
    #[inline]
    fn neg(self) -> Complex {
        Complex::new(-self.re, -self.im)
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im >= 0.0 {
            write!(f, "{}+{}i", self.re, self.im)
        } else {
            write!(f, "{}{}i", self.re, self.im)
        }
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds a matrix from row-major entries. Panics if the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "entries length must equal rows*cols"
        );
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "entries length must equal rows*cols"
        );
        ComplexMatrix {
            rows,
            cols,
            data: data.iter().map(|&x| Complex::real(x)).collect(),
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::real(v);
        }
        m
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[Complex], v: &[Complex]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn pauli_x() -> Self {
        Self::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn pauli_y() -> Self {
        Self::from_vec(
            2,
            2,
            vec![Complex::ZERO, -Complex::I, Complex::I, Complex::ZERO],
        )
    }

    pub fn pauli_z() -> Self {
        Self::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, k: f64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * k).collect(),
        }
    }

    pub fn trace(&self) -> Complex {
        let n = self.rows.min(self.cols);
        (0..n).fold(Complex::ZERO, |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.abs()).fold(0.0, f64::max)
    }

    /// `max_{i,j} |M_ij - conj(M_ji)|`; infinite for non-square input.
    pub fn max_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).abs());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_asymmetry() <= tol
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
        if self.cols != rhs.rows {
            return Err(MatError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| (0..self.cols).fold(Complex::ZERO, |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    /// `⟨v|M|v⟩`
    pub fn expectation(&self, v: &[Complex]) -> Complex {
        let mv = self.mul_vec(v);
        v.iter()
            .zip(&mv)
            .fold(Complex::ZERO, |acc, (a, b)| acc + a.conj() * *b)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product: entry `(i·b.rows + k, j·b.cols + l)` is `a(i,j)·b(k,l)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct EigDecomposition {
    /// Sorted in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl EigDecomposition {
    pub fn eigenvector(&self, k: usize) -> Vec<Complex> {
        (0..self.eigenvectors.rows())
            .map(|i| self.eigenvectors[(i, k)])
            .collect()
    }

    /// `V·diag(f(λ))·V†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvectors.rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.eigenvectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vi * self.eigenvectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigDecomposition, MatError> {
    if !m.is_square() {
        return Err(MatError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let asym = m.max_asymmetry();
    if asym > HERMITIAN_TOL {
        return Err(MatError::NotHermitian {
            max_asymmetry: asym,
        });
    }
    let n = m.rows;
    // Work on the exactly-Hermitian part.
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex::real(m[(i, i)].re)
        } else {
            (m[(i, j)] + m[(j, i)].conj()).scale(0.5)
        }
    });
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm().max(1.0);
    let threshold = JACOBI_OFFDIAG_TOL * scale;

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation zeroing `a[p][q]`; accumulates into `v`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.abs();
    if r < 1e-300 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // phase e^{-iφ} turns the pivot real; then a real symmetric Schur rotation
    let phase = Complex::new(apq.re / r, -apq.im / r);
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // U restricted to (p,q): [[c, s], [-s·phase, c·phase]]
    let u_pp = Complex::real(c);
    let u_pq = Complex::real(s);
    let u_qp = phase * (-s);
    let u_qq = phase * c;
    let n = a.rows;
    // A ← A U
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    // A ← U† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = Complex::ZERO;
    a[(q, p)] = Complex::ZERO;
    a[(p, p)] = Complex::real(a[(p, p)].re);
    a[(q, q)] = Complex::real(a[(q, q)].re);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

/// Frobenius-nearest PSD matrix: `V·max(Λ, 0)·V†`.
pub fn psd_project(m: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
    let eig = hermitian_eig(m)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0)))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64, MatError> {
    let eig = hermitian_eig(m)?;
    Ok(eig.eigenvalues.last().copied().unwrap_or(0.0))
}

/// Eigendecomposition of a real symmetric matrix (row-major, `n×n`) by cyclic
/// Jacobi rotations. Returns eigenvalues in descending order and the
/// eigenvectors as columns of a row-major `n×n` array.
///
/// This is the real-arithmetic counterpart of [`hermitian_eig`] used on hot
/// paths that only ever see real symmetric blocks.
pub fn symmetric_eig(m: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(m.len(), n * n);
    let mut a = m.to_vec();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = avg;
            a[j * n + i] = avg;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let threshold = JACOBI_OFFDIAG_TOL * fro;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() < threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let vals = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vecs[i * n + k] = v[i * n + src];
        }
    }
    (vals, vecs)
}
