//! Dense complex operators on `C^d` and the spectral kernel built on them.
//!
//! [`DenseOperator`] is an immutable row-major matrix of complex scalars.
//! Arithmetic returns fresh values; nothing is mutated in place once an
//! operator has been constructed.

mod spectral;

pub use spectral::{
    hermitian_inverse, hermitian_spectrum, inverse_positive_sqrt, numerical_rank, operator_norm, pencil_lower_bound,
    positive_sqrt, pseudo_inverse, range_basis, range_projector, svd, PencilBound, Spectrum, Svd,
};

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::error::{FrameError, Result};
use crate::scalar::{cre, is_finite_c, lit, Real};

/// A vector in `C^d`.
pub type Vector<T> = Vec<Complex<T>>;

/// Relative thresholds used by every certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    /// Relative slack allowed when testing an operator inequality.
    pub rel_eps: T,
    /// Singular values below `rank_eps * sigma_max` count as zero.
    pub rank_eps: T,
}

impl<T: Real> Tolerance<T> {
    pub fn new(rel_eps: T, rank_eps: T) -> Result<Self> {
        let cap = lit::<T>(1e-2);
        for (name, v) in [("rel_eps", rel_eps), ("rank_eps", rank_eps)] {
            if !(v > T::zero() && v < cap) {
                return Err(FrameError::InvalidTolerance(format!(
                    "{name} = {v} must lie in (0, 1e-2)"
                )));
            }
        }
        Ok(Self { rel_eps, rank_eps })
    }

    /// Same rank cutoff, different relative slack.
    pub fn with_rel_eps(self, rel_eps: T) -> Result<Self> {
        Self::new(rel_eps, self.rank_eps)
    }
}

/// `(1e-10, 1e-12)` in `f64`; raised to `(1000ε, 100ε)` for coarser scalars.
impl<T: Real> Default for Tolerance<T> {
    fn default() -> Self {
        Self {
            rel_eps: lit::<T>(1e-10).max(lit::<T>(1000.0) * T::epsilon()),
            rank_eps: lit::<T>(1e-12).max(lit::<T>(100.0) * T::epsilon()),
        }
    }
}

/// Complex matrix acting on `C^cols -> C^rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DenseOperator<T> {
    /// Builds an operator from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(FrameError::InvalidOperator(format!(
                "shape {rows}x{cols} must be positive"
            )));
        }
        if data.len() != rows * cols {
            return Err(FrameError::InvalidOperator(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !is_finite_c(*z)) {
            return Err(FrameError::InvalidOperator(format!(
                "non-finite entry at row {}, column {}",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Internal constructor for data produced by arithmetic on valid operators.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::from_raw(rows, cols, data)
    }

    /// Builds an operator from complex rows.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != m) {
            return Err(FrameError::InvalidOperator(format!(
                "row {bad} has length {}, expected {m}",
                rows[bad].len()
            )));
        }
        Self::new(n, m, rows.iter().flatten().copied().collect())
    }

    /// Builds an operator from real rows.
    pub fn from_real_rows(rows: &[Vec<T>]) -> Result<Self> {
        let rows: Vec<Vec<Complex<T>>> = rows.iter().map(|r| r.iter().map(|&x| cre(x)).collect()).collect();
        Self::from_rows(&rows)
    }

    /// Builds the matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vector<T>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().position(|c| c.len() != rows) {
            return Err(FrameError::InvalidOperator(format!(
                "column {bad} has length {}, expected {rows}",
                columns[bad].len()
            )));
        }
        let op = Self::from_fn(rows, cols, |r, c| columns[c][r]);
        Self::new(op.rows, op.cols, op.data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![Complex::new(T::zero(), T::zero()); rows * cols])
    }

    pub fn identity(d: usize) -> Self {
        Self::from_fn(d, d, |r, c| if r == c { cre(T::one()) } else { cre(T::zero()) })
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[T]) -> Self {
        let d = values.len();
        Self::from_fn(d, d, |r, c| if r == c { cre(values[r]) } else { cre(T::zero()) })
    }

    pub fn diag_complex(values: &[Complex<T>]) -> Self {
        let d = values.len();
        Self::from_fn(d, d, |r, c| if r == c { values[r] } else { cre(T::zero()) })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.data[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vector<T> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vector<T>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn diagonal(&self) -> Vector<T> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// `(M + M*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = lit::<T>(0.5);
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self.get(r, c) + self.get(c, r).conj()).scale(half)
        })
    }

    /// `(M - M*) / 2`.
    pub fn anti_hermitian_part(&self) -> Self {
        let half = lit::<T>(0.5);
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self.get(r, c) - self.get(c, r).conj()).scale(half)
        })
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn trace(&self) -> Complex<T> {
        self.diagonal().into_iter().fold(cre(T::zero()), |a, b| a + b)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|z| z.scale(s)).collect())
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    /// Matrix product; panics on inner-dimension mismatch.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = vec![cre(T::zero()); self.rows * rhs.cols];
        for r in 0..self.rows {
            let row = &mut out[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let brow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in row.iter_mut().zip(brow) {
                    *o = *o + a * b;
                }
            }
        }
        Self::from_raw(self.rows, rhs.cols, out)
    }

    /// `M x`; panics on dimension mismatch.
    pub fn apply(&self, x: &[Complex<T>]) -> Vector<T> {
        assert_eq!(
            self.cols,
            x.len(),
            "apply: operator has {} columns, vector has {}",
            self.cols,
            x.len()
        );
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .fold(cre(T::zero()), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `‖M - N‖_F`; panics on shape mismatch.
    pub fn distance(&self, other: &Self) -> T {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<T>()
            .sqrt()
    }

    /// Frobenius norm of the commutator `MN - NM`.
    pub fn commutator_norm(&self, other: &Self) -> T {
        self.matmul(other).distance(&other.matmul(self))
    }

    /// Anti-Hermitian residual `‖M - M*‖_F`.
    pub fn hermitian_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut acc = T::zero();
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc = acc + (self.get(r, c) - self.get(c, r).conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Restricts to the given columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |r, c| self.get(r, cols[c]))
    }

    /// Converts the scalar field, e.g. `f64 -> f32`.
    pub fn cast<U: Real>(&self) -> DenseOperator<U> {
        DenseOperator::from_raw(
            self.rows,
            self.cols,
            self.data
                .iter()
                .map(|z| {
                    Complex::new(
                        lit::<U>(crate::scalar::to_f64(z.re)),
                        lit::<U>(crate::scalar::to_f64(z.im)),
                    )
                })
                .collect(),
        )
    }
}

impl<T: Real> Add for &DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn add(self, rhs: Self) -> DenseOperator<T> {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        DenseOperator::from_raw(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        )
    }
}

impl<T: Real> Sub for &DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn sub(self, rhs: Self) -> DenseOperator<T> {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        DenseOperator::from_raw(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        )
    }
}

impl<T: Real> Mul for &DenseOperator<T> {
    type Output = DenseOperator<T>;
    fn mul(self, rhs: Self) -> DenseOperator<T> {
        self.matmul(rhs)
    }
}

/// Inner product `⟨x, y⟩ = Σ x_i conj(y_i)`, linear in the first slot.
pub fn inner<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Complex<T> {
    assert_eq!(x.len(), y.len(), "inner: length mismatch");
    x.iter().zip(y).fold(cre(T::zero()), |acc, (a, b)| acc + a * b.conj())
}

pub fn norm<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

pub fn sub_vec<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Vector<T> {
    assert_eq!(x.len(), y.len(), "sub_vec: length mismatch");
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn add_scaled<T: Real>(x: &[Complex<T>], s: T, y: &[Complex<T>]) -> Vector<T> {
    assert_eq!(x.len(), y.len(), "add_scaled: length mismatch");
    x.iter().zip(y).map(|(a, b)| a + b.scale(s)).collect()
}

/// Returns `x / ‖x‖`, or `x` unchanged when it is zero.
pub fn normalized<T: Real>(x: &[Complex<T>]) -> Vector<T> {
    let n = norm(x);
    if n == T::zero() {
        x.to_vec()
    } else {
        x.iter().map(|z| z.unscale(n)).collect()
    }
}

/// Real vector promoted to complex.
pub fn real_vector<T: Real>(values: &[T]) -> Vector<T> {
    values.iter().map(|&v| cre(v)).collect()
}

/// `j`-th standard basis vector of `C^d`.
pub fn basis_vector<T: Real>(d: usize, j: usize) -> Vector<T> {
    (0..d)
        .map(|i| if i == j { cre(T::one()) } else { cre(T::zero()) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn adjoint_of_nilpotent_is_transpose() {
        let m = DenseOperator::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let expected = DenseOperator::from_real_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(m.adjoint(), expected);
    }

    #[test]
    fn adjoint_conjugates_scalars() {
        let m = DenseOperator::new(1, 1, vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(m.adjoint().get(0, 0), c(0.0, -1.0));
    }

    #[test]
    fn adjoint_fixes_identity_and_is_involutive() {
        let id = DenseOperator::<f64>::identity(3);
        assert_eq!(id.adjoint(), id);
        let m = DenseOperator::new(2, 3, (0..6).map(|k| c(k as f64, -(k as f64) / 3.0)).collect()).unwrap();
        assert_eq!(m.adjoint().adjoint(), m);
    }

    #[test]
    fn rejects_bad_shapes_and_nonfinite() {
        assert!(DenseOperator::<f64>::new(2, 2, vec![c(1.0, 0.0); 3]).is_err());
        assert!(DenseOperator::<f64>::new(0, 2, vec![]).is_err());
        assert!(DenseOperator::new(1, 1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(DenseOperator::from_real_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn default_tolerance_tracks_precision() {
        let t = Tolerance::<f64>::default();
        assert_eq!((t.rel_eps, t.rank_eps), (1e-10, 1e-12));
        let t = Tolerance::<f32>::default();
        assert!(t.rel_eps >= 1e3 * f32::EPSILON && t.rank_eps >= 1e2 * f32::EPSILON);
        assert!(Tolerance::new(t.rel_eps, t.rank_eps).is_ok());
    }

    #[test]
    fn tolerance_bounds_enforced() {
        assert!(Tolerance::<f64>::new(1e-10, 1e-12).is_ok());
        assert!(Tolerance::<f64>::new(0.0, 1e-12).is_err());
        assert!(Tolerance::<f64>::new(1e-10, 0.5).is_err());
    }

    #[test]
    fn inner_is_linear_in_first_slot() {
        let x = vec![c(0.0, 1.0), c(1.0, 0.0)];
        let y = vec![c(1.0, 0.0), c(0.0, 1.0)];
        // ⟨ix, y⟩ = i⟨x, y⟩
        let ix: Vec<_> = x.iter().map(|z| z * c(0.0, 1.0)).collect();
        assert_eq!(inner(&ix, &y), inner(&x, &y) * c(0.0, 1.0));
        assert_eq!(inner(&x, &y), c(0.0, 1.0) + c(0.0, -1.0));
    }

    #[test]
    fn matmul_and_apply_agree() {
        let a = DenseOperator::new(2, 3, (0..6).map(|k| c(k as f64, 1.0)).collect()).unwrap();
        let x = vec![c(1.0, -1.0), c(0.5, 0.0), c(0.0, 2.0)];
        let xm = DenseOperator::from_columns(&[x.clone()]).unwrap();
        assert_eq!(a.matmul(&xm).column(0), a.apply(&x));
    }
}
