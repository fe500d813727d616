//! Finite frame families in `C^d`: synthesis, analysis and frame operators,
//! optimal frame bounds and canonical-dual reconstruction.

use num_complex::Complex;

use crate::certificate::FrameBounds;
use crate::error::{FrameError, Result};
use crate::operator::{hermitian_inverse, hermitian_spectrum, inner, DenseOperator, Tolerance, Vector};
use crate::scalar::{is_finite_c, to_f64, Real};

/// Ordered list of vectors `f_1, …, f_n` in `C^d`.
///
/// Ordering and repetitions are significant: `{e1, e1, e2}` is a different
/// family from `{e1, e2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFamily<T> {
    dim: usize,
    vectors: Vec<Vector<T>>,
}

impl<T: Real> FrameFamily<T> {
    pub fn new(dim: usize, vectors: Vec<Vector<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(FrameError::InvalidOperator("frame dimension must be positive".into()));
        }
        if vectors.is_empty() {
            return Err(FrameError::InvalidOperator(
                "frame family must contain at least one vector".into(),
            ));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(FrameError::InvalidOperator(format!(
                    "vector {i} has length {}, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|z| !is_finite_c(*z)) {
                return Err(FrameError::InvalidOperator(format!(
                    "vector {i} has a non-finite entry"
                )));
            }
        }
        Ok(Self { dim, vectors })
    }

    /// Family of real vectors.
    pub fn from_real(dim: usize, vectors: &[Vec<T>]) -> Result<Self> {
        Self::new(
            dim,
            vectors
                .iter()
                .map(|v| v.iter().map(|&x| Complex::new(x, T::zero())).collect())
                .collect(),
        )
    }

    /// The family whose vectors are the columns of `t`.
    pub fn from_synthesis(t: &DenseOperator<T>) -> Self {
        Self {
            dim: t.rows(),
            vectors: t.columns(),
        }
    }

    /// Standard orthonormal basis of `C^d`.
    pub fn standard_basis(dim: usize) -> Self {
        Self::from_synthesis(&DenseOperator::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vector<T>] {
        &self.vectors
    }

    /// Same family with every vector multiplied by `s`.
    pub fn scaled(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|z| z.scale(s)).collect())
                .collect(),
        }
    }

    /// Same family with vector `index` replaced.
    pub fn with_vector(&self, index: usize, v: Vector<T>) -> Result<Self> {
        let mut vectors = self.vectors.clone();
        vectors[index] = v;
        Self::new(self.dim, vectors)
    }
}

/// `T : C^n -> C^d`, `T a = Σ a_j f_j`.
pub fn synthesis<T: Real>(f: &FrameFamily<T>) -> DenseOperator<T> {
    DenseOperator::from_fn(f.dim(), f.len(), |r, c| f.vectors()[c][r])
}

/// `T* f = (⟨f, f_j⟩)_j`.
pub fn analysis<T: Real>(f: &FrameFamily<T>) -> DenseOperator<T> {
    synthesis(f).adjoint()
}

/// `S = T T*`, i.e. `S f = Σ ⟨f, f_j⟩ f_j`.
pub fn frame_operator<T: Real>(f: &FrameFamily<T>) -> DenseOperator<T> {
    let t = synthesis(f);
    t.matmul(&t.adjoint())
}

/// `Σ |⟨g, f_j⟩|²`.
pub fn frame_sum<T: Real>(f: &FrameFamily<T>, g: &[Complex<T>]) -> T {
    f.vectors().iter().map(|v| inner(g, v).norm_sqr()).sum()
}

/// Extreme eigenvalues of the frame operator, both flagged optimal.
pub fn optimal_frame_bounds<T: Real>(f: &FrameFamily<T>, tol: &Tolerance<T>) -> FrameBounds<T> {
    let spec = hermitian_spectrum(&frame_operator(f), tol).expect("frame operator is Hermitian by construction");
    FrameBounds::optimal(spec.min().max(T::zero()), spec.max())
}

/// A family is a frame when its optimal lower bound exceeds `rel_eps` times the upper.
pub fn is_frame<T: Real>(bounds: &FrameBounds<T>, tol: &Tolerance<T>) -> bool {
    bounds.upper > T::zero() && bounds.lower > tol.rel_eps * bounds.upper
}

/// Output of [`reconstruct`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction<T> {
    /// `Σ ⟨g, S⁻¹ f_j⟩ f_j`.
    pub vector: Vector<T>,
    /// The canonical coefficients `⟨g, S⁻¹ f_j⟩`.
    pub coefficients: Vector<T>,
}

/// Reconstructs `g` through the canonical dual frame `{S⁻¹ f_j}`.
pub fn reconstruct<T: Real>(f: &FrameFamily<T>, g: &[Complex<T>], tol: &Tolerance<T>) -> Result<Reconstruction<T>> {
    if g.len() != f.dim() {
        return Err(FrameError::DimensionMismatch(format!(
            "vector of length {} for a frame in dimension {}",
            g.len(),
            f.dim()
        )));
    }
    let bounds = optimal_frame_bounds(f, tol);
    if !is_frame(&bounds, tol) {
        return Err(FrameError::NotAFrame {
            lower: to_f64(bounds.lower),
            upper: to_f64(bounds.upper),
        });
    }
    let s_inv = hermitian_inverse(&frame_operator(f), tol)?;
    let coefficients: Vector<T> = f.vectors().iter().map(|v| inner(g, &s_inv.apply(v))).collect();
    let vector = synthesis(f).apply(&coefficients);
    Ok(Reconstruction { vector, coefficients })
}
