//! Hermitian spectra, singular value decompositions and the operators derived
//! from them (pseudo-inverse, square roots, range projectors).
//!
//! Both decompositions are Jacobi methods: a cyclic two-sided sweep for
//! Hermitian matrices and a one-sided (Hestenes) sweep for the SVD. They are
//! slower than Householder-based routines but accurate to a few ulps of
//! `‖M‖`, which is what certificates at desk scale need.

use num_complex::Complex;

use super::{norm, DenseOperator, Tolerance, Vector};
use crate::error::{FrameError, Result};
use crate::scalar::{cre, lit, to_f64, Real};

const MAX_SWEEPS: usize = 80;

/// Eigen-decomposition of a Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Column `j` is a unit eigenvector for `eigenvalues[j]`.
    pub basis: DenseOperator<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn min(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> T {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// Largest absolute eigenvalue, i.e. the operator norm.
    pub fn spectral_radius(&self) -> T {
        self.min().abs().max(self.max().abs())
    }

    pub fn min_vector(&self) -> Vector<T> {
        self.basis.column(0)
    }

    pub fn max_vector(&self) -> Vector<T> {
        self.basis.column(self.eigenvalues.len() - 1)
    }

    /// `U f(Λ) U*`.
    pub fn map(&self, f: impl Fn(T) -> T) -> DenseOperator<T> {
        let d = self.eigenvalues.len();
        let fv: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let u = &self.basis;
        DenseOperator::from_fn(d, d, |r, c| {
            (0..d).fold(cre(T::zero()), |acc, k| acc + u.get(r, k) * u.get(c, k).conj() * fv[k])
        })
    }

    /// `U Λ U*`.
    pub fn reconstruct(&self) -> DenseOperator<T> {
        self.map(|l| l)
    }
}

/// Thin singular value decomposition `M = U diag(σ) V*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd<T> {
    /// `rows × k` with `k = min(rows, cols)`; columns for zero singular values are zero.
    pub u: DenseOperator<T>,
    /// Descending, non-negative.
    pub singular_values: Vec<T>,
    /// `cols × k`.
    pub v: DenseOperator<T>,
}

impl<T: Real> Svd<T> {
    pub fn sigma_max(&self) -> T {
        self.singular_values.first().copied().unwrap_or(T::zero())
    }

    /// Number of singular values above `rank_eps * sigma_max`.
    pub fn rank(&self, tol: &Tolerance<T>) -> usize {
        let smax = self.sigma_max();
        if smax == T::zero() {
            return 0;
        }
        let cut = tol.rank_eps * smax;
        self.singular_values.iter().filter(|&&s| s > cut).count()
    }
}

/// Applies the unitary `G` acting on coordinates `p, q` from the right:
/// `x[p], x[q] <- x[p] g_pp + x[q] g_qp, x[p] g_pq + x[q] g_qq`.
#[inline]
fn rotate_pair<T: Real>(xp: Complex<T>, xq: Complex<T>, c: T, s: T, ph: Complex<T>) -> (Complex<T>, Complex<T>) {
    // G = [[c, s], [-s·ph, c·ph]] with ph = e^{-iφ}
    (xp.scale(c) - xq * ph.scale(s), xp.scale(s) + xq * ph.scale(c))
}

/// Jacobi rotation parameters annihilating the off-diagonal entry of the
/// Hermitian 2×2 block `[[app, apq], [conj(apq), aqq]]`.
#[inline]
fn jacobi_params<T: Real>(app: T, aqq: T, apq: Complex<T>) -> (T, T, T, Complex<T>) {
    let mag = apq.norm();
    let ph = apq.unscale(mag).conj();
    let two = lit::<T>(2.0);
    let tau = (aqq - app) / (two * mag);
    let sign = if tau >= T::zero() { T::one() } else { -T::one() };
    let t = sign / (tau.abs() + T::one().hypot(tau));
    let c = T::one() / T::one().hypot(t);
    (t, c, t * c, ph)
}

/// Cyclic Jacobi on an exactly Hermitian row-major matrix.
fn jacobi_eigen<T: Real>(mut a: Vec<Complex<T>>, d: usize) -> (Vec<T>, DenseOperator<T>) {
    let mut v = DenseOperator::<T>::identity(d).data().to_vec();
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if scale > T::zero() {
        for _ in 0..MAX_SWEEPS {
            let off = {
                let mut acc = T::zero();
                for p in 0..d {
                    for q in 0..d {
                        if p != q {
                            acc = acc + a[p * d + q].norm_sqr();
                        }
                    }
                }
                acc.sqrt()
            };
            if off <= T::epsilon() * scale {
                break;
            }
            for p in 0..d {
                for q in p + 1..d {
                    let apq = a[p * d + q];
                    if apq.norm() == T::zero() {
                        continue;
                    }
                    let app = a[p * d + p].re;
                    let aqq = a[q * d + q].re;
                    let (t, c, s, ph) = jacobi_params(app, aqq, apq);
                    let mag = apq.norm();
                    // A <- A G
                    for r in 0..d {
                        let (np, nq) = rotate_pair(a[r * d + p], a[r * d + q], c, s, ph);
                        a[r * d + p] = np;
                        a[r * d + q] = nq;
                    }
                    // A <- G* A, the conjugate of the column update on rows
                    for r in 0..d {
                        let (np, nq) = rotate_pair(a[p * d + r].conj(), a[q * d + r].conj(), c, s, ph);
                        a[p * d + r] = np.conj();
                        a[q * d + r] = nq.conj();
                    }
                    a[p * d + q] = cre(T::zero());
                    a[q * d + p] = cre(T::zero());
                    a[p * d + p] = cre(app - t * mag);
                    a[q * d + q] = cre(aqq + t * mag);
                    for r in 0..d {
                        let (np, nq) = rotate_pair(v[r * d + p], v[r * d + q], c, s, ph);
                        v[r * d + p] = np;
                        v[r * d + q] = nq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        a[i * d + i]
            .re
            .partial_cmp(&a[j * d + j].re)
            .expect("finite eigenvalues")
    });
    let values = order.iter().map(|&i| a[i * d + i].re).collect();
    let vmat = DenseOperator::from_raw(d, d, v);
    (values, vmat.select_columns(&order))
}

/// Real eigenvalues (ascending) and an orthonormal eigenbasis of a Hermitian operator.
///
/// Inputs whose anti-Hermitian residual exceeds `rel_eps·‖M‖` are rejected
/// with [`FrameError::NotHermitian`]; callers that want the Hermitian part of a
/// non-Hermitian operator must take it explicitly. Norms here are Frobenius.
pub fn hermitian_spectrum<T: Real>(m: &DenseOperator<T>, tol: &Tolerance<T>) -> Result<Spectrum<T>> {
    if !m.is_square() {
        return Err(FrameError::DimensionMismatch(format!(
            "spectrum of non-square {}x{} operator",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermitian_defect();
    let allowed = tol.rel_eps * m.frobenius_norm();
    if defect > allowed {
        return Err(FrameError::NotHermitian {
            residual: to_f64(defect),
            allowed: to_f64(allowed),
        });
    }
    let (eigenvalues, basis) = jacobi_eigen(m.hermitian_part().data().to_vec(), m.rows());
    Ok(Spectrum { eigenvalues, basis })
}

/// One-sided Jacobi on the columns of a tall (`rows >= cols`) matrix.
fn jacobi_svd_tall<T: Real>(m: &DenseOperator<T>) -> Svd<T> {
    let (rows, n) = m.shape();
    let mut cols = m.columns();
    let mut v: Vec<Vector<T>> = (0..n).map(|j| super::basis_vector(n, j)).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: T = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: T = cols[q].iter().map(|z| z.norm_sqr()).sum();
                if alpha == T::zero() || beta == T::zero() {
                    continue;
                }
                // (A* A)_pq
                let gamma = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .fold(cre(T::zero()), |acc, (a, b)| acc + a.conj() * b);
                if gamma.norm() <= T::epsilon() * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let (_, c, s, ph) = jacobi_params(alpha, beta, gamma);
                for r in 0..rows {
                    let (np, nq) = rotate_pair(cols[p][r], cols[q][r], c, s, ph);
                    cols[p][r] = np;
                    cols[q][r] = nq;
                }
                for r in 0..n {
                    let (np, nq) = rotate_pair(v[p][r], v[q][r], c, s, ph);
                    v[p][r] = np;
                    v[q][r] = nq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<T> = cols.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).expect("finite singular values"));
    let u_cols: Vec<Vector<T>> = order
        .iter()
        .map(|&j| {
            if sigma[j] > T::zero() {
                cols[j].iter().map(|z| z.unscale(sigma[j])).collect()
            } else {
                vec![cre(T::zero()); rows]
            }
        })
        .collect();
    let v_cols: Vec<Vector<T>> = order.iter().map(|&j| v[j].clone()).collect();
    Svd {
        u: DenseOperator::from_fn(rows, n, |r, c| u_cols[c][r]),
        singular_values: order.iter().map(|&j| sigma[j]).collect(),
        v: DenseOperator::from_fn(n, n, |r, c| v_cols[c][r]),
    }
}

/// Thin SVD of an arbitrary operator.
pub fn svd<T: Real>(m: &DenseOperator<T>) -> Svd<T> {
    if m.rows() >= m.cols() {
        jacobi_svd_tall(m)
    } else {
        let t = jacobi_svd_tall(&m.adjoint());
        Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        }
    }
}

/// Largest singular value.
pub fn operator_norm<T: Real>(m: &DenseOperator<T>) -> T {
    svd(m).sigma_max()
}

/// Numerical rank under the relative `rank_eps` cutoff.
pub fn numerical_rank<T: Real>(m: &DenseOperator<T>, tol: &Tolerance<T>) -> usize {
    svd(m).rank(tol)
}

/// Moore–Penrose pseudo-inverse with singular values below
/// `rank_eps·σ_max` treated as zero.
pub fn pseudo_inverse<T: Real>(m: &DenseOperator<T>, tol: &Tolerance<T>) -> DenseOperator<T> {
    let dec = svd(m);
    let r = dec.rank(tol);
    let (rows, cols) = m.shape();
    DenseOperator::from_fn(cols, rows, |i, j| {
        (0..r).fold(cre(T::zero()), |acc, k| {
            acc + dec.v.get(i, k) * dec.u.get(j, k).conj() / dec.singular_values[k]
        })
    })
}

/// Orthonormal basis of the numerical range `R(M)`, or `None` for rank zero.
pub fn range_basis<T: Real>(m: &DenseOperator<T>, tol: &Tolerance<T>) -> Option<DenseOperator<T>> {
    let dec = svd(m);
    let r = dec.rank(tol);
    (r > 0).then(|| dec.u.select_columns(&(0..r).collect::<Vec<_>>()))
}

/// Orthogonal projector onto `R(M)`.
pub fn range_projector<T: Real>(m: &DenseOperator<T>, tol: &Tolerance<T>) -> DenseOperator<T> {
    match range_basis(m, tol) {
        Some(q) => q.matmul(&q.adjoint()),
        None => DenseOperator::zeros(m.rows(), m.rows()),
    }
}

fn psd_spectrum<T: Real>(m: &DenseOperator<T>, tol: &Tolerance<T>) -> Result<Spectrum<T>> {
    let spec = hermitian_spectrum(m, tol)?;
    let floor = -tol.rel_eps * spec.spectral_radius();
    if spec.min() < floor {
        return Err(FrameError::NotPsd {
            min_eigenvalue: to_f64(spec.min()),
        });
    }
    Ok(spec)
}

/// The unique positive semidefinite square root.
///
/// Eigenvalues in `[-rel_eps·‖M‖, 0)` are clamped to zero.
pub fn positive_sqrt<T: Real>(m: &DenseOperator<T>, tol: &Tolerance<T>) -> Result<DenseOperator<T>> {
    let spec = psd_spectrum(m, tol)?;
    Ok(spec.map(|l| l.max(T::zero()).sqrt()))
}

fn positive_definite_spectrum<T: Real>(m: &DenseOperator<T>, tol: &Tolerance<T>) -> Result<Spectrum<T>> {
    let spec = hermitian_spectrum(m, tol)?;
    if !(spec.min() > tol.rank_eps * spec.spectral_radius()) {
        return Err(FrameError::NotPositive {
            min_eigenvalue: to_f64(spec.min()),
        });
    }
    Ok(spec)
}

/// `M^{-1/2}` for Hermitian positive definite `M`.
pub fn inverse_positive_sqrt<T: Real>(m: &DenseOperator<T>, tol: &Tolerance<T>) -> Result<DenseOperator<T>> {
    Ok(positive_definite_spectrum(m, tol)?.map(|l| T::one() / l.sqrt()))
}

/// `M^{-1}` for Hermitian positive definite `M`.
pub fn hermitian_inverse<T: Real>(m: &DenseOperator<T>, tol: &Tolerance<T>) -> Result<DenseOperator<T>> {
    Ok(positive_definite_spectrum(m, tol)?.map(|l| T::one() / l))
}

/// Result of [`pencil_lower_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct PencilBound<T> {
    /// `sup { a >= 0 : S - a W ⪰ 0 }`.
    pub value: T,
    /// Unit vector on which `⟨S f, f⟩ = value · ⟨W f, f⟩` (the binding direction).
    pub witness: Vector<T>,
}

/// Largest `a` with `S - a·W` positive semidefinite, for Hermitian `S ⪰ 0`
/// and nonzero `W ⪰ 0`.
///
/// If `W` does not vanish on `ker S` no positive `a` exists and the value is
/// zero, with the witness drawn from `ker S`. Otherwise the value is
/// `1 / λ_max(S^{†1/2} W S^{†1/2})` computed on the numerical range of `S`.
pub fn pencil_lower_bound<T: Real>(
    s: &DenseOperator<T>,
    w: &DenseOperator<T>,
    tol: &Tolerance<T>,
) -> Result<PencilBound<T>> {
    if s.shape() != w.shape() {
        return Err(FrameError::DimensionMismatch(format!(
            "pencil operands {:?} and {:?}",
            s.shape(),
            w.shape()
        )));
    }
    let d = s.rows();
    let ss = hermitian_spectrum(s, tol)?;
    let ws = hermitian_spectrum(w, tol)?;
    let w_norm = ws.spectral_radius();
    if w_norm == T::zero() {
        return Err(FrameError::ZeroK { norm: 0.0 });
    }
    if ss.min() < -tol.rel_eps * ss.spectral_radius() {
        // S itself is indefinite: no a >= 0 works
        return Ok(PencilBound {
            value: T::zero(),
            witness: ss.min_vector(),
        });
    }
    let cut = tol.rank_eps * ss.spectral_radius().max(w_norm);
    let (kernel, range): (Vec<usize>, Vec<usize>) = (0..d).partition(|&i| ss.eigenvalues[i] <= cut);

    if !kernel.is_empty() {
        let n = ss.basis.select_columns(&kernel);
        let compressed = n.adjoint().matmul(w).matmul(&n);
        let cs = hermitian_spectrum(&compressed.hermitian_part(), tol)?;
        if cs.max() > tol.rel_eps * w_norm || range.is_empty() {
            return Ok(PencilBound {
                value: T::zero(),
                witness: super::normalized(&n.apply(&cs.max_vector())),
            });
        }
    }

    // Z = U_r Λ_r^{-1/2}; M = Z* W Z
    let inv_sqrt: Vec<T> = range.iter().map(|&i| T::one() / ss.eigenvalues[i].sqrt()).collect();
    let z = DenseOperator::from_fn(d, range.len(), |r, c| ss.basis.get(r, range[c]).scale(inv_sqrt[c]));
    let m = z.adjoint().matmul(w).matmul(&z).hermitian_part();
    let ms = hermitian_spectrum(&m, tol)?;
    let top = ms.max();
    if !(top > T::zero()) {
        return Ok(PencilBound {
            value: T::infinity(),
            witness: super::normalized(&z.apply(&ms.max_vector())),
        });
    }
    Ok(PencilBound {
        value: T::one() / top,
        witness: super::normalized(&z.apply(&ms.max_vector())),
    })
}
