//! Controlled frames and C-controlled K-frames.
//!
//! The controlled quadratic form is `⟨C S f, f⟩ = Σ ⟨f, f_j⟩⟨C f_j, f⟩`. For
//! a positive `C` that does not commute with `S` this form is complex, so all
//! certificates are taken against the Hermitian part `H = (CS + SC)/2`, and the
//! anti-Hermitian residual `‖(CS - SC)/2‖_F` is recorded in every report.
//!
//! The lower side of a C-controlled K-frame, `A‖C^{1/2} K* f‖²`, is the
//! quadratic form of `K C K*`; under the commutation hypothesis `CK = KC`
//! this equals `(C^{1/2} K)(C^{1/2} K)*`.

use num_complex::Complex;

use crate::certificate::{CertReport, FrameBounds, Verdict};
use crate::error::{FrameError, Result};
use crate::frame::{frame_operator, FrameFamily};
use crate::kframe::{check_bounds, sandwich_certificate};
use crate::operator::{
    hermitian_spectrum, inner, inverse_positive_sqrt, operator_norm, pencil_lower_bound, positive_sqrt, DenseOperator,
    Spectrum, Tolerance,
};
use crate::scalar::{cre, lit, to_f64, Real};

/// Checks `C ∈ GL⁺`: Hermitian to `rel_eps` and positive definite.
pub fn check_positive<T: Real>(c: &DenseOperator<T>, tol: &Tolerance<T>) -> Result<Spectrum<T>> {
    let spec = hermitian_spectrum(c, tol)?;
    if !(spec.min() > T::zero()) || spec.min() <= tol.rank_eps * spec.max() {
        return Err(FrameError::NotPositive {
            min_eigenvalue: to_f64(spec.min()),
        });
    }
    Ok(spec)
}

fn check_square<T: Real>(f: &FrameFamily<T>, m: &DenseOperator<T>, name: &str) -> Result<()> {
    if m.rows() != f.dim() || m.cols() != f.dim() {
        return Err(FrameError::DimensionMismatch(format!(
            "{name} is {}x{} but the family lives in dimension {}",
            m.rows(),
            m.cols(),
            f.dim()
        )));
    }
    Ok(())
}

/// A family with `K` and a positive control operator `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledProblem<T> {
    family: FrameFamily<T>,
    k: DenseOperator<T>,
    c: DenseOperator<T>,
    commute_residual: T,
}

impl<T: Real> ControlledProblem<T> {
    pub fn new(family: FrameFamily<T>, k: DenseOperator<T>, c: DenseOperator<T>, tol: &Tolerance<T>) -> Result<Self> {
        check_square(&family, &k, "K")?;
        check_square(&family, &c, "C")?;
        check_positive(&c, tol)?;
        let commute_residual = operator_norm(&(&c.matmul(&k) - &k.matmul(&c)));
        Ok(Self {
            family,
            k,
            c,
            commute_residual,
        })
    }

    pub fn family(&self) -> &FrameFamily<T> {
        &self.family
    }

    pub fn k(&self) -> &DenseOperator<T> {
        &self.k
    }

    pub fn c(&self) -> &DenseOperator<T> {
        &self.c
    }

    /// `‖CK - KC‖`.
    pub fn commute_residual(&self) -> T {
        self.commute_residual
    }

    /// Fails with [`FrameError::CommutationViolated`] when `‖CK - KC‖ > rel_eps·‖C‖·‖K‖`.
    pub fn check_commutation(&self, tol: &Tolerance<T>) -> Result<()> {
        let allowed = tol.rel_eps * operator_norm(&self.c) * operator_norm(&self.k);
        if self.commute_residual > allowed {
            return Err(FrameError::CommutationViolated {
                residual: to_f64(self.commute_residual),
                allowed: to_f64(allowed),
            });
        }
        Ok(())
    }

    /// `K C K*`, the operator of `f ↦ ‖C^{1/2} K* f‖²`.
    pub fn controlled_k_gram(&self) -> DenseOperator<T> {
        self.k.matmul(&self.c).matmul(&self.k.adjoint())
    }
}

/// `L_C = C S`, cross-checked column by column against `Σ ⟨f, f_j⟩ C f_j`.
pub fn controlled_operator<T: Real>(f: &FrameFamily<T>, c: &DenseOperator<T>) -> Result<DenseOperator<T>> {
    check_square(f, c, "C")?;
    let l = c.matmul(&frame_operator(f));
    let cf: Vec<_> = f.vectors().iter().map(|v| c.apply(v)).collect();
    let d = f.dim();
    let mut worst = T::zero();
    for col in 0..d {
        // L_C e_col = Σ ⟨e_col, f_j⟩ C f_j = Σ conj(f_j[col]) C f_j
        let mut direct = vec![cre(T::zero()); d];
        for (v, cv) in f.vectors().iter().zip(&cf) {
            let coef = v[col].conj();
            for (o, x) in direct.iter_mut().zip(cv) {
                *o = *o + coef * x;
            }
        }
        for (r, x) in direct.iter().enumerate() {
            worst = worst.max((l.get(r, col) - x).norm());
        }
    }
    let scale = l.max_abs().max(T::min_positive_value());
    if worst > lit::<T>(1e-10).max(lit::<T>(100.0) * T::epsilon()) * scale * lit(d as f64) {
        return Err(FrameError::Inconsistent(format!(
            "C·S differs from the direct sum by {:e}",
            to_f64(worst)
        )));
    }
    Ok(l)
}

/// `Σ ⟨f, f_j⟩⟨C f_j, f⟩ = ⟨C S f, f⟩`.
///
/// For `C = I` this is `Σ|⟨f, f_j⟩|²`; the imaginary part is nonzero only
/// when `C` and `S` fail to commute.
pub fn controlled_form<T: Real>(f: &FrameFamily<T>, c: &DenseOperator<T>, x: &[Complex<T>]) -> Complex<T> {
    f.vectors()
        .iter()
        .fold(cre(T::zero()), |acc, v| acc + inner(x, v) * inner(&c.apply(v), x))
}

/// Hermitian part of `C S` and the Frobenius norm of its anti-Hermitian part.
pub fn controlled_hermitian_part<T: Real>(f: &FrameFamily<T>, c: &DenseOperator<T>) -> Result<(DenseOperator<T>, T)> {
    let l = controlled_operator(f, c)?;
    Ok((l.hermitian_part(), l.anti_hermitian_part().frobenius_norm()))
}

/// Optimal controlled-frame bounds `m_C, M_C`: extreme eigenvalues of the
/// Hermitian part of `C S`. Certified iff `m_C > rel_eps·M_C`.
pub fn certify_controlled_frame<T: Real>(
    f: &FrameFamily<T>,
    c: &DenseOperator<T>,
    tol: &Tolerance<T>,
) -> Result<CertReport<T>> {
    check_square(f, c, "C")?;
    check_positive(c, tol)?;
    let (h, residual) = controlled_hermitian_part(f, c)?;
    let hs = hermitian_spectrum(&h, tol)?;
    let (m, big_m) = (hs.min(), hs.max());
    let verdict = if big_m > T::zero() && m > tol.rel_eps * big_m {
        Verdict::Certified
    } else {
        Verdict::Refuted
    };
    Ok(CertReport {
        verdict,
        bounds: FrameBounds::optimal(m, big_m),
        margin: m - tol.rel_eps * big_m,
        witness: hs.min_vector(),
        anti_hermitian_residual: residual,
    })
}

/// Certifies `A‖C^{1/2}K*f‖² ≤ ⟨H f, f⟩ ≤ B‖f‖²` with `H` the Hermitian part of `C S`.
pub fn certify_controlled_kframe<T: Real>(
    p: &ControlledProblem<T>,
    a: T,
    b: T,
    tol: &Tolerance<T>,
) -> Result<CertReport<T>> {
    check_bounds(a, b)?;
    p.check_commutation(tol)?;
    let (h, residual) = controlled_hermitian_part(p.family(), p.c())?;
    let degenerate = operator_norm(p.k()) <= tol.rank_eps;
    let mut report = sandwich_certificate(&h, &p.controlled_k_gram(), a, b, degenerate, tol)?;
    report.anti_hermitian_residual = residual;
    Ok(report)
}

/// Sharp C-controlled K-frame bounds: the largest `A` with `H ⪰ A·K C K*`
/// and `B = λ_max(H)`.
pub fn optimal_controlled_kframe_bounds<T: Real>(
    p: &ControlledProblem<T>,
    tol: &Tolerance<T>,
) -> Result<FrameBounds<T>> {
    p.check_commutation(tol)?;
    let k_norm = operator_norm(p.k());
    if k_norm <= tol.rank_eps {
        return Err(FrameError::ZeroK { norm: to_f64(k_norm) });
    }
    let (h, _) = controlled_hermitian_part(p.family(), p.c())?;
    let lower = pencil_lower_bound(&h, &p.controlled_k_gram(), tol)?.value;
    let upper = hermitian_spectrum(&h, tol)?.max();
    Ok(FrameBounds::optimal(lower, upper))
}

/// Tests the operator inequality `C S ⪰ C A K K*` as positivity of the
/// Hermitian part of `C (S - A K K*)`.
pub fn controlled_inequality<T: Real>(p: &ControlledProblem<T>, a: T, tol: &Tolerance<T>) -> Result<CertReport<T>> {
    check_bounds(a, T::one())?;
    p.check_commutation(tol)?;
    let s = frame_operator(p.family());
    let gram = p.k().matmul(&p.k().adjoint());
    let diff = p.c().matmul(&(&s - &gram.scale(a)));
    let residual = diff.anti_hermitian_part().frobenius_norm();
    let ds = hermitian_spectrum(&diff.hermitian_part(), tol)?;
    let cs = p.c().matmul(&s).hermitian_part();
    let top = hermitian_spectrum(&cs, tol)?.max();
    let scale = top.max(a * operator_norm(&p.c().matmul(&gram)));
    let verdict = if operator_norm(p.k()) <= tol.rank_eps {
        Verdict::Degenerate
    } else if ds.min() >= -tol.rel_eps * scale {
        Verdict::Certified
    } else {
        Verdict::Refuted
    };
    Ok(CertReport {
        verdict,
        bounds: FrameBounds {
            lower: a,
            upper: top,
            lower_optimal: false,
            upper_optimal: true,
        },
        margin: ds.min(),
        witness: ds.min_vector(),
        anti_hermitian_residual: residual,
    })
}

/// Controlled K-frame bounds `(A, B)` to K-frame bounds
/// `(A·‖C^{1/2}‖⁻², B·‖C^{-1/2}‖²)`.
pub fn transfer_controlled_to_k<T: Real>(
    bounds: &FrameBounds<T>,
    c: &DenseOperator<T>,
    tol: &Tolerance<T>,
) -> Result<FrameBounds<T>> {
    check_positive(c, tol)?;
    let root = operator_norm(&positive_sqrt(c, tol)?);
    let inv_root = operator_norm(&inverse_positive_sqrt(c, tol)?);
    Ok(FrameBounds::feasible(
        bounds.lower / (root * root),
        bounds.upper * inv_root * inv_root,
    ))
}

/// K-frame bounds `(A', B')` to controlled K-frame bounds `(A', B'·‖C‖)`.
pub fn transfer_k_to_controlled<T: Real>(
    bounds: &FrameBounds<T>,
    c: &DenseOperator<T>,
    tol: &Tolerance<T>,
) -> Result<FrameBounds<T>> {
    check_positive(c, tol)?;
    Ok(FrameBounds::feasible(bounds.lower, bounds.upper * operator_norm(c)))
}
