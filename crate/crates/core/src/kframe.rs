//! K-frames: certification of `A‖K*f‖² ≤ Σ|⟨f, f_j⟩|² ≤ B‖f‖²`, the optimal
//! lower constant, the range-restricted invertibility sandwich and minimal-norm
//! atomic coefficients.

use num_complex::Complex;

use crate::certificate::{CertReport, FrameBounds, Verdict};
use crate::error::{FrameError, Result};
use crate::frame::{frame_operator, synthesis, FrameFamily};
use crate::generators::{complex_gaussian, seeded_rng};
use crate::operator::{
    hermitian_spectrum, norm, normalized, operator_norm, pencil_lower_bound, pseudo_inverse, range_basis, sub_vec,
    DenseOperator, Tolerance, Vector,
};
use crate::scalar::{lit, to_f64, Real};

/// Seed of the deterministic sample set used by [`range_restricted_check`].
pub const RANGE_SAMPLE_SEED: u64 = 0x6b66_7261_6d65;
/// Number of random combinations added to the range basis.
pub const RANGE_SAMPLE_COUNT: usize = 100;

/// A family together with the operator `K` it is tested against.
#[derive(Debug, Clone, PartialEq)]
pub struct KFrameProblem<T> {
    family: FrameFamily<T>,
    k: DenseOperator<T>,
}

impl<T: Real> KFrameProblem<T> {
    pub fn new(family: FrameFamily<T>, k: DenseOperator<T>) -> Result<Self> {
        if k.rows() != family.dim() || k.cols() != family.dim() {
            return Err(FrameError::DimensionMismatch(format!(
                "K is {}x{} but the family lives in dimension {}",
                k.rows(),
                k.cols(),
                family.dim()
            )));
        }
        Ok(Self { family, k })
    }

    pub fn family(&self) -> &FrameFamily<T> {
        &self.family
    }

    pub fn k(&self) -> &DenseOperator<T> {
        &self.k
    }

    /// `K K*`.
    pub fn k_gram(&self) -> DenseOperator<T> {
        self.k.matmul(&self.k.adjoint())
    }
}

pub(crate) fn check_bounds<T: Real>(a: T, b: T) -> Result<()> {
    if a > T::zero() && b > T::zero() && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(FrameError::BadBounds {
            lower: to_f64(a),
            upper: to_f64(b),
        })
    }
}

/// Two-sided PSD certificate: `form - a·lower_op ⪰ 0` and `form ⪯ b·I`.
///
/// `form` must be Hermitian. Shared by the K-frame and controlled K-frame
/// certificates.
pub(crate) fn sandwich_certificate<T: Real>(
    form: &DenseOperator<T>,
    lower_op: &DenseOperator<T>,
    a: T,
    b: T,
    degenerate_lower: bool,
    tol: &Tolerance<T>,
) -> Result<CertReport<T>> {
    let fs = hermitian_spectrum(form, tol)?;
    let lower_norm = hermitian_spectrum(lower_op, tol)?.spectral_radius();
    // both sides are validated; near the optimum the difference is pure rounding
    let ls = hermitian_spectrum(&(form - &lower_op.scale(a)).hermitian_part(), tol)?;
    let scale = fs.spectral_radius().max(a * lower_norm).max(b);
    let threshold = -tol.rel_eps * scale;
    let lower_slack = ls.min();
    let upper_slack = b - fs.max();
    let upper_ok = upper_slack >= threshold;
    let lower_ok = lower_slack >= threshold;
    let verdict = match (degenerate_lower, lower_ok, upper_ok) {
        (_, _, false) => Verdict::Refuted,
        (true, _, true) => Verdict::Degenerate,
        (false, true, true) => Verdict::Certified,
        (false, false, true) => Verdict::Refuted,
    };
    let (margin, witness) = if degenerate_lower || upper_slack < lower_slack {
        (upper_slack, fs.max_vector())
    } else {
        (lower_slack, ls.min_vector())
    };
    Ok(CertReport {
        verdict,
        bounds: FrameBounds::feasible(a, b),
        margin,
        witness,
        anti_hermitian_residual: T::zero(),
    })
}

/// Certifies `A‖K*f‖² ≤ Σ|⟨f, f_j⟩|² ≤ B‖f‖²` as `S - A·KK* ⪰ 0` and `S ⪯ B·I`.
///
/// Returns [`Verdict::Degenerate`] when `‖K‖ ≤ rank_eps` and the upper bound holds.
pub fn certify_kframe<T: Real>(p: &KFrameProblem<T>, a: T, b: T, tol: &Tolerance<T>) -> Result<CertReport<T>> {
    check_bounds(a, b)?;
    let degenerate = operator_norm(p.k()) <= tol.rank_eps;
    sandwich_certificate(&frame_operator(p.family()), &p.k_gram(), a, b, degenerate, tol)
}

/// Largest `A` with `S ⪰ A·KK*`.
pub fn optimal_kframe_lower<T: Real>(p: &KFrameProblem<T>, tol: &Tolerance<T>) -> Result<T> {
    Ok(optimal_kframe_pencil(p, tol)?.value)
}

fn optimal_kframe_pencil<T: Real>(p: &KFrameProblem<T>, tol: &Tolerance<T>) -> Result<crate::operator::PencilBound<T>> {
    let k_norm = operator_norm(p.k());
    if k_norm <= tol.rank_eps {
        return Err(FrameError::ZeroK { norm: to_f64(k_norm) });
    }
    pencil_lower_bound(&frame_operator(p.family()), &p.k_gram(), tol)
}

/// Optimal `(A, B)`: the sharp lower K-frame constant and the top of the spectrum of `S`.
pub fn optimal_kframe_bounds<T: Real>(p: &KFrameProblem<T>, tol: &Tolerance<T>) -> Result<FrameBounds<T>> {
    let lower = optimal_kframe_lower(p, tol)?;
    let upper = hermitian_spectrum(&frame_operator(p.family()), tol)?.max();
    Ok(FrameBounds::optimal(lower, upper))
}

/// Unit vectors spanning `R(K)`: an orthonormal range basis followed by
/// `count` seeded random combinations of it.
pub fn range_samples<T: Real>(k: &DenseOperator<T>, tol: &Tolerance<T>, count: usize, seed: u64) -> Vec<Vector<T>> {
    let Some(q) = range_basis(k, tol) else {
        return Vec::new();
    };
    let mut samples = q.columns();
    let mut rng = seeded_rng(seed, 0);
    for _ in 0..count {
        let c: Vector<T> = (0..q.cols()).map(|_| complex_gaussian(&mut rng)).collect();
        samples.push(normalized(&q.apply(&c)));
    }
    samples
}

/// Checks `A‖K†‖⁻²‖f‖ ≤ ‖Sf‖ ≤ B‖f‖` on sampled `f ∈ R(K)`.
///
/// The reported bounds are `(A‖K†‖⁻², B)`; the margin is the worst slack
/// over the samples and the witness the sample attaining it.
pub fn range_restricted_check<T: Real>(p: &KFrameProblem<T>, a: T, b: T, tol: &Tolerance<T>) -> Result<CertReport<T>> {
    let base = certify_kframe(p, a, b, tol)?;
    if !base.verdict.is_certified() {
        return Err(FrameError::NotCertified(format!(
            "K-frame inequality is {} (margin {:e})",
            base.verdict,
            to_f64(base.margin)
        )));
    }
    let pinv_norm = operator_norm(&pseudo_inverse(p.k(), tol));
    let lower = a / (pinv_norm * pinv_norm);
    let s = frame_operator(p.family());
    let mut margin = T::infinity();
    let mut witness = Vec::new();
    for f in range_samples(p.k(), tol, RANGE_SAMPLE_COUNT, RANGE_SAMPLE_SEED) {
        let sf = norm(&s.apply(&f));
        let slack = (sf - lower).min(b - sf);
        if slack < margin {
            margin = slack;
            witness = f;
        }
    }
    let scale = b.max(lower);
    let verdict = if margin >= -tol.rel_eps * scale {
        Verdict::Certified
    } else {
        Verdict::Refuted
    };
    Ok(CertReport {
        verdict,
        bounds: FrameBounds::feasible(lower, b),
        margin,
        witness,
        anti_hermitian_residual: T::zero(),
    })
}

/// Minimal-norm representation `Kx = Σ a_j f_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicCoefficients<T> {
    pub coefficients: Vector<T>,
    /// `‖T a - Kx‖`.
    pub residual: T,
    /// `‖a‖ / ‖x‖` (zero for `x = 0`).
    pub norm_constant: T,
}

/// Minimal-norm coefficients `a = T† K x`.
///
/// Fails with [`FrameError::OutOfRange`] when `Kx` is not reproduced to
/// `1e-8·‖Kx‖` (floored at a few hundred ulps for low-precision scalars).
pub fn atomic_coefficients<T: Real>(
    p: &KFrameProblem<T>,
    x: &[Complex<T>],
    tol: &Tolerance<T>,
) -> Result<AtomicCoefficients<T>> {
    if x.len() != p.family().dim() {
        return Err(FrameError::DimensionMismatch(format!(
            "vector of length {} for dimension {}",
            x.len(),
            p.family().dim()
        )));
    }
    let t = synthesis(p.family());
    let kx = p.k().apply(x);
    let a = pseudo_inverse(&t, tol).apply(&kx);
    let residual = norm(&sub_vec(&t.apply(&a), &kx));
    let kx_norm = norm(&kx);
    let allowed = lit::<T>(1e-8).max(lit::<T>(500.0) * T::epsilon()) * kx_norm;
    if residual > allowed {
        return Err(FrameError::OutOfRange {
            residual: to_f64(residual / kx_norm),
        });
    }
    let x_norm = norm(x);
    let norm_constant = if x_norm == T::zero() {
        T::zero()
    } else {
        norm(&a) / x_norm
    };
    Ok(AtomicCoefficients {
        coefficients: a,
        residual,
        norm_constant,
    })
}
