//! Stability of frames, K-frames and controlled K-frames under perturbation
//! of the synthesis operator.
//!
//! Three results are implemented:
//!
//! * the three-constant condition
//!   `‖Σ c_j(f_j - g_j)‖ ≤ λ₁‖Σ c_j f_j‖ + λ₂‖Σ c_j g_j‖ + μ‖c‖` with its gate
//!   `max{λ₁ + μ/√C_F, λ₂} < 1`;
//! * predicted K-frame bounds for the perturbed family, relative to the
//!   effective operator `P K` where `P` projects onto `Q(R(K))`, `Q = T_G T_F*`;
//! * the Bessel bound `B_F(1 + ‖E‖/√B_F)²‖C^{1/2}‖²` for `E = T_F - T_G`.
//!
//! Empirical bounds are always computed by fresh eigensolves.

use crate::certificate::{FrameBounds, Verdict};
use crate::controlled::{check_positive, ControlledProblem};
use crate::error::{FrameError, Result};
use crate::frame::{frame_operator, optimal_frame_bounds, synthesis, FrameFamily};
use crate::generators::{complex_gaussian, seeded_rng};
use crate::kframe::{optimal_kframe_bounds, KFrameProblem};
use crate::operator::{
    hermitian_spectrum, norm, operator_norm, pencil_lower_bound, pseudo_inverse, range_basis, sub_vec, DenseOperator,
    Tolerance, Vector,
};
use crate::scalar::{lit, to_f64, Real};

/// Relative slack allowed when comparing empirical bounds to predicted ones.
pub const PREDICTION_RTOL: f64 = 1e-8;

/// Constants `(α, β, γ)`, also read as `(λ₁, λ₂, μ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

impl<T: Real> PerturbationSpec<T> {
    pub fn new(alpha: T, beta: T, gamma: T) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(v >= T::zero() && v.is_finite()) {
                return Err(FrameError::InvalidSpec(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn zero() -> Self {
        Self {
            alpha: T::zero(),
            beta: T::zero(),
            gamma: T::zero(),
        }
    }

    /// `max{λ₁ + μ/√C, λ₂}` for a lower frame bound `C`.
    pub fn frame_gate(&self, lower: T) -> T {
        let shift = if self.gamma == T::zero() {
            T::zero()
        } else if lower > T::zero() {
            self.gamma / lower.sqrt()
        } else {
            T::infinity()
        };
        (self.alpha + shift).max(self.beta)
    }

    /// `max{α + γ√(A⁻¹)‖K†‖, β}` for a lower K-frame bound `A`.
    pub fn kframe_gate(&self, lower: T, pinv_norm: T) -> T {
        let shift = if self.gamma == T::zero() {
            T::zero()
        } else if lower > T::zero() {
            self.gamma * pinv_norm / lower.sqrt()
        } else {
            T::infinity()
        };
        (self.alpha + shift).max(self.beta)
    }
}

/// How the three-constant condition was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionMode {
    /// `‖T_F - T_G‖ ≤ γ`, which implies the condition for every `c`.
    SufficientCertified,
    /// Every sampled coefficient sequence satisfied the inequality.
    SampledPass,
    /// Some sampled coefficient sequence violated it.
    SampledFail,
}

impl ConditionMode {
    pub fn holds(self) -> bool {
        !matches!(self, ConditionMode::SampledFail)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ConditionMode::SufficientCertified => "sufficient-certified",
            ConditionMode::SampledPass => "sampled-pass",
            ConditionMode::SampledFail => "sampled-fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<T> {
    pub mode: ConditionMode,
    /// Number of sampled sequences; zero in the sufficient mode.
    pub trials: usize,
    /// `‖T_F - T_G‖`.
    pub e_norm: T,
    /// Smallest `rhs - lhs` seen (or `γ - ‖E‖` in the sufficient mode).
    pub worst_slack: T,
    /// `max{λ₁ + μ/√C_F, λ₂}` with `C_F` the optimal lower frame bound of `F`.
    pub gate_value: T,
    pub gate_passes: bool,
}

impl<T> ConditionReport<T> {
    /// The verdict: condition holds and the gate passes.
    pub fn verdict(&self) -> Verdict {
        if self.mode.holds() && self.gate_passes {
            Verdict::Certified
        } else {
            Verdict::Refuted
        }
    }
}

fn check_same_shape<T: Real>(f: &FrameFamily<T>, g: &FrameFamily<T>) -> Result<()> {
    if f.dim() != g.dim() || f.len() != g.len() {
        return Err(FrameError::ShapeMismatch(format!(
            "families have shapes {}x{} and {}x{}",
            f.dim(),
            f.len(),
            g.dim(),
            g.len()
        )));
    }
    Ok(())
}

/// Decides the three-constant condition, first by the single operator-norm
/// test `‖T_F - T_G‖ ≤ γ`, otherwise on `trials` seeded coefficient sequences.
pub fn cc_condition<T: Real>(
    f: &FrameFamily<T>,
    g: &FrameFamily<T>,
    s: &PerturbationSpec<T>,
    trials: usize,
    seed: u64,
    tol: &Tolerance<T>,
) -> Result<ConditionReport<T>> {
    check_same_shape(f, g)?;
    let (tf, tg) = (synthesis(f), synthesis(g));
    let e_norm = operator_norm(&(&tf - &tg));
    let lower = optimal_frame_bounds(f, tol).lower;
    let gate_value = s.frame_gate(lower);
    let gate_passes = gate_value < T::one();
    let allowance = tol.rel_eps * operator_norm(&tf).max(s.gamma);
    if e_norm <= s.gamma + allowance {
        return Ok(ConditionReport {
            mode: ConditionMode::SufficientCertified,
            trials: 0,
            e_norm,
            worst_slack: s.gamma - e_norm,
            gate_value,
            gate_passes,
        });
    }
    let mut rng = seeded_rng(seed, 0);
    let mut worst = T::infinity();
    let mut failed = false;
    for _ in 0..trials {
        let c: Vector<T> = (0..f.len()).map(|_| complex_gaussian(&mut rng)).collect();
        let (u, v) = (tf.apply(&c), tg.apply(&c));
        let lhs = norm(&sub_vec(&u, &v));
        let rhs = s.alpha * norm(&u) + s.beta * norm(&v) + s.gamma * norm(&c);
        let slack = rhs - lhs;
        worst = worst.min(slack);
        if slack < -tol.rel_eps * (rhs + lhs) {
            failed = true;
        }
    }
    Ok(ConditionReport {
        mode: if failed || trials == 0 {
            ConditionMode::SampledFail
        } else {
            ConditionMode::SampledPass
        },
        trials,
        e_norm,
        worst_slack: worst,
        gate_value,
        gate_passes,
    })
}

/// Gate and predicted bounds for the perturbed K-frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub gate_value: T,
    pub admissible: bool,
    /// `None` when the gate fails.
    pub bounds: Option<FrameBounds<T>>,
}

/// Evaluates `max{α + γ√(A⁻¹)‖K†‖, β} < 1` and, when it holds,
/// `[√A‖K†‖⁻¹(1-α) - γ]² / ((1+β)²‖K‖²)` and `[√B(1+α) + γ]² / (1-β)²`.
pub fn kframe_perturb_predict<T: Real>(
    a: T,
    b: T,
    k: &DenseOperator<T>,
    s: &PerturbationSpec<T>,
    tol: &Tolerance<T>,
) -> Result<Prediction<T>> {
    crate::kframe::check_bounds(a, b)?;
    let k_norm = operator_norm(k);
    if k_norm <= tol.rank_eps {
        return Err(FrameError::ZeroK { norm: to_f64(k_norm) });
    }
    let pinv_norm = operator_norm(&pseudo_inverse(k, tol));
    let gate_value = s.kframe_gate(a, pinv_norm);
    let admissible = gate_value < T::one();
    let bounds = admissible.then(|| {
        let one = T::one();
        let low = a.sqrt() / pinv_norm * (one - s.alpha) - s.gamma;
        let lower = low * low / ((one + s.beta).powi(2) * k_norm * k_norm);
        let high = b.sqrt() * (one + s.alpha) + s.gamma;
        let upper = high * high / (one - s.beta).powi(2);
        FrameBounds::feasible(lower, upper)
    });
    Ok(Prediction {
        gate_value,
        admissible,
        bounds,
    })
}

/// Outcome of [`verify_perturbed_kframe`].
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport<T> {
    pub condition: ConditionReport<T>,
    /// Optimal K-frame bounds of `F`.
    pub original: FrameBounds<T>,
    pub prediction: Prediction<T>,
    /// Optimal `P K`-frame bounds of `G`.
    pub empirical: FrameBounds<T>,
    /// `‖T_F - T_G‖`.
    pub e_norm: T,
    /// Orthogonal projector onto `Q(R(K))`.
    pub projector: DenseOperator<T>,
    pub projector_rank: usize,
    /// Worst of `empirical.lower - predicted.lower` and
    /// `predicted.upper - empirical.upper`; zero when inadmissible.
    pub margin: T,
    /// Admissible and the empirical bounds leave the predicted sandwich by
    /// more than [`PREDICTION_RTOL`] times the scale.
    pub violation: bool,
}

/// Builds `Q = T_G T_F*`, the projector `P` onto `Q(R(K))` and `K' = P K`,
/// then compares the optimal `K'`-frame bounds of `G` with the prediction.
pub fn verify_perturbed_kframe<T: Real>(
    f: &FrameFamily<T>,
    g: &FrameFamily<T>,
    k: &DenseOperator<T>,
    s: &PerturbationSpec<T>,
    tol: &Tolerance<T>,
    trials: usize,
    seed: u64,
) -> Result<PerturbationReport<T>> {
    check_same_shape(f, g)?;
    let condition = cc_condition(f, g, s, trials, seed, tol)?;
    if !condition.mode.holds() {
        return Err(FrameError::ConditionFailed(format!(
            "perturbation condition fails on a sampled sequence (slack {:e})",
            to_f64(condition.worst_slack)
        )));
    }
    let original = optimal_kframe_bounds(&KFrameProblem::new(f.clone(), k.clone())?, tol)?;
    if !(original.lower > T::zero()) {
        return Err(FrameError::NotCertified(
            "F is not a K-frame (optimal lower bound is 0)".into(),
        ));
    }
    let prediction = kframe_perturb_predict(original.lower, original.upper, k, s, tol)?;

    let q = synthesis(g).matmul(&synthesis(f).adjoint());
    let basis = range_basis(&q.matmul(k), tol).ok_or(FrameError::DegenerateProjector)?;
    let projector = basis.matmul(&basis.adjoint());
    let k_eff = projector.matmul(k);
    let s_g = frame_operator(g);
    let gram = k_eff.matmul(&k_eff.adjoint());
    let empirical = FrameBounds::optimal(
        pencil_lower_bound(&s_g, &gram, tol)?.value,
        hermitian_spectrum(&s_g, tol)?.max(),
    );

    let (margin, violation) = match &prediction.bounds {
        Some(p) => {
            let margin = (empirical.lower - p.lower).min(p.upper - empirical.upper);
            let scale = p.upper.max(empirical.upper);
            (margin, margin < -lit::<T>(PREDICTION_RTOL) * scale)
        }
        None => (T::zero(), false),
    };
    Ok(PerturbationReport {
        condition,
        original,
        prediction,
        empirical,
        e_norm: operator_norm(&(&synthesis(f) - &synthesis(g))),
        projector_rank: basis.cols(),
        projector,
        margin,
        violation,
    })
}

/// `B_F(1 + ‖E‖/√B_F)²‖C^{1/2}‖²`.
pub fn compact_perturb_bessel_bound<T: Real>(
    b_f: T,
    e: &DenseOperator<T>,
    c: &DenseOperator<T>,
    tol: &Tolerance<T>,
) -> Result<T> {
    if !(b_f > T::zero() && b_f.is_finite()) {
        return Err(FrameError::BadBounds {
            lower: 0.0,
            upper: to_f64(b_f),
        });
    }
    // ‖C^{1/2}‖² = λ_max(C)
    let c_top = check_positive(c, tol)?.max();
    let factor = T::one() + operator_norm(e) / b_f.sqrt();
    Ok(b_f * factor * factor * c_top)
}

/// Outcome of [`certify_perturbed_controlled`].
#[derive(Debug, Clone, PartialEq)]
pub struct ControlledPerturbationReport<T> {
    /// Controlled `K'`-frame verdict for `G` on its span.
    pub verdict: Verdict,
    /// Optimal bounds of that certificate.
    pub bounds: FrameBounds<T>,
    /// `‖T_F‖² = λ_max(S_F)`.
    pub b_f: T,
    /// `‖T_F - T_G‖`.
    pub e_norm: T,
    pub bessel_bound: T,
    /// `λ_max` of the Hermitian part of `C S_G`.
    pub empirical_upper: T,
    pub bessel_holds: bool,
    /// Projector onto `span{g_k}`.
    pub projector: DenseOperator<T>,
    pub projector_rank: usize,
    pub spans_space: bool,
    /// `‖C P - P C‖` for the span projector `P`.
    pub commute_residual: T,
    /// `‖(C S_G - S_G C)/2‖_F`.
    pub anti_hermitian_residual: T,
}

/// Compact perturbation of a controlled K-frame.
///
/// Checks `V = T_F - E = T_G` and `S_G = V V*`, tests the Bessel bound, and
/// computes the sharp controlled `K'`-frame bounds of `G` on `span{g_k}` with
/// `K'` the compression of `K` to that span.
pub fn certify_perturbed_controlled<T: Real>(
    p: &ControlledProblem<T>,
    g: &FrameFamily<T>,
    tol: &Tolerance<T>,
) -> Result<ControlledPerturbationReport<T>> {
    let f = p.family();
    check_same_shape(f, g)?;
    let (tf, tg) = (synthesis(f), synthesis(g));
    let e = &tf - &tg;
    let v = &tf - &e;
    let scale = tf.max_abs().max(tg.max_abs()).max(T::min_positive_value());
    let exact = lit::<T>(64.0) * T::epsilon() * scale;
    if v.distance(&tg) > exact * lit(tf.cols() as f64) {
        return Err(FrameError::Inconsistent("T_F - E differs from T_G".into()));
    }
    let s_g = v.matmul(&v.adjoint());
    if s_g.distance(&frame_operator(g)) > exact * scale * lit((tf.cols() * tf.rows()) as f64) {
        return Err(FrameError::Inconsistent("V V* differs from S_G".into()));
    }

    let b_f = hermitian_spectrum(&frame_operator(f), tol)?.max();
    let e_norm = operator_norm(&e);
    let bessel_bound = compact_perturb_bessel_bound(b_f, &e, p.c(), tol)?;
    let cs = p.c().matmul(&s_g);
    let h = cs.hermitian_part();
    let empirical_upper = hermitian_spectrum(&h, tol)?.max();
    let bessel_holds = empirical_upper <= bessel_bound + lit::<T>(PREDICTION_RTOL) * bessel_bound;

    let basis = range_basis(&tg, tol).ok_or(FrameError::SpanCollapse)?;
    let projector = basis.matmul(&basis.adjoint());
    let rank = basis.cols();
    // compressions to span{g_k}
    let h_span = basis.adjoint().matmul(&h).matmul(&basis);
    let w_span = basis.adjoint().matmul(&p.controlled_k_gram()).matmul(&basis);
    let upper = hermitian_spectrum(&h_span, tol)?.max();
    let (verdict, lower) = if w_span.max_abs() <= tol.rank_eps * operator_norm(p.c()) * operator_norm(p.k()).powi(2)
        || operator_norm(&w_span) <= tol.rank_eps
    {
        (Verdict::Degenerate, T::zero())
    } else {
        let lower = pencil_lower_bound(&h_span, &w_span, tol)?.value;
        if lower > T::zero() {
            (Verdict::Certified, lower)
        } else {
            (Verdict::Refuted, lower)
        }
    };
    Ok(ControlledPerturbationReport {
        verdict,
        bounds: FrameBounds::optimal(lower, upper),
        b_f,
        e_norm,
        bessel_bound,
        empirical_upper,
        bessel_holds,
        commute_residual: operator_norm(&(&p.c().matmul(&projector) - &projector.matmul(p.c()))),
        projector,
        projector_rank: rank,
        spans_space: rank == f.dim(),
        anti_hermitian_residual: cs.anti_hermitian_part().frobenius_norm(),
    })
}
