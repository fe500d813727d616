//! The frame algorithm `x ← x + λ(g - S x)` for solving `S x = g`, and its
//! controlled variant `x ← x + λ_C C(g - S x)`.
//!
//! Relaxation parameters come from optimal bounds: `λ = 2/(A + B)` and
//! `λ_C = 2/(m_C + M_C)` with `m_C, M_C` the extreme eigenvalues of the
//! Hermitian part of `C S`. The iterate starts at zero.
//!
//! The residual map of the controlled iteration is `I - λ_C S C`, which is
//! self-adjoint for `⟨C ·, ·⟩`. Residuals therefore decrease monotonically in
//! `‖r‖_C = ⟨C r, r⟩^{1/2}`, and the rate estimate is measured in that norm.
//! For `C = I` it is the Euclidean norm.

use num_complex::Complex;

use crate::controlled::{certify_controlled_frame, check_positive};
use crate::error::{FrameError, Result};
use crate::frame::{frame_operator, is_frame, optimal_frame_bounds, FrameFamily};
use crate::operator::{inner, norm, DenseOperator, Tolerance, Vector};
use crate::scalar::{cre, lit, to_f64, Real};

/// Consecutive residual increases after which an iteration is abandoned.
pub const DIVERGENCE_STEPS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace<T> {
    /// Number of updates performed.
    pub iterates: usize,
    /// `‖g - S x_k‖` for `k = 0, …, iterates`.
    pub residual_history: Vec<T>,
    /// `‖g - S x_k‖_C`; equal to `residual_history` when `C = I`.
    pub weighted_history: Vec<T>,
    pub converged: bool,
    pub diverged: bool,
    /// Geometric mean of the weighted residual ratios.
    pub rate_estimate: T,
    pub relaxation: T,
    /// `(B - A)/(B + A)` or `(M_C - m_C)/(M_C + m_C)`.
    pub contraction_bound: T,
}

fn check_rhs<T: Real>(f: &FrameFamily<T>, g: &[Complex<T>]) -> Result<()> {
    if g.len() != f.dim() {
        return Err(FrameError::DimensionMismatch(format!(
            "right-hand side has length {} but the frame lives in dimension {}",
            g.len(),
            f.dim()
        )));
    }
    Ok(())
}

fn weighted_norm<T: Real>(c: Option<&DenseOperator<T>>, r: &[Complex<T>]) -> T {
    match c {
        None => norm(r),
        Some(c) => inner(&c.apply(r), r).re.max(T::zero()).sqrt(),
    }
}

fn richardson<T: Real>(
    s: &DenseOperator<T>,
    c: Option<&DenseOperator<T>>,
    g: &[Complex<T>],
    relaxation: T,
    contraction_bound: T,
    tol_res: T,
    max_iter: usize,
) -> (Vector<T>, SolveTrace<T>) {
    let target = tol_res * norm(g);
    let mut x = vec![cre(T::zero()); g.len()];
    let mut r = g.to_vec();
    let mut residual_history = vec![norm(&r)];
    let mut weighted_history = vec![weighted_norm(c, &r)];
    let mut converged = residual_history[0] <= target;
    let mut diverged = false;
    let mut growth = 0;
    let mut iterates = 0;
    while !converged && iterates < max_iter {
        let step = match c {
            None => r.clone(),
            Some(c) => c.apply(&r),
        };
        for (xi, si) in x.iter_mut().zip(&step) {
            *xi = *xi + si.scale(relaxation);
        }
        let sx = s.apply(&x);
        r = g.iter().zip(&sx).map(|(a, b)| a - b).collect();
        iterates += 1;
        let res = norm(&r);
        let w = weighted_norm(c, &r);
        growth = if w > weighted_history[weighted_history.len() - 1] {
            growth + 1
        } else {
            0
        };
        residual_history.push(res);
        weighted_history.push(w);
        converged = res <= target;
        if growth >= DIVERGENCE_STEPS {
            diverged = true;
            break;
        }
    }
    let rate_estimate = if iterates == 0 || weighted_history[0] == T::zero() {
        T::zero()
    } else {
        (weighted_history[iterates] / weighted_history[0]).powf(T::one() / lit(iterates as f64))
    };
    let trace = SolveTrace {
        iterates,
        residual_history,
        weighted_history,
        converged,
        diverged,
        rate_estimate,
        relaxation,
        contraction_bound,
    };
    (x, trace)
}

/// Solves `S x = g` by the frame algorithm with `λ = 2/(A + B)`.
pub fn frame_algorithm<T: Real>(
    f: &FrameFamily<T>,
    g: &[Complex<T>],
    tol_res: T,
    max_iter: usize,
    tol: &Tolerance<T>,
) -> Result<(Vector<T>, SolveTrace<T>)> {
    check_rhs(f, g)?;
    let b = optimal_frame_bounds(f, tol);
    if !is_frame(&b, tol) {
        return Err(FrameError::NotAFrame {
            lower: to_f64(b.lower),
            upper: to_f64(b.upper),
        });
    }
    let lambda = lit::<T>(2.0) / (b.lower + b.upper);
    let rho = (b.upper - b.lower) / (b.upper + b.lower);
    Ok(richardson(&frame_operator(f), None, g, lambda, rho, tol_res, max_iter))
}

/// Solves `S x = g` by iterating with `C S`, `λ_C = 2/(m_C + M_C)`.
pub fn preconditioned_frame_algorithm<T: Real>(
    f: &FrameFamily<T>,
    c: &DenseOperator<T>,
    g: &[Complex<T>],
    tol_res: T,
    max_iter: usize,
    tol: &Tolerance<T>,
) -> Result<(Vector<T>, SolveTrace<T>)> {
    check_rhs(f, g)?;
    let b = optimal_frame_bounds(f, tol);
    if !is_frame(&b, tol) {
        return Err(FrameError::NotAFrame {
            lower: to_f64(b.lower),
            upper: to_f64(b.upper),
        });
    }
    let cert = certify_controlled_frame(f, c, tol)?;
    let (m, big_m) = (cert.bounds.lower, cert.bounds.upper);
    if !cert.verdict.is_certified() {
        return Err(FrameError::NotPositive {
            min_eigenvalue: to_f64(m),
        });
    }
    let lambda = lit::<T>(2.0) / (m + big_m);
    let rho = (big_m - m) / (big_m + m);
    Ok(richardson(
        &frame_operator(f),
        Some(c),
        g,
        lambda,
        rho,
        tol_res,
        max_iter,
    ))
}

/// `(B/A, M_C/m_C)`.
pub fn condition_report<T: Real>(f: &FrameFamily<T>, c: &DenseOperator<T>, tol: &Tolerance<T>) -> Result<(T, T)> {
    let b = optimal_frame_bounds(f, tol);
    if !is_frame(&b, tol) {
        return Err(FrameError::NotAFrame {
            lower: to_f64(b.lower),
            upper: to_f64(b.upper),
        });
    }
    check_positive(c, tol)?;
    let cert = certify_controlled_frame(f, c, tol)?;
    if !cert.verdict.is_certified() {
        return Err(FrameError::NotPositive {
            min_eigenvalue: to_f64(cert.bounds.lower),
        });
    }
    Ok((b.upper / b.lower, cert.bounds.upper / cert.bounds.lower))
}

/// `diag(S)⁻¹`, the Jacobi control operator.
pub fn jacobi_control<T: Real>(f: &FrameFamily<T>) -> Result<DenseOperator<T>> {
    let d = frame_operator(f).diagonal();
    if d.iter().any(|x| !(x.re > T::zero())) {
        return Err(FrameError::NotPositive {
            min_eigenvalue: d.iter().map(|x| to_f64(x.re)).fold(f64::INFINITY, f64::min),
        });
    }
    Ok(DenseOperator::diag(
        &d.iter().map(|x| T::one() / x.re).collect::<Vec<_>>(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{graded_frame, random_frame, GenSpec};
    use crate::operator::{hermitian_inverse, real_vector, sub_vec};

    fn tol() -> Tolerance<f64> {
        Tolerance::default()
    }

    fn mercedes_parseval() -> FrameFamily<f64> {
        let h = 3f64.sqrt() / 2.0;
        FrameFamily::from_real(2, &[vec![1.0, 0.0], vec![-0.5, h], vec![-0.5, -h]])
            .unwrap()
            .scaled((2.0f64 / 3.0).sqrt())
    }

    fn e1e1e2() -> FrameFamily<f64> {
        FrameFamily::from_real(2, &[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn parseval_converges_in_one_step() {
        let g = vec![Complex::new(1.0, 2.0), Complex::new(-0.5, 0.1)];
        let (x, t) = frame_algorithm(&mercedes_parseval(), &g, 1e-12, 50, &tol()).unwrap();
        assert!(t.converged);
        assert_eq!(t.iterates, 1);
        assert!(norm(&sub_vec(&x, &g)) < 1e-14);
    }

    #[test]
    fn e1e1e2_converges_to_inverse() {
        let g = real_vector(&[2.0, 1.0]);
        let (x, t) = frame_algorithm(&e1e1e2(), &g, 1e-12, 200, &tol()).unwrap();
        assert!(t.converged);
        // oracle: diag(1/2, 1)·g
        assert!(norm(&sub_vec(&x, &real_vector(&[1.0, 1.0]))) < 1e-11);
        assert!(t.rate_estimate <= 1.0 / 3.0 + 1e-8);
        assert!((t.contraction_bound - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_iterations() {
        let g = real_vector(&[2.0, 1.0]);
        let (x, t) = frame_algorithm(&e1e1e2(), &g, 1e-12, 0, &tol()).unwrap();
        assert!(!t.converged);
        assert_eq!(t.iterates, 0);
        assert_eq!(x, real_vector(&[0.0, 0.0]));
        assert_eq!(t.residual_history.len(), 1);
    }

    #[test]
    fn not_a_frame_rejected() {
        let f = FrameFamily::from_real(2, &[vec![1.0, 0.0]]).unwrap();
        let g = real_vector(&[1.0, 0.0]);
        assert!(matches!(
            frame_algorithm(&f, &g, 1e-10, 10, &tol()),
            Err(FrameError::NotAFrame { .. })
        ));
        assert!(matches!(
            preconditioned_frame_algorithm(&f, &DenseOperator::identity(2), &g, 1e-10, 10, &tol()),
            Err(FrameError::NotAFrame { .. })
        ));
    }

    #[test]
    fn inverse_control_is_exact() {
        for seed in 0..5 {
            let f = random_frame(&GenSpec::new(4, 7, seed, 1.0).unwrap()).unwrap();
            let c = hermitian_inverse(&frame_operator(&f), &tol()).unwrap().hermitian_part();
            let g = vec![Complex::new(1.0, 0.5); 4];
            let (x, t) = preconditioned_frame_algorithm(&f, &c, &g, 1e-12, 10, &tol()).unwrap();
            assert_eq!(t.iterates, 1);
            assert!(t.converged);
            let back = frame_operator(&f).apply(&x);
            assert!(norm(&sub_vec(&back, &g)) <= 1e-12 * norm(&g));
        }
    }

    #[test]
    fn identity_control_reproduces_plain_trace() {
        let f = random_frame(&GenSpec::new(4, 9, 3, 1.0).unwrap()).unwrap();
        let g = vec![Complex::new(0.3, -1.0); 4];
        let (x1, t1) = frame_algorithm(&f, &g, 1e-10, 500, &tol()).unwrap();
        let (x2, t2) = preconditioned_frame_algorithm(&f, &DenseOperator::identity(4), &g, 1e-10, 500, &tol()).unwrap();
        assert_eq!(x1, x2);
        assert_eq!(t1, t2);
    }

    #[test]
    fn condition_report_examples() {
        let (a, b) = condition_report(&mercedes_parseval(), &DenseOperator::identity(2), &tol()).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);
        let (a, b) = condition_report(&e1e1e2(), &DenseOperator::identity(2), &tol()).unwrap();
        assert!((a - 2.0).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);
        let (a, b) = condition_report(&e1e1e2(), &DenseOperator::diag(&[0.5, 1.0]), &tol()).unwrap();
        assert!((a - 2.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_beats_plain_on_graded_frames() {
        let mut wins = 0;
        for seed in 0..20 {
            let f = graded_frame(&GenSpec::new(6, 10, seed, 1.0).unwrap(), 100.0, 0.05).unwrap();
            let c = jacobi_control(&f).unwrap();
            let (kp, kc) = condition_report(&f, &c, &tol()).unwrap();
            assert!(kp >= 100.0 && kc <= kp);
            let g: Vector<f64> = (0..6).map(|i| Complex::new(1.0 + i as f64, 0.5)).collect();
            let (xp, tp) = frame_algorithm(&f, &g, 1e-10, 20_000, &tol()).unwrap();
            let (xc, tc) = preconditioned_frame_algorithm(&f, &c, &g, 1e-10, 20_000, &tol()).unwrap();
            assert!(tp.converged && tc.converged);
            assert!(tp.rate_estimate <= tp.contraction_bound + 1e-6);
            assert!(tc.rate_estimate <= tc.contraction_bound + 1e-6);
            assert!(norm(&sub_vec(&xp, &xc)) <= 1e-6 * norm(&g));
            for w in tc.weighted_history.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12));
            }
            if tc.iterates < tp.iterates {
                wins += 1;
            }
        }
        assert_eq!(wins, 20);
    }
}
