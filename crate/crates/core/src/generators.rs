//! Seeded, reproducible test instances.
//!
//! All randomness comes from ChaCha8 (`rand_chacha`), a portable,
//! platform-independent stream cipher PRNG. Each object drawn for an instance
//! uses its own stream of the seed, so adding a new object never shifts the
//! values of existing ones. Gaussian samples use `rand_distr::StandardNormal`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{FrameError, Result};
use crate::frame::{is_frame, optimal_frame_bounds, synthesis, FrameFamily};
use crate::operator::{hermitian_inverse, operator_norm, DenseOperator, Tolerance};
use crate::scalar::{lit, Real};

/// Stream identifiers, one per kind of drawn object.
mod stream {
    pub const FRAME: u64 = 1;
    pub const BASIS: u64 = 2;
    pub const K_DIAG: u64 = 3;
    pub const C_DIAG: u64 = 4;
    pub const PERTURB: u64 = 5;
    pub const MIXING: u64 = 6;
    pub const SPECTRUM: u64 = 7;
    pub const COUPLING: u64 = 8;
    pub const PW_MIX: u64 = 9;
    pub const PW_ABSORB: u64 = 10;
    /// Offset added per redraw attempt.
    pub const REDRAW: u64 = 1 << 32;
}

const MAX_REDRAWS: usize = 3;

/// Size, seed and scale of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec<T> {
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    pub scale: T,
}

impl<T: Real> GenSpec<T> {
    pub fn new(dim: usize, count: usize, seed: u64, scale: T) -> Result<Self> {
        if !(1..=64).contains(&dim) {
            return Err(FrameError::InvalidSpec(format!("dim {dim} outside [1, 64]")));
        }
        if !(1..=256).contains(&count) {
            return Err(FrameError::InvalidSpec(format!("count {count} outside [1, 256]")));
        }
        if !(scale > T::zero() && scale.is_finite()) {
            return Err(FrameError::InvalidSpec(format!(
                "scale {scale} must be positive and finite"
            )));
        }
        Ok(Self {
            dim,
            count,
            seed,
            scale,
        })
    }
}

/// ChaCha8 generator for `(seed, stream)`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian with `E|z|² = 1`.
pub fn complex_gaussian<T: Real>(rng: &mut impl Rng) -> Complex<T> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(
        lit(re * std::f64::consts::FRAC_1_SQRT_2),
        lit(im * std::f64::consts::FRAC_1_SQRT_2),
    )
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn gaussian_matrix<T: Real>(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseOperator<T> {
    DenseOperator::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-ish random unitary: Gram–Schmidt (applied twice) on a Gaussian matrix.
pub fn random_unitary<T: Real>(d: usize, rng: &mut impl Rng) -> DenseOperator<T> {
    let g = gaussian_matrix::<T>(d, d, rng);
    let mut q: Vec<Vec<Complex<T>>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        for _ in 0..2 {
            for u in &q {
                let proj = crate::operator::inner(&v, u);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi = *vi - ui * proj;
                }
            }
        }
        q.push(crate::operator::normalized(&v));
    }
    DenseOperator::from_fn(d, d, |r, c| q[c][r])
}

/// Complex Gaussian family scaled by `spec.scale`.
///
/// For `count >= dim` the draw is checked to be a frame and redrawn (on a
/// shifted stream) at most three times.
pub fn random_frame<T: Real>(spec: &GenSpec<T>) -> Result<FrameFamily<T>> {
    let tol = Tolerance::default();
    for attempt in 0..=MAX_REDRAWS {
        let mut rng = seeded_rng(spec.seed, stream::FRAME + stream::REDRAW * attempt as u64);
        let t = gaussian_matrix::<T>(spec.dim, spec.count, &mut rng).scale(spec.scale);
        let f = FrameFamily::from_synthesis(&t);
        if spec.count < spec.dim || is_frame(&optimal_frame_bounds(&f, &tol), &tol) {
            return Ok(f);
        }
    }
    Err(FrameError::DegenerateDraw {
        attempts: MAX_REDRAWS + 1,
    })
}

/// Jointly diagonal `K = U diag(k) U*` and `C = U diag(c) U*`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutingPair<T> {
    pub k: DenseOperator<T>,
    pub c: DenseOperator<T>,
    /// The shared eigenbasis `U`.
    pub basis: DenseOperator<T>,
    /// Eigenvalues of `K` in the shared basis; entries past the rank are zero.
    pub k_diag: Vec<Complex<T>>,
    /// Eigenvalues of `C` in the shared basis.
    pub c_diag: Vec<T>,
}

fn conjugate_diag<T: Real>(u: &DenseOperator<T>, diag: &[Complex<T>]) -> DenseOperator<T> {
    u.matmul(&DenseOperator::diag_complex(diag)).matmul(&u.adjoint())
}

/// Commuting `(K, C)` with `rank K = rank_k` and `C` positive definite,
/// eigenvalues of `C` uniform in `[0.5·scale, 2·scale]`.
pub fn commuting_pair<T: Real>(spec: &GenSpec<T>, rank_k: usize) -> Result<CommutingPair<T>> {
    let d = spec.dim;
    if rank_k > d {
        return Err(FrameError::BadRank { rank: rank_k, dim: d });
    }
    let basis = random_unitary::<T>(d, &mut seeded_rng(spec.seed, stream::BASIS));
    let mut krng = seeded_rng(spec.seed, stream::K_DIAG);
    let k_diag: Vec<Complex<T>> = (0..d)
        .map(|i| {
            let r: f64 = krng.random_range(0.5..2.0);
            let phase: f64 = krng.random_range(0.0..std::f64::consts::TAU);
            if i < rank_k {
                Complex::from_polar(lit(r), lit(phase))
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect();
    let mut crng = seeded_rng(spec.seed, stream::C_DIAG);
    let c_diag: Vec<T> = (0..d)
        .map(|_| lit::<T>(crng.random_range(0.5..2.0)) * spec.scale)
        .collect();
    let c_complex: Vec<Complex<T>> = c_diag.iter().map(|&x| Complex::new(x, T::zero())).collect();
    let k = conjugate_diag(&basis, &k_diag);
    // exact Hermitian symmetry for C
    let c = conjugate_diag(&basis, &c_complex).hermitian_part();
    Ok(CommutingPair {
        k,
        c,
        basis,
        k_diag,
        c_diag,
    })
}

/// A family `G` with its exact perturbation size.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed<T> {
    pub family: FrameFamily<T>,
    /// `‖T_F - T_G‖`, recomputed from the two synthesis operators.
    pub e_norm: T,
}

/// `T_G = T_F - magnitude · D / ‖D‖` for a seeded Gaussian direction `D`.
pub fn perturb_family<T: Real>(f: &FrameFamily<T>, magnitude: T, seed: u64) -> Perturbed<T> {
    if magnitude == T::zero() {
        return Perturbed {
            family: f.clone(),
            e_norm: T::zero(),
        };
    }
    let tf = synthesis(f);
    let d = gaussian_matrix::<T>(f.dim(), f.len(), &mut seeded_rng(seed, stream::PERTURB));
    let d = d.scale(T::one() / operator_norm(&d));
    let tg = &tf - &d.scale(magnitude);
    Perturbed {
        family: FrameFamily::from_synthesis(&tg),
        e_norm: operator_norm(&(&tf - &tg)),
    }
}

/// A perturbed family `G` satisfying
/// `‖T_F c - T_G c‖ ≤ α‖T_F c‖ + β‖T_G c‖ + γ‖c‖` for every `c` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PwPerturbed<T> {
    pub family: FrameFamily<T>,
    /// Constants for which the inequality holds, `(α, β, γ)`.
    pub constants: (T, T, T),
}

/// `T_G = (I + M)⁻¹((I - N) T_F - E)` with seeded `‖N‖ = α`, Hermitian
/// `‖M‖ = β` and `‖E‖ = γ`, so that `T_F - T_G = N T_F + E + M T_G`.
///
/// Requires `α, γ ≥ 0` and `0 ≤ β < 1`.
pub fn pw_perturb_family<T: Real>(
    f: &FrameFamily<T>,
    alpha: T,
    beta: T,
    gamma: T,
    seed: u64,
) -> Result<PwPerturbed<T>> {
    let ok = |x: T| x >= T::zero() && x.is_finite();
    if !(ok(alpha) && ok(gamma) && ok(beta) && beta < T::one()) {
        return Err(FrameError::InvalidSpec(format!(
            "perturbation constants ({alpha}, {beta}, {gamma}) need alpha, gamma >= 0 and 0 <= beta < 1"
        )));
    }
    let (d, n) = (f.dim(), f.len());
    let unit = |m: DenseOperator<T>, size: T| {
        let nm = operator_norm(&m);
        if size == T::zero() || nm == T::zero() {
            DenseOperator::zeros(m.rows(), m.cols())
        } else {
            m.scale(size / nm)
        }
    };
    let tf = synthesis(f);
    let mix = unit(gaussian_matrix(d, d, &mut seeded_rng(seed, stream::PW_MIX)), alpha);
    let absorb = unit(
        gaussian_matrix(d, d, &mut seeded_rng(seed, stream::PW_ABSORB)).hermitian_part(),
        beta,
    );
    let shift = unit(gaussian_matrix(d, n, &mut seeded_rng(seed, stream::PERTURB)), gamma);
    let x = &(&tf - &mix.matmul(&tf)) - &shift;
    let tol = Tolerance::default();
    let inv = hermitian_inverse(&(&DenseOperator::identity(d) + &absorb), &tol)?;
    Ok(PwPerturbed {
        family: FrameFamily::from_synthesis(&inv.matmul(&x)),
        constants: (operator_norm(&mix), operator_norm(&absorb), operator_norm(&shift)),
    })
}

/// A family together with `K` and `C` that all share one eigenbasis, so that
/// `C` commutes with `K`, `K*` and the frame operator.
#[derive(Debug, Clone, PartialEq)]
pub struct JointInstance<T> {
    pub family: FrameFamily<T>,
    pub pair: CommutingPair<T>,
    /// Frame-operator eigenvalues in the shared basis.
    pub s_diag: Vec<T>,
}

/// Frame with `S = U diag(s) U*` in the basis of [`commuting_pair`].
///
/// When `full_frame` is false the eigenvalues of `S` vanish wherever those of
/// `K` do, giving a K-frame that is not a frame (for `rank_k < dim`).
/// Requires `count >= dim`.
pub fn joint_instance<T: Real>(spec: &GenSpec<T>, rank_k: usize, full_frame: bool) -> Result<JointInstance<T>> {
    let (d, n) = (spec.dim, spec.count);
    if n < d {
        return Err(FrameError::InvalidSpec(format!(
            "joint instance needs count >= dim, got {n} < {d}"
        )));
    }
    let pair = commuting_pair(spec, rank_k)?;
    let mut srng = seeded_rng(spec.seed, stream::SPECTRUM);
    let s_diag: Vec<T> = (0..d)
        .map(|i| {
            let v = lit::<T>(srng.random_range(0.5..2.0)) * spec.scale;
            if full_frame || i < rank_k {
                v
            } else {
                T::zero()
            }
        })
        .collect();
    // W: first d rows of an n×n unitary, so W W* = I_d
    let w_full = random_unitary::<T>(n, &mut seeded_rng(spec.seed, stream::MIXING));
    let w = DenseOperator::from_fn(d, n, |r, c| w_full.get(r, c));
    let root: Vec<T> = s_diag.iter().map(|s| s.sqrt()).collect();
    let t = pair.basis.matmul(&DenseOperator::diag(&root)).matmul(&w);
    Ok(JointInstance {
        family: FrameFamily::from_synthesis(&t),
        pair,
        s_diag,
    })
}

/// Ill-conditioned, diagonally dominant frame: `T = diag(σ) W + coupling · N`
/// with `σ_i²` log-spaced over `[scale, 4·kappa·scale]`, `W` having orthonormal
/// rows and `N` a unit-norm Gaussian matrix scaled by `σ_min`.
pub fn graded_frame<T: Real>(spec: &GenSpec<T>, kappa: T, coupling: T) -> Result<FrameFamily<T>> {
    let (d, n) = (spec.dim, spec.count);
    if n < d {
        return Err(FrameError::InvalidSpec(format!(
            "graded frame needs count >= dim, got {n} < {d}"
        )));
    }
    if !(kappa >= T::one()) {
        return Err(FrameError::InvalidSpec(format!("kappa {kappa} must be at least 1")));
    }
    let top = lit::<T>(4.0) * kappa;
    let sigma: Vec<T> = (0..d)
        .map(|i| {
            let frac = if d == 1 {
                T::zero()
            } else {
                lit::<T>(i as f64) / lit::<T>((d - 1) as f64)
            };
            (top.powf(frac) * spec.scale).sqrt()
        })
        .collect();
    let w_full = random_unitary::<T>(n, &mut seeded_rng(spec.seed, stream::MIXING));
    let w = DenseOperator::from_fn(d, n, |r, c| w_full.get(r, c));
    let noise = gaussian_matrix::<T>(d, n, &mut seeded_rng(spec.seed, stream::COUPLING));
    let noise = noise.scale(coupling * sigma[0] / operator_norm(&noise));
    let t = &DenseOperator::diag(&sigma).matmul(&w) + &noise;
    Ok(FrameFamily::from_synthesis(&t))
}
