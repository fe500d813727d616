//! Numerical toolkit for finite frames, K-frames and controlled K-frames in `C^d`.
//!
//! Every operator inequality is decided spectrally on dense complex matrices
//! with explicit relative tolerances (see [`Tolerance`]). The math is generic
//! over the real scalar (`f32` or `f64`); the unsuffixed aliases below fix
//! `f64`.
//!
//! ```
//! use kframe::{certify_kframe, Frame, KFrame, Operator, Tol};
//!
//! let f = Frame::standard_basis(2);
//! let p = KFrame::new(f, Operator::identity(2)).unwrap();
//! let r = certify_kframe(&p, 1.0, 1.0, &Tol::default()).unwrap();
//! assert!(r.verdict.is_certified());
//! ```

pub mod certificate;
pub mod controlled;
pub mod error;
pub mod frame;
pub mod generators;
pub mod kframe;
pub mod operator;
pub mod perturbation;
pub mod scalar;
pub mod solver;

pub use certificate::{CertReport, FrameBounds, Verdict};
pub use controlled::{
    certify_controlled_frame, certify_controlled_kframe, controlled_form, controlled_inequality, controlled_operator,
    optimal_controlled_kframe_bounds, transfer_controlled_to_k, transfer_k_to_controlled, ControlledProblem,
};
pub use error::{FrameError, Result};
pub use frame::{
    analysis, frame_operator, frame_sum, is_frame, optimal_frame_bounds, reconstruct, synthesis, FrameFamily,
    Reconstruction,
};
pub use kframe::{
    atomic_coefficients, certify_kframe, optimal_kframe_bounds, optimal_kframe_lower, range_restricted_check,
    AtomicCoefficients, KFrameProblem,
};
pub use operator::{DenseOperator, Tolerance, Vector};
pub use perturbation::{
    cc_condition, certify_perturbed_controlled, compact_perturb_bessel_bound, kframe_perturb_predict,
    verify_perturbed_kframe, ConditionMode, ConditionReport, ControlledPerturbationReport, PerturbationReport,
    PerturbationSpec, Prediction,
};
pub use scalar::Real;
pub use solver::{condition_report, frame_algorithm, jacobi_control, preconditioned_frame_algorithm, SolveTrace};

pub type Operator = DenseOperator<f64>;
pub type Frame = FrameFamily<f64>;
pub type KFrame = KFrameProblem<f64>;
pub type Controlled = ControlledProblem<f64>;
pub type Bounds = FrameBounds<f64>;
pub type Report = CertReport<f64>;
pub type Tol = Tolerance<f64>;

pub type Operator32 = DenseOperator<f32>;
pub type Frame32 = FrameFamily<f32>;
pub type KFrame32 = KFrameProblem<f32>;
pub type Controlled32 = ControlledProblem<f32>;
pub type Bounds32 = FrameBounds<f32>;
pub type Tol32 = Tolerance<f32>;
