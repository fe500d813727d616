//! Verdicts, bound pairs and certificate reports shared by every module.

use std::fmt;

use crate::operator::Vector;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Certified,
    Refuted,
    /// The inequality holds vacuously (e.g. `K = 0`).
    Degenerate,
}

impl Verdict {
    pub fn is_certified(self) -> bool {
        self == Verdict::Certified
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Certified => "Certified",
            Verdict::Refuted => "Refuted",
            Verdict::Degenerate => "Degenerate",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lower/upper constants of a frame-type inequality.
///
/// The `*_optimal` flags mark values that are spectrally sharp rather than
/// merely feasible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds<T> {
    pub lower: T,
    pub upper: T,
    pub lower_optimal: bool,
    pub upper_optimal: bool,
}

impl<T: Real> FrameBounds<T> {
    pub fn optimal(lower: T, upper: T) -> Self {
        Self {
            lower,
            upper,
            lower_optimal: true,
            upper_optimal: true,
        }
    }

    pub fn feasible(lower: T, upper: T) -> Self {
        Self {
            lower,
            upper,
            lower_optimal: false,
            upper_optimal: false,
        }
    }

    pub fn is_tight(&self) -> bool {
        self.lower == self.upper
    }
}

/// Outcome of certifying one operator inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct CertReport<T> {
    pub verdict: Verdict,
    pub bounds: FrameBounds<T>,
    /// Signed slack of the binding inequality; negative means violated.
    pub margin: T,
    /// Unit vector attaining the extreme Rayleigh quotient of the binding side.
    pub witness: Vector<T>,
    /// `‖X - X*‖_F / 2` of the quadratic-form operator when it is not Hermitian
    /// by construction (controlled forms), zero otherwise.
    pub anti_hermitian_residual: T,
}
