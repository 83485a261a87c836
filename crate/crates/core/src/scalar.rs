//! Floating-point abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar used for coordinates, weights, angles and LP values.
///
/// Tolerances are attached to the type because a threshold such as `1e-9`
/// radians is meaningful for `f64` but sits below the resolution of `f32`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Additive tolerance for every "angle <= alpha" decision.
    const ANGLE_TOL: f64;
    /// Primal feasibility tolerance of the simplex.
    const FEAS_TOL: f64;
    /// Reduced-cost optimality tolerance of the simplex.
    const OPT_TOL: f64;
    /// Smallest magnitude accepted as a pivot element.
    const PIVOT_TOL: f64;
    /// Minimum violation for a cut to be reported by a separator.
    const VIOLATION_TOL: f64;
    /// Distance from the nearest integer below which a value counts as integral.
    const INTEGRALITY_TOL: f64;

    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable")
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize is representable")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }

    #[inline]
    fn angle_tol() -> Self {
        Self::of(Self::ANGLE_TOL)
    }

    #[inline]
    fn feas_tol() -> Self {
        Self::of(Self::FEAS_TOL)
    }

    #[inline]
    fn opt_tol() -> Self {
        Self::of(Self::OPT_TOL)
    }

    #[inline]
    fn pivot_tol() -> Self {
        Self::of(Self::PIVOT_TOL)
    }

    #[inline]
    fn violation_tol() -> Self {
        Self::of(Self::VIOLATION_TOL)
    }

    #[inline]
    fn integrality_tol() -> Self {
        Self::of(Self::INTEGRALITY_TOL)
    }

    /// `|v - round(v)| <= INTEGRALITY_TOL`.
    #[inline]
    fn is_integral(self) -> bool {
        (self - self.round()).abs() <= Self::integrality_tol()
    }
}

impl Scalar for f64 {
    const ANGLE_TOL: f64 = 1e-9;
    const FEAS_TOL: f64 = 1e-7;
    const OPT_TOL: f64 = 1e-7;
    const PIVOT_TOL: f64 = 1e-9;
    const VIOLATION_TOL: f64 = 1e-6;
    const INTEGRALITY_TOL: f64 = 1e-6;
}

impl Scalar for f32 {
    const ANGLE_TOL: f64 = 1e-5;
    const FEAS_TOL: f64 = 1e-4;
    const OPT_TOL: f64 = 1e-4;
    const PIVOT_TOL: f64 = 1e-5;
    const VIOLATION_TOL: f64 = 1e-3;
    const INTEGRALITY_TOL: f64 = 1e-3;
}
