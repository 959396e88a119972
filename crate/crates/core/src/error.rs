use alloc::vec::Vec;
use core::fmt;

use crate::C64;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch { expected: usize, found: usize },
    EmptyModel,
    AsymmetricKernel { row: usize, col: usize, defect: f64 },
    NegativeEntry { what: &'static str, index: usize, value: f64 },
    NonFinite { what: &'static str },
    NonPositiveImaginaryPart,
    /// The fixed-point/Newton iteration did not reach the requested residual.
    /// Carries the last iterate so callers can inspect or restart from it.
    MaxIterExceeded { z: C64, residual: f64, iterations: usize, last: Vec<C64> },
    SingularJacobian,
    SingularMatrix,
    InsufficientEtaLevels { levels: usize, eta_floor: f64 },
    InvalidEtaLadder,
    TooCloseToGrid { distance: f64 },
    ZeroDistance,
    ZeroComponent { index: usize },
    GapTooSmall { gap: f64 },
    AmbiguousSign { index: usize, re_m: f64 },
    DivisionDegenerate { denominator: f64 },
    EmptyWindow,
    NonPositiveDensity { tau: f64 },
    TooLargeForExact { n: usize },
    DegenerateBlock,
    AlphaOutOfRange { alpha: f64 },
    BranchUndefined { z: C64 },
    ComplexKernel { imag: f64 },
    NegativeKernel { value: f64 },
    EmptySamples,
    InvalidParameter(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::EmptyModel => write!(f, "model must have at least one point"),
            Error::AsymmetricKernel { row, col, defect } => {
                write!(f, "kernel is not symmetric at ({row}, {col}): |s_xy - s_yx| = {defect:e}")
            }
            Error::NegativeEntry { what, index, value } => {
                write!(f, "negative or zero entry in {what} at index {index}: {value}")
            }
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::NonPositiveImaginaryPart => {
                write!(f, "spectral parameter must lie in the open upper half-plane")
            }
            Error::MaxIterExceeded { z, residual, iterations, .. } => write!(
                f,
                "no convergence at z = {} + {}i after {iterations} iterations (residual {residual:e})",
                z.re, z.im
            ),
            Error::SingularJacobian => write!(f, "Jacobian of the fixed-point map is singular"),
            Error::SingularMatrix => write!(f, "matrix is numerically singular"),
            Error::InsufficientEtaLevels { levels, eta_floor } => write!(
                f,
                "density extraction needs >= 2 eta levels with the smallest <= 1e-4 (got {levels}, floor {eta_floor:e})"
            ),
            Error::InvalidEtaLadder => {
                write!(f, "eta ladder must be strictly decreasing and positive")
            }
            Error::TooCloseToGrid { distance } => {
                write!(f, "evaluation point is {distance:e} from the real grid, closer than one grid step")
            }
            Error::ZeroDistance => write!(f, "the two probe points coincide"),
            Error::ZeroComponent { index } => write!(f, "solution vanishes at component {index}"),
            Error::GapTooSmall { gap } => write!(f, "spectral gap {gap:e} is too small for a deflated solve"),
            Error::AmbiguousSign { index, re_m } => {
                write!(f, "sign of m is ambiguous at component {index} (Re m = {re_m:e})")
            }
            Error::DivisionDegenerate { denominator } => {
                write!(f, "amplitude denominator {denominator:e} is degenerate")
            }
            Error::EmptyWindow => write!(f, "fit window contains no grid points"),
            Error::NonPositiveDensity { tau } => write!(f, "density is not positive at tau = {tau}"),
            Error::TooLargeForExact { n } => {
                write!(f, "exact connectivity enumeration is limited to n <= 20 (n = {n})")
            }
            Error::DegenerateBlock => write!(f, "block profile has an empty block"),
            Error::AlphaOutOfRange { alpha } => write!(f, "critical delta needs alpha > 2 (alpha = {alpha})"),
            Error::BranchUndefined { z } => {
                write!(f, "closed form undefined on the real segment [-2, 2] (z = {})", z.re)
            }
            Error::ComplexKernel { imag } => {
                write!(f, "Fourier kernel has imaginary part {imag:e}; covariance lacks reality symmetry")
            }
            Error::NegativeKernel { value } => write!(f, "Fourier kernel takes negative value {value:e}"),
            Error::EmptySamples => write!(f, "at least one spectrum sample is required"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for Error {}
