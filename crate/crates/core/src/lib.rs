//! Symbolic-numeric toolkit for the KdV hierarchy and its geometric
//! realizations: closed elastic loops evolving isometrically, hyperelliptic
//! σ/℘ functions and the Hill spectra of finite-gap potentials.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub mod elliptic;
pub mod field;
pub mod hecurve;
pub mod hillspec;
pub mod jetalg;
pub mod linalg;
pub mod loopflow;
pub mod psido;
pub mod quadrature;
pub mod series;
pub mod spectral;

pub use field::{DiffRing, Field, Rational};
pub use hecurve::{HECurve, PeriodData, SigmaFunction, ThetaChar};
pub use hillspec::{MonodromyResult, PeriodicPotential};
pub use jetalg::JetPoly;
pub use loopflow::{FlowParams, LoopState};
pub use psido::PsiDO;
pub use series::Series;

/// Floating-point scalar for the numeric modules (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + rustfft::FftNum + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + rustfft::FftNum + Debug + Display + Send + Sync + 'static
{
}

/// Differential polynomials with exact rational coefficients.
pub type JetPolyQ = JetPoly<Rational>;
/// Symbolic operators over exact differential polynomials.
pub type PsiDOQ = PsiDO<JetPolyQ>;
/// Truncated `t₁`-series with exact rational coefficients.
pub type SeriesQ = Series<Rational>;
pub type LoopState64 = LoopState<f64>;
pub type LoopState32 = LoopState<f32>;
pub type FlowParams64 = FlowParams<f64>;
