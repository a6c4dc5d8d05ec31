//! Hyperelliptic curves `y² = Π_{j=1}^{2g+1} (x − c_j) = Σ λ_k x^k`.
//!
//! Branch of `y`: each factor `√(x − c_j)` has its cut running straight down
//! from `c_j`. With branch points ordered by strictly increasing real part,
//! the polyline `c₁ → c₂ → … → c_{2g+1}` never meets a cut, so `y` is analytic
//! along it and every cycle integral reduces to segment integrals
//! `I_k = ∫_{c_k}^{c_{k+1}} P(x) dx / 2y`:
//!
//! * `α_j` encircles `c_{2j−1}, c_{2j}`:         `∮_{α_j} = 2 I_{2j−1}`;
//! * `β_j` encircles `c_{2j}, …, c_{2g+1}`:      `∮_{β_j} = ± 2 Σ_{k=j}^{g} I_{2k}`,
//!
//! with one global sign on the `β` cycles fixed by `Im T ≻ 0`.

mod divisor;
mod periods;
mod sigma;
mod theta;

pub use divisor::{abel_map, abel_map_point, lattice_distance, CurvePoint, Divisor};
pub use periods::{PeriodData, QUAD_TOL};
pub use sigma::{
    finite_gap_flow_check, finite_gap_u, genus3_relations, FlowCheck, weierstrass_invariants, FiniteGapForm, RelationCheck, RelationSet, SigmaFunction, WpTensor,
};
pub use theta::{
    tail_bound, theta, theta_derivatives, ThetaChar, ThetaDerivatives, AUTO_TAIL_TARGET, DIVISOR_TOL, TAIL_TARGET,
};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::QuadratureError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error(transparent)]
    QuadratureFailure(#[from] QuadratureError),
    #[error("period matrix violates the Riemann relations: {0}")]
    RiemannRelations(String),
    #[error("point lies too close to the theta divisor (cancellation ratio {ratio:e})")]
    NearDivisor { ratio: f64 },
    #[error("theta radius too small: tail bound {bound:e} exceeds {target:e}")]
    RadiusTooSmall { bound: f64, target: f64 },
    #[error("invalid curve description: {0}")]
    InvalidInput(String),
}

/// Minimum separation (relative to the spread of the branch points) below
/// which a curve counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HECurve {
    genus: usize,
    branch_points: Vec<C64>,
    lambda: Vec<C64>,
}

/// JSON form: `{"genus": g, "branch_points": [[re, im], …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub genus: usize,
    pub branch_points: Vec<[f64; 2]>,
}

impl HECurve {
    pub fn new(mut branch_points: Vec<C64>) -> Result<Self, CurveError> {
        let n = branch_points.len();
        if n < 3 || n % 2 == 0 {
            return Err(CurveError::InvalidInput(format!("need 2g+1 ≥ 3 branch points, got {n}")));
        }
        if branch_points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CurveError::InvalidInput("non-finite branch point".into()));
        }
        branch_points.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let spread = branch_points.iter().map(|z| (z - branch_points[0]).norm()).fold(0.0, f64::max).max(1.0);
        for i in 0..n {
            for j in i + 1..n {
                if (branch_points[i] - branch_points[j]).norm() <= DEGENERACY_TOL * spread {
                    return Err(CurveError::DegenerateCurve(format!(
                        "branch points {} and {} coincide",
                        branch_points[i], branch_points[j]
                    )));
                }
            }
        }
        for w in branch_points.windows(2) {
            if w[1].re - w[0].re <= DEGENERACY_TOL * spread {
                return Err(CurveError::DegenerateCurve(
                    "branch points need distinct real parts for the cycle construction; rotate the curve".into(),
                ));
            }
        }
        let lambda = expand_roots(&branch_points);
        Ok(Self { genus: (n - 1) / 2, branch_points, lambda })
    }

    pub fn from_real(points: &[f64]) -> Result<Self, CurveError> {
        Self::new(points.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_spec(spec: &CurveSpec) -> Result<Self, CurveError> {
        let curve = Self::new(spec.branch_points.iter().map(|p| C64::new(p[0], p[1])).collect())?;
        if curve.genus != spec.genus {
            return Err(CurveError::InvalidInput(format!(
                "genus {} does not match {} branch points",
                spec.genus,
                spec.branch_points.len()
            )));
        }
        Ok(curve)
    }

    pub fn to_spec(&self) -> CurveSpec {
        CurveSpec { genus: self.genus, branch_points: self.branch_points.iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// Branch points sorted by real part.
    pub fn branch_points(&self) -> &[C64] {
        &self.branch_points
    }

    /// `λ₀ … λ_{2g+1}` with `λ_{2g+1} = 1`.
    pub fn lambda(&self) -> &[C64] {
        &self.lambda
    }

    pub fn lambda_at(&self, k: usize) -> C64 {
        self.lambda.get(k).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// `h(x) = Σ λ_k x^k`
    pub fn h(&self, x: C64) -> C64 {
        self.lambda.iter().rev().fold(C64::new(0.0, 0.0), |a, &c| a * x + c)
    }

    fn factor(x: C64, c: C64) -> C64 {
        let rot = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        rot * (C64::new(0.0, -1.0) * (x - c)).sqrt()
    }

    /// The branch of `y` described in the module docs.
    pub fn y(&self, x: C64) -> C64 {
        self.branch_points.iter().map(|&c| Self::factor(x, c)).product()
    }

    /// `y` with the factor for branch point `skip` left out.
    fn y_without(&self, x: C64, skip: usize) -> C64 {
        self.branch_points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != skip)
            .map(|(_, &c)| Self::factor(x, c))
            .product()
    }

    /// Numerators of `ω_i = x^{i−1} dx/2y` and
    /// `η_j = (1/2y) Σ_{k=j}^{2g−j} (k+1−j) λ_{k+1+j} x^k dx`, as coefficient lists.
    pub fn differentials(&self) -> Differentials {
        let g = self.genus;
        let omega = (1..=g)
            .map(|i| {
                let mut c = vec![C64::new(0.0, 0.0); i];
                c[i - 1] = C64::new(1.0, 0.0);
                c
            })
            .collect();
        let eta = (1..=g)
            .map(|j| {
                let mut c = vec![C64::new(0.0, 0.0); 2 * g - j + 1];
                for k in j..=2 * g - j {
                    c[k] = self.lambda_at(k + 1 + j) * (k + 1 - j) as f64;
                }
                c
            })
            .collect();
        Differentials { omega, eta }
    }

    /// Real parts of `λ` when the curve is real (all imaginary parts tiny).
    pub fn is_real(&self) -> bool {
        self.lambda.iter().all(|z| z.im.abs() <= 1e-12 * (1.0 + z.re.abs()))
    }
}

/// Coefficients of `Π (x − c_j)`, lowest degree first.
fn expand_roots(roots: &[C64]) -> Vec<C64> {
    let mut c = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
        for (k, &a) in c.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * r;
        }
        c = next;
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct Differentials {
    /// `omega[i]` holds the numerator of `ω_{i+1}`.
    pub omega: Vec<Vec<C64>>,
    /// `eta[j]` holds the numerator of `η_{j+1}`.
    pub eta: Vec<Vec<C64>>,
}

pub(crate) fn poly_eval(c: &[C64], x: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |a, &k| a * x + k)
}
