//! Hill's equation `ψ'' = −(u(s) + x̄) ψ` with `u(s + P) = u(s)`:
//! monodromy over one period, Floquet discriminant `Δ = tr M`, stability
//! bands and band edges (roots of `Δ² − 4`).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::hecurve::{finite_gap_u, FiniteGapForm, SigmaFunction};
use crate::spectral::Spectral;
use crate::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HillError {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("integration failed at x̄ = {xbar}: {reason}")]
    IntegrationFailure { xbar: String, reason: String },
    #[error("root refinement did not converge in [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64 },
}

/// Smallest admissible sample count.
pub const MIN_SAMPLES: usize = 32;
/// Relative tolerance of the adaptive integrator.
pub const ODE_RTOL: f64 = 1e-11;

#[derive(Clone)]
enum Source<T: Real> {
    /// Fourier coefficients of the samples: mean, positive modes `1..N/2`
    /// (doubled), Nyquist (cosine only).
    Samples { coeffs: Vec<Complex<T>>, samples: Vec<T> },
    Callback(Arc<dyn Fn(T) -> T + Send + Sync>),
}

/// Real periodic potential given by samples on `s_j = jP/N` (evaluated by
/// trigonometric interpolation) or by a closure.
#[derive(Clone)]
pub struct PeriodicPotential<T: Real> {
    period: T,
    source: Source<T>,
}

impl<T: Real> fmt::Debug for PeriodicPotential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            Source::Samples { samples, .. } => format!("samples({})", samples.len()),
            Source::Callback(_) => "callback".to_string(),
        };
        f.debug_struct("PeriodicPotential").field("period", &self.period).field("source", &kind).finish()
    }
}

impl<T: Real> PeriodicPotential<T> {
    pub fn from_samples(samples: Vec<T>, period: T) -> Result<Self, HillError> {
        let n = samples.len();
        if n < MIN_SAMPLES {
            return Err(HillError::InvalidPotential(format!("need at least {MIN_SAMPLES} samples, got {n}")));
        }
        if !(period > T::zero()) || !period.is_finite() {
            return Err(HillError::InvalidPotential("period must be positive and finite".into()));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(HillError::InvalidPotential("non-finite sample".into()));
        }
        let sp = Spectral::new(n, period);
        let raw = sp.forward_real(&samples);
        let inv_n = T::one() / T::from_usize(n).unwrap();
        let two = T::from_f64(2.0).unwrap();
        let half = n / 2;
        let coeffs = (0..=half)
            .map(|k| {
                let c = raw[k] * inv_n;
                if k == 0 || (n % 2 == 0 && k == half) {
                    c
                } else {
                    c * two
                }
            })
            .collect();
        Ok(Self { period, source: Source::Samples { coeffs, samples } })
    }

    pub fn from_fn(f: impl Fn(T) -> T + Send + Sync + 'static, period: T) -> Result<Self, HillError> {
        if !(period > T::zero()) || !period.is_finite() {
            return Err(HillError::InvalidPotential("period must be positive and finite".into()));
        }
        Ok(Self { period, source: Source::Callback(Arc::new(f)) })
    }

    pub fn zero(period: T) -> Self {
        Self::from_samples(vec![T::zero(); MIN_SAMPLES], period).expect("valid zero potential")
    }

    pub fn period(&self) -> T {
        self.period
    }

    pub fn eval(&self, s: T) -> T {
        match &self.source {
            Source::Callback(f) => f(s),
            Source::Samples { coeffs, samples } => {
                let n = samples.len();
                let base = T::TAU() / self.period;
                let step = Complex::from_polar(T::one(), base * s);
                let mut phase = Complex::new(T::one(), T::zero());
                let mut acc = coeffs[0].re;
                for (k, c) in coeffs.iter().enumerate().skip(1) {
                    phase = phase * step;
                    if n % 2 == 0 && k == n / 2 {
                        acc = acc + c.re * phase.re;
                    } else {
                        acc = acc + (*c * phase).re;
                    }
                }
                acc
            }
        }
    }

    /// Values on `n` uniform points of one period.
    pub fn sample(&self, n: usize) -> Vec<T> {
        let h = self.period / T::from_usize(n).unwrap();
        (0..n).map(|j| self.eval(h * T::from_usize(j).unwrap())).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyResult<T: Real> {
    /// `[[y₀, y₁], [y₀', y₁']]` at `s = P`.
    pub m: [[Complex<T>; 2]; 2],
    pub rho: [Complex<T>; 2],
    pub discriminant: Complex<T>,
    pub det: Complex<T>,
    /// `max |ρ_i| ≤ 1 + 10⁻⁸`
    pub stable: bool,
    pub steps: usize,
}

fn c<T: Real>(x: f64) -> T {
    T::from_f64(x).unwrap()
}

type State<T> = [Complex<T>; 4];

/// Dormand–Prince 5(4) over one period for both canonical solutions.
pub fn monodromy<T: Real>(u: &PeriodicPotential<T>, xbar: Complex<T>) -> Result<MonodromyResult<T>, HillError> {
    let a: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    let nodes = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    let b_low = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];
    let err_w: Vec<T> = (0..7).map(|i| c::<T>((if i < 6 { a[5][i] } else { 0.0 }) - b_low[i])).collect();
    let a_t: Vec<Vec<T>> = a.iter().map(|r| r.iter().map(|&x| c::<T>(x)).collect()).collect();
    let nodes_t: Vec<T> = nodes.iter().map(|&x| c::<T>(x)).collect();

    let rhs = |s: T, y: &State<T>| -> State<T> {
        let q = Complex::new(u.eval(s), T::zero()) + xbar;
        [y[1], -q * y[0], y[3], -q * y[2]]
    };
    let fail = |reason: &str| HillError::IntegrationFailure { xbar: format!("{xbar}"), reason: reason.to_string() };

    let period = u.period();
    let rtol = c::<T>(ODE_RTOL);
    let atol = c::<T>(1e-14);
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let mut y: State<T> = [one, zero, zero, one];
    let mut s = T::zero();
    let scale = T::one() + xbar.norm().sqrt();
    let mut h = period / (c::<T>(50.0) * scale);
    let mut k1 = rhs(s, &y);
    let mut steps = 0usize;
    while s < period {
        if steps > 2_000_000 {
            return Err(fail("step budget exhausted"));
        }
        if h < period * c::<T>(1e-14) {
            return Err(fail("step size underflow"));
        }
        let last = s + h >= period;
        if last {
            h = period - s;
        }
        let mut k: Vec<State<T>> = vec![k1];
        for stage in 0..6 {
            let mut yt = y;
            for (j, kj) in k.iter().enumerate() {
                let w = a_t[stage][j] * h;
                if w != T::zero() {
                    for i in 0..4 {
                        yt[i] = yt[i] + kj[i] * w;
                    }
                }
            }
            let st = if stage == 5 { s + h } else { s + nodes_t[stage + 1] * h };
            k.push(rhs(st, &yt));
            if stage == 5 {
                // FSAL: the last stage is evaluated at the 5th-order solution
                let mut err = T::zero();
                for i in 0..4 {
                    let mut e = zero;
                    for (j, kj) in k.iter().enumerate() {
                        e = e + kj[i] * (err_w[j] * h);
                    }
                    let sc = atol + rtol * y[i].norm().max(yt[i].norm());
                    err = err.max(e.norm() / sc);
                }
                if !err.is_finite() {
                    return Err(fail("non-finite error estimate"));
                }
                if err <= T::one() {
                    s = if last { period } else { s + h };
                    y = yt;
                    k1 = k[6];
                    steps += 1;
                }
                let factor = if err == T::zero() {
                    c::<T>(5.0)
                } else {
                    (c::<T>(0.9) * err.powf(c::<T>(-0.2))).min(c::<T>(5.0)).max(c::<T>(0.2))
                };
                h = h * factor;
            }
        }
    }

    let m = [[y[0], y[2]], [y[1], y[3]]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let tr = m[0][0] + m[1][1];
    let two = c::<T>(2.0);
    let root = (tr * tr - det * c::<T>(4.0)).sqrt();
    let rho = [(tr + root) / two, (tr - root) / two];
    let rho_max = rho[0].norm().max(rho[1].norm());
    Ok(MonodromyResult { m, rho, discriminant: tr, det, stable: rho_max <= T::one() + c::<T>(1e-8), steps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint<T: Real> {
    pub xbar: T,
    pub discriminant: T,
    /// `Δ² − 4 ≤ 0`
    pub stable: bool,
    pub rho_max: T,
    pub det_defect: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminantScan<T: Real> {
    pub points: Vec<ScanPoint<T>>,
}

impl<T: Real> DiscriminantScan<T> {
    /// Points where `Δ² ≤ 4` and `max|ρ| ≤ 1 + 10⁻⁸` disagree.
    pub fn classification_mismatches(&self) -> usize {
        self.points.iter().filter(|p| p.stable != (p.rho_max <= T::one() + c::<T>(1e-8))).count()
    }

    pub fn max_det_defect(&self) -> T {
        self.points.iter().fold(T::zero(), |m, p| m.max(p.det_defect))
    }

    /// Contiguous stable intervals `[first, last]` of grid points.
    pub fn stable_intervals(&self) -> Vec<(T, T)> {
        let mut out = Vec::new();
        let mut start: Option<T> = None;
        let mut prev = T::zero();
        for p in &self.points {
            match (p.stable, start) {
                (true, None) => start = Some(p.xbar),
                (false, Some(a)) => {
                    out.push((a, prev));
                    start = None;
                }
                _ => {}
            }
            prev = p.xbar;
        }
        if let Some(a) = start {
            out.push((a, prev));
        }
        out
    }
}

fn real_discriminant<T: Real>(u: &PeriodicPotential<T>, x: T) -> Result<T, HillError> {
    Ok(monodromy(u, Complex::new(x, T::zero()))?.discriminant.re)
}

/// `Δ(x̄)` on a monotone real grid; evaluated in parallel, order preserved.
pub fn discriminant_scan<T: Real>(u: &PeriodicPotential<T>, grid: &[T]) -> Result<DiscriminantScan<T>, HillError> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(HillError::InvalidPotential("scan grid must be strictly increasing".into()));
    }
    let points = grid
        .par_iter()
        .map(|&x| {
            let r = monodromy(u, Complex::new(x, T::zero()))?;
            let d = r.discriminant.re;
            Ok(ScanPoint {
                xbar: x,
                discriminant: d,
                stable: d * d - c::<T>(4.0) <= T::zero(),
                rho_max: r.rho[0].norm().max(r.rho[1].norm()),
                det_defect: (r.det - Complex::new(T::one(), T::zero())).norm(),
            })
        })
        .collect::<Result<Vec<_>, HillError>>()?;
    Ok(DiscriminantScan { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Simple,
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEdge<T: Real> {
    pub xbar: T,
    /// `+1` where `Δ = 2`, `−1` where `Δ = −2`.
    pub level: i8,
    pub kind: EdgeKind,
    pub slope: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandOptions {
    pub scan_points: usize,
    /// Absolute tolerance on edge positions.
    pub xtol: f64,
    /// `|Δ ∓ 2|` below which a touching extremum counts as a double edge.
    pub touch_tol: f64,
    /// `|Δ'|` (scaled by the local slope of `2cos`) below which a root is double.
    pub slope_tol: f64,
}

impl Default for BandOptions {
    fn default() -> Self {
        Self { scan_points: 600, xtol: 1e-12, touch_tol: 1e-7, slope_tol: 1e-3 }
    }
}

/// Brent's method on a bracketing interval.
fn brent<T: Real>(
    mut f: impl FnMut(T) -> Result<T, HillError>,
    lo: T,
    hi: T,
    xtol: T,
) -> Result<T, HillError> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(HillError::NoConvergence { lo: lo.to_f64().unwrap(), hi: hi.to_f64().unwrap() });
    }
    let (mut cc, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let two = c::<T>(2.0);
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            cc = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = cc;
            cc = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + xtol / two;
        let m = (cc - b) / two;
        if m.abs() <= tol || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == cc {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (c::<T>(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol { b + d } else { b + tol * m.signum() };
        fb = f(b)?;
    }
    Err(HillError::NoConvergence { lo: lo.to_f64().unwrap(), hi: hi.to_f64().unwrap() })
}

/// Golden-section search for an extremum of `sign · Δ` on `[lo, hi]`.
fn extremum<T: Real>(u: &PeriodicPotential<T>, lo: T, hi: T, sign: T, xtol: T) -> Result<(T, T), HillError> {
    let g = c::<T>(0.5 * (5f64.sqrt() - 1.0));
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = sign * real_discriminant(u, x1)?;
    let mut f2 = sign * real_discriminant(u, x2)?;
    while b - a > xtol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = sign * real_discriminant(u, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = sign * real_discriminant(u, x2)?;
        }
    }
    let x = (a + b) / c::<T>(2.0);
    Ok((x, real_discriminant(u, x)?))
}

fn slope_at<T: Real>(u: &PeriodicPotential<T>, x: T) -> Result<T, HillError> {
    let h = c::<T>(1e-5) * (T::one() + x.abs());
    Ok((real_discriminant(u, x + h)? - real_discriminant(u, x - h)?) / (c::<T>(2.0) * h))
}

pub fn band_edges<T: Real>(
    u: &PeriodicPotential<T>,
    interval: (T, T),
    max_edges: usize,
) -> Result<Vec<BandEdge<T>>, HillError> {
    band_edges_with(u, interval, max_edges, &BandOptions::default())
}

/// Roots of `Δ² − 4` in `interval`, sorted, at most `max_edges`.
///
/// Sign changes of `Δ ∓ 2` on the scan are refined by Brent; interior
/// extrema of `Δ` that reach `±2` within `touch_tol` become double edges,
/// and pairs of roots enclosing only a negligible excursion are merged.
pub fn band_edges_with<T: Real>(
    u: &PeriodicPotential<T>,
    interval: (T, T),
    max_edges: usize,
    opts: &BandOptions,
) -> Result<Vec<BandEdge<T>>, HillError> {
    let (lo, hi) = interval;
    let n = opts.scan_points.max(8);
    let grid: Vec<T> =
        (0..=n).map(|k| lo + (hi - lo) * T::from_usize(k).unwrap() / T::from_usize(n).unwrap()).collect();
    let scan = discriminant_scan(u, &grid)?;
    let xtol = c::<T>(opts.xtol);
    let touch = c::<T>(opts.touch_tol);
    let two = c::<T>(2.0);
    let mut edges: Vec<BandEdge<T>> = Vec::new();

    for level in [1i8, -1] {
        let target = two * T::from_i8(level).unwrap();
        let f = |x: T| -> Result<T, HillError> { Ok(real_discriminant(u, x)? - target) };
        let mut roots: Vec<T> = Vec::new();
        for w in scan.points.windows(2) {
            let (fa, fb) = (w[0].discriminant - target, w[1].discriminant - target);
            if fa == T::zero() {
                roots.push(w[0].xbar);
            } else if fa.signum() != fb.signum() && fb != T::zero() {
                roots.push(brent(f, w[0].xbar, w[1].xbar, xtol)?);
            }
        }
        if let Some(last) = scan.points.last() {
            if last.discriminant == target {
                roots.push(last.xbar);
            }
        }
        // merge root pairs that enclose a negligible excursion past ±2
        let mut merged: Vec<(T, bool)> = Vec::new();
        let mut i = 0;
        while i < roots.len() {
            if i + 1 < roots.len() {
                let (a, b) = (roots[i], roots[i + 1]);
                let (_, peak) = extremum(u, a, b, T::from_i8(level).unwrap(), xtol)?;
                if (peak - target).abs() < touch {
                    merged.push(((a + b) / two, true));
                    i += 2;
                    continue;
                }
            }
            merged.push((roots[i], false));
            i += 1;
        }
        // touching extrema that never cross
        for k in 1..scan.points.len() - 1 {
            let (p, q, r) = (&scan.points[k - 1], &scan.points[k], &scan.points[k + 1]);
            let sgn = T::from_i8(level).unwrap();
            let is_peak = sgn * q.discriminant >= sgn * p.discriminant && sgn * q.discriminant >= sgn * r.discriminant;
            if !is_peak || (q.discriminant - target).abs() > c::<T>(1e-2) {
                continue;
            }
            let (x, peak) = extremum(u, p.xbar, r.xbar, sgn, xtol)?;
            if (peak - target).abs() < touch && !merged.iter().any(|(m, _)| (*m - x).abs() < (r.xbar - p.xbar)) {
                merged.push((x, true));
            }
        }
        for (x, double) in merged {
            let slope = slope_at(u, x)?;
            // reference slope of 2cos(√x̄ P) scaled to the local band width
            let reference = T::one() + x.abs().sqrt() * u.period();
            let kind = if double || slope.abs() < c::<T>(opts.slope_tol) * reference {
                EdgeKind::Double
            } else {
                EdgeKind::Simple
            };
            edges.push(BandEdge { xbar: x, level, kind, slope });
        }
    }
    edges.sort_by(|a, b| a.xbar.partial_cmp(&b.xbar).unwrap());
    edges.truncate(max_edges);
    Ok(edges)
}

/// Genus-one finite-gap potential `u(s) = −2(℘₁₁(Ω″/2 + s) + c)` on a real
/// curve, sampled on `samples` points of the real period `|Ω′|`.
///
/// The line `Ω″/2 + ℝ` sits halfway between rows of poles, where `℘₁₁` is
/// real and analytic, so trigonometric interpolation converges geometrically.
pub fn finite_gap_potential(
    sigma: &SigmaFunction,
    form: FiniteGapForm,
    samples: usize,
) -> Result<PeriodicPotential<f64>, HillError> {
    let curve = sigma.curve();
    if curve.genus() != 1 || !curve.is_real() {
        return Err(HillError::InvalidPotential("finite-gap potentials need a real genus-one curve".into()));
    }
    let p = sigma.periods();
    let (w1, w2) = (p.omega1[(0, 0)], p.omega2[(0, 0)]);
    if w1.im.abs() > 1e-10 * w1.norm() || w2.re.abs() > 1e-10 * w2.norm() {
        return Err(HillError::InvalidPotential(format!("lattice is not rectangular: Ω′ = {w1}, Ω″ = {w2}")));
    }
    let period = w1.re.abs();
    let grid: Vec<f64> = (0..samples).map(|j| period * j as f64 / samples as f64).collect();
    let u = finite_gap_u(sigma, &grid, &[w2 * 0.5], form)
        .map_err(|e| HillError::InvalidPotential(format!("sampling ℘ failed: {e}")))?;
    let scale = u.iter().fold(1.0f64, |m, z| m.max(z.re.abs()));
    if let Some(z) = u.iter().find(|z| z.im.abs() > 1e-8 * scale) {
        return Err(HillError::InvalidPotential(format!("potential is not real: {z}")));
    }
    PeriodicPotential::from_samples(u.iter().map(|z| z.re).collect(), period)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_monodromy() {
        let p = 2.0 * PI;
        let u = PeriodicPotential::<f64>::zero(p);
        for x in [0.3f64, 2.7] {
            let r = monodromy(&u, Complex::new(x, 0.0)).unwrap();
            let k = x.sqrt();
            assert!((r.m[0][0].re - (k * p).cos()).abs() < 1e-9);
            assert!((r.m[0][1].re - (k * p).sin() / k).abs() < 1e-9);
            assert!((r.m[1][0].re + k * (k * p).sin()).abs() < 1e-9);
            assert!((r.det.re - 1.0).abs() < 1e-10);
            assert!(r.stable);
        }
        let r = monodromy(&u, Complex::new(0.0, 0.0)).unwrap();
        assert!((r.m[0][1].re - p).abs() < 1e-9);
        assert!((r.discriminant.re - 2.0).abs() < 1e-10);
    }

    #[test]
    fn sampled_potential_interpolates() {
        let p = 3.0;
        let f = |s: f64| (2.0 * PI * s / p).cos() + 0.3 * (4.0 * PI * s / p).sin();
        let samples: Vec<f64> = (0..64).map(|j| f(j as f64 * p / 64.0)).collect();
        let u = PeriodicPotential::from_samples(samples, p).unwrap();
        for s in [0.11, 1.3, 2.9] {
            assert!((u.eval(s) - f(s)).abs() < 1e-13);
        }
        assert!(PeriodicPotential::from_samples(vec![0.0; 8], 1.0).is_err());
        assert!(PeriodicPotential::from_samples(vec![f64::NAN; 40], 1.0).is_err());
    }

    #[test]
    fn mathieu_determinant_and_consistency() {
        let u = PeriodicPotential::from_fn(|s: f64| 1.5 * (2.0 * s).cos(), PI).unwrap();
        let grid: Vec<f64> = (0..60).map(|k| -2.0 + 0.25 * k as f64).collect();
        let scan = discriminant_scan(&u, &grid).unwrap();
        assert!(scan.max_det_defect() < 1e-8);
        assert_eq!(scan.classification_mismatches(), 0);
        let r = monodromy(&u, Complex::new(1.7, 0.4)).unwrap();
        for rho in r.rho {
            let q = rho * rho - r.discriminant * rho + r.det;
            assert!(q.norm() < 1e-10 * (1.0 + rho.norm_sqr()));
        }
    }

    #[test]
    fn free_band_edges() {
        let u = PeriodicPotential::<f64>::zero(2.0 * PI);
        let edges = band_edges(&u, (-0.5, 4.2), 50).unwrap();
        let expect: Vec<f64> = (0..=4).map(|n| (n * n) as f64 / 4.0).collect();
        assert_eq!(edges.len(), expect.len(), "{edges:?}");
        for (e, x) in edges.iter().zip(&expect) {
            assert!((e.xbar - x).abs() < 1e-6, "{e:?}");
        }
        assert_eq!(edges[0].kind, EdgeKind::Simple);
        assert!(edges[1..].iter().all(|e| e.kind == EdgeKind::Double));
    }

    #[test]
    fn single_precision_runs() {
        let u = PeriodicPotential::<f32>::zero(1.0);
        let r = monodromy(&u, Complex::new(4.0f32, 0.0)).unwrap();
        assert!((r.discriminant.re - 2.0 * (2.0f32).cos()).abs() < 1e-3);
    }

    #[test]
    fn lame_potential_is_smooth_and_periodic() {
        let curve = crate::HECurve::from_real(&[-1.0, 0.4, 1.5]).unwrap();
        let s = SigmaFunction::new(&curve).unwrap();
        let coarse = finite_gap_potential(&s, FiniteGapForm::NegativeShift, 64).unwrap();
        let fine = finite_gap_potential(&s, FiniteGapForm::NegativeShift, 256).unwrap();
        for x in [0.123, 0.77, 1.91] {
            assert!((coarse.eval(x) - fine.eval(x)).abs() < 1e-9, "{} {}", coarse.eval(x), fine.eval(x));
        }
        let genus2 = crate::HECurve::from_real(&[-2.0, -1.1, 0.2, 0.9, 2.3]).unwrap();
        let s2 = SigmaFunction::new(&genus2).unwrap();
        assert!(finite_gap_potential(&s2, FiniteGapForm::NegativeShift, 64).is_err());
    }
}
