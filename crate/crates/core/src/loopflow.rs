//! Closed arc-length parameterized plane loops and their isometric MKdV flow.
//!
//! A loop is stored by its tangent angle `φ` on a uniform arc-length grid;
//! `γ' = e^{iφ}` so `|γ'| = 1` by construction and `k = φ_s`. The flow
//!
//! ```text
//! k_t = k_sss + (3/2) k² k_s,    φ_t = k_ss + ½k³,    γ_t = e^{iφ}(½k² + i k_s)
//! ```
//!
//! moves the curve without stretching it and maps to KdV through
//! `u = (k/2)² + i (k/2)_s`, which then obeys `u_t = u_sss + 6 u u_s`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elliptic::{ellip_e, ellip_k, jacobi_sn_cn_dn};
use crate::spectral::Spectral;
use crate::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoopError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("total turning {0} is not an integer multiple of 2π")]
    NonIntegerWinding(f64),
    #[error("invalid flow parameters: {0}")]
    InvalidParams(String),
    #[error("time step {dt} exceeds the explicit stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("non-finite values after step {step}")]
    Instability { step: usize },
    #[error("closure solve failed: {0}")]
    ClosureFailure(String),
}

fn c<T: Real>(x: f64) -> T {
    T::from_f64(x).unwrap()
}

fn cz<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[derive(Debug, Clone)]
pub struct LoopState<T: Real> {
    phi: Vec<T>,
    length: T,
    basepoint: Complex<T>,
    winding: i64,
}

impl<T: Real> LoopState<T> {
    pub fn from_phi(phi: Vec<T>, length: T, basepoint: Complex<T>, winding: i64) -> Result<Self, LoopError> {
        let n = phi.len();
        if n < 16 || n % 2 != 0 {
            return Err(LoopError::InvalidGrid(format!("need an even number of nodes ≥ 16, got {n}")));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(LoopError::InvalidGrid("length must be positive".into()));
        }
        if phi.iter().any(|x| !x.is_finite()) {
            return Err(LoopError::InvalidGrid("non-finite tangent angle".into()));
        }
        Ok(Self { phi, length, basepoint, winding })
    }

    /// Builds `φ = φ₀ + ∫k` from curvature samples; `∮k ds` must be a multiple of 2π.
    pub fn from_curvature(k: &[T], length: T, basepoint: Complex<T>, phi0: T) -> Result<Self, LoopError> {
        let n = k.len();
        if n < 16 || n % 2 != 0 {
            return Err(LoopError::InvalidGrid(format!("need an even number of nodes ≥ 16, got {n}")));
        }
        let total = k.iter().fold(T::zero(), |a, &b| a + b) * length / T::from_usize(n).unwrap();
        let turns = total / T::TAU();
        let winding = turns.round();
        if (turns - winding).abs() > c(1e-8) {
            return Err(LoopError::NonIntegerWinding(total.to_f64().unwrap()));
        }
        let sp = Spectral::new(n, length);
        let kz: Vec<Complex<T>> = k.iter().map(|&x| cz(x, T::zero())).collect();
        let (_, prim) = sp.integrate(&kz);
        let kappa0 = T::TAU() * winding / length;
        let h = length / T::from_usize(n).unwrap();
        let phi = prim
            .iter()
            .enumerate()
            .map(|(j, z)| phi0 + kappa0 * h * T::from_usize(j).unwrap() + z.re)
            .collect();
        Self::from_phi(phi, length, basepoint, winding.to_i64().unwrap())
    }

    /// Circle of radius `r`, counterclockwise, starting at `r` on the real axis.
    pub fn circle(n: usize, radius: T) -> Result<Self, LoopError> {
        let length = T::TAU() * radius;
        let h = length / T::from_usize(n).unwrap();
        let phi = (0..n).map(|j| T::FRAC_PI_2() + h * T::from_usize(j).unwrap() / radius).collect();
        Self::from_phi(phi, length, cz(radius, T::zero()), 1)
    }

    pub fn n(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn basepoint(&self) -> Complex<T> {
        self.basepoint
    }

    pub fn winding(&self) -> i64 {
        self.winding
    }

    pub fn step(&self) -> T {
        self.length / T::from_usize(self.n()).unwrap()
    }

    pub fn nodes(&self) -> Vec<T> {
        let h = self.step();
        (0..self.n()).map(|j| h * T::from_usize(j).unwrap()).collect()
    }

    pub fn spectral(&self) -> Spectral<T> {
        Spectral::new(self.n(), self.length)
    }

    fn kappa0(&self) -> T {
        T::TAU() * T::from_i64(self.winding).unwrap() / self.length
    }

    /// `φ − 2π·winding·s/L`, a periodic function.
    pub fn periodic_part(&self) -> Vec<T> {
        let k0 = self.kappa0();
        self.nodes().iter().zip(&self.phi).map(|(&s, &p)| p - k0 * s).collect()
    }

    /// `∂_s^order k` (order 0 is the curvature itself).
    pub fn curvature_derivative(&self, order: u32) -> Vec<T> {
        let d = self.spectral().derivative_real(&self.periodic_part(), order + 1);
        if order == 0 {
            let k0 = self.kappa0();
            d.into_iter().map(|x| x + k0).collect()
        } else {
            d
        }
    }

    pub fn curvature(&self) -> Vec<T> {
        self.curvature_derivative(0)
    }

    /// `{γ, s} = i k' + ½k²`
    pub fn schwarz(&self) -> Vec<Complex<T>> {
        let k = self.curvature();
        let k1 = self.curvature_derivative(1);
        k.iter().zip(&k1).map(|(&k, &k1)| cz(c::<T>(0.5) * k * k, k1)).collect()
    }

    /// `(1/2π) ∮ ½k² ds`
    pub fn energy(&self) -> T {
        let sum = self.curvature().iter().fold(T::zero(), |a, &k| a + k * k);
        c::<T>(0.5) * sum * self.step() / T::TAU()
    }

    /// `(1/2π) ∮ {γ,s} ds` by direct quadrature of the Schwarz derivative.
    pub fn energy_from_schwarz(&self) -> Complex<T> {
        self.spectral().quadrature(&self.schwarz()) / T::TAU()
    }

    /// `e^{iφ}`
    pub fn tangent(&self) -> Vec<Complex<T>> {
        self.phi.iter().map(|&p| Complex::from_polar(T::one(), p)).collect()
    }

    /// `∮ e^{iφ} ds`
    pub fn closure_vector(&self) -> Complex<T> {
        self.spectral().quadrature(&self.tangent())
    }

    pub fn closure_defect(&self) -> T {
        self.closure_vector().norm()
    }

    /// Positions `γ(s_j)`, integrating the tangent spectrally.
    pub fn gamma(&self) -> Vec<Complex<T>> {
        let (mean, prim) = self.spectral().integrate(&self.tangent());
        self.nodes()
            .iter()
            .zip(prim)
            .map(|(&s, f)| self.basepoint + mean * s + f)
            .collect()
    }

    /// `u = (k/2)² + i (k/2)_s`
    pub fn miura_u(&self) -> Vec<Complex<T>> {
        let half = c::<T>(0.5);
        let k = self.curvature();
        let k1 = self.curvature_derivative(1);
        k.iter()
            .zip(&k1)
            .map(|(&k, &k1)| cz(half * k * half * k, half * k1))
            .collect()
    }

    /// `ψ₂ = i/√γ' = i e^{−iφ/2}`, `ψ₁ = γ ψ₂`; `det(ψ, ψ') = 1` and `γ = ψ₁/ψ₂`.
    pub fn lift_psi(&self) -> PsiLift<T> {
        let gamma = self.gamma();
        let i = cz(T::zero(), T::one());
        let psi2: Vec<Complex<T>> =
            self.phi.iter().map(|&p| i * Complex::from_polar(T::one(), -p / (T::one() + T::one()))).collect();
        let psi1 = gamma.iter().zip(&psi2).map(|(g, p)| g * p).collect();
        PsiLift { psi1, psi2, antiperiodic: self.winding % 2 != 0 }
    }

    pub fn diagnostics(&self) -> Diagnostics<T> {
        Diagnostics {
            energy: self.energy(),
            closure_defect: self.closure_defect(),
            length: self.length,
            winding: self.winding,
        }
    }
}

/// The spinor lift of a loop. With odd winding the square root of `γ'` flips
/// sign around the loop, so both components are antiperiodic; the samples
/// cover one traversal and `antiperiodic` records the branch ambiguity.
#[derive(Debug, Clone)]
pub struct PsiLift<T: Real> {
    pub psi1: Vec<Complex<T>>,
    pub psi2: Vec<Complex<T>>,
    pub antiperiodic: bool,
}

impl<T: Real> PsiLift<T> {
    /// `∂_s^order` of both components, honoring antiperiodicity.
    pub fn derivatives(&self, sp: &Spectral<T>, order: u32) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        if self.antiperiodic {
            (sp.derivative_antiperiodic(&self.psi1, order), sp.derivative_antiperiodic(&self.psi2, order))
        } else {
            (sp.derivative(&self.psi1, order), sp.derivative(&self.psi2, order))
        }
    }

    /// `ψ₁ψ₂' − ψ₂ψ₁'` by spectral differentiation.
    pub fn wronskian(&self, sp: &Spectral<T>) -> Vec<Complex<T>> {
        let (d1, d2) = self.derivatives(sp, 1);
        (0..self.psi1.len()).map(|j| self.psi1[j] * d2[j] - self.psi2[j] * d1[j]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics<T> {
    pub energy: T,
    pub closure_defect: T,
    pub length: T,
    pub winding: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Classical RK4 on the full right-hand side; needs `dt ≲ 2.8 / κ_max³`.
    Rk4Spectral,
    /// RK4 with the dispersive term solved exactly in Fourier space.
    IntegratingFactor,
    /// Fourth-order exponential time differencing: the dispersive term is
    /// integrated exactly and the nonlinearity by exponential quadrature, so
    /// fast slaved modes are stepped accurately as well as stably.
    Etdrk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowParams<T> {
    pub dt: T,
    pub steps: usize,
    pub scheme: Scheme,
    pub dealias: bool,
    /// Keep every `save_every`-th frame (0: first and last only).
    pub save_every: usize,
}

impl<T: Real> FlowParams<T> {
    pub fn new(dt: T, steps: usize) -> Self {
        Self { dt, steps, scheme: Scheme::IntegratingFactor, dealias: false, save_every: 0 }
    }
}

/// Stability radius of classical RK4 along the imaginary axis.
const RK4_IMAG_LIMIT: f64 = 2.8;

/// Time stepper for the coupled `(φ, γ(0))` system.
#[derive(Debug, Clone)]
pub struct MkdvStepper<T: Real> {
    sp: Spectral<T>,
    params: FlowParams<T>,
    p_hat: Vec<Complex<T>>,
    basepoint: Complex<T>,
    kappa0: T,
    length: T,
    winding: i64,
    linear: Vec<Complex<T>>,
    e_half: Vec<Complex<T>>,
    e_full: Vec<Complex<T>>,
    mask: Vec<bool>,
    /// `(Q, f₁, f₂, f₃)` per mode for the exponential scheme.
    etd: Vec<[Complex<T>; 4]>,
    steps_taken: usize,
}

/// Exponential-integrator weights for `z = Lh`, by averaging over a circle
/// around `z` so that small `|z|` suffers no cancellation.
fn etd_weights<T: Real>(z: Complex<T>, h: T) -> [Complex<T>; 4] {
    const M: usize = 32;
    let mut acc = [cz(T::zero(), T::zero()); 4];
    let one = cz(T::one(), T::zero());
    for m in 0..M {
        let theta = T::PI() * (c::<T>(m as f64) + c(0.5)) / c(M as f64);
        let r = z + Complex::from_polar(T::one(), theta);
        let er = r.exp();
        let r2 = r * r;
        let r3 = r2 * r;
        acc[0] = acc[0] + ((r * c::<T>(0.5)).exp() - one) / r;
        acc[1] = acc[1] + (-one * c::<T>(4.0) - r + er * (one * c::<T>(4.0) - r * c::<T>(3.0) + r2)) / r3;
        acc[2] = acc[2] + (one * c::<T>(2.0) + r + er * (r - one * c::<T>(2.0))) / r3;
        acc[3] = acc[3] + (-one * c::<T>(4.0) - r * c::<T>(3.0) - r2 + er * (one * c::<T>(4.0) - r)) / r3;
    }
    let scale = h / c::<T>(M as f64);
    acc.map(|a| a * scale)
}

impl<T: Real> MkdvStepper<T> {
    pub fn new(state: &LoopState<T>, params: FlowParams<T>) -> Result<Self, LoopError> {
        if !(params.dt > T::zero()) || !params.dt.is_finite() {
            return Err(LoopError::InvalidParams("dt must be positive".into()));
        }
        let sp = state.spectral();
        let n = sp.n();
        let linear: Vec<Complex<T>> = (0..n).map(|j| sp.derivative_symbol(j, 3)).collect();
        if params.scheme == Scheme::Rk4Spectral {
            let max = linear.iter().fold(T::zero(), |a, z| a.max(z.norm()));
            let limit = c::<T>(RK4_IMAG_LIMIT) / max;
            if params.dt > limit {
                return Err(LoopError::StepTooLarge {
                    dt: params.dt.to_f64().unwrap(),
                    limit: limit.to_f64().unwrap(),
                });
            }
        }
        let half = params.dt * c(0.5);
        let e_half = linear.iter().map(|z| (z * half).exp()).collect();
        let e_full = linear.iter().map(|z| (z * params.dt).exp()).collect();
        let etd = if params.scheme == Scheme::Etdrk4 {
            linear.iter().map(|z| etd_weights(z * params.dt, params.dt)).collect()
        } else {
            Vec::new()
        };
        let cutoff = n / 3;
        let mask = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j } else { n - j };
                !params.dealias || m <= cutoff
            })
            .collect();
        Ok(Self {
            p_hat: sp.forward_real(&state.periodic_part()),
            sp,
            params,
            basepoint: state.basepoint(),
            kappa0: state.kappa0(),
            length: state.length(),
            winding: state.winding(),
            linear,
            e_half,
            e_full,
            mask,
            etd,
            steps_taken: 0,
        })
    }

    pub fn time(&self) -> T {
        self.params.dt * T::from_usize(self.steps_taken).unwrap()
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn state(&self) -> LoopState<T> {
        let p = self.sp.inverse(&self.p_hat);
        let h = self.length / T::from_usize(self.sp.n()).unwrap();
        let phi = p
            .iter()
            .enumerate()
            .map(|(j, z)| self.kappa0 * h * T::from_usize(j).unwrap() + z.re)
            .collect();
        LoopState { phi, length: self.length, basepoint: self.basepoint, winding: self.winding }
    }

    /// Fourier coefficients of `½ k³` with `k = κ₀ + p_s`.
    fn nonlinear(&self, p_hat: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut d = p_hat.to_vec();
        self.sp.differentiate_coeffs(&mut d, 1);
        let ps = self.sp.inverse(&d);
        let half = c::<T>(0.5);
        let g: Vec<Complex<T>> = ps
            .iter()
            .map(|z| {
                let k = self.kappa0 + z.re;
                cz(half * k * k * k, T::zero())
            })
            .collect();
        let mut gh = self.sp.forward(&g);
        for (z, &keep) in gh.iter_mut().zip(&self.mask) {
            if !keep {
                *z = cz(T::zero(), T::zero());
            }
        }
        gh
    }

    /// `γ_t(0) = e^{iφ(0)}(½k(0)² + i k_s(0))`
    fn basepoint_rate(&self, p_hat: &[Complex<T>]) -> Complex<T> {
        let n = T::from_usize(self.sp.n()).unwrap();
        let mut p0 = cz(T::zero(), T::zero());
        let mut p1 = cz(T::zero(), T::zero());
        let mut p2 = cz(T::zero(), T::zero());
        for (j, z) in p_hat.iter().enumerate() {
            p0 = p0 + z;
            p1 = p1 + z * self.sp.derivative_symbol(j, 1);
            p2 = p2 + z * self.sp.derivative_symbol(j, 2);
        }
        let phi0 = p0.re / n;
        let k = self.kappa0 + p1.re / n;
        let ks = p2.re / n;
        Complex::from_polar(T::one(), phi0) * cz(c::<T>(0.5) * k * k, ks)
    }

    fn full_rhs(&self, p_hat: &[Complex<T>]) -> Vec<Complex<T>> {
        let nl = self.nonlinear(p_hat);
        p_hat.iter().zip(&self.linear).zip(nl).map(|((p, l), g)| p * l + g).collect()
    }

    pub fn step(&mut self) -> Result<(), LoopError> {
        let h = self.params.dt;
        let two = c::<T>(2.0);
        let sixth = c::<T>(1.0 / 6.0);
        let b = self.basepoint;
        let v = self.p_hat.clone();
        let axpy = |x: &[Complex<T>], a: T, y: &[Complex<T>]| -> Vec<Complex<T>> {
            x.iter().zip(y).map(|(x, y)| x + y * a).collect()
        };
        let mul = |e: &[Complex<T>], x: &[Complex<T>]| -> Vec<Complex<T>> {
            e.iter().zip(x).map(|(e, x)| e * x).collect()
        };
        let (new_v, new_b) = match self.params.scheme {
            Scheme::IntegratingFactor => {
                let s1 = v.clone();
                let a = self.nonlinear(&s1);
                let ba = self.basepoint_rate(&s1);
                let s2 = mul(&self.e_half, &axpy(&v, h * c(0.5), &a));
                let bb_ = self.nonlinear(&s2);
                let bb = self.basepoint_rate(&s2);
                let s3 = axpy(&mul(&self.e_half, &v), h * c(0.5), &bb_);
                let cc = self.nonlinear(&s3);
                let bc = self.basepoint_rate(&s3);
                let s4 = axpy(&mul(&self.e_full, &v), h, &mul(&self.e_half, &cc));
                let dd = self.nonlinear(&s4);
                let bd = self.basepoint_rate(&s4);
                let out = (0..v.len())
                    .map(|j| {
                        self.e_full[j] * v[j]
                            + (self.e_full[j] * a[j]
                                + self.e_half[j] * (bb_[j] + cc[j]) * two
                                + dd[j])
                                * (h * sixth)
                    })
                    .collect::<Vec<_>>();
                let nb = b + (ba + (bb + bc) * two + bd) * (h * sixth);
                (out, nb)
            }
            Scheme::Etdrk4 => {
                let nv = self.nonlinear(&v);
                let bv = self.basepoint_rate(&v);
                let ev = mul(&self.e_half, &v);
                let a: Vec<Complex<T>> = (0..v.len()).map(|j| ev[j] + self.etd[j][0] * nv[j]).collect();
                let na = self.nonlinear(&a);
                let ba = self.basepoint_rate(&a);
                let b2: Vec<Complex<T>> = (0..v.len()).map(|j| ev[j] + self.etd[j][0] * na[j]).collect();
                let nb = self.nonlinear(&b2);
                let bb = self.basepoint_rate(&b2);
                let c3: Vec<Complex<T>> = (0..v.len())
                    .map(|j| self.e_half[j] * a[j] + self.etd[j][0] * (nb[j] * two - nv[j]))
                    .collect();
                let nc = self.nonlinear(&c3);
                let bc = self.basepoint_rate(&c3);
                let out = (0..v.len())
                    .map(|j| {
                        let [_, f1, f2, f3] = self.etd[j];
                        self.e_full[j] * v[j] + f1 * nv[j] + f2 * (na[j] + nb[j]) * two + f3 * nc[j]
                    })
                    .collect();
                (out, b + (bv + (ba + bb) * two + bc) * (h * sixth))
            }
            Scheme::Rk4Spectral => {
                let k1 = self.full_rhs(&v);
                let b1 = self.basepoint_rate(&v);
                let v2 = axpy(&v, h * c(0.5), &k1);
                let k2 = self.full_rhs(&v2);
                let b2 = self.basepoint_rate(&v2);
                let v3 = axpy(&v, h * c(0.5), &k2);
                let k3 = self.full_rhs(&v3);
                let b3 = self.basepoint_rate(&v3);
                let v4 = axpy(&v, h, &k3);
                let k4 = self.full_rhs(&v4);
                let b4 = self.basepoint_rate(&v4);
                let out = (0..v.len())
                    .map(|j| v[j] + (k1[j] + (k2[j] + k3[j]) * two + k4[j]) * (h * sixth))
                    .collect();
                (out, b + (b1 + (b2 + b3) * two + b4) * (h * sixth))
            }
        };
        self.steps_taken += 1;
        if new_v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) || !new_b.re.is_finite() {
            return Err(LoopError::Instability { step: self.steps_taken });
        }
        self.p_hat = new_v;
        self.basepoint = new_b;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics<T> {
    pub step: usize,
    pub time: T,
    pub energy: T,
    pub energy_drift: T,
    pub closure_defect: T,
    pub length: T,
    pub winding: i64,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub frames: Vec<LoopState<T>>,
    pub diagnostics: Vec<FrameDiagnostics<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &LoopState<T> {
        self.frames.last().expect("trajectory holds the initial frame")
    }

    pub fn max_energy_drift(&self) -> T {
        self.diagnostics.iter().fold(T::zero(), |a, d| a.max(d.energy_drift))
    }

    pub fn max_closure_defect(&self) -> T {
        self.diagnostics.iter().fold(T::zero(), |a, d| a.max(d.closure_defect))
    }
}

fn frame_diagnostics<T: Real>(state: &LoopState<T>, step: usize, time: T, e0: T) -> FrameDiagnostics<T> {
    let d = state.diagnostics();
    let drift = if e0 > T::zero() { ((d.energy - e0) / e0).abs() } else { (d.energy - e0).abs() };
    FrameDiagnostics {
        step,
        time,
        energy: d.energy,
        energy_drift: drift,
        closure_defect: d.closure_defect,
        length: d.length,
        winding: d.winding,
    }
}

/// Runs `params.steps` steps, calling `observe` after every step.
pub fn evolve_mkdv_with<T: Real>(
    state: &LoopState<T>,
    params: FlowParams<T>,
    mut observe: impl FnMut(&MkdvStepper<T>),
) -> Result<Trajectory<T>, LoopError> {
    let mut stepper = MkdvStepper::new(state, params)?;
    let e0 = state.energy();
    let mut traj = Trajectory {
        frames: vec![state.clone()],
        diagnostics: vec![frame_diagnostics(state, 0, T::zero(), e0)],
    };
    for i in 1..=params.steps {
        stepper.step()?;
        observe(&stepper);
        let keep = if params.save_every == 0 { i == params.steps } else { i % params.save_every == 0 || i == params.steps };
        if keep {
            let s = stepper.state();
            traj.diagnostics.push(frame_diagnostics(&s, i, stepper.time(), e0));
            traj.frames.push(s);
        }
    }
    Ok(traj)
}

pub fn evolve_mkdv<T: Real>(state: &LoopState<T>, params: FlowParams<T>) -> Result<Trajectory<T>, LoopError> {
    evolve_mkdv_with(state, params, |_| {})
}

/// Sup-norm of `u_t − (u_sss + 6 u u_s)` at the middle of five consecutive
/// frames spaced `dt` apart, with `u_t` from the fourth-order central stencil.
pub fn kdv_residual<T: Real>(frames: &[LoopState<T>; 5], dt: T) -> T {
    let u: Vec<Vec<Complex<T>>> = frames.iter().map(|f| f.miura_u()).collect();
    let sp = frames[2].spectral();
    let us = sp.derivative(&u[2], 1);
    let usss = sp.derivative(&u[2], 3);
    let twelve_h = c::<T>(12.0) * dt;
    let mut worst = T::zero();
    for j in 0..u[2].len() {
        let ut = (-u[4][j] + u[3][j] * c::<T>(8.0) - u[1][j] * c::<T>(8.0) + u[0][j]) / twelve_h;
        let r = ut - usss[j] - u[2][j] * us[j] * c::<T>(6.0);
        worst = worst.max(r.norm());
    }
    worst
}

/// As [`kdv_residual`], but `u_t − u_sss` is differenced in the interaction
/// picture `ũ = e^{−t∂³}u`, which removes the fast dispersive rotation of
/// high modes before the time stencil is applied: `u_t − u_sss = e^{t∂³} ũ_t`.
/// Frame `j` is taken at time `(j − 2)·dt` relative to the middle frame.
pub fn kdv_residual_interaction<T: Real>(frames: &[LoopState<T>; 5], dt: T) -> T {
    let sp = frames[2].spectral();
    let n = sp.n();
    let tilde: Vec<Vec<Complex<T>>> = frames
        .iter()
        .enumerate()
        .map(|(f, st)| {
            let tau = dt * c::<T>(f as f64 - 2.0);
            let mut uh = sp.forward(&st.miura_u());
            for (j, z) in uh.iter_mut().enumerate() {
                *z = *z * (-(sp.derivative_symbol(j, 3) * tau)).exp();
            }
            uh
        })
        .collect();
    let twelve_h = c::<T>(12.0) * dt;
    let ut_lin: Vec<Complex<T>> = (0..n)
        .map(|j| (-tilde[4][j] + tilde[3][j] * c::<T>(8.0) - tilde[1][j] * c::<T>(8.0) + tilde[0][j]) / twelve_h)
        .collect();
    let ut_lin = sp.inverse(&ut_lin);
    let u = frames[2].miura_u();
    let us = sp.derivative(&u, 1);
    (0..n).fold(T::zero(), |worst, j| {
        let r = ut_lin[j] - u[j] * us[j] * c::<T>(6.0);
        worst.max(r.norm())
    })
}

/// Random closed loop of length 2π and winding 1 with curvature
/// `1 + Σ_{m=1}^{modes} (a_m cos ms + b_m sin ms)`, `|a_m|, |b_m| ≤ amplitude`
/// for `m ≥ 2`; the `m = 1` pair is solved for so that the curve closes.
pub fn random_closed_loop<T: Real>(n: usize, modes: usize, amplitude: f64, seed: u64) -> Result<LoopState<T>, LoopError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = (2..=modes.max(1))
        .map(|_| (rng.gen_range(-amplitude..=amplitude), rng.gen_range(-amplitude..=amplitude)))
        .collect();
    let build = |a1: f64, b1: f64| -> LoopState<T> {
        let tau = std::f64::consts::TAU;
        let phi = (0..n)
            .map(|j| {
                let s = tau * j as f64 / n as f64;
                let mut p = s + a1 * s.sin() - b1 * s.cos();
                for (i, &(a, b)) in coeffs.iter().enumerate() {
                    let m = (i + 2) as f64;
                    p += (a * (m * s).sin() - b * (m * s).cos()) / m;
                }
                c::<T>(p)
            })
            .collect();
        LoopState { phi, length: T::TAU(), basepoint: cz(T::zero(), T::zero()), winding: 1 }
    };
    let closure = |a1: f64, b1: f64| -> Complex<f64> {
        let v = build(a1, b1).closure_vector();
        Complex::new(v.re.to_f64().unwrap(), v.im.to_f64().unwrap())
    };
    let (mut a1, mut b1) = (0.0, 0.0);
    let fd = 1e-7;
    for _ in 0..50 {
        let f = closure(a1, b1);
        if f.norm() < 1e-14 {
            break;
        }
        let fa = (closure(a1 + fd, b1) - closure(a1 - fd, b1)) / (2.0 * fd);
        let fb = (closure(a1, b1 + fd) - closure(a1, b1 - fd)) / (2.0 * fd);
        let det = fa.re * fb.im - fa.im * fb.re;
        if det.abs() < 1e-300 {
            return Err(LoopError::ClosureFailure("singular closure Jacobian".into()));
        }
        a1 -= (f.re * fb.im - f.im * fb.re) / det;
        b1 -= (fa.re * f.im - fa.im * f.re) / det;
    }
    let state = build(a1, b1);
    if state.closure_defect().to_f64().unwrap() > 1e-11 {
        return Err(LoopError::ClosureFailure(format!(
            "closure defect {} after Newton",
            state.closure_defect().to_f64().unwrap()
        )));
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Elastica {
    /// Unit circle.
    Circle,
    /// Soliton loop with curvature `2α sech(αs)`, sampled on `[−half_length, half_length)`.
    /// It is an open curve; `φ` runs from 0 to 2π up to exponentially small tails.
    SolitonLoop { alpha: f64, half_length: f64 },
    /// Figure-eight with curvature `2lα cn(αs | l²)`, `α = 1`, one full period.
    FigureEight,
}

/// Modulus `l` of the closed figure-eight, the root of `2E(l²) = K(l²)`.
pub fn figure_eight_modulus() -> Result<f64, LoopError> {
    let f = |m: f64| 2.0 * ellip_e(m) - ellip_k(m);
    let (mut lo, mut hi) = (0.5, 0.99);
    if f(lo) * f(hi) > 0.0 {
        return Err(LoopError::ClosureFailure("no sign change for 2E − K".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).sqrt())
}

/// Figure-eight tangent angle `φ = 2 asin(l sn(αs))` for a given modulus (closed only at the root).
pub fn figure_eight_with_modulus<T: Real>(n: usize, l: f64) -> Result<LoopState<T>, LoopError> {
    let m = l * l;
    let length = 4.0 * ellip_k(m);
    let phi = (0..n)
        .map(|j| {
            let s = length * j as f64 / n as f64;
            let (sn, _, _) = jacobi_sn_cn_dn(s, m);
            c::<T>(2.0 * (l * sn).asin())
        })
        .collect();
    LoopState::from_phi(phi, c(length), cz(T::zero(), T::zero()), 0)
}

pub fn classical_elastica<T: Real>(kind: Elastica, n: usize) -> Result<LoopState<T>, LoopError> {
    match kind {
        Elastica::Circle => LoopState::circle(n, T::one()),
        Elastica::SolitonLoop { alpha, half_length } => {
            let length = 2.0 * half_length;
            let phi = (0..n)
                .map(|j| {
                    let s = -half_length + length * j as f64 / n as f64;
                    c::<T>(std::f64::consts::PI + 4.0 * (0.5 * alpha * s).tanh().atan())
                })
                .collect();
            let start = soliton_loop_point(alpha, -half_length, SolitonForm::Sech);
            LoopState::from_phi(phi, c(length), cz(c(start.re), c(start.im)), 1)
        }
        Elastica::FigureEight => figure_eight_with_modulus(n, figure_eight_modulus()?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolitonForm {
    /// `s − (2/α) tanh(αs) + i (2/α) sech(αs)`: unit speed.
    Sech,
    /// `s − (2/α)(tanh(αs) − i sinh(αs))`: the alternative closed form, not unit speed.
    Sinh,
}

pub fn soliton_loop_point(alpha: f64, s: f64, form: SolitonForm) -> Complex<f64> {
    let t = (alpha * s).tanh();
    match form {
        SolitonForm::Sech => Complex::new(s - 2.0 / alpha * t, 2.0 / alpha / (alpha * s).cosh()),
        SolitonForm::Sinh => Complex::new(s - 2.0 / alpha * t, 2.0 / alpha * (alpha * s).sinh()),
    }
}

/// Best match of `b` onto `a` over cyclic reparameterization and rigid motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeMatch<T> {
    pub shift: T,
    pub rotation: T,
    pub rms: T,
    pub max: T,
}

fn procrustes<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> (Complex<T>, T, T) {
    let n = T::from_usize(a.len()).unwrap();
    let zero = cz(T::zero(), T::zero());
    let ma = a.iter().fold(zero, |s, z| s + z) / n;
    let mb = b.iter().fold(zero, |s, z| s + z) / n;
    let cross = a.iter().zip(b).fold(zero, |s, (x, y)| s + (x - ma) * (y - mb).conj());
    let rot = if cross.norm() > T::zero() { cross / cross.norm() } else { cz(T::one(), T::zero()) };
    let mut sq = T::zero();
    let mut mx = T::zero();
    for (x, y) in a.iter().zip(b) {
        let d = ((y - mb) * rot - (x - ma)).norm();
        sq = sq + d * d;
        mx = mx.max(d);
    }
    (rot, (sq / n).sqrt(), mx)
}

/// Distance between two closed loops of equal length and grid after optimal
/// arc-length shift, rotation and translation.
pub fn shape_distance<T: Real>(a: &LoopState<T>, b: &LoopState<T>) -> ShapeMatch<T> {
    let ga = a.gamma();
    let gb = b.gamma();
    let sp = b.spectral();
    let eval = |shift: T| {
        let shifted = sp.shifted(&gb, shift);
        procrustes(&ga, &shifted)
    };
    let h = b.step();
    let mut best = (T::zero(), T::infinity());
    for j in 0..b.n() {
        let s = h * T::from_usize(j).unwrap();
        let (_, rms, _) = eval(s);
        if rms < best.1 {
            best = (s, rms);
        }
    }
    // golden-section refinement within one grid cell on each side
    let g = c::<T>(0.618_033_988_749_894_9);
    let (mut lo, mut hi) = (best.0 - h, best.0 + h);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = eval(x1).1;
    let mut f2 = eval(x2).1;
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = eval(x1).1;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = eval(x2).1;
        }
    }
    let shift = c::<T>(0.5) * (lo + hi);
    let (rot, rms, max) = eval(shift);
    ShapeMatch { shift, rotation: rot.arg(), rms, max }
}
