//! Modified Bessel functions, Green's functions of −Δ + λ, the coupling
//! function β_α(λ) and a handful of algebraic constants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

/// Above this argument K_ν switches from quadrature to the asymptotic series.
pub const BESSEL_SEAM: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            _ => Err(Error::Config(format!("dimension must be 2 or 3, got {n}"))),
        }
    }

    pub fn value(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }

    /// Surface area of the unit sphere S^{N−1}.
    pub fn sphere_area(self) -> f64 {
        match self {
            Dimension::Two => 2.0 * PI,
            Dimension::Three => 4.0 * PI,
        }
    }

    /// Volume of the unit ball.
    pub fn ball_volume(self) -> f64 {
        match self {
            Dimension::Two => PI,
            Dimension::Three => 4.0 * PI / 3.0,
        }
    }

    /// c_N with G₁(x) ~ c_N e^{−|x|}/|x|^{(N−1)/2} as |x| → ∞.
    pub fn green_tail_constant(self) -> f64 {
        match self {
            Dimension::Two => 1.0 / (2.0 * (2.0 * PI).sqrt()),
            Dimension::Three => 1.0 / (4.0 * PI),
        }
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Dimension::new(n)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    Half,
    One,
}

impl BesselOrder {
    pub fn nu(self) -> f64 {
        match self {
            BesselOrder::Zero => 0.0,
            BesselOrder::Half => 0.5,
            BesselOrder::One => 1.0,
        }
    }

    pub fn from_nu(nu: f64) -> Result<Self> {
        if nu == 0.0 {
            Ok(BesselOrder::Zero)
        } else if nu == 0.5 {
            Ok(BesselOrder::Half)
        } else if nu == 1.0 {
            Ok(BesselOrder::One)
        } else {
            Err(Error::Domain(format!("unsupported Bessel order {nu}")))
        }
    }
}

/// K_ν(t) for ν ∈ {0, ½, 1}, accurate to about 1e−15 relative.
pub fn bessel_k(order: BesselOrder, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("Bessel K needs a positive argument, got {t}")));
    }
    Ok(k_nu(order.nu(), t))
}

pub(crate) fn k_nu(nu: f64, t: f64) -> f64 {
    if t > BESSEL_SEAM {
        k_asymptotic(nu, t)
    } else {
        k_trapezoid(nu, t)
    }
}

// The integrand e^{−t cosh s} cosh(νs) is analytic in a strip whose usable
// width shrinks like t^{−1/2}; the trapezoid rule converges geometrically.
fn k_trapezoid(nu: f64, t: f64) -> f64 {
    let hs = 0.2 / t.sqrt().max(1.0);
    let mut sum = 0.5 * (-t).exp();
    let mut j = 1usize;
    loop {
        let s = j as f64 * hs;
        let c = s.cosh();
        let term = (-t * c).exp() * (nu * s).cosh();
        sum += term;
        if t * c > 1.0 + nu && term < 1e-18 * sum {
            break;
        }
        j += 1;
    }
    hs * sum
}

fn k_asymptotic(nu: f64, t: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let next = term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * t);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    (PI / (2.0 * t)).sqrt() * (-t).exp() * sum
}

/// G_λ as a function of the radius; callers guarantee s > 0.
pub fn green_radial(dim: Dimension, lambda: f64, s: f64) -> f64 {
    let k = lambda.sqrt();
    match dim {
        Dimension::Three => (-k * s).exp() / (4.0 * PI * s),
        Dimension::Two => k_nu(0.0, k * s) / (2.0 * PI),
    }
}

/// d/ds G_λ(s).
pub fn green_radial_derivative(dim: Dimension, lambda: f64, s: f64) -> f64 {
    let k = lambda.sqrt();
    match dim {
        Dimension::Three => -(-k * s).exp() * (1.0 + k * s) / (4.0 * PI * s * s),
        Dimension::Two => -k * k_nu(1.0, k * s) / (2.0 * PI),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensEvaluator {
    lambda: f64,
    dim: Dimension,
}

impl GreensEvaluator {
    pub fn new(lambda: f64, dim: Dimension) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("spectral shift must be positive, got {lambda}")));
        }
        Ok(Self { lambda, dim })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }
}

pub fn green(g: &GreensEvaluator, x: &[f64]) -> Result<f64> {
    if x.len() != g.dim.value() {
        return Err(Error::Domain(format!("point has {} coordinates, dimension is {}", x.len(), g.dim.value())));
    }
    let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if s == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(green_radial(g.dim, g.lambda, s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub alpha: f64,
    pub dim: Dimension,
}

impl CouplingParams {
    pub fn new(alpha: f64, dim: Dimension) -> Self {
        Self { alpha, dim }
    }

    /// Coupling for the reduction, where α = η and β_η(1) must be positive.
    pub fn for_eta(eta: f64, dim: Dimension) -> Result<Self> {
        let c = Self { alpha: eta, dim };
        let b = beta(&c, 1.0)?;
        if !(b > 0.0) {
            return Err(Error::Config(format!("β_η(1) = {b:.6e} must be positive (η = {eta})")));
        }
        Ok(c)
    }
}

pub fn beta(c: &CouplingParams, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("β needs λ > 0, got {lambda}")));
    }
    Ok(match c.dim {
        Dimension::Two => c.alpha + (EULER_GAMMA - std::f64::consts::LN_2) / (2.0 * PI) + 0.25 * lambda.ln() / PI,
        Dimension::Three => c.alpha + lambda.sqrt() / (4.0 * PI),
    })
}

/// The negative eigenvalue of −Δ_α, if any.
pub fn bound_state_energy(c: &CouplingParams) -> Option<f64> {
    match c.dim {
        Dimension::Two => Some(-4.0 * (-2.0 * EULER_GAMMA - 4.0 * PI * c.alpha).exp()),
        Dimension::Three if c.alpha < 0.0 => Some(-(4.0 * PI * c.alpha).powi(2)),
        Dimension::Three => None,
    }
}

pub fn p_star() -> f64 {
    (9.0 + 113f64.sqrt()) / 8.0
}

pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Whether the pseudo-critical residual beats the point-interaction effect:
/// 2(2(p−2) + 1/p′) > 3.
pub fn p_star_threshold(p: f64) -> Result<bool> {
    if !(p > 2.0 && p <= 3.0) {
        return Err(Error::Domain(format!("p must lie in (2, 3], got {p}")));
    }
    Ok(2.0 * (2.0 * (p - 2.0) + 1.0 / conjugate_exponent(p)) > 3.0)
}

/// ℓ(K) = 3|e^{4πi/K} − 1|, the scaled distance between next-nearest vertices.
pub fn ell(k: usize) -> f64 {
    let a = 4.0 * PI / k as f64;
    3.0 * ((a.cos() - 1.0).powi(2) + a.sin().powi(2)).sqrt()
}

/// Exponent of the residual estimate: min(3/p′, 2(p−2) + 1/p′).
pub fn residual_rate(p: f64) -> f64 {
    let pc = conjugate_exponent(p);
    (3.0 / pc).min(2.0 * (p - 2.0) + 1.0 / pc)
}

/// Composite rate of the σ_η − F_η estimate: min(4, 6/p′, 2(2(p−2) + 1/p′)).
pub fn expansion_rate(p: f64) -> f64 {
    let pc = conjugate_exponent(p);
    4f64.min(6.0 / pc).min(2.0 * (2.0 * (p - 2.0) + 1.0 / pc))
}
