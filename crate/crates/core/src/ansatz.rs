//! Peak layouts on regular polygons, the pseudo-critical point W_{η,r} and the
//! window of admissible distances.

use std::f64::consts::PI;

use serde::Serialize;

use crate::closed_forms::{conjugate_exponent, residual_rate, CouplingParams, Dimension};
use crate::error::{Error, Result};
use crate::field_space::{EtaFunction, FieldSpace};
use crate::grid::GridSpec;
use crate::ground_state::{interaction_integral, RadialProfile};

pub type Point = [f64; 3];

/// Distance (in units of the decay length) kept between every peak, the
/// origin and the box faces.
pub const DEFAULT_MARGIN: f64 = 30.0;

/// Smallest peak-to-boundary distance accepted for a building block.
pub const MIN_CLEARANCE: f64 = 15.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignPattern {
    deltas: Vec<i8>,
}

impl SignPattern {
    pub fn new(deltas: &[i32]) -> Result<Self> {
        if deltas.len() < 2 {
            return Err(Error::Config(format!("a sign pattern needs at least two peaks, got {}", deltas.len())));
        }
        if let Some(d) = deltas.iter().find(|d| d.abs() != 1) {
            return Err(Error::Config(format!("signs must be ±1, got {d}")));
        }
        let pattern = Self { deltas: deltas.iter().map(|&d| d as i8).collect() };
        let sum = pattern.cyclic_sum();
        if sum >= 0 {
            return Err(Error::Config(format!(
                "sign condition: cyclic sum δ_Kδ_1 + Σ δ_kδ_(k+1) must be negative, got {sum}"
            )));
        }
        Ok(pattern)
    }

    /// (+1, −1, +1, …); valid for K even, and for odd K ≥ 3 the last two agree.
    pub fn alternating(k: usize) -> Result<Self> {
        let d: Vec<i32> = (0..k).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        Self::new(&d)
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn sign(&self, k: usize) -> f64 {
        self.deltas[k] as f64
    }

    pub fn signs(&self) -> Vec<f64> {
        self.deltas.iter().map(|&d| d as f64).collect()
    }

    /// δ_Kδ_1 + Σ_{k<K} δ_kδ_{k+1}.
    pub fn cyclic_sum(&self) -> i32 {
        let k = self.deltas.len();
        (0..k).map(|i| (self.deltas[i] * self.deltas[(i + 1) % k]) as i32).sum()
    }

    /// The correlation the interaction term actually carries: −δ₁δ₂ for two
    /// peaks (a single pair), minus the cyclic sum otherwise.
    pub fn adjacent_correlation(&self) -> f64 {
        if self.deltas.len() == 2 {
            -(self.deltas[0] * self.deltas[1]) as f64
        } else {
            -self.cyclic_sum() as f64
        }
    }
}

impl std::fmt::Display for SignPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<&str> = self.deltas.iter().map(|&d| if d > 0 { "+" } else { "-" }).collect();
        write!(f, "{}", s.join(""))
    }
}

/// ζ_r^k = (3r / (2 sin(π/K)))(e^{2πik/K} − 1) − r, k = 1..K, in the x–y plane.
pub fn polygon_vertices(k: usize, r: f64, dim: Dimension) -> Vec<Point> {
    let _ = dim;
    let rad = 3.0 * r / (2.0 * (PI / k as f64).sin());
    (1..=k)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / k as f64;
            [rad * (a.cos() - 1.0) - r, rad * a.sin(), 0.0]
        })
        .collect()
}

/// χ = −((4−p)/(2p))·δ₁δ₂ (K = 2) or −((4−p)/(2p))·(cyclic sum) (K ≥ 3).
pub fn chi(pattern: &SignPattern, p: f64) -> Result<f64> {
    if !(p > 2.0 && p < 4.0) {
        return Err(Error::Domain(format!("χ needs 2 < p < 4, got {p}")));
    }
    Ok((4.0 - p) / (2.0 * p) * pattern.adjacent_correlation())
}

/// Coefficient of I(3r) in S(ΣδΦ_{ζ^k}) − K·C₀ to leading order.
pub fn chi_effective(pattern: &SignPattern) -> f64 {
    pattern.adjacent_correlation()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakConfiguration {
    pub dim: Dimension,
    pub p: f64,
    pub eta: f64,
    pub r: f64,
    pub pattern: SignPattern,
}

impl PeakConfiguration {
    pub fn new(dim: Dimension, p: f64, eta: f64, r: f64, pattern: SignPattern) -> Result<Self> {
        CouplingParams::for_eta(eta, dim)?;
        if !(r > 0.0) {
            return Err(Error::Config(format!("peak distance must be positive, got {r}")));
        }
        chi(&pattern, p)?;
        Ok(Self { dim, p, eta, r, pattern })
    }

    pub fn k(&self) -> usize {
        self.pattern.len()
    }

    pub fn vertices(&self) -> Vec<Point> {
        polygon_vertices(self.k(), self.r, self.dim)
    }

    pub fn chi(&self) -> f64 {
        chi(&self.pattern, self.p).expect("validated at construction")
    }

    pub fn with_r(&self, r: f64) -> Self {
        Self { r, ..self.clone() }
    }
}

pub fn norm3(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

pub fn distance(a: &Point, b: &Point) -> f64 {
    norm3(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

/// Box with spacing h holding every vertex of the K-gon at scale up to
/// `r_max`, and the origin, with `margin` to spare.
pub fn fitted_grid(dim: Dimension, k: usize, r_max: f64, h: f64, margin: f64) -> Result<GridSpec> {
    let mut lo = [-margin; 3];
    let mut hi = [margin; 3];
    for v in polygon_vertices(k, r_max, dim) {
        for a in 0..2 {
            lo[a] = lo[a].min(v[a] - margin);
            hi[a] = hi[a].max(v[a] + margin);
        }
    }
    GridSpec::fitted(dim, h, &lo, &hi)
}

/// Φ(· − y) sampled on the grid.
pub fn translated_profile(space: &FieldSpace, profile: &RadialProfile, y: &Point) -> Vec<f64> {
    space.sample(|x| {
        let d2: f64 = x.iter().enumerate().map(|(a, v)| (v - y[a]).powi(2)).sum();
        profile.eval(d2.sqrt())
    })
}

/// ∂_iΦ(· − y) sampled on the grid.
pub fn translated_gradient(space: &FieldSpace, profile: &RadialProfile, y: &Point, i: usize) -> Vec<f64> {
    space.sample(|x| {
        let d2: f64 = x.iter().enumerate().map(|(a, v)| (v - y[a]).powi(2)).sum();
        let s = d2.sqrt();
        if s == 0.0 {
            return 0.0;
        }
        let (_, du) = profile.eval_with_derivative(s);
        du * (x[i] - y[i]) / s
    })
}

fn check_clearance(space: &FieldSpace, y: &Point, margin: f64) -> Result<()> {
    let c = space.grid.clearance(&y[..space.dim.value()]);
    if c < margin {
        return Err(Error::Geometry(format!("peak at distance {c:.2} from the box boundary, need {margin}")));
    }
    Ok(())
}

/// Ψ_{η,y} = Φ_y + (Φ(y)/β_η(1)) G.
pub fn building_block(space: &FieldSpace, profile: &RadialProfile, y: &Point) -> Result<EtaFunction> {
    check_clearance(space, y, MIN_CLEARANCE)?;
    let phi = translated_profile(space, profile, y);
    Ok(space.element(phi, profile.eval(norm3(y)) / space.beta))
}

/// W_{η,r} = Σ_k δ_k Ψ_{η,ζ_r^k}.
pub fn pseudo_critical(config: &PeakConfiguration, profile: &RadialProfile, space: &FieldSpace) -> Result<EtaFunction> {
    if space.eta() != config.eta || space.dim != config.dim || space.p != config.p {
        return Err(Error::Incompatible("field space does not match the peak configuration".into()));
    }
    let mut w = space.zero();
    for (k, y) in config.vertices().iter().enumerate() {
        w.axpy(config.pattern.sign(k), &building_block(space, profile, y)?);
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibleInterval {
    pub eta: f64,
    pub c: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl AdmissibleInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.r_min + self.r_max)
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.r_min && r < self.r_max
    }

    /// r_mid / log η.
    pub fn mid_ratio(&self) -> f64 {
        self.midpoint() / self.eta.ln()
    }
}

/// r ↦ Φ(r)² / I(3r).
pub fn balance(profile: &RadialProfile, r: f64) -> Result<f64> {
    Ok(profile.eval(r).powi(2) / interaction_integral(profile, 3.0 * r)?)
}

fn solve_balance(profile: &RadialProfile, target: f64, lo: f64, hi: f64) -> Result<f64> {
    // Illinois regula falsi on log(Φ(r)²/I(3r)) − log(target), which is close to linear in r
    let g = |r: f64| -> Result<f64> { Ok(balance(profile, r)?.ln() - target.ln()) };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (g(a)?, g(b)?);
    if !(fa < 0.0 && fb > 0.0) {
        return Err(Error::Range(format!(
            "Φ(r)²/I(3r) does not cross {target:.4e} for r in [{lo}, {hi}] (η too large for the profile support)"
        )));
    }
    let mut side = 0;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = g(c)?;
        if fc == 0.0 || (b - a).abs() < 1e-10 {
            return Ok(c);
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if fc.abs() < 1e-13 {
            return Ok(c);
        }
    }
    Err(Error::IterationLimit { what: "admissible-interval root", iterations: 200 })
}

/// R_η = {r : η/log η < Φ(r)²/I(3r) < cη}.
pub fn admissible_interval(eta: f64, c: f64, profile: &RadialProfile) -> Result<AdmissibleInterval> {
    if !(eta > std::f64::consts::E) {
        return Err(Error::Domain(format!("admissible distances need η > e, got {eta}")));
    }
    if !(c > 1.0 / eta.ln()) {
        return Err(Error::Domain(format!("c = {c} leaves the admissible window empty")));
    }
    let hi = profile.s_max / 3.0;
    let lo = 0.5;
    let r_min = solve_balance(profile, eta / eta.ln(), lo, hi)?;
    let r_max = solve_balance(profile, c * eta, lo, hi)?;
    Ok(AdmissibleInterval { eta, c, r_min, r_max })
}

/// ‖∇S_η(W)‖_{H¹_η}.
pub fn residual_norm(space: &FieldSpace, w: &EtaFunction) -> Result<f64> {
    Ok(space.norm(&space.gradient(w)?))
}

/// r^{((3−p)N+p−1)/(2p′)} η^{−min(3/p′, 2(p−2)+1/p′)}.
pub fn residual_scale(dim: Dimension, p: f64, r: f64, eta: f64) -> f64 {
    let n = dim.as_f64();
    let pc = conjugate_exponent(p);
    r.powf(((3.0 - p) * n + p - 1.0) / (2.0 * pc)) * eta.powf(-residual_rate(p))
}
