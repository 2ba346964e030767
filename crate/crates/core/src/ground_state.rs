//! The positive radial ground state Φ of −Δu + u = u|u|^{p−2}, its tail
//! constants and the interaction integrals built from it.
//!
//! Φ is found by shooting on Φ(0). Forward integration is only trustworthy
//! while the growing mode e^{s} stays below the bisection resolution, so the
//! profile is shot out to a moderate radius s_m and the remainder is obtained
//! by integrating the full nonlinear equation backwards from s_max, starting
//! on the decaying solution of the linearised equation.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::closed_forms::{green_radial, k_nu, Dimension};
use crate::error::{Error, Result};
use crate::ode::{self, Flow, Tolerance};
use crate::quadrature::{graded_breaks, Axisymmetric, GaussLegendre};

#[inline]
pub fn nonlinearity(u: f64, p: f64) -> f64 {
    u * u.abs().powf(p - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundStateParams {
    pub dim: Dimension,
    pub p: f64,
    pub s_max: f64,
    pub nodes: usize,
    pub shooting_tol: f64,
    /// Shooting stops once Φ has fallen to this fraction of Φ(0).
    pub match_ratio: f64,
}

impl GroundStateParams {
    pub fn new(dim: Dimension, p: f64) -> Result<Self> {
        let s_max = 50.0;
        let params = Self { dim, p, s_max, nodes: 5001, shooting_tol: 1e-15, match_ratio: 1e-3 };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.dim {
            Dimension::Two => self.p > 2.0 && self.p <= 3.0,
            Dimension::Three => self.p > 2.0 && self.p < 3.0,
        };
        if !ok {
            return Err(Error::Config(format!(
                "exponent p = {} outside the admissible range for N = {}",
                self.p,
                self.dim.value()
            )));
        }
        if self.s_max < 25.0 {
            return Err(Error::Config(format!("s_max = {} must be at least 25", self.s_max)));
        }
        if self.nodes < 100 {
            return Err(Error::Config("radial grid needs at least 100 nodes".into()));
        }
        if !(self.match_ratio > 0.0 && self.match_ratio < 0.1) {
            return Err(Error::Config("match_ratio must lie in (0, 0.1)".into()));
        }
        Ok(())
    }

    pub fn ds(&self) -> f64 {
        self.s_max / (self.nodes - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub dim: Dimension,
    pub p: f64,
    pub s_max: f64,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    /// lim s^{(N−1)/2} e^{s} Φ(s).
    pub tail_amplitude: f64,
    pub matched_radius: f64,
    /// Coefficient of the decaying linear solution used beyond s_max.
    pub tail_coefficient: f64,
    pub theta: f64,
    /// Relative jump of Φ′ at the matching radius.
    pub derivative_jump: f64,
    ds: f64,
    second: Vec<f64>,
}

fn rhs(dim: Dimension, p: f64) -> impl Fn(f64, &ode::State) -> ode::State {
    let n1 = dim.as_f64() - 1.0;
    move |s, y| [y[1], -n1 / s * y[1] + y[0] - nonlinearity(y[0], p)]
}

/// Decaying solution of the linearised equation and its derivative.
fn linear_tail(dim: Dimension, s: f64) -> (f64, f64) {
    match dim {
        Dimension::Two => (k_nu(0.0, s), -k_nu(1.0, s)),
        Dimension::Three => {
            let e = (-s).exp();
            (e / s, -e * (1.0 + s) / (s * s))
        }
    }
}

fn linear_tail_to_amplitude(dim: Dimension) -> f64 {
    match dim {
        Dimension::Two => (PI / 2.0).sqrt(),
        Dimension::Three => 1.0,
    }
}

const SERIES_START: f64 = 1e-3;

fn series_start(dim: Dimension, p: f64, a: f64) -> ode::State {
    let n = dim.as_f64();
    let g = a - a.powf(p - 1.0);
    let dg = 1.0 - (p - 1.0) * a.powf(p - 2.0);
    let c = g / (2.0 * n);
    let d = dg * c / (8.0 + 4.0 * n);
    let s = SERIES_START;
    [a + c * s * s + d * s.powi(4), 2.0 * c * s + 4.0 * d * s.powi(3)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    Overshoot,
    Undershoot,
}

fn tolerance() -> Tolerance {
    Tolerance { rtol: 1e-13, atol: 1e-300, max_step: 0.05 }
}

fn classify(params: &GroundStateParams, a: f64) -> Shot {
    let f = rhs(params.dim, params.p);
    let y0 = series_start(params.dim, params.p, a);
    let mut outcome = Shot::Undershoot;
    ode::integrate(f, SERIES_START, y0, 10.0 * params.s_max, tolerance(), |_, y| {
        if y[0] < 0.0 {
            outcome = Shot::Overshoot;
            Flow::Stop
        } else if y[1] > 0.0 {
            outcome = Shot::Undershoot;
            Flow::Stop
        } else {
            Flow::Continue
        }
    });
    outcome
}

pub fn solve_ground_state(params: &GroundStateParams) -> Result<RadialProfile> {
    params.validate()?;
    let (dim, p) = (params.dim, params.p);
    let mut lo = 1.0 + 1e-9;
    let mut hi = 2.0;
    if classify(params, lo) != Shot::Undershoot {
        return Err(Error::Config("shooting interval does not bracket the ground state".into()));
    }
    let mut doublings = 0;
    while classify(params, hi) != Shot::Overshoot {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 20 {
            return Err(Error::Config("shooting interval does not bracket the ground state".into()));
        }
    }
    let mut iterations = 0;
    while hi - lo > params.shooting_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match classify(params, mid) {
            Shot::Overshoot => hi = mid,
            Shot::Undershoot => lo = mid,
        }
        iterations += 1;
        if iterations > 200 {
            return Err(Error::IterationLimit { what: "ground-state bisection", iterations });
        }
    }
    let a = 0.5 * (lo + hi);

    let ds = params.ds();
    let n = params.nodes;
    let node = |i: usize| i as f64 * ds;
    let f = rhs(dim, p);

    // forward shot, node by node, until Φ drops below match_ratio·Φ(0)
    let mut values = vec![a];
    let mut derivs = vec![0.0];
    let mut t = SERIES_START;
    let mut y = series_start(dim, p, a);
    let mut m = 0;
    for i in 1..n {
        let (_, yn) = ode::integrate(&f, t, y, node(i), tolerance(), |_, _| Flow::Continue);
        if yn[0] <= 0.0 || yn[1] > 0.0 {
            return Err(Error::Tolerance(format!(
                "shot left the profile at s = {:.3} before reaching the matching level",
                node(i)
            )));
        }
        t = node(i);
        y = yn;
        values.push(y[0]);
        derivs.push(y[1]);
        if y[0] <= params.match_ratio * a {
            m = i;
            break;
        }
    }
    if m == 0 {
        return Err(Error::Range("profile never reached the matching level inside s_max".into()));
    }
    let s_m = node(m);
    let target = values[m];
    let shoot_deriv = derivs[m];

    // backward tail: secant on the linear-tail coefficient
    let tail_run = |b: f64| -> (Vec<f64>, Vec<f64>) {
        let (k, dk) = linear_tail(dim, params.s_max);
        let mut y = [b * k, b * dk];
        let mut vals = vec![0.0; n - m];
        let mut ders = vec![0.0; n - m];
        vals[n - 1 - m] = y[0];
        ders[n - 1 - m] = y[1];
        for i in (m..n - 1).rev() {
            let (_, yn) = ode::integrate(&f, node(i + 1), y, node(i), tolerance(), |_, _| Flow::Continue);
            y = yn;
            vals[i - m] = y[0];
            ders[i - m] = y[1];
        }
        (vals, ders)
    };
    let mut b0 = target / linear_tail(dim, s_m).0;
    let mut r0 = tail_run(b0).0[0] - target;
    let mut b1 = b0 * 1.001;
    let (mut tv, mut td) = tail_run(b1);
    let mut r1 = tv[0] - target;
    let mut it = 0;
    while r1.abs() > 1e-13 * target && r1 != r0 {
        let b2 = b1 - r1 * (b1 - b0) / (r1 - r0);
        b0 = b1;
        r0 = r1;
        b1 = b2;
        let run = tail_run(b1);
        tv = run.0;
        td = run.1;
        r1 = tv[0] - target;
        it += 1;
        if it > 50 || !b1.is_finite() {
            return Err(Error::IterationLimit { what: "tail matching", iterations: it });
        }
    }
    values.truncate(m);
    derivs.truncate(m);
    values.extend_from_slice(&tv);
    derivs.extend_from_slice(&td);
    let derivative_jump = ((td[0] - shoot_deriv) / shoot_deriv).abs();

    let mut profile = RadialProfile {
        dim,
        p,
        s_max: params.s_max,
        values,
        derivs,
        tail_amplitude: b1 * linear_tail_to_amplitude(dim),
        matched_radius: s_m,
        tail_coefficient: b1,
        theta: 0.0,
        derivative_jump,
        ds,
        second: Vec::new(),
    };
    profile.fill_second();
    profile.check_shape()?;
    profile.theta = theta_phi(&profile)?;
    Ok(profile)
}

impl RadialProfile {
    fn fill_second(&mut self) {
        let n1 = self.dim.as_f64() - 1.0;
        let p = self.p;
        self.second = self
            .values
            .iter()
            .zip(&self.derivs)
            .enumerate()
            .map(|(i, (&u, &du))| {
                let g = u - nonlinearity(u, p);
                if i == 0 {
                    g / self.dim.as_f64()
                } else {
                    -n1 / (i as f64 * self.ds) * du + g
                }
            })
            .collect();
    }

    fn check_shape(&self) -> Result<()> {
        if self.derivs[0] != 0.0 {
            return Err(Error::Tolerance("Φ′(0) ≠ 0".into()));
        }
        for w in self.values.windows(2) {
            if !(w[1] > 0.0 && w[1] < w[0]) {
                return Err(Error::Tolerance("profile is not positive and decreasing".into()));
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn spacing(&self) -> f64 {
        self.ds
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.ds)
    }

    pub fn peak(&self) -> f64 {
        self.values[0]
    }

    /// (Φ, Φ′, Φ″) at radius s ≥ 0.
    pub fn eval3(&self, s: f64) -> (f64, f64, f64) {
        let last = self.values.len() - 1;
        if s >= self.s_max {
            let (k, dk) = linear_tail(self.dim, s);
            let b = self.tail_coefficient;
            let n1 = self.dim.as_f64() - 1.0;
            return (b * k, b * dk, b * (k - n1 / s * dk));
        }
        let x = s / self.ds;
        let i = (x.floor() as usize).min(last - 1);
        let t = x - i as f64;
        let h = self.ds;
        let (y0, d0, s0) = (self.values[i], self.derivs[i], self.second[i]);
        let (y1, d1, s1) = (self.values[i + 1], self.derivs[i + 1], self.second[i + 1]);
        let (t2, t3, t4, t5) = (t * t, t * t * t, t.powi(4), t.powi(5));
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
        let v = h0 * y0 + h1 * h * d0 + h2 * h * h * s0 + h5 * y1 + h4 * h * d1 + h3 * h * h * s1;
        let g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let g2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
        let g5 = -g0;
        let g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let g3 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
        let dv = (g0 * y0 + g5 * y1) / h + g1 * d0 + g2 * h * s0 + g4 * d1 + g3 * h * s1;
        let k0 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
        let k1 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
        let k2 = 0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3);
        let k4 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
        let k3 = 0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3);
        let ddv = (k0 * y0 - k0 * y1) / (h * h) + (k1 * d0 + k4 * d1) / h + k2 * s0 + k3 * s1;
        (v, dv, ddv)
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        self.eval3(s).0
    }

    #[inline]
    pub fn eval_with_derivative(&self, s: f64) -> (f64, f64) {
        let (v, d, _) = self.eval3(s);
        (v, d)
    }

    /// Φ^{p−1} at radius s.
    #[inline]
    pub fn source(&self, s: f64) -> f64 {
        self.eval(s).powf(self.p - 1.0)
    }

    /// Largest residual of the radial equation at the cell midpoints.
    pub fn ode_residual(&self) -> f64 {
        let n1 = self.dim.as_f64() - 1.0;
        (0..self.values.len() - 1)
            .map(|i| {
                let s = (i as f64 + 0.5) * self.ds;
                let (u, du, ddu) = self.eval3(s);
                (ddu + n1 / s * du - u + nonlinearity(u, self.p)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// ‖Φ‖²_{H¹} = ∫|∇Φ|² + Φ² by radial quadrature.
    pub fn h1_norm_sq(&self) -> f64 {
        let gl = GaussLegendre::new(20);
        let breaks = graded_breaks(self.s_max + 20.0, 0.5, 1e-3);
        self.dim.sphere_area()
            * gl.integrate_panels(&breaks, |s| {
                let (u, du) = self.eval_with_derivative(s);
                (u * u + du * du) * s.powi(self.dim.value() as i32 - 1)
            })
    }

    /// ‖Φ‖_{L^r}^r by radial quadrature.
    pub fn lp_norm_pow(&self, r: f64) -> f64 {
        let gl = GaussLegendre::new(20);
        let breaks = graded_breaks(self.s_max + 20.0, 0.5, 1e-3);
        self.dim.sphere_area()
            * gl.integrate_panels(&breaks, |s| self.eval(s).powf(r) * s.powi(self.dim.value() as i32 - 1))
    }

    /// C₀ = S_∞(Φ) = (p−2)/(2p)·‖Φ‖²_{H¹}.
    pub fn c0(&self) -> f64 {
        (self.p - 2.0) / (2.0 * self.p) * self.h1_norm_sq()
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        writeln!(
            out,
            "N={},p={:e},nodes={},s_max={:e},theta={:e},A={:e},s_m={:e},tail_coefficient={:e},derivative_jump={:e}",
            self.dim.value(),
            self.p,
            self.values.len(),
            self.s_max,
            self.theta,
            self.tail_amplitude,
            self.matched_radius,
            self.tail_coefficient,
            self.derivative_jump
        )
        .expect("string write");
        out.push_str("s,phi,dphi\n");
        for (i, (v, d)) in self.values.iter().zip(&self.derivs).enumerate() {
            writeln!(out, "{:e},{:e},{:e}", i as f64 * self.ds, v, d).expect("string write");
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty profile cache".into()))?;
        let field = |key: &str| -> Result<f64> {
            header
                .split(',')
                .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| Error::Parse(format!("profile cache header lacks {key}")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{key}: {e}")))
        };
        let dim = Dimension::new(field("N")? as usize)?;
        let nodes = field("nodes")? as usize;
        let s_max = field("s_max")?;
        lines.next();
        let mut values = Vec::with_capacity(nodes);
        let mut derivs = Vec::with_capacity(nodes);
        for line in lines {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("bad profile row: {line}")));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
            values.push(parse(cols[1])?);
            derivs.push(parse(cols[2])?);
        }
        if values.len() != nodes {
            return Err(Error::Parse(format!("expected {nodes} rows, found {}", values.len())));
        }
        let mut profile = RadialProfile {
            dim,
            p: field("p")?,
            s_max,
            values,
            derivs,
            tail_amplitude: field("A")?,
            matched_radius: field("s_m")?,
            tail_coefficient: field("tail_coefficient")?,
            theta: field("theta")?,
            derivative_jump: field("derivative_jump")?,
            ds: s_max / (nodes - 1) as f64,
            second: Vec::new(),
        };
        profile.fill_second();
        Ok(profile)
    }
}

fn theta_integral(profile: &RadialProfile, radial_order: usize) -> f64 {
    let ax = Axisymmetric::new(profile.dim, radial_order, 24, 6);
    let s_top = (40.0 / (profile.p - 2.0)).max(profile.s_max);
    let breaks = graded_breaks(s_top, 1.0, 1e-2);
    ax.integrate(&breaks, |s, c| (s * c).exp() * profile.source(s))
}

/// θ_Φ = ∫ e^{x·z} Φ^{p−1}(x) dx (any unit z).
pub fn theta_phi(profile: &RadialProfile) -> Result<f64> {
    let a = theta_integral(profile, 20);
    let b = theta_integral(profile, 14);
    if !(a > 0.0) || ((a - b) / a).abs() > 1e-10 {
        return Err(Error::Tolerance(format!("θ quadrature unstable: {a} vs {b}")));
    }
    Ok(a)
}

/// ∫ e^{x·z} Φ^{p−1}(x) dx in fixed polar coordinates (not aligned with z):
/// Gauss–Legendre in radius, trapezoid in azimuth, Gauss–Legendre in the
/// polar cosine for N = 3.
pub fn exponential_moment(profile: &RadialProfile, z: &[f64], angular: usize) -> f64 {
    let gl = GaussLegendre::new(20);
    let s_top = (40.0 / (profile.p - 2.0)).max(profile.s_max);
    let breaks = graded_breaks(s_top, 1.0, 1e-2);
    match profile.dim {
        Dimension::Two => {
            let dt = 2.0 * PI / angular as f64;
            gl.integrate_panels(&breaks, |s| {
                let inner: f64 =
                    (0..angular).map(|j| j as f64 * dt).map(|t| (s * (t.cos() * z[0] + t.sin() * z[1])).exp()).sum();
                inner * dt * s * profile.source(s)
            })
        }
        Dimension::Three => {
            let gm = GaussLegendre::new(angular);
            let nphi = 2 * angular;
            let dp = 2.0 * PI / nphi as f64;
            gl.integrate_panels(&breaks, |s| {
                let mut inner = 0.0;
                for (mu, w) in gm.mapped(-1.0, 1.0) {
                    let st = (1.0 - mu * mu).sqrt();
                    for j in 0..nphi {
                        let ph = j as f64 * dp;
                        inner += w * (s * (st * ph.cos() * z[0] + st * ph.sin() * z[1] + mu * z[2])).exp();
                    }
                }
                inner * dp * s * s * profile.source(s)
            })
        }
    }
}

/// I(y) = ∫ Φ(x + y) Φ(x)^{p−1} dx for |y| = separation.
pub fn interaction_integral(profile: &RadialProfile, separation: f64) -> Result<f64> {
    if !(separation > 0.0) || separation > profile.s_max {
        return Err(Error::Domain(format!(
            "separation {separation} outside (0, {}] supported by the profile",
            profile.s_max
        )));
    }
    let ax = Axisymmetric::new(profile.dim, 20, 24, 7);
    let mut breaks = graded_breaks(separation + 30.0, 1.0, 1e-2);
    breaks.push(separation);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let d2 = separation * separation;
    Ok(ax.integrate(&breaks, |s, c| {
        let r = (s * s + d2 + 2.0 * s * separation * c).max(0.0).sqrt();
        profile.eval(r) * profile.source(s)
    }))
}

/// |Φ(s) − A e^{−s}/s^{(N−1)/2}| with A the tail amplitude.
pub fn asymptotic_error(profile: &RadialProfile, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    let n1 = profile.dim.as_f64() - 1.0;
    Ok((profile.eval(radius) - profile.tail_amplitude * (-radius).exp() / radius.powf(0.5 * n1)).abs())
}

pub const CONVOLUTION_RADII: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 3.0, 5.0];

/// (Φ^{p−1} ∗ G)(s) in polar coordinates centred on the singularity of G, with
/// `resolution` cells per unit length. The radius is written ρ = t², which
/// makes the radial integrand odd in t (and smooths the logarithm in 2D), so
/// the midpoint rule in t loses only an O(h⁴) endpoint term. The angle uses
/// the midpoint rule in 2D (periodic, hence spectral) and Gauss–Legendre in
/// cos θ in 3D, where the sin θ weight would otherwise cost two orders.
pub fn convolve_with_green(profile: &RadialProfile, s0: f64, resolution: usize) -> f64 {
    let dim = profile.dim;
    let rho_max = s0 + 30.0;
    let t_max = rho_max.sqrt();
    let nr = (resolution as f64 * rho_max).ceil() as usize;
    let h = t_max / nr as f64;
    let nt = ((PI * resolution as f64 * s0.max(1.0)).ceil() as usize).max(8);
    let angles: Vec<(f64, f64)> = match dim {
        Dimension::Two => {
            let dt = PI / nt as f64;
            (0..nt).map(|j| (((j as f64 + 0.5) * dt).cos(), 2.0 * dt)).collect()
        }
        Dimension::Three => GaussLegendre::new(nt).mapped(-1.0, 1.0).map(|(c, w)| (c, 2.0 * PI * w)).collect(),
    };
    let mut total = 0.0;
    for i in 0..nr {
        let t = (i as f64 + 0.5) * h;
        let rho = t * t;
        let g = green_radial(dim, 1.0, rho) * rho.powi(dim.value() as i32 - 1) * 2.0 * t;
        let inner: f64 = angles
            .iter()
            .map(|&(c, w)| w * profile.source((rho * rho + s0 * s0 - 2.0 * rho * s0 * c).max(0.0).sqrt()))
            .sum();
        total += g * inner * h;
    }
    total
}

/// sup over test radii of |Φ(s) − (Φ^{p−1} ∗ G)(s)|.
pub fn convolution_identity_check(profile: &RadialProfile, resolution: usize) -> f64 {
    CONVOLUTION_RADII
        .iter()
        .map(|&s| (profile.eval(s) - convolve_with_green(profile, s, resolution)).abs())
        .fold(0.0, f64::max)
}
