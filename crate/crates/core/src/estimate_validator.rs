//! Numerical checks of the elementary inequalities and the decay estimates
//! for convolutions of exponentially decaying functions.
//!
//! The estimates hold beyond non-constructive thresholds; here they are tested
//! on explicit windows with fixed margins (0.05 on rates, 0.3 on powers).

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_forms::{green_radial, Dimension};
use crate::error::{Error, Result};
use crate::ground_state::{exponential_moment, RadialProfile};
use crate::quadrature::{graded_breaks, Axisymmetric};

pub const RATE_MARGIN: f64 = 0.05;
pub const POWER_MARGIN: f64 = 0.3;
/// Absolute floor below which an inequality is not counted as violated.
pub const FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidatorParams {
    pub samples: usize,
    /// Ball exponent δ ∈ [0, 1/2).
    pub delta: f64,
    /// Ball scale η̃ ∈ [0, 1].
    pub ball_scale: f64,
    pub epsilon: f64,
    /// Smallest |y| used by the angle estimate.
    pub angle_threshold: f64,
    pub seed: u64,
}

impl Default for ValidatorParams {
    fn default() -> Self {
        Self { samples: 100_000, delta: 0.4, ball_scale: 1.0, epsilon: 0.5, angle_threshold: 10.0, seed: 2024 }
    }
}

impl ValidatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.delta) {
            return Err(Error::Config(format!("δ must lie in [0, 1/2), got {}", self.delta)));
        }
        if !(0.0..=1.0).contains(&self.ball_scale) {
            return Err(Error::Config(format!("η̃ must lie in [0, 1], got {}", self.ball_scale)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("ε must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.samples == 0 || !(self.angle_threshold > 1.0) {
            return Err(Error::Config("need a positive sample count and |y| threshold above 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub samples: usize,
    pub violations: usize,
    /// max (LHS − RHS)/RHS; non-positive when the inequality holds.
    pub max_slack: f64,
}

impl InequalityReport {
    fn new() -> Self {
        Self { samples: 0, violations: 0, max_slack: f64::NEG_INFINITY }
    }

    fn record(&mut self, lhs: f64, rhs: f64) {
        self.samples += 1;
        if lhs > rhs + FLOOR {
            self.violations += 1;
        }
        if rhs > 0.0 {
            self.max_slack = self.max_slack.max((lhs - rhs) / rhs);
        } else if lhs > FLOOR {
            self.max_slack = f64::INFINITY;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn signed_log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let m = 10f64.powf(rng.gen_range(lo..hi));
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

/// ||a+b|^r − |a|^r| ≤ |b|^r for 0 < r ≤ 1.
pub fn check_elementary_1(samples: usize, seed: u64) -> InequalityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = InequalityReport::new();
    for i in 0..samples {
        let r = 1.0 - rng.gen::<f64>();
        let (a, b) = match i % 50 {
            0 => (0.0, signed_log_uniform(&mut rng, -3.0, 2.0)),
            1 => (signed_log_uniform(&mut rng, -3.0, 2.0), 0.0),
            _ => (signed_log_uniform(&mut rng, -3.0, 2.0), signed_log_uniform(&mut rng, -3.0, 2.0)),
        };
        rep.record(((a + b).abs().powf(r) - a.abs().powf(r)).abs(), b.abs().powf(r));
    }
    rep
}

/// Left and right sides of the multi-term expansion bound for 2 < r ≤ 3.
pub fn elementary_2_sides(a: &[f64], r: f64) -> (f64, f64) {
    let k = a.len();
    let total: f64 = a.iter().sum();
    let mut cross = 0.0;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                cross += a[i] * a[j] * a[j].abs().powf(r - 2.0);
            }
        }
    }
    let lhs = (total.abs().powf(r) - a.iter().map(|v| v.abs().powf(r)).sum::<f64>() - 2.0 * cross).abs();
    let mut rhs = 0.0;
    for k3 in 0..k {
        let w = a[k3].abs().powf(r - 2.0);
        let others: f64 = (0..k).filter(|&i| i != k3).map(|i| a[i].abs()).sum();
        rhs += others * others * w;
    }
    (lhs, r * rhs)
}

pub fn check_elementary_2(k: usize, r: f64, samples: usize, seed: u64) -> Result<InequalityReport> {
    if !(r > 2.0 && r <= 3.0) || !(1..=6).contains(&k) {
        return Err(Error::Domain(format!("need 2 < r ≤ 3 and 1 ≤ K ≤ 6, got r = {r}, K = {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = InequalityReport::new();
    let mut a = vec![0.0; k];
    for _ in 0..samples {
        for v in a.iter_mut() {
            *v = if rng.gen_bool(0.1) { 0.0 } else { signed_log_uniform(&mut rng, -2.0, 1.0) };
        }
        let (lhs, rhs) = elementary_2_sides(&a, r);
        rep.record(lhs, rhs);
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorConstantReport {
    pub samples: usize,
    /// Smallest C that covers the sample.
    pub fitted: f64,
    /// r(r−1)2^{r−2}/2 · max(M^{r−2}, 1).
    pub bound: f64,
}

impl TaylorConstantReport {
    pub fn passed(&self) -> bool {
        self.fitted <= self.bound * (1.0 + 1e-9)
    }
}

/// Smallest C with ||a+b|^r − |a|^r − rba|a|^{r−2}| ≤ C(|b|² + |b|^r), a ∈ [−M, M].
pub fn check_elementary_3(m: f64, r: f64, samples: usize, seed: u64) -> Result<TaylorConstantReport> {
    if !(r >= 2.0) || !(m > 0.0) {
        return Err(Error::Domain(format!("need r ≥ 2 and M > 0, got r = {r}, M = {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fitted: f64 = 0.0;
    for _ in 0..samples {
        let a = rng.gen_range(-m..=m);
        let b = signed_log_uniform(&mut rng, -3.0, 2.0);
        let lhs = ((a + b).abs().powf(r) - a.abs().powf(r) - r * b * a * a.abs().powf(r - 2.0)).abs();
        fitted = fitted.max(lhs / (b * b + b.abs().powf(r)));
    }
    let bound = r * (r - 1.0) * 2f64.powf(r - 2.0) / 2.0 * m.powf(r - 2.0).max(1.0);
    Ok(TaylorConstantReport { samples, fitted, bound })
}

/// Radial envelope e^{−α s} s^{−β}, or the ground state itself.
#[derive(Debug, Clone, Copy)]
pub enum Envelope<'a> {
    Power { rate: f64, power: f64 },
    Profile(&'a RadialProfile),
}

impl Envelope<'_> {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Envelope::Power { rate, power } => (-rate * s).exp() * s.powf(-power),
            Envelope::Profile(pr) => pr.eval(s),
        }
    }

    /// (α, β) with e^{α s}s^{β}u(s) bounded.
    pub fn decay(&self) -> (f64, f64) {
        match *self {
            Envelope::Power { rate, power } => (rate, power),
            Envelope::Profile(pr) => (1.0, (pr.dim.as_f64() - 1.0) / 2.0),
        }
    }
}

/// Where the x-integration runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Whole,
    /// |x| < η̃|y|^δ.
    Ball {
        scale: f64,
        exponent: f64,
    },
}

/// ∫ |u₁(x + y)| |u₂(x)|^{r−1} dx over `region`, |y| = y.
pub fn convolution_integral(dim: Dimension, u1: &Envelope, u2: &Envelope, r: f64, y: f64, region: Region) -> f64 {
    let ax = Axisymmetric::new(dim, 20, 24, 7);
    let top = match region {
        Region::Whole => y + 40.0,
        Region::Ball { scale, exponent } => scale * y.powf(exponent),
    };
    let mut breaks = graded_breaks(top, 1.0, 1e-3);
    if y < top {
        breaks.push(y);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
    }
    let y2 = y * y;
    ax.integrate(&breaks, |s, c| {
        let d = (s * s + y2 + 2.0 * s * y * c).max(0.0).sqrt();
        u1.eval(d).abs() * u2.eval(s).abs().powf(r - 1.0)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFitReport {
    pub label: String,
    pub y: Vec<f64>,
    pub values: Vec<f64>,
    /// Fitted α̂ in values ≈ C e^{−α̂|y|} |y|^{β̂}.
    pub rate: f64,
    /// Fitted |y|-power β̂.
    pub power: f64,
    pub target_rate: f64,
    pub target_power: f64,
    /// rate − (target_rate − 0.05); non-negative passes.
    pub rate_margin: f64,
    /// (target_power + 0.3) − power; non-negative passes.
    pub power_margin: f64,
    pub passed: bool,
}

/// Least-squares fit of ln v = c − α y + β ln y.
pub fn fit_exponential_power(y: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    if y.len() < 8 || y.len() != v.len() {
        return Err(Error::FitQuality(format!("need at least 8 samples, got {}", y.len())));
    }
    if v.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::FitQuality("sampled values must be positive".into()));
    }
    let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    if (hi / lo).log10() < 1.0 {
        return Err(Error::FitQuality(format!("samples span {:.2} decades, need at least one", (hi / lo).log10())));
    }
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for (&yi, &vi) in y.iter().zip(v) {
        let row = Vector3::new(1.0, -yi, yi.ln());
        ata += row * row.transpose();
        atb += row * vi.ln();
    }
    let sol = ata.lu().solve(&atb).ok_or_else(|| Error::FitQuality("singular normal equations".into()))?;
    Ok((sol[1], sol[2]))
}

/// `count` points in [lo, hi], jittered within equal sub-intervals by `seed`.
pub fn sample_points(lo: f64, hi: f64, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = (hi - lo) / count as f64;
    (0..count).map(|i| lo + w * (i as f64 + rng.gen_range(0.25..0.75))).collect()
}

fn decay_report(
    label: &str,
    y: Vec<f64>,
    values: Vec<f64>,
    target_rate: f64,
    target_power: f64,
) -> Result<DecayFitReport> {
    let (rate, power) = fit_exponential_power(&y, &values)?;
    let rate_margin = rate - (target_rate - RATE_MARGIN);
    let power_margin = target_power + POWER_MARGIN - power;
    Ok(DecayFitReport {
        label: label.to_string(),
        y,
        values,
        rate,
        power,
        target_rate,
        target_power,
        rate_margin,
        power_margin,
        passed: rate_margin >= 0.0 && power_margin >= 0.0,
    })
}

/// Fits the decay of ∫|u₁(x+y)||u₂(x)|^{r−1} against the bound
/// |y|^{N−β₁−(r−1)β₂} e^{−α₁|y|} (whole space) or
/// |y|^{δ(N−(r−1)β₂)−β₁} e^{−α₁|y|} (ball of radius η̃|y|^δ).
#[allow(clippy::too_many_arguments)]
pub fn fit_convolution_decay(
    dim: Dimension,
    u1: &Envelope,
    u2: &Envelope,
    r: f64,
    y_range: (f64, f64),
    count: usize,
    region: Region,
    seed: u64,
) -> Result<DecayFitReport> {
    let (a1, b1) = u1.decay();
    let (a2, b2) = u2.decay();
    let n = dim.as_f64();
    if !(r > 1.0) || !((r - 1.0) * a2 > a1) || !(b1 < n) || !(b2 < n / (r - 1.0)) {
        return Err(Error::Domain(format!(
            "decay hypotheses fail: need r > 1, (r−1)α₂ > α₁, β₁ < N, β₂ < N/(r−1); got r = {r}, α = ({a1}, {a2}), β = ({b1}, {b2})"
        )));
    }
    if (y_range.1 - y_range.0) * a1 < 10f64.ln() {
        return Err(Error::FitQuality("the |y| window spans less than one decade of e-folding".into()));
    }
    let y = sample_points(y_range.0, y_range.1, count, seed);
    let values: Vec<f64> = y.iter().map(|&yy| convolution_integral(dim, u1, u2, r, yy, region)).collect();
    let (target_power, label) = match region {
        Region::Whole => (n - b1 - (r - 1.0) * b2, "whole space"),
        Region::Ball { exponent, .. } => (exponent * (n - (r - 1.0) * b2) - b1, "ball"),
    };
    decay_report(label, y, values, a1, target_power)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleReport {
    pub samples: usize,
    /// Violations of ||y+x| − |y| − y·x/|y|| ≤ 2|x|²/(|x+y| + |y|).
    pub violations_sharp: usize,
    /// Violations of the same quantity ≤ 2|y|^{2δ}/|y|.
    pub violations: usize,
    pub max_slack: f64,
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> [f64; 3] {
    loop {
        let mut v = [0.0; 3];
        for c in v.iter_mut().take(dim) {
            *c = rng.gen_range(-1.0..1.0);
        }
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.map(|c| c / n);
        }
    }
}

/// Left side of the angle estimate, written without cancellation:
/// |y+x| − |y| − ŷ·x = (|x|²|y| + (x·y)(|y| − |x+y|)) / (|y|(|x+y| + |y|)).
pub fn angle_defect(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    let ny = y.iter().map(|c| c * c).sum::<f64>().sqrt();
    let s: [f64; 3] = std::array::from_fn(|i| x[i] + y[i]);
    let ns = s.iter().map(|c| c * c).sum::<f64>().sqrt();
    let x2: f64 = x.iter().map(|c| c * c).sum();
    let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let diff = (x2 + 2.0 * xy) / (ns + ny);
    ((x2 * ny - xy * diff) / (ny * (ns + ny))).abs()
}

pub fn check_angle_estimates(params: &ValidatorParams, dim: Dimension, samples: usize) -> Result<AngleReport> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0xa11e);
    let n = dim.value();
    let mut rep = AngleReport { samples, violations_sharp: 0, violations: 0, max_slack: f64::NEG_INFINITY };
    for _ in 0..samples {
        let delta = rng.gen_range(0.0..params.delta.max(1e-3));
        let ny = params.angle_threshold * 10f64.powf(rng.gen_range(0.0..2.0));
        let nx = ny.powf(delta) * rng.gen::<f64>().sqrt();
        let y = random_unit(&mut rng, n).map(|c| c * ny);
        let x = random_unit(&mut rng, n).map(|c| c * nx);
        let lhs = angle_defect(&x, &y);
        let s = (0..3).map(|i| (x[i] + y[i]).powi(2)).sum::<f64>().sqrt();
        let sharp = 2.0 * nx * nx / (s + ny);
        let coarse = 2.0 * ny.powf(2.0 * delta) / ny;
        if lhs > sharp + FLOOR {
            rep.violations_sharp += 1;
        }
        if lhs > coarse + FLOOR {
            rep.violations += 1;
        }
        rep.max_slack = rep.max_slack.max((lhs - sharp) / sharp);
    }
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensExpansionReport {
    pub fit: DecayFitReport,
    /// sup of |G − e^{−z}/(2^{3/2}π^{1/2}z^{1/2})|·e^{z}z^{3/2} on the window.
    pub weighted_sup: f64,
    pub weighted_at_ends: (f64, f64),
    /// |G/leading − 1| at the window's right end.
    pub relative_deviation_at_end: f64,
    pub passed: bool,
}

pub fn greens_leading_term(z: f64) -> f64 {
    (-z).exp() / (2f64.powf(1.5) * PI.sqrt() * z.sqrt())
}

/// Two-dimensional G against its leading asymptotic term on [z_lo, z_hi].
pub fn check_greens_expansion_2d(z_lo: f64, z_hi: f64, count: usize, seed: u64) -> Result<GreensExpansionReport> {
    if !(z_lo >= 2.0 && z_hi > z_lo) {
        return Err(Error::Domain(format!("need 2 ≤ z_lo < z_hi, got [{z_lo}, {z_hi}]")));
    }
    let weighted =
        |z: f64| (green_radial(Dimension::Two, 1.0, z) - greens_leading_term(z)).abs() * z.exp() * z.powf(1.5);
    let z = sample_points(z_lo, z_hi, count, seed);
    let values: Vec<f64> =
        z.iter().map(|&t| (green_radial(Dimension::Two, 1.0, t) - greens_leading_term(t)).abs()).collect();
    let fit = decay_report("2D Green's function remainder", z.clone(), values, 1.0, -1.5)?;
    let fine: Vec<f64> = (0..=400).map(|i| z_lo + (z_hi - z_lo) * i as f64 / 400.0).collect();
    let weighted_sup = fine.iter().map(|&t| weighted(t)).fold(0.0, f64::max);
    let ends = (weighted(z_lo), weighted(z_hi));
    // bounded: the weight never exceeds its value at the left end by more than the power margin allows
    let bounded = weighted_sup <= ends.0 * (z_hi / z_lo).powf(POWER_MARGIN);
    let relative_deviation_at_end = (green_radial(Dimension::Two, 1.0, z_hi) / greens_leading_term(z_hi) - 1.0).abs();
    Ok(GreensExpansionReport {
        passed: fit.passed && bounded,
        fit,
        weighted_sup,
        weighted_at_ends: ends,
        relative_deviation_at_end,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricIntegralReport {
    pub values: Vec<f64>,
    pub max_relative_spread: f64,
    pub passed: bool,
}

/// ∫ e^{−x·z} Φ^{p−1} over random unit z; rotation invariance makes them equal.
pub fn check_symmetric_integral(profile: &RadialProfile, directions: usize, seed: u64) -> SymmetricIntegralReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = profile.dim.value();
    let angular = match profile.dim {
        Dimension::Two => 256,
        Dimension::Three => 64,
    };
    let values: Vec<f64> =
        (0..directions).map(|_| exponential_moment(profile, &random_unit(&mut rng, n).map(|c| -c), angular)).collect();
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let max_relative_spread = (hi - lo) / hi.abs();
    SymmetricIntegralReport { values, max_relative_spread, passed: max_relative_spread < 1e-8 }
}

/// Decay of ∫ |Φ′(|x+y|)| |Φ′(|x|)| Φ(x)^{p−2} dx. Only the rate is gated;
/// the power and constant are reported.
pub fn derivative_pair_decay(
    profile: &RadialProfile,
    y_range: (f64, f64),
    count: usize,
    seed: u64,
) -> Result<DecayFitReport> {
    let ax = Axisymmetric::new(profile.dim, 20, 24, 7);
    let y = sample_points(y_range.0, y_range.1, count, seed);
    let p = profile.p;
    let values: Vec<f64> = y
        .iter()
        .map(|&yy| {
            let mut breaks = graded_breaks(yy + 40.0, 1.0, 1e-3);
            breaks.push(yy);
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            ax.integrate(&breaks, |s, c| {
                let d = (s * s + yy * yy + 2.0 * s * yy * c).max(0.0).sqrt();
                let (ph, dph) = profile.eval_with_derivative(s);
                profile.eval_with_derivative(d).1.abs() * dph.abs() * ph.powf(p - 2.0)
            })
        })
        .collect();
    let mut rep = decay_report("derivative pairs", y, values, 1.0, f64::NAN)?;
    rep.power_margin = f64::NAN;
    rep.passed = rep.rate_margin >= 0.0;
    Ok(rep)
}

/// Window of |y| used by the convolution fits.
pub const DECAY_WINDOW: (f64, f64) = (10.0, 40.0);
pub const DECAY_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub params: ValidatorParams,
    pub elementary_1: InequalityReport,
    /// (K, r, report)
    pub elementary_2: Vec<(usize, f64, InequalityReport)>,
    pub elementary_3: TaylorConstantReport,
    pub angle: AngleReport,
    pub decay_fits: Vec<DecayFitReport>,
    pub greens_expansion: GreensExpansionReport,
    pub symmetric_integral: SymmetricIntegralReport,
    pub derivative_pairs: DecayFitReport,
    pub passed: bool,
}

/// Runs every check; `profile` supplies Φ (its dimension and exponent fix N and r).
pub fn run_validation(profile: &RadialProfile, params: &ValidatorParams) -> Result<ValidationReport> {
    params.validate()?;
    let n = params.samples;
    let seed = params.seed;
    let elementary_1 = check_elementary_1(n, seed);
    let mut elementary_2 = Vec::new();
    for k in 2..=6 {
        for r in [2.2, 2.6, 3.0] {
            elementary_2.push((k, r, check_elementary_2(k, r, n, seed.wrapping_add(k as u64))?));
        }
    }
    let elementary_3 = check_elementary_3(2.0, 2.5, n, seed)?;
    let angle = check_angle_estimates(params, profile.dim, n)?;
    let dim = profile.dim;
    let p = profile.p;
    let pure = Envelope::Power { rate: 1.0, power: 0.0 };
    let shaped = Envelope::Power { rate: 1.0, power: (dim.as_f64() - 1.0) / 2.0 };
    let phi = Envelope::Profile(profile);
    let ball = Region::Ball { scale: params.ball_scale, exponent: params.delta };
    let mut decay_fits = Vec::new();
    for (name, env) in [("e^{-|x|}", pure), ("e^{-|x|}|x|^{-(N-1)/2}", shaped), ("Φ", phi)] {
        for region in [Region::Whole, ball] {
            let mut rep = fit_convolution_decay(dim, &env, &env, p, DECAY_WINDOW, DECAY_SAMPLES, region, seed)?;
            rep.label = format!("{name}, {}", rep.label);
            decay_fits.push(rep);
        }
    }
    let greens_expansion = check_greens_expansion_2d(5.0, 50.0, 12, seed)?;
    let symmetric_integral = check_symmetric_integral(profile, 8, seed);
    let derivative_pairs = derivative_pair_decay(profile, DECAY_WINDOW, DECAY_SAMPLES, seed)?;
    let passed = elementary_1.passed()
        && elementary_2.iter().all(|(_, _, r)| r.passed())
        && elementary_3.passed()
        && angle.violations == 0
        && angle.violations_sharp == 0
        && decay_fits.iter().all(|f| f.passed)
        && greens_expansion.passed
        && symmetric_integral.passed
        && derivative_pairs.passed;
    Ok(ValidationReport {
        params: *params,
        elementary_1,
        elementary_2,
        elementary_3,
        angle,
        decay_fits,
        greens_expansion,
        symmetric_integral,
        derivative_pairs,
        passed,
    })
}
