//! Lyapunov–Schmidt reduction onto the polygon family: constraint space,
//! the linearised operator on it, the auxiliary fixed point ν_{η,r}, the
//! reduced functional σ_η(r) and its minimisation.
//!
//! σ_η − K·C₀ is tiny compared with σ_η itself once η is moderately large, so
//! it is assembled from pieces that are each computed without cancellation:
//! pair overlaps ∫Φ_jΦ_k^{p−1}, the charge energy, the ν terms, and the
//! pointwise difference |u|^p − Σ_kΦ_k^p taken relative to the dominant peak.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ansatz::{
    admissible_interval, chi_effective, distance, fitted_grid, norm3, pseudo_critical, residual_scale,
    translated_gradient, translated_profile, AdmissibleInterval, PeakConfiguration, Point, SignPattern, DEFAULT_MARGIN,
};
use crate::closed_forms::{beta, CouplingParams, Dimension};
use crate::error::{Error, Result};
use crate::field_space::{EtaFunction, FieldSpace, Linearization, SpecVec};
use crate::grid::GridSpec;
use crate::ground_state::{interaction_integral, nonlinearity, RadialProfile};
use crate::krylov::{minres, KrylovOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Auxiliary solve stops at aux_rel·‖∇S_η(W)‖.
    pub aux_rel: f64,
    /// Floor for the auxiliary tolerance relative to ‖W‖ (round-off level of the gradient).
    pub roundoff_floor: f64,
    pub krylov: f64,
    pub max_outer: usize,
    pub max_krylov: usize,
    pub cbar_iterations: usize,
    pub cbar_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            aux_rel: 1e-6,
            roundoff_floor: 2e-15,
            krylov: 1e-11,
            max_outer: 40,
            max_krylov: 500,
            cbar_iterations: 60,
            cbar_tol: 1e-4,
        }
    }
}

/// The fields ∂_iΦ_{ζ^k} (index k·N + i) in sine coefficients, with their H¹ Gram matrix.
#[derive(Debug)]
pub struct ConstraintBasis {
    dim: usize,
    coeffs: Vec<Vec<f64>>,
    /// inner_scale·symbol·coeffs, so that ⟨v, e_j⟩_{H¹} is a dot product.
    weighted: Vec<Vec<f64>>,
    gram: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl ConstraintBasis {
    pub fn new(space: &FieldSpace, profile: &RadialProfile, vertices: &[Point]) -> Result<Self> {
        let n = space.dim.value();
        let sp = space.spectral();
        let mut coeffs = Vec::new();
        for y in vertices {
            for i in 0..n {
                coeffs.push(sp.forward(&translated_gradient(space, profile, y, i)));
            }
        }
        let weighted: Vec<Vec<f64>> =
            coeffs.iter().map(|c| c.iter().zip(sp.symbol()).map(|(v, s)| sp.inner_scale * s * v).collect()).collect();
        let m = coeffs.len();
        let gram = DMatrix::from_fn(m, m, |a, b| dot(&coeffs[a], &weighted[b]));
        let gram = 0.5 * (&gram + gram.transpose());
        let chol = Cholesky::new(gram.clone())
            .ok_or_else(|| Error::Degenerate("constraint Gram matrix is not positive definite".into()))?;
        Ok(Self { dim: n, coeffs, weighted, gram, chol })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn coefficients(&self, j: usize) -> &[f64] {
        &self.coeffs[j]
    }

    /// (⟨v, e_j⟩_{H¹})_j.
    pub fn functionals(&self, c: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.weighted.iter().map(|w| dot(c, w)))
    }

    /// Removes the span of the basis from the regular part; the charge is untouched.
    pub fn project_spec(&self, v: &mut SpecVec) {
        let a = self.chol.solve(&self.functionals(&v.c));
        for (j, aj) in a.iter().enumerate() {
            v.c.iter_mut().zip(&self.coeffs[j]).for_each(|(x, e)| *x -= aj * e);
        }
    }

    pub fn project(&self, space: &FieldSpace, v: &EtaFunction) -> EtaFunction {
        let mut s = space.to_spec(v);
        self.project_spec(&mut s);
        space.from_spec(&s)
    }

    /// max_j |⟨v, e_j⟩_{H¹}| / ‖e_j‖_{H¹}.
    pub fn constraint_violation(&self, c: &[f64]) -> f64 {
        self.functionals(c).iter().enumerate().map(|(j, f)| f.abs() / self.gram[(j, j)].sqrt()).fold(0.0, f64::max)
    }

    /// Largest normalised Gram entry coupling different peaks.
    pub fn cross_peak_coupling(&self) -> f64 {
        let mut out = 0.0f64;
        for a in 0..self.len() {
            for b in 0..self.len() {
                if a / self.dim != b / self.dim {
                    let g = self.gram[(a, b)] / (self.gram[(a, a)] * self.gram[(b, b)]).sqrt();
                    out = out.max(g.abs());
                }
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InverseBound {
    /// Measured ‖L^{-1}‖ on the constraint space.
    pub c_bar: f64,
    /// Rayleigh quotient at the extremal vector (the eigenvalue of smallest modulus).
    pub eigenvalue: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliarySolution {
    pub nu: EtaFunction,
    pub iterations: usize,
    pub krylov_iterations: usize,
    /// ‖Π∇S_η(W + ν_n)‖ along the iteration.
    pub history: Vec<f64>,
    /// Largest ratio of successive projected residuals after the first step.
    pub contraction: f64,
    pub projected_residual: f64,
    pub tolerance: f64,
}

/// Everything needed at one (η, r).
pub struct ReductionWorkspace<'a> {
    pub space: &'a FieldSpace,
    pub profile: &'a RadialProfile,
    pub config: PeakConfiguration,
    pub w: EtaFunction,
    pub basis: ConstraintBasis,
    pub residual: f64,
    pub tol: Tolerances,
    w_coeffs: Vec<f64>,
    lin: Linearization<'a>,
    /// Φ_k at the nodes, per peak.
    peaks: Vec<Vec<f64>>,
}

impl<'a> ReductionWorkspace<'a> {
    pub fn new(
        space: &'a FieldSpace,
        profile: &'a RadialProfile,
        config: PeakConfiguration,
        tol: Tolerances,
    ) -> Result<Self> {
        let w = pseudo_critical(&config, profile, space)?;
        let vertices = config.vertices();
        let peaks: Vec<Vec<f64>> = vertices.iter().map(|y| translated_profile(space, profile, y)).collect();
        let basis = ConstraintBasis::new(space, profile, &vertices)?;
        let w_coeffs = space.spectral().forward(&w.phi);
        let lin = space.linearize(&w)?;
        let mut ws = Self { space, profile, config, w, basis, residual: 0.0, tol, w_coeffs, lin, peaks };
        ws.residual = space.spec_norm(&ws.gradient_at(&ws.zero_spec())?);
        Ok(ws)
    }

    pub fn zero_spec(&self) -> SpecVec {
        SpecVec { c: vec![0.0; self.w_coeffs.len()], q: 0.0 }
    }

    pub fn w_norm(&self) -> f64 {
        self.space.norm(&self.w)
    }

    pub fn aux_tol(&self) -> f64 {
        (self.tol.aux_rel * self.residual).max(self.tol.roundoff_floor * self.w_norm())
    }

    fn field(&self, nu: &SpecVec) -> EtaFunction {
        let psi = self.space.spectral().inverse(&nu.c);
        let phi = self.w.phi.iter().zip(&psi).map(|(a, b)| a + b).collect();
        self.space.element(phi, self.w.q + nu.q)
    }

    /// ∇S_η(W + ν) in coefficients, with W's coefficients reused exactly.
    fn gradient_at(&self, nu: &SpecVec) -> Result<SpecVec> {
        let sp = self.space;
        let u = self.field(nu);
        let p = sp.p;
        let (src, against_g) = sp.effective(&u, |v| nonlinearity(v, p));
        let fs = sp.spectral().forward(&src);
        let c = self
            .w_coeffs
            .iter()
            .zip(&nu.c)
            .zip(&fs)
            .zip(sp.spectral().symbol())
            .map(|(((w, n), f), s)| w + n - f / s)
            .collect();
        Ok(SpecVec { c, q: u.q - against_g / sp.beta })
    }

    /// L_{η,r} = Π ∘ S″_η(W) on coefficient vectors.
    pub fn apply_l_spec(&self, v: &SpecVec) -> SpecVec {
        let mut pv = v.clone();
        self.basis.project_spec(&mut pv);
        let mut out = self.lin.apply_spec(&pv);
        self.basis.project_spec(&mut out);
        out
    }

    pub fn apply_l(&self, nu: &EtaFunction) -> EtaFunction {
        self.space.from_spec(&self.apply_l_spec(&self.space.to_spec(nu)))
    }

    pub fn project(&self, v: &EtaFunction) -> EtaFunction {
        self.basis.project(self.space, v)
    }

    pub fn solve_l(&self, b: &SpecVec, rtol: f64) -> Result<(SpecVec, KrylovOutcome)> {
        let sp = self.space;
        let mut rhs = b.clone();
        self.basis.project_spec(&mut rhs);
        let (mut x, mut out) =
            minres(|v| self.apply_l_spec(v), |a, c| sp.spec_inner(a, c), &rhs, rtol, self.tol.max_krylov);
        // one restart on the true residual guards against loss of orthogonality
        let mut r = rhs.clone();
        r.axpy(-1.0, &self.apply_l_spec(&x));
        let bn = sp.spec_norm(&rhs);
        if bn > 0.0 && sp.spec_norm(&r) > rtol * bn * 10.0 {
            let (dx, o2) = minres(|v| self.apply_l_spec(v), |a, c| sp.spec_inner(a, c), &r, rtol, self.tol.max_krylov);
            x.axpy(1.0, &dx);
            out.iterations += o2.iterations;
            let mut r2 = rhs.clone();
            r2.axpy(-1.0, &self.apply_l_spec(&x));
            out.relative_residual = sp.spec_norm(&r2) / bn;
            out.converged = out.relative_residual <= rtol * 100.0;
        }
        if !out.converged {
            return Err(Error::IterationLimit { what: "MINRES on the constraint space", iterations: out.iterations });
        }
        Ok((x, out))
    }

    /// ‖L^{-1}‖ by inverse iteration from a seeded random start.
    pub fn inverse_bound(&self, seed: u64) -> Result<InverseBound> {
        let sp = self.space;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vertices = self.config.vertices();
        let noise = sp.sample(|x| {
            let env: f64 = vertices
                .iter()
                .map(|y| {
                    let d2: f64 = x.iter().enumerate().map(|(a, v)| (v - y[a]).powi(2)).sum();
                    (-0.5 * d2.sqrt()).exp()
                })
                .sum();
            env
        });
        let phi: Vec<f64> = noise.iter().map(|e| e * rng.gen_range(-1.0..1.0)).collect();
        let mut x = sp.to_spec(&sp.element(phi, rng.gen_range(-1.0..1.0)));
        self.basis.project_spec(&mut x);
        x.scale(1.0 / sp.spec_norm(&x));
        let mut last = 0.0;
        for it in 1..=self.tol.cbar_iterations {
            let (y, _) = self.solve_l(&x, 1e-9)?;
            let c = sp.spec_norm(&y);
            x = y;
            x.scale(1.0 / c);
            if (c - last).abs() <= self.tol.cbar_tol * c {
                let lx = self.apply_l_spec(&x);
                return Ok(InverseBound { c_bar: c, eigenvalue: sp.spec_inner(&x, &lx), iterations: it });
            }
            last = c;
        }
        Err(Error::IterationLimit { what: "inverse iteration for ‖L^{-1}‖", iterations: self.tol.cbar_iterations })
    }

    /// ν ← ν − L^{-1}Π∇S_η(W + ν) with L frozen at W.
    pub fn solve_auxiliary(&self) -> Result<AuxiliarySolution> {
        let sp = self.space;
        let tol = self.aux_tol();
        let mut nu = self.zero_spec();
        let mut history = Vec::new();
        let mut krylov_iterations = 0;
        for it in 0..=self.tol.max_outer {
            let mut g = self.gradient_at(&nu)?;
            self.basis.project_spec(&mut g);
            let gn = sp.spec_norm(&g);
            history.push(gn);
            if gn <= tol {
                let contraction = history.windows(2).skip(1).map(|w| w[1] / w[0]).fold(0.0, f64::max);
                return Ok(AuxiliarySolution {
                    nu: sp.from_spec(&nu),
                    iterations: it,
                    krylov_iterations,
                    history,
                    contraction,
                    projected_residual: gn,
                    tolerance: tol,
                });
            }
            if it == self.tol.max_outer {
                break;
            }
            let (d, out) = self.solve_l(&g, self.tol.krylov)?;
            krylov_iterations += out.iterations;
            nu.axpy(-1.0, &d);
        }
        let factor = history.windows(2).skip(1).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        Err(Error::NonContraction { factor, iterations: self.tol.max_outer })
    }

    /// Index of the dominant peak, δ_mΦ_m and Σ_{k≠m}Φ_k^p at every node.
    fn dominant(&self) -> (Vec<f64>, Vec<f64>) {
        let p = self.space.p;
        let n = self.w.phi.len();
        let mut base = vec![0.0; n];
        let mut others = vec![0.0; n];
        for i in 0..n {
            let m = (0..self.peaks.len()).max_by(|&a, &b| self.peaks[a][i].total_cmp(&self.peaks[b][i])).unwrap_or(0);
            base[i] = self.config.pattern.sign(m) * self.peaks[m][i];
            others[i] = (0..self.peaks.len()).filter(|&k| k != m).map(|k| self.peaks[k][i].powf(p)).sum();
        }
        (base, others)
    }

    /// S_η(W + ν) − K·C₀, free of the cancellation against K·C₀.
    pub fn reduced_difference(&self, nu: &EtaFunction) -> Result<f64> {
        let sp = self.space;
        sp.check(nu)?;
        let p = sp.p;
        let vol = sp.grid.cell_volume();
        let k = self.peaks.len();
        let mut pairs = 0.0;
        for a in 0..k {
            for b in a + 1..k {
                let s: f64 = self.peaks[a]
                    .iter()
                    .zip(&self.peaks[b])
                    .map(|(x, y)| 0.5 * (x * y.powf(p - 1.0) + y * x.powf(p - 1.0)))
                    .sum();
                pairs += self.config.pattern.sign(a) * self.config.pattern.sign(b) * s * vol;
            }
        }
        let nu_c = sp.spectral().forward(&nu.phi);
        let cross = sp.spectral().inner_coeffs(&self.w_coeffs, &nu_c);
        let nu_sq = sp.spectral().inner_coeffs(&nu_c, &nu_c);
        let q = self.w.q + nu.q;
        let charge = 0.5 * sp.beta * q * q;
        let u = self.w.sum(nu);
        let (base, others) = self.dominant();
        let rel = sp.integrate_relative(&u, &base, |b, rest| relative_power(b, rest, p));
        let lp_diff = rel - others.iter().sum::<f64>() * vol;
        Ok(pairs + cross + 0.5 * nu_sq + charge - lp_diff / p)
    }

    pub fn reduced_value(&self, nu: &EtaFunction) -> Result<f64> {
        Ok(self.profile.c0() * self.config.k() as f64 + self.reduced_difference(nu)?)
    }

    /// ∂_r W_{η,r} in coefficients.
    pub fn tangent(&self) -> SpecVec {
        let n = self.space.dim.value();
        let r = self.config.r;
        let mut t = self.zero_spec();
        for (k, y) in self.config.vertices().iter().enumerate() {
            let d = self.config.pattern.sign(k);
            for (i, yi) in y.iter().take(n).enumerate() {
                t.c.iter_mut().zip(self.basis.coefficients(k * n + i)).for_each(|(v, e)| *v -= d * yi / r * e);
            }
            let s = norm3(y);
            let (_, dphi) = self.profile.eval_with_derivative(s);
            t.q += d * dphi * s / r / self.space.beta;
        }
        t
    }

    /// Full and tangential gradient of S_η at W + ν.
    pub fn gradient_report(&self, nu: &EtaFunction) -> Result<(f64, f64)> {
        let sp = self.space;
        let g = self.gradient_at(&sp.to_spec(nu))?;
        let t = self.tangent();
        Ok((sp.spec_norm(&g), sp.spec_inner(&g, &t).abs() / sp.spec_norm(&t)))
    }
}

/// |b + x|^p − |b|^p, via expm1/ln1p when x is small against b.
pub fn relative_power(b: f64, x: f64, p: f64) -> f64 {
    if b == 0.0 {
        return x.abs().powf(p);
    }
    let t = x / b;
    if t > -0.5 {
        b.abs().powf(p) * (p * t.ln_1p()).exp_m1()
    } else {
        (b + x).abs().powf(p) - b.abs().powf(p)
    }
}

/// F_η(r) = K·C₀ − Φ(r)²/(2η) + χ·I(3r), with the formula's χ.
pub fn expansion_f(config: &PeakConfiguration, profile: &RadialProfile) -> Result<f64> {
    Ok(profile.c0() * config.k() as f64 + expansion_f_difference(config, profile)?)
}

/// F_η(r) − K·C₀.
pub fn expansion_f_difference(config: &PeakConfiguration, profile: &RadialProfile) -> Result<f64> {
    let r = config.r;
    Ok(-profile.eval(r).powi(2) / (2.0 * config.eta) + config.chi() * interaction_integral(profile, 3.0 * r)?)
}

/// −(Σδ_kΦ(|ζ^k|))²/(2β_η(1)) − Σ_{j<k} δ_jδ_k I(|ζ^j − ζ^k|): the leading
/// terms of S_η(W_{η,r}) − K·C₀ computed pair by pair.
pub fn expansion_f_pairwise_difference(config: &PeakConfiguration, profile: &RadialProfile) -> Result<f64> {
    let b = beta(&CouplingParams::for_eta(config.eta, config.dim)?, 1.0)?;
    let v = config.vertices();
    let s: f64 = v.iter().enumerate().map(|(k, y)| config.pattern.sign(k) * profile.eval(norm3(y))).sum();
    let mut pairs = 0.0;
    for a in 0..v.len() {
        for c in a + 1..v.len() {
            let d = distance(&v[a], &v[c]);
            if d <= profile.s_max {
                pairs += config.pattern.sign(a) * config.pattern.sign(c) * interaction_integral(profile, d)?;
            }
        }
    }
    Ok(-s * s / (2.0 * b) - pairs)
}

/// Maps f over items on up to `threads` scoped threads, preserving order.
pub fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = threads.max(1).min(items.len().max(1));
    if threads == 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker thread panicked")).collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSample {
    pub r: f64,
    /// σ_η(r) − K·C₀.
    pub sigma_diff: f64,
    /// F_η(r) − K·C₀.
    pub f_diff: f64,
    pub f_pairwise_diff: f64,
    /// S_η(W_{η,r}) − K·C₀.
    pub action_w_diff: f64,
    pub residual_w: f64,
    pub nu_norm: f64,
    pub aux_iterations: usize,
    pub projected_residual: f64,
}

impl ScanSample {
    pub fn expansion_error(&self) -> f64 {
        (self.sigma_diff - self.f_diff).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedScan {
    pub eta: f64,
    pub k_c0: f64,
    pub interval: AdmissibleInterval,
    pub grid: GridSpec,
    pub samples: Vec<ScanSample>,
    pub r_eta: f64,
    pub sigma_min_diff: f64,
    pub golden_evaluations: usize,
}

/// Grid spacing at which the spectral error of gridded Φ sits near 1e−11.
pub fn default_spacing(dim: Dimension) -> f64 {
    match dim {
        Dimension::Two => 0.15,
        Dimension::Three => 0.4,
    }
}

/// The reduction for one (N, p, sign pattern), reusable across η.
#[derive(Debug, Clone)]
pub struct Reducer<'a> {
    pub profile: &'a RadialProfile,
    pub pattern: SignPattern,
    pub h: f64,
    pub margin: f64,
    /// The constant c of R_η; None selects 8·χ_eff.
    pub c: Option<f64>,
    pub tol: Tolerances,
    pub threads: usize,
    pub seed: u64,
}

impl<'a> Reducer<'a> {
    pub fn new(profile: &'a RadialProfile, pattern: SignPattern) -> Self {
        Self {
            profile,
            pattern,
            h: default_spacing(profile.dim),
            margin: DEFAULT_MARGIN,
            c: None,
            tol: Tolerances::default(),
            threads: 1,
            seed: 7,
        }
    }

    pub fn dim(&self) -> Dimension {
        self.profile.dim
    }

    pub fn p(&self) -> f64 {
        self.profile.p
    }

    pub fn c_value(&self) -> f64 {
        self.c.unwrap_or(8.0 * chi_effective(&self.pattern))
    }

    pub fn interval(&self, eta: f64) -> Result<AdmissibleInterval> {
        admissible_interval(eta, self.c_value(), self.profile)
    }

    pub fn config(&self, eta: f64, r: f64) -> Result<PeakConfiguration> {
        PeakConfiguration::new(self.dim(), self.p(), eta, r, self.pattern.clone())
    }

    /// Field space holding the polygon for every r ≤ r_max.
    pub fn space(&self, eta: f64, r_max: f64) -> Result<FieldSpace> {
        let grid = fitted_grid(self.dim(), self.pattern.len(), r_max, self.h, self.margin)?;
        FieldSpace::for_eta(grid, eta, self.p())
    }

    pub fn workspace<'s>(&'s self, space: &'s FieldSpace, r: f64) -> Result<ReductionWorkspace<'s>> {
        ReductionWorkspace::new(space, self.profile, self.config(space.eta(), r)?, self.tol)
    }

    pub fn sample(&self, space: &FieldSpace, r: f64) -> Result<(ScanSample, EtaFunction)> {
        let ws = self.workspace(space, r)?;
        let aux = ws.solve_auxiliary()?;
        let sample = ScanSample {
            r,
            sigma_diff: ws.reduced_difference(&aux.nu)?,
            f_diff: expansion_f_difference(&ws.config, self.profile)?,
            f_pairwise_diff: expansion_f_pairwise_difference(&ws.config, self.profile)?,
            action_w_diff: ws.reduced_difference(&space.zero())?,
            residual_w: ws.residual,
            nu_norm: space.norm(&aux.nu),
            aux_iterations: aux.iterations,
            projected_residual: aux.projected_residual,
        };
        Ok((sample, aux.nu))
    }

    /// Log-uniform scan of σ_η over the closure of R_η, then golden section
    /// around the best sample.
    pub fn minimize(&self, eta: f64, points: usize) -> Result<(ReducedScan, FieldSpace)> {
        if points < 17 {
            return Err(Error::Config(format!("scan resolution must be at least 17, got {points}")));
        }
        let interval = self.interval(eta)?;
        let space = self.space(eta, interval.r_max)?;
        let (a, b) = (interval.r_min.ln(), interval.r_max.ln());
        let rs: Vec<f64> = (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect();
        let samples: Vec<ScanSample> =
            par_map(&rs, self.threads, |&r| self.sample(&space, r).map(|s| s.0)).into_iter().collect::<Result<_>>()?;
        let best = (0..points).min_by(|&i, &j| samples[i].sigma_diff.total_cmp(&samples[j].sigma_diff)).unwrap_or(0);
        if best == 0 || best == points - 1 {
            let side = if best == 0 { "lower" } else { "upper" };
            return Err(Error::BoundaryMinimum { r: samples[best].r, side });
        }
        let f = |r: f64| -> Result<f64> { Ok(self.sample(&space, r)?.0.sigma_diff) };
        let tol = 1e-6 * eta.ln();
        let (mut lo, mut hi) = (rs[best - 1], rs[best + 1]);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (f(x1)?, f(x2)?);
        let mut evaluations = 2;
        while hi - lo > tol {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2)?;
            }
            evaluations += 1;
        }
        let (mut r_eta, mut sigma_min) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        if samples[best].sigma_diff < sigma_min {
            r_eta = samples[best].r;
            sigma_min = samples[best].sigma_diff;
        }
        let scan = ReducedScan {
            eta,
            k_c0: self.profile.c0() * self.pattern.len() as f64,
            interval,
            grid: space.grid,
            samples,
            r_eta,
            sigma_min_diff: sigma_min,
            golden_evaluations: evaluations,
        };
        Ok((scan, space))
    }

    /// Minimises σ_η and assembles u_η = W_{η,r_η} + ν_{η,r_η}.
    pub fn solve(&self, eta: f64, points: usize) -> Result<Solution> {
        let start = Instant::now();
        let (scan, space) = self.minimize(eta, points)?;
        let ws = self.workspace(&space, scan.r_eta)?;
        let aux = ws.solve_auxiliary()?;
        let bound = ws.inverse_bound(self.seed)?;
        let (u, report) = assemble_solution(&ws, &aux, &bound, &scan)?;
        let mut report = report;
        report.elapsed_seconds = start.elapsed().as_secs_f64();
        Ok(Solution { space, u, scan, report })
    }
}

pub struct Solution {
    pub space: FieldSpace,
    pub u: EtaFunction,
    pub scan: ReducedScan,
    pub report: SolveReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakReport {
    pub vertex: Point,
    pub extremum: Point,
    pub value: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub dim: usize,
    pub p: f64,
    pub k: usize,
    pub pattern: String,
    pub eta: f64,
    pub log_eta: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub c: f64,
    pub r_eta: f64,
    pub r_eta_over_log_eta: f64,
    pub grid_intervals: [usize; 3],
    pub grid_spacing: f64,
    pub k_c0: f64,
    pub sigma_minus_k_c0: f64,
    pub f_minus_k_c0: f64,
    pub f_pairwise_minus_k_c0: f64,
    pub action_w_minus_k_c0: f64,
    pub expansion_error: f64,
    pub expansion_error_pairwise: f64,
    pub residual_w: f64,
    pub residual_scale: f64,
    pub nu_norm: f64,
    pub c_bar: f64,
    pub smallest_eigenvalue: f64,
    pub nu_over_c_bar_residual: f64,
    pub aux_iterations: usize,
    pub krylov_iterations: usize,
    pub contraction: f64,
    pub aux_tol: f64,
    pub projected_residual: f64,
    pub constraint_violation: f64,
    pub full_gradient: f64,
    pub tangential_gradient: f64,
    pub charge: f64,
    pub charge_over_leading: f64,
    pub distance_to_peaks: f64,
    pub peaks: Vec<PeakReport>,
    pub sign_changing: bool,
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

/// Verifies the peak structure of u = W + ν and collects the report.
pub fn assemble_solution(
    ws: &ReductionWorkspace<'_>,
    aux: &AuxiliarySolution,
    bound: &InverseBound,
    scan: &ReducedScan,
) -> Result<(EtaFunction, SolveReport)> {
    let sp = ws.space;
    let cfg = &ws.config;
    let u = ws.w.sum(&aux.nu);
    let values = sp.evaluate(&u);
    let vertices = cfg.vertices();
    let n = sp.dim.value();
    let origin = sp.origin_index();
    let mut best: Vec<(f64, Point)> = vec![(f64::NEG_INFINITY, [0.0; 3]); vertices.len()];
    sp.grid.for_each_node(|i, x| {
        if i == origin {
            return;
        }
        let mut pt = [0.0; 3];
        pt[..n].copy_from_slice(x);
        let k = (0..vertices.len())
            .min_by(|&a, &b| distance(&pt, &vertices[a]).total_cmp(&distance(&pt, &vertices[b])))
            .unwrap_or(0);
        let v = cfg.pattern.sign(k) * values[i];
        if v > best[k].0 {
            best[k] = (v, pt);
        }
    });
    let mut peaks = Vec::new();
    for (k, (v, pt)) in best.iter().enumerate() {
        let offset = distance(pt, &vertices[k]);
        if !(*v > 0.0) || offset > cfg.r / 10.0 {
            return Err(Error::PeakVerification(format!(
                "peak {} found at distance {offset:.3} from its vertex (allowed {:.3}), signed value {v:.3e}",
                k + 1,
                cfg.r / 10.0
            )));
        }
        peaks.push(PeakReport { vertex: vertices[k], extremum: *pt, value: cfg.pattern.sign(k) * v, offset });
    }
    let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let sign_changing = min < 0.0 && max > 0.0;
    if !sign_changing {
        return Err(Error::PeakVerification("solution does not change sign".into()));
    }
    let (full, tangential) = ws.gradient_report(&aux.nu)?;
    let nu_c = sp.spectral().forward(&aux.nu.phi);
    let q = u.q;
    let distance_to_peaks = (sp.spectral().inner_coeffs(&nu_c, &nu_c) + sp.beta * q * q).max(0.0).sqrt();
    let sigma = ws.reduced_difference(&aux.nu)?;
    let f = expansion_f_difference(cfg, ws.profile)?;
    let fp = expansion_f_pairwise_difference(cfg, ws.profile)?;
    let nu_norm = sp.norm(&aux.nu);
    let leading = ws.profile.eval(cfg.r) / sp.beta;
    let report = SolveReport {
        dim: n,
        p: cfg.p,
        k: cfg.k(),
        pattern: cfg.pattern.to_string(),
        eta: cfg.eta,
        log_eta: cfg.eta.ln(),
        r_min: scan.interval.r_min,
        r_max: scan.interval.r_max,
        c: scan.interval.c,
        r_eta: cfg.r,
        r_eta_over_log_eta: cfg.r / cfg.eta.ln(),
        grid_intervals: sp.grid.intervals,
        grid_spacing: sp.grid.h,
        k_c0: scan.k_c0,
        sigma_minus_k_c0: sigma,
        f_minus_k_c0: f,
        f_pairwise_minus_k_c0: fp,
        action_w_minus_k_c0: ws.reduced_difference(&sp.zero())?,
        expansion_error: (sigma - f).abs(),
        expansion_error_pairwise: (sigma - fp).abs(),
        residual_w: ws.residual,
        residual_scale: residual_scale(sp.dim, cfg.p, cfg.r, cfg.eta),
        nu_norm,
        c_bar: bound.c_bar,
        smallest_eigenvalue: bound.eigenvalue,
        nu_over_c_bar_residual: nu_norm / (bound.c_bar * ws.residual),
        aux_iterations: aux.iterations,
        krylov_iterations: aux.krylov_iterations,
        contraction: aux.contraction,
        aux_tol: aux.tolerance,
        projected_residual: aux.projected_residual,
        constraint_violation: ws.basis.constraint_violation(&nu_c) / nu_norm.max(f64::MIN_POSITIVE),
        full_gradient: full,
        tangential_gradient: tangential,
        charge: q,
        charge_over_leading: q / leading,
        distance_to_peaks,
        peaks,
        sign_changing,
        elapsed_seconds: 0.0,
    };
    Ok((u, report))
}
