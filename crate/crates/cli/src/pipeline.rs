//! What each subcommand computes and writes. Every JSON artefact carries the
//! echoed configuration, the list of assertions with their outcome, and a
//! `timestamp_unix` field; everything else is a deterministic function of the
//! configuration and seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use multipeak::ansatz::{chi, chi_effective, polygon_vertices, pseudo_critical, residual_norm, residual_scale};
use multipeak::closed_forms::{
    beta, conjugate_exponent, ell, expansion_rate, p_star, p_star_threshold, residual_rate, CouplingParams, Dimension,
    EULER_GAMMA,
};
use multipeak::estimate_validator::run_validation;
use multipeak::field_space::{read_snapshot, write_snapshot, FieldSpace};
use multipeak::ground_state::{solve_ground_state, RadialProfile};
use multipeak::reduction::{par_map, ReducedScan, Reducer, Solution, SolveReport};
use multipeak::rescaling::{rescale_solution, scaling_factors, weak_residual, Direction, OmegaProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{CliError, RunConfig};

/// Prefixes a library error with the stage that raised it.
fn stage<T>(module: &str, r: multipeak::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| match CliError::from(e) {
        CliError::Config(m) => CliError::Config(format!("{module}: {m}")),
        CliError::Numerical(m) => CliError::Numerical(format!("{module}: {m}")),
        CliError::Io(m) => CliError::Io(format!("{module}: {m}")),
    })
}

#[derive(Debug, Clone)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    fn to_json(&self) -> Value {
        json!({ "name": self.name, "passed": self.passed, "detail": self.detail })
    }
}

/// Tag used in file names for one η.
pub fn eta_tag(eta: f64) -> String {
    format!("{eta:.6e}")
}

pub struct Pipeline {
    pub config: RunConfig,
    pub out: PathBuf,
    /// Every assertion checked so far, in order.
    pub assertions: Vec<Assertion>,
}

impl Pipeline {
    pub fn new(config: RunConfig, out: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
        Ok(Self { config, out: out.to_path_buf(), assertions: Vec::new() })
    }

    /// Ok iff every assertion recorded so far holds.
    pub fn verdict(&self) -> Result<(), CliError> {
        let failed: Vec<&str> = self.assertions.iter().filter(|a| !a.passed).map(|a| a.name.as_str()).collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Numerical(format!("assertions failed: {}", failed.join(", "))))
        }
    }

    fn write_json(&mut self, name: &str, command: &str, body: Value, checks: Vec<Assertion>) -> Result<(), CliError> {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let passed = checks.iter().all(|a| a.passed);
        let doc = json!({
            "command": command,
            "timestamp_unix": timestamp,
            "config": self.config.to_json(),
            "results": body,
            "assertions": checks.iter().map(Assertion::to_json).collect::<Vec<_>>(),
            "passed": passed,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(self.out.join(name), text + "\n")?;
        self.assertions.extend(checks);
        Ok(())
    }

    fn reducer<'a>(&self, profile: &'a RadialProfile) -> Reducer<'a> {
        let cfg = &self.config;
        let mut red = Reducer::new(profile, cfg.pattern.clone());
        red.h = cfg.h;
        red.margin = cfg.margin;
        red.c = cfg.c;
        red.tol = cfg.tol;
        red.threads = cfg.threads;
        red.seed = cfg.seed;
        red
    }

    pub fn constants(&mut self) -> Result<(), CliError> {
        let cfg = self.config.clone();
        let ps = p_star();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut mismatches = 0;
        for _ in 0..10_000 {
            let p: f64 = rng.gen_range(2.0001..3.0);
            let composite = 2.0 * (2.0 * (p - 2.0) + 1.0 / conjugate_exponent(p));
            if stage("closed_forms", p_star_threshold(p))? != (composite > 3.0) {
                mismatches += 1;
            }
        }
        let betas: Vec<Value> = cfg
            .etas
            .iter()
            .map(|&eta| -> Result<Value, CliError> {
                let b = stage("closed_forms", CouplingParams::for_eta(eta, cfg.dim).and_then(|c| beta(&c, 1.0)))?;
                Ok(json!({ "eta": eta, "beta_eta_1": b }))
            })
            .collect::<Result<_, _>>()?;
        let body = json!({
            "p_star": ps,
            "euler_gamma": EULER_GAMMA,
            "p": cfg.p,
            "conjugate_exponent": conjugate_exponent(cfg.p),
            "above_p_star": stage("closed_forms", p_star_threshold(cfg.p))?,
            "residual_rate": residual_rate(cfg.p),
            "expansion_rate": expansion_rate(cfg.p),
            "green_tail_constant": cfg.dim.green_tail_constant(),
            "ell": (2..=8).map(|k| json!({ "k": k, "ell": ell(k) })).collect::<Vec<_>>(),
            "chi": stage("ansatz", chi(&cfg.pattern, cfg.p))?,
            "chi_effective": chi_effective(&cfg.pattern),
            "beta": betas,
        });
        let checks = vec![
            Assertion::new("p_star_bracket", ps > 2.45 && ps < 2.46, format!("p_* = {ps:.12}")),
            Assertion::new(
                "p_star_threshold_equivalence",
                mismatches == 0,
                format!("{mismatches} disagreements on 10000 samples"),
            ),
        ];
        self.write_json("constants.json", "constants", body, checks)
    }

    /// Loads Φ from the cache when its header matches the configured radial
    /// grid, otherwise solves and (re)writes the cache.
    pub fn ground_state(&mut self) -> Result<RadialProfile, CliError> {
        let gs = self.config.ground_state;
        let stem = format!("ground_state_{}_{}", gs.dim.value(), gs.p);
        let path = self.out.join(format!("{stem}.csv"));
        let cached = RadialProfile::read_cache(&path)
            .ok()
            .filter(|pr| pr.dim == gs.dim && pr.p == gs.p && pr.node_count() == gs.nodes && pr.s_max == gs.s_max);
        let profile = match cached {
            Some(pr) => {
                eprintln!("ground state: reusing {}", path.display());
                pr
            }
            None => {
                let pr = stage("ground_state", solve_ground_state(&gs))?;
                stage("ground_state", pr.write_cache(&path))?;
                pr
            }
        };
        let n1 = (gs.dim.as_f64() - 1.0) / 2.0;
        let tail = |s: f64| s.powf(n1) * s.exp() * profile.eval(s);
        let ratio_a = tail(12.0) / profile.tail_amplitude;
        let body = json!({
            "dim": gs.dim.value(),
            "p": gs.p,
            "nodes": profile.node_count(),
            "s_max": profile.s_max,
            "peak": profile.peak(),
            "c0": profile.c0(),
            "h1_norm_sq": profile.h1_norm_sq(),
            "theta": profile.theta,
            "tail_amplitude": profile.tail_amplitude,
            "matched_radius": profile.matched_radius,
            "derivative_jump": profile.derivative_jump,
            "ode_residual": profile.ode_residual(),
            "tail_ratio_12_over_amplitude": ratio_a,
            "tail_ratio_12_over_theta": tail(12.0) / profile.theta,
        });
        let checks = vec![
            Assertion::new("ode_residual", profile.ode_residual() < 1e-8, format!("{:.3e}", profile.ode_residual())),
            Assertion::new("tail_ratio", (ratio_a - 1.0).abs() <= 0.02, format!("{ratio_a:.6} at s = 12")),
        ];
        self.write_json(&format!("{stem}.json"), "ground-state", body, checks)?;
        Ok(profile)
    }

    pub fn ansatz(&mut self, profile: &RadialProfile) -> Result<(), CliError> {
        let cfg = self.config.clone();
        let red = self.reducer(profile);
        let mut rows = Vec::new();
        let mut checks = Vec::new();
        for &eta in &cfg.etas {
            let interval = stage("ansatz", red.interval(eta))?;
            let r = cfg.r.unwrap_or(interval.midpoint());
            let space = stage("ansatz", red.space(eta, interval.r_max.max(r)))?;
            let pc = stage("ansatz", red.config(eta, r))?;
            let w = stage("ansatz", pseudo_critical(&pc, profile, &space))?;
            let res = stage("field_space", residual_norm(&space, &w))?;
            let tag = eta_tag(eta);
            stage("field_space", write_snapshot(&self.out.join(format!("ansatz_{tag}.bin")), &space, &w))?;
            checks.push(Assertion::new(
                format!("r_in_interval[{tag}]"),
                interval.contains(r),
                format!("r = {r:.6} in ({:.6}, {:.6})", interval.r_min, interval.r_max),
            ));
            checks.push(Assertion::new(format!("residual_finite[{tag}]"), res.is_finite(), format!("{res:.3e}")));
            rows.push(json!({
                "eta": eta,
                "interval": interval,
                "r": r,
                "vertices": polygon_vertices(cfg.pattern.len(), r, cfg.dim),
                "chi": pc.chi(),
                "charge": w.q,
                "residual": res,
                "residual_scale": residual_scale(cfg.dim, cfg.p, r, eta),
                "grid_intervals": space.grid.intervals,
                "grid_spacing": space.grid.h,
            }));
        }
        self.write_json("ansatz.json", "ansatz", Value::Array(rows), checks)
    }

    fn write_scan(&self, scan: &ReducedScan) -> Result<(), CliError> {
        let mut csv = String::from(
            "r,sigma,F,abs_sigma_minus_F,sigma_minus_KC0,F_minus_KC0,F_pairwise_minus_KC0,abs_sigma_minus_F_pairwise,\
             S_W_minus_KC0,residual_W,nu_norm,aux_iterations,projected_residual\n",
        );
        for s in &scan.samples {
            writeln!(
                csv,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e}",
                s.r,
                scan.k_c0 + s.sigma_diff,
                scan.k_c0 + s.f_diff,
                s.expansion_error(),
                s.sigma_diff,
                s.f_diff,
                s.f_pairwise_diff,
                (s.sigma_diff - s.f_pairwise_diff).abs(),
                s.action_w_diff,
                s.residual_w,
                s.nu_norm,
                s.aux_iterations,
                s.projected_residual
            )
            .expect("string write");
        }
        std::fs::write(self.out.join(format!("scan_{}.csv", eta_tag(scan.eta))), csv)?;
        Ok(())
    }

    fn scan_checks(scan: &ReducedScan) -> Vec<Assertion> {
        let tag = eta_tag(scan.eta);
        let monotone = scan.samples.windows(2).all(|w| w[1].r > w[0].r);
        let interior = scan.interval.contains(scan.r_eta);
        vec![
            Assertion::new(format!("scan_monotone[{tag}]"), monotone, "r column strictly increasing"),
            Assertion::new(
                format!("interior_minimum[{tag}]"),
                interior,
                format!("r_η = {:.6} in ({:.6}, {:.6})", scan.r_eta, scan.interval.r_min, scan.interval.r_max),
            ),
        ]
    }

    /// One (scan, space) per η; η values run in parallel when threads allow.
    fn per_eta<T: Send>(
        &self,
        profile: &RadialProfile,
        f: impl Fn(&Reducer<'_>, f64) -> multipeak::Result<T> + Sync,
    ) -> Result<Vec<T>, CliError> {
        let mut red = self.reducer(profile);
        let etas = &self.config.etas;
        let outer = self.config.threads.min(etas.len()).max(1);
        if outer > 1 {
            red.threads = (self.config.threads / outer).max(1);
        }
        par_map(etas, outer, |&eta| f(&red, eta)).into_iter().map(|r| stage("reduction", r)).collect()
    }

    pub fn reduce(&mut self, profile: &RadialProfile) -> Result<Vec<ReducedScan>, CliError> {
        let points = self.config.scan_points;
        let scans = self.per_eta(profile, |red, eta| red.minimize(eta, points).map(|(scan, _)| scan))?;
        let mut checks = Vec::new();
        for scan in &scans {
            self.write_scan(scan)?;
            checks.extend(Self::scan_checks(scan));
        }
        let body: Vec<Value> = scans
            .iter()
            .map(|s| {
                json!({
                    "eta": s.eta,
                    "interval": s.interval,
                    "r_eta": s.r_eta,
                    "r_eta_over_log_eta": s.r_eta / s.eta.ln(),
                    "k_c0": s.k_c0,
                    "sigma_min_minus_k_c0": s.sigma_min_diff,
                    "golden_evaluations": s.golden_evaluations,
                    "grid_intervals": s.grid.intervals,
                    "grid_spacing": s.grid.h,
                })
            })
            .collect();
        self.write_json("reduce.json", "reduce", Value::Array(body), checks)?;
        Ok(scans)
    }

    fn solve_checks(r: &SolveReport) -> Vec<Assertion> {
        let tag = eta_tag(r.eta);
        let bound = 2.0 * r.c_bar * r.residual_w;
        vec![
            Assertion::new(
                format!("sign_changing[{tag}]"),
                r.sign_changing,
                format!("{} peaks verified", r.peaks.len()),
            ),
            Assertion::new(
                format!("nu_bound[{tag}]"),
                r.nu_norm <= bound,
                format!("‖ν‖ = {:.3e} vs 2C̄‖∇S(W)‖ = {bound:.3e}", r.nu_norm),
            ),
            Assertion::new(
                format!("projected_residual[{tag}]"),
                r.projected_residual <= r.aux_tol,
                format!("{:.3e} vs tolerance {:.3e}", r.projected_residual, r.aux_tol),
            ),
        ]
    }

    pub fn solve(&mut self, profile: &RadialProfile) -> Result<Vec<SolveReport>, CliError> {
        let points = self.config.scan_points;
        let solutions: Vec<Solution> = self.per_eta(profile, |red, eta| red.solve(eta, points))?;
        let mut checks = Vec::new();
        let mut reports = Vec::new();
        for sol in solutions {
            let tag = eta_tag(sol.report.eta);
            self.write_scan(&sol.scan)?;
            stage("field_space", write_snapshot(&self.out.join(format!("solution_{tag}.bin")), &sol.space, &sol.u))?;
            checks.extend(Self::scan_checks(&sol.scan));
            checks.extend(Self::solve_checks(&sol.report));
            eprintln!("η = {tag}: r_η = {:.6}, solved in {:.1} s", sol.report.r_eta, sol.report.elapsed_seconds);
            reports.push(sol.report);
        }
        let body = serde_json::to_value(&reports).map_err(|e| CliError::Io(e.to_string()))?;
        self.write_json("report.json", "solve", body, checks)?;
        Ok(reports)
    }

    pub fn rescale(&mut self) -> Result<(), CliError> {
        let cfg = self.config.clone();
        let path = match &cfg.snapshot {
            Some(p) => p.clone(),
            None => self.out.join(format!("solution_{}.bin", eta_tag(cfg.etas[0]))),
        };
        let snap = stage("rescaling", read_snapshot(&path))?;
        let dim = snap.grid.dim;
        let (omega, alpha) = match cfg.direction {
            Direction::FromUnit => {
                if snap.lambda != 1.0 {
                    return Err(CliError::Config(format!(
                        "rescaling: from_unit needs a snapshot with λ = 1, got λ = {}",
                        snap.lambda
                    )));
                }
                let omega = cfg.omega.ok_or_else(|| CliError::Config("rescaling: from_unit needs omega".into()))?;
                // invert α_ω = α + ln ω/(4π) (N = 2) or α/√ω (N = 3)
                let alpha = match dim {
                    Dimension::Two => snap.eta - omega.ln() / (4.0 * std::f64::consts::PI),
                    Dimension::Three => snap.eta * omega.sqrt(),
                };
                (omega, alpha)
            }
            Direction::ToUnit => {
                if let Some(w) = cfg.omega {
                    if w != snap.lambda {
                        return Err(CliError::Config(format!(
                            "rescaling: omega = {w} disagrees with the snapshot's λ = {}",
                            snap.lambda
                        )));
                    }
                }
                (snap.lambda, snap.eta)
            }
        };
        if let Some(a) = cfg.alpha {
            if (a - alpha).abs() > 1e-12 * alpha.abs().max(1.0) {
                return Err(CliError::Config(format!(
                    "rescaling: alpha = {a} is inconsistent with the snapshot (implies α = {alpha})"
                )));
            }
        }
        let problem = stage("rescaling", OmegaProblem::new(alpha, omega, dim, snap.p))?;
        let source = stage("field_space", FieldSpace::new(snap.grid, snap.eta, snap.lambda, snap.p))?;
        let (target, v) = stage("rescaling", rescale_solution(&source, &snap.field, &problem, cfg.direction))?;
        let back_dir = match cfg.direction {
            Direction::ToUnit => Direction::FromUnit,
            Direction::FromUnit => Direction::ToUnit,
        };
        let (_, back) = stage("rescaling", rescale_solution(&target, &v, &problem, back_dir))?;
        let round_trip = source.norm(&back.difference(&snap.field)) / source.norm(&snap.field);
        let res_source = stage("rescaling", weak_residual(&source, &snap.field))?;
        let res_target = stage("rescaling", weak_residual(&target, &v))?;
        let ratio = res_target / res_source;
        let out_name = format!("rescaled_{}.bin", eta_tag(target.alpha));
        stage("field_space", write_snapshot(&self.out.join(&out_name), &target, &v))?;
        let f = stage("rescaling", scaling_factors(omega, snap.p, dim, cfg.direction))?;
        let body = json!({
            "source": path.display().to_string(),
            "output": out_name,
            "direction": cfg.direction,
            "alpha": alpha,
            "omega": omega,
            "alpha_omega": problem.alpha_omega(),
            "small_omega_regime": problem.in_small_omega_regime(),
            "amplitude_factor": f.amplitude,
            "length_dilation": f.dilation,
            "charge_factor": f.charge,
            "target_alpha": target.alpha,
            "target_lambda": target.lambda,
            "target_grid_spacing": target.grid.h,
            "residual_source": res_source,
            "residual_target": res_target,
            "residual_ratio": ratio,
            "round_trip_error": round_trip,
        });
        let checks = vec![
            Assertion::new("residual_ratio", ratio <= 10.0, format!("{ratio:.4}")),
            Assertion::new("round_trip", round_trip <= 1e-10, format!("{round_trip:.3e}")),
        ];
        self.write_json("rescale.json", "rescale", body, checks)
    }

    pub fn validate(&mut self, profile: &RadialProfile) -> Result<(), CliError> {
        let rep = stage("estimate_validator", run_validation(profile, &self.config.validator))?;
        let mut checks = vec![
            Assertion::new(
                "elementary_1",
                rep.elementary_1.passed(),
                format!("{} violations", rep.elementary_1.violations),
            ),
            Assertion::new(
                "elementary_2",
                rep.elementary_2.iter().all(|(_, _, r)| r.passed()),
                format!("{} violations", rep.elementary_2.iter().map(|(_, _, r)| r.violations).sum::<usize>()),
            ),
            Assertion::new(
                "elementary_3",
                rep.elementary_3.passed(),
                format!("fitted {:.4} vs bound {:.4}", rep.elementary_3.fitted, rep.elementary_3.bound),
            ),
            Assertion::new(
                "angle",
                rep.angle.violations == 0 && rep.angle.violations_sharp == 0,
                format!("{} + {} violations", rep.angle.violations_sharp, rep.angle.violations),
            ),
            Assertion::new(
                "greens_expansion",
                rep.greens_expansion.passed,
                format!("fitted power {:.3}", rep.greens_expansion.fit.power),
            ),
            Assertion::new(
                "symmetric_integral",
                rep.symmetric_integral.passed,
                format!("spread {:.3e}", rep.symmetric_integral.max_relative_spread),
            ),
            Assertion::new(
                "derivative_pairs",
                rep.derivative_pairs.passed,
                format!("rate {:.4}", rep.derivative_pairs.rate),
            ),
        ];
        for f in &rep.decay_fits {
            checks.push(Assertion::new(
                format!("decay[{}]", f.label),
                f.passed,
                format!(
                    "rate {:.4} (margin {:.3}), power {:.4} (margin {:.3})",
                    f.rate, f.rate_margin, f.power, f.power_margin
                ),
            ));
        }
        let body = serde_json::to_value(&rep).map_err(|e| CliError::Io(e.to_string()))?;
        self.write_json("validate.json", "validate", body, checks)
    }

    /// Every stage, then the plot table (η, r_η, r_η/log η, residual, expansion error).
    pub fn sweep(&mut self) -> Result<(), CliError> {
        self.constants()?;
        let profile = self.ground_state()?;
        self.validate(&profile)?;
        let reports = self.solve(&profile)?;
        let mut csv = String::from(
            "eta,log_eta,r_eta,r_eta_over_log_eta,residual_W,full_gradient,expansion_error,expansion_error_pairwise,\
             nu_norm,c_bar,distance_to_peaks\n",
        );
        for r in &reports {
            writeln!(
                csv,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.eta,
                r.log_eta,
                r.r_eta,
                r.r_eta_over_log_eta,
                r.residual_w,
                r.full_gradient,
                r.expansion_error,
                r.expansion_error_pairwise,
                r.nu_norm,
                r.c_bar,
                r.distance_to_peaks
            )
            .expect("string write");
        }
        std::fs::write(self.out.join("sweep.csv"), csv)?;
        let dist: Vec<f64> = reports.iter().map(|r| r.distance_to_peaks).collect();
        let ratio: Vec<f64> = reports.iter().map(|r| (r.r_eta_over_log_eta - 1.0).abs()).collect();
        let cbar: Vec<f64> = reports.iter().map(|r| r.c_bar).collect();
        let cbar_mean = cbar.iter().sum::<f64>() / cbar.len().max(1) as f64;
        let cbar_spread = cbar.iter().map(|c| (c / cbar_mean - 1.0).abs()).fold(0.0, f64::max);
        let body = json!({
            "eta": reports.iter().map(|r| r.eta).collect::<Vec<_>>(),
            "r_eta_over_log_eta": reports.iter().map(|r| r.r_eta_over_log_eta).collect::<Vec<_>>(),
            "distance_to_peaks": dist,
            "c_bar": cbar,
            "ratio_deviation_shrinking": ratio.windows(2).all(|w| w[1] < w[0]),
        });
        let checks = vec![
            Assertion::new(
                "distance_to_peaks_decreasing",
                dist.windows(2).all(|w| w[1] < w[0]),
                dist.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(" > "),
            ),
            Assertion::new("c_bar_stable", cbar_spread <= 0.2, format!("max deviation {:.1}%", 100.0 * cbar_spread)),
        ];
        self.write_json("sweep.json", "sweep", body, checks)
    }
}
