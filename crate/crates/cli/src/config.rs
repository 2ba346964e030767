//! Flat `key = value` run configuration. One file describes one experiment;
//! unknown or repeated keys are rejected so that typos cannot silently fall
//! back to defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use multipeak::ansatz::{SignPattern, DEFAULT_MARGIN};
use multipeak::closed_forms::{p_star, Dimension};
use multipeak::estimate_validator::ValidatorParams;
use multipeak::ground_state::GroundStateParams;
use multipeak::reduction::{default_spacing, Tolerances};
use multipeak::rescaling::Direction;
use serde_json::{json, Value};

use crate::CliError;

const KEYS: &[&str] = &[
    "dim",
    "p",
    "signs",
    "k",
    "eta",
    "log_eta",
    "r",
    "h",
    "margin",
    "c",
    "scan_points",
    "aux_rel",
    "krylov_tol",
    "seed",
    "threads",
    "alpha",
    "omega",
    "direction",
    "snapshot",
    "samples",
    "delta",
    "ball_scale",
    "epsilon",
    "angle_threshold",
    "gs_nodes",
    "gs_s_max",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: Dimension,
    pub p: f64,
    pub pattern: SignPattern,
    pub etas: Vec<f64>,
    /// Distance for `ansatz`; defaults to the midpoint of the admissible interval.
    pub r: Option<f64>,
    pub h: f64,
    pub margin: f64,
    pub c: Option<f64>,
    pub scan_points: usize,
    pub tol: Tolerances,
    pub seed: u64,
    pub threads: usize,
    pub omega: Option<f64>,
    pub alpha: Option<f64>,
    pub direction: Direction,
    pub snapshot: Option<PathBuf>,
    pub validator: ValidatorParams,
    pub ground_state: GroundStateParams,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn number(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v.parse().map_err(|_| config_err(format!("{key}: expected a number, got '{v}'")))?;
    if !x.is_finite() {
        return Err(config_err(format!("{key}: must be finite, got {v}")));
    }
    Ok(x)
}

fn integer<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| config_err(format!("{key}: expected a non-negative integer, got '{v}'")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|s| number(key, s.trim())).collect()
}

/// "+-+-", "+,-", or "1,-1".
fn signs(v: &str) -> Result<Vec<i32>, CliError> {
    let v = v.trim();
    if v.contains(',') {
        return v
            .split(',')
            .map(|s| match s.trim() {
                "+" | "+1" | "1" => Ok(1),
                "-" | "-1" => Ok(-1),
                other => Err(config_err(format!("signs: '{other}' is not ±1"))),
            })
            .collect();
    }
    v.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '+' => Ok(1),
            '-' => Ok(-1),
            other => Err(config_err(format!("signs: '{other}' is not + or -"))),
        })
        .collect()
}

/// Splits the text into key/value pairs, dropping `#` comments and blank lines.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected key = value, got '{line}'", n + 1)))?;
        let k = k.trim().to_ascii_lowercase();
        if !KEYS.contains(&k.as_str()) {
            return Err(config_err(format!("line {}: unknown key '{k}'", n + 1)));
        }
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(config_err(format!("line {}: key '{k}' given twice", n + 1)));
        }
    }
    Ok(out)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::from_pairs(&parse_pairs(text)?)
    }

    pub fn from_pairs(kv: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let get = |k: &str| kv.get(k).map(String::as_str);
        let num = |k: &str| get(k).map(|v| number(k, v)).transpose();

        let n: usize = get("dim").map(|v| integer("dim", v)).transpose()?.unwrap_or(2);
        let dim = Dimension::new(n).map_err(|_| config_err(format!("dim: N must be 2 or 3, got {n}")))?;
        let p = num("p")?.unwrap_or(2.7);
        check_exponent(dim, p)?;

        let deltas = match (get("signs"), get("k")) {
            (Some(_), Some(_)) => return Err(config_err("give either signs or k, not both")),
            (Some(s), None) => signs(s)?,
            (None, k) => {
                let k: usize = k.map(|v| integer("k", v)).transpose()?.unwrap_or(2);
                (0..k).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect()
            }
        };
        let pattern = SignPattern::new(&deltas).map_err(|e| config_err(e.to_string()))?;

        let etas = match (get("eta"), get("log_eta")) {
            (Some(_), Some(_)) => return Err(config_err("give either eta or log_eta, not both")),
            (Some(v), None) => list("eta", v)?,
            (None, Some(v)) => list("log_eta", v)?.into_iter().map(f64::exp).collect(),
            (None, None) => vec![6f64.exp()],
        };
        if let Some(e) = etas.iter().find(|&&e| !(e > std::f64::consts::E)) {
            return Err(config_err(format!("η must exceed e so that log η > 1, got {e}")));
        }

        let r = num("r")?;
        if let Some(r) = r {
            if !(r > 0.0) {
                return Err(config_err(format!("r must be positive, got {r}")));
            }
        }
        let h = num("h")?.unwrap_or(default_spacing(dim));
        let margin = num("margin")?.unwrap_or(DEFAULT_MARGIN);
        if !(h > 0.0) || !(margin > 0.0) {
            return Err(config_err(format!("h and margin must be positive, got h = {h}, margin = {margin}")));
        }
        let c = num("c")?;
        if let Some(c) = c {
            if !(c > 1.0) {
                return Err(config_err(format!("c must exceed 1, got {c}")));
            }
        }
        let scan_points: usize = get("scan_points").map(|v| integer("scan_points", v)).transpose()?.unwrap_or(33);
        if scan_points < 17 {
            return Err(config_err(format!("scan_points must be at least 17, got {scan_points}")));
        }
        let mut tol = Tolerances::default();
        if let Some(v) = num("aux_rel")? {
            tol.aux_rel = v;
        }
        if let Some(v) = num("krylov_tol")? {
            tol.krylov = v;
        }
        if !(tol.aux_rel > 0.0 && tol.aux_rel < 1.0) || !(tol.krylov > 0.0 && tol.krylov < 1.0) {
            return Err(config_err("aux_rel and krylov_tol must lie in (0, 1)"));
        }
        let seed: u64 = get("seed").map(|v| integer("seed", v)).transpose()?.unwrap_or(7);
        let threads: usize = get("threads").map(|v| integer("threads", v)).transpose()?.unwrap_or(1);
        if threads == 0 {
            return Err(config_err("threads must be at least 1"));
        }

        let omega = num("omega")?;
        if let Some(w) = omega {
            if !(w > 0.0) {
                return Err(config_err(format!("ω must be positive, got {w}")));
            }
        }
        let alpha = num("alpha")?;
        let direction = match get("direction") {
            None | Some("from_unit") => Direction::FromUnit,
            Some("to_unit") => Direction::ToUnit,
            Some(other) => return Err(config_err(format!("direction must be to_unit or from_unit, got '{other}'"))),
        };
        let snapshot = get("snapshot").map(PathBuf::from);

        let d = ValidatorParams::default();
        let validator = ValidatorParams {
            samples: get("samples").map(|v| integer("samples", v)).transpose()?.unwrap_or(d.samples),
            delta: num("delta")?.unwrap_or(d.delta),
            ball_scale: num("ball_scale")?.unwrap_or(d.ball_scale),
            epsilon: num("epsilon")?.unwrap_or(d.epsilon),
            angle_threshold: num("angle_threshold")?.unwrap_or(d.angle_threshold),
            seed,
        };
        validator.validate().map_err(|e| config_err(e.to_string()))?;

        let mut ground_state = GroundStateParams::new(dim, p).map_err(|e| config_err(e.to_string()))?;
        if let Some(v) = get("gs_nodes") {
            ground_state.nodes = integer("gs_nodes", v)?;
        }
        if let Some(v) = num("gs_s_max")? {
            ground_state.s_max = v;
        }
        ground_state.validate().map_err(|e| config_err(e.to_string()))?;

        Ok(Self {
            dim,
            p,
            pattern,
            etas,
            r,
            h,
            margin,
            c,
            scan_points,
            tol,
            seed,
            threads,
            omega,
            alpha,
            direction,
            snapshot,
            validator,
            ground_state,
        })
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.validator.seed = seed;
    }

    /// The configuration as written into every JSON artefact.
    pub fn to_json(&self) -> Value {
        json!({
            "dim": self.dim.value(),
            "p": self.p,
            "signs": self.pattern.to_string(),
            "eta": self.etas,
            "r": self.r,
            "h": self.h,
            "margin": self.margin,
            "c": self.c,
            "scan_points": self.scan_points,
            "aux_rel": self.tol.aux_rel,
            "krylov_tol": self.tol.krylov,
            "seed": self.seed,
            "alpha": self.alpha,
            "omega": self.omega,
            "direction": self.direction,
            "snapshot": self.snapshot.as_ref().map(|p| p.display().to_string()),
            "validator": self.validator,
            "ground_state": { "nodes": self.ground_state.nodes, "s_max": self.ground_state.s_max },
        })
    }
}

/// p_* < p ≤ 3 for N = 2 and p_* < p < 3 for N = 3.
pub fn check_exponent(dim: Dimension, p: f64) -> Result<(), CliError> {
    let ps = p_star();
    let ok = match dim {
        Dimension::Two => p > ps && p <= 3.0,
        Dimension::Three => p > ps && p < 3.0,
    };
    if ok {
        return Ok(());
    }
    let upper = if dim == Dimension::Two { "p ≤ 3" } else { "p < 3" };
    Err(config_err(format!(
        "p = {p} violates p_* < p with {upper} for N = {} (p_* = (9 + √113)/8 = {ps:.6})",
        dim.value()
    )))
}
