//! Scaling equivalence between −Δ_α u + ωu = f(u) and −Δ_{α_ω} u + u = f(u).
//!
//! With ũ(x) = ω^{−1/(p−2)} u(ω^{−1/2}x) the ω-problem becomes the unit
//! problem at coupling α_ω, and a charge q in front of G_ω becomes
//! q·ω^{(N−2)/2 − 1/(p−2)} in front of G = G₁.
//!
//! The dilation is carried by the grid: the rescaled field keeps the nodal
//! values (times the amplitude factor) on a grid whose spacing is dilated by
//! the same factor. This is the exact sine-series dilation, so no
//! interpolation error enters and the round trip is exact up to rounding.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::closed_forms::{beta, CouplingParams, Dimension};
use crate::error::{Error, Result};
use crate::field_space::{EtaFunction, FieldSpace};
use crate::grid::GridSpec;

/// Largest dilation of the length scale allowed in one application.
pub const MAX_DILATION: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaProblem {
    pub alpha: f64,
    pub omega: f64,
    pub dim: Dimension,
    pub p: f64,
}

impl OmegaProblem {
    pub fn new(alpha: f64, omega: f64, dim: Dimension, p: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Domain(format!("ω must be positive, got {omega}")));
        }
        if !alpha.is_finite() {
            return Err(Error::Domain(format!("α must be finite, got {alpha}")));
        }
        Ok(Self { alpha, omega, dim, p })
    }

    /// The ω whose unit problem has coupling η, for a given α.
    pub fn for_eta(eta: f64, alpha: f64, dim: Dimension, p: f64) -> Result<Self> {
        let omega = match dim {
            Dimension::Two => (4.0 * PI * (eta - alpha)).exp(),
            Dimension::Three => {
                if !(alpha / eta > 0.0) {
                    return Err(Error::Domain(format!(
                        "α/η must be positive in three dimensions, got α = {alpha}, η = {eta}"
                    )));
                }
                (alpha / eta).powi(2)
            }
        };
        Self::new(alpha, omega, dim, p)
    }

    pub fn alpha_omega(&self) -> f64 {
        match self.dim {
            Dimension::Two => self.alpha + self.omega.sqrt().ln() / (2.0 * PI),
            Dimension::Three => self.alpha / self.omega.sqrt(),
        }
    }

    /// In three dimensions the existence regime is α > 0 with ω small; this
    /// is informational only.
    pub fn in_small_omega_regime(&self) -> bool {
        match self.dim {
            Dimension::Two => true,
            Dimension::Three => self.alpha > 0.0 && self.omega < 1.0,
        }
    }

    /// The space of −Δ_α + ω on `grid`.
    pub fn space(&self, grid: GridSpec) -> Result<FieldSpace> {
        FieldSpace::new(grid, self.alpha, self.omega, self.p)
    }

    /// The unit problem's space −Δ_{α_ω} + 1 on `grid`.
    pub fn unit_space(&self, grid: GridSpec) -> Result<FieldSpace> {
        FieldSpace::new(grid, self.alpha_omega(), 1.0, self.p)
    }
}

pub fn alpha_omega(alpha: f64, omega: f64, dim: Dimension) -> Result<f64> {
    Ok(OmegaProblem::new(alpha, omega, dim, 2.5)?.alpha_omega())
}

/// |β_{α_ω}(1) − ω^{−(N−2)/2} β_α(ω)|.
pub fn beta_consistency_check(alpha: f64, omega: f64, dim: Dimension) -> Result<f64> {
    let a_w = alpha_omega(alpha, omega, dim)?;
    let lhs = beta(&CouplingParams::new(a_w, dim), 1.0)?;
    let rhs = omega.powf(-(dim.as_f64() - 2.0) / 2.0) * beta(&CouplingParams::new(alpha, dim), omega)?;
    Ok((lhs - rhs).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// ω-problem → unit problem.
    ToUnit,
    /// Unit problem → ω-problem.
    FromUnit,
}

/// Amplitude, length and charge factors of one application.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFactors {
    pub amplitude: f64,
    /// New spacing over old spacing.
    pub dilation: f64,
    pub charge: f64,
}

pub fn scaling_factors(omega: f64, p: f64, dim: Dimension, direction: Direction) -> Result<ScalingFactors> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("ω must be positive, got {omega}")));
    }
    if !(p > 2.0) {
        return Err(Error::Domain(format!("p must exceed 2, got {p}")));
    }
    let s = match direction {
        Direction::ToUnit => 1.0,
        Direction::FromUnit => -1.0,
    };
    let e = 1.0 / (p - 2.0);
    Ok(ScalingFactors {
        amplitude: omega.powf(-s * e),
        dilation: omega.powf(s * 0.5),
        charge: omega.powf(s * ((dim.as_f64() - 2.0) / 2.0 - e)),
    })
}

/// Rescales u (living on `source`) and returns the field on the dilated grid
/// together with the target problem's space.
pub fn rescale_solution(
    source: &FieldSpace,
    u: &EtaFunction,
    problem: &OmegaProblem,
    direction: Direction,
) -> Result<(FieldSpace, EtaFunction)> {
    source.check(u)?;
    let (expect_alpha, expect_lambda) = match direction {
        Direction::ToUnit => (problem.alpha, problem.omega),
        Direction::FromUnit => (problem.alpha_omega(), 1.0),
    };
    if source.lambda != expect_lambda || (source.alpha - expect_alpha).abs() > 1e-12 * expect_alpha.abs().max(1.0) {
        return Err(Error::Incompatible(format!(
            "source space has (α, λ) = ({}, {}), expected ({expect_alpha}, {expect_lambda})",
            source.alpha, source.lambda
        )));
    }
    let f = scaling_factors(problem.omega, problem.p, problem.dim, direction)?;
    if !(1.0 / MAX_DILATION..=MAX_DILATION).contains(&f.dilation) {
        return Err(Error::Resolution(format!(
            "length dilation {:.4} lies outside [1/{MAX_DILATION}, {MAX_DILATION}]",
            f.dilation
        )));
    }
    let grid = GridSpec { h: source.grid.h * f.dilation, ..source.grid };
    let target = match direction {
        Direction::ToUnit => problem.unit_space(grid)?,
        Direction::FromUnit => problem.space(grid)?,
    };
    let phi = u.phi.iter().map(|v| f.amplitude * v).collect();
    let out = target.element(phi, f.charge * u.q);
    Ok((target, out))
}

/// Weak-form residual ‖∇S(u)‖ of the equation that `space` encodes.
pub fn weak_residual(space: &FieldSpace, u: &EtaFunction) -> Result<f64> {
    Ok(space.norm(&space.gradient(u)?))
}
