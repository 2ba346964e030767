//! Uniform Dirichlet boxes and the sine transform that diagonalises −Δ + λ.
//!
//! Axis i has M_i intervals of width h and M_i − 1 interior nodes; the point
//! 0 is always an interior node. Fields are stored row-major over interior
//! nodes with axis 0 slowest.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::closed_forms::Dimension;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: Dimension,
    pub h: f64,
    /// Intervals per axis (unused axes hold 2).
    pub intervals: [usize; 3],
    /// 1-based interior index of the origin along each axis.
    pub origin: [usize; 3],
}

fn fast_size(n: usize) -> usize {
    let mut best = usize::MAX;
    let mut p2 = 1usize;
    while p2 < 4 * n {
        for f in [1, 3] {
            let m = p2 * f;
            if m >= n && m < best {
                best = m;
            }
        }
        p2 *= 2;
    }
    best
}

impl GridSpec {
    /// Centred cube [−L, L]^N with M intervals per axis.
    pub fn cube(dim: Dimension, half_width: f64, m: usize) -> Result<Self> {
        if m < 4 || !m.is_multiple_of(2) {
            return Err(Error::Config(format!("nodes per axis must be even and ≥ 4, got {m}")));
        }
        if !(half_width > 0.0) {
            return Err(Error::Config("half-width must be positive".into()));
        }
        let mut intervals = [2; 3];
        let mut origin = [1; 3];
        for a in 0..dim.value() {
            intervals[a] = m;
            origin[a] = m / 2;
        }
        Ok(Self { dim, h: 2.0 * half_width / m as f64, intervals, origin })
    }

    /// Smallest FFT-friendly box with spacing h containing [lo_i, hi_i] on each axis.
    pub fn fitted(dim: Dimension, h: f64, lo: &[f64], hi: &[f64]) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Config("grid spacing must be positive".into()));
        }
        let mut intervals = [2; 3];
        let mut origin = [1; 3];
        for a in 0..dim.value() {
            if !(lo[a] < 0.0 && hi[a] > 0.0) {
                return Err(Error::Geometry("box must contain the origin in its interior".into()));
            }
            let below = (-lo[a] / h).ceil() as usize;
            let above = (hi[a] / h).ceil() as usize;
            let m = fast_size(below + above);
            let extra = m - below - above;
            intervals[a] = m;
            origin[a] = below + extra / 2;
        }
        Ok(Self { dim, h, intervals, origin })
    }

    pub fn axes(&self) -> usize {
        self.dim.value()
    }

    pub fn nodes_on_axis(&self, a: usize) -> usize {
        self.intervals[a] - 1
    }

    pub fn len(&self) -> usize {
        (0..self.axes()).map(|a| self.nodes_on_axis(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.axes() as i32)
    }

    pub fn lower(&self, a: usize) -> f64 {
        -(self.origin[a] as f64) * self.h
    }

    pub fn upper(&self, a: usize) -> f64 {
        (self.intervals[a] - self.origin[a]) as f64 * self.h
    }

    /// Coordinate of interior node j (0-based) on axis a.
    #[inline]
    pub fn coord(&self, a: usize, j: usize) -> f64 {
        (j as f64 + 1.0 - self.origin[a] as f64) * self.h
    }

    pub fn axis_coords(&self, a: usize) -> Vec<f64> {
        (0..self.nodes_on_axis(a)).map(|j| self.coord(a, j)).collect()
    }

    pub fn origin_index(&self) -> usize {
        let mut idx = 0;
        for a in 0..self.axes() {
            idx = idx * self.nodes_on_axis(a) + (self.origin[a] - 1);
        }
        idx
    }

    /// Calls f(flat index, point) for every interior node.
    pub fn for_each_node(&self, mut f: impl FnMut(usize, &[f64])) {
        let xs: Vec<Vec<f64>> = (0..self.axes()).map(|a| self.axis_coords(a)).collect();
        let mut idx = 0;
        match self.axes() {
            2 => {
                for &x in &xs[0] {
                    for &y in &xs[1] {
                        f(idx, &[x, y]);
                        idx += 1;
                    }
                }
            }
            _ => {
                for &x in &xs[0] {
                    for &y in &xs[1] {
                        for &z in &xs[2] {
                            f(idx, &[x, y, z]);
                            idx += 1;
                        }
                    }
                }
            }
        }
    }

    /// Distance from the point to the nearest box face.
    pub fn clearance(&self, x: &[f64]) -> f64 {
        (0..self.axes()).map(|a| (x[a] - self.lower(a)).min(self.upper(a) - x[a])).fold(f64::INFINITY, f64::min)
    }

    /// Flat indices of the nodes adjacent to the boundary.
    pub fn boundary_layer(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let n: Vec<usize> = (0..self.axes()).map(|a| self.nodes_on_axis(a)).collect();
        let mut idx = 0;
        let mut pos = vec![0usize; self.axes()];
        let total = self.len();
        while idx < total {
            if pos.iter().zip(&n).any(|(&p, &m)| p == 0 || p + 1 == m) {
                out.push(idx);
            }
            idx += 1;
            for a in (0..pos.len()).rev() {
                pos[a] += 1;
                if pos[a] < n[a] {
                    break;
                }
                pos[a] = 0;
            }
        }
        out
    }

    pub fn fingerprint(&self) -> (u64, [usize; 3], [usize; 3]) {
        (self.h.to_bits(), self.intervals, self.origin)
    }
}

/// Type-I sine transform along every axis plus the spectral symbol of −Δ + λ.
pub struct Spectral {
    grid: GridSpec,
    plans: Vec<Arc<dyn Fft<f64>>>,
    /// κ² + λ in coefficient layout.
    symbol: Vec<f64>,
    /// Π_i 2/M_i, maps DST output to sine coefficients.
    coeff_scale: f64,
    /// h^N Π_i M_i/2, turns Σ symbol·c·d into the discrete H¹ product.
    pub(crate) inner_scale: f64,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: &GridSpec, lambda: f64) -> Self {
        let mut planner = FftPlanner::new();
        let plans: Vec<Arc<dyn Fft<f64>>> =
            (0..grid.axes()).map(|a| planner.plan_fft_forward(2 * grid.intervals[a])).collect();
        let kappa2: Vec<Vec<f64>> = (0..grid.axes())
            .map(|a| {
                let m = grid.intervals[a] as f64;
                (1..grid.intervals[a]).map(|k| (std::f64::consts::PI * k as f64 / (m * grid.h)).powi(2)).collect()
            })
            .collect();
        let mut symbol = Vec::with_capacity(grid.len());
        match grid.axes() {
            2 => {
                for a in &kappa2[0] {
                    for b in &kappa2[1] {
                        symbol.push(a + b + lambda);
                    }
                }
            }
            _ => {
                for a in &kappa2[0] {
                    for b in &kappa2[1] {
                        for c in &kappa2[2] {
                            symbol.push(a + b + c + lambda);
                        }
                    }
                }
            }
        }
        let coeff_scale = (0..grid.axes()).map(|a| 2.0 / grid.intervals[a] as f64).product();
        let inner_scale = grid.cell_volume() / coeff_scale;
        Self { grid: *grid, plans, symbol, coeff_scale, inner_scale }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    fn dst_axis(&self, data: &mut [f64], a: usize) {
        let n: Vec<usize> = (0..self.grid.axes()).map(|b| self.grid.nodes_on_axis(b)).collect();
        let len = n[a];
        let m = len + 1;
        let stride: usize = n[a + 1..].iter().product();
        let outer: usize = n[..a].iter().product();
        let plan = &self.plans[a];
        let lines: Vec<usize> = (0..outer).flat_map(|o| (0..stride).map(move |i| o * len * stride + i)).collect();
        // two real lines per complex transform
        let batch = 64usize;
        let mut buf = vec![Complex::new(0.0, 0.0); 2 * m * batch];
        let mut scratch = vec![Complex::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for chunk in lines.chunks(2 * batch) {
            let pairs = chunk.len().div_ceil(2);
            let work = &mut buf[..2 * m * pairs];
            for (pi, pair) in chunk.chunks(2).enumerate() {
                let z = &mut work[2 * m * pi..2 * m * (pi + 1)];
                z[0] = Complex::new(0.0, 0.0);
                z[m] = Complex::new(0.0, 0.0);
                for j in 0..len {
                    let re = data[pair[0] + j * stride];
                    let im = if pair.len() > 1 { data[pair[1] + j * stride] } else { 0.0 };
                    z[j + 1] = Complex::new(re, im);
                    z[2 * m - 1 - j] = Complex::new(-re, -im);
                }
            }
            plan.process_with_scratch(work, &mut scratch);
            for (pi, pair) in chunk.chunks(2).enumerate() {
                let z = &work[2 * m * pi..2 * m * (pi + 1)];
                for k in 0..len {
                    let v = z[k + 1];
                    data[pair[0] + k * stride] = -0.5 * v.im;
                    if pair.len() > 1 {
                        data[pair[1] + k * stride] = 0.5 * v.re;
                    }
                }
            }
        }
    }

    /// Unnormalised multi-dimensional DST-I, in place.
    pub fn dst(&self, data: &mut [f64]) {
        for a in 0..self.grid.axes() {
            self.dst_axis(data, a);
        }
    }

    /// Nodal values → sine coefficients.
    pub fn forward(&self, values: &[f64]) -> Vec<f64> {
        let mut c = values.to_vec();
        self.dst(&mut c);
        c.iter_mut().for_each(|v| *v *= self.coeff_scale);
        c
    }

    /// Sine coefficients → nodal values.
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut v = coeffs.to_vec();
        self.dst(&mut v);
        v
    }

    /// (−Δ_h + λ)^{-1} applied to nodal values.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut c = self.forward(rhs);
        c.iter_mut().zip(&self.symbol).for_each(|(v, s)| *v /= s);
        self.inverse(&c)
    }

    /// (−Δ_h + λ) applied to nodal values.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let mut c = self.forward(values);
        c.iter_mut().zip(&self.symbol).for_each(|(v, s)| *v *= s);
        self.inverse(&c)
    }

    /// Discrete H¹_λ product of two fields given by sine coefficients.
    pub fn inner_coeffs(&self, a: &[f64], b: &[f64]) -> f64 {
        self.inner_scale * a.iter().zip(b).zip(&self.symbol).map(|((x, y), s)| s * x * y).sum::<f64>()
    }

    /// Discrete H¹_λ product of two nodal fields.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let ca = self.forward(a);
        let cb = self.forward(b);
        self.inner_coeffs(&ca, &cb)
    }
}
