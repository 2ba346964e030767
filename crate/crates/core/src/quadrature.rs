//! Gauss–Legendre rules and an axisymmetric integrator for ∫_{ℝᴺ} f(|x|, cos∠(x, e)) dx.

use std::f64::consts::PI;

use crate::closed_forms::Dimension;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over consecutive breakpoints.
    pub fn integrate_panels(&self, breaks: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        breaks.windows(2).map(|w| self.integrate(w[0], w[1], &mut f)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Breakpoints on [0, s_max]: geometric grading towards 0, then panels of width `width`.
pub fn graded_breaks(s_max: f64, width: f64, finest: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut s = finest;
    while s < width.min(s_max) {
        b.push(s);
        s *= 4.0;
    }
    let mut s = width.min(s_max);
    while s < s_max - 1e-12 {
        b.push(s);
        s += width;
    }
    b.push(s_max);
    b
}

/// Angular panels on [0, π], refined towards both poles.
fn angle_breaks(refine: usize) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut t = PI / 2.0;
    let mut lows = Vec::new();
    for _ in 0..refine {
        t /= 3.0;
        lows.push(t);
    }
    lows.reverse();
    b.extend(lows.iter().copied());
    b.push(PI / 2.0);
    b.extend(lows.iter().rev().map(|t| PI - t));
    b.push(PI);
    b
}

#[derive(Debug, Clone)]
pub struct Axisymmetric {
    dim: Dimension,
    radial: GaussLegendre,
    angular: GaussLegendre,
    angle_panels: Vec<f64>,
}

impl Axisymmetric {
    pub fn new(dim: Dimension, radial_order: usize, angular_order: usize, angle_refine: usize) -> Self {
        Self {
            dim,
            radial: GaussLegendre::new(radial_order),
            angular: GaussLegendre::new(angular_order),
            angle_panels: angle_breaks(angle_refine),
        }
    }

    pub fn standard(dim: Dimension) -> Self {
        Self::new(dim, 20, 24, 5)
    }

    /// ∫_{ℝᴺ} f(s, c) dx, with s = |x| and c the cosine of the angle to the axis,
    /// over radial breakpoints `breaks`.
    pub fn integrate(&self, breaks: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
        let (prefactor, sin_power) = match self.dim {
            Dimension::Two => (2.0, 0),
            Dimension::Three => (2.0 * PI, 1),
        };
        let mut total = 0.0;
        for w in breaks.windows(2) {
            for (s, ws) in self.radial.mapped(w[0], w[1]) {
                let mut inner = 0.0;
                for a in self.angle_panels.windows(2) {
                    for (t, wt) in self.angular.mapped(a[0], a[1]) {
                        let jac = if sin_power == 1 { t.sin() } else { 1.0 };
                        inner += wt * jac * f(s, t.cos());
                    }
                }
                total += ws * s.powi(self.dim.value() as i32 - 1) * inner;
            }
        }
        prefactor * total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let g = GaussLegendre::new(10);
        for k in 0..20 {
            let v = g.integrate(0.0, 2.0, |x| x.powi(k));
            let exact = 2f64.powi(k + 1) / (k as f64 + 1.0);
            assert!((v - exact).abs() < 1e-13 * exact, "k={k}");
        }
        let w: f64 = g.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
        assert!((w - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_integrals() {
        for dim in [Dimension::Two, Dimension::Three] {
            let ax = Axisymmetric::standard(dim);
            let b = graded_breaks(12.0, 1.0, 1e-3);
            let v = ax.integrate(&b, |s, _| (-s * s).exp());
            let exact = PI.powf(dim.as_f64() / 2.0);
            assert!((v - exact).abs() < 1e-13, "{dim:?}: {v}");
            // shifted Gaussian integrates to the same total
            let v = ax.integrate(&b, |s, c| (-(s * s + 1.0 - 2.0 * s * c)).exp());
            assert!((v - exact).abs() < 1e-12, "{dim:?}: {v}");
        }
    }
}
