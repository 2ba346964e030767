//! The energy space H¹_η on a truncated box: u = φ + qG with φ sampled on the
//! grid and G = G_λ handled analytically.
//!
//! The discrete L^p-type integrals use the nodal trapezoid sum except at the
//! node sitting on the origin, whose cell is replaced by an equal-volume ball
//! on which φ is frozen at its nodal value and G is integrated exactly in the
//! radius. Gradients and Hessians are the exact derivatives of the discrete
//! action built this way, so finite differences agree to O(ε²).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::closed_forms::{beta, green_radial, CouplingParams, Dimension};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Spectral};
use crate::ground_state::nonlinearity;
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq)]
pub struct EtaFunction {
    pub phi: Vec<f64>,
    pub q: f64,
    pub grid: GridSpec,
    pub eta: f64,
}

impl EtaFunction {
    pub fn axpy(&mut self, a: f64, x: &EtaFunction) {
        self.phi.iter_mut().zip(&x.phi).for_each(|(y, v)| *y += a * v);
        self.q += a * x.q;
    }

    pub fn scaled(&self, a: f64) -> EtaFunction {
        EtaFunction { phi: self.phi.iter().map(|v| a * v).collect(), q: a * self.q, ..self.clone() }
    }

    pub fn sum(&self, other: &EtaFunction) -> EtaFunction {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn difference(&self, other: &EtaFunction) -> EtaFunction {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }
}

/// Ball of the cell volume around the origin, with graded radial nodes.
#[derive(Debug, Clone)]
struct OriginCell {
    weights: Vec<f64>,
    green: Vec<f64>,
}

impl OriginCell {
    fn new(grid: &GridSpec, lambda: f64) -> Self {
        let dim = grid.dim;
        let radius = (grid.cell_volume() / dim.ball_volume()).powf(1.0 / dim.as_f64());
        let grade = match dim {
            Dimension::Two => 4,
            Dimension::Three => 8,
        };
        let gl = GaussLegendre::new(32);
        let n = dim.value() as i32;
        let mut weights = Vec::new();
        let mut green = Vec::new();
        for (t, w) in gl.mapped(0.0, 1.0) {
            let rho = radius * t.powi(grade);
            let jac = radius * grade as f64 * t.powi(grade - 1);
            weights.push(w * jac * dim.sphere_area() * rho.powi(n - 1) / grid.cell_volume());
            green.push(green_radial(dim, lambda, rho));
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { weights, green }
    }

    fn average(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.weights.iter().zip(&self.green).map(|(w, g)| w * f(*g)).sum()
    }
}

#[derive(Debug)]
pub struct FieldSpace {
    pub grid: GridSpec,
    pub dim: Dimension,
    /// Coupling α of −Δ_α (η for the reduced problem).
    pub alpha: f64,
    pub lambda: f64,
    pub beta: f64,
    pub p: f64,
    spectral: Spectral,
    green: Vec<f64>,
    origin: usize,
    cell: OriginCell,
}

/// Coefficient-space element used by the Krylov solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecVec {
    pub c: Vec<f64>,
    pub q: f64,
}

impl SpecVec {
    pub fn axpy(&mut self, a: f64, x: &SpecVec) {
        self.c.iter_mut().zip(&x.c).for_each(|(y, v)| *y += a * v);
        self.q += a * x.q;
    }

    pub fn scale(&mut self, a: f64) {
        self.c.iter_mut().for_each(|v| *v *= a);
        self.q *= a;
    }

    pub fn zeros_like(&self) -> SpecVec {
        SpecVec { c: vec![0.0; self.c.len()], q: 0.0 }
    }
}

impl FieldSpace {
    /// Space for −Δ_α + λ with coupling α, exponent p.
    pub fn new(grid: GridSpec, alpha: f64, lambda: f64, p: f64) -> Result<Self> {
        let dim = grid.dim;
        if !(p > 2.0) || (dim == Dimension::Three && p >= 3.0) || (dim == Dimension::Two && p > 3.0) {
            return Err(Error::Domain(format!("p = {p} outside the admissible range for N = {}", dim.value())));
        }
        let b = beta(&CouplingParams::new(alpha, dim), lambda)?;
        if !(b > 0.0) {
            return Err(Error::Config(format!("β_α(λ) = {b:.6e} must be positive")));
        }
        let origin = grid.origin_index();
        let cell = OriginCell::new(&grid, lambda);
        let mut green = vec![0.0; grid.len()];
        grid.for_each_node(|i, x| {
            let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if i != origin {
                green[i] = green_radial(dim, lambda, s);
            }
        });
        green[origin] = cell.average(|g| g);
        Ok(Self { grid, dim, alpha, lambda, beta: b, p, spectral: Spectral::new(&grid, lambda), green, origin, cell })
    }

    /// The reduction's space: α = η, λ = 1.
    pub fn for_eta(grid: GridSpec, eta: f64, p: f64) -> Result<Self> {
        Self::new(grid, eta, 1.0, p)
    }

    pub fn eta(&self) -> f64 {
        self.alpha
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// G at the nodes; the origin entry holds the cell average.
    pub fn green_field(&self) -> &[f64] {
        &self.green
    }

    pub fn origin_index(&self) -> usize {
        self.origin
    }

    pub fn zero(&self) -> EtaFunction {
        self.element(vec![0.0; self.grid.len()], 0.0)
    }

    pub fn element(&self, phi: Vec<f64>, q: f64) -> EtaFunction {
        EtaFunction { phi, q, grid: self.grid, eta: self.alpha }
    }

    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        self.grid.for_each_node(|i, x| out[i] = f(x));
        out
    }

    pub fn check(&self, u: &EtaFunction) -> Result<()> {
        if u.grid.fingerprint() != self.grid.fingerprint() || u.phi.len() != self.grid.len() {
            return Err(Error::Incompatible("field lives on a different grid".into()));
        }
        if u.eta != self.alpha {
            return Err(Error::Incompatible(format!("field has η = {}, space has {}", u.eta, self.alpha)));
        }
        Ok(())
    }

    pub fn h1_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.spectral.inner(a, b)
    }

    pub fn inner_product(&self, u1: &EtaFunction, u2: &EtaFunction) -> Result<f64> {
        self.check(u1)?;
        self.check(u2)?;
        Ok(self.h1_inner(&u1.phi, &u2.phi) + self.beta * u1.q * u2.q)
    }

    pub fn norm(&self, u: &EtaFunction) -> f64 {
        (self.h1_inner(&u.phi, &u.phi) + self.beta * u.q * u.q).max(0.0).sqrt()
    }

    /// Q(F(u)): the discrete integral of F(φ + qG).
    pub fn integrate_pointwise(&self, u: &EtaFunction, f: impl Fn(f64) -> f64) -> f64 {
        let mut sum = 0.0;
        for (i, (&ph, &g)) in u.phi.iter().zip(&self.green).enumerate() {
            if i != self.origin {
                sum += f(ph + u.q * g);
            }
        }
        let ph0 = u.phi[self.origin];
        sum += self.cell.average(|g| f(ph0 + u.q * g));
        sum * self.grid.cell_volume()
    }

    /// Q(F(b, u − b)) for a nodal base field b; on the origin cell b is
    /// frozen at its nodal value. Lets differences such as |u|^p − |b|^p be
    /// formed pointwise without cancellation.
    pub fn integrate_relative(&self, u: &EtaFunction, base: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut sum = 0.0;
        for (i, ((&ph, &g), &b)) in u.phi.iter().zip(&self.green).zip(base).enumerate() {
            if i != self.origin {
                sum += f(b, ph + u.q * g - b);
            }
        }
        let (ph0, b0) = (u.phi[self.origin], base[self.origin]);
        sum += self.cell.average(|g| f(b0, ph0 + u.q * g - b0));
        sum * self.grid.cell_volume()
    }

    /// Nodal field F(u) with the origin entry replaced by its cell average,
    /// together with Q(F(u)·G).
    pub(crate) fn effective(&self, u: &EtaFunction, f: impl Fn(f64) -> f64) -> (Vec<f64>, f64) {
        let mut out = Vec::with_capacity(u.phi.len());
        let mut against_g = 0.0;
        for (i, (&ph, &g)) in u.phi.iter().zip(&self.green).enumerate() {
            let v = if i == self.origin { 0.0 } else { f(ph + u.q * g) };
            against_g += v * g;
            out.push(v);
        }
        let ph0 = u.phi[self.origin];
        out[self.origin] = self.cell.average(|g| f(ph0 + u.q * g));
        against_g += self.cell.average(|g| f(ph0 + u.q * g) * g);
        (out, against_g * self.grid.cell_volume())
    }

    pub fn lp_norm_pow(&self, u: &EtaFunction, r: f64) -> f64 {
        self.integrate_pointwise(u, |v| v.abs().powf(r))
    }

    pub fn lp_norm(&self, u: &EtaFunction, r: f64) -> Result<f64> {
        self.check(u)?;
        let ok = match self.dim {
            Dimension::Two => r >= 2.0 && r.is_finite(),
            Dimension::Three => (2.0..3.0).contains(&r),
        };
        if !ok {
            return Err(Error::Domain(format!("L^{r} is outside the embedding range for N = {}", self.dim.value())));
        }
        Ok(self.lp_norm_pow(u, r).powf(1.0 / r))
    }

    pub fn action(&self, u: &EtaFunction) -> Result<f64> {
        self.check(u)?;
        let p = self.p;
        Ok(0.5 * self.norm(u).powi(2) - self.lp_norm_pow(u, p) / p)
    }

    pub fn gradient(&self, u: &EtaFunction) -> Result<EtaFunction> {
        self.check(u)?;
        let p = self.p;
        let (src, against_g) = self.effective(u, |v| nonlinearity(v, p));
        let corr = self.spectral.solve(&src);
        let phi = u.phi.iter().zip(&corr).map(|(a, b)| a - b).collect();
        Ok(self.element(phi, u.q - against_g / self.beta))
    }

    /// The gradient in coefficient space.
    pub fn gradient_spec(&self, u: &EtaFunction) -> Result<SpecVec> {
        self.check(u)?;
        let p = self.p;
        let (src, against_g) = self.effective(u, |v| nonlinearity(v, p));
        let fs = self.spectral.forward(&src);
        let c = self.spectral.forward(&u.phi);
        let c = c.iter().zip(&fs).zip(self.spectral.symbol()).map(|((a, b), s)| a - b / s).collect();
        Ok(SpecVec { c, q: u.q - against_g / self.beta })
    }

    /// Frozen second derivative at u.
    pub fn linearize(&self, u: &EtaFunction) -> Result<Linearization<'_>> {
        self.check(u)?;
        let p = self.p;
        let fp = |v: f64| (p - 1.0) * v.abs().powf(p - 2.0);
        let weight = u.phi.iter().zip(&self.green).map(|(&ph, &g)| fp(ph + u.q * g)).collect();
        let ph0 = u.phi[self.origin];
        let cell = self.cell.green.iter().map(|&g| fp(ph0 + u.q * g)).collect();
        Ok(Linearization { space: self, weight, cell })
    }

    pub fn hessian_apply(&self, u: &EtaFunction, v: &EtaFunction) -> Result<EtaFunction> {
        self.check(v)?;
        Ok(self.linearize(u)?.apply(v))
    }

    pub fn to_spec(&self, u: &EtaFunction) -> SpecVec {
        SpecVec { c: self.spectral.forward(&u.phi), q: u.q }
    }

    pub fn from_spec(&self, v: &SpecVec) -> EtaFunction {
        self.element(self.spectral.inverse(&v.c), v.q)
    }

    pub fn spec_inner(&self, a: &SpecVec, b: &SpecVec) -> f64 {
        self.spectral.inner_coeffs(&a.c, &b.c) + self.beta * a.q * b.q
    }

    pub fn spec_norm(&self, a: &SpecVec) -> f64 {
        self.spec_inner(a, a).max(0.0).sqrt()
    }

    /// Largest |φ| on the nodes next to the boundary relative to max |φ|.
    pub fn boundary_ratio(&self, u: &EtaFunction) -> f64 {
        let max = u.phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max == 0.0 {
            return 0.0;
        }
        self.grid.boundary_layer().iter().map(|&i| u.phi[i].abs()).fold(0.0, f64::max) / max
    }

    pub fn check_truncation(&self, u: &EtaFunction) -> Result<()> {
        let r = self.boundary_ratio(u);
        if r > 1e-8 {
            return Err(Error::Resolution(format!("field does not decay at the box boundary (ratio {r:.2e})")));
        }
        Ok(())
    }

    /// Values of φ + qG at the nodes (origin entry: cell average).
    pub fn evaluate(&self, u: &EtaFunction) -> Vec<f64> {
        u.phi.iter().zip(&self.green).map(|(ph, g)| ph + u.q * g).collect()
    }
}

/// v ↦ Riesz representer of S″(u)[v, ·] with the weight f′(u) frozen.
pub struct Linearization<'a> {
    space: &'a FieldSpace,
    weight: Vec<f64>,
    cell: Vec<f64>,
}

impl Linearization<'_> {
    fn source(&self, psi: &[f64], s: f64) -> (Vec<f64>, f64) {
        let sp = self.space;
        let mut d = Vec::with_capacity(psi.len());
        let mut against_g = 0.0;
        for (i, ((&ps, &g), &w)) in psi.iter().zip(&sp.green).zip(&self.weight).enumerate() {
            let v = if i == sp.origin { 0.0 } else { w * (ps + s * g) };
            against_g += v * g;
            d.push(v);
        }
        let ps0 = psi[sp.origin];
        let (mut d0, mut dg0) = (0.0, 0.0);
        for ((&wq, &g), &w) in sp.cell.weights.iter().zip(&sp.cell.green).zip(&self.cell) {
            let v = w * (ps0 + s * g);
            d0 += wq * v;
            dg0 += wq * v * g;
        }
        d[sp.origin] = d0;
        (d, (against_g + dg0) * sp.grid.cell_volume())
    }

    pub fn apply(&self, v: &EtaFunction) -> EtaFunction {
        let sp = self.space;
        let (d, dg) = self.source(&v.phi, v.q);
        let corr = sp.spectral.solve(&d);
        let phi = v.phi.iter().zip(&corr).map(|(a, b)| a - b).collect();
        sp.element(phi, v.q - dg / sp.beta)
    }

    pub fn apply_spec(&self, v: &SpecVec) -> SpecVec {
        let sp = self.space;
        let psi = sp.spectral.inverse(&v.c);
        let (d, dg) = self.source(&psi, v.q);
        let dc = sp.spectral.forward(&d);
        let c = v.c.iter().zip(&dc).zip(sp.spectral.symbol()).map(|((a, b), s)| a - b / s).collect();
        SpecVec { c, q: v.q - dg / sp.beta }
    }
}

const SNAPSHOT_MAGIC: &str = "multipeak-field-v1";

/// Header line followed by the raw little-endian f64 array of φ (row-major).
pub fn write_snapshot(path: &Path, space: &FieldSpace, u: &EtaFunction) -> Result<()> {
    space.check(u)?;
    let g = &space.grid;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "{SNAPSHOT_MAGIC} dim={} h={:e} intervals={},{},{} origin={},{},{} eta={:e} lambda={:e} p={:e} q={:e}",
        g.dim.value(),
        g.h,
        g.intervals[0],
        g.intervals[1],
        g.intervals[2],
        g.origin[0],
        g.origin[1],
        g.origin[2],
        space.alpha,
        space.lambda,
        space.p,
        u.q
    )?;
    for v in &u.phi {
        f.write_all(&v.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub eta: f64,
    pub lambda: f64,
    pub p: f64,
    pub field: EtaFunction,
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(SNAPSHOT_MAGIC) {
        return Err(Error::Parse("not a field snapshot".into()));
    }
    let kv: std::collections::HashMap<&str, &str> = parts.filter_map(|t| t.split_once('=')).collect();
    let get = |k: &str| kv.get(k).copied().ok_or_else(|| Error::Parse(format!("snapshot header lacks {k}")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse::<f64>().map_err(|e| Error::Parse(format!("{k}: {e}"))) };
    let triple = |k: &str| -> Result<[usize; 3]> {
        let v: Vec<usize> = get(k)?
            .split(',')
            .map(|s| s.parse::<usize>().map_err(|e| Error::Parse(format!("{k}: {e}"))))
            .collect::<Result<_>>()?;
        v.try_into().map_err(|_| Error::Parse(format!("{k} needs three entries")))
    };
    let grid = GridSpec {
        dim: Dimension::new(num("dim")? as usize)?,
        h: num("h")?,
        intervals: triple("intervals")?,
        origin: triple("origin")?,
    };
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::Parse(format!("snapshot holds {} bytes, grid needs {}", bytes.len(), 8 * grid.len())));
    }
    let phi = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    let eta = num("eta")?;
    Ok(Snapshot {
        grid,
        eta,
        lambda: num("lambda")?,
        p: num("p")?,
        field: EtaFunction { phi, q: num("q")?, grid, eta },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> FieldSpace {
        let grid = GridSpec::cube(Dimension::Two, 8.0, 64).unwrap();
        FieldSpace::for_eta(grid, 3.0, 2.7).unwrap()
    }

    fn bump(sp: &FieldSpace, cx: f64, q: f64) -> EtaFunction {
        let phi = sp.sample(|x| (-(x[0] - cx).powi(2) - 0.5 * x[1].powi(2)).exp());
        sp.element(phi, q)
    }

    #[test]
    fn pure_charge_norm_is_beta() {
        let sp = space();
        let u = sp.element(vec![0.0; sp.grid.len()], 1.0);
        assert!((sp.inner_product(&u, &u).unwrap() - sp.beta).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let sp = space();
        let u = bump(&sp, 0.7, 0.3);
        let v = bump(&sp, -1.1, -0.4);
        let g = sp.gradient(&u).unwrap();
        let eps = 1e-5;
        let mut up = u.clone();
        up.axpy(eps, &v);
        let mut dn = u.clone();
        dn.axpy(-eps, &v);
        let fd = (sp.action(&up).unwrap() - sp.action(&dn).unwrap()) / (2.0 * eps);
        let an = sp.inner_product(&g, &v).unwrap();
        assert!((fd - an).abs() < 1e-7 * an.abs(), "{fd} vs {an}");
    }

    #[test]
    fn hessian_is_symmetric_and_matches_gradient() {
        let sp = space();
        let u = bump(&sp, 0.7, 0.3);
        let v = bump(&sp, -1.1, -0.4);
        let w = bump(&sp, 2.0, 0.9);
        let lin = sp.linearize(&u).unwrap();
        let hv = lin.apply(&v);
        let hw = lin.apply(&w);
        let a = sp.inner_product(&hv, &w).unwrap();
        let b = sp.inner_product(&hw, &v).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs());
        let eps = 1e-5;
        let mut up = u.clone();
        up.axpy(eps, &v);
        let mut dn = u.clone();
        dn.axpy(-eps, &v);
        let gp = sp.gradient(&up).unwrap();
        let gm = sp.gradient(&dn).unwrap();
        let fd = gp.difference(&gm).scaled(0.5 / eps);
        let err = sp.norm(&fd.difference(&hv));
        assert!(err < 1e-7 * sp.norm(&hv), "{err}");
        // coefficient-space application agrees with the nodal one
        let hs = sp.from_spec(&lin.apply_spec(&sp.to_spec(&v)));
        assert!(sp.norm(&hs.difference(&hv)) < 1e-12 * sp.norm(&hv));
    }

    #[test]
    fn snapshot_round_trip() {
        let sp = space();
        let u = bump(&sp, 0.7, 0.3);
        let dir = std::env::temp_dir().join(format!("mp-snap-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("u.bin");
        write_snapshot(&path, &sp, &u).unwrap();
        let s = read_snapshot(&path).unwrap();
        assert_eq!(s.field, u);
        assert_eq!(s.grid, sp.grid);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let sp = space();
        let other = FieldSpace::for_eta(GridSpec::cube(Dimension::Two, 8.0, 32).unwrap(), 3.0, 2.7).unwrap();
        let u = other.zero();
        assert!(matches!(sp.inner_product(&u, &u), Err(Error::Incompatible(_))));
        assert!(FieldSpace::for_eta(GridSpec::cube(Dimension::Three, 4.0, 8).unwrap(), 3.0, 3.0).is_err());
    }
}
