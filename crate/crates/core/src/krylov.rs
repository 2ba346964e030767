//! MINRES for operators that are self-adjoint (possibly indefinite) in a
//! user-supplied inner product.

use crate::field_space::SpecVec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOutcome {
    pub iterations: usize,
    /// Estimated ‖b − Ax‖/‖b‖ at exit.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves Ax = b to relative residual `rtol`.
pub fn minres(
    apply: impl Fn(&SpecVec) -> SpecVec,
    inner: impl Fn(&SpecVec, &SpecVec) -> f64,
    b: &SpecVec,
    rtol: f64,
    max_iter: usize,
) -> (SpecVec, KrylovOutcome) {
    let mut x = b.zeros_like();
    let beta1 = inner(b, b).max(0.0).sqrt();
    if beta1 == 0.0 {
        return (x, KrylovOutcome { iterations: 0, relative_residual: 0.0, converged: true });
    }
    let mut r1 = b.clone();
    let mut r2 = b.clone();
    let mut w = b.zeros_like();
    let mut w2 = b.zeros_like();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln) = (0.0, 0.0);
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let mut v = r2.clone();
        v.scale(1.0 / beta);
        let mut y = apply(&v);
        if it >= 2 {
            y.axpy(-beta / oldb, &r1);
        }
        let alfa = inner(&v, &y);
        y.axpy(-alfa / beta, &r2);
        r1 = std::mem::replace(&mut r2, y);
        oldb = beta;
        beta = inner(&r2, &r2).max(0.0).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let w1 = std::mem::replace(&mut w2, w.clone());
        let mut wn = v;
        wn.axpy(-oldeps, &w1);
        wn.axpy(-delta, &w2);
        wn.scale(1.0 / gamma);
        w = wn;
        x.axpy(phi, &w);

        if phibar <= rtol * beta1 || beta == 0.0 {
            return (x, KrylovOutcome { iterations: it, relative_residual: phibar / beta1, converged: true });
        }
    }
    (x, KrylovOutcome { iterations: it, relative_residual: phibar / beta1, converged: false })
}
