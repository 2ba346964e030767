//! Dormand–Prince 5(4) for two-component systems, adaptive step with an
//! optional per-step stop condition.

pub type State = [f64; 2];

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn step(f: &impl Fn(f64, &State) -> State, t: f64, y: &State, h: f64) -> (State, f64) {
    let mut k = [[0.0; 2]; 7];
    for i in 0..7 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            yi[0] += h * A[i][j] * kj[0];
            yi[1] += h * A[i][j] * kj[1];
        }
        k[i] = f(t + C[i] * h, &yi);
    }
    let mut y5 = *y;
    let mut err = [0.0; 2];
    for i in 0..7 {
        for c in 0..2 {
            y5[c] += h * B5[i] * k[i][c];
            err[c] += h * (B5[i] - B4[i]) * k[i][c];
        }
    }
    (y5, err[0].abs().max(err[1].abs()))
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

pub enum Flow {
    Continue,
    Stop,
}

/// Integrates from t0 to t1 (either direction). `watch` sees every accepted
/// step and may stop the integration; the final (t, y) is returned.
pub fn integrate(
    f: impl Fn(f64, &State) -> State,
    t0: f64,
    y0: State,
    t1: f64,
    tol: Tolerance,
    mut watch: impl FnMut(f64, &State) -> Flow,
) -> (f64, State) {
    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * tol.max_step.min((t1 - t0).abs()).min(1e-2);
    while (t1 - t) * dir > 0.0 {
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let (yn, err) = step(&f, t, &y, h);
        let size = y[0].abs().max(yn[0].abs()).max(y[1].abs()).max(yn[1].abs());
        let scale = tol.atol + tol.rtol * size;
        let ratio = err / scale;
        if !ratio.is_finite() {
            return (t, y);
        }
        if ratio <= 1.0 || h.abs() < 1e-14 {
            t += h;
            y = yn;
            if let Flow::Stop = watch(t, &y) {
                return (t, y);
            }
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h = dir * (h.abs() * factor).min(tol.max_step);
    }
    (t, y)
}
