//! Explicit Runge-Kutta steppers over fixed-size real state arrays.
//!
//! The adaptive solver is Dormand-Prince 5(4) with the standard
//! fourth-order continuous extension for dense output.

use crate::{Error, Result};

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &[(1.0, &k1)]));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &[(1.0, &k2)]));
    let k4 = f(t + h, &axpy(y, h, &[(1.0, &k3)]));
    axpy(y, h / 6.0, &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)])
}

/// Fixed-step RK4 through every time in `times`.
pub fn rk4<const N: usize, F>(f: &F, times: &[f64], y0: [f64; N]) -> Vec<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0;
    out.push(y);
    for w in times.windows(2) {
        y = rk4_step(f, w[0], &y, w[1] - w[0]);
        out.push(y);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl AdaptiveOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, max_steps: 5_000_000 }
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn scaled_norm<const N: usize>(v: &[f64; N], y0: &[f64; N], y1: &[f64; N], opts: &AdaptiveOptions) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        acc += (v[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(
    f: &F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    opts: &AdaptiveOptions,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let d0 = scaled_norm(y0, y0, y0, opts);
    let d1 = scaled_norm(f0, y0, y0, opts);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = f(t0 + h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = scaled_norm(&diff, y0, y0, opts) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span)
}

/// Adaptive Dormand-Prince integration with dense output at every entry of
/// `times` (strictly increasing). Returns one state per output time.
pub fn dopri5<const N: usize, F>(f: &F, times: &[f64], y0: [f64; N], opts: &AdaptiveOptions) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut out = Vec::with_capacity(times.len());
    out.push(y0);
    if times.len() < 2 {
        return Ok(out);
    }
    let t_end = times[times.len() - 1];
    let mut t = times[0];
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(f, t, &y, &k1, t_end - t, opts);
    let mut next = 1;
    let mut last_rejected = false;
    let mut steps = 0usize;

    while next < times.len() {
        steps += 1;
        if steps > opts.max_steps || h < 1e-13 * t.abs().max(1.0) {
            return Err(Error::AccuracyFailure { t, h });
        }
        let mut hit_end = false;
        if t + h >= t_end {
            h = t_end - t;
            hit_end = true;
        }

        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if hit_end { t_end } else { t + h };
        let k7 = f(t_new, &y_new);

        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err_norm = scaled_norm(&err, &y, &y_new, opts);

        if err_norm <= 1.0 {
            if next < times.len() && times[next] <= t_new {
                let mut r2 = [0.0; N];
                let mut r3 = [0.0; N];
                let mut r4 = [0.0; N];
                let mut r5 = [0.0; N];
                for i in 0..N {
                    r2[i] = y_new[i] - y[i];
                    r3[i] = h * k1[i] - r2[i];
                    r4[i] = r2[i] - h * k7[i] - r3[i];
                    r5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                while next < times.len() && times[next] <= t_new {
                    if times[next] == t_new {
                        out.push(y_new);
                    } else {
                        let th = (times[next] - t) / h;
                        let th1 = 1.0 - th;
                        let mut yi = [0.0; N];
                        for i in 0..N {
                            yi[i] = y[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
                        }
                        out.push(yi);
                    }
                    next += 1;
                }
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            let mut fac = if err_norm == 0.0 { 5.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0) };
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            if !hit_end {
                h *= fac;
            }
        } else {
            h *= (0.9 * err_norm.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    Ok(out)
}
