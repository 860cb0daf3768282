//! Small numerical kernels: compensated arithmetic, adaptive quadrature,
//! bracketed root finding and an embedded Runge–Kutta integrator.

use crate::error::{invalid, Result};

/// `a * b` split into a rounded product and its exact rounding error.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `a * x^2 - b * y^2`, accurate even under heavy cancellation.
pub fn diff_of_weighted_squares(a: f64, x: f64, b: f64, y: f64) -> f64 {
    let (xx, xx_err) = two_prod(x, x);
    let (yy, yy_err) = two_prod(y, y);
    let (p, p_err) = two_prod(a, xx);
    let (q, q_err) = two_prod(b, yy);
    (p - q) + (p_err - q_err) + (a * xx_err - b * yy_err)
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = GK_WEIGHTS_K[7] * fc;
    let mut gauss = GK_WEIGHTS_G[3] * fc;
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += GK_WEIGHTS_K[i] * pair;
        if i % 2 == 1 {
            gauss += GK_WEIGHTS_G[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err) = gauss_kronrod_15(&f, a, b);
    let mut pending = vec![(a, b, whole, err)];
    let mut total = 0.0;
    let mut depth_guard = 0usize;
    while let Some((lo, hi, value, err)) = pending.pop() {
        let tol = rel_tol * whole.abs().max(1e-300);
        depth_guard += 1;
        if err <= tol * ((hi - lo) / (b - a)).abs().max(1e-3) || depth_guard > 200_000 || hi - lo < 1e-14 * (b - a).abs() {
            total += value;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (left, left_err) = gauss_kronrod_15(&f, lo, mid);
        let (right, right_err) = gauss_kronrod_15(&f, mid, hi);
        pending.push((lo, mid, left, left_err));
        pending.push((mid, hi, right, right_err));
    }
    total
}

/// Root of a continuous `f` with a sign change on `[lo, hi]`, by bisection
/// with secant acceleration (Illinois variant of regula falsi).
pub fn bracketed_root<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return invalid(format!("no sign change on [{lo}, {hi}]"));
    }
    let mut side = 0i8;
    for _ in 0..500 {
        let x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let x = if x.is_finite() && x > lo.min(hi) && x < lo.max(hi) { x } else { 0.5 * (lo + hi) };
        let fx = f(x);
        if fx == 0.0 || (hi - lo).abs() < x_tol * (1.0 + x.abs()) {
            return Ok(x);
        }
        if fx.signum() == f_hi.signum() {
            hi = x;
            f_hi = fx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        } else {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Result of an adaptive integration.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub state: Vec<f64>,
    pub steps: usize,
}

// Dormand–Prince 5(4) tableau.
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the autonomous system `y' = rhs(y)` from 0 to `t_end` with the
/// Dormand–Prince 5(4) pair and a standard step-size controller.
pub fn integrate_ode<F>(rhs: F, y0: &[f64], t_end: f64, rtol: f64, atol: f64) -> Result<OdeSolution>
where
    F: Fn(&[f64], &mut [f64]),
{
    if !(t_end >= 0.0) {
        return invalid("integration horizon must be non-negative");
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    if t_end == 0.0 {
        return Ok(OdeSolution { state: y, steps: 0 });
    }
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    rhs(&y, &mut k[0]);
    let scale0 = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-12);
    let speed0 = k[0].iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-12);
    let mut dt = (0.01 * scale0 / speed0).min(t_end);
    let mut t = 0.0;
    let mut steps = 0usize;
    while t < t_end {
        if steps > 50_000_000 {
            return invalid("adaptive integrator exceeded its step budget");
        }
        let dt_step = dt.min(t_end - t);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (r, kr) in k.iter().enumerate().take(s) {
                    acc += dt_step * DP_A[s][r] * kr[i];
                }
                tmp[i] = acc;
            }
            rhs(&tmp, &mut k[s]);
        }
        let mut err_norm: f64 = 0.0;
        for i in 0..n {
            let mut hi = y[i];
            let mut lo = y[i];
            for s in 0..7 {
                hi += dt_step * DP_B5[s] * k[s][i];
                lo += dt_step * DP_B4[s] * k[s][i];
            }
            y_new[i] = hi;
            let sc = atol + rtol * y[i].abs().max(hi.abs());
            let e = (hi - lo) / sc;
            err_norm = err_norm.max(e.abs());
        }
        steps += 1;
        if err_norm <= 1.0 || dt_step < 1e-14 * t_end {
            t += dt_step;
            std::mem::swap(&mut y, &mut y_new);
            // FSAL: stage 7 is the derivative at the accepted point.
            k.swap(0, 6);
        }
        let factor = if err_norm == 0.0 { 5.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0) };
        dt = dt_step * factor;
        if y.iter().any(|v| !v.is_finite()) {
            return invalid("adaptive integrator produced a non-finite state");
        }
    }
    Ok(OdeSolution { state: y, steps })
}
