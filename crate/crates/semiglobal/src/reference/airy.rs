//! Airy function Ai and its derivative on |x| <= 12.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};

/// Ai(0) = 3^{-2/3} / Γ(2/3)
pub const AI0: f64 = 0.355_028_053_887_817_239_26;
/// -Ai'(0) = 3^{-1/3} / Γ(1/3)
pub const AIP0: f64 = 0.258_819_403_792_806_798_41;

pub const WINDOW: f64 = 12.0;
/// Below this |x| the Maclaurin series is used; above, the asymptotic expansions.
pub const SERIES_LIMIT: f64 = 7.0;

/// (Ai(x), Ai'(x)) with absolute error below 1e-10 on |x| <= 12.
pub fn airy(x: f64) -> Result<(f64, f64)> {
    if !(x.abs() <= WINDOW) {
        return Err(Error::OutOfWindow(x));
    }
    Ok(if x.abs() <= SERIES_LIMIT { series(x) } else if x > 0.0 { asymptotic_pos(x) } else { asymptotic_neg(-x) })
}

fn series(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = Σ 3^k (1/3)_k x^{3k} / (3k)!,  g = Σ 3^k (2/3)_k x^{3k+1} / (3k+1)!
    let (mut t, mut u) = (1.0, x);
    let (mut d, mut e) = (0.0, 1.0);
    let (mut f, mut g, mut fp, mut gp) = (1.0, x, 0.0, 1.0);
    for k in 0..200 {
        let kf = k as f64;
        t *= x3 / ((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        u *= x3 / ((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        d = if k == 0 { 0.5 * x * x } else { d * x3 / (3.0 * kf * (3.0 * kf + 2.0)) };
        e *= x3 / ((3.0 * kf + 1.0) * (3.0 * kf + 3.0));
        f += t;
        g += u;
        fp += d;
        gp += e;
        let small = 1e-18 * (f.abs() + g.abs() + fp.abs() + gp.abs());
        if k > 2 && t.abs() + u.abs() + d.abs() + e.abs() < small {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp)
}

/// Coefficients u_k of the asymptotic series and v_k = -(6k+1)/(6k-1) u_k.
fn coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0; n];
    let mut v = vec![1.0; n];
    for k in 1..n {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
    }
    (u, v)
}

/// Σ c_k (sign)^k z^{-k} truncated before the terms start growing.
fn truncated(c: &[f64], z: f64, alternate: bool, start: usize, stride: usize) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut k = start;
    let mut j = 0;
    while k < c.len() {
        let sign = if alternate && j % 2 == 1 { -1.0 } else { 1.0 };
        let term = sign * c[k] / z.powi(k as i32);
        if term.abs() > last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
        k += stride;
        j += 1;
    }
    sum
}

fn asymptotic_pos(x: f64) -> (f64, f64) {
    let (u, v) = coefficients(40);
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let pre = (-zeta).exp() / (2.0 * PI.sqrt());
    let su = truncated(&u, zeta, true, 0, 1);
    let sv = truncated(&v, zeta, true, 0, 1);
    (pre / x.powf(0.25) * su, -pre * x.powf(0.25) * sv)
}

fn asymptotic_neg(y: f64) -> (f64, f64) {
    let (u, v) = coefficients(40);
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    let (s, c) = (zeta + FRAC_PI_4).sin_cos();
    let ue = truncated(&u, zeta, true, 0, 2);
    let uo = truncated(&u, zeta, true, 1, 2);
    let ve = truncated(&v, zeta, true, 0, 2);
    let vo = truncated(&v, zeta, true, 1, 2);
    let ai = (s * ue - c * uo) / (PI.sqrt() * y.powf(0.25));
    let aip = -y.powf(0.25) / PI.sqrt() * (c * ve + s * vo);
    (ai, aip)
}
