//! Numerov integration of the real Schrödinger equation on a uniform grid.

use crate::action::ProblemContext;
use crate::error::{Error, Result};
use crate::wavefunction::uniform_step;
use num_complex::Complex64 as C64;

/// Boundary data for [`numerov_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NumerovBc {
    /// Decaying at the left end of the grid, which must be classically forbidden.
    DecayLeft,
    /// Decaying at the right end of the grid, which must be classically forbidden.
    DecayRight,
    /// ψ(q0) = 0, ψ'(q0) = 1. q0 must be a grid point.
    NodeAt(f64),
    /// ψ(q0) = value, ψ'(q0) = slope. q0 must be a grid point.
    Cauchy { q0: f64, value: f64, slope: f64 },
}

const RESCALE: f64 = 1e200;

/// ψ'' = f ψ with f = 2(V - E)/ħ².
fn f_of(ctx: &ProblemContext, q: f64) -> f64 {
    2.0 * (ctx.spec.eval_real(q) - ctx.energy) / (ctx.hbar * ctx.hbar)
}

fn f_derivative(ctx: &ProblemContext, q: f64, k: usize) -> f64 {
    2.0 * ctx.spec.derivative_n(C64::new(q, 0.0), k).re / (ctx.hbar * ctx.hbar)
}

/// March the three-term recursion forward from y[0], y[1]; returns the total
/// rescaling factor applied to guard against overflow.
fn march(fv: &[f64], h: f64, y: &mut [f64]) -> f64 {
    let c = h * h / 12.0;
    let w = |i: usize| 1.0 - c * fv[i];
    let mut scale = 1.0;
    for i in 2..y.len() {
        y[i] = (2.0 * (1.0 + 5.0 * c * fv[i - 1]) * y[i - 1] - w(i - 2) * y[i - 2]) / w(i);
        if y[i].abs() > RESCALE {
            let s = 1.0 / y[i].abs();
            for v in y[..=i].iter_mut() {
                *v *= s;
            }
            scale *= s;
        }
    }
    scale
}

/// March in either direction from index `i0` with the neighbour value `y1`.
fn march_from(fv: &[f64], h: f64, i0: usize, y0: f64, y1: f64, rightward: bool) -> (Vec<f64>, f64) {
    let f: Vec<f64> = if rightward { fv[i0..].to_vec() } else { fv[..=i0].iter().rev().copied().collect() };
    if f.len() < 2 {
        return (vec![y0], 1.0);
    }
    let mut y = vec![0.0; f.len()];
    y[0] = y0;
    y[1] = y1;
    let s = march(&f, h, &mut y);
    if !rightward {
        y.reverse();
    }
    (y, s)
}

/// Taylor seed y(q0 + h) for ψ(q0) = value, ψ'(q0) = slope.
fn taylor_seed(ctx: &ProblemContext, q0: f64, value: f64, slope: f64, h: f64) -> f64 {
    let f0 = f_of(ctx, q0);
    let f1 = f_derivative(ctx, q0, 1);
    let f2 = f_derivative(ctx, q0, 2);
    let f3 = f_derivative(ctx, q0, 3);
    let (h2, h3, h4, h5) = (h * h, h * h * h, h.powi(4), h.powi(5));
    let even = 1.0 + f0 * h2 / 2.0 + f1 * h3 / 6.0 + (f2 + f0 * f0) * h4 / 24.0 + (f3 + 4.0 * f0 * f1) * h5 / 120.0;
    let odd = h + f0 * h3 / 6.0 + f1 * h4 / 12.0 + (3.0 * f2 + f0 * f0) * h5 / 120.0;
    value * even + slope * odd
}

/// Exact (to O(h⁴) globally) real solution on a uniform grid; unnormalized.
pub fn numerov_solve(ctx: &ProblemContext, grid: &[f64], bc: NumerovBc) -> Result<Vec<(f64, f64)>> {
    let n = grid.len();
    if n < 3 {
        return Err(Error::InvalidInput("grid must have at least 3 points".into()));
    }
    let h = uniform_step(grid)?;
    let fv: Vec<f64> = grid.iter().map(|&q| f_of(ctx, q)).collect();
    let y = match bc {
        NumerovBc::DecayLeft | NumerovBc::DecayRight => {
            let left = bc == NumerovBc::DecayLeft;
            let (e0, e1) = if left { (0, 1) } else { (n - 1, n - 2) };
            if !(fv[e0] > 0.0 && fv[e1] > 0.0) {
                return Err(Error::BadBoundary(format!("grid end q = {} is not classically forbidden", grid[e0])));
            }
            let (k0, k1) = (fv[e0].sqrt(), fv[e1].sqrt());
            // Simpson for the integral of κ over the first step
            let k_mid = f_of(ctx, 0.5 * (grid[e0] + grid[e1])).max(0.0).sqrt();
            let int = h * (k0 + 4.0 * k_mid + k1) / 6.0;
            march_from(&fv, h, e0, k0.powf(-0.5), k1.powf(-0.5) * int.exp(), left).0
        }
        NumerovBc::NodeAt(q0) => return numerov_solve(ctx, grid, NumerovBc::Cauchy { q0, value: 0.0, slope: 1.0 }),
        NumerovBc::Cauchy { q0, value, slope } => {
            let i0 = grid
                .iter()
                .position(|&q| (q - q0).abs() <= 1e-9 * h)
                .ok_or_else(|| Error::BadBoundary(format!("q0 = {q0} is not a grid point")))?;
            let q0 = grid[i0];
            let (r, sr) = march_from(&fv, h, i0, value, taylor_seed(ctx, q0, value, slope, h), true);
            let (l, sl) = march_from(&fv, h, i0, value, taylor_seed(ctx, q0, value, slope, -h), false);
            let s = sr.min(sl);
            let mut y: Vec<f64> = l.iter().map(|v| v * (s / sl)).collect();
            y.extend(r[1..].iter().map(|v| v * (s / sr)));
            y
        }
    };
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("Numerov recursion overflowed".into()));
    }
    Ok(grid.iter().copied().zip(y).collect())
}
