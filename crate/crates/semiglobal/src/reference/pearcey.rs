//! Pearcey integral and quartic-exponent contour integrals.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::contour::{scan_exponent, wrap, ContourPath, Sector, SectorMap};
use crate::error::{Error, Result};
use crate::numerics::quad::integrate_segment;

const I: C64 = C64::new(0.0, 1.0);
pub const PEARCEY_WINDOW: f64 = 8.0;

/// Γ(1/4)
pub const GAMMA_QUARTER: f64 = 3.625_609_908_221_908_311_930_685;

/// ∫ exp(i(c4 t⁴ + c2 t² + c1 t)) dt along a contour equivalent to the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartic {
    pub c4: f64,
    pub c2: f64,
    pub c1: f64,
}

impl Quartic {
    fn exponent(&self, t: C64) -> C64 {
        I * (((t * t * self.c4) + self.c2) * t * t + t * self.c1)
    }

    /// Radius where the quartic term dominates the lower-order ones.
    fn scan_radius(&self) -> f64 {
        let a = self.c4.abs();
        let r2 = (self.c2.abs() / a).sqrt();
        let r1 = (self.c1.abs() / a).cbrt();
        let r0 = (20.0 / a).powf(0.25);
        2.0 * (r2 + r1) + r0
    }

    /// Decay sectors of the exponent, found by the contour sector scanner.
    pub fn sectors(&self) -> Result<SectorMap> {
        if self.c4 == 0.0 || !self.c4.is_finite() {
            return Err(Error::InvalidInput("quartic coefficient must be nonzero".into()));
        }
        scan_exponent(
            |r, angles| Ok(angles.iter().map(|&a| self.exponent(C64::from_polar(r, a)).re).collect()),
            0.0,
            self.scan_radius(),
            720,
            0.0,
            10.0,
        )
    }

    /// Entry and exit rays: the decay sectors adjacent to the negative and positive real axis.
    pub fn rays(&self) -> Result<(f64, f64)> {
        let map = self.sectors()?;
        let gap = |s: &Sector, target: f64| {
            if s.contains(target) {
                0.0
            } else {
                let d = |a: f64| {
                    let x = wrap(a - target);
                    x.min(2.0 * PI - x)
                };
                d(s.lo).min(d(s.hi))
            }
        };
        let pick = |target: f64| {
            map.sectors
                .iter()
                .min_by(|a, b| gap(a, target).partial_cmp(&gap(b, target)).unwrap())
                .copied()
                .ok_or(Error::SectorDegenerate { radius: map.radius })
        };
        let entry = pick(PI)?;
        let exit = pick(0.0)?;
        if entry == exit {
            return Err(Error::SectorDegenerate { radius: map.radius });
        }
        Ok((entry.mid(), exit.mid()))
    }

    /// Truncation radius along a ray and the peak exponent: integrand below e^{-40} relative to its peak.
    fn truncation(&self, angle: f64) -> (f64, f64) {
        let dir = C64::from_polar(1.0, angle);
        let mut peak: f64 = 0.0;
        let mut r = 0.0;
        loop {
            r += 0.05 * self.scan_radius();
            let e = self.exponent(dir * r).re;
            peak = peak.max(e);
            if e < peak - 40.0 || r > 100.0 * self.scan_radius() {
                return (r, peak);
            }
        }
    }

    /// The contour: in along the entry ray, out along the exit ray.
    pub fn path(&self) -> Result<ContourPath> {
        Ok(self.path_and_peak()?.0)
    }

    fn path_and_peak(&self) -> Result<(ContourPath, f64)> {
        let (a_in, a_out) = self.rays()?;
        let (r_in, p_in) = self.truncation(a_in);
        let (r_out, p_out) = self.truncation(a_out);
        Ok((ContourPath::rays(a_in, r_in, a_out, r_out), p_in.max(p_out)))
    }

    /// The integral with its estimated error; `tol` is relative to the largest integrand value.
    pub fn integrate(&self, tol: f64) -> Result<(C64, f64)> {
        let (path, peak) = self.path_and_peak()?;
        let tol = tol * peak.exp();
        let f = |t: C64| self.exponent(t).exp();
        let mut total = C64::new(0.0, 0.0);
        let mut err = 0.0;
        for w in path.waypoints.windows(2) {
            // split each leg so the adaptive rule sees the oscillation scale
            let pieces = 16;
            for k in 0..pieces {
                let a = w[0] + (w[1] - w[0]) * (k as f64 / pieces as f64);
                let b = w[0] + (w[1] - w[0]) * ((k + 1) as f64 / pieces as f64);
                let r = integrate_segment(&f, a, b, tol / (2.0 * pieces as f64))?;
                total += r.value;
                err += r.est_error;
            }
        }
        Ok((total, err))
    }
}

/// Pe(x, y) = ∫ exp(i(t⁴ + x t² + y t)) dt for |x|, |y| <= 8.
pub fn pearcey(x: f64, y: f64) -> Result<C64> {
    if !(x.abs() <= PEARCEY_WINDOW && y.abs() <= PEARCEY_WINDOW) {
        return Err(Error::OutOfWindow(if x.abs() > y.abs() { x } else { y }));
    }
    Ok(Quartic { c4: 1.0, c2: x, c1: y }.integrate(1e-12)?.0)
}

/// Local quartic model of the integrand exponent at q:
/// 2(S(q - s²) - S(q))/ħ ≈ a s⁴ + b s², with a = g'/ħ and b = -2g/ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticMode {
    pub a: f64,
    pub b: f64,
    /// ∫ exp(i(a s⁴ + b s²)) ds over the scanned contour.
    pub integral: C64,
    pub est_error: f64,
}

pub fn quartic_coefficients(ctx: &crate::action::ProblemContext, q: f64) -> Result<(f64, f64)> {
    let v = crate::action::action_real(ctx, q)?;
    let g = v.momentum;
    if g.norm() < 1e-8 || g.im.abs() > 1e-12 * g.norm() {
        return Err(Error::InvalidInput(format!("quadratic mode needs real nonzero momentum at q = {q}")));
    }
    let dv = ctx.spec.derivative(C64::new(q, 0.0)).re;
    let g_prime = -dv / g.re;
    Ok((g_prime / ctx.hbar, -2.0 * g.re / ctx.hbar))
}

pub fn quadratic_mode(ctx: &crate::action::ProblemContext, q: f64) -> Result<QuadraticMode> {
    let (a, b) = quartic_coefficients(ctx, q)?;
    let (integral, est_error) = Quartic { c4: a, c2: b, c1: 0.0 }.integrate(1e-12)?;
    Ok(QuadraticMode { a, b, integral, est_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pe00() -> C64 {
        C64::from_polar(GAMMA_QUARTER / 2.0, PI / 8.0)
    }

    #[test]
    fn value_at_origin() {
        let p = pearcey(0.0, 0.0).unwrap();
        assert!((p - pe00()).norm() < 1e-10, "{p}");
        assert!((pe00().norm() - 1.8128050).abs() < 1e-7);
    }

    #[test]
    fn rays_come_from_the_scanner() {
        let (a_in, a_out) = Quartic { c4: 1.0, c2: 0.0, c1: 0.0 }.rays().unwrap();
        assert!((a_out - PI / 8.0).abs() < 1e-3, "{a_out}");
        assert!((a_in - 9.0 * PI / 8.0).abs() < 1e-3, "{a_in}");
    }

    #[test]
    fn even_in_y() {
        for &(x, y) in &[(1.0, 2.0), (-3.0, 0.5), (-6.0, 7.5)] {
            let a = pearcey(x, y).unwrap();
            let b = pearcey(x, -y).unwrap();
            assert!((a - b).norm() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn quartic_reduction() {
        let (a, b) = (0.7, -2.3);
        let lhs = Quartic { c4: a, c2: b, c1: 0.0 }.integrate(1e-12).unwrap().0;
        let rhs = pearcey(b / a.sqrt(), 0.0).unwrap() * a.powf(-0.25);
        assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn negative_quartic_is_the_conjugate_problem() {
        let q = Quartic { c4: -1.0, c2: 0.4, c1: 0.0 }.integrate(1e-12).unwrap().0;
        let p = pearcey(-0.4, 0.0).unwrap().conj();
        assert!((q - p).norm() < 1e-9, "{q} {p}");
    }

    #[test]
    fn quadratic_mode_of_inverted_oscillator() {
        use crate::action::ProblemContext;
        use crate::potential::PotentialSpec;
        let ctx = ProblemContext::new(PotentialSpec::polynomial(vec![0.0, 0.0, -0.5]).unwrap(), 0.1, 0.1).unwrap();
        let m = quadratic_mode(&ctx, 0.5).unwrap();
        let g = (0.2f64 + 0.25).sqrt();
        assert!((m.a - 0.5 / g / 0.1).abs() < 1e-9);
        assert!((m.b + 2.0 * g / 0.1).abs() < 1e-9);
        assert!(m.b / m.a.sqrt() >= -PEARCEY_WINDOW);
        let rhs = pearcey(m.b / m.a.sqrt(), 0.0).unwrap() * m.a.powf(-0.25);
        assert!((m.integral - rhs).norm() < 1e-6, "{} {}", m.integral, rhs);
    }

    #[test]
    fn window() {
        assert!(pearcey(9.0, 0.0).is_err());
    }
}
