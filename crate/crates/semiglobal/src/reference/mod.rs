//! Independent comparators: WKB branches, Airy and Pearcey integrals, Numerov,
//! the Schrödinger residual and best-fit comparison.

pub mod airy;
pub mod numerov;
pub mod pearcey;

use num_complex::Complex64 as C64;

use crate::action::{action_real, principal_sqrt, ProblemContext};
use crate::error::{Error, Result};
use crate::wavefunction::{uniform_step, WaveSample};

pub use airy::airy;
pub use numerov::{numerov_solve, NumerovBc};
pub use pearcey::{pearcey, quadratic_mode, QuadraticMode, Quartic};

const I: C64 = C64::new(0.0, 1.0);

/// |g| below this is treated as a turning point by [`wkb`].
pub const G_FLOOR: f64 = 1e-8;

/// g^{-1/2} exp(branch·iS/ħ), with g and S continued from the anchor along the real axis.
pub fn wkb(ctx: &ProblemContext, q: f64, branch: i8) -> Result<C64> {
    if branch != 1 && branch != -1 {
        return Err(Error::InvalidInput(format!("branch must be +1 or -1, got {branch}")));
    }
    let v = action_real(ctx, q)?;
    if v.momentum.norm() < G_FLOOR * ctx.energy.abs().max(1.0).sqrt() {
        return Err(Error::AtTurningPoint(q));
    }
    Ok((I * v.action * (branch as f64 / ctx.hbar)).exp() / principal_sqrt(v.momentum))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualPoint {
    pub q: f64,
    /// Normalized residual |-(ħ²/2)ψ'' + (V - E)ψ| / (max|ψ|·max(|E|, 1)).
    pub r: f64,
    /// Estimate of the part of `r` caused by the finite-difference stencil.
    pub grid_err: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResidualProfile {
    pub points: Vec<ResidualPoint>,
}

impl ResidualProfile {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.q, p.r)).collect()
    }

    /// Fails with GridTooCoarse if the stencil error exceeds half the residual anywhere.
    pub fn require_resolved(&self) -> Result<&Self> {
        if let Some(p) = self.points.iter().find(|p| p.grid_err > 0.5 * p.r) {
            return Err(Error::GridTooCoarse(format!(
                "stencil error {} exceeds half the residual {} at q = {}",
                p.grid_err, p.r, p.q
            )));
        }
        Ok(self)
    }

    pub fn median(&self) -> f64 {
        quantile(self.points.iter().map(|p| p.r).collect(), 0.5)
    }

    pub fn p95(&self) -> f64 {
        quantile(self.points.iter().map(|p| p.r).collect(), 0.95)
    }

    pub fn at(&self, q: f64) -> Option<ResidualPoint> {
        self.points
            .iter()
            .min_by(|a, b| (a.q - q).abs().partial_cmp(&(b.q - q).abs()).unwrap())
            .copied()
    }
}

/// Nearest-rank quantile; NaN for an empty list.
pub fn quantile(mut v: Vec<f64>, p: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}

/// Residual of ψ values on a uniform grid.
pub fn residual_of(ctx: &ProblemContext, grid: &[f64], psi: &[C64]) -> Result<ResidualProfile> {
    let n = grid.len();
    if n < 7 || psi.len() != n {
        return Err(Error::InvalidInput("residual needs at least 7 grid points".into()));
    }
    let h = uniform_step(grid)?;
    let scale = psi.iter().map(|p| p.norm()).fold(0.0, f64::max) * ctx.energy.abs().max(1.0);
    if scale == 0.0 {
        return Err(Error::NormalizationDegenerate);
    }
    let k = ctx.hbar * ctx.hbar / 2.0;
    let mut points = Vec::with_capacity(n - 4);
    for i in 2..n - 2 {
        let d2 = (-psi[i - 2] + psi[i - 1] * 16.0 - psi[i] * 30.0 + psi[i + 1] * 16.0 - psi[i + 2]) / (12.0 * h * h);
        let v = ctx.spec.eval_real(grid[i]) - ctx.energy;
        let r = (-d2 * k + psi[i] * v).norm() / scale;
        // sixth difference on the nearest 7-point window
        let j = i.clamp(3, n - 4);
        let d6 = psi[j - 3] - psi[j - 2] * 6.0 + psi[j - 1] * 15.0 - psi[j] * 20.0 + psi[j + 1] * 15.0
            - psi[j + 2] * 6.0
            + psi[j + 3];
        let grid_err = k * d6.norm() / (90.0 * h * h) / scale;
        points.push(ResidualPoint { q: grid[i], r, grid_err });
    }
    Ok(ResidualProfile { points })
}

/// Residual of computed samples; interior points only.
pub fn schrodinger_residual(ctx: &ProblemContext, samples: &[WaveSample]) -> Result<ResidualProfile> {
    let grid: Vec<f64> = samples.iter().map(|s| s.q).collect();
    let psi: Vec<C64> = samples.iter().map(|s| s.psi).collect();
    residual_of(ctx, &grid, &psi)
}

/// Residual at each q in `at` from a 7-point stencil of step `h` evaluated on a fixed path,
/// normalized by `psi_max` (max|ψ| over the run grid).
pub fn residual_local<F>(ctx: &ProblemContext, at: &[f64], h: f64, psi_max: f64, mut eval: F) -> Result<ResidualProfile>
where
    F: FnMut(f64) -> Result<C64>,
{
    if !(h > 0.0) || !(psi_max > 0.0) {
        return Err(Error::InvalidInput("stencil step and normalization must be positive".into()));
    }
    let scale = psi_max * ctx.energy.abs().max(1.0);
    let k = ctx.hbar * ctx.hbar / 2.0;
    let mut points = Vec::with_capacity(at.len());
    for &q in at {
        let p = (-3..=3).map(|j| eval(q + h * j as f64)).collect::<Result<Vec<C64>>>()?;
        let d2 = (-p[1] + p[2] * 16.0 - p[3] * 30.0 + p[4] * 16.0 - p[5]) / (12.0 * h * h);
        let v = ctx.spec.eval_real(q) - ctx.energy;
        let r = (-d2 * k + p[3] * v).norm() / scale;
        let d6 = p[0] - p[1] * 6.0 + p[2] * 15.0 - p[3] * 20.0 + p[4] * 15.0 - p[5] * 6.0 + p[6];
        points.push(ResidualPoint { q, r, grid_err: k * d6.norm() / (90.0 * h * h) / scale });
    }
    Ok(ResidualProfile { points })
}

/// ψ₁(q)ψ₂(q_e) - ψ₂(q)ψ₁(q_e): the combination of a pair that vanishes at index `edge`.
pub fn decaying_combination(psi_1: &[C64], psi_2: &[C64], edge: usize) -> Vec<C64> {
    let (a, b) = (psi_2[edge], psi_1[edge]);
    psi_1.iter().zip(psi_2).map(|(x, y)| x * a - y * b).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonMetadata {
    pub potential: String,
    pub energy: f64,
    pub hbar: f64,
    pub settings: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub grid: Vec<f64>,
    /// samples ≈ a·ref1 + b·ref2
    pub fit: (C64, C64),
    /// ‖samples - fit‖₂ / ‖samples‖₂ over the whole grid.
    pub rel_l2_error: f64,
    /// max |samples - fit| / max |fit| over `region`.
    pub max_rel_error_region: f64,
    pub region: (f64, f64),
    pub residual_profile: Vec<(f64, f64)>,
    pub metadata: ComparisonMetadata,
}

/// Condition number of the Gram matrix above which a two-function fit is rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Least-squares (a, b) for samples ≈ a·r1 + b·r2 (b = 0 without r2).
pub fn fit_pair(samples: &[C64], r1: &[C64], r2: Option<&[C64]>) -> Result<(C64, C64)> {
    let dot = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<C64>();
    let g11 = dot(r1, r1).re;
    if g11 == 0.0 {
        return Err(Error::IllConditionedFit(f64::INFINITY));
    }
    let Some(r2) = r2 else {
        return Ok((dot(r1, samples) / g11, C64::new(0.0, 0.0)));
    };
    let g22 = dot(r2, r2).re;
    let g12 = dot(r1, r2);
    let det = g11 * g22 - g12.norm_sqr();
    let tr = g11 + g22;
    let disc = ((g11 - g22).powi(2) + 4.0 * g12.norm_sqr()).sqrt();
    let (lmax, lmin) = (0.5 * (tr + disc), 0.5 * (tr - disc));
    let cond = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    if !(cond <= MAX_GRAM_CONDITION) || det <= 0.0 {
        return Err(Error::IllConditionedFit(cond));
    }
    let c1 = dot(r1, samples);
    let c2 = dot(r2, samples);
    let a = (c1 * g22 - g12 * c2) / det;
    let b = (c2 * g11 - g12.conj() * c1) / det;
    Ok((a, b))
}

/// Best fit of `samples` in the span of the reference grid(s), with error norms.
pub fn compare(
    ctx: &ProblemContext,
    potential: &str,
    grid: &[f64],
    samples: &[C64],
    ref_1: &[C64],
    ref_2: Option<&[C64]>,
    region: (f64, f64),
) -> Result<ComparisonReport> {
    let n = grid.len();
    if samples.len() != n || ref_1.len() != n || ref_2.is_some_and(|r| r.len() != n) {
        return Err(Error::InvalidInput("samples and references must share the grid".into()));
    }
    let (a, b) = fit_pair(samples, ref_1, ref_2)?;
    let fitted: Vec<C64> = (0..n).map(|i| a * ref_1[i] + ref_2.map_or(C64::new(0.0, 0.0), |r| b * r[i])).collect();
    let num: f64 = samples.iter().zip(&fitted).map(|(s, f)| (s - f).norm_sqr()).sum();
    let den: f64 = samples.iter().map(|s| s.norm_sqr()).sum();
    let rel_l2_error = if den > 0.0 { (num / den).sqrt() } else { f64::INFINITY };
    let in_region: Vec<usize> = (0..n).filter(|&i| grid[i] >= region.0 && grid[i] <= region.1).collect();
    let fmax = in_region.iter().map(|&i| fitted[i].norm()).fold(0.0, f64::max);
    let dmax = in_region.iter().map(|&i| (samples[i] - fitted[i]).norm()).fold(0.0, f64::max);
    let max_rel_error_region = if fmax > 0.0 { dmax / fmax } else { f64::NAN };
    let residual_profile = if n >= 7 {
        residual_of(ctx, grid, samples).map(|p| p.pairs()).unwrap_or_default()
    } else {
        Vec::new()
    };
    let s = &ctx.settings;
    Ok(ComparisonReport {
        grid: grid.to_vec(),
        fit: (a, b),
        rel_l2_error,
        max_rel_error_region,
        region,
        residual_profile,
        metadata: ComparisonMetadata {
            potential: potential.to_string(),
            energy: ctx.energy,
            hbar: ctx.hbar,
            settings: vec![
                ("tol_quad".into(), crate::format::num(s.tol_quad)),
                ("tol_action".into(), crate::format::num(s.tol_action)),
                ("root_tol".into(), crate::format::num(s.root_tol)),
                ("trunc_depth".into(), crate::format::num(s.trunc_depth)),
            ],
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;

    fn ctx(coeffs: Vec<f64>, e: f64, hbar: f64) -> ProblemContext {
        ProblemContext::new(PotentialSpec::polynomial(coeffs).unwrap(), e, hbar).unwrap()
    }

    #[test]
    fn free_wkb_is_plane_wave() {
        let c = ctx(vec![0.0], 0.5, 1.0);
        for &q in &[-2.0, 0.3, 1.7] {
            let w = wkb(&c, q, 1).unwrap();
            assert!((w - C64::new(0.0, q).exp()).norm() < 1e-10, "{q} {w}");
        }
    }

    #[test]
    fn harmonic_wkb_amplitude_at_origin() {
        let c = ctx(vec![0.0, 0.0, 0.5], 0.5, 1.0);
        assert!((wkb(&c, 0.0, -1).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!(matches!(wkb(&c, 1.0, 1), Err(Error::AtTurningPoint(_))));
        assert!(wkb(&c, 1.0 - 1e-6, 1).unwrap().norm() > 20.0);
    }

    #[test]
    fn fit_recovers_multiple() {
        let c = ctx(vec![0.0], 0.5, 1.0);
        let g: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let r1: Vec<C64> = g.iter().map(|&q| C64::new(0.0, q).exp()).collect();
        let r2: Vec<C64> = g.iter().map(|&q| C64::new(0.0, -q).exp()).collect();
        let s: Vec<C64> = r1.iter().map(|v| v * C64::new(0.0, 2.0)).collect();
        let rep = compare(&c, "free", &g, &s, &r1, Some(&r2), (0.0, 5.0)).unwrap();
        assert!((rep.fit.0 - C64::new(0.0, 2.0)).norm() < 1e-12);
        assert!(rep.fit.1.norm() < 1e-12);
        assert!(rep.rel_l2_error < 1e-12);
        let dep: Vec<C64> = r1.iter().map(|v| v * 3.0).collect();
        assert!(matches!(compare(&c, "free", &g, &s, &r1, Some(&dep), (0.0, 5.0)), Err(Error::IllConditionedFit(_))));
    }

    #[test]
    fn fit_gradient_vanishes() {
        let c = ctx(vec![0.0], 0.5, 1.0);
        let g: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let r1: Vec<C64> = g.iter().map(|&q| C64::new(q.cos(), 0.0)).collect();
        let r2: Vec<C64> = g.iter().map(|&q| C64::new(q.sin(), 0.0)).collect();
        let s: Vec<C64> = g.iter().map(|&q| C64::new(q * q, q)).collect();
        let rep = compare(&c, "free", &g, &s, &r1, Some(&r2), (0.0, 4.0)).unwrap();
        let (a, b) = rep.fit;
        let res: Vec<C64> = (0..g.len()).map(|i| s[i] - a * r1[i] - b * r2[i]).collect();
        let g1: C64 = r1.iter().zip(&res).map(|(r, e)| r.conj() * e).sum();
        let g2: C64 = r2.iter().zip(&res).map(|(r, e)| r.conj() * e).sum();
        assert!(g1.norm() < 1e-10 && g2.norm() < 1e-10);
    }

    #[test]
    fn noise_sets_the_error_scale() {
        let c = ctx(vec![0.0], 0.5, 1.0);
        let g: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let r1: Vec<C64> = g.iter().map(|&q| C64::new(0.0, q).exp()).collect();
        // deterministic pseudo-noise orthogonal-ish to r1
        let s: Vec<C64> = r1.iter().enumerate().map(|(i, v)| v + 1e-6 * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let rep = compare(&c, "free", &g, &s, &r1, None, (0.0, 10.0)).unwrap();
        assert!(rep.rel_l2_error > 3e-7 && rep.rel_l2_error < 3e-6, "{}", rep.rel_l2_error);
    }

    #[test]
    fn residual_of_exact_solution_is_small() {
        let c = ctx(vec![0.0], 0.5, 1.0);
        let g: Vec<f64> = (0..101).map(|i| i as f64 * 0.02).collect();
        let psi: Vec<C64> = g.iter().map(|&q| C64::new(0.0, q).exp()).collect();
        let p = residual_of(&c, &g, &psi).unwrap();
        assert_eq!(p.points.len(), 97);
        assert!(p.points.iter().all(|x| x.r < 1e-8));
        // a wrong energy gives an O(1) residual resolved by the grid
        let bad = ctx(vec![0.0], 0.7, 1.0);
        let p = residual_of(&bad, &g, &psi).unwrap();
        assert!(p.median() > 0.1);
        assert!(p.require_resolved().is_ok());
    }

    #[test]
    fn decaying_combination_vanishes_at_edge() {
        let a = vec![C64::new(1.0, 2.0), C64::new(0.5, -1.0), C64::new(3.0, 0.0)];
        let b = vec![C64::new(0.0, 1.0), C64::new(2.0, 2.0), C64::new(-1.0, 1.0)];
        let d = decaying_combination(&a, &b, 2);
        assert!(d[2].norm() < 1e-15);
        assert!(d[0].norm() > 0.0);
    }

    #[test]
    fn quantiles() {
        assert_eq!(quantile(vec![3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile((1..=100).map(|x| x as f64).collect(), 0.95), 95.0);
        assert!(quantile(vec![], 0.5).is_nan());
    }
}
