//! Decay sectors of the integrand, its branch-point singularities, and
//! singularity-avoiding integration paths.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64 as C64;

use crate::action::ProblemContext;
use crate::error::{Error, Result};
use crate::wavefunction::{Integrand, IntegrandCarry};

/// Local behaviour of the action at a singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularityKind {
    /// Simple turning point: S ~ (s - s_j)^{3/2}.
    Simple,
    /// Double root: S ~ (s - s_j)^2.
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity {
    pub s: C64,
    pub source: C64,
    pub kind: SingularityKind,
    /// Member of a pair coalescing at the origin (q within δ² of a real turning point);
    /// paths run between the pair through s = 0 and clearance is not enforced.
    pub coalescing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularitySet {
    pub q: f64,
    pub points: Vec<Singularity>,
}

/// Points s with q - s² a turning point.
pub fn singularities(ctx: &ProblemContext, q: f64) -> SingularitySet {
    let floor = 1e-2;
    let mut points = Vec::new();
    for tp in &ctx.turning_points {
        let kind = if tp.multiplicity >= 2 { SingularityKind::Double } else { SingularityKind::Simple };
        let w = C64::new(q, 0.0) - tp.location;
        let root = w.sqrt();
        let coalescing = root.norm() < floor;
        if w.norm() <= 1e-13 * q.abs().max(1.0) {
            points.push(Singularity { s: C64::new(0.0, 0.0), source: tp.location, kind, coalescing: true });
        } else {
            points.push(Singularity { s: root, source: tp.location, kind, coalescing });
            points.push(Singularity { s: -root, source: tp.location, kind, coalescing });
        }
    }
    SingularitySet { q, points }
}

impl SingularitySet {
    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.s.norm()).fold(0.0, f64::max)
    }

    /// Default clearance: max(1e-2, 0.05 × smallest pairwise distance).
    pub fn default_delta_avoid(&self) -> f64 {
        let pts: Vec<C64> = self.points.iter().filter(|p| !p.coalescing).map(|p| p.s).collect();
        let mut dmin = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                dmin = dmin.min((pts[i] - pts[j]).norm());
            }
        }
        if dmin.is_finite() { (0.05 * dmin).max(1e-2) } else { 1e-2 }
    }

    pub fn delta_avoid(&self, ctx: &ProblemContext) -> f64 {
        ctx.settings.delta_avoid.unwrap_or_else(|| self.default_delta_avoid())
    }

    fn obstacles(&self) -> impl Iterator<Item = &Singularity> {
        self.points.iter().filter(|p| !p.coalescing)
    }
}

/// Distance from point p to segment [a, b].
pub fn segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Angular interval [lo, hi] in radians, lo in [0, 2π), hi > lo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub lo: f64,
    pub hi: f64,
}

impl Sector {
    pub fn mid(&self) -> f64 {
        wrap(0.5 * (self.lo + self.hi))
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, angle: f64) -> bool {
        let a = wrap(angle - self.lo);
        a <= self.width()
    }

    pub fn lo_deg(&self) -> f64 {
        self.lo.to_degrees()
    }

    pub fn hi_deg(&self) -> f64 {
        self.hi.to_degrees()
    }
}

/// Angle reduced to [0, 2π).
pub fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU { 0.0 } else { r }
}

/// Large-|s| classification of the integrand exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorMap {
    pub q: f64,
    pub radius: f64,
    pub base_angle: f64,
    /// (angle in [0, 2π), real part of the exponent), sorted by angle.
    pub samples: Vec<(f64, f64)>,
    pub sectors: Vec<Sector>,
}

impl SectorMap {
    pub fn sector(&self, idx: usize) -> Result<Sector> {
        self.sectors
            .get(idx)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("sector index {idx} out of range (have {})", self.sectors.len())))
    }

    pub fn index_of(&self, angle: f64) -> Option<usize> {
        self.sectors.iter().position(|s| s.contains(angle))
    }
}

fn hysteresis_states(e: &[f64], tau: f64) -> Option<Vec<bool>> {
    let n = e.len();
    let first = e.iter().position(|&v| v < -tau || v > tau)?;
    let mut state = vec![false; n];
    let mut cur = e[first] < -tau;
    for k in 0..n {
        let i = (first + k) % n;
        if e[i] < -tau {
            cur = true;
        } else if e[i] > tau {
            cur = false;
        }
        state[i] = cur;
    }
    Some(state)
}

fn crossing(a0: f64, e0: f64, a1: f64, e1: f64) -> f64 {
    if e1 == e0 {
        return 0.5 * (a0 + a1);
    }
    a0 + (a1 - a0) * (0.0 - e0) / (e1 - e0)
}

/// Extract decay sectors from exponent samples at equally spaced angles starting at `base`.
fn extract_sectors(base: f64, e: &[f64], tau: f64) -> Vec<Sector> {
    let n = e.len();
    let step = TAU / n as f64;
    let angle = |k: isize| base + step * k as f64;
    let idx = |k: isize| k.rem_euclid(n as isize) as usize;
    let Some(state) = hysteresis_states(e, tau) else {
        return Vec::new();
    };
    if state.iter().all(|&d| d) {
        return vec![Sector { lo: wrap(base), hi: wrap(base) + TAU }];
    }
    let mut out = Vec::new();
    for k in 0..n as isize {
        // a decay run starts at k
        if state[idx(k)] && !state[idx(k - 1)] {
            let mut end = k;
            while state[idx(end + 1)] {
                end += 1;
            }
            // refine to zero crossings of the exponent near the state transitions
            let mut i = k;
            while e[idx(i - 1)] < 0.0 && i > k - n as isize / 4 {
                i -= 1;
            }
            while e[idx(i)] >= 0.0 && i < end {
                i += 1;
            }
            let lo = crossing(angle(i - 1), e[idx(i - 1)], angle(i), e[idx(i)]);
            let mut j = end;
            while e[idx(j + 1)] < 0.0 && j < end + n as isize / 4 {
                j += 1;
            }
            while e[idx(j)] >= 0.0 && j > i {
                j -= 1;
            }
            let hi = crossing(angle(j), e[idx(j)], angle(j + 1), e[idx(j + 1)]);
            let lo_w = wrap(lo);
            out.push(Sector { lo: lo_w, hi: lo_w + (hi - lo) });
        }
    }
    out.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
    out
}

fn interp_circular(base: f64, e: &[f64], angle: f64) -> f64 {
    let n = e.len();
    let step = TAU / n as f64;
    let x = wrap(angle - base) / step;
    let k = x.floor() as usize % n;
    let f = x - x.floor();
    e[k] * (1.0 - f) + e[(k + 1) % n] * f
}

/// Sector scan for any exponent given as a function of (radius, angles) -> Re exponent.
pub fn scan_exponent<F>(mut eval: F, q: f64, radius: f64, n_angles: usize, base: f64, tau: f64) -> Result<SectorMap>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    if n_angles < 64 {
        return Err(Error::InvalidInput("n_angles must be at least 64".into()));
    }
    let step = TAU / n_angles as f64;
    let angles: Vec<f64> = (0..n_angles).map(|k| base + step * k as f64).collect();
    let e = eval(radius, &angles)?;
    let e_far = eval(1.5 * radius, &angles)?;
    let candidates = extract_sectors(base, &e, tau);
    let sectors: Vec<Sector> = candidates
        .into_iter()
        .filter(|s| {
            let m = s.mid();
            let near = interp_circular(base, &e, m);
            let far = interp_circular(base, &e_far, m);
            near < -tau && far < near
        })
        .collect();
    if sectors.is_empty() {
        return Err(Error::SectorDegenerate { radius });
    }
    let mut samples: Vec<(f64, f64)> = angles.iter().map(|&a| wrap(a)).zip(e.iter().copied()).collect();
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(SectorMap { q, radius, base_angle: wrap(base), samples, sectors })
}

/// Preferred outgoing direction of the principal path: steepest descent of -2i g s²/ħ.
pub fn preferred_out_angle(g: C64) -> f64 {
    wrap(-FRAC_PI_4 - 0.5 * g.arg())
}

/// Nearest angle to `want` whose ray keeps clearance `delta` from every obstacle.
fn clear_angle(sing: &SingularitySet, want: f64, delta: f64) -> f64 {
    for k in 0..720 {
        let d = (k as f64 * 0.25).to_radians();
        for a in [want + d, want - d] {
            let far = C64::from_polar(1e6, a);
            if sing.obstacles().all(|p| segment_distance(p.s, C64::new(0.0, 0.0), far) >= delta) {
                return wrap(a);
            }
        }
    }
    wrap(want)
}

/// Exponent Re[2i(S(q - s²) - S(q))/ħ] around the circle |s| = radius on one sheet:
/// continued out along the base ray, then around the circle.
fn circle_exponents(f: &Integrand, base: f64, radius: f64, angles: &[f64]) -> Result<Vec<f64>> {
    let mut c = f.advance(f.origin(), C64::from_polar(radius, base))?;
    let mut out = Vec::with_capacity(angles.len());
    for &a in angles {
        c = f.advance(c, C64::from_polar(radius, a))?;
        out.push(f.exponent(&c).re);
    }
    Ok(out)
}

/// Decay sectors of exp(2iS(q - s²)/ħ) at radius R (single-sheet circle continuation).
pub fn scan_sectors(ctx: &ProblemContext, q: f64, radius: f64, n_angles: usize) -> Result<SectorMap> {
    let sing = singularities(ctx, q);
    let delta = sing.delta_avoid(ctx);
    if radius <= sing.max_radius() + delta {
        return Err(Error::InvalidInput(format!(
            "scan radius {radius} must exceed max |s_j| + δ = {}",
            sing.max_radius() + delta
        )));
    }
    let f = Integrand::new(ctx, q)?;
    let g = ctx.momentum(C64::new(q, 0.0), None);
    let base = clear_angle(&sing, preferred_out_angle(g), delta);
    scan_exponent(
        |r, angles| circle_exponents(&f, base, r, angles),
        q,
        radius,
        n_angles,
        base,
        ctx.settings.tau_decay,
    )
}

/// Default scan radius: comfortably outside the singularities and beyond the saddle scale.
pub fn default_scan_radius(ctx: &ProblemContext, q: f64) -> f64 {
    let sing = singularities(ctx, q);
    let r_sing = sing.max_radius();
    // where |2 g s²/ħ| reaches a few times τ for the leading quadratic term
    let g = ctx.momentum(C64::new(q, 0.0), None).norm().max(1e-3);
    let r_saddle = (ctx.settings.tau_decay * ctx.hbar / g).sqrt();
    (2.0 * r_sing + 0.1).max(2.0 * r_saddle).max(1.0)
}

/// Piecewise-linear directed path in the s-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourPath {
    pub waypoints: Vec<C64>,
    pub sector_in: Option<usize>,
    pub sector_out: Option<usize>,
    pub clearance: f64,
}

impl ContourPath {
    /// Path through the origin between two rays.
    pub fn rays(angle_in: f64, radius_in: f64, angle_out: f64, radius_out: f64) -> Self {
        ContourPath {
            waypoints: vec![C64::from_polar(radius_in, angle_in), C64::new(0.0, 0.0), C64::from_polar(radius_out, angle_out)],
            sector_in: None,
            sector_out: None,
            clearance: f64::INFINITY,
        }
    }

    pub fn reversed(&self) -> Self {
        let mut w = self.waypoints.clone();
        w.reverse();
        ContourPath { waypoints: w, sector_in: self.sector_out, sector_out: self.sector_in, clearance: self.clearance }
    }

    /// Mirror image under complex conjugation.
    pub fn conjugated(&self) -> Self {
        ContourPath {
            waypoints: self.waypoints.iter().map(|z| z.conj()).collect(),
            sector_in: None,
            sector_out: None,
            clearance: self.clearance,
        }
    }

    /// Minimum distance from the path to non-coalescing singularities.
    pub fn clearance_against(&self, sing: &SingularitySet) -> f64 {
        let mut d = f64::INFINITY;
        for w in self.waypoints.windows(2) {
            for p in sing.obstacles() {
                d = d.min(segment_distance(p.s, w[0], w[1]));
            }
        }
        d
    }

    pub fn radius(&self) -> f64 {
        self.waypoints.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn arc_points(center: C64, radius: f64, from: f64, sweep: f64, m: usize) -> Vec<C64> {
    (1..m).map(|k| center + C64::from_polar(radius, from + sweep * k as f64 / m as f64)).collect()
}

/// Replace the segment a→b by a detour around every disk it enters.
fn detour_segment(a: C64, b: C64, sing: &SingularitySet, delta: f64) -> Result<Vec<C64>> {
    let d = b - a;
    let len = d.norm();
    let mut hits: Vec<(f64, C64)> = sing
        .obstacles()
        .filter(|p| segment_distance(p.s, a, b) < delta)
        .map(|p| ((((p.s - a) * d.conj()).re / (len * len)), p.s))
        .collect();
    hits.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let m = 16;
    // polygon circumscribing the disk keeps every chord at distance >= delta
    let rho = 1.05 * delta / (PI / m as f64).cos();
    let mut out = Vec::new();
    for (_, c) in hits {
        if (a - c).norm() < rho || (b - c).norm() < rho {
            return Err(Error::PathBlocked(format!("waypoint inside the clearance disk around {c}")));
        }
        // intersection of the line a + t d with the circle |z - c| = rho
        let u = d / len;
        let proj = ((c - a) * u.conj()).re;
        let perp2 = (c - a).norm_sqr() - proj * proj;
        let half = (rho * rho - perp2).max(0.0).sqrt();
        let enter = a + u * (proj - half);
        let exit = a + u * (proj + half);
        let th_in = (enter - c).arg();
        let th_out = (exit - c).arg();
        let ccw = wrap(th_out - th_in);
        let cw = ccw - TAU;
        // shorter side; tie goes counterclockwise
        let sweep = if ccw <= -cw { ccw } else { cw };
        out.push(enter);
        out.extend(arc_points(c, rho, th_in, sweep, m));
        out.push(exit);
    }
    Ok(out)
}

/// Ray in along mid(I_in), through the origin, ray out along mid(I_out), with detours.
pub fn build_path(
    sectors: &SectorMap,
    sing: &SingularitySet,
    sector_in: usize,
    sector_out: usize,
    r_trunc: f64,
    delta_avoid: f64,
) -> Result<ContourPath> {
    if sector_in == sector_out {
        return Err(Error::InvalidInput("sector_in and sector_out must differ".into()));
    }
    let i_in = sectors.sector(sector_in)?;
    let i_out = sectors.sector(sector_out)?;
    let start = C64::from_polar(r_trunc, i_in.mid());
    let end = C64::from_polar(r_trunc, i_out.mid());
    let corners = [start, C64::new(0.0, 0.0), end];
    let mut waypoints = vec![start];
    for w in corners.windows(2) {
        waypoints.extend(detour_segment(w[0], w[1], sing, delta_avoid)?);
        waypoints.push(w[1]);
    }
    let mut path = ContourPath { waypoints, sector_in: Some(sector_in), sector_out: Some(sector_out), clearance: 0.0 };
    path.clearance = path.clearance_against(sing);
    if path.clearance < delta_avoid {
        return Err(Error::PathBlocked(format!(
            "overlapping clearance disks leave only {:e} of the required {delta_avoid:e}",
            path.clearance
        )));
    }
    Ok(path)
}

/// Ray directions and radii for a path through the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPlan {
    pub angle_in: f64,
    pub angle_out: f64,
    pub radius_in: f64,
    pub radius_out: f64,
}

impl RayPlan {
    pub fn path(&self) -> ContourPath {
        ContourPath::rays(self.angle_in, self.radius_in, self.angle_out, self.radius_out)
    }
}

const PLAN_ANGLES: usize = 720;
/// Largest rise of the exponent above its value at s = 0 tolerated along a ray.
const CLIMB_LIMIT: f64 = 15.0;

/// Ray-picture probe: continue from s = 0 outward; the ray is usable when the exponent
/// falls `depth` below its running maximum beyond `r_min` without climbing too high.
fn probe_ray(f: &Integrand, angle: f64, r_min: f64, depth: f64) -> Option<f64> {
    let dir = C64::from_polar(1.0, angle);
    let mut c: IntegrandCarry = f.origin();
    let mut e_max: f64 = 0.0;
    let mut r = 0.0;
    let mut prev = 0.0;
    let r_cap = 64.0 * r_min;
    let mut k = 0;
    while r < r_cap {
        k += 1;
        r = if k <= 32 { r_min * k as f64 / 32.0 } else { r * 1.1 };
        c = f.advance(c, dir * r).ok()?;
        let e = f.exponent(&c).re;
        if !e.is_finite() || e > 700.0 {
            return None;
        }
        e_max = e_max.max(e);
        if e_max > CLIMB_LIMIT {
            return None;
        }
        if r >= r_min && e <= e_max - depth && e < prev {
            return Some(r);
        }
        prev = e;
    }
    None
}

fn blocked_angles(ctx: &ProblemContext, qs: &[f64], angles: &[f64]) -> Vec<bool> {
    let (lo, hi) = (qs[0], qs[qs.len() - 1]);
    let mut sample: Vec<f64> = qs.to_vec();
    if hi > lo {
        sample.extend((0..=800).map(|k| lo + (hi - lo) * k as f64 / 800.0));
    }
    let mut blocked = vec![false; angles.len()];
    for &q in &sample {
        let sing = singularities(ctx, q);
        let delta = sing.delta_avoid(ctx);
        for (k, &a) in angles.iter().enumerate() {
            if blocked[k] {
                continue;
            }
            let far = C64::from_polar(1e6, a);
            if sing.obstacles().any(|p| segment_distance(p.s, C64::new(0.0, 0.0), far) < delta) {
                blocked[k] = true;
            }
        }
    }
    blocked
}

/// Maximal runs of `true` on the circular index set, as (start, len).
fn circular_runs(valid: &[bool]) -> Vec<(usize, usize)> {
    let n = valid.len();
    if valid.iter().all(|&v| v) {
        return vec![(0, n)];
    }
    let mut runs = Vec::new();
    for k in 0..n {
        if valid[k] && !valid[(k + n - 1) % n] {
            let mut len = 0;
            while valid[(k + len) % n] {
                len += 1;
            }
            runs.push((k, len));
        }
    }
    runs
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(TAU - d)
}

/// Pick an angle near `want` inside one of the runs, away from the run's edges.
fn choose_in_runs(runs: &[(usize, usize)], step: f64, want: f64, exclude: Option<usize>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, &(start, len)) in runs.iter().enumerate() {
        if Some(i) == exclude || len < 2 {
            continue;
        }
        let lo = start as f64 * step;
        let w = (len - 1) as f64 * step;
        let rel = wrap(want - lo);
        let inside = rel <= w;
        let dist = if inside { 0.0 } else { angular_distance(want, lo).min(angular_distance(want, lo + w)) };
        let clamped = if inside { rel.clamp(0.25 * w, 0.75 * w) } else if angular_distance(want, lo) < angular_distance(want, lo + w) { 0.25 * w } else { 0.75 * w };
        let angle = wrap(lo + clamped);
        let better = match best {
            None => true,
            Some((_, _, d)) => dist < d - 1e-12,
        };
        if better {
            best = Some((i, angle, dist));
        }
    }
    best.map(|(i, a, _)| (i, a))
}

/// Plan the principal path for a whole grid: straight rays through the origin that avoid
/// every singularity trajectory over the grid range and decay on the ray-continued sheet,
/// as close as possible to the steepest-descent directions of the saddle at s = 0.
pub fn plan_rays(ctx: &ProblemContext, qs: &[f64]) -> Result<RayPlan> {
    if qs.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let mut grid = qs.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = grid.len();
    let q_ref = *grid
        .iter()
        .max_by(|a, b| {
            let ga = ctx.momentum(C64::new(**a, 0.0), None).norm();
            let gb = ctx.momentum(C64::new(**b, 0.0), None).norm();
            ga.partial_cmp(&gb).unwrap()
        })
        .unwrap();
    let g_ref = ctx.momentum(C64::new(q_ref, 0.0), None);
    let want_out = preferred_out_angle(g_ref);
    let want_in = wrap(want_out + PI);

    let step = TAU / PLAN_ANGLES as f64;
    let angles: Vec<f64> = (0..PLAN_ANGLES).map(|k| k as f64 * step).collect();
    let mut valid: Vec<bool> = blocked_angles(ctx, &grid, &angles).iter().map(|b| !b).collect();

    let mut probes: Vec<f64> = vec![grid[0], grid[n / 4], grid[n / 2], grid[(3 * n) / 4], grid[n - 1], q_ref];
    probes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    probes.dedup();
    let r_sing = grid.iter().map(|&q| singularities(ctx, q).max_radius()).fold(0.0, f64::max);
    let depth = ctx.settings.trunc_depth + 4.0;
    let integrands = probes.iter().map(|&q| Integrand::new(ctx, q)).collect::<Result<Vec<_>>>()?;
    let r_min_for = |f: &Integrand| {
        let g = ctx.momentum(C64::new(f.q, 0.0), None).norm().max(1e-3);
        (2.0 * r_sing).max((ctx.settings.tau_decay * ctx.hbar / g).sqrt()).max(0.25)
    };
    for f in &integrands {
        let r_min = r_min_for(f);
        for (k, &a) in angles.iter().enumerate() {
            if valid[k] && probe_ray(f, a, r_min, depth).is_none() {
                valid[k] = false;
            }
        }
    }
    let runs = circular_runs(&valid);
    let (run_out, angle_out) = choose_in_runs(&runs, step, want_out, None)
        .ok_or_else(|| Error::PathBlocked("no admissible outgoing ray".into()))?;
    let (_, angle_in) = choose_in_runs(&runs, step, want_in, Some(run_out))
        .ok_or_else(|| Error::PathBlocked("no admissible incoming ray distinct from the outgoing one".into()))?;
    let mut radius_in: f64 = 0.0;
    let mut radius_out: f64 = 0.0;
    for f in &integrands {
        let r_min = r_min_for(f);
        let ri = probe_ray(f, angle_in, r_min, depth)
            .ok_or_else(|| Error::PathBlocked("chosen incoming ray failed to decay".into()))?;
        let ro = probe_ray(f, angle_out, r_min, depth)
            .ok_or_else(|| Error::PathBlocked("chosen outgoing ray failed to decay".into()))?;
        radius_in = radius_in.max(ri);
        radius_out = radius_out.max(ro);
    }
    Ok(RayPlan { angle_in, angle_out, radius_in: 1.2 * radius_in, radius_out: 1.2 * radius_out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;
    use crate::wavefunction::evaluate_phi;
    use proptest::prelude::*;

    fn ctx(coeffs: Vec<f64>, e: f64, hbar: f64) -> ProblemContext {
        ProblemContext::new(PotentialSpec::polynomial(coeffs).unwrap(), e, hbar).unwrap()
    }

    fn near(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    #[test]
    fn free_sectors_are_exact_quadrants() {
        let c = ctx(vec![0.0], 0.5, 1.0);
        let map = scan_sectors(&c, 0.0, 3.0, 720).unwrap();
        assert_eq!(map.sectors.len(), 2);
        let s0 = map.sectors[0];
        let s1 = map.sectors[1];
        assert!(near(s0.lo_deg(), 90.0, 0.01) && near(s0.hi_deg(), 180.0, 0.01), "{s0:?}");
        assert!(near(s1.lo_deg(), 270.0, 0.01) && near(s1.hi_deg(), 360.0, 0.01), "{s1:?}");
    }

    #[test]
    fn sector_count_is_degree_plus_two() {
        let cases: Vec<(Vec<f64>, f64)> = vec![
            (vec![0.0, -1.0], 0.0),
            (vec![0.0, 0.0, 0.5], 0.5),
            (vec![0.0, 0.3, 0.0, 0.2], 0.4),
            (vec![0.0, 0.0, -1.0, 0.0, 1.0], -0.1),
        ];
        for (coeffs, e) in cases {
            let n = coeffs.len() - 1;
            let c = ctx(coeffs, e, 1.0);
            let q = 0.3;
            let map = scan_sectors(&c, q, default_scan_radius(&c, q), 720).unwrap();
            assert_eq!(map.sectors.len(), n + 2, "degree {n}: {:?}", map.sectors);
            // decay sectors do not overlap: growth sectors separate them
            for w in map.sectors.windows(2) {
                assert!(w[0].hi < w[1].lo);
            }
        }
    }

    #[test]
    fn harmonic_singularities() {
        let c = ctx(vec![0.0, 0.0, 0.5], 2.0, 1.0);
        let mut s: Vec<C64> = singularities(&c, 0.0).points.iter().map(|p| p.s).collect();
        s.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        let r2 = 2f64.sqrt();
        let want = [C64::new(-r2, 0.0), C64::new(0.0, -r2), C64::new(0.0, r2), C64::new(r2, 0.0)];
        for (a, b) in s.iter().zip(&want) {
            assert!((a - b).norm() < 1e-9, "{s:?}");
        }
        let at_tp = singularities(&c, 2.0);
        assert_eq!(at_tp.points.len(), 3);
        assert_eq!(at_tp.points.iter().filter(|p| p.s.norm() == 0.0).count(), 1);
        assert!(at_tp.points.iter().any(|p| (p.s - 2.0).norm() < 1e-9));
        assert!(at_tp.points.iter().any(|p| (p.s + 2.0).norm() < 1e-9));
    }

    #[test]
    fn free_particle_has_no_singularities() {
        assert!(singularities(&ctx(vec![0.0], 0.5, 1.0), 0.7).points.is_empty());
    }

    #[test]
    fn free_path_gives_fresnel_value() {
        let c = ctx(vec![0.0], 0.5, 1.0);
        let map = scan_sectors(&c, 0.0, 3.0, 720).unwrap();
        let sing = singularities(&c, 0.0);
        let path = build_path(&map, &sing, 0, 1, 8.0, 1e-2).unwrap();
        assert_eq!(path.waypoints.len(), 3);
        assert!(map.sectors[0].contains(path.waypoints[0].arg()));
        assert!(map.sectors[1].contains(path.waypoints[2].arg()));
        let (phi, _) = evaluate_phi(&c, 0.0, &path).unwrap();
        let want = C64::from_polar((PI / 2.0).sqrt(), -FRAC_PI_4);
        assert!((phi - want).norm() < 1e-8, "{phi}");
    }

    #[test]
    fn built_paths_keep_clearance() {
        let c = ctx(vec![0.0, 0.0, 0.5], 2.0, 0.5);
        let q = 0.4;
        let map = scan_sectors(&c, q, default_scan_radius(&c, q), 720).unwrap();
        let sing = singularities(&c, q);
        let delta = sing.delta_avoid(&c);
        let r = map.radius.max(2.0 * sing.max_radius());
        let mut built = 0;
        for i in 0..map.sectors.len() {
            for j in 0..map.sectors.len() {
                if i == j {
                    continue;
                }
                if let Ok(p) = build_path(&map, &sing, i, j, r, delta) {
                    built += 1;
                    assert!(p.clearance >= delta);
                    assert!(map.sectors[i].contains(p.waypoints[0].arg()));
                    assert!(map.sectors[j].contains(p.waypoints.last().unwrap().arg()));
                    assert!(near(p.waypoints[0].norm(), r, 1e-12));
                }
            }
        }
        assert!(built > 0);
    }

    #[test]
    fn reversed_path_negates_integral() {
        let c = ctx(vec![0.0, 0.0, 0.5], 0.5, 0.5);
        let plan = plan_rays(&c, &[0.3]).unwrap();
        let p = plan.path();
        let (a, _) = evaluate_phi(&c, 0.3, &p).unwrap();
        let (b, _) = evaluate_phi(&c, 0.3, &p.reversed()).unwrap();
        assert!((a + b).norm() < 1e-12 * a.norm().max(1.0), "{a} {b}");
    }

    #[test]
    fn planner_avoids_singularities_over_the_grid() {
        let c = ctx(vec![0.0, 0.0, 0.5], 0.5, 0.2);
        let grid: Vec<f64> = (0..41).map(|i| -2.0 + 0.1 * i as f64).collect();
        let plan = plan_rays(&c, &grid).unwrap();
        let path = plan.path();
        for &q in &grid {
            let sing = singularities(&c, q);
            assert!(path.clearance_against(&sing) >= sing.delta_avoid(&c), "q = {q}");
        }
    }

    #[test]
    fn sector_index_lookup() {
        let map = SectorMap {
            q: 0.0,
            radius: 1.0,
            base_angle: 0.0,
            samples: Vec::new(),
            sectors: vec![Sector { lo: 0.5, hi: 1.0 }, Sector { lo: 6.0, hi: 6.5 }],
        };
        assert_eq!(map.index_of(0.7), Some(0));
        assert_eq!(map.index_of(0.1), Some(1));
        assert_eq!(map.index_of(3.0), None);
        assert!(map.sector(2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn singularities_are_symmetric(c2 in 0.1f64..2.0, c4 in 0.0f64..1.0, e in 0.1f64..3.0, q in -2.0f64..2.0) {
            let c = ctx(if c4 > 0.05 { vec![0.0, 0.0, c2, 0.0, c4] } else { vec![0.0, 0.0, c2] }, e, 1.0);
            let set = singularities(&c, q);
            for p in &set.points {
                prop_assert!(set.points.iter().any(|o| (o.s + p.s).norm() < 1e-12));
                prop_assert!((p.s * p.s - (C64::new(q, 0.0) - p.source)).norm() < 1e-9 * (1.0 + q.abs()));
            }
        }

        #[test]
        fn jitter_within_homotopy_class_leaves_integral(dx in -1.0f64..1.0, dy in -1.0f64..1.0) {
            let c = ctx(vec![0.0, 0.0, 0.5], 0.5, 0.5);
            let q = 0.3;
            let p = plan_rays(&c, &[q]).unwrap().path();
            let sing = singularities(&c, q);
            let delta = sing.delta_avoid(&c);
            let mut moved = p.clone();
            moved.waypoints[1] = C64::new(dx, dy) * (0.5 * delta / 2f64.sqrt());
            prop_assume!(moved.clearance_against(&sing) >= delta);
            let (a, _) = evaluate_phi(&c, q, &p).unwrap();
            let (b, _) = evaluate_phi(&c, q, &moved).unwrap();
            prop_assert!((a - b).norm() <= 10.0 * c.settings.tol_quad * (1.0 + a.norm()), "{} {}", a, b);
        }
    }
}
