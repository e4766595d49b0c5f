//! Classical momentum g = sqrt(2(E - V)) and the action S = ∫ g dz continued
//! along complex paths with continuous branch tracking.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::gauss::PanelRule;
use crate::potential::{PotentialSpec, TurningPoint};

/// Numerical settings shared by all evaluations on one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub root_tol: f64,
    /// Absolute tolerance on the contour integral (relative to the integrand at s = 0).
    pub tol_quad: f64,
    /// Relative tolerance for action continuation.
    pub tol_action: f64,
    /// Detour radius around turning points; None selects 1e-3 times the turning-point spread.
    pub delta_branch: Option<f64>,
    /// Clearance radius around integrand singularities; None selects the default rule.
    pub delta_avoid: Option<f64>,
    pub tau_decay: f64,
    /// Integrand truncation depth in exponent units.
    pub trunc_depth: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            root_tol: 1e-9,
            tol_quad: 1e-8,
            tol_action: 1e-10,
            delta_branch: None,
            delta_avoid: None,
            tau_decay: 10.0,
            trunc_depth: 36.0,
        }
    }
}

/// Potential, energy, ħ and action anchor shared by all evaluations.
#[derive(Debug, Clone)]
pub struct ProblemContext {
    pub spec: PotentialSpec,
    pub energy: f64,
    pub hbar: f64,
    pub anchor: C64,
    pub anchor_is_turning_point: bool,
    pub turning_points: Vec<TurningPoint>,
    pub settings: Settings,
    delta_branch: f64,
}

impl ProblemContext {
    /// Context with default settings and the default anchor for a domain centred at 0.
    pub fn new(spec: PotentialSpec, energy: f64, hbar: f64) -> Result<Self> {
        Self::with_settings(spec, energy, hbar, Settings::default())
    }

    pub fn with_settings(spec: PotentialSpec, energy: f64, hbar: f64, settings: Settings) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidInput("hbar must be positive".into()));
        }
        if !energy.is_finite() {
            return Err(Error::InvalidInput("energy must be finite".into()));
        }
        let tps = spec.turning_points(energy, settings.root_tol)?;
        let spread = tps
            .iter()
            .flat_map(|a| tps.iter().map(move |b| (a.location - b.location).norm()))
            .fold(0.0, f64::max);
        let delta_branch = settings
            .delta_branch
            .unwrap_or(if spread > 0.0 { 1e-3 * spread } else { 1e-3 });
        let mut ctx = ProblemContext {
            spec,
            energy,
            hbar,
            anchor: C64::new(0.0, 0.0),
            anchor_is_turning_point: false,
            turning_points: tps,
            settings,
            delta_branch,
        };
        ctx.set_default_anchor(0.0);
        Ok(ctx)
    }

    /// Rightmost real turning point left of `center`, else the leftmost real one, else 0.
    pub fn set_default_anchor(&mut self, center: f64) {
        let real: Vec<f64> = self
            .turning_points
            .iter()
            .filter(|t| t.is_real())
            .map(|t| t.location.re)
            .collect();
        let left = real.iter().copied().filter(|&x| x < center).fold(f64::NEG_INFINITY, f64::max);
        let a = if left.is_finite() {
            left
        } else {
            real.first().copied().unwrap_or(0.0)
        };
        self.set_anchor(C64::new(a, 0.0));
    }

    /// Override the anchor; it is flagged as a turning point when it coincides with one.
    pub fn set_anchor(&mut self, anchor: C64) {
        let hit = self
            .turning_points
            .iter()
            .find(|t| (t.location - anchor).norm() <= 1e-12 * anchor.norm().max(1.0));
        match hit {
            Some(t) => {
                self.anchor = t.location;
                self.anchor_is_turning_point = true;
            }
            None => {
                self.anchor = anchor;
                self.anchor_is_turning_point = false;
            }
        }
    }

    pub fn delta_branch(&self) -> f64 {
        self.delta_branch
    }

    /// 2(E - V(z))
    pub fn g_squared(&self, z: C64) -> C64 {
        (C64::new(self.energy, 0.0) - self.spec.eval(z)) * 2.0
    }

    /// Classical momentum; see [`momentum`].
    pub fn momentum(&self, z: C64, hint: Option<C64>) -> C64 {
        momentum(self, z, hint)
    }

    fn is_turning_point(&self, z: C64) -> Option<&TurningPoint> {
        self.turning_points
            .iter()
            .find(|t| (t.location - z).norm() <= 1e-12 * z.norm().max(1.0))
    }
}

/// Principal square root with the convention Re >= 0, and Im >= 0 when Re = 0.
pub fn principal_sqrt(w: C64) -> C64 {
    let r = w.sqrt();
    if r.re < 0.0 || (r.re == 0.0 && r.im < 0.0) {
        -r
    } else {
        r
    }
}

/// g with g² = 2(E - V(z)); the root with nonnegative inner product against `hint`, or the principal one.
pub fn momentum(ctx: &ProblemContext, z: C64, hint: Option<C64>) -> C64 {
    let g = principal_sqrt(ctx.g_squared(z));
    match hint {
        Some(h) if (g * h.conj()).re < 0.0 => -g,
        _ => g,
    }
}

/// Result of continuing the action to an endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionValue {
    pub action: C64,
    /// dS/dz at the endpoint on the continued sheet.
    pub momentum: C64,
    /// 1 when the continued momentum is minus the principal one at the endpoint.
    pub branch_parity: u8,
    pub path_length: f64,
    pub est_error: f64,
}

/// Continuation state at a point of the r-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Carry {
    pub z: C64,
    pub action: C64,
    pub momentum: C64,
}

/// A parametrized curve z(t), t in [0, 1].
#[derive(Debug, Clone, Copy)]
pub(crate) enum Curve {
    Line { from: C64, to: C64 },
    /// z = tp + (to - tp) t²: starts at a branch point.
    SqrtStart { tp: C64, to: C64 },
    /// z = tp + (from - tp)(1 - t)²: ends at a branch point.
    SqrtEnd { from: C64, tp: C64 },
    Arc { center: C64, radius: f64, theta0: f64, theta1: f64 },
    /// z = base - s(t)², s(t) = s0 + (s1 - s0) t: the image of an s-plane segment.
    Image { base: C64, s0: C64, s1: C64 },
}

impl Curve {
    #[inline]
    pub(crate) fn eval(&self, t: f64) -> (C64, C64) {
        match *self {
            Curve::Line { from, to } => (from + (to - from) * t, to - from),
            Curve::SqrtStart { tp, to } => (tp + (to - tp) * (t * t), (to - tp) * (2.0 * t)),
            Curve::SqrtEnd { from, tp } => {
                let u = 1.0 - t;
                (tp + (from - tp) * (u * u), (from - tp) * (-2.0 * u))
            }
            Curve::Arc { center, radius, theta0, theta1 } => {
                let th = theta0 + (theta1 - theta0) * t;
                let e = C64::from_polar(radius, th);
                (center + e, e * C64::new(0.0, theta1 - theta0))
            }
            Curve::Image { base, s0, s1 } => {
                let ds = s1 - s0;
                let s = s0 + ds * t;
                (base - s * s, s * ds * -2.0)
            }
        }
    }

    fn length(&self) -> f64 {
        match *self {
            Curve::Line { from, to } => (to - from).norm(),
            Curve::SqrtStart { tp, to } => (to - tp).norm(),
            Curve::SqrtEnd { from, tp } => (from - tp).norm(),
            Curve::Arc { radius, theta0, theta1, .. } => radius * (theta1 - theta0).abs(),
            Curve::Image { s0, s1, .. } => {
                // crude but adequate diagnostic: chord of the image
                let a = s0 * s0;
                let b = s1 * s1;
                (b - a).norm()
            }
        }
    }
}

/// Extra integrand evaluated alongside the action: f(t, S(t)) integrated in t.
pub(crate) type Observer<'a> = &'a dyn Fn(f64, C64) -> C64;

pub(crate) struct MarchOutput {
    pub end: Carry,
    pub integral: C64,
    pub err_action: f64,
    pub err_integral: f64,
    pub n_evals: usize,
    /// Largest |f| seen on accepted panels.
    pub peak: f64,
}

struct Panel {
    end: Carry,
    integral: C64,
    n_evals: usize,
    peak: f64,
    consistent: bool,
}

const RATIO_LIMIT: f64 = 1.0;
const MIN_WIDTH: f64 = 1e-14;
const MAX_PANELS: usize = 400_000;

fn next_branch(ctx: &ProblemContext, z: C64, prev: C64, ok: &mut bool) -> C64 {
    let g = principal_sqrt(ctx.g_squared(z));
    if prev.norm() == 0.0 || g.norm() == 0.0 {
        return g;
    }
    let (d_same, d_flip) = ((g - prev).norm(), (g + prev).norm());
    let (g, near, far) = if d_same <= d_flip { (g, d_same, d_flip) } else { (-g, d_flip, d_same) };
    if near >= RATIO_LIMIT * far {
        *ok = false;
    }
    g
}

fn panel(
    ctx: &ProblemContext,
    curve: &Curve,
    a: f64,
    b: f64,
    start: Carry,
    observer: Option<Observer>,
) -> Panel {
    let rule = PanelRule::standard();
    let n = rule.len();
    let half = 0.5 * (b - a);
    let mut ok = true;
    let mut prev = start.momentum;
    let mut ts = [0.0; 16];
    let mut f = [C64::new(0.0, 0.0); 16];
    for j in 0..n {
        let t = a + half * (rule.nodes[j] + 1.0);
        let (z, dz) = curve.eval(t);
        let g = next_branch(ctx, z, prev, &mut ok);
        prev = g;
        ts[j] = t;
        f[j] = g * dz;
    }
    let (zb, _) = curve.eval(b);
    let gb = next_branch(ctx, zb, prev, &mut ok);
    let mut ds = C64::new(0.0, 0.0);
    for j in 0..n {
        ds += f[j] * rule.weights[j];
    }
    let end = Carry { z: zb, action: start.action + ds * half, momentum: gb };
    let mut integral = C64::new(0.0, 0.0);
    let mut peak: f64 = 0.0;
    if let Some(obs) = observer {
        for k in 0..n {
            let mut sk = C64::new(0.0, 0.0);
            for j in 0..n {
                sk += f[j] * rule.cumulative[k][j];
            }
            let v = obs(ts[k], start.action + sk * half);
            peak = peak.max(v.norm());
            integral += v * rule.weights[k];
        }
        integral *= half;
    }
    Panel { end, integral, n_evals: n + 1, peak, consistent: ok }
}

/// Adaptive continuation of the action along `curve`, optionally integrating an observer.
pub(crate) fn march(
    ctx: &ProblemContext,
    curve: &Curve,
    start: Carry,
    observer: Option<Observer>,
    tol_integral: f64,
) -> Result<MarchOutput> {
    let tol_s = ctx.settings.tol_action;
    let mut carry = start;
    let mut out = MarchOutput {
        end: start,
        integral: C64::new(0.0, 0.0),
        err_action: 0.0,
        err_integral: 0.0,
        n_evals: 0,
        peak: 0.0,
    };
    // stack of (a, b, cached whole-panel result computed from the current carry)
    let mut stack: Vec<(f64, f64, Option<Panel>)> = vec![(0.5, 1.0, None), (0.0, 0.5, None)];
    let mut panels = 0usize;
    while let Some((a, b, cached)) = stack.pop() {
        panels += 1;
        if panels > MAX_PANELS {
            return Err(Error::QuadratureNoConvergence { est_error: out.err_integral.max(out.err_action) });
        }
        let whole = match cached {
            Some(p) => p,
            None => panel(ctx, curve, a, b, carry, observer),
        };
        let m = 0.5 * (a + b);
        let left = panel(ctx, curve, a, m, carry, observer);
        let right = panel(ctx, curve, m, b, left.end, observer);
        out.n_evals += whole.n_evals + left.n_evals + right.n_evals;
        let d_s = (whole.end.action - right.end.action).norm();
        let d_i = (whole.integral - left.integral - right.integral).norm();
        let same_sheet = (whole.end.momentum - right.end.momentum).norm()
            <= (whole.end.momentum + right.end.momentum).norm();
        let consistent = left.consistent && right.consistent && same_sheet;
        let width = b - a;
        let s_ok = d_s <= tol_s * (1.0 + right.end.action.norm()) * width.max(1e-3);
        let i_ok = d_i <= tol_integral * width;
        if consistent && s_ok && i_ok {
            carry = right.end;
            out.integral += left.integral + right.integral;
            out.err_action += d_s;
            out.err_integral += d_i;
            out.peak = out.peak.max(left.peak).max(right.peak);
            continue;
        }
        if width < MIN_WIDTH {
            let (z, _) = curve.eval(a);
            return Err(if !consistent {
                Error::branch(z)
            } else {
                Error::QuadratureNoConvergence { est_error: d_i.max(d_s) }
            });
        }
        stack.push((m, b, None));
        stack.push((a, m, Some(left)));
    }
    out.end = carry;
    Ok(out)
}

fn parity(ctx: &ProblemContext, end: &Carry) -> u8 {
    let p = principal_sqrt(ctx.g_squared(end.z));
    if (end.momentum - p).norm() <= (end.momentum + p).norm() {
        0
    } else {
        1
    }
}

fn run_curves(ctx: &ProblemContext, start: Carry, curves: &[Curve]) -> Result<ActionValue> {
    let mut carry = start;
    let mut err = 0.0;
    let mut length = 0.0;
    for c in curves {
        let out = march(ctx, c, carry, None, f64::INFINITY)?;
        carry = out.end;
        err += out.err_action;
        length += c.length();
    }
    let tol = ctx.settings.tol_action * (1.0 + carry.action.norm()) * 10.0 * curves.len().max(1) as f64;
    if err > tol {
        return Err(Error::QuadratureNoConvergence { est_error: err });
    }
    Ok(ActionValue {
        action: carry.action,
        momentum: carry.momentum,
        branch_parity: parity(ctx, &carry),
        path_length: length,
        est_error: err,
    })
}

fn anchor_carry(ctx: &ProblemContext) -> Carry {
    let g = if ctx.anchor_is_turning_point {
        C64::new(0.0, 0.0)
    } else {
        momentum(ctx, ctx.anchor, None)
    };
    Carry { z: ctx.anchor, action: C64::new(0.0, 0.0), momentum: g }
}

fn segment_curves(ctx: &ProblemContext, a: C64, b: C64, out: &mut Vec<Curve>) {
    let at_a = ctx.is_turning_point(a).is_some();
    let at_b = ctx.is_turning_point(b).is_some();
    match (at_a, at_b) {
        (false, false) => out.push(Curve::Line { from: a, to: b }),
        (true, false) => out.push(Curve::SqrtStart { tp: a, to: b }),
        (false, true) => out.push(Curve::SqrtEnd { from: a, tp: b }),
        (true, true) => {
            let m = (a + b) * 0.5;
            out.push(Curve::SqrtStart { tp: a, to: m });
            out.push(Curve::SqrtEnd { from: m, tp: b });
        }
    }
}

/// S along the polyline `path`, which must start at the anchor.
pub fn action_along_path(ctx: &ProblemContext, path: &[C64]) -> Result<ActionValue> {
    let first = *path.first().ok_or_else(|| Error::InvalidInput("empty path".into()))?;
    if (first - ctx.anchor).norm() > 1e-12 * ctx.anchor.norm().max(1.0) {
        return Err(Error::InvalidInput("path must start at the anchor".into()));
    }
    if path.iter().any(|z| !z.is_finite()) {
        return Err(Error::InvalidInput("non-finite waypoint".into()));
    }
    let mut curves = Vec::new();
    for w in path.windows(2) {
        if w[0] != w[1] {
            segment_curves(ctx, w[0], w[1], &mut curves);
        }
    }
    run_curves(ctx, anchor_carry(ctx), &curves)
}

/// Curves from the anchor to real q with upper half-plane detours around real turning points.
/// When `lift` is set and q sits on a turning point, the path stops at q + i·lift instead.
fn real_curves(ctx: &ProblemContext, q: f64, lift: Option<f64>) -> Vec<Curve> {
    let delta = ctx.delta_branch;
    let a = ctx.anchor;
    let qz = C64::new(q, 0.0);
    let mut curves = Vec::new();
    if (qz - a).norm() == 0.0 {
        return curves;
    }
    let right = q >= a.re;
    let mut obstacles: Vec<f64> = ctx
        .turning_points
        .iter()
        .filter(|t| t.is_real())
        .map(|t| t.location.re)
        .filter(|&x| {
            let not_anchor = !(ctx.anchor_is_turning_point && (x - a.re).abs() <= 1e-12 * a.norm().max(1.0));
            let between = if right { x > a.re && x <= q + delta } else { x < a.re && x >= q - delta };
            not_anchor && between && a.im == 0.0
        })
        .collect();
    obstacles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if !right {
        obstacles.reverse();
    }
    let dir = if right { 1.0 } else { -1.0 };
    let mut pos = a;
    let mut pos_is_tp = ctx.anchor_is_turning_point;
    for &x in &obstacles {
        let entry = C64::new(x - dir * delta, 0.0);
        let near_end = (q - x).abs() < delta;
        if (entry - pos).norm() > 0.0 {
            if pos_is_tp {
                curves.push(Curve::SqrtStart { tp: pos, to: entry });
            } else {
                curves.push(Curve::Line { from: pos, to: entry });
            }
        }
        let (th0, th_full) = if right {
            (std::f64::consts::PI, 0.0)
        } else {
            (0.0, std::f64::consts::PI)
        };
        let center = C64::new(x, 0.0);
        if near_end {
            let top = std::f64::consts::FRAC_PI_2;
            curves.push(Curve::Arc { center, radius: delta, theta0: th0, theta1: top });
            let from = center + C64::new(0.0, delta);
            if q == x {
                match lift {
                    Some(eta) => curves.push(Curve::Line { from, to: qz + C64::new(0.0, eta) }),
                    None => curves.push(Curve::SqrtEnd { from, tp: qz }),
                }
            } else {
                curves.push(Curve::Line { from, to: qz });
            }
            return curves;
        }
        curves.push(Curve::Arc { center, radius: delta, theta0: th0, theta1: th_full });
        pos = C64::new(x + dir * delta, 0.0);
        pos_is_tp = false;
    }
    if pos_is_tp {
        curves.push(Curve::SqrtStart { tp: pos, to: qz });
    } else if (qz - pos).norm() > 0.0 {
        curves.push(Curve::Line { from: pos, to: qz });
    }
    curves
}

/// S(q) for real q along the real axis, passing above real turning points.
pub fn action_real(ctx: &ProblemContext, q: f64) -> Result<ActionValue> {
    let curves = real_curves(ctx, q, None);
    if curves.is_empty() {
        let c = anchor_carry(ctx);
        return Ok(ActionValue {
            action: c.action,
            momentum: c.momentum,
            branch_parity: parity(ctx, &c),
            path_length: 0.0,
            est_error: 0.0,
        });
    }
    run_curves(ctx, anchor_carry(ctx), &curves)
}

/// Seed for the s-plane continuation at real q: the r-plane base point (q, lifted
/// slightly above a turning point when q sits on one) and the carry there.
pub(crate) fn seed(ctx: &ProblemContext, q: f64) -> Result<(Carry, ActionValue)> {
    let on_tp = ctx
        .turning_points
        .iter()
        .any(|t| t.is_real() && (t.location.re - q).abs() <= 1e-13 * q.abs().max(1.0));
    let value = action_real(ctx, q)?;
    if !on_tp {
        return Ok((Carry { z: C64::new(q, 0.0), action: value.action, momentum: value.momentum }, value));
    }
    let eta = 1e-12 * q.abs().max(1.0);
    let mut curves = real_curves(ctx, q, Some(eta));
    if curves.is_empty() {
        // anchor itself is the turning point
        curves.push(Curve::SqrtStart { tp: ctx.anchor, to: C64::new(q, eta) });
    }
    let lifted = run_curves(ctx, anchor_carry(ctx), &curves)?;
    Ok((
        Carry { z: C64::new(q, eta), action: lifted.action, momentum: lifted.momentum },
        value,
    ))
}
