//! Batch front end: each `cmd_*` runs one subcommand, writes its artifacts under the
//! configured output directory and returns the process exit code.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::action::ProblemContext;
use crate::config::{NormalizationId, RunConfig, StrategyId};
use crate::contour::{self, ContourPath};
use crate::error::{Error, Result};
use crate::format::num;
use crate::potential::PotentialSpec;
use crate::reference::{self, NumerovBc, ResidualProfile};
use crate::wavefunction::{self, Normalization, Solution, Strategy, WaveSample};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
/// Partial success, or thresholds not met.
pub const EXIT_PARTIAL: i32 = 2;

/// Failure carrying the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

type CmdResult = std::result::Result<i32, Failure>;

fn config_err(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_CONFIG, message: e.to_string() }
}

fn partial(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_PARTIAL, message: e.to_string() }
}

fn finish(r: CmdResult) -> i32 {
    match r {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    config_err(format!("{}: {e}", path.display()))
}

fn out_dir(cfg: &RunConfig) -> std::result::Result<PathBuf, Failure> {
    fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    Ok(cfg.out.clone())
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> std::result::Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> std::result::Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn checked_context(cfg: &RunConfig) -> std::result::Result<ProblemContext, Failure> {
    cfg.validate().map_err(config_err)?;
    cfg.context().map_err(config_err)
}

/// Samples of one run, in grid order; failed points keep their error.
pub struct RunSamples {
    pub grid: Vec<f64>,
    pub results: Vec<Result<WaveSample>>,
    /// Normalization constant applied to the successful samples.
    pub norm: Option<C64>,
    pub norm_error: Option<Error>,
}

impl RunSamples {
    pub fn ok(&self) -> Vec<WaveSample> {
        self.results.iter().filter_map(|r| r.as_ref().ok().cloned()).collect()
    }

    pub fn all_ok(&self) -> bool {
        self.results.iter().all(|r| r.is_ok())
    }
}

fn normalization(ctx: &ProblemContext, cfg: &RunConfig, qs: &[f64], branch: i8) -> Option<Normalization> {
    match cfg.normalization {
        NormalizationId::WkbMatch => wavefunction::default_reference_point(ctx, qs).map(|q_ref| Normalization::WkbMatch { q_ref, branch }),
        NormalizationId::MaxAbsOne => Some(Normalization::MaxAbsOne),
        NormalizationId::L2Unit => Some(Normalization::L2Unit),
        NormalizationId::None => None,
    }
}

fn apply_normalization(ctx: &ProblemContext, cfg: &RunConfig, results: &mut [Result<WaveSample>], branch: i8) -> (Option<C64>, Option<Error>) {
    let mut ok: Vec<WaveSample> = results.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
    let qs: Vec<f64> = ok.iter().map(|s| s.q).collect();
    let Some(conv) = normalization(ctx, cfg, &qs, branch) else {
        return (None, None);
    };
    match wavefunction::normalize(ctx, &mut ok, conv) {
        Ok(c) => {
            let mut it = ok.into_iter();
            for r in results.iter_mut().filter(|r| r.is_ok()) {
                *r = Ok(it.next().unwrap());
            }
            (Some(c), None)
        }
        Err(e) => (None, Some(e)),
    }
}

/// Evaluate the configured solution on the grid and normalize it.
pub fn compute_samples(cfg: &RunConfig, ctx: &ProblemContext) -> Result<RunSamples> {
    let grid = cfg.grid();
    let strategy = match cfg.strategy {
        StrategyId::AutoPerQ => Strategy::AutoPerQ,
        StrategyId::FrozenPath => Strategy::Frozen(Solution::direct(contour::plan_rays(ctx, &grid)?.path())),
    };
    let mut results = wavefunction::psi_grid(ctx, &grid, &strategy);
    let (norm, norm_error) = apply_normalization(ctx, cfg, &mut results, 1);
    Ok(RunSamples { grid, results, norm, norm_error })
}

fn sample_row(s: &WaveSample) -> Vec<String> {
    vec![
        num(s.q),
        num(s.psi.re),
        num(s.psi.im),
        num(s.psi.norm()),
        num(s.phi.re),
        num(s.phi.im),
        s.n_evals.to_string(),
        num(s.est_error),
        num(s.trunc_radius),
        s.path_id.to_string(),
    ]
}

pub const SAMPLE_HEADER: [&str; 10] =
    ["q", "re_psi", "im_psi", "abs_psi", "re_phi", "im_phi", "n_evals", "est_error", "trunc_radius", "path_id"];

#[derive(Serialize)]
struct FailureEntry {
    q: f64,
    error: String,
}

#[derive(Serialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

impl From<C64> for ComplexJson {
    fn from(z: C64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct WronskianJson {
    median: ComplexJson,
    max_rel_deviation: f64,
    independent: bool,
}

#[derive(Serialize)]
struct RunMeta {
    potential: String,
    #[serde(rename = "E")]
    energy: f64,
    hbar: f64,
    anchor: ComplexJson,
    n_points: usize,
    n_ok: usize,
    n_failed: usize,
    failures: Vec<FailureEntry>,
    normalization: String,
    norm_constant: Option<ComplexJson>,
    normalization_error: Option<String>,
    wronskian: Option<WronskianJson>,
    settings: std::collections::BTreeMap<String, String>,
}

fn settings_map(cfg: &RunConfig) -> std::collections::BTreeMap<String, String> {
    cfg.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// `run`: samples CSV (plus companion and Wronskian when `pair`), and run.json.
pub fn cmd_run(cfg: &RunConfig) -> i32 {
    finish(run_inner(cfg))
}

fn run_inner(cfg: &RunConfig) -> CmdResult {
    let ctx = checked_context(cfg)?;
    let dir = out_dir(cfg)?;
    let samples = compute_samples(cfg, &ctx).map_err(partial)?;
    let ok = samples.ok();
    write_csv(&dir.join("samples.csv"), &SAMPLE_HEADER, ok.iter().map(sample_row))?;
    let mut wronskian = None;
    let mut pair_failed = None;
    if cfg.pair {
        // companion: the sign-reversed solution, conj(ψ) for a real potential
        let unnormalized: Vec<Result<WaveSample>> = samples
            .results
            .iter()
            .map(|r| {
                r.clone().map(|mut s| {
                    let c = s.norm;
                    s.psi = (s.psi / c).conj();
                    s.phi = s.phi.conj();
                    s.gauge_action = s.gauge_action.conj();
                    s.norm = C64::new(1.0, 0.0);
                    s
                })
            })
            .collect();
        let mut second = unnormalized;
        let (_, err2) = apply_normalization(&ctx, cfg, &mut second, -1);
        if let Some(e) = err2 {
            pair_failed = Some(e.to_string());
        }
        let ok2: Vec<WaveSample> = second.iter().filter_map(|r| r.as_ref().ok().cloned()).collect();
        write_csv(&dir.join("samples_2.csv"), &SAMPLE_HEADER, ok2.iter().map(sample_row))?;
        match wavefunction::wronskian_check(&ok, &ok2) {
            Ok(p) => {
                write_csv(
                    &dir.join("wronskian.csv"),
                    &["q", "re_w", "im_w"],
                    p.wronskian_profile.iter().map(|(q, w)| vec![num(*q), num(w.re), num(w.im)]),
                )?;
                wronskian = Some(WronskianJson {
                    median: p.median.into(),
                    max_rel_deviation: p.max_rel_deviation,
                    independent: p.independent,
                });
            }
            Err(e) => pair_failed = Some(e.to_string()),
        }
    }
    let failures: Vec<FailureEntry> = samples
        .grid
        .iter()
        .zip(&samples.results)
        .filter_map(|(q, r)| r.as_ref().err().map(|e| FailureEntry { q: *q, error: e.to_string() }))
        .collect();
    let n_failed = failures.len();
    let meta = RunMeta {
        potential: cfg.potential.to_string(),
        energy: cfg.energy,
        hbar: cfg.hbar,
        anchor: ctx.anchor.into(),
        n_points: samples.grid.len(),
        n_ok: ok.len(),
        n_failed,
        failures,
        normalization: cfg.entries().into_iter().find(|(k, _)| *k == "normalization").unwrap().1,
        norm_constant: samples.norm.map(Into::into),
        normalization_error: samples.norm_error.as_ref().map(|e| e.to_string()).or(pair_failed.clone()),
        wronskian,
        settings: settings_map(cfg),
    };
    write_json(&dir.join("run.json"), &meta)?;
    if n_failed > 0 || samples.norm_error.is_some() || pair_failed.is_some() {
        eprintln!("{n_failed} of {} samples failed", samples.grid.len());
        return Ok(EXIT_PARTIAL);
    }
    Ok(EXIT_OK)
}

/// `sectors`: exponent around the scan circle and the decay intervals.
pub fn cmd_sectors(cfg: &RunConfig, q: f64) -> i32 {
    finish(sectors_inner(cfg, q))
}

fn sectors_inner(cfg: &RunConfig, q: f64) -> CmdResult {
    let ctx = checked_context(cfg)?;
    let dir = out_dir(cfg)?;
    let map = contour::scan_sectors(&ctx, q, contour::default_scan_radius(&ctx, q), 720).map_err(partial)?;
    write_csv(
        &dir.join("sectors.csv"),
        &["alpha_deg", "exponent_re"],
        map.samples.iter().map(|(a, e)| vec![num(a.to_degrees()), num(*e)]),
    )?;
    write_csv(
        &dir.join("sector_intervals.csv"),
        &["idx", "lo_deg", "hi_deg"],
        map.sectors.iter().enumerate().map(|(i, s)| vec![i.to_string(), num(s.lo_deg()), num(s.hi_deg())]),
    )?;
    println!("q = {}, R = {}, {} decay sectors", num(q), num(map.radius), map.sectors.len());
    for (i, s) in map.sectors.iter().enumerate() {
        println!("  I_{i}: ({:.4}°, {:.4}°)", s.lo_deg(), s.hi_deg());
    }
    Ok(EXIT_OK)
}

/// `contour`: the integration path at q, between two sectors or from the planner.
pub fn cmd_contour(cfg: &RunConfig, q: f64, sector_in: Option<usize>, sector_out: Option<usize>) -> i32 {
    finish(contour_inner(cfg, q, sector_in, sector_out))
}

fn contour_inner(cfg: &RunConfig, q: f64, sector_in: Option<usize>, sector_out: Option<usize>) -> CmdResult {
    let ctx = checked_context(cfg)?;
    let path: ContourPath = match (sector_in, sector_out) {
        (None, None) => contour::plan_rays(&ctx, &[q]).map_err(partial)?.path(),
        (Some(i), Some(j)) => {
            let map = contour::scan_sectors(&ctx, q, contour::default_scan_radius(&ctx, q), 720).map_err(partial)?;
            for k in [i, j] {
                map.sector(k).map_err(config_err)?;
            }
            let sing = contour::singularities(&ctx, q);
            let r = map.radius.max(2.0 * sing.max_radius());
            contour::build_path(&map, &sing, i, j, r, sing.delta_avoid(&ctx)).map_err(|e| match e {
                Error::InvalidInput(_) => config_err(e),
                other => partial(other),
            })?
        }
        _ => return Err(config_err("--sector-in and --sector-out must be given together")),
    };
    let dir = out_dir(cfg)?;
    write_csv(
        &dir.join("contour.csv"),
        &["idx", "re_s", "im_s"],
        path.waypoints.iter().enumerate().map(|(i, s)| vec![i.to_string(), num(s.re), num(s.im)]),
    )?;
    match wavefunction::evaluate_phi(&ctx, q, &path) {
        Ok((phi, d)) => {
            println!("phi({}) = {} {:+}i (n_evals {}, est_error {:e})", num(q), num(phi.re), phi.im, d.n_evals, d.est_error);
            Ok(EXIT_OK)
        }
        Err(e) => {
            eprintln!("path written, but the integral failed: {e}");
            Ok(EXIT_PARTIAL)
        }
    }
}

/// Reference grid used by `compare`.
pub struct ReferencePair {
    pub name: String,
    pub ref_1: Vec<C64>,
    pub ref_2: Option<Vec<C64>>,
}

/// Two Numerov solutions (even and odd Cauchy data at the centre grid point) on a grid
/// refined to step ≤ 1e-3, sampled back onto `grid`.
pub fn numerov_pair(ctx: &ProblemContext, grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = grid.len();
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    let m = (h / 1e-3).ceil().max(1.0) as usize;
    let fine_n = (n - 1) * m + 1;
    let fine: Vec<f64> = (0..fine_n).map(|i| grid[0] + (grid[n - 1] - grid[0]) * i as f64 / (fine_n - 1) as f64).collect();
    let q0 = fine[(n / 2) * m];
    let even = reference::numerov_solve(ctx, &fine, NumerovBc::Cauchy { q0, value: 1.0, slope: 0.0 })?;
    let odd = reference::numerov_solve(ctx, &fine, NumerovBc::Cauchy { q0, value: 0.0, slope: 1.0 })?;
    let pick = |v: &[(f64, f64)]| (0..n).map(|i| v[i * m].1).collect::<Vec<f64>>();
    Ok((pick(&even), pick(&odd)))
}

/// Ai-type solution for a linear potential V = c0 + c1 q on the grid.
pub fn airy_reference(ctx: &ProblemContext, grid: &[f64]) -> Result<Vec<f64>> {
    let PotentialSpec::Polynomial(c) = &ctx.spec else {
        return Err(Error::InvalidInput("airy_window needs a linear potential".into()));
    };
    if c.len() != 2 {
        return Err(Error::InvalidInput("airy_window needs a linear potential".into()));
    }
    let q_t = (ctx.energy - c[0]) / c[1];
    let k = (2.0 * c[1] / (ctx.hbar * ctx.hbar)).cbrt();
    grid.iter().map(|&q| reference::airy(k * (q - q_t)).map(|v| v.0)).collect()
}

fn reference_from_file(path: &Path, grid: &[f64]) -> std::result::Result<ReferencePair, Failure> {
    if !path.exists() {
        return Err(config_err(format!("reference file {} not found", path.display())));
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let f = |k: usize| -> std::result::Result<f64, Failure> {
            rec.get(k)
                .ok_or_else(|| config_err(format!("{}: row {} is short", path.display(), i + 1)))?
                .trim()
                .parse()
                .map_err(|_| config_err(format!("{}: row {} has a bad number", path.display(), i + 1)))
        };
        let q = f(0)?;
        if i >= grid.len() || (q - grid[i]).abs() > 1e-9 * grid[i].abs().max(1.0) {
            return Err(config_err(format!("{}: grid does not match the configuration", path.display())));
        }
        r1.push(C64::new(f(1)?, f(2)?));
        if rec.len() >= 5 {
            r2.push(C64::new(f(3)?, f(4)?));
        }
    }
    if r1.len() != grid.len() || (!r2.is_empty() && r2.len() != grid.len()) {
        return Err(config_err(format!("{}: grid does not match the configuration", path.display())));
    }
    Ok(ReferencePair { name: path.display().to_string(), ref_1: r1, ref_2: if r2.is_empty() { None } else { Some(r2) } })
}

/// Reference by name (`numerov`, `wkb`, `airy_window`) or a CSV file `q,re_1,im_1[,re_2,im_2]`.
pub fn load_reference(ctx: &ProblemContext, grid: &[f64], name: &str) -> std::result::Result<ReferencePair, Failure> {
    let real = |v: Vec<f64>| v.into_iter().map(|x| C64::new(x, 0.0)).collect::<Vec<_>>();
    match name {
        "numerov" => {
            let (a, b) = numerov_pair(ctx, grid).map_err(config_err)?;
            Ok(ReferencePair { name: name.into(), ref_1: real(a), ref_2: Some(real(b)) })
        }
        "wkb" => {
            let plus = grid.iter().map(|&q| reference::wkb(ctx, q, 1)).collect::<Result<Vec<_>>>().map_err(config_err)?;
            let minus = grid.iter().map(|&q| reference::wkb(ctx, q, -1)).collect::<Result<Vec<_>>>().map_err(config_err)?;
            Ok(ReferencePair { name: name.into(), ref_1: plus, ref_2: Some(minus) })
        }
        "airy_window" => {
            let a = airy_reference(ctx, grid).map_err(config_err)?;
            Ok(ReferencePair { name: name.into(), ref_1: real(a), ref_2: None })
        }
        file => reference_from_file(Path::new(file), grid),
    }
}

#[derive(Serialize)]
struct FitJson {
    re_a: f64,
    im_a: f64,
    re_b: f64,
    im_b: f64,
}

#[derive(Serialize)]
struct ResidualSummary {
    median: Option<f64>,
    p95: Option<f64>,
}

#[derive(Serialize)]
struct CompareJson {
    potential: String,
    #[serde(rename = "E")]
    energy: f64,
    hbar: f64,
    reference: String,
    fit: FitJson,
    rel_l2_error: f64,
    max_rel_error_region: f64,
    region: [f64; 2],
    residual_summary: ResidualSummary,
    passed: bool,
    settings: std::collections::BTreeMap<String, String>,
}

/// `compare`: best fit against a reference; exit 0 iff rel_l2_error ≤ max_rel_l2.
pub fn cmd_compare(cfg: &RunConfig, reference: &str) -> i32 {
    finish(compare_inner(cfg, reference))
}

fn compare_inner(cfg: &RunConfig, reference_name: &str) -> CmdResult {
    let ctx = checked_context(cfg)?;
    let grid = cfg.grid();
    let refs = load_reference(&ctx, &grid, reference_name)?;
    let dir = out_dir(cfg)?;
    let samples = compute_samples(cfg, &ctx).map_err(partial)?;
    if !samples.all_ok() {
        let bad = samples.results.iter().filter(|r| r.is_err()).count();
        return Err(partial(format!("{bad} samples failed; nothing to compare")));
    }
    let psi: Vec<C64> = samples.ok().iter().map(|s| s.psi).collect();
    let region = cfg.region.unwrap_or((cfg.q_min, cfg.q_max));
    let report = reference::compare(
        &ctx,
        &cfg.potential.to_string(),
        &grid,
        &psi,
        &refs.ref_1,
        refs.ref_2.as_deref(),
        region,
    )
    .map_err(partial)?;
    let profile = ResidualProfile {
        points: report
            .residual_profile
            .iter()
            .map(|&(q, r)| reference::ResidualPoint { q, r, grid_err: 0.0 })
            .collect(),
    };
    let summary = if profile.points.is_empty() {
        ResidualSummary { median: None, p95: None }
    } else {
        ResidualSummary { median: Some(profile.median()), p95: Some(profile.p95()) }
    };
    let passed = report.rel_l2_error <= cfg.max_rel_l2;
    let json = CompareJson {
        potential: cfg.potential.to_string(),
        energy: cfg.energy,
        hbar: cfg.hbar,
        reference: refs.name,
        fit: FitJson { re_a: report.fit.0.re, im_a: report.fit.0.im, re_b: report.fit.1.re, im_b: report.fit.1.im },
        rel_l2_error: report.rel_l2_error,
        max_rel_error_region: report.max_rel_error_region,
        region: [region.0, region.1],
        residual_summary: summary,
        passed,
        settings: settings_map(cfg),
    };
    write_json(&dir.join("compare.json"), &json)?;
    println!("rel_l2_error = {} (threshold {})", num(report.rel_l2_error), num(cfg.max_rel_l2));
    Ok(if passed { EXIT_OK } else { EXIT_PARTIAL })
}

/// Residual at the points `at` from 7-point stencils with 60 points per local de Broglie
/// wavelength, on the path planned for `grid`. Normalized by max|ψ| over `at`, so growth into
/// forbidden regions elsewhere on the grid does not mask it.
pub fn stencil_residual(ctx: &ProblemContext, grid: &[f64], at: &[f64]) -> Result<ResidualProfile> {
    if at.is_empty() {
        return Err(Error::InvalidInput("no points to evaluate the residual at".into()));
    }
    let path = contour::plan_rays(ctx, grid)?.path();
    let psi_max = at
        .iter()
        .map(|&q| wavefunction::evaluate_psi(ctx, q, &path).map(|w| w.psi.norm()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let g_max = at.iter().map(|&q| ctx.momentum(C64::new(q, 0.0), None).norm()).fold(0.0, f64::max);
    let h = 2.0 * std::f64::consts::PI * ctx.hbar / (60.0 * g_max.max(1e-3));
    reference::residual_local(ctx, at, h, psi_max, |q| wavefunction::evaluate_psi(ctx, q, &path).map(|w| w.psi))
}

/// [`stencil_residual`] over the middle third of the grid.
pub fn middle_third_residual(ctx: &ProblemContext, grid: &[f64]) -> Result<ResidualProfile> {
    let n = grid.len();
    if n < 3 {
        return Err(Error::InvalidInput("grid must have at least 3 points".into()));
    }
    let (lo, hi) = (grid[0] + (grid[n - 1] - grid[0]) / 3.0, grid[n - 1] - (grid[n - 1] - grid[0]) / 3.0);
    let at: Vec<f64> = grid.iter().copied().filter(|&q| q >= lo && q <= hi).collect();
    stencil_residual(ctx, grid, &at)
}

/// One row of the scaling table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub hbar: f64,
    pub median: f64,
    /// Largest stencil-error estimate relative to the residual.
    pub grid_err_ratio: f64,
    /// The residual stands above the stencil error (grid_err_ratio < 1/2).
    pub resolved: bool,
    /// median(previous ħ) / median(this ħ); None for the first row or when either row is
    /// not resolved (residual at the differentiation noise floor).
    pub ratio: Option<f64>,
}

pub fn scaling_table(cfg: &RunConfig, hbars: &[f64]) -> Result<Vec<ScalingRow>> {
    let grid = cfg.grid();
    let mut rows: Vec<ScalingRow> = Vec::new();
    for &hbar in hbars {
        let ctx = cfg.context_at(hbar)?;
        let p = middle_third_residual(&ctx, &grid)?;
        let median = p.median();
        let grid_err_ratio = p.points.iter().map(|x| x.grid_err / x.r.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
        let resolved = grid_err_ratio < 0.5;
        let ratio = rows.last().filter(|prev| prev.resolved && resolved).map(|prev| prev.median / median);
        rows.push(ScalingRow { hbar, median, grid_err_ratio, resolved, ratio });
    }
    Ok(rows)
}

/// `scaling`: residual table over ħ; exit 0 iff every reported ratio is in the band.
pub fn cmd_scaling(cfg: &RunConfig, hbars: &[f64]) -> i32 {
    finish(scaling_inner(cfg, hbars))
}

fn scaling_inner(cfg: &RunConfig, hbars: &[f64]) -> CmdResult {
    cfg.validate().map_err(config_err)?;
    if hbars.is_empty() || hbars.iter().any(|h| !(*h > 0.0)) {
        return Err(config_err("hbar list must be non-empty and positive"));
    }
    let dir = out_dir(cfg)?;
    let rows = scaling_table(cfg, hbars).map_err(partial)?;
    let fmt_ratio = |r: &Option<f64>| r.map_or_else(|| "n/a".to_string(), num);
    write_csv(
        &dir.join("scaling.csv"),
        &["hbar", "median_residual", "grid_err_ratio", "ratio"],
        rows.iter().map(|r| vec![num(r.hbar), num(r.median), num(r.grid_err_ratio), fmt_ratio(&r.ratio)]),
    )?;
    println!("hbar,median_residual,ratio");
    for r in &rows {
        println!("{},{},{}", num(r.hbar), num(r.median), fmt_ratio(&r.ratio));
    }
    let ok = rows.iter().all(|r| r.ratio.is_none_or(|x| x >= cfg.ratio_min && x <= cfg.ratio_max));
    Ok(if ok { EXIT_OK } else { EXIT_PARTIAL })
}

/// `airy`: Ai and Ai′ at x.
pub fn cmd_airy(x: f64) -> i32 {
    finish(reference::airy(x).map_err(config_err).map(|(a, b)| {
        println!("x,ai,ai_prime");
        println!("{},{},{}", num(x), num(a), num(b));
        EXIT_OK
    }))
}

/// `pearcey`: Pe(x, y).
pub fn cmd_pearcey(x: f64, y: f64) -> i32 {
    let r = reference::pearcey(x, y).map_err(|e| match e {
        Error::OutOfWindow(_) => config_err(e),
        other => partial(other),
    });
    finish(r.map(|p| {
        println!("x,y,re,im");
        println!("{},{},{},{}", num(x), num(y), num(p.re), num(p.im));
        EXIT_OK
    }))
}
