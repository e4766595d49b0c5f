//! Flat `key=value` run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::action::{ProblemContext, Settings};
use crate::error::{Error, Result};
use crate::format::num;
use crate::potential::PotentialDef;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyId {
    AutoPerQ,
    FrozenPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationId {
    WkbMatch,
    MaxAbsOne,
    L2Unit,
    None,
}

impl StrategyId {
    fn as_str(self) -> &'static str {
        match self {
            StrategyId::AutoPerQ => "auto_per_q",
            StrategyId::FrozenPath => "frozen_path",
        }
    }
}

impl NormalizationId {
    fn as_str(self) -> &'static str {
        match self {
            NormalizationId::WkbMatch => "wkb_match",
            NormalizationId::MaxAbsOne => "max_abs_one",
            NormalizationId::L2Unit => "l2_unit",
            NormalizationId::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PotentialDef,
    pub energy: f64,
    pub hbar: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub n: usize,
    pub anchor: Option<f64>,
    pub strategy: StrategyId,
    pub normalization: NormalizationId,
    pub tol_quad: f64,
    pub root_tol: f64,
    pub delta_avoid: Option<f64>,
    pub out: PathBuf,
    pub seed: u64,
    /// Also write the companion solution and the Wronskian.
    pub pair: bool,
    /// compare: pass threshold on rel_l2_error.
    pub max_rel_l2: f64,
    /// compare: sub-interval for max_rel_error_region (defaults to the grid).
    pub region: Option<(f64, f64)>,
    /// scaling: accepted band for successive residual ratios.
    pub ratio_min: f64,
    pub ratio_max: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = Settings::default();
        RunConfig {
            potential: PotentialDef::Harmonic(1.0),
            energy: 0.5,
            hbar: 1.0,
            q_min: -1.0,
            q_max: 1.0,
            n: 21,
            anchor: None,
            strategy: StrategyId::AutoPerQ,
            normalization: NormalizationId::WkbMatch,
            tol_quad: s.tol_quad,
            root_tol: s.root_tol,
            delta_avoid: None,
            out: PathBuf::from("out"),
            seed: 0,
            pair: false,
            max_rel_l2: 0.02,
            region: None,
            ratio_min: 2.5,
            ratio_max: 6.0,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| Error::InvalidInput(format!("{key}: not a number: {v:?}")))?;
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("{key}: must be finite")));
    }
    Ok(x)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidInput(format!("{key}: expected true or false, got {v:?}"))),
    }
}

fn optional(v: &str) -> Option<&str> {
    if v.is_empty() || v == "none" { None } else { Some(v) }
}

impl RunConfig {
    /// Apply one `key=value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "potential" => self.potential = v.parse()?,
            "E" => self.energy = parse_f64("E", v)?,
            "hbar" => self.hbar = parse_f64("hbar", v)?,
            "q_min" => self.q_min = parse_f64("q_min", v)?,
            "q_max" => self.q_max = parse_f64("q_max", v)?,
            "n" => self.n = v.parse().map_err(|_| Error::InvalidInput(format!("n: not a count: {v:?}")))?,
            "anchor" => self.anchor = optional(v).map(|x| parse_f64("anchor", x)).transpose()?,
            "strategy" => {
                self.strategy = match v {
                    "auto_per_q" => StrategyId::AutoPerQ,
                    "frozen_path" => StrategyId::FrozenPath,
                    _ => return Err(Error::InvalidInput(format!("strategy: unknown {v:?}"))),
                }
            }
            "normalization" => {
                self.normalization = match v {
                    "wkb_match" => NormalizationId::WkbMatch,
                    "max_abs_one" => NormalizationId::MaxAbsOne,
                    "l2_unit" => NormalizationId::L2Unit,
                    "none" => NormalizationId::None,
                    _ => return Err(Error::InvalidInput(format!("normalization: unknown {v:?}"))),
                }
            }
            "tol_quad" => self.tol_quad = parse_f64("tol_quad", v)?,
            "root_tol" => self.root_tol = parse_f64("root_tol", v)?,
            "delta_avoid" => self.delta_avoid = optional(v).map(|x| parse_f64("delta_avoid", x)).transpose()?,
            "out" => self.out = PathBuf::from(v),
            "seed" => self.seed = v.parse().map_err(|_| Error::InvalidInput(format!("seed: not an integer: {v:?}")))?,
            "pair" => self.pair = parse_bool("pair", v)?,
            "max_rel_l2" => self.max_rel_l2 = parse_f64("max_rel_l2", v)?,
            "region" => {
                self.region = match optional(v) {
                    None => None,
                    Some(r) => {
                        let (a, b) = r
                            .split_once(',')
                            .ok_or_else(|| Error::InvalidInput("region: expected lo,hi".into()))?;
                        Some((parse_f64("region", a.trim())?, parse_f64("region", b.trim())?))
                    }
                }
            }
            "ratio_min" => self.ratio_min = parse_f64("ratio_min", v)?,
            "ratio_max" => self.ratio_max = parse_f64("ratio_max", v)?,
            other => return Err(Error::InvalidInput(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput("grid must have at least 2 points".into()));
        }
        if !(self.q_min < self.q_max) {
            return Err(Error::InvalidInput("q_min must be below q_max".into()));
        }
        if !(self.hbar > 0.0) {
            return Err(Error::InvalidInput("hbar must be positive".into()));
        }
        if !(self.tol_quad > 0.0 && self.root_tol > 0.0 && self.delta_avoid.is_none_or(|d| d > 0.0)) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if let Some((a, b)) = self.region {
            if !(a < b) {
                return Err(Error::InvalidInput("region must satisfy lo < hi".into()));
            }
        }
        if !(self.ratio_min <= self.ratio_max) {
            return Err(Error::InvalidInput("ratio_min must not exceed ratio_max".into()));
        }
        self.potential.spec().map(|_| ())
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = (self.q_max - self.q_min) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i + 1 == self.n { self.q_max } else { self.q_min + h * i as f64 }).collect()
    }

    pub fn settings(&self) -> Settings {
        Settings { tol_quad: self.tol_quad, root_tol: self.root_tol, delta_avoid: self.delta_avoid, ..Settings::default() }
    }

    /// Problem context at this configuration's ħ.
    pub fn context(&self) -> Result<ProblemContext> {
        self.context_at(self.hbar)
    }

    pub fn context_at(&self, hbar: f64) -> Result<ProblemContext> {
        let mut ctx = ProblemContext::with_settings(self.potential.spec()?, self.energy, hbar, self.settings())?;
        match self.anchor {
            Some(a) => ctx.set_anchor(num_complex::Complex64::new(a, 0.0)),
            None => ctx.set_default_anchor(0.5 * (self.q_min + self.q_max)),
        }
        Ok(ctx)
    }

    /// Ordered (key, value) pairs as emitted by `Display`.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let opt = |x: Option<f64>| x.map_or_else(|| "none".to_string(), num);
        vec![
            ("potential", self.potential.to_string()),
            ("E", num(self.energy)),
            ("hbar", num(self.hbar)),
            ("q_min", num(self.q_min)),
            ("q_max", num(self.q_max)),
            ("n", self.n.to_string()),
            ("anchor", opt(self.anchor)),
            ("strategy", self.strategy.as_str().to_string()),
            ("normalization", self.normalization.as_str().to_string()),
            ("tol_quad", num(self.tol_quad)),
            ("root_tol", num(self.root_tol)),
            ("delta_avoid", opt(self.delta_avoid)),
            ("out", self.out.display().to_string()),
            ("seed", self.seed.to_string()),
            ("pair", self.pair.to_string()),
            ("max_rel_l2", num(self.max_rel_l2)),
            ("region", self.region.map_or_else(|| "none".to_string(), |(a, b)| format!("{},{}", num(a), num(b)))),
            ("ratio_min", num(self.ratio_min)),
            ("ratio_max", num(self.ratio_max)),
        ]
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    /// Lines of `key=value`; blank lines and `#` comments are ignored. Unset keys keep defaults.
    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("line {}: expected key=value", lineno + 1)))?;
            cfg.set(k, v).map_err(|e| {
                let msg = match e {
                    Error::InvalidInput(m) => m,
                    other => other.to_string(),
                };
                Error::InvalidInput(format!("line {}: {msg}", lineno + 1))
            })?;
        }
        Ok(cfg)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let text = "# harmonic run\npotential=harmonic:1\nE=1.025\nhbar=0.05\nq_min=-2.2\nq_max=2.2\nn=241\nregion=-1,1\n";
        let cfg: RunConfig = text.parse().unwrap();
        assert_eq!(cfg.n, 241);
        assert_eq!(cfg.region, Some((-1.0, 1.0)));
        let emitted = cfg.to_string();
        let again: RunConfig = emitted.parse().unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_string(), emitted);
    }

    #[test]
    fn validation_messages() {
        let cfg: RunConfig = "n=1".parse().unwrap();
        assert_eq!(cfg.validate().unwrap_err().to_string(), "invalid input: grid must have at least 2 points");
        assert!("q_min=oops".parse::<RunConfig>().is_err());
        assert!("colour=red".parse::<RunConfig>().is_err());
        let cfg: RunConfig = "q_min=1\nq_max=0".parse().unwrap();
        assert!(cfg.validate().is_err());
        let cfg: RunConfig = "tol_quad=0".parse().unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn grid_hits_both_ends() {
        let cfg: RunConfig = "q_min=-2.2\nq_max=2.2\nn=241".parse().unwrap();
        let g = cfg.grid();
        assert_eq!(g.len(), 241);
        assert_eq!(g[0], -2.2);
        assert_eq!(g[240], 2.2);
    }
}
