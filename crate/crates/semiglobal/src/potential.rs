//! Entire one-dimensional potentials, their turning points and real extrema.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::roots::{cluster_roots, polynomial_roots};

/// An entire potential V(q).
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// Coefficients in ascending degree.
    Polynomial(Vec<f64>),
    /// V = D (1 - exp(-a (q - q0)))^2
    Morse { depth: f64, width: f64, center: f64 },
}

/// A root of E - V(q) = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoint {
    pub location: C64,
    pub multiplicity: usize,
}

impl TurningPoint {
    pub fn is_real(&self) -> bool {
        self.location.im.abs() <= 1e-12 * self.location.re.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub q: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

impl PotentialSpec {
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
        }
        // A constant (including V = 0) is admitted as the degree-0 case.
        if coeffs.is_empty() || (coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0) {
            return Err(Error::InvalidInput("polynomial needs a nonzero leading coefficient".into()));
        }
        Ok(PotentialSpec::Polynomial(coeffs))
    }

    pub fn morse(depth: f64, width: f64, center: f64) -> Result<Self> {
        if !(depth > 0.0 && width > 0.0 && center.is_finite() && depth.is_finite() && width.is_finite()) {
            return Err(Error::InvalidInput("morse requires D > 0, a > 0".into()));
        }
        Ok(PotentialSpec::Morse { depth, width, center })
    }

    /// Polynomial degree, or None for Morse.
    pub fn degree(&self) -> Option<usize> {
        match self {
            PotentialSpec::Polynomial(c) => Some(c.len() - 1),
            PotentialSpec::Morse { .. } => None,
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.derivative_n(z, 0)
    }

    pub fn derivative(&self, z: C64) -> C64 {
        self.derivative_n(z, 1)
    }

    /// k-th derivative of V at z.
    pub fn derivative_n(&self, z: C64, k: usize) -> C64 {
        match self {
            PotentialSpec::Polynomial(c) => {
                let mut acc = C64::new(0.0, 0.0);
                for (i, &ci) in c.iter().enumerate().skip(k).rev() {
                    let fall: f64 = ((i - k + 1)..=i).map(|m| m as f64).product();
                    acc = acc * z + ci * fall;
                }
                acc
            }
            PotentialSpec::Morse { depth, width, center } => {
                // V = D (1 - 2u + u^2), u = exp(-a (z - q0)); d^k u = (-a)^k u
                let u = (-(z - center) * *width).exp();
                let a = -*width;
                if k == 0 {
                    *depth * (C64::new(1.0, 0.0) - u).powu(2)
                } else {
                    let d1 = a.powi(k as i32) * u;
                    let d2 = (2.0 * a).powi(k as i32) * u * u;
                    *depth * (d2 - 2.0 * d1)
                }
            }
        }
    }

    /// Real-valued evaluation on the real axis.
    pub fn eval_real(&self, q: f64) -> f64 {
        self.eval(C64::new(q, 0.0)).re
    }

    /// Roots of E - V(z) = 0 sorted by real part (ties by imaginary part).
    pub fn turning_points(&self, energy: f64, root_tol: f64) -> Result<Vec<TurningPoint>> {
        if !energy.is_finite() {
            return Err(Error::InvalidInput("energy must be finite".into()));
        }
        let scale = energy.abs().max(1.0);
        let mut tps = match self {
            PotentialSpec::Polynomial(c) => {
                let mut p: Vec<C64> = c.iter().map(|&x| C64::new(x, 0.0)).collect();
                p[0] -= energy;
                let roots = polynomial_roots(&p)
                    .ok_or_else(|| Error::RootFindingFailed("iteration did not converge".into()))?;
                cluster_roots(&roots, 1e-6)
                    .into_iter()
                    .map(|(z, m)| TurningPoint { location: z, multiplicity: m })
                    .collect::<Vec<_>>()
            }
            PotentialSpec::Morse { depth, width, center } => {
                let r = (energy / depth).abs().sqrt();
                if energy == 0.0 {
                    vec![TurningPoint { location: C64::new(*center, 0.0), multiplicity: 2 }]
                } else if energy < 0.0 {
                    // 1 - u = ±i r
                    [1.0, -1.0]
                        .iter()
                        .map(|&s| {
                            let u = C64::new(1.0, -s * r);
                            TurningPoint { location: C64::new(*center, 0.0) - u.ln() / *width, multiplicity: 1 }
                        })
                        .collect()
                } else {
                    let mut v = Vec::new();
                    for u in [1.0 - r, 1.0 + r] {
                        if u == 0.0 {
                            continue;
                        }
                        if u > 0.0 {
                            v.push(TurningPoint { location: C64::new(center - u.ln() / width, 0.0), multiplicity: 1 });
                        } else {
                            // logarithm of a negative number: both edges of the principal strip
                            for s in [1.0, -1.0] {
                                let l = C64::new((-u).ln(), s * std::f64::consts::PI);
                                v.push(TurningPoint { location: C64::new(*center, 0.0) - l / *width, multiplicity: 1 });
                            }
                        }
                    }
                    v
                }
            }
        };
        // Real coefficients: snap near-real roots and enforce conjugate pairing.
        for tp in tps.iter_mut() {
            if tp.location.im.abs() <= 1e-10 * tp.location.norm().max(1.0) {
                tp.location.im = 0.0;
            }
        }
        let snapshot = tps.clone();
        for tp in tps.iter_mut().filter(|t| t.location.im < 0.0) {
            if let Some(partner) = snapshot
                .iter()
                .filter(|o| o.location.im > 0.0 && o.multiplicity == tp.multiplicity)
                .min_by(|a, b| {
                    (a.location.conj() - tp.location)
                        .norm()
                        .partial_cmp(&(b.location.conj() - tp.location).norm())
                        .unwrap()
                })
            {
                if (partner.location.conj() - tp.location).norm() < 1e-8 * scale {
                    tp.location = partner.location.conj();
                }
            }
        }
        for tp in &tps {
            let res = (C64::new(energy, 0.0) - self.eval(tp.location)).norm();
            if !(res <= root_tol * scale) {
                return Err(Error::RootFindingFailed(format!(
                    "residual {res:e} at {} exceeds tolerance",
                    tp.location
                )));
            }
        }
        tps.sort_by(|a, b| {
            a.location
                .re
                .partial_cmp(&b.location.re)
                .unwrap()
                .then(a.location.im.partial_cmp(&b.location.im).unwrap())
        });
        Ok(tps)
    }

    /// Real critical points of V inside [lo, hi].
    pub fn real_extrema(&self, lo: f64, hi: f64) -> Vec<Extremum> {
        let crit: Vec<f64> = match self {
            PotentialSpec::Polynomial(c) => {
                if c.len() <= 2 {
                    Vec::new()
                } else {
                    let d: Vec<C64> =
                        c.iter().enumerate().skip(1).map(|(i, &x)| C64::new(x * i as f64, 0.0)).collect();
                    let roots = polynomial_roots(&d).unwrap_or_default();
                    let mut v: Vec<f64> = cluster_roots(&roots, 1e-4)
                        .into_iter()
                        .filter(|(z, _)| z.im.abs() <= 1e-7 * z.norm().max(1.0))
                        .map(|(z, _)| z.re)
                        .collect();
                    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    v
                }
            }
            PotentialSpec::Morse { center, .. } => vec![*center],
        };
        crit.into_iter()
            .filter(|&q| q >= lo && q <= hi)
            .filter_map(|q| {
                let z = C64::new(q, 0.0);
                let v2 = self.derivative_n(z, 2).re;
                let kind = if v2.abs() > 1e-10 {
                    if v2 > 0.0 { ExtremumKind::Min } else { ExtremumKind::Max }
                } else {
                    let eps = 1e-4 * q.abs().max(1.0);
                    let left = self.derivative(C64::new(q - eps, 0.0)).re;
                    let right = self.derivative(C64::new(q + eps, 0.0)).re;
                    if left < 0.0 && right > 0.0 {
                        ExtremumKind::Min
                    } else if left > 0.0 && right < 0.0 {
                        ExtremumKind::Max
                    } else {
                        return None;
                    }
                };
                Some(Extremum { q, value: self.eval_real(q), kind })
            })
            .collect()
    }
}

/// Potential as written in configuration files, keeping named presets.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialDef {
    Poly(Vec<f64>),
    Morse(f64, f64, f64),
    Harmonic(f64),
    DoubleWell(f64, f64),
    Linear(f64),
    InvHarmonic(f64),
}

impl PotentialDef {
    pub fn spec(&self) -> Result<PotentialSpec> {
        match *self {
            PotentialDef::Poly(ref c) => PotentialSpec::polynomial(c.clone()),
            PotentialDef::Morse(d, a, q0) => PotentialSpec::morse(d, a, q0),
            PotentialDef::Harmonic(w) => PotentialSpec::polynomial(vec![0.0, 0.0, 0.5 * w * w]),
            PotentialDef::DoubleWell(a4, a2) => PotentialSpec::polynomial(vec![0.0, 0.0, -a2, 0.0, a4]),
            PotentialDef::Linear(f) => PotentialSpec::polynomial(vec![0.0, -f]),
            PotentialDef::InvHarmonic(l) => PotentialSpec::polynomial(vec![0.0, 0.0, -0.5 * l * l]),
        }
    }
}

impl FromStr for PotentialDef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_matches('"');
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("potential '{s}' lacks a ':'")))?;
        let nums = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::InvalidInput(format!("potential '{s}': {e}")))?;
        let want = |n: usize| -> Result<()> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("potential '{kind}' takes {n} parameter(s)")))
            }
        };
        let def = match kind.trim() {
            "poly" => PotentialDef::Poly(nums.clone()),
            "morse" => {
                want(3)?;
                PotentialDef::Morse(nums[0], nums[1], nums[2])
            }
            "harmonic" => {
                want(1)?;
                PotentialDef::Harmonic(nums[0])
            }
            "doublewell" => {
                want(2)?;
                PotentialDef::DoubleWell(nums[0], nums[1])
            }
            "linear" => {
                want(1)?;
                PotentialDef::Linear(nums[0])
            }
            "invharmonic" => {
                want(1)?;
                PotentialDef::InvHarmonic(nums[0])
            }
            other => return Err(Error::InvalidInput(format!("unknown potential kind '{other}'"))),
        };
        def.spec()?;
        Ok(def)
    }
}

impl fmt::Display for PotentialDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|x| crate::format::num(*x)).collect::<Vec<_>>().join(",");
        match self {
            PotentialDef::Poly(c) => write!(f, "poly:{}", join(c)),
            PotentialDef::Morse(d, a, q0) => write!(f, "morse:{}", join(&[*d, *a, *q0])),
            PotentialDef::Harmonic(w) => write!(f, "harmonic:{}", join(&[*w])),
            PotentialDef::DoubleWell(a4, a2) => write!(f, "doublewell:{}", join(&[*a4, *a2])),
            PotentialDef::Linear(x) => write!(f, "linear:{}", join(&[*x])),
            PotentialDef::InvHarmonic(l) => write!(f, "invharmonic:{}", join(&[*l])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic() -> PotentialSpec {
        PotentialSpec::polynomial(vec![0.0, 0.0, 0.5]).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(harmonic().eval(C64::new(2.0, 0.0)), C64::new(2.0, 0.0));
        assert_eq!(harmonic().eval(C64::new(0.0, 1.0)), C64::new(-0.5, 0.0));
        let m = PotentialSpec::morse(1.0, 1.0, 0.0).unwrap();
        assert_eq!(m.eval(C64::new(0.0, 0.0)), C64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_trailing_zero_but_admits_constants() {
        assert!(PotentialSpec::polynomial(vec![]).is_err());
        assert!(PotentialSpec::polynomial(vec![1.0, 0.0]).is_err());
        let free = PotentialSpec::polynomial(vec![0.0]).unwrap();
        assert_eq!(free.degree(), Some(0));
        assert!(free.turning_points(0.5, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn harmonic_turning_points() {
        let tp = harmonic().turning_points(2.0, 1e-9).unwrap();
        assert_eq!(tp.len(), 2);
        assert!((tp[0].location - C64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((tp[1].location - C64::new(2.0, 0.0)).norm() < 1e-12);
        assert!(tp.iter().all(|t| t.multiplicity == 1));
    }

    #[test]
    fn inverted_oscillator_turning_points_are_imaginary() {
        let v = PotentialSpec::polynomial(vec![0.0, 0.0, -0.5]).unwrap();
        let tp = v.turning_points(1.0, 1e-9).unwrap();
        let s2 = 2f64.sqrt();
        assert!((tp[0].location - C64::new(0.0, -s2)).norm() < 1e-12);
        assert!((tp[1].location - C64::new(0.0, s2)).norm() < 1e-12);
    }

    #[test]
    fn double_well_double_root() {
        let v = PotentialSpec::polynomial(vec![0.0, 0.0, -0.5, 0.0, 0.25]).unwrap();
        let tp = v.turning_points(0.0, 1e-9).unwrap();
        assert_eq!(tp.len(), 3);
        assert_eq!(tp[1].multiplicity, 2);
        assert!(tp[1].location.norm() < 1e-7);
        assert!((tp[2].location.re - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(tp.iter().map(|t| t.multiplicity).sum::<usize>(), 4);
    }

    #[test]
    fn morse_turning_points() {
        let m = PotentialSpec::morse(2.0, 1.5, 0.3).unwrap();
        let tp = m.turning_points(1.0, 1e-9).unwrap();
        assert_eq!(tp.len(), 2);
        for t in &tp {
            assert!((m.eval(t.location) - 1.0).norm() < 1e-12);
        }
        let above = m.turning_points(3.0, 1e-9).unwrap();
        assert_eq!(above.len(), 3);
        assert!(above.iter().any(|t| t.location.im.abs() > 1.0));
    }

    #[test]
    fn extrema_examples() {
        let e = harmonic().real_extrema(-1.0, 1.0);
        assert_eq!(e, vec![Extremum { q: 0.0, value: 0.0, kind: ExtremumKind::Min }]);
        let dw = PotentialSpec::polynomial(vec![0.0, 0.0, -0.5, 0.0, 0.25]).unwrap();
        let e = dw.real_extrema(-2.0, 2.0);
        assert_eq!(e.len(), 3);
        assert_eq!(e.iter().map(|x| x.kind).collect::<Vec<_>>(), vec![
            ExtremumKind::Min,
            ExtremumKind::Max,
            ExtremumKind::Min
        ]);
        assert!((e[0].q + 1.0).abs() < 1e-12 && (e[0].value + 0.25).abs() < 1e-12);
        let lin = PotentialSpec::polynomial(vec![0.0, -1.0]).unwrap();
        assert!(lin.real_extrema(-1.0, 1.0).is_empty());
    }

    #[test]
    fn flat_inflection_is_not_an_extremum_but_quartic_min_is() {
        let cubic = PotentialSpec::polynomial(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(cubic.real_extrema(-1.0, 1.0).is_empty());
        let quartic = PotentialSpec::polynomial(vec![0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let e = quartic.real_extrema(-1.0, 1.0);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].kind, ExtremumKind::Min);
    }

    #[test]
    fn grammar_round_trip() {
        for s in ["poly:0,0,0.5", "morse:1,2,0.5", "harmonic:1", "doublewell:0.25,0.5", "linear:1", "invharmonic:1"] {
            let d: PotentialDef = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("harmonic:1,2".parse::<PotentialDef>().is_err());
        assert!("cosine:1".parse::<PotentialDef>().is_err());
        assert_eq!(
            "linear:1".parse::<PotentialDef>().unwrap().spec().unwrap(),
            PotentialSpec::Polynomial(vec![0.0, -1.0])
        );
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn coeffs() -> impl Strategy<Value = Vec<f64>> {
            (prop::collection::vec(-2.0f64..2.0, 1..5), 0.2f64..2.0).prop_map(|(mut c, lead)| {
                c.push(lead);
                c
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn eval_matches_power_sum(c in coeffs(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
                let v = PotentialSpec::polynomial(c.clone()).unwrap();
                let z = C64::new(re, im);
                let direct: C64 = c.iter().enumerate().map(|(k, a)| z.powi(k as i32) * a).sum();
                prop_assert!((v.eval(z) - direct).norm() < 1e-10 * (1.0 + direct.norm()));
            }

            #[test]
            fn derivative_matches_differences(c in coeffs(), q in -2.0f64..2.0) {
                let v = PotentialSpec::polynomial(c).unwrap();
                let h = 1e-4;
                let z = C64::new(q, 0.0);
                let fd = (v.eval(z + h) - v.eval(z - h)) / (2.0 * h);
                prop_assert!((v.derivative(z) - fd).norm() < 1e-6 * (1.0 + fd.norm()));
            }

            #[test]
            fn turning_points_are_roots_and_conjugate_closed(c in coeffs(), e in -1.0f64..2.0) {
                let v = PotentialSpec::polynomial(c).unwrap();
                let tps = v.turning_points(e, 1e-9).unwrap();
                let total: usize = tps.iter().map(|t| t.multiplicity).sum();
                prop_assert_eq!(total, v.degree().unwrap());
                for t in &tps {
                    let r = v.eval(t.location) - e;
                    prop_assert!(r.norm() < 1e-6 * (1.0 + t.location.norm().powi(v.degree().unwrap() as i32)), "{} {}", t.location, r);
                    prop_assert!(tps.iter().any(|o| (o.location - t.location.conj()).norm() < 1e-6 * (1.0 + t.location.norm())));
                }
            }

            #[test]
            fn morse_roots_are_roots(d in 0.5f64..3.0, a in 0.5f64..2.0, q0 in -1.0f64..1.0, e in -0.4f64..0.9) {
                let v = PotentialSpec::morse(d, a, q0).unwrap();
                for t in v.turning_points(e * d, 1e-9).unwrap() {
                    prop_assert!((v.eval(t.location) - e * d).norm() < 1e-8 * d);
                }
            }
        }
    }
}
