//! Polynomial roots by simultaneous (Durand–Kerner) iteration, with a
//! Laguerre-plus-deflation fallback and clustering of multiple roots.

use num_complex::Complex64 as C64;

const MAX_ITER: usize = 2000;

/// Evaluate a polynomial with ascending coefficients (Horner).
pub fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn horner_with_derivs(coeffs: &[C64], z: C64) -> (C64, C64, C64) {
    let zero = C64::new(0.0, 0.0);
    let (mut p, mut dp, mut ddp) = (zero, zero, zero);
    for &c in coeffs.iter().rev() {
        ddp = ddp * z + dp * 2.0;
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp, ddp)
}

/// All roots of a polynomial with ascending coefficients and nonzero leading term.
pub fn polynomial_roots(coeffs: &[C64]) -> Option<Vec<C64>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Some(Vec::new());
    }
    let lead = coeffs[n];
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    if n == 1 {
        return Some(vec![-monic[0]]);
    }
    durand_kerner(&monic).or_else(|| laguerre_deflation(&monic))
}

fn cauchy_bound(monic: &[C64]) -> f64 {
    let n = monic.len() - 1;
    1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn durand_kerner(monic: &[C64]) -> Option<Vec<C64>> {
    let n = monic.len() - 1;
    let radius = cauchy_bound(monic).min(1e6);
    let seed = C64::new(0.4, 0.9);
    let mut z: Vec<C64> = (0..n).map(|k| seed.powu(k as u32) * radius.sqrt()).collect();
    for _ in 0..MAX_ITER {
        let mut max_step: f64 = 0.0;
        let mut max_mag: f64 = 1.0;
        for i in 0..n {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = C64::new(1e-300, 0.0);
            }
            let step = horner(monic, z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm());
            max_mag = max_mag.max(z[i].norm());
        }
        if !z.iter().all(|v| v.is_finite()) {
            return None;
        }
        if max_step <= 1e-15 * max_mag {
            return Some(polish(monic, z));
        }
    }
    // Multiple roots slow the iteration to linear convergence; accept if residuals are small.
    let z = polish(monic, z);
    let ok = z.iter().all(|&r| horner(monic, r).norm() < 1e-10 * cauchy_bound(monic));
    ok.then_some(z)
}

fn laguerre(poly: &[C64], mut z: C64) -> Option<C64> {
    let n = (poly.len() - 1) as f64;
    for _ in 0..MAX_ITER {
        let (p, dp, ddp) = horner_with_derivs(poly, z);
        if p.norm() == 0.0 {
            return Some(z);
        }
        let g = dp / p;
        let h = g * g - ddp / p;
        let sq = ((h * n - g * g) * (n - 1.0)).sqrt();
        let (d1, d2) = (g + sq, g - sq);
        let d = if d1.norm() >= d2.norm() { d1 } else { d2 };
        let step = if d.norm() > 0.0 { C64::new(n, 0.0) / d } else { C64::new(1e-3, 1e-3) };
        z -= step;
        if step.norm() <= 1e-15 * z.norm().max(1.0) {
            return Some(z);
        }
    }
    None
}

fn laguerre_deflation(monic: &[C64]) -> Option<Vec<C64>> {
    let mut poly = monic.to_vec();
    let mut roots = Vec::new();
    while poly.len() > 2 {
        let r = laguerre(&poly, C64::new(0.0, 0.0))?;
        roots.push(r);
        // synthetic division by (z - r)
        let n = poly.len() - 1;
        let mut q = vec![C64::new(0.0, 0.0); n];
        q[n - 1] = poly[n];
        for k in (0..n - 1).rev() {
            q[k] = poly[k + 1] + q[k + 1] * r;
        }
        poly = q;
    }
    roots.push(-poly[0] / poly[1]);
    Some(polish(monic, roots))
}

fn polish(poly: &[C64], roots: Vec<C64>) -> Vec<C64> {
    roots
        .into_iter()
        .map(|mut z| {
            for _ in 0..3 {
                let (p, dp, _) = horner_with_derivs(poly, z);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                let next = z - step;
                if horner(poly, next).norm() < p.norm() {
                    z = next;
                } else {
                    break;
                }
            }
            z
        })
        .collect()
}

/// Merge roots closer than `tol * max(1, |z|)` into clusters; returns (mean location, count).
pub fn cluster_roots(roots: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        l[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() <= tol * scale {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b] = a;
                }
            }
        }
    }
    let mut clusters: Vec<(usize, C64, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match clusters.iter_mut().find(|c| c.0 == r) {
            Some(c) => {
                c.1 += roots[i];
                c.2 += 1;
            }
            None => clusters.push((r, roots[i], 1)),
        }
    }
    clusters.into_iter().map(|(_, sum, m)| (sum / m as f64, m)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn quadratic_roots() {
        let mut r = polynomial_roots(&[c(-2.0), c(0.0), c(0.5)]).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0] - c(-2.0)).norm() < 1e-12);
        assert!((r[1] - c(2.0)).norm() < 1e-12);
    }

    #[test]
    fn double_root_clusters() {
        // q^2 (q^2 - 2) / 4
        let r = polynomial_roots(&[c(0.0), c(0.0), c(-0.5), c(0.0), c(0.25)]).unwrap();
        let cl = cluster_roots(&r, 1e-6);
        assert_eq!(cl.len(), 3);
        let dbl = cl.iter().find(|x| x.1 == 2).unwrap();
        assert!(dbl.0.norm() < 1e-7);
    }

    #[test]
    fn laguerre_fallback_agrees() {
        let p = [c(6.0), c(-5.0), c(-2.0), c(1.0)]; // (z-1)(z+2)(z-3)
        let mut r = laguerre_deflation(&p).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (got, want) in r.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((got - c(want)).norm() < 1e-12);
        }
    }
}
