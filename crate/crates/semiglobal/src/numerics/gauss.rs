//! Gauss–Legendre rules and the matching spectral integration matrix.

use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1], ascending.
pub fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (z * p1 - p0) / (z * z - 1.0))
}

fn legendre_values(n: usize, z: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = z;
    }
    for k in 2..=n {
        let kf = k as f64;
        p[k] = ((2.0 * kf - 1.0) * z * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
    }
    p
}

/// A Gauss–Legendre panel rule with its integration matrix:
/// `cumulative[k][j]` integrates the j-th Lagrange basis polynomial from -1 to node k.
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub cumulative: Vec<Vec<f64>>,
}

impl PanelRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = legendre_rule(n);
        // Lagrange basis l_j = sum_m c_jm P_m with c_jm = w_j P_m(x_j) (2m+1)/2.
        let pj: Vec<Vec<f64>> = nodes.iter().map(|&x| legendre_values(n, x)).collect();
        let mut cumulative = vec![vec![0.0; n]; n];
        for (k, &xk) in nodes.iter().enumerate() {
            let pk = legendre_values(n, xk);
            // integral of P_m from -1 to x
            let mut int_p = vec![0.0; n];
            int_p[0] = xk + 1.0;
            for m in 1..n {
                int_p[m] = (pk[m + 1] - pk[m - 1]) / (2.0 * m as f64 + 1.0);
            }
            for j in 0..n {
                let mut acc = 0.0;
                for m in 0..n {
                    acc += weights[j] * pj[j][m] * (2.0 * m as f64 + 1.0) / 2.0 * int_p[m];
                }
                cumulative[k][j] = acc;
            }
        }
        PanelRule { nodes, weights, cumulative }
    }

    /// Shared 16-point rule used by the continuation engine.
    pub fn standard() -> &'static PanelRule {
        static RULE: OnceLock<PanelRule> = OnceLock::new();
        RULE.get_or_init(|| PanelRule::new(16))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = legendre_rule(8);
        for deg in 0..16 {
            let num: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((num - exact).abs() < 1e-14, "deg {deg}: {num} vs {exact}");
        }
    }

    #[test]
    fn cumulative_matrix_integrates_cubic() {
        let r = PanelRule::new(6);
        // f = 3x^2 + 1, F(x) - F(-1) = x^3 + x + 2
        for (k, &xk) in r.nodes.iter().enumerate() {
            let num: f64 = (0..r.len())
                .map(|j| r.cumulative[k][j] * (3.0 * r.nodes[j].powi(2) + 1.0))
                .sum();
            assert!((num - (xk.powi(3) + xk + 2.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn sixteen_point_weights_sum_to_two() {
        let r = PanelRule::standard();
        let s: f64 = r.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
    }
}
