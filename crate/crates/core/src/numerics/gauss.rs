use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Gauss rule on `[-1, 1]` for the symmetric Jacobi weight `(1 - t²)^alpha`.
///
/// `alpha = 0` is Gauss–Legendre. Nodes come from the Golub–Welsch eigenproblem,
/// polished by Newton steps on the orthonormal recurrence; weights are the
/// Christoffel numbers `1 / Σ_k p_k(t)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn legendre(npts: usize) -> Result<Self> {
        Self::symmetric_jacobi(npts, 0.0, 2.0)
    }

    /// `mu0` is the total mass `∫(1 - t²)^alpha dt` of the weight.
    pub fn symmetric_jacobi(npts: usize, alpha: f64, mu0: f64) -> Result<Self> {
        if npts == 0 {
            return Err(Error::domain("Gauss rule needs at least one node"));
        }
        if alpha < 0.0 {
            return Err(Error::domain(format!("Jacobi exponent {alpha} must be >= 0")));
        }
        // beta[k] = k(k+2a) / ((2k+2a+1)(2k+2a-1)), k >= 1
        let beta = |k: usize| -> f64 {
            let k = k as f64;
            k * (k + 2.0 * alpha) / ((2.0 * k + 2.0 * alpha + 1.0) * (2.0 * k + 2.0 * alpha - 1.0))
        };

        let mut jacobi = DMatrix::<f64>::zeros(npts, npts);
        for k in 1..npts {
            let b = beta(k).sqrt();
            jacobi[(k, k - 1)] = b;
            jacobi[(k - 1, k)] = b;
        }
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.total_cmp(b));

        // p_0 .. p_n orthonormal values and derivative of p_n at t
        let eval = |t: f64| -> (f64, f64, f64) {
            let mut p_prev = 0.0;
            let mut p = 1.0 / mu0.sqrt();
            let mut dp_prev = 0.0;
            let mut dp = 0.0;
            let mut christoffel = p * p;
            for k in 0..npts {
                let b_next = beta(k + 1).sqrt();
                let b_k = if k == 0 { 0.0 } else { beta(k).sqrt() };
                let p_next = (t * p - b_k * p_prev) / b_next;
                let dp_next = (p + t * dp - b_k * dp_prev) / b_next;
                p_prev = p;
                dp_prev = dp;
                p = p_next;
                dp = dp_next;
                if k + 1 < npts {
                    christoffel += p * p;
                }
            }
            (p, dp, christoffel)
        };

        for t in nodes.iter_mut() {
            for _ in 0..3 {
                let (p, dp, _) = eval(*t);
                if dp != 0.0 {
                    *t -= p / dp;
                }
            }
        }

        // enforce exact antipodal symmetry
        for i in 0..npts / 2 {
            let j = npts - 1 - i;
            let m = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -m;
            nodes[j] = m;
        }
        if npts % 2 == 1 {
            nodes[npts / 2] = 0.0;
        }

        let mut weights: Vec<f64> = nodes.iter().map(|&t| 1.0 / eval(t).2).collect();
        for i in 0..npts / 2 {
            let j = npts - 1 - i;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        Ok(GaussRule { nodes, weights })
    }

    /// Affine map of the rule onto `[lo, hi]` (Legendre weight only).
    pub fn on_interval(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, half * w))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn three_point_legendre_is_classical() {
        let g = GaussRule::legendre(3).unwrap();
        assert_relative_eq!(g.nodes[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_eq!(g.nodes[1], 0.0);
        assert_relative_eq!(g.weights[0], 5.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(g.weights[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let g = GaussRule::legendre(10).unwrap();
        for deg in 0..20u32 {
            let q: f64 = g.nodes.iter().zip(&g.weights).map(|(t, w)| w * t.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "deg {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn jacobi_half_weight_moments() {
        // ∫ (1-t²)^{1/2} t² dt = π/8
        let g = GaussRule::symmetric_jacobi(6, 0.5, std::f64::consts::FRAC_PI_2).unwrap();
        let total: f64 = g.weights.iter().sum();
        assert_relative_eq!(total, std::f64::consts::FRAC_PI_2, epsilon = 1e-14);
        let m2: f64 = g.nodes.iter().zip(&g.weights).map(|(t, w)| w * t * t).sum();
        assert_relative_eq!(m2, std::f64::consts::PI / 8.0, epsilon = 1e-14);
    }

    #[test]
    fn many_nodes_stay_accurate() {
        let g = GaussRule::legendre(64).unwrap();
        let total: f64 = g.weights.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-13);
        let q: f64 = g.nodes.iter().zip(&g.weights).map(|(t, w)| w * t.exp()).sum();
        assert_relative_eq!(q, 1f64.exp() - (-1f64).exp(), epsilon = 1e-13);
    }
}
