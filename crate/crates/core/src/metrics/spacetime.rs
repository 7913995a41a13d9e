use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::norm;

/// Static spherically symmetric spacetime in isotropic coordinates `(t, x_1..x_n)`:
///
/// `ds² = -((1 - k/r^{n-2}) / (1 + k/r^{n-2}))² dt² + (1 + k/r^{n-2})^{4/(n-2)} δ_ij dx^i dx^j`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimeInstance {
    pub n: usize,
    pub k: f64,
}

impl SpacetimeInstance {
    pub fn new(k: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain(format!("spacetime needs n >= 3 spatial dimensions, got {n}")));
        }
        if !k.is_finite() {
            return Err(Error::domain("k must be finite"));
        }
        Ok(SpacetimeInstance { n, k })
    }

    fn p(&self) -> f64 {
        self.n as f64 - 2.0
    }

    /// Radius `|k|^{1/(n-2)}` where the chart degenerates.
    pub fn chart_radius(&self) -> f64 {
        self.k.abs().powf(1.0 / self.p())
    }

    pub fn check_radius(&self, r: f64) -> Result<()> {
        if !(r > self.chart_radius()) || !(r > 0.0) {
            return Err(Error::domain(format!(
                "r = {r} is not in the exterior chart r > {}",
                self.chart_radius()
            )));
        }
        Ok(())
    }

    /// `A(r) = -g_00`.
    pub fn lapse_sq(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let q = self.k / r.powf(self.p());
        Ok(((1.0 - q) / (1.0 + q)).powi(2))
    }

    /// `B(r) = g_ii`.
    pub fn spatial_factor(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let q = self.k / r.powf(self.p());
        Ok((1.0 + q).powf(4.0 / self.p()))
    }

    /// `(dA/dr, dB/dr)`.
    pub fn radial_derivatives(&self, r: f64) -> Result<(f64, f64)> {
        self.check_radius(r)?;
        let p = self.p();
        let q = self.k / r.powf(p);
        let dq = -p * q / r;
        let ratio = (1.0 - q) / (1.0 + q);
        let dratio = -2.0 * dq / (1.0 + q).powi(2);
        let da = 2.0 * ratio * dratio;
        let db = (4.0 / p) * (1.0 + q).powf(4.0 / p - 1.0) * dq;
        Ok((da, db))
    }

    /// Components at spatial point `x`, ordered `(t, x_1, .., x_n)`.
    pub fn components_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if x.len() != self.n {
            return Err(Error::domain("point has the wrong dimension"));
        }
        let r = norm(x);
        let (a, b) = (self.lapse_sq(r)?, self.spatial_factor(r)?);
        let mut g = DMatrix::identity(self.n + 1, self.n + 1) * b;
        g[(0, 0)] = -a;
        Ok(g)
    }
}

/// Components at the chart point `(0, .., 0, r)`.
pub fn spacetime_components(k: f64, n: usize, r: f64) -> Result<DMatrix<f64>> {
    let st = SpacetimeInstance::new(k, n)?;
    let mut x = vec![0.0; n];
    x[n - 1] = r;
    st.components_at(&x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_when_k_vanishes() {
        let g = spacetime_components(0.0, 3, 2.0).unwrap();
        let eta = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, 1.0, 1.0]));
        assert_eq!(g, eta);
    }

    #[test]
    fn arithmetic_example() {
        let g = spacetime_components(0.5, 3, 10.0).unwrap();
        let q: f64 = 1.0 / 20.0;
        assert!((g[(0, 0)] + ((1.0 - q) / (1.0 + q)).powi(2)).abs() < 1e-15);
        assert!((g[(1, 1)] - (1.0 + q).powi(4)).abs() < 1e-14);
    }

    #[test]
    fn lapse_vanishes_at_chart_radius() {
        let st = SpacetimeInstance::new(1.0, 4).unwrap();
        assert!(st.lapse_sq(1.0 + 1e-8).unwrap() < 1e-15);
        assert!(spacetime_components(1.0, 4, 1.0).is_err());
        assert!(spacetime_components(-1.0, 3, 0.5).is_err());
    }

    #[test]
    fn radial_derivatives_match_differences() {
        let st = SpacetimeInstance::new(-0.5, 5).unwrap();
        let r = 1.7;
        let h = 1e-6;
        let (da, db) = st.radial_derivatives(r).unwrap();
        let fa = (st.lapse_sq(r + h).unwrap() - st.lapse_sq(r - h).unwrap()) / (2.0 * h);
        let fb = (st.spatial_factor(r + h).unwrap() - st.spatial_factor(r - h).unwrap()) / (2.0 * h);
        assert!((da - fa).abs() < 1e-8 && (db - fb).abs() < 1e-8);
    }
}
