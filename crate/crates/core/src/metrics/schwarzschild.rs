use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{norm, unit_sphere_measure, GaussRule};

use super::expr::{parse_field, ExprField};
use super::surface::ray_root;

/// `u = 1 + m / (2 |x|^{n-2})` as a parsed field (decay `n - 2`).
pub fn schwarzschild_conformal_factor(m: f64, n: usize) -> Result<ExprField> {
    if n < 3 {
        return Err(Error::domain(format!("Schwarzschild metrics need n >= 3, got {n}")));
    }
    if !m.is_finite() {
        return Err(Error::domain("mass must be finite"));
    }
    let expr = if m == 0.0 {
        "1".to_string()
    } else {
        format!("1 + ({m:?})/(2*r^{})", n - 2)
    };
    Ok(parse_field(&expr, n)?.with_decay(n as f64 - 2.0))
}

/// Minimal sphere of a positive-mass Schwarzschild metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Horizon {
    pub conformal_radius: f64,
    pub area: f64,
    pub area_radius: f64,
}

/// Closed-form data of the Schwarzschild metric of mass `m` in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchwarzschildInstance {
    pub n: usize,
    pub m: f64,
    /// Conformal radius below which the chart is not used (0 for `m >= 0`).
    pub inner_radius: f64,
    pub horizon: Option<Horizon>,
    /// Conformal radius where `u = 0`, for `m < 0`.
    pub zas_radius: Option<f64>,
}

pub fn schwarzschild_geometry(m: f64, n: usize) -> Result<SchwarzschildInstance> {
    if n < 3 {
        return Err(Error::domain(format!("Schwarzschild metrics need n >= 3, got {n}")));
    }
    let k = n as f64 - 2.0;
    let omega = unit_sphere_measure(n)?;
    let horizon = (m > 0.0).then(|| Horizon {
        conformal_radius: (m / 2.0).powf(1.0 / k),
        area: omega * (2.0 * m).powf((n as f64 - 1.0) / k),
        area_radius: (2.0 * m).powf(1.0 / k),
    });
    let zas_radius = (m < 0.0).then(|| (-m / 2.0).powf(1.0 / k));
    Ok(SchwarzschildInstance {
        n,
        m,
        inner_radius: zas_radius.unwrap_or(0.0),
        horizon,
        zas_radius,
    })
}

impl SchwarzschildInstance {
    fn k(&self) -> f64 {
        self.n as f64 - 2.0
    }

    pub fn u(&self, r: f64) -> f64 {
        1.0 + self.m / (2.0 * r.powf(self.k()))
    }

    /// `du/dr`.
    pub fn du(&self, r: f64) -> f64 {
        -self.k() * self.m / (2.0 * r.powf(self.k() + 1.0))
    }

    /// Area radius `R = r u^{2/(n-2)}` of the coordinate sphere of radius `r`.
    pub fn area_radius(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(r * self.u(r).powf(2.0 / self.k()))
    }

    /// `dR/dr`.
    pub fn area_radius_derivative(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let (u, k) = (self.u(r), self.k());
        Ok(u.powf(2.0 / k) + r * (2.0 / k) * u.powf(2.0 / k - 1.0) * self.du(r))
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r > self.inner_radius) || !(r > 0.0) {
            return Err(Error::domain(format!(
                "conformal radius {r} is outside the chart (r > {})",
                self.inner_radius
            )));
        }
        Ok(())
    }

    /// Conformal radius of the outer-branch sphere with area radius `R`.
    pub fn conformal_radius(&self, area_radius: f64) -> Result<f64> {
        let big_r = area_radius;
        let lower = self.horizon.map_or(self.inner_radius, |h| h.conformal_radius);
        let min_area_radius = self.horizon.map_or(0.0, |h| h.area_radius);
        if !(big_r >= min_area_radius) || !(big_r > 0.0) {
            return Err(Error::domain(format!(
                "area radius {big_r} is below the minimum {min_area_radius}"
            )));
        }
        if self.n == 3 {
            // r² + (m - R) r + m²/4 = 0, outer root
            let m = self.m;
            let disc = ((big_r - m).powi(2) - m * m).max(0.0);
            return Ok(0.5 * ((big_r - m) + disc.sqrt()));
        }
        if let Some(h) = self.horizon {
            if big_r == h.area_radius {
                return Ok(h.conformal_radius);
            }
        }
        let mut hi = big_r.max(lower) * 2.0 + 1.0;
        while self.area_radius(hi)? < big_r {
            hi *= 2.0;
        }
        let lo = if lower > 0.0 { lower * (1.0 + 1e-15) } else { 0.0 };
        let g = |r: f64| -> Result<f64> {
            if r <= self.inner_radius {
                return Ok(-big_r);
            }
            Ok(self.area_radius(r)? - big_r)
        };
        ray_root(g, (lo.max(self.inner_radius), hi))
    }

    /// Mean curvature of the sphere of area radius `R` (outer branch):
    /// `((n-1)/R) sqrt(1 - 2m / R^{n-2})`.
    pub fn mean_curvature_at_area_radius(&self, area_radius: f64) -> Result<f64> {
        let s = 1.0 - 2.0 * self.m / area_radius.powf(self.k());
        if s < 0.0 {
            return Err(Error::domain("area radius inside the horizon"));
        }
        Ok((self.n as f64 - 1.0) / area_radius * s.sqrt())
    }
}

/// Max-norm difference between `g` and its pullback under `x ↦ r0² x / |x|²`.
pub fn inversion_pullback_residual(m: f64, n: usize, x: &[f64]) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::domain("inversion isometry needs m > 0"));
    }
    if x.len() != n {
        return Err(Error::domain("point has the wrong dimension"));
    }
    let geo = schwarzschild_geometry(m, n)?;
    let r0 = geo.horizon.map(|h| h.conformal_radius).unwrap_or(0.0);
    let r = norm(x);
    if !(r > 0.0) {
        return Err(Error::domain("inversion is undefined at the origin"));
    }
    let p = 4.0 / (n as f64 - 2.0);
    let metric = |rr: f64| geo.u(rr).powf(p);

    // Jacobian of Φ(x) = r0² x / r²: (r0²/r²)(I - 2 x xᵀ / r²)
    let jac = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        r0 * r0 / (r * r) * (delta - 2.0 * x[i] * x[j] / (r * r))
    });
    let image_radius = r0 * r0 / r;
    let pulled = jac.transpose() * &jac * metric(image_radius);
    let here = DMatrix::identity(n, n) * metric(r);
    Ok((pulled - here).amax())
}

/// Rotation profile `R(w)` embedding the Schwarzschild metric of mass `m` as a hypersurface
/// of revolution: Euclidean space for `m > 0`, Minkowski space for `m < 0`.
///
/// `(dR/dw)² = R^{n-2}/(2|m|) ∓ 1`. For `n = 3` the closed forms
/// `R = w²/(8|m|) ± 2|m|` are used; otherwise `w(R)` is integrated numerically from
/// the horizon (`m > 0`) or from `R = 0` (`m < 0`) and inverted.
#[derive(Debug, Clone)]
pub struct EmbeddingProfile {
    pub m: f64,
    pub n: usize,
    gauss: GaussRule,
}

const PROFILE_PANELS: usize = 8;

impl EmbeddingProfile {
    pub fn new(m: f64, n: usize) -> Result<Self> {
        if m == 0.0 {
            return Err(Error::Degenerate("the m = 0 embedding is a flat hyperplane".into()));
        }
        if n < 3 {
            return Err(Error::domain(format!("embedding needs n >= 3, got {n}")));
        }
        Ok(EmbeddingProfile {
            m,
            n,
            gauss: GaussRule::legendre(24)?,
        })
    }

    fn k(&self) -> f64 {
        self.n as f64 - 2.0
    }

    /// Right-hand side `R^{n-2}/(2|m|) ∓ 1` of the profile equation.
    pub fn rhs(&self, big_r: f64) -> f64 {
        let base = big_r.powf(self.k()) / (2.0 * self.m.abs());
        if self.m > 0.0 {
            base - 1.0
        } else {
            base + 1.0
        }
    }

    /// Smallest area radius on the profile.
    pub fn start(&self) -> f64 {
        if self.m > 0.0 {
            (2.0 * self.m).powf(1.0 / self.k())
        } else {
            0.0
        }
    }

    /// Height `w` as a function of `R`.
    pub fn height(&self, big_r: f64) -> Result<f64> {
        let r0 = self.start();
        if !(big_r >= r0) {
            return Err(Error::domain(format!("area radius {big_r} below profile start {r0}")));
        }
        let a = self.m.abs();
        if self.n == 3 {
            return Ok(if self.m > 0.0 {
                (8.0 * a * (big_r - 2.0 * a)).sqrt()
            } else {
                (8.0 * a * (big_r + 2.0 * a)).sqrt()
            });
        }
        self.numeric_height(big_r)
    }

    fn numeric_height(&self, big_r: f64) -> Result<f64> {
        let (r0, a, k) = (self.start(), self.m.abs(), self.k());
        let (upper, integrand): (f64, Box<dyn Fn(f64) -> f64>) = if self.m > 0.0 {
            // R = R0 + s² removes the square-root endpoint; R0^{n-2} = 2m, so the
            // right-hand side is (1 + s²/R0)^{n-2} - 1, evaluated without cancellation
            (
                (big_r - r0).sqrt(),
                Box::new(move |s: f64| {
                    if s == 0.0 {
                        return 2.0 * (r0 / k).sqrt();
                    }
                    2.0 * s / (k * (s * s / r0).ln_1p()).exp_m1().sqrt()
                }),
            )
        } else {
            (big_r, Box::new(move |t: f64| 1.0 / (t.powf(k) / (2.0 * a) + 1.0).sqrt()))
        };
        let width = upper / PROFILE_PANELS as f64;
        let mut total = 0.0;
        for p in 0..PROFILE_PANELS {
            let (lo, hi) = (p as f64 * width, (p + 1) as f64 * width);
            total += self.gauss.on_interval(lo, hi).map(|(t, w)| w * integrand(t)).sum::<f64>();
        }
        Ok(total)
    }

    /// `R` as a function of the height `w >= 0`.
    pub fn radius(&self, w: f64) -> Result<f64> {
        if !(w >= 0.0) {
            return Err(Error::domain(format!("profile height must be >= 0, got {w}")));
        }
        let a = self.m.abs();
        if self.n == 3 {
            let big_r = if self.m > 0.0 {
                w * w / (8.0 * a) + 2.0 * a
            } else {
                w * w / (8.0 * a) - 2.0 * a
            };
            if big_r < 0.0 {
                return Err(Error::domain(format!("height {w} is below the profile (R < 0)")));
            }
            return Ok(big_r);
        }
        let r0 = self.start();
        let mut hi = r0.max(1.0) * 2.0;
        while self.height(hi)? < w {
            hi *= 2.0;
        }
        let mut big_r = ray_root(|rr| Ok(self.height(rr)? - w), (r0, hi))?;
        for _ in 0..2 {
            let s = self.rhs(big_r);
            if s > 0.0 {
                big_r -= (self.height(big_r)? - w) * s.sqrt();
            }
        }
        Ok(big_r)
    }
}

/// `|(dR/dw)² - (R^{n-2}/(2|m|) ∓ 1)|` at height `w` on the embedding profile.
pub fn embedding_profile_residual(m: f64, n: usize, w: f64) -> Result<f64> {
    let profile = EmbeddingProfile::new(m, n)?;
    let w = w.abs();
    let big_r = profile.radius(w)?;
    let slope = if n == 3 {
        w / (4.0 * m.abs())
    } else {
        let h = 1e-3 * w.max(1.0);
        if w < 2.0 * h {
            return Err(Error::domain("height too close to the profile start for differencing"));
        }
        let at = |t: f64| profile.radius(w + t * h);
        (-at(2.0)? + 8.0 * at(1.0)? - 8.0 * at(-1.0)? + at(-2.0)?) / (12.0 * h)
    };
    Ok((slope * slope - profile.rhs(big_r)).abs())
}

/// Relative difference between the radial component `g_rr` of the metric induced on the
/// embedded hypersurface and `u^{4/(n-2)}`, at conformal radius `r`.
pub fn embedding_induced_metric_residual(m: f64, n: usize, r: f64) -> Result<f64> {
    let profile = EmbeddingProfile::new(m, n)?;
    let geo = schwarzschild_geometry(m, n)?;
    let big_r = geo.area_radius(r)?;
    let dr = geo.area_radius_derivative(r)?;
    let h = 1e-4 * big_r.max(1.0);
    if big_r - 2.0 * h <= profile.start() {
        return Err(Error::domain("radius too close to the profile start for differencing"));
    }
    let at = |t: f64| profile.height(big_r + t * h);
    let dw = (-at(2.0)? + 8.0 * at(1.0)? - 8.0 * at(-1.0)? + at(-2.0)?) / (12.0 * h);
    let sign = if m > 0.0 { 1.0 } else { -1.0 };
    let induced = (1.0 + sign * dw * dw) * dr * dr;
    let target = geo.u(r).powf(4.0 / (n as f64 - 2.0));
    Ok(((induced - target) / target).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ScalarField;
    use std::f64::consts::PI;

    #[test]
    fn conformal_factor_examples() {
        let u = schwarzschild_conformal_factor(2.0, 3).unwrap();
        assert_eq!(u.value(&[1.0, 0.0, 0.0]).unwrap(), 2.0);
        let flat = schwarzschild_conformal_factor(0.0, 4).unwrap();
        assert!(flat.is_constant());
        let neg = schwarzschild_conformal_factor(-1.0, 3).unwrap();
        assert_eq!(neg.value(&[0.0, 0.5, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn horizon_closed_forms() {
        let g = schwarzschild_geometry(1.0, 3).unwrap();
        let h = g.horizon.unwrap();
        assert_eq!(h.conformal_radius, 0.5);
        assert!((h.area - 16.0 * PI).abs() < 1e-12);
        assert!((g.area_radius(0.5).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(g.u(0.5), 2.0);

        let g4 = schwarzschild_geometry(1.0, 4).unwrap();
        let h4 = g4.horizon.unwrap();
        assert!((h4.conformal_radius - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((h4.area - 2.0 * PI * PI * 2f64.powf(1.5)).abs() < 1e-12);

        let neg = schwarzschild_geometry(-1.0, 3).unwrap();
        assert!(neg.horizon.is_none());
        assert_eq!(neg.zas_radius, Some(0.5));
    }

    #[test]
    fn conformal_radius_inverts_area_radius() {
        for (m, n) in [(1.0, 3), (1.0, 4), (2.0, 5), (-1.0, 3), (-1.0, 4)] {
            let g = schwarzschild_geometry(m, n).unwrap();
            let base = g.horizon.map_or(g.inner_radius, |h| h.conformal_radius);
            for r in [0.3, 1.0, 4.0, 25.0].map(|d| base + d) {
                let big_r = g.area_radius(r).unwrap();
                let back = g.conformal_radius(big_r).unwrap();
                assert!((back - r).abs() < 1e-12 * r, "m={m} n={n} r={r}: {back}");
            }
        }
    }

    #[test]
    fn inversion_fixed_sphere() {
        let r0 = 0.5;
        assert!(inversion_pullback_residual(1.0, 3, &[r0, 0.0, 0.0]).unwrap() < 1e-15);
        assert!(inversion_pullback_residual(-1.0, 3, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn numeric_profile_matches_closed_form() {
        // generic quadrature against the n = 3 closed forms (m < 0 starts at w = 4|m|)
        for m in [1.0, 2.5, -1.0, -0.5] {
            let p = EmbeddingProfile::new(m, 3).unwrap();
            let shift = if m < 0.0 { 4.0 * f64::abs(m) } else { 0.0 };
            for big_r in [0.01, 1.0, 7.5, 80.0].map(|d| p.start() + d) {
                let closed = p.height(big_r).unwrap() - shift;
                let numeric = p.numeric_height(big_r).unwrap();
                assert!((closed - numeric).abs() < 1e-11 * closed.max(1.0), "m={m} R={big_r}");
            }
        }
        assert!(matches!(EmbeddingProfile::new(0.0, 3), Err(Error::Degenerate(_))));
    }
}
