use crate::error::{Error, Result};
use crate::numerics::{derivatives, dot, norm, DiffScheme, SphereRule, StarHole};

use super::field::FieldRef;

/// A closed hypersurface of flat n-space, star-shaped about `center`.
#[derive(Debug, Clone)]
pub enum SurfaceSpec {
    Sphere {
        center: Vec<f64>,
        radius: f64,
    },
    /// Axis-aligned ellipsoid `Σ ((x - c)_i / a_i)² = 1`.
    Ellipsoid {
        center: Vec<f64>,
        semi_axes: Vec<f64>,
    },
    /// `{field = level}`, met exactly once by each ray from `center` within `bracket`
    /// (radial distances). The field must increase outward across the surface.
    LevelSet {
        field: FieldRef,
        level: f64,
        center: Vec<f64>,
        bracket: (f64, f64),
    },
}

/// One quadrature node on a surface: position, flat outward unit normal and flat area weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub x: Vec<f64>,
    pub normal: Vec<f64>,
    pub weight: f64,
}

impl SurfaceSpec {
    pub fn sphere(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain(format!("sphere radius must be positive, got {radius}")));
        }
        Ok(SurfaceSpec::Sphere { center, radius })
    }

    pub fn centered_sphere(n: usize, radius: f64) -> Result<Self> {
        Self::sphere(vec![0.0; n], radius)
    }

    pub fn ellipsoid(center: Vec<f64>, semi_axes: Vec<f64>) -> Result<Self> {
        if center.len() != semi_axes.len() {
            return Err(Error::domain("ellipsoid center and axes differ in dimension"));
        }
        if semi_axes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::domain("ellipsoid semi-axes must be positive"));
        }
        Ok(SurfaceSpec::Ellipsoid { center, semi_axes })
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    pub fn center(&self) -> &[f64] {
        match self {
            SurfaceSpec::Sphere { center, .. }
            | SurfaceSpec::Ellipsoid { center, .. }
            | SurfaceSpec::LevelSet { center, .. } => center,
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, SurfaceSpec::LevelSet { .. })
    }

    /// The region bounded by the surface, for shapes that have one in closed form.
    pub fn as_hole(&self) -> Option<StarHole> {
        match self {
            SurfaceSpec::Sphere { center, radius } => Some(StarHole::ball(center.clone(), *radius)),
            SurfaceSpec::Ellipsoid { center, semi_axes } => Some(StarHole {
                center: center.clone(),
                semi_axes: semi_axes.clone(),
            }),
            SurfaceSpec::LevelSet { .. } => None,
        }
    }

    pub fn from_hole(h: &StarHole) -> Result<Self> {
        if h.semi_axes.windows(2).all(|w| w[0] == w[1]) {
            Self::sphere(h.center.clone(), h.semi_axes[0])
        } else {
            Self::ellipsoid(h.center.clone(), h.semi_axes.clone())
        }
    }

    /// Surface point on the ray from the center in unit direction `theta`.
    pub fn ray_point(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let c = self.center();
        let rho = match self {
            SurfaceSpec::Sphere { radius, .. } => *radius,
            SurfaceSpec::Ellipsoid { semi_axes, .. } => {
                1.0 / theta.iter().zip(semi_axes).map(|(t, a)| (t / a).powi(2)).sum::<f64>().sqrt()
            }
            SurfaceSpec::LevelSet {
                field,
                level,
                bracket,
                ..
            } => {
                let g = |rho: f64| -> Result<f64> {
                    let x: Vec<f64> = c.iter().zip(theta).map(|(c, t)| c + rho * t).collect();
                    Ok(field.value(&x)? - level)
                };
                ray_root(g, *bracket)?
            }
        };
        Ok(c.iter().zip(theta).map(|(c, t)| c + rho * t).collect())
    }

    /// Flat outward unit normal at a point of the surface.
    pub fn normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        let c = self.center();
        let mut v: Vec<f64> = match self {
            SurfaceSpec::Sphere { .. } => x.iter().zip(c).map(|(x, c)| x - c).collect(),
            SurfaceSpec::Ellipsoid { semi_axes, .. } => {
                x.iter().zip(c).zip(semi_axes).map(|((x, c), a)| (x - c) / (a * a)).collect()
            }
            SurfaceSpec::LevelSet { field, .. } => {
                let jet = derivatives(field.as_ref(), x, 1, &DiffScheme::analytic())?;
                let radial: Vec<f64> = x.iter().zip(c).map(|(x, c)| x - c).collect();
                if dot(&jet.gradient, &radial) <= 0.0 {
                    return Err(Error::domain("level-set field does not increase outward"));
                }
                jet.gradient
            }
        };
        let len = norm(&v);
        if !(len > 0.0) {
            return Err(Error::domain("degenerate surface normal"));
        }
        v.iter_mut().for_each(|t| *t /= len);
        Ok(v)
    }

    /// Mean curvature in flat space: sum of principal curvatures, positive on round spheres.
    pub fn mean_curvature_flat(&self, x: &[f64]) -> Result<f64> {
        self.check_on_surface(x)?;
        let n = self.dim();
        match self {
            SurfaceSpec::Sphere { radius, .. } => Ok((n as f64 - 1.0) / radius),
            SurfaceSpec::Ellipsoid { center, semi_axes } => {
                // F = Σ ((x-c)_i/a_i)²: H = (ΔF|∇F|² - ∇Fᵀ ∇²F ∇F) / |∇F|³
                let grad: Vec<f64> = (0..n).map(|i| 2.0 * (x[i] - center[i]) / semi_axes[i].powi(2)).collect();
                let hdiag: Vec<f64> = semi_axes.iter().map(|a| 2.0 / (a * a)).collect();
                let g2 = dot(&grad, &grad);
                let lap: f64 = hdiag.iter().sum();
                let quad: f64 = (0..n).map(|i| grad[i] * grad[i] * hdiag[i]).sum();
                Ok((lap * g2 - quad) / g2.powf(1.5))
            }
            SurfaceSpec::LevelSet { field, .. } => {
                let jet = derivatives(field.as_ref(), x, 2, &DiffScheme::analytic())?;
                let g = &jet.gradient;
                let g2 = dot(g, g);
                let mut quad = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        quad += g[i] * jet.hessian[(i, j)] * g[j];
                    }
                }
                Ok((jet.laplacian() * g2 - quad) / g2.powf(1.5))
            }
        }
    }

    /// Errors unless `x` lies on the surface (relative tolerance 1e-8).
    pub fn check_on_surface(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::domain("point has the wrong dimension for the surface"));
        }
        let c = self.center();
        let (defect, scale) = match self {
            SurfaceSpec::Sphere { radius, .. } => {
                let d: Vec<f64> = x.iter().zip(c).map(|(x, c)| x - c).collect();
                ((norm(&d) - radius).abs(), *radius)
            }
            SurfaceSpec::Ellipsoid { semi_axes, .. } => {
                let s = x
                    .iter()
                    .zip(c)
                    .zip(semi_axes)
                    .map(|((x, c), a)| ((x - c) / a).powi(2))
                    .sum::<f64>()
                    .sqrt();
                ((s - 1.0).abs(), 1.0)
            }
            SurfaceSpec::LevelSet { field, level, .. } => {
                let jet = derivatives(field.as_ref(), x, 1, &DiffScheme::analytic())?;
                let g = norm(&jet.gradient);
                let d: Vec<f64> = x.iter().zip(c).map(|(x, c)| x - c).collect();
                ((jet.value - level).abs() / g.max(f64::MIN_POSITIVE), norm(&d))
            }
        };
        if defect > 1e-8 * scale.max(1e-300) {
            return Err(Error::domain(format!("point {x:?} is not on the surface (defect {defect:e})")));
        }
        Ok(())
    }

    /// Nodes and flat area weights obtained by projecting `rule` radially onto the surface.
    pub fn quadrature(&self, rule: &SphereRule) -> Result<Vec<SurfacePoint>> {
        let n = self.dim();
        if rule.dim() != n {
            return Err(Error::domain("sphere rule dimension does not match surface"));
        }
        let c = self.center();
        rule.iter()
            .map(|(theta, w)| {
                let x = self.ray_point(theta)?;
                let normal = self.normal(&x)?;
                let rho = norm(&x.iter().zip(c).map(|(x, c)| x - c).collect::<Vec<_>>());
                // star-shaped surface x = c + ρ(θ)θ: dA = ρ^{n-1} / (ν·θ) dΩ
                let cos = dot(&normal, theta);
                if !(cos > 0.0) {
                    return Err(Error::domain("surface is not star-shaped about its center"));
                }
                Ok(SurfacePoint {
                    weight: w * rho.powi(n as i32 - 1) / cos,
                    x,
                    normal,
                })
            })
            .collect()
    }

    /// Flat area.
    pub fn area_flat(&self, rule: &SphereRule) -> Result<f64> {
        let pts = self.quadrature(rule)?;
        Ok(crate::numerics::pairwise_sum(&pts.iter().map(|p| p.weight).collect::<Vec<_>>()))
    }
}

/// Root of `g` on `(lo, hi)` by bisection; `g` must change sign.
pub(crate) fn ray_root(g: impl Fn(f64) -> Result<f64>, (lo, hi): (f64, f64)) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut ga, gb) = (g(a)?, g(b)?);
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(Error::domain(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m)?;
        if gm == 0.0 {
            return Ok(m);
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::unit_sphere_measure;
    use std::f64::consts::PI;

    #[test]
    fn sphere_curvature_and_area() {
        let s = SurfaceSpec::sphere(vec![1.0, 0.0, 0.0], 2.0).unwrap();
        assert_eq!(s.mean_curvature_flat(&[3.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!(s.mean_curvature_flat(&[3.5, 0.0, 0.0]).is_err());
        let rule = SphereRule::new(3, 10).unwrap();
        assert!((s.area_flat(&rule).unwrap() - 16.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_principal_curvatures() {
        // at the tip of the long axis of (a,b,b) both principal curvatures are a/b²
        let e = SurfaceSpec::ellipsoid(vec![0.0; 3], vec![2.0, 1.0, 1.0]).unwrap();
        assert!((e.mean_curvature_flat(&[2.0, 0.0, 0.0]).unwrap() - 4.0).abs() < 1e-14);
        // on the equator: 1/b and b/a²
        assert!((e.mean_curvature_flat(&[0.0, 1.0, 0.0]).unwrap() - 1.25).abs() < 1e-14);
    }

    #[test]
    fn ellipsoid_area_matches_spheroid_formula() {
        // prolate spheroid a=2, b=1: 2πb² (1 + a/(b e) asin e), e = sqrt(1 - b²/a²)
        let e = SurfaceSpec::ellipsoid(vec![0.0; 3], vec![2.0, 1.0, 1.0]).unwrap();
        let ecc = (0.75f64).sqrt();
        let exact = 2.0 * PI * (1.0 + 2.0 / ecc * ecc.asin());
        let rule = SphereRule::new(3, 80).unwrap();
        let area = e.area_flat(&rule).unwrap();
        assert!((area - exact).abs() / exact < 1e-8, "{area} vs {exact}");
    }

    #[test]
    fn level_set_of_radius_is_sphere() {
        let f: FieldRef = std::sync::Arc::new(crate::metrics::parse_field("r^2", 4).unwrap());
        let s = SurfaceSpec::LevelSet {
            field: f,
            level: 2.25,
            center: vec![0.0; 4],
            bracket: (0.1, 10.0),
        };
        let rule = SphereRule::new(4, 6).unwrap();
        let area = s.area_flat(&rule).unwrap();
        let exact = unit_sphere_measure(4).unwrap() * 1.5f64.powi(3);
        assert!((area - exact).abs() / exact < 1e-12);
        let p = s.ray_point(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((s.mean_curvature_flat(&p).unwrap() - 2.0).abs() < 1e-10);
    }
}
