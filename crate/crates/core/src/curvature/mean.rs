use crate::error::{Error, Result};
use crate::metrics::{ScalarField, SurfaceSpec};
use crate::numerics::{derivatives, dot, DiffScheme, SphereRule};

/// Flat mean curvature of `s` at `x`, outward normal, positive on round spheres.
pub fn mean_curvature_euclidean(s: &SurfaceSpec, x: &[f64]) -> Result<f64> {
    s.mean_curvature_flat(x)
}

/// A surface quadrature node carrying the mean curvature and area weight measured in
/// `g = u^{4/(n-2)} δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalSurfacePoint {
    pub x: Vec<f64>,
    pub mean_curvature: f64,
    pub weight: f64,
}

/// Mean curvature of `s` at `x` in `g = u^{4/(n-2)} δ`:
/// `H_g = u^{-2/(n-2)} (H_δ + (2(n-1)/(n-2)) ∂_ν u / u)`.
pub fn mean_curvature_conformal(u: &dyn ScalarField, s: &SurfaceSpec, x: &[f64], scheme: &DiffScheme) -> Result<f64> {
    let normal = s.normal(x)?;
    let h = s.mean_curvature_flat(x)?;
    conformal_transform(u, x, &normal, h, scheme).map(|(hg, _)| hg)
}

/// `(H_g, dA_g / dA_δ)` at `x` given the flat normal and flat mean curvature there.
fn conformal_transform(
    u: &dyn ScalarField,
    x: &[f64],
    normal: &[f64],
    h_flat: f64,
    scheme: &DiffScheme,
) -> Result<(f64, f64)> {
    let n = u.dim();
    if n < 3 {
        return Err(Error::domain("conformal metrics need n >= 3"));
    }
    let p = n as f64 - 2.0;
    let jet = derivatives(u, x, 1, scheme)?;
    if !(jet.value > 0.0) {
        return Err(Error::domain(format!("conformal factor is {} at {x:?}", jet.value)));
    }
    let du = dot(&jet.gradient, normal);
    let hg = jet.value.powf(-2.0 / p) * (h_flat + 2.0 * (n as f64 - 1.0) / p * du / jet.value);
    let da = jet.value.powf(2.0 * (n as f64 - 1.0) / p);
    Ok((hg, da))
}

/// Quadrature nodes of `s` with conformal mean curvature and conformal area weights.
pub fn conformal_surface_data(
    u: &dyn ScalarField,
    s: &SurfaceSpec,
    rule: &SphereRule,
    scheme: &DiffScheme,
) -> Result<Vec<ConformalSurfacePoint>> {
    s.quadrature(rule)?
        .into_iter()
        .map(|pt| {
            let h = s.mean_curvature_flat(&pt.x)?;
            let (hg, da) = conformal_transform(u, &pt.x, &pt.normal, h, scheme)?;
            Ok(ConformalSurfacePoint {
                mean_curvature: hg,
                weight: pt.weight * da,
                x: pt.x,
            })
        })
        .collect()
}

/// Mean curvature of the centered coordinate sphere of radius `r` in `g = u^{4/(n-2)} δ`,
/// evaluated at `(0, .., 0, r)`.
pub fn mean_curvature_sphere_conformal(u: &dyn ScalarField, r: f64, scheme: &DiffScheme) -> Result<f64> {
    let n = u.dim();
    let s = SurfaceSpec::centered_sphere(n, r)?;
    let mut x = vec![0.0; n];
    x[n - 1] = r;
    mean_curvature_conformal(u, &s, &x, scheme)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::parse_field;

    #[test]
    fn euclidean_examples() {
        let s = SurfaceSpec::centered_sphere(3, 2.5).unwrap();
        assert!((mean_curvature_euclidean(&s, &[0.0, 2.5, 0.0]).unwrap() - 0.8).abs() < 1e-15);
        let big = SurfaceSpec::centered_sphere(3, 1e9).unwrap();
        assert!(mean_curvature_euclidean(&big, &[1e9, 0.0, 0.0]).unwrap() < 1e-8);
        let e = SurfaceSpec::ellipsoid(vec![0.0; 3], vec![2.0, 1.0, 1.0]).unwrap();
        // both principal curvatures a/b² = 2 at the tip of the long axis
        assert!((mean_curvature_euclidean(&e, &[2.0, 0.0, 0.0]).unwrap() - 4.0).abs() < 1e-14);
        assert!(mean_curvature_euclidean(&s, &[0.0, 2.4, 0.0]).is_err());
    }

    #[test]
    fn flat_and_schwarzschild_spheres() {
        let s = DiffScheme::analytic();
        let one = parse_field("1", 4).unwrap();
        assert!((mean_curvature_sphere_conformal(&one, 1.5, &s).unwrap() - 2.0).abs() < 1e-15);
        let u = parse_field("1 + 1/(2*r)", 3).unwrap();
        assert!(mean_curvature_sphere_conformal(&u, 0.5, &s).unwrap().abs() < 1e-14);
        let r: f64 = 3.0;
        let area_r = r * (1.0 + 0.5 / r).powi(2);
        let expect = 2.0 / area_r * (1.0 - 2.0 / area_r).sqrt();
        assert!((mean_curvature_sphere_conformal(&u, r, &s).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn conformal_area_of_schwarzschild_horizon() {
        let u = parse_field("1 + 1/(2*r)", 3).unwrap();
        let s = SurfaceSpec::centered_sphere(3, 0.5).unwrap();
        let rule = SphereRule::new(3, 10).unwrap();
        let pts = conformal_surface_data(&u, &s, &rule, &DiffScheme::analytic()).unwrap();
        let area: f64 = pts.iter().map(|p| p.weight).sum();
        assert!((area - 16.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(pts.iter().all(|p| p.mean_curvature.abs() < 1e-13));
    }
}
