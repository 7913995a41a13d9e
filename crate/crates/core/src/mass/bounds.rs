use crate::error::{Error, Result};
use crate::metrics::SurfaceSpec;
use crate::numerics::{pairwise_sum, unit_sphere_measure, SphereRule};

use super::mass_normalization;

/// `½ (A/ω_{n-1})^{(n-2)/(n-1)}`, the mass of a round horizon of area `A`.
pub fn horizon_mass_term(area: f64, n: usize) -> Result<f64> {
    if !(area >= 0.0) {
        return Err(Error::domain(format!("area must be non-negative, got {area}")));
    }
    if n < 3 {
        return Err(Error::domain(format!("n must be at least 3, got {n}")));
    }
    let nf = n as f64;
    Ok(0.5 * (area / unit_sphere_measure(n)?).powf((nf - 2.0) / (nf - 1.0)))
}

/// Black-hole mass of a collection of horizons: [`horizon_mass_term`] of the total area.
pub fn black_hole_mass(areas: &[f64], n: usize) -> Result<f64> {
    if let Some(a) = areas.iter().find(|a| !(**a >= 0.0)) {
        return Err(Error::domain(format!("negative horizon area {a}")));
    }
    horizon_mass_term(areas.iter().sum(), n)
}

/// Both sides of `∫_S H dA / (2(n-1)ω) ≥ ½ (|S|/ω)^{(n-2)/(n-1)}` for a convex surface.
pub fn af_boundary_bound(s: &SurfaceSpec, rule: &SphereRule) -> Result<(f64, f64)> {
    if !s.is_convex() {
        return Err(Error::Unsupported("the boundary bound needs a surface known to be convex".into()));
    }
    let n = s.dim();
    let pts = s.quadrature(rule)?;
    let h: Vec<f64> = pts
        .iter()
        .map(|p| Ok(s.mean_curvature_flat(&p.x)? * p.weight))
        .collect::<Result<_>>()?;
    let area = pairwise_sum(&pts.iter().map(|p| p.weight).collect::<Vec<_>>());
    Ok((pairwise_sum(&h) / mass_normalization(n)?, horizon_mass_term(area, n)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn black_hole_examples() {
        assert!((black_hole_mass(&[16.0 * PI], 3).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(black_hole_mass(&[0.0], 3).unwrap(), 0.0);
        assert_eq!(black_hole_mass(&[], 4).unwrap(), 0.0);
        let two = black_hole_mass(&[16.0 * PI, 16.0 * PI], 3).unwrap();
        assert!((two - 2f64.sqrt()).abs() < 1e-15);
        assert!(black_hole_mass(&[1.0, -1.0], 3).is_err());
    }

    #[test]
    fn round_spheres_are_equality_cases() {
        for n in 3..=5 {
            let rule = SphereRule::new(n, 6).unwrap();
            for rho in [0.5, 1.0, 3.0] {
                let s = SurfaceSpec::centered_sphere(n, rho).unwrap();
                let (lhs, rhs) = af_boundary_bound(&s, &rule).unwrap();
                let expect = 0.5 * rho.powi(n as i32 - 2);
                assert!((lhs - expect).abs() < 1e-12 * expect && (rhs - expect).abs() < 1e-12 * expect);
            }
        }
    }

    #[test]
    fn level_sets_are_not_assumed_convex() {
        let f = std::sync::Arc::new(crate::metrics::parse_field("r", 3).unwrap());
        let s = SurfaceSpec::LevelSet {
            field: f,
            level: 1.0,
            center: vec![0.0; 3],
            bracket: (0.5, 2.0),
        };
        assert!(matches!(af_boundary_bound(&s, &SphereRule::new(3, 4).unwrap()), Err(Error::Unsupported(_))));
    }
}
