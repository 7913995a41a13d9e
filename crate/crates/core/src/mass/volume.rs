use crate::curvature::scalar_curvature_graph;
use crate::error::{Error, Result};
use crate::metrics::{GraphMetric, ScalarField, SurfaceSpec};
use crate::numerics::{
    derivatives, integrate_exterior_volume, integrate_sphere, pairwise_sum, unit_sphere_measure, DiffScheme, Region,
    SphereRule, VolumeRule,
};

use super::{mass_normalization, MassBreakdown, MassMethod};

fn with_field_breakpoints(rule: &VolumeRule, field: &dyn ScalarField) -> VolumeRule {
    rule.clone().with_breakpoints(&field.breakpoints())
}

/// Volume-integral mass of `g = u^{4/(n-2)} δ` on all of flat space.
///
/// The integrand `R u^{-1} / (2(n-1)ω) dV_g` is evaluated in the equivalent flat form
/// `-Δu · 2/((n-2)ω) dV_δ`. The exponent `(2-n)/(n-2)` on `u` is the constant `-1`.
pub fn mass_conformal(u: &dyn ScalarField, rule: &VolumeRule) -> Result<MassBreakdown> {
    let n = u.dim();
    if n < 3 {
        return Err(Error::domain("conformal mass needs n >= 3"));
    }
    let scale = 2.0 / ((n as f64 - 2.0) * unit_sphere_measure(n)?);
    let scheme = DiffScheme::analytic();
    let est = integrate_exterior_volume(
        |x| {
            let jet = derivatives(u, x, 2, &scheme)?;
            if !(jet.value > 0.0) {
                return Err(Error::domain(format!("conformal factor is {} at {x:?}", jet.value)));
            }
            Ok(-jet.laplacian() * scale)
        },
        &Region::whole(n),
        &with_field_breakpoints(rule, u),
    )?;
    Ok(MassBreakdown::new(MassMethod::ConformalVolume, 0.0, est.value, est.error))
}

/// `-(2/((n-2)ω)) ∮_{S_r} ∂_r u dA`, which equals the conformal volume mass inside radius `r`.
pub fn partial_mass_conformal(u: &dyn ScalarField, r: f64, rule: &SphereRule) -> Result<f64> {
    let n = u.dim();
    let scheme = DiffScheme::analytic();
    let flux = integrate_sphere(
        |x| {
            let jet = derivatives(u, x, 1, &scheme)?;
            Ok(x.iter().zip(&jet.gradient).map(|(x, g)| x * g).sum::<f64>() / r)
        },
        rule,
        None,
        r,
    )?;
    Ok(-2.0 * flux / ((n as f64 - 2.0) * unit_sphere_measure(n)?))
}

fn graph_volume_term(f: &dyn ScalarField, region: &Region, rule: &VolumeRule) -> Result<(f64, f64)> {
    let norm = mass_normalization(f.dim())?;
    let scheme = DiffScheme::analytic();
    // R (1+|∇f|²)^{-1/2} dV_g = R dV_δ
    let est = integrate_exterior_volume(
        |x| Ok(scalar_curvature_graph(f, x, &scheme)? / norm),
        region,
        &with_field_breakpoints(rule, f),
    )?;
    Ok((est.value, est.error))
}

/// Volume-integral mass of the graph of `f` over all of flat space.
pub fn mass_graph(f: &dyn ScalarField, rule: &VolumeRule) -> Result<MassBreakdown> {
    let (v, e) = graph_volume_term(f, &Region::whole(f.dim()), rule)?;
    let mut out = MassBreakdown::new(MassMethod::GraphVolume, 0.0, v, e);
    if f.decay().is_none() {
        out.warnings.push("no decay declared for the height function".into());
    }
    Ok(out)
}

/// Boundary plus volume mass of a graph over the complement of its excluded regions.
///
/// The boundary hypotheses are sampled first. The boundary term is the flat mean curvature
/// integral of each component; its error is the change against a rule of half the degree.
pub fn mass_graph_boundary(gm: &GraphMetric, rule: &VolumeRule) -> Result<MassBreakdown> {
    let n = gm.dim();
    if gm.holes().is_empty() {
        let mut out = mass_graph(gm.height(), rule)?;
        out.method = MassMethod::GraphBoundary;
        return Ok(out);
    }
    gm.check_boundary_hypotheses(&rule.angular)?;
    let norm = mass_normalization(n)?;
    let coarse = SphereRule::new(n, (rule.angular.degree() / 2).max(2))?;
    let mut boundary = 0.0;
    let mut boundary_err = 0.0;
    for s in gm.boundary()? {
        let fine = boundary_integral(&s, &rule.angular)?;
        boundary += fine / norm;
        boundary_err += (fine - boundary_integral(&s, &coarse)?).abs() / norm;
    }
    let mut vrule = rule.clone();
    if vrule.singular_exponent.is_none() {
        vrule = vrule.with_singular_exponent(2);
    }
    let (volume, verr) = graph_volume_term(gm.height(), &Region::exterior(n, gm.holes().to_vec()), &vrule)?;
    Ok(MassBreakdown::new(MassMethod::GraphBoundary, boundary, volume, boundary_err + verr))
}

fn boundary_integral(s: &SurfaceSpec, rule: &SphereRule) -> Result<f64> {
    let terms: Vec<f64> = s
        .quadrature(rule)?
        .iter()
        .map(|p| Ok(s.mean_curvature_flat(&p.x)? * p.weight))
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{parse_field, FieldRef, PiecewiseRadial};
    use crate::numerics::StarHole;
    use std::sync::Arc;

    #[test]
    fn capped_schwarzschild() {
        let inner = parse_field("1 + (3 - r^2)/4", 3).unwrap();
        let outer = parse_field("1 + 1/(2*r)", 3).unwrap();
        let u = PiecewiseRadial::new(inner, outer, 1.0).unwrap();
        let b = mass_conformal(&u, &VolumeRule::standard(3).unwrap()).unwrap();
        assert!((b.total - 1.0).abs() < 1e-10, "{b:?}");
        let rule = SphereRule::new(3, 4).unwrap();
        assert!((partial_mass_conformal(&u, 0.5, &rule).unwrap() - 0.125).abs() < 1e-12);
        assert!((partial_mass_conformal(&u, 3.0, &rule).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_fields_have_no_mass() {
        let rule = VolumeRule::standard(3).unwrap();
        assert_eq!(mass_conformal(&parse_field("1", 3).unwrap(), &rule).unwrap().total, 0.0);
        assert_eq!(mass_graph(&parse_field("5", 3).unwrap(), &rule).unwrap().total, 0.0);
    }

    #[test]
    fn schwarzschild_graph_boundary() {
        let f: FieldRef = Arc::new(parse_field("sqrt(8*(r-2))", 3).unwrap());
        let gm = GraphMetric::new(f, vec![StarHole::ball(vec![0.0; 3], 2.0)]).unwrap();
        let b = mass_graph_boundary(&gm, &VolumeRule::standard(3).unwrap()).unwrap();
        assert!((b.boundary - 1.0).abs() < 1e-12, "{b:?}");
        assert!(b.volume.abs() < 1e-6, "{b:?}");
    }

    #[test]
    fn hypotheses_are_checked() {
        let f: FieldRef = Arc::new(parse_field("r - 2", 3).unwrap());
        let gm = GraphMetric::new(f, vec![StarHole::ball(vec![0.0; 3], 2.0)]).unwrap();
        assert!(matches!(
            mass_graph_boundary(&gm, &VolumeRule::standard(3).unwrap()),
            Err(Error::Hypothesis(_))
        ));
    }
}
