use crate::curvature::conformal_surface_data;
use crate::error::{Error, Result};
use crate::metrics::{ConformalMetric, MetricInstance, ScalarField, SurfaceSpec, ZasResolution};
use crate::numerics::{
    derivatives, dot, extrapolate_limit, pairwise_sum, unit_sphere_measure, DiffScheme, ExtrapolationLadder,
    SphereRule,
};

use super::horizon_mass_term;

/// Mean curvatures above this are treated as zero when a real power is taken.
const NEGATIVE_H_TOLERANCE: f64 = -1e-10;

fn positive_power(h: f64, p: f64, x: &[f64]) -> Result<f64> {
    if h < NEGATIVE_H_TOLERANCE {
        return Err(Error::Convention(format!(
            "mean curvature {h:e} < 0 at {x:?}; its power {p} is undefined"
        )));
    }
    Ok(h.max(0.0).powf(p))
}

/// Regular mass of a zero area singularity:
/// `-(2/(n-2)²) ((1/ω) ∫_Σ ν̄(φ̄)^{2(n-1)/n} dĀ)^{n/(n-1)}`,
/// with `ν̄`, `dĀ` taken in the background `ḡ = ψ^{4/(n-2)} δ`.
pub fn zas_regular_mass(res: &ZasResolution, rule: &SphereRule) -> Result<f64> {
    let n = res.dim();
    let nf = n as f64;
    let p = nf - 2.0;
    let scheme = DiffScheme::analytic();
    let mut terms = Vec::with_capacity(rule.len());
    for pt in res.sigma.quadrature(rule)? {
        let psi = res.psi(&pt.x)?;
        if !(psi > 0.0) {
            return Err(Error::Regularity(format!("background factor is {psi} at {:?}", pt.x)));
        }
        let jet = derivatives(res.phi.as_ref(), &pt.x, 1, &scheme)?;
        let dphi = psi.powf(-2.0 / p) * dot(&jet.gradient, &pt.normal);
        if !(dphi > 0.0) {
            return Err(Error::Regularity(format!(
                "normal derivative of the resolution function is {dphi:e} at {:?}",
                pt.x
            )));
        }
        let da = psi.powf(2.0 * (nf - 1.0) / p) * pt.weight;
        terms.push(dphi.powf(2.0 * (nf - 1.0) / nf) * da);
    }
    let avg = pairwise_sum(&terms) / unit_sphere_measure(n)?;
    Ok(-(2.0 / (p * p)) * avg.powf(nf / (nf - 1.0)))
}

/// `((1/ω) ∫_S H^{2(n-1)/n} dA)^{n/(n-1)}` and `|S|` in `g = u^{4/(n-2)} δ`.
fn curvature_moment(u: &dyn ScalarField, s: &SurfaceSpec, rule: &SphereRule) -> Result<(f64, f64)> {
    let n = u.dim();
    let nf = n as f64;
    let pts = conformal_surface_data(u, s, rule, &DiffScheme::analytic())?;
    let q = 2.0 * (nf - 1.0) / nf;
    let terms: Vec<f64> = pts
        .iter()
        .map(|p| Ok(positive_power(p.mean_curvature, q, &p.x)? * p.weight))
        .collect::<Result<_>>()?;
    let area = pairwise_sum(&pts.iter().map(|p| p.weight).collect::<Vec<_>>());
    Ok(((pairwise_sum(&terms) / unit_sphere_measure(n)?).powf(nf / (nf - 1.0)), area))
}

/// One term of the approach sequence, `-(1/(2(n-1)²)) ((1/ω) ∫_S H^{2(n-1)/n} dA)^{n/(n-1)}`.
pub fn zas_sequence_value(u: &dyn ScalarField, s: &SurfaceSpec, rule: &SphereRule) -> Result<f64> {
    let n = u.dim() as f64;
    let (moment, _) = curvature_moment(u, s, rule)?;
    Ok(-moment / (2.0 * (n - 1.0).powi(2)))
}

/// Limit of [`zas_sequence_value`] over centered spheres of the given decreasing `radii`,
/// approaching the metric's excluded radius (the origin when there is none).
///
/// Extrapolation is polynomial in `r - r_sing`.
pub fn zas_mass_limit(g: &ConformalMetric, radii: &[f64], rule: &SphereRule) -> Result<f64> {
    let r_sing = g.excluded_radius().unwrap_or(0.0);
    if radii.len() < 2 {
        return Err(Error::Arity {
            expected: 2,
            got: radii.len(),
        });
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) || !(radii[radii.len() - 1] > r_sing) {
        return Err(Error::domain(format!("radii must decrease strictly towards {r_sing}")));
    }
    let n = g.dim();
    let samples: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            let s = SurfaceSpec::centered_sphere(n, r)?;
            Ok((1.0 / (r - r_sing), zas_sequence_value(g.factor(), &s, rule)?))
        })
        .collect::<Result<_>>()?;
    let ladder = ExtrapolationLadder::new(1.0, 1.0).with_max_order(radii.len() - 1);
    Ok(extrapolate_limit(&samples, &ladder)?.limit)
}

/// Quasi-local mass `½(|S|/ω)^{(n-2)/(n-1)} - (1/(2(n-1)²))((1/ω)∫_S H^{2(n-1)/n} dA)^{n/(n-1)}`.
///
/// Only conformally flat metrics are supported.
pub fn quasilocal_mass(g: &MetricInstance, s: &SurfaceSpec, rule: &SphereRule) -> Result<f64> {
    let MetricInstance::Conformal(c) = g else {
        return Err(Error::Unsupported("quasi-local mass is implemented for conformal metrics only".into()));
    };
    let n = c.dim();
    let (moment, area) = curvature_moment(c.factor(), s, rule)?;
    Ok(horizon_mass_term(area, n)? - moment / (2.0 * (n as f64 - 1.0).powi(2)))
}
