use crate::error::{Error, Result};
use crate::metrics::MetricInstance;
use crate::numerics::{extrapolate_limit, integrate_sphere, DiffScheme, ExtrapolationLadder, SphereRule};

use super::{mass_normalization, MassBreakdown, MassMethod};

/// `(1/(2(n-1)ω)) ∮_{S_r} Σ (∂_i g_ij - ∂_j g_ii) ν_j dA` over the centered coordinate sphere.
pub fn adm_flux(g: &MetricInstance, r: f64, rule: &SphereRule, scheme: &DiffScheme) -> Result<f64> {
    let n = g.dim();
    let integral = integrate_sphere(
        |x| {
            let jet = g.metric_jet(x, scheme)?;
            let mut s = 0.0;
            for j in 0..n {
                let div: f64 = (0..n).map(|i| jet.dg[i][(i, j)]).sum();
                let tr: f64 = (0..n).map(|i| jet.dg[j][(i, i)]).sum();
                s += (div - tr) * x[j] / r;
            }
            Ok(s)
        },
        rule,
        None,
        r,
    )?;
    Ok(integral / mass_normalization(n)?)
}

/// Default ladder for `g`: radii from 8, decay exponent from the instance.
pub fn adm_ladder(g: &MetricInstance) -> ExtrapolationLadder {
    ExtrapolationLadder::new(8.0, g.decay())
}

/// ADM mass as the extrapolated limit of [`adm_flux`] along `ladder`.
///
/// A warning is attached when the flux differences fail to shrink along the ladder.
pub fn adm_mass(g: &MetricInstance, ladder: &ExtrapolationLadder, rule: &SphereRule) -> Result<MassBreakdown> {
    if rule.dim() != g.dim() {
        return Err(Error::domain("sphere rule dimension does not match the metric"));
    }
    let scheme = DiffScheme::analytic();
    let samples: Vec<(f64, f64)> = ladder
        .abscissae()
        .into_iter()
        .map(|r| Ok((r, adm_flux(g, r, rule, &scheme)?)))
        .collect::<Result<_>>()?;
    let ext = extrapolate_limit(&samples, ladder)?;
    let mut out = MassBreakdown::new(MassMethod::AdmFlux, 0.0, ext.limit, ext.error + 1e-13 * ext.limit.abs());
    let diffs: Vec<f64> = samples.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    if let [.., a, b] = diffs.as_slice() {
        if *b > *a && *b > 1e-12 * ext.limit.abs().max(1.0) {
            out.warnings
                .push(format!("flux differences grow along the ladder ({a:e} then {b:e}); the field may not decay"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{parse_field, schwarzschild_conformal_factor, ConformalMetric, FieldRef};
    use std::sync::Arc;

    fn conformal(u: FieldRef) -> MetricInstance {
        MetricInstance::Conformal(ConformalMetric::new(u).unwrap())
    }

    #[test]
    fn schwarzschild_flux_limit() {
        for (m, n) in [(2.0, 3), (-1.0, 4), (1.0, 5)] {
            let g = conformal(Arc::new(schwarzschild_conformal_factor(m, n).unwrap()));
            let rule = SphereRule::new(n, 4).unwrap();
            let b = adm_mass(&g, &adm_ladder(&g), &rule).unwrap();
            assert!((b.total - m).abs() < 1e-6 * m.abs(), "m={m} n={n}: {b:?}");
            assert!(b.warnings.is_empty());
        }
    }

    #[test]
    fn flat_flux_vanishes() {
        let g = MetricInstance::Conformal(ConformalMetric::flat(3).unwrap());
        let b = adm_mass(&g, &adm_ladder(&g), &SphereRule::new(3, 4).unwrap()).unwrap();
        assert_eq!(b.total, 0.0);
    }

    #[test]
    fn growing_field_warns() {
        let g = conformal(Arc::new(parse_field("1 + r/100", 3).unwrap()));
        let b = adm_mass(&g, &adm_ladder(&g), &SphereRule::new(3, 4).unwrap()).unwrap();
        assert!(!b.warnings.is_empty());
    }
}
