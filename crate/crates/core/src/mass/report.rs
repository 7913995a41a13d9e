use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curvature::conformal_surface_data;
use crate::error::{Error, Result};
use crate::metrics::{
    parse_field, ray_root, ConformalMetric, FieldRef, GraphMetric, MetricInstance, ScalarField, SurfaceSpec,
    ZasResolution,
};
use crate::numerics::{
    derivatives, dot, norm, pairwise_sum, DiffScheme, ExtrapolationLadder, SphereRule, VolumeRule,
    DEFAULT_SPHERE_DEGREE,
};

use super::{adm_ladder, adm_mass, black_hole_mass, horizon_mass_term, mass_graph_boundary, zas_regular_mass};
use super::MassBreakdown;

/// Default relative tolerance for inequality verdicts.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

/// One inequality `lhs ≥ rhs` with its verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Absolute tolerance used for both verdicts.
    pub tolerance: f64,
    pub holds: bool,
    pub equality: bool,
}

impl InequalityCheck {
    /// Judges `lhs ≥ rhs` with absolute tolerance `rel · max(1, |lhs|, |rhs|)`.
    pub fn judge(name: impl Into<String>, lhs: f64, rhs: f64, rel: f64) -> Self {
        let mut c = InequalityCheck {
            name: name.into(),
            lhs,
            rhs,
            tolerance: 0.0,
            holds: false,
            equality: false,
        };
        c.rejudge(rel);
        c
    }

    pub fn rejudge(&mut self, rel: f64) {
        self.tolerance = rel * 1f64.max(self.lhs.abs()).max(self.rhs.abs());
        self.holds = self.lhs - self.rhs >= -self.tolerance;
        self.equality = (self.lhs - self.rhs).abs() <= self.tolerance;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub n: usize,
    pub m: f64,
    pub m_error: f64,
    pub m_bh: f64,
    pub m_zas: f64,
    pub horizon_areas: Vec<f64>,
    /// `½(|Σ_i|/ω)^{(n-2)/(n-1)}` per horizon component.
    pub component_terms: Vec<f64>,
    pub zas_masses: Vec<f64>,
    pub mass: MassBreakdown,
    pub checks: Vec<InequalityCheck>,
    /// Set when some horizon is not certified minimal.
    pub approximate_horizon: bool,
    /// Outer-minimizing verdict; only decided for spherically symmetric instances.
    pub outerminimizing: Option<bool>,
    pub relative_tolerance: f64,
    pub equality_case: bool,
}

impl InequalityReport {
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Recomputes every verdict from the stored numbers.
    pub fn rejudge(&mut self, rel: f64) {
        self.relative_tolerance = rel;
        self.checks.iter_mut().for_each(|c| c.rejudge(rel));
        self.equality_case = !self.checks.is_empty() && self.checks.iter().all(|c| c.equality);
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn check(&self, name: &str) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Settings shared by the report builders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    /// ADM ladder; chosen from the instance and the surfaces when absent.
    pub ladder: Option<ExtrapolationLadder>,
    pub sphere_degree: usize,
    pub tolerance: f64,
    /// Horizons with `max |H| <` this are certified minimal.
    pub horizon_tolerance: f64,
}

impl Default for ReportSettings {
    fn default() -> Self {
        ReportSettings {
            ladder: None,
            sphere_degree: DEFAULT_SPHERE_DEGREE,
            tolerance: DEFAULT_TOLERANCE,
            horizon_tolerance: 1e-6,
        }
    }
}

fn is_radial(f: &dyn ScalarField, radii: &[f64], rule: &SphereRule) -> Result<bool> {
    for &r in radii {
        let vals: Vec<f64> = rule
            .iter()
            .map(|(t, _)| f.value(&t.iter().map(|t| r * t).collect::<Vec<_>>()))
            .collect::<Result<_>>()?;
        let v0 = vals[0];
        if vals.iter().any(|v| (v - v0).abs() > 1e-12 * v0.abs().max(1.0)) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn is_centered_sphere(s: &SurfaceSpec) -> Option<f64> {
    match s {
        SurfaceSpec::Sphere { center, radius } if center.iter().all(|c| *c == 0.0) => Some(*radius),
        _ => None,
    }
}

/// Graph Penrose report: `m` against the per-component sum and the total-area form.
pub fn penrose_report_graph(gm: &GraphMetric, rule: &VolumeRule) -> Result<InequalityReport> {
    let n = gm.dim();
    let mut areas = Vec::new();
    for s in gm.boundary()? {
        if !s.is_convex() {
            return Err(Error::Unsupported("boundary component is not convex".into()));
        }
        areas.push(s.area_flat(&rule.angular)?);
    }
    let b = mass_graph_boundary(gm, rule)?;
    let terms: Vec<f64> = areas.iter().map(|a| horizon_mass_term(*a, n)).collect::<Result<_>>()?;
    let m_bh = black_hole_mass(&areas, n)?;
    let outerminimizing = match gm.boundary()?.as_slice() {
        [s] => match is_centered_sphere(s) {
            // radial heights leave coordinate spheres with flat area ω r^{n-1}
            Some(rho) if is_radial(gm.height(), &[1.5 * rho, 3.0 * rho], &rule.angular)? => Some(true),
            _ => None,
        },
        _ => None,
    };
    let mut report = InequalityReport {
        id: String::new(),
        n,
        m: b.total,
        m_error: b.error,
        m_bh,
        m_zas: 0.0,
        horizon_areas: areas,
        checks: vec![
            InequalityCheck::judge("penrose-components", b.total, pairwise_sum(&terms), DEFAULT_TOLERANCE),
            InequalityCheck::judge("penrose-total-area", b.total, m_bh, DEFAULT_TOLERANCE),
        ],
        component_terms: terms,
        zas_masses: Vec::new(),
        mass: b,
        approximate_horizon: false,
        outerminimizing,
        relative_tolerance: DEFAULT_TOLERANCE,
        equality_case: false,
    };
    report.rejudge(DEFAULT_TOLERANCE);
    Ok(report)
}

fn surface_extent(s: &SurfaceSpec) -> f64 {
    norm(s.center())
        + match s {
            SurfaceSpec::Sphere { radius, .. } => *radius,
            SurfaceSpec::Ellipsoid { semi_axes, .. } => semi_axes.iter().copied().fold(0.0, f64::max),
            SurfaceSpec::LevelSet { bracket, .. } => bracket.1,
        }
}

/// `(area, certified minimal)` of a horizon candidate in `g`.
fn horizon_data(g: &MetricInstance, s: &SurfaceSpec, rule: &SphereRule, tol: f64) -> Result<(f64, bool)> {
    match g {
        MetricInstance::Conformal(c) => {
            let pts = conformal_surface_data(c.factor(), s, rule, &DiffScheme::analytic())?;
            let area = pairwise_sum(&pts.iter().map(|p| p.weight).collect::<Vec<_>>());
            let hmax = pts.iter().map(|p| p.mean_curvature.abs()).fold(0.0, f64::max);
            Ok((area, hmax < tol))
        }
        MetricInstance::Graph(gm) => {
            let boundary = s.as_hole().is_some_and(|h| gm.holes().iter().any(|k| *k == h));
            if boundary {
                return Ok((s.area_flat(rule)?, true));
            }
            // tangential gradient enlarges the area element: √(1 + |∇f|² - (∂_ν f)²)
            let terms: Vec<f64> = s
                .quadrature(rule)?
                .iter()
                .map(|p| {
                    let jet = derivatives(gm.height(), &p.x, 1, &DiffScheme::analytic())?;
                    let dn = dot(&jet.gradient, &p.normal);
                    Ok(p.weight * (1.0 + jet.grad_norm_sq() - dn * dn).max(1.0).sqrt())
                })
                .collect::<Result<_>>()?;
            Ok((pairwise_sum(&terms), false))
        }
    }
}

fn conformal_outerminimizing(c: &ConformalMetric, rho: f64, rule: &SphereRule) -> Result<Option<bool>> {
    let n = c.dim();
    let radii: Vec<f64> = (1..=64).map(|k| rho * 100f64.powf(k as f64 / 64.0)).collect();
    if !is_radial(c.factor(), &radii[..3], rule)? {
        return Ok(None);
    }
    let mut x = vec![0.0; n];
    let area_radius = |r: f64, x: &mut Vec<f64>| -> Result<f64> {
        x[n - 1] = r;
        Ok(c.positive_factor(x)?.powf(2.0 / (n as f64 - 2.0)) * r)
    };
    let mut prev = area_radius(rho, &mut x)?;
    for r in radii {
        let a = area_radius(r, &mut x)?;
        if !(a > prev) {
            return Ok(Some(false));
        }
        prev = a;
    }
    Ok(Some(true))
}

/// Combined black hole and zero area singularity report: `m ≥ m_BH + m_ZAS`.
pub fn combined_report(
    g: &MetricInstance,
    horizons: &[SurfaceSpec],
    zas: &[ZasResolution],
    settings: &ReportSettings,
) -> Result<InequalityReport> {
    let n = g.dim();
    let rule = SphereRule::new(n, settings.sphere_degree)?;
    let ladder = settings.ladder.unwrap_or_else(|| {
        let extent = horizons
            .iter()
            .chain(zas.iter().map(|z| &z.sigma))
            .map(surface_extent)
            .fold(1.0, f64::max);
        ExtrapolationLadder {
            r0: 8.0 * extent,
            ..adm_ladder(g)
        }
    });
    let b = adm_mass(g, &ladder, &rule)?;
    let mut areas = Vec::new();
    let mut approximate = false;
    for s in horizons {
        let (a, certified) = horizon_data(g, s, &rule, settings.horizon_tolerance)?;
        areas.push(a);
        approximate |= !certified;
    }
    let terms: Vec<f64> = areas.iter().map(|a| horizon_mass_term(*a, n)).collect::<Result<_>>()?;
    let m_bh = black_hole_mass(&areas, n)?;
    let zas_masses: Vec<f64> = zas.iter().map(|z| zas_regular_mass(z, &rule)).collect::<Result<_>>()?;
    let m_zas = pairwise_sum(&zas_masses);
    let outerminimizing = match (g, horizons) {
        (MetricInstance::Conformal(c), [s]) => match is_centered_sphere(s) {
            Some(rho) => conformal_outerminimizing(c, rho, &rule)?,
            None => None,
        },
        _ => None,
    };
    let mut report = InequalityReport {
        id: String::new(),
        n,
        m: b.total,
        m_error: b.error,
        m_bh,
        m_zas,
        horizon_areas: areas,
        component_terms: terms,
        zas_masses,
        checks: vec![InequalityCheck::judge("combined", b.total, m_bh + m_zas, settings.tolerance)],
        mass: b,
        approximate_horizon: approximate,
        outerminimizing,
        relative_tolerance: settings.tolerance,
        equality_case: false,
    };
    report.rejudge(settings.tolerance);
    Ok(report)
}

/// Coordinate sphere about `center` whose averaged mean curvature in `u^{4/(n-2)} δ` vanishes,
/// with radius searched in `bracket`.
pub fn locate_round_horizon(
    u: &dyn ScalarField,
    center: &[f64],
    bracket: (f64, f64),
    rule: &SphereRule,
) -> Result<SurfaceSpec> {
    let mean_h = |rho: f64| -> Result<f64> {
        let s = SurfaceSpec::sphere(center.to_vec(), rho)?;
        let pts = s.quadrature(rule)?;
        let flat: Vec<f64> = pts.iter().map(|p| p.weight).collect();
        let data = conformal_surface_data(u, &s, rule, &DiffScheme::analytic())?;
        let h: Vec<f64> = data.iter().zip(&flat).map(|(d, w)| d.mean_curvature * w).collect();
        Ok(pairwise_sum(&h) / pairwise_sum(&flat))
    };
    let rho = ray_root(mean_h, bracket)?;
    SurfaceSpec::sphere(center.to_vec(), rho)
}

/// Two-center conformal example with masses `+1` and `-1` at `(±d/2, 0, 0)`, n = 3.
#[derive(Debug, Clone)]
pub struct TwoCenterSetup {
    pub u: FieldRef,
    pub metric: MetricInstance,
    /// Approximate horizon: a round sphere about the positive center.
    pub horizon: SurfaceSpec,
    /// Resolution of the zero set of `u` about the negative center, with `φ̄ = u`.
    pub zas: ZasResolution,
}

pub fn two_center_setup(separation: f64) -> Result<TwoCenterSetup> {
    if !(separation >= 4.0) {
        return Err(Error::domain(format!("separation must be at least 4, got {separation}")));
    }
    let h = separation / 2.0;
    let src = format!(
        "1 + 1/(2*sqrt((x1 - {h:?})^2 + x2^2 + x3^2)) - 1/(2*sqrt((x1 + {h:?})^2 + x2^2 + x3^2))"
    );
    let u: FieldRef = Arc::new(parse_field(&src, 3)?.with_decay(1.0));
    let metric = MetricInstance::Conformal(ConformalMetric::new(u.clone())?);
    let rule = SphereRule::new(3, DEFAULT_SPHERE_DEGREE)?;
    let horizon = locate_round_horizon(u.as_ref(), &[h, 0.0, 0.0], (0.05, 0.45 * separation), &rule)?;
    let sigma = SurfaceSpec::LevelSet {
        field: u.clone(),
        level: 0.0,
        center: vec![-h, 0.0, 0.0],
        bracket: (1e-3, h),
    };
    let zas = ZasResolution::new(u.clone(), sigma)?;
    Ok(TwoCenterSetup {
        u,
        metric,
        horizon,
        zas,
    })
}
