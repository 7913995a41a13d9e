//! Verification suites. Each suite turns registry instances into independent tasks; tasks run
//! on the rayon pool and the report sorts their checks, so scheduling never shows in the output.

use massgeom_core::curvature::{geodesic_acceleration, lam_identity_residual};
use massgeom_core::mass::{
    adm_mass, af_boundary_bound, asymptotic_fit, asymptotic_fit_graph, black_hole_mass, combined_report,
    mass_conformal, mass_graph, mass_graph_boundary, penrose_report_graph, quasilocal_mass, shell_samples,
    two_center_setup, zas_mass_limit, zas_regular_mass, InequalityReport, MassBreakdown, ReportSettings,
};
use massgeom_core::metrics::{
    embedding_induced_metric_residual, embedding_profile_residual, EmbeddingProfile, inversion_pullback_residual, parse_field,
    polynomial_source, Family, Instance, MetricInstance, SurfaceSpec,
};
use massgeom_core::numerics::{extrapolate_limit, DiffScheme, ExtrapolationLadder, SphereRule, VolumeRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{SuiteConfig, SuiteId};
use crate::error::CliResult;
use crate::registry::Registry;
use crate::report::{CheckBuilder, CheckResult, Comparison, VerificationReport};

type Task<'a> = Box<dyn Fn() -> Vec<CheckResult> + Send + Sync + 'a>;

/// Runs `id` (every suite for `all`) over the registry.
pub fn run_suite(id: SuiteId, cfg: &SuiteConfig, reg: &Registry) -> VerificationReport {
    let ctx = Ctx { cfg, reg };
    let tasks: Vec<Task> = id.expand().into_iter().flat_map(|s| ctx.tasks(s)).collect();
    let checks: Vec<CheckResult> = tasks.par_iter().flat_map_iter(|t| t()).collect();
    let mut cfg = cfg.clone();
    cfg.suite = id;
    VerificationReport::assemble(id, cfg, checks)
}

/// Builds the registry named by the config (and the config directory) and runs the configured suite.
pub fn run(cfg: &SuiteConfig) -> CliResult<VerificationReport> {
    let reg = registry_for(cfg)?;
    Ok(run_suite(cfg.suite, cfg, &reg))
}

pub fn registry_for(cfg: &SuiteConfig) -> CliResult<Registry> {
    let mut dirs = cfg.instance_dirs.clone();
    if let Some(d) = crate::config::config_dir() {
        let inst = d.join("instances");
        if inst.is_dir() {
            dirs.push(inst);
        }
    }
    Registry::with_dirs(&dirs)
}

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    reg: &'a Registry,
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn schwarzschild_mass(inst: &Instance) -> Option<f64> {
    inst.schwarzschild.map(|g| g.m)
}

impl<'a> Ctx<'a> {
    fn tasks(&self, suite: SuiteId) -> Vec<Task<'a>> {
        match suite {
            SuiteId::Adm => self.adm(),
            SuiteId::LamIdentity => self.lam_identity(),
            SuiteId::ConformalMass => self.mass_chain(SuiteId::ConformalMass, Family::Conformal),
            SuiteId::GraphMass => self.mass_chain(SuiteId::GraphMass, Family::Graph),
            SuiteId::PenroseGraph => self.penrose_graph(),
            SuiteId::Afi => self.afi(),
            SuiteId::Zas => self.zas(),
            SuiteId::Quasilocal => self.quasilocal(),
            SuiteId::Geodesic => self.geodesic(),
            SuiteId::Embedding => self.embedding(),
            SuiteId::Inversion => self.inversion(),
            SuiteId::All => Vec::new(),
        }
    }

    fn instances(&self, pred: impl Fn(&Instance) -> bool) -> Vec<&'a Instance> {
        self.reg
            .instances()
            .iter()
            .filter(|i| self.cfg.dims.contains(&i.n()) && pred(i))
            .collect()
    }

    fn sphere_rule(&self, n: usize) -> massgeom_core::Result<SphereRule> {
        SphereRule::new(n, self.cfg.sphere_degree)
    }

    fn volume_rule(&self, n: usize) -> massgeom_core::Result<VolumeRule> {
        Ok(VolumeRule::new(self.sphere_rule(n)?, self.cfg.radial_order))
    }

    fn ladder(&self, r0: f64, decay: f64) -> ExtrapolationLadder {
        let l = &self.cfg.ladder;
        ExtrapolationLadder {
            r0: l.r0.unwrap_or(r0),
            ratio: l.ratio,
            count: l.count,
            decay,
            max_order: l.max_order,
        }
    }

    fn adm_check(&self, suite: SuiteId, inst: &Instance, g: &MetricInstance, expected: f64) -> CheckResult {
        let ladder = self.ladder(8.0, g.decay());
        let tol = self.cfg.tol("adm", 1e-3);
        let b = CheckResult::new(suite, &inst.id, "adm-mass")
            .method(format!(
                "adm_mass: flux on spheres r0={}·{}^k, k<{}, decay {}, order {}; sphere degree {}",
                ladder.r0, ladder.ratio, ladder.count, ladder.decay, ladder.max_order, self.cfg.sphere_degree
            ))
            .reference_source(reference_source(inst, "mass"));
        match self.sphere_rule(g.dim()).and_then(|rule| adm_mass(g, &ladder, &rule)) {
            Ok(m) => mass_check(b, &m, expected, tol),
            Err(e) => b.failed(Comparison::Relative, Some(expected), tol, e),
        }
    }

    fn adm(&self) -> Vec<Task<'a>> {
        self.instances(|i| i.metric.is_some() && i.expected("mass").is_some())
            .into_iter()
            .map(|inst| {
                let ctx = Ctx { ..*self };
                Box::new(move || {
                    let g = inst.metric.as_ref().unwrap();
                    vec![ctx.adm_check(SuiteId::Adm, inst, g, inst.expected("mass").unwrap())]
                }) as Task
            })
            .collect()
    }

    fn lam_identity(&self) -> Vec<Task<'a>> {
        let cfg = self.cfg;
        vec![Box::new(move || {
            let dims = &cfg.lam_dims;
            if dims.is_empty() || cfg.lam_fields == 0 {
                return Vec::new();
            }
            let per_field: Vec<massgeom_core::Result<(f64, f64)>> = (0..cfg.lam_fields)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(i as u64);
                    let n = dims[i % dims.len()];
                    let f = parse_field(&polynomial_source(n, 3, || rng.gen_range(-1.0..1.0)), n)?;
                    let mut worst = (0.0f64, 0.0f64);
                    for p in 0..cfg.lam_points {
                        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        worst.0 = worst.0.max(lam_identity_residual(&f, &x, &DiffScheme::analytic())?);
                        if p < cfg.lam_fd_points {
                            let fd = lam_identity_residual(&f, &x, &DiffScheme::finite_difference())?;
                            worst.1 = worst.1.max(fd);
                        }
                    }
                    Ok(worst)
                })
                .collect();
            let label = format!("random-cubics-n{}", join(dims));
            let method = |mode: &str, points: usize| {
                format!(
                    "max |div V - R| ({mode}) over {} seeded cubic fields × {points} points in [-1,1]^n",
                    cfg.lam_fields
                )
            };
            let analytic = CheckResult::new(SuiteId::LamIdentity, &label, "analytic-residual")
                .method(method("analytic", cfg.lam_points))
                .reference_source("identity: residual is 0");
            let fd = CheckResult::new(SuiteId::LamIdentity, &label, "finite-difference-residual")
                .method(method("finite differences", cfg.lam_points.min(cfg.lam_fd_points)))
                .reference_source("identity: residual is 0");
            let (ta, tf) = (cfg.tol("lam-analytic", 1e-8), cfg.tol("lam-fd", 1e-4));
            match per_field.into_iter().collect::<massgeom_core::Result<Vec<_>>>() {
                Ok(w) => {
                    let a = w.iter().map(|v| v.0).fold(0.0, f64::max);
                    let f = w.iter().map(|v| v.1).fold(0.0, f64::max);
                    let mut out = vec![analytic.compare(Comparison::Residual, a, Some(0.0), ta)];
                    if cfg.lam_fd_points > 0 {
                        out.push(fd.compare(Comparison::Residual, f, Some(0.0), tf));
                    }
                    out
                }
                Err(e) => vec![analytic.failed(Comparison::Residual, Some(0.0), ta, e)],
            }
        })]
    }

    /// Volume-integral and asymptotic-fit masses, plus the ADM flux when expected, and their spread.
    fn mass_chain(&self, suite: SuiteId, family: Family) -> Vec<Task<'a>> {
        self.instances(|i| {
            i.family() == family && (i.expected("volume_mass").is_some() || i.expected("fit_mass").is_some())
        })
        .into_iter()
        .map(|inst| {
            let ctx = Ctx { ..*self };
            Box::new(move || ctx.mass_chain_checks(suite, inst)) as Task
        })
        .collect()
    }

    fn mass_chain_checks(&self, suite: SuiteId, inst: &Instance) -> Vec<CheckResult> {
        let g = inst.metric.as_ref().unwrap();
        let n = inst.n();
        let mut out = Vec::new();
        let mut values = Vec::new();
        if let Some(m) = inst.expected("mass") {
            let c = self.adm_check(suite, inst, g, m);
            values.extend(c.value);
            out.push(c);
        }
        if let Some(m) = inst.expected("volume_mass") {
            let tol = self.cfg.tol("volume-mass", 5e-3);
            let (label, result) = match g {
                MetricInstance::Conformal(c) => (
                    "mass_conformal: volume integral of the scalar curvature",
                    self.volume_rule(n).and_then(|r| mass_conformal(c.factor(), &r)),
                ),
                MetricInstance::Graph(gm) if gm.holes().is_empty() => (
                    "mass_graph: volume integral of the graph scalar curvature",
                    self.volume_rule(n).and_then(|r| mass_graph(gm.height(), &r)),
                ),
                MetricInstance::Graph(gm) => (
                    "mass_graph_boundary: boundary mean curvature plus exterior volume integral",
                    self.volume_rule(n).and_then(|r| mass_graph_boundary(gm, &r)),
                ),
            };
            let b = CheckResult::new(suite, &inst.id, "volume-mass")
                .method(format!("{label}; sphere degree {}, radial order {}", self.cfg.sphere_degree, self.cfg.radial_order))
                .reference_source(reference_source(inst, "volume_mass"));
            match result {
                Ok(mb) => {
                    values.push(mb.total);
                    if let Some(t) = inst.expected("boundary_term") {
                        out.push(
                            CheckResult::new(suite, &inst.id, "boundary-term")
                                .method("mass_graph_boundary: boundary part")
                                .reference_source(reference_source(inst, "boundary_term"))
                                .compare(Comparison::Absolute, mb.boundary, Some(t), self.cfg.tol("boundary-term", 1e-3)),
                        );
                    }
                    if let Some(t) = inst.expected("volume_term") {
                        out.push(
                            CheckResult::new(suite, &inst.id, "volume-term")
                                .method("mass_graph_boundary: volume part")
                                .reference_source(reference_source(inst, "volume_term"))
                                .compare(Comparison::Absolute, mb.volume, Some(t), self.cfg.tol("volume-term", 1e-6)),
                        );
                    }
                    out.push(mass_check(b, &mb, m, tol));
                }
                Err(e) => out.push(b.failed(Comparison::Relative, Some(m), tol, e)),
            }
        }
        if let Some(m) = inst.expected("fit_mass") {
            let tol = self.cfg.tol("fit-mass", 5e-3);
            let b = CheckResult::new(suite, &inst.id, "fit-mass")
                .method(format!("least-squares asymptotic fit on shells {:?}", self.cfg.fit_radii))
                .reference_source(reference_source(inst, "fit_mass"));
            let result = self.sphere_rule(n).and_then(|rule| match g {
                MetricInstance::Conformal(c) => {
                    asymptotic_fit(&shell_samples(c.factor(), &self.cfg.fit_radii, &rule)?, n)
                }
                MetricInstance::Graph(gm) => {
                    asymptotic_fit_graph(&shell_samples(gm.height(), &self.cfg.fit_radii, &rule)?, n)
                }
            });
            match result {
                Ok(fit) => {
                    values.push(fit.mass);
                    let b = b.detail("residual_rms", fit.residual_rms).detail("condition", fit.condition);
                    out.push(mass_check(b, &fit.into(), m, tol));
                }
                Err(e) => out.push(b.failed(Comparison::Relative, Some(m), tol, e)),
            }
        }
        if values.len() >= 2 {
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let scale = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
            let spread = if scale > 0.0 { (hi - lo) / scale } else { hi - lo };
            out.push(
                CheckResult::new(suite, &inst.id, "cross-oracle-spread")
                    .method(format!("relative spread of {} independent mass computations", values.len()))
                    .reference_source("agreement of independent methods")
                    .compare(Comparison::Residual, spread, Some(0.0), self.cfg.tol("cross-oracle", 5e-3)),
            );
        }
        out
    }

    fn penrose_graph(&self) -> Vec<Task<'a>> {
        self.instances(|i| matches!(&i.metric, Some(MetricInstance::Graph(g)) if !g.holes().is_empty()))
            .into_iter()
            .map(|inst| {
                let ctx = Ctx { ..*self };
                Box::new(move || {
                    let Some(MetricInstance::Graph(gm)) = &inst.metric else { unreachable!() };
                    let b = || {
                        CheckResult::new(SuiteId::PenroseGraph, &inst.id, "penrose")
                            .method("penrose_report_graph: m against the horizon terms")
                            .reference_source("inequality holds")
                    };
                    let tol = ctx.cfg.tol("penrose", massgeom_core::mass::DEFAULT_TOLERANCE);
                    match ctx.volume_rule(inst.n()).and_then(|r| penrose_report_graph(gm, &r)) {
                        Ok(mut r) => {
                            r.rejudge(tol);
                            ctx.inequality_checks(SuiteId::PenroseGraph, inst, &r, b())
                        }
                        Err(e) => vec![b().failed(Comparison::Flag, Some(1.0), 0.0, e)],
                    }
                }) as Task
            })
            .collect()
    }

    /// Verdict, equality flag and `m_BH` checks shared by the Penrose and combined reports.
    fn inequality_checks(&self, suite: SuiteId, inst: &Instance, r: &InequalityReport, b: CheckBuilder) -> Vec<CheckResult> {
        let mut details = vec![
            ("m".to_string(), r.m),
            ("m_error".to_string(), r.m_error),
            ("m_bh".to_string(), r.m_bh),
            ("m_zas".to_string(), r.m_zas),
            ("approximate_horizon".to_string(), flag(r.approximate_horizon)),
        ];
        for c in &r.checks {
            details.push((format!("{}.lhs", c.name), c.lhs));
            details.push((format!("{}.rhs", c.name), c.rhs));
        }
        let mut out = vec![b.details(details).compare(Comparison::Flag, flag(r.all_hold()), Some(1.0), 0.0)];
        if let Some(eq) = inst.expected("equality") {
            out.push(
                CheckResult::new(suite, &inst.id, "equality-case")
                    .method(format!("all inequality sides agree within relative {}", r.relative_tolerance))
                    .reference_source(reference_source(inst, "equality"))
                    .compare(Comparison::Flag, flag(r.equality_case), Some(eq), 0.0),
            );
            if eq == 1.0 {
                out.push(
                    CheckResult::new(suite, &inst.id, "mass-minus-rhs")
                        .method("m - m_BH from the report")
                        .reference_source("equality case")
                        .compare(Comparison::Absolute, r.m - r.m_bh, Some(0.0), self.cfg.tol("penrose-equality", 1e-3)),
                );
            }
        }
        if let Some(m_bh) = inst.expected("m_bh") {
            out.push(
                CheckResult::new(suite, &inst.id, "black-hole-mass")
                    .method("black_hole_mass of the boundary areas")
                    .reference_source(reference_source(inst, "m_bh"))
                    .compare(Comparison::Relative, r.m_bh, Some(m_bh), self.cfg.tol("m-bh", 1e-9)),
            );
        }
        if let Some(om) = r.outerminimizing {
            out.push(
                CheckResult::new(suite, &inst.id, "outer-minimizing")
                    .method("area radius monotone outside the horizon")
                    .reference_source("radial symmetry")
                    .compare(Comparison::Flag, flag(om), Some(1.0), 0.0),
            );
        }
        out
    }

    fn afi(&self) -> Vec<Task<'a>> {
        let cfg = self.cfg;
        let mut tasks: Vec<Task<'a>> = Vec::new();
        for &n in &cfg.dims {
            tasks.push(Box::new(move || {
                let radius = 1.0 + ChaCha8Rng::seed_from_u64(cfg.seed ^ n as u64).gen_range(0.0..2.0);
                let tol = cfg.tol("afi-equality", 1e-8);
                let b = CheckResult::new(SuiteId::Afi, format!("round-sphere-n{n}"), "equality")
                    .method(format!("af_boundary_bound on a sphere of radius {radius:.6}, degree {}", cfg.sphere_degree))
                    .reference_source("equality on round spheres");
                let s = SurfaceSpec::centered_sphere(n, radius);
                match s.and_then(|s| af_boundary_bound(&s, &SphereRule::new(n, cfg.sphere_degree)?)) {
                    Ok((lhs, rhs)) => vec![b.compare(Comparison::Relative, lhs, Some(rhs), tol)],
                    Err(e) => vec![b.failed(Comparison::Relative, None, tol, e)],
                }
            }));
        }
        if cfg.dims.contains(&3) {
            tasks.push(Box::new(move || {
                let tol = cfg.tol("afi-margin", 1e-3);
                let b = CheckResult::new(SuiteId::Afi, "ellipsoid-2-1-1", "strict-margin")
                    .method(format!("af_boundary_bound, degree {}", cfg.afi_degree))
                    .reference_source("strict inequality off round spheres");
                let s = SurfaceSpec::ellipsoid(vec![0.0; 3], vec![2.0, 1.0, 1.0]);
                match s.and_then(|s| af_boundary_bound(&s, &SphereRule::new(3, cfg.afi_degree)?)) {
                    Ok((lhs, rhs)) => vec![b.compare(Comparison::Margin, lhs, Some(rhs), tol)],
                    Err(e) => vec![b.failed(Comparison::Margin, None, tol, e)],
                }
            }));
        }
        let small: Vec<usize> = cfg.dims.iter().copied().filter(|n| *n <= 4).collect();
        if !small.is_empty() {
            for i in 0..cfg.afi_ellipsoids {
                let small = small.clone();
                tasks.push(Box::new(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(1000 + i as u64);
                    let n = small[i % small.len()];
                    let axes: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
                    let degree = 2 * cfg.sphere_degree;
                    let tol = cfg.tol("afi-bound", 1e-6);
                    let b = CheckResult::new(SuiteId::Afi, format!("random-ellipsoid-{i:02}-n{n}"), "bound")
                        .method(format!("af_boundary_bound, semi-axes {axes:.4?}, degree {degree}"))
                        .reference_source("lhs >= rhs for convex surfaces");
                    let s = SurfaceSpec::ellipsoid(vec![0.0; n], axes.clone());
                    match s.and_then(|s| af_boundary_bound(&s, &SphereRule::new(n, degree)?)) {
                        Ok((lhs, rhs)) => vec![b.compare(Comparison::AtLeast, lhs, Some(rhs), tol)],
                        Err(e) => vec![b.failed(Comparison::AtLeast, None, tol, e)],
                    }
                }));
            }
        }
        tasks
    }

    fn zas(&self) -> Vec<Task<'a>> {
        let mut tasks: Vec<Task<'a>> = Vec::new();
        for inst in self.instances(|i| !i.zas.is_empty() && i.expected("zas_mass").is_some()) {
            let ctx = Ctx { ..*self };
            tasks.push(Box::new(move || {
                let m = inst.expected("zas_mass").unwrap();
                let tol = ctx.cfg.tol("zas-regular", 1e-6);
                let b = CheckResult::new(SuiteId::Zas, &inst.id, "regular-mass")
                    .method(format!("zas_regular_mass, sphere degree {}", ctx.cfg.sphere_degree))
                    .reference_source(reference_source(inst, "zas_mass"));
                match ctx.sphere_rule(inst.n()).and_then(|r| zas_regular_mass(&inst.zas[0], &r)) {
                    Ok(v) => vec![b.compare(Comparison::Absolute, v, Some(m), tol)],
                    Err(e) => vec![b.failed(Comparison::Absolute, Some(m), tol, e)],
                }
            }));
        }
        for inst in self.instances(|i| matches!(i.metric, Some(MetricInstance::Conformal(_))) && i.expected("zas_limit").is_some()) {
            let ctx = Ctx { ..*self };
            tasks.push(Box::new(move || {
                let Some(MetricInstance::Conformal(g)) = &inst.metric else { unreachable!() };
                let m = inst.expected("zas_limit").unwrap();
                let radii: Vec<f64> = match g.excluded_radius() {
                    Some(rz) => (0..8).map(|k| rz * (1.0 + 0.5f64.powi(k))).collect(),
                    None => (0..4).map(|k| 0.4 * 0.5f64.powi(k)).collect(),
                };
                let tol = ctx.cfg.tol("zas-limit", 1e-2);
                let b = CheckResult::new(SuiteId::Zas, &inst.id, "mass-limit")
                    .method(format!("zas_mass_limit on {} shrinking spheres", radii.len()))
                    .reference_source(reference_source(inst, "zas_limit"));
                match SphereRule::new(inst.n(), 6).and_then(|r| zas_mass_limit(g, &radii, &r)) {
                    Ok(v) => vec![b.compare(Comparison::Absolute, v, Some(m), tol)],
                    Err(e) => vec![b.failed(Comparison::Absolute, Some(m), tol, e)],
                }
            }));
        }
        let settings = ReportSettings {
            sphere_degree: self.cfg.sphere_degree,
            tolerance: self.cfg.tol("combined", massgeom_core::mass::DEFAULT_TOLERANCE),
            ..Default::default()
        };
        for inst in self.instances(|i| i.family() == Family::Schwarzschild && schwarzschild_mass(i) != Some(0.0)) {
            let ctx = Ctx { ..*self };
            let settings = settings.clone();
            tasks.push(Box::new(move || {
                let g = inst.metric.as_ref().unwrap();
                let horizons: Vec<SurfaceSpec> = inst
                    .schwarzschild
                    .and_then(|s| s.horizon)
                    .map(|h| SurfaceSpec::centered_sphere(inst.n(), h.conformal_radius))
                    .transpose()
                    .unwrap_or_default()
                    .into_iter()
                    .collect();
                let b = || {
                    CheckResult::new(SuiteId::Zas, &inst.id, "combined")
                        .method("combined_report: m >= m_BH + m_ZAS")
                        .reference_source("inequality holds")
                };
                match combined_report(g, &horizons, &inst.zas, &settings) {
                    Ok(r) => {
                        let mut out = ctx.inequality_checks(SuiteId::Zas, inst, &r, b());
                        out.push(
                            CheckResult::new(SuiteId::Zas, &inst.id, "combined-equality")
                                .method("combined_report equality verdict")
                                .reference_source("Schwarzschild is the equality case")
                                .compare(Comparison::Flag, flag(r.equality_case), Some(1.0), 0.0),
                        );
                        out
                    }
                    Err(e) => vec![b().failed(Comparison::Flag, Some(1.0), 0.0, e)],
                }
            }));
        }
        if self.cfg.dims.contains(&3) && !self.cfg.two_center_separations.is_empty() {
            let cfg = self.cfg;
            let settings = settings.clone();
            tasks.push(Box::new(move || two_center_checks(cfg, &settings)));
        }
        tasks
    }

    fn quasilocal(&self) -> Vec<Task<'a>> {
        self.instances(|i| i.family() == Family::Schwarzschild && schwarzschild_mass(i).is_some_and(|m| m > 0.0))
            .into_iter()
            .map(|inst| {
                let ctx = Ctx { ..*self };
                Box::new(move || {
                    let geo = inst.schwarzschild.unwrap();
                    let h = geo.horizon.unwrap();
                    let g = inst.metric.as_ref().unwrap();
                    let n = inst.n();
                    let tol = ctx.cfg.tol("quasilocal", 1e-6);
                    let b = CheckResult::new(SuiteId::Quasilocal, &inst.id, "foliation-constancy")
                        .method("quasilocal_mass on 20 coordinate spheres, area radius 1.25..50 × horizon")
                        .reference_source("closed form m");
                    let worst = (|| -> massgeom_core::Result<f64> {
                        let rule = SphereRule::new(n, 4)?;
                        let mut worst = 0.0f64;
                        for k in 0..20 {
                            let big_r = 1.25 * h.area_radius * 40f64.powf(k as f64 / 19.0);
                            let s = SurfaceSpec::centered_sphere(n, geo.conformal_radius(big_r)?)?;
                            worst = worst.max((quasilocal_mass(g, &s, &rule)? - geo.m).abs());
                        }
                        Ok(worst)
                    })();
                    let mut out = vec![match worst {
                        Ok(w) => b.compare(Comparison::Residual, w, Some(0.0), tol),
                        Err(e) => b.failed(Comparison::Residual, Some(0.0), tol, e),
                    }];
                    let hb = CheckResult::new(SuiteId::Quasilocal, &inst.id, "horizon-value")
                        .method("quasilocal_mass on the minimal sphere")
                        .reference_source("black_hole_mass of the closed-form horizon area");
                    let at_horizon = (|| -> massgeom_core::Result<(f64, f64)> {
                        let s = SurfaceSpec::centered_sphere(n, h.conformal_radius)?;
                        Ok((quasilocal_mass(g, &s, &SphereRule::new(n, 4)?)?, black_hole_mass(&[h.area], n)?))
                    })();
                    out.push(match at_horizon {
                        Ok((q, m_bh)) => hb.compare(Comparison::Absolute, q, Some(m_bh), tol),
                        Err(e) => hb.failed(Comparison::Absolute, None, tol, e),
                    });
                    out
                }) as Task
            })
            .collect()
    }

    fn geodesic(&self) -> Vec<Task<'a>> {
        self.instances(|i| i.spacetime.is_some() && i.expected("acceleration_limit").is_some())
            .into_iter()
            .map(|inst| {
                let ctx = Ctx { ..*self };
                Box::new(move || {
                    let st = inst.spacetime.as_ref().unwrap();
                    let n = inst.n();
                    let k = inst.file.params["k"];
                    let expect = inst.expected("acceleration_limit").unwrap();
                    let ladder = ExtrapolationLadder::new(4.0 * st.chart_radius().max(1.0), n as f64 - 2.0);
                    let tol = ctx.cfg.tol("geodesic", 1e-2);
                    let b = CheckResult::new(SuiteId::Geodesic, &inst.id, "acceleration-limit")
                        .method(format!(
                            "extrapolated a(r)·r^(n-1) on r0={}·2^j, j<{}",
                            ladder.r0, ladder.count
                        ))
                        .reference_source(reference_source(inst, "acceleration_limit"));
                    let samples: massgeom_core::Result<Vec<(f64, f64)>> = ladder
                        .abscissae()
                        .into_iter()
                        .map(|r| Ok((r, geodesic_acceleration(k, n, r)? * r.powi(n as i32 - 1))))
                        .collect();
                    match samples.and_then(|s| extrapolate_limit(&s, &ladder)) {
                        Ok(e) => vec![b.detail("error", e.error).compare(Comparison::Relative, e.limit, Some(expect), tol)],
                        Err(e) => vec![b.failed(Comparison::Relative, Some(expect), tol, e)],
                    }
                }) as Task
            })
            .collect()
    }

    fn embedding(&self) -> Vec<Task<'a>> {
        self.instances(|i| i.family() == Family::Schwarzschild && schwarzschild_mass(i).is_some_and(|m| m != 0.0))
            .into_iter()
            .map(|inst| {
                let ctx = Ctx { ..*self };
                Box::new(move || {
                    let geo = inst.schwarzschild.unwrap();
                    let (m, n) = (geo.m, inst.n());
                    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed ^ 0x5eed);
                    let scale = (2.0 * m.abs()).powf(1.0 / (n as f64 - 2.0));
                    let profile = EmbeddingProfile::new(m, n);
                    let ws: massgeom_core::Result<Vec<f64>> = (0..8)
                        .map(|_| {
                            let big_r = scale * rng.gen_range(1.1..3.0);
                            profile.as_ref().map_err(Clone::clone)?.height(big_r)
                        })
                        .collect();
                    let form = if n == 3 { "closed-form" } else { "numeric" };
                    let tol = ctx.cfg.tol("embedding", 1e-8);
                    let b = CheckResult::new(SuiteId::Embedding, &inst.id, "profile-residual")
                        .method(format!("max embedding_profile_residual at 8 seeded area radii in [1.1, 3] × (2|m|)^(1/(n-2)), {form} profile"))
                        .reference_source("profile equation: residual is 0");
                    let worst = ws.and_then(|ws| {
                        ws.iter()
                            .map(|w| embedding_profile_residual(m, n, *w))
                            .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
                    });
                    let mut out = vec![match worst {
                        Ok(w) => b.compare(Comparison::Residual, w, Some(0.0), tol),
                        Err(e) => b.failed(Comparison::Residual, Some(0.0), tol, e),
                    }];
                    let base = geo.horizon.map(|h| h.conformal_radius).or(geo.zas_radius).unwrap();
                    let tol = ctx.cfg.tol("induced-metric", 1e-6);
                    let b = CheckResult::new(SuiteId::Embedding, &inst.id, "induced-metric")
                        .method("relative g_rr mismatch of the revolution hypersurface at r = 1.5, 3, 10 × base radius")
                        .reference_source("Schwarzschild metric");
                    let worst = [1.5, 3.0, 10.0]
                        .iter()
                        .map(|f| embedding_induced_metric_residual(m, n, f * base))
                        .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)));
                    out.push(match worst {
                        Ok(w) => b.compare(Comparison::Residual, w, Some(0.0), tol),
                        Err(e) => b.failed(Comparison::Residual, Some(0.0), tol, e),
                    });
                    out
                }) as Task
            })
            .collect()
    }

    fn inversion(&self) -> Vec<Task<'a>> {
        self.instances(|i| i.family() == Family::Schwarzschild && schwarzschild_mass(i).is_some_and(|m| m > 0.0))
            .into_iter()
            .map(|inst| {
                let ctx = Ctx { ..*self };
                Box::new(move || {
                    let geo = inst.schwarzschild.unwrap();
                    let (m, n) = (geo.m, inst.n());
                    let r0 = geo.horizon.unwrap().conformal_radius;
                    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed ^ 0x1a7e);
                    let count = ctx.cfg.inversion_points;
                    let tol = ctx.cfg.tol("inversion", 1e-9);
                    let b = CheckResult::new(SuiteId::Inversion, &inst.id, "pullback-residual")
                        .method(format!("max inversion_pullback_residual over {count} seeded points, |x| in [r0/4, 4 r0]"))
                        .reference_source("isometry: residual is 0");
                    let mut worst: massgeom_core::Result<f64> = Ok(0.0);
                    for _ in 0..count {
                        let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
                        let r = r0 * 4f64.powf(rng.gen_range(-1.0..1.0));
                        let x: Vec<f64> = dir.iter().map(|v| v * r / len).collect();
                        worst = worst.and_then(|w| Ok(w.max(inversion_pullback_residual(m, n, &x)?)));
                    }
                    vec![match worst {
                        Ok(w) => b.compare(Comparison::Residual, w, Some(0.0), tol),
                        Err(e) => b.failed(Comparison::Residual, Some(0.0), tol, e),
                    }]
                }) as Task
            })
            .collect()
    }
}

fn two_center_checks(cfg: &SuiteConfig, settings: &ReportSettings) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut gaps = Vec::new();
    for &d in &cfg.two_center_separations {
        let id = format!("two-center-d{d}");
        let b = CheckResult::new(SuiteId::Zas, &id, "combined")
            .method("combined_report with an approximate horizon and a level-set singularity")
            .reference_source("inequality holds");
        match two_center_setup(d).and_then(|s| combined_report(&s.metric, &[s.horizon], &[s.zas], settings)) {
            Ok(r) => {
                let gap = r.m - r.m_bh - r.m_zas;
                gaps.push(gap);
                let b = b
                    .detail("m", r.m)
                    .detail("m_bh", r.m_bh)
                    .detail("m_zas", r.m_zas)
                    .detail("gap", gap)
                    .detail("approximate_horizon", flag(r.approximate_horizon));
                out.push(b.compare(Comparison::Flag, flag(r.all_hold()), Some(1.0), 0.0));
            }
            Err(e) => out.push(b.failed(Comparison::Flag, Some(1.0), 0.0, e)),
        }
    }
    if gaps.len() == cfg.two_center_separations.len() && gaps.len() >= 2 {
        let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);
        out.push(
            CheckResult::new(SuiteId::Zas, "two-center", "gap-shrinks")
                .method(format!("m - m_BH - m_ZAS at separations {:?}", cfg.two_center_separations))
                .reference_source("near-equality as the centers separate")
                .details(gaps.iter().enumerate().map(|(i, g)| (format!("gap{i}"), *g)))
                .compare(Comparison::Flag, flag(shrinking), Some(1.0), 0.0),
        );
    }
    out
}

fn mass_check(b: CheckBuilder, m: &MassBreakdown, expected: f64, tol: f64) -> CheckResult {
    b.detail("error_estimate", m.error)
        .detail("boundary", m.boundary)
        .detail("volume", m.volume)
        .detail("warnings", m.warnings.len() as f64)
        .compare(Comparison::Relative, m.total, Some(expected), tol)
}

fn reference_source(inst: &Instance, key: &str) -> String {
    match inst.family() {
        Family::Schwarzschild | Family::Flat => format!("closed form ({key})"),
        _ => format!("instance expected.{key}"),
    }
}

fn join(dims: &[usize]) -> String {
    dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("-")
}
