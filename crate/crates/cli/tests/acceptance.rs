//! One line per acceptance criterion; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use massgeom_cli::{run_suite, Registry, SuiteConfig, SuiteId, VerificationReport};
use massgeom_core::curvature::geodesic_acceleration;
use massgeom_core::mass::{
    adm_ladder, adm_mass, af_boundary_bound, asymptotic_fit, asymptotic_fit_graph, black_hole_mass, mass_conformal,
    mass_graph, penrose_report_graph, quasilocal_mass, shell_samples, zas_mass_limit, zas_regular_mass,
};
use massgeom_core::metrics::{
    embedding_profile_residual, inversion_pullback_residual, load_instance, parse_field, schwarzschild_conformal_factor,
    ConformalMetric, FieldRef, GraphMetric, MetricInstance, PiecewiseRadial, SurfaceSpec,
};
use massgeom_core::numerics::{extrapolate_limit, ExtrapolationLadder, SphereRule, StarHole, VolumeRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e(err: impl ToString) -> String {
    err.to_string()
}

fn conformal(u: FieldRef) -> MetricInstance {
    MetricInstance::Conformal(ConformalMetric::new(u).unwrap())
}

fn adm_recovery() -> Outcome {
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for n in 3..=5 {
        for m in [-1.0, 1.0, 2.0] {
            let start = Instant::now();
            let inst = load_instance(&format!(r#"{{"family": "schwarzschild", "n": {n}, "params": {{"m": {m}}}}}"#)).map_err(e)?;
            let g = inst.metric.unwrap();
            let b = adm_mass(&g, &adm_ladder(&g), &SphereRule::with_default_degree(n).map_err(e)?).map_err(e)?;
            slowest = slowest.max(start.elapsed().as_secs_f64());
            worst = worst.max((b.total - m).abs() / m.abs());
        }
    }
    ensure(worst < 1e-3 && slowest < 10.0, format!("max relative deviation {worst:.2e}, slowest instance {slowest:.2} s"))
}

fn report_value(r: &VerificationReport, check: &str) -> Result<f64, String> {
    r.checks
        .iter()
        .find(|c| c.check == check)
        .and_then(|c| c.value)
        .ok_or_else(|| format!("no value for {check}"))
}

fn lam_identity() -> Outcome {
    let cfg = SuiteConfig {
        suite: SuiteId::LamIdentity,
        seed: 7,
        ..Default::default()
    };
    let r = run_suite(SuiteId::LamIdentity, &cfg, &Registry::builtin().map_err(e)?);
    let analytic = report_value(&r, "analytic-residual")?;
    let fd = report_value(&r, "finite-difference-residual")?;
    ensure(
        analytic < 1e-8 && fd < 1e-4 && cfg.lam_fields == 200 && cfg.lam_points == 50,
        format!("200 fields × 50 points, n in {{3,4}}: analytic {analytic:.2e}, finite differences {fd:.2e}"),
    )
}

fn penrose_equality() -> Outcome {
    let f: FieldRef = Arc::new(parse_field("sqrt(8*(r-2))", 3).map_err(e)?);
    let gm = GraphMetric::new(f, vec![StarHole::ball(vec![0.0; 3], 2.0)]).map_err(e)?;
    let r = penrose_report_graph(&gm, &VolumeRule::standard(3).map_err(e)?).map_err(e)?;
    let gap = (r.m - r.m_bh).abs();
    ensure(
        gap < 1e-3 && (r.mass.boundary - 1.0).abs() <= 1e-3 && r.mass.volume.abs() < 1e-6,
        format!("|m - rhs| {gap:.2e}, boundary {:.9}, volume {:.2e}", r.mass.boundary, r.mass.volume),
    )
}

fn spread(masses: &[f64]) -> f64 {
    let lo = masses.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = masses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / lo.abs()
}

fn cross_oracle() -> Outcome {
    let rule = SphereRule::new(3, 8).map_err(e)?;
    let vrule = VolumeRule::standard(3).map_err(e)?;
    let f: FieldRef = Arc::new(parse_field("(1+r^2)^(1/4)", 3).map_err(e)?.with_decay(1.0));
    let g = MetricInstance::Graph(GraphMetric::new(f.clone(), Vec::new()).map_err(e)?);
    let graph = [
        adm_mass(&g, &adm_ladder(&g), &rule).map_err(e)?.total,
        mass_graph(f.as_ref(), &vrule).map_err(e)?.total,
        asymptotic_fit_graph(&shell_samples(f.as_ref(), &[50.0, 100.0], &rule).map_err(e)?, 3).map_err(e)?.mass,
    ];
    let inner = parse_field("1 + (3 - r^2)/4", 3).map_err(e)?;
    let outer = parse_field("1 + 1/(2*r)", 3).map_err(e)?;
    let u: FieldRef = Arc::new(PiecewiseRadial::new(inner, outer, 1.0).map_err(e)?);
    let g = conformal(u.clone());
    let capped = [
        adm_mass(&g, &adm_ladder(&g), &rule).map_err(e)?.total,
        mass_conformal(u.as_ref(), &vrule).map_err(e)?.total,
        asymptotic_fit(&shell_samples(u.as_ref(), &[50.0, 100.0], &rule).map_err(e)?, 3).map_err(e)?.mass,
    ];
    let (a, b) = (spread(&graph), spread(&capped));
    ensure(
        a < 5e-3 && b < 5e-3,
        format!("flux/volume/fit spread: quarter-power graph {a:.2e}, capped Schwarzschild {b:.2e}"),
    )
}

fn afi() -> Outcome {
    let mut worst = 0.0f64;
    for n in 3..=5 {
        let s = SurfaceSpec::centered_sphere(n, 1.7).map_err(e)?;
        let (lhs, rhs) = af_boundary_bound(&s, &SphereRule::with_default_degree(n).map_err(e)?).map_err(e)?;
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    let s = SurfaceSpec::ellipsoid(vec![0.0; 3], vec![2.0, 1.0, 1.0]).map_err(e)?;
    let (lhs, rhs) = af_boundary_bound(&s, &SphereRule::new(3, 80).map_err(e)?).map_err(e)?;
    ensure(
        worst < 1e-8 && lhs - rhs > 1e-3,
        format!("round spheres n=3..5 relative gap {worst:.2e}; ellipsoid (2,1,1) margin {:.4}", lhs - rhs),
    )
}

/// `±2^a |m|^b` with rational exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Monomial {
    sign: i64,
    two: (i64, i64),
    m: (i64, i64),
}

fn reduce((p, q): (i64, i64)) -> (i64, i64) {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(p, q).max(1) * q.signum();
    (p / g, q / g)
}

impl Monomial {
    fn mul(self, o: Monomial) -> Monomial {
        let add = |a: (i64, i64), b: (i64, i64)| reduce((a.0 * b.1 + b.0 * a.1, a.1 * b.1));
        Monomial {
            sign: self.sign * o.sign,
            two: add(self.two, o.two),
            m: add(self.m, o.m),
        }
    }

    fn pow(self, (p, q): (i64, i64)) -> Monomial {
        Monomial {
            sign: self.sign,
            two: reduce((self.two.0 * p, self.two.1 * q)),
            m: reduce((self.m.0 * p, self.m.1 * q)),
        }
    }
}

/// Regular mass of negative Schwarzschild, n = 3, in exact arithmetic: on `r = |m|/2` the
/// normal derivative of `1 - |m|/(2r)` is `2|m|^{-1}` and the averaged area is `2^{-2}|m|²`.
fn symbolic_regular_mass() -> Monomial {
    let mono = |sign, two, m| Monomial { sign, two, m };
    let avg = mono(1, (1, 1), (-1, 1)).pow((4, 3)).mul(mono(1, (-2, 1), (2, 1)));
    mono(-1, (1, 1), (0, 1)).mul(avg.pow((3, 2)))
}

fn zas_golden() -> Outcome {
    let exact = symbolic_regular_mass() == Monomial { sign: -1, two: (0, 1), m: (1, 1) };
    let rule = SphereRule::with_default_degree(3).map_err(e)?;
    let coarse = SphereRule::new(3, 6).map_err(e)?;
    let (mut quad, mut lim) = (0.0f64, 0.0f64);
    for m in [-1.0, -2.0] {
        let inst = load_instance(&format!(r#"{{"family": "schwarzschild", "n": 3, "params": {{"m": {m}}}}}"#)).map_err(e)?;
        quad = quad.max((zas_regular_mass(&inst.zas[0], &rule).map_err(e)? - m).abs());
        let rz = -m / 2.0;
        let g = ConformalMetric::new(Arc::new(schwarzschild_conformal_factor(m, 3).map_err(e)?))
            .map_err(e)?
            .with_excluded_radius(rz);
        let radii: Vec<f64> = (0..8).map(|k| rz * (1.0 + 0.5f64.powi(k))).collect();
        lim = lim.max((zas_mass_limit(&g, &radii, &coarse).map_err(e)? - m).abs());
    }
    let flat = zas_mass_limit(&ConformalMetric::flat(3).map_err(e)?, &[0.4, 0.2, 0.1, 0.05], &coarse).map_err(e)?;
    ensure(
        exact && quad < 1e-6 && lim < 1e-2 && flat.abs() < 1e-6,
        format!("symbolic exact: {exact}; quadrature {quad:.2e}; limit {lim:.2e}; flat limit {flat:.1e}"),
    )
}

fn quasilocal() -> Outcome {
    let inst = load_instance(r#"{"family": "schwarzschild", "n": 3, "params": {"m": 1}}"#).map_err(e)?;
    let geo = inst.schwarzschild.unwrap();
    let g = inst.metric.unwrap();
    let rule = SphereRule::new(3, 4).map_err(e)?;
    let mut worst = 0.0f64;
    for k in 0..20 {
        let big_r = 2.5 * 40f64.powf(k as f64 / 19.0);
        let s = SurfaceSpec::centered_sphere(3, geo.conformal_radius(big_r).map_err(e)?).map_err(e)?;
        worst = worst.max((quasilocal_mass(&g, &s, &rule).map_err(e)? - 1.0).abs());
    }
    let h = SurfaceSpec::centered_sphere(3, 0.5).map_err(e)?;
    let at_horizon = quasilocal_mass(&g, &h, &rule).map_err(e)?;
    let m_bh = black_hole_mass(&[16.0 * PI], 3).map_err(e)?;
    let hgap = (at_horizon - m_bh).abs();
    ensure(
        worst < 1e-6 && hgap < 1e-6,
        format!("20 spheres R in [2.5, 100]: max |M - m| {worst:.2e}; horizon |M - m_BH| {hgap:.2e}"),
    )
}

fn geodesic() -> Outcome {
    let mut worst = 0.0f64;
    for (k, n) in [(0.5, 3usize), (1.0, 4), (1.0, 5)] {
        let ladder = ExtrapolationLadder::new(4.0, n as f64 - 2.0);
        let samples: Vec<(f64, f64)> = ladder
            .abscissae()
            .into_iter()
            .map(|r| Ok((r, geodesic_acceleration(k, n, r)? * r.powi(n as i32 - 1))))
            .collect::<massgeom_core::Result<_>>()
            .map_err(e)?;
        let lim = extrapolate_limit(&samples, &ladder).map_err(e)?.limit;
        let expect = 2.0 * k * (n as f64 - 2.0);
        worst = worst.max((lim - expect).abs() / expect);
    }
    ensure(worst < 1e-2, format!("max relative deviation {worst:.2e}"))
}

fn embedding_inversion() -> Outcome {
    let mut emb = 0.0f64;
    for m in [1.0, -1.0] {
        for w in [4.5, 5.0, 6.0, 8.0, 12.0, 20.0] {
            emb = emb.max(embedding_profile_residual(m, 3, w).map_err(e)?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut inv = 0.0f64;
    for _ in 0..100 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        inv = inv.max(inversion_pullback_residual(1.0, 3, &x).map_err(e)?);
    }
    ensure(emb < 1e-8 && inv < 1e-9, format!("embedding residual {emb:.2e}; inversion residual {inv:.2e}"))
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let reg = Registry::builtin().map_err(e)?;
    let cfg = SuiteConfig {
        seed: 7,
        ..Default::default()
    };
    let a = run_suite(SuiteId::All, &cfg, &reg).to_json().map_err(e)?;
    let b = run_suite(SuiteId::All, &cfg, &reg).to_json().map_err(e)?;
    let each = start.elapsed().as_secs_f64() / 2.0;
    ensure(
        a == b && each < 300.0,
        format!("identical: {}, {} bytes, {each:.1} s per full run", a == b, a.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("adm-recovery", adm_recovery),
        ("lam-identity", lam_identity),
        ("graph-penrose-equality", penrose_equality),
        ("cross-oracle-mass", cross_oracle),
        ("afi", afi),
        ("zas-golden-values", zas_golden),
        ("quasilocal-constancy", quasilocal),
        ("geodesic-limit", geodesic),
        ("embedding-inversion", embedding_inversion),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (verdict, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {name:<24} {verdict}  {detail}", i + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
