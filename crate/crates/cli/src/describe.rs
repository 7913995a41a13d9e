use std::fmt::Write as _;

use massgeom_core::mass::{black_hole_mass, zas_regular_mass};
use massgeom_core::metrics::{Family, FieldSpec, Instance, MetricInstance, ScalarField};
use massgeom_core::numerics::{unit_sphere_measure, SphereRule};

use crate::error::CliResult;
use crate::registry::parse_instances;

/// Text summary of every instance in an instance file.
pub fn describe_file(path: &std::path::Path) -> CliResult<String> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::error::CliError::io(path, e))?;
    let instances = parse_instances(&path.display().to_string(), &text)?;
    let parts: Vec<String> = instances.iter().map(describe_instance).collect::<CliResult<_>>()?;
    Ok(parts.join("\n"))
}

pub fn describe_instance(inst: &Instance) -> CliResult<String> {
    let mut s = String::new();
    let f = &inst.file;
    let n = inst.n();
    let _ = writeln!(s, "id: {}", inst.id);
    let _ = writeln!(s, "family: {}", serde_json::to_value(f.family).unwrap().as_str().unwrap_or("?"));
    let _ = writeln!(s, "n: {n}");
    for (k, v) in &f.params {
        let _ = writeln!(s, "param {k} = {v}");
    }
    for (k, v) in &f.fields {
        match v {
            FieldSpec::Expr(e) => {
                let _ = writeln!(s, "field {k} = {e}");
            }
            FieldSpec::Piecewise { inner, outer, radius } => {
                let _ = writeln!(s, "field {k} = {inner} for r < {radius}, {outer} beyond");
            }
        }
    }
    for r in &f.excluded_regions {
        let _ = writeln!(s, "excluded {:?} center {:?} radii {:?}", r.shape, r.center, r.radii);
    }
    if let Some(p) = f.decay {
        let _ = writeln!(s, "decay: {p}");
    }

    if let Some(geo) = &inst.schwarzschild {
        let _ = writeln!(s, "mass: {}", geo.m);
        match geo.horizon {
            Some(h) => {
                let _ = writeln!(s, "horizon radius r0: {}", h.conformal_radius);
                let _ = writeln!(s, "horizon area A: {} (= {} π)", h.area, h.area / std::f64::consts::PI);
                let _ = writeln!(s, "horizon area radius: {}", h.area_radius);
                let _ = writeln!(s, "black hole mass: {}", black_hole_mass(&[h.area], n)?);
            }
            None => {
                let _ = writeln!(s, "horizon: none (area 0)");
            }
        }
        match geo.zas_radius {
            Some(rz) => {
                let _ = writeln!(s, "zas sphere radius: {rz}");
            }
            None => {
                let _ = writeln!(s, "zas sphere: none");
            }
        }
    } else if let Some(st) = &inst.spacetime {
        let _ = writeln!(s, "chart singularity radius: {}", st.chart_radius());
    } else if let Some(metric) = &inst.metric {
        match metric {
            MetricInstance::Conformal(c) => {
                if inst.family() == Family::Flat {
                    let _ = writeln!(s, "mass: 0");
                    let _ = writeln!(s, "horizon: none (area 0)");
                    let _ = writeln!(s, "zas sphere: none");
                } else if inst.zas.is_empty() {
                    match radial_zero(c.factor())? {
                        Some(r) => {
                            let _ = writeln!(s, "zas sphere radius: {r}");
                        }
                        None => {
                            let _ = writeln!(s, "zas sphere: none found");
                        }
                    }
                }
            }
            MetricInstance::Graph(g) => {
                let rule = SphereRule::new(n, 20)?;
                let omega = unit_sphere_measure(n)?;
                let mut areas = Vec::new();
                for (i, b) in g.boundary()?.iter().enumerate() {
                    let a = b.area_flat(&rule)?;
                    let _ = writeln!(s, "boundary {i} area: {a} (|Σ|/ω = {})", a / omega);
                    areas.push(a);
                }
                if !areas.is_empty() {
                    let _ = writeln!(s, "black hole mass (total area): {}", black_hole_mass(&areas, n)?);
                }
            }
        }
    }
    for (i, z) in inst.zas.iter().enumerate() {
        let m = zas_regular_mass(z, &SphereRule::new(n, 20)?)?;
        let _ = writeln!(s, "zas {i} regular mass: {m}");
    }
    for (k, v) in &f.expected {
        let _ = writeln!(s, "expected {k}: {v}");
    }
    Ok(s)
}

/// Radius where a radial field changes sign, if the field is radial and has one.
fn radial_zero(u: &dyn ScalarField) -> CliResult<Option<f64>> {
    let n = u.dim();
    let at = |r: f64, axis: usize| -> Option<f64> {
        let mut x = vec![0.0; n];
        x[axis] = r;
        u.value(&x).ok().filter(|v| v.is_finite())
    };
    let radial = (0..40).all(|k| {
        let r = 1e-3 * 1.4f64.powi(k);
        match (at(r, 0), at(r, n - 1)) {
            (Some(a), Some(b)) => (a - b).abs() <= 1e-12 * a.abs().max(1.0),
            _ => true,
        }
    });
    if !radial {
        return Ok(None);
    }
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..80 {
        let r = 1e-4 * 1.25f64.powi(k);
        let Some(v) = at(r, n - 1) else { continue };
        if v == 0.0 {
            return Ok(Some(r));
        }
        if let Some((r0, v0)) = prev {
            if v0.signum() != v.signum() {
                let (mut lo, mut hi, vlo) = (r0, r, v0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    match at(mid, n - 1) {
                        Some(vm) if vm.signum() == vlo.signum() => lo = mid,
                        Some(_) => hi = mid,
                        None => break,
                    }
                    if hi - lo <= 1e-15 * hi {
                        break;
                    }
                }
                return Ok(Some(0.5 * (lo + hi)));
            }
        }
        prev = Some((r, v));
    }
    Ok(None)
}
