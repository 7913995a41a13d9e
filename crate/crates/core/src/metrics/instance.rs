//! Metric instance files.
//!
//! ```json
//! {
//!   "id": "schwarzschild-m1-n3",
//!   "family": "schwarzschild",
//!   "n": 3,
//!   "params": { "m": 1.0 },
//!   "fields": {},
//!   "excluded_regions": [],
//!   "expected": { "mass": 1.0 }
//! }
//! ```
//!
//! Families and what they read:
//!
//! | family          | params | fields                                   | excluded_regions           |
//! |-----------------|--------|------------------------------------------|----------------------------|
//! | `flat`          |        |                                          |                            |
//! | `schwarzschild` | `m`    |                                          |                            |
//! | `conformal`     |        | `u`                                      | optional ball about 0      |
//! | `graph`         |        | `f`                                      | disjoint balls/ellipsoids  |
//! | `spacetime`     | `k`    |                                          |                            |
//! | `zas`           |        | `phi`, optional `psi`                    | exactly one: the surface Σ |
//!
//! A field is an expression string, or `{"inner": .., "outer": .., "radius": ..}` for a
//! radial splice. `decay` optionally declares the decay exponent of the main field.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::StarHole;

use super::expr::{parse_field, ExprField};
use super::field::{FieldRef, PiecewiseRadial, SingularSet};
use super::metric::{ConformalMetric, GraphMetric, MetricInstance, ZasResolution};
use super::schwarzschild::{schwarzschild_conformal_factor, schwarzschild_geometry, SchwarzschildInstance};
use super::spacetime::SpacetimeInstance;
use super::surface::SurfaceSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Flat,
    Schwarzschild,
    Conformal,
    Graph,
    Spacetime,
    Zas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Expr(String),
    Piecewise { inner: String, outer: String, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Ball,
    Sphere,
    Ellipsoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub shape: Shape,
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
}

/// The on-disk form of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default)]
    pub id: Option<String>,
    pub family: Family,
    pub n: usize,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub fields: BTreeMap<String, FieldSpec>,
    #[serde(default)]
    pub excluded_regions: Vec<RegionSpec>,
    #[serde(default)]
    pub decay: Option<f64>,
    #[serde(default)]
    pub expected: BTreeMap<String, f64>,
}

/// A validated instance with its constructed geometry.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub file: InstanceFile,
    pub metric: Option<MetricInstance>,
    pub schwarzschild: Option<SchwarzschildInstance>,
    pub spacetime: Option<SpacetimeInstance>,
    pub zas: Vec<ZasResolution>,
}

impl Instance {
    pub fn family(&self) -> Family {
        self.file.family
    }

    pub fn n(&self) -> usize {
        self.file.n
    }

    pub fn expected(&self, key: &str) -> Option<f64> {
        self.file.expected.get(key).copied()
    }
}

/// Parses and validates an instance document. Errors carry the offending field path.
pub fn load_instance(text: &str) -> Result<Instance> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(if path == "." { String::new() } else { path }, e.inner().to_string())
    })?;
    build_instance(file)
}

pub fn build_instance(file: InstanceFile) -> Result<Instance> {
    let n = file.n;
    if !(3..=8).contains(&n) {
        return Err(Error::schema("n", format!("dimension must be in 3..=8, got {n}")));
    }
    for (i, r) in file.excluded_regions.iter().enumerate() {
        check_region(r, n, i)?;
    }
    let id = file.id.clone().unwrap_or_else(|| format!("{:?}-n{n}", file.family).to_lowercase());
    let mut inst = Instance {
        id,
        file: file.clone(),
        metric: None,
        schwarzschild: None,
        spacetime: None,
        zas: Vec::new(),
    };

    match file.family {
        Family::Flat => {
            inst.metric = Some(MetricInstance::Conformal(ConformalMetric::flat(n)?));
        }
        Family::Schwarzschild => {
            let m = param(&file, "m")?;
            let u = schwarzschild_conformal_factor(m, n).map_err(|e| Error::schema("params.m", e.to_string()))?;
            let geo = schwarzschild_geometry(m, n)?;
            let u: FieldRef = Arc::new(u);
            let mut cm = ConformalMetric::new(u.clone())?;
            if let Some(rz) = geo.zas_radius {
                cm = cm.with_excluded_radius(rz);
                let sigma = SurfaceSpec::centered_sphere(n, rz)?;
                inst.zas.push(ZasResolution::new(u, sigma)?);
            }
            inst.metric = Some(MetricInstance::Conformal(cm));
            inst.schwarzschild = Some(geo);
        }
        Family::Conformal => {
            let u = field(&file, "u", &[])?;
            let mut cm = ConformalMetric::new(u)?;
            match file.excluded_regions.as_slice() {
                [] => {}
                [r] if r.shape != Shape::Ellipsoid && r.center.iter().all(|c| *c == 0.0) => {
                    cm = cm.with_excluded_radius(r.radii[0]);
                }
                _ => {
                    return Err(Error::schema(
                        "excluded_regions",
                        "conformal instances allow at most one ball centered at the origin",
                    ))
                }
            }
            inst.metric = Some(MetricInstance::Conformal(cm));
        }
        Family::Graph => {
            let holes: Vec<StarHole> = file.excluded_regions.iter().map(region_hole).collect();
            let sets: Vec<SingularSet> = holes.iter().cloned().map(SingularSet::Boundary).collect();
            let f = field(&file, "f", &sets)?;
            let gm = GraphMetric::new(f, holes).map_err(|e| Error::schema("excluded_regions", e.to_string()))?;
            inst.metric = Some(MetricInstance::Graph(gm));
        }
        Family::Spacetime => {
            let k = param(&file, "k")?;
            inst.spacetime = Some(SpacetimeInstance::new(k, n)?);
        }
        Family::Zas => {
            let [region] = file.excluded_regions.as_slice() else {
                return Err(Error::schema(
                    "excluded_regions",
                    "zas instances need exactly one region describing the singular surface",
                ));
            };
            let sigma = SurfaceSpec::from_hole(&region_hole(region))?;
            let phi = field(&file, "phi", &[])?;
            let mut res = ZasResolution::new(phi.clone(), sigma)?;
            let u: FieldRef = match file.fields.get("psi") {
                Some(FieldSpec::Expr(psi)) => {
                    let psi_field: FieldRef = Arc::new(parse_at(psi, n, "fields.psi")?);
                    res = res.with_background(psi_field)?;
                    let FieldSpec::Expr(phi_src) = &file.fields["phi"] else {
                        return Err(Error::schema("fields.phi", "must be an expression when psi is given"));
                    };
                    let product = parse_at(&format!("({phi_src})*({psi})"), n, "fields")?;
                    Arc::new(match file.decay {
                        Some(p) => product.with_decay(p),
                        None => product,
                    })
                }
                Some(_) => return Err(Error::schema("fields.psi", "must be an expression")),
                None => phi,
            };
            inst.metric = Some(MetricInstance::Conformal(ConformalMetric::new(u)?));
            inst.zas.push(res);
        }
    }
    Ok(inst)
}

fn param(file: &InstanceFile, name: &str) -> Result<f64> {
    let v = file
        .params
        .get(name)
        .copied()
        .ok_or_else(|| Error::schema(format!("params.{name}"), "missing required parameter"))?;
    if !v.is_finite() {
        return Err(Error::schema(format!("params.{name}"), "must be finite"));
    }
    Ok(v)
}

fn parse_at(src: &str, n: usize, path: &str) -> Result<ExprField> {
    parse_field(src, n).map_err(|e| Error::schema(path, e.to_string()))
}

fn field(file: &InstanceFile, name: &str, sets: &[SingularSet]) -> Result<FieldRef> {
    let path = format!("fields.{name}");
    let spec = file
        .fields
        .get(name)
        .ok_or_else(|| Error::schema(&path, "missing required field"))?;
    let decorate = |mut f: ExprField| {
        for s in sets {
            f = f.with_singular_set(s.clone());
        }
        if let Some(p) = file.decay {
            f = f.with_decay(p);
        }
        f
    };
    Ok(match spec {
        FieldSpec::Expr(src) => Arc::new(decorate(parse_at(src, file.n, &path)?)),
        FieldSpec::Piecewise { inner, outer, radius } => {
            let inner = parse_at(inner, file.n, &format!("{path}.inner"))?;
            let outer = decorate(parse_at(outer, file.n, &format!("{path}.outer"))?);
            Arc::new(PiecewiseRadial::new(inner, outer, *radius).map_err(|e| Error::schema(&path, e.to_string()))?)
        }
    })
}

fn check_region(r: &RegionSpec, n: usize, i: usize) -> Result<()> {
    let at = |f: &str| format!("excluded_regions[{i}].{f}");
    if r.center.len() != n {
        return Err(Error::schema(at("center"), format!("expected {n} coordinates, got {}", r.center.len())));
    }
    let want = match r.shape {
        Shape::Ball | Shape::Sphere => 1,
        Shape::Ellipsoid => n,
    };
    if r.radii.len() != want {
        return Err(Error::schema(at("radii"), format!("expected {want} radii, got {}", r.radii.len())));
    }
    if r.radii.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::schema(at("radii"), "radii must be positive"));
    }
    Ok(())
}

fn region_hole(r: &RegionSpec) -> StarHole {
    match r.shape {
        Shape::Ball | Shape::Sphere => StarHole::ball(r.center.clone(), r.radii[0]),
        Shape::Ellipsoid => StarHole {
            center: r.center.clone(),
            semi_axes: r.radii.clone(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schwarzschild_instance() {
        let inst = load_instance(r#"{"family": "schwarzschild", "n": 3, "params": {"m": 1}}"#).unwrap();
        let h = inst.schwarzschild.unwrap().horizon.unwrap();
        assert_eq!(h.conformal_radius, 0.5);
        assert!(inst.zas.is_empty());
        let neg = load_instance(r#"{"family": "schwarzschild", "n": 3, "params": {"m": -1}}"#).unwrap();
        assert_eq!(neg.zas.len(), 1);
    }

    #[test]
    fn schema_errors_carry_paths() {
        let cases = [
            (r#"{"family": "graph", "n": 3, "fields": {"f": "1 +"}}"#, "fields.f"),
            (r#"{"family": "schwarzschild", "n": 3}"#, "params.m"),
            (r#"{"family": "warp", "n": 3}"#, "family"),
            (r#"{"family": "flat", "n": "three"}"#, "n"),
            (r#"{"family": "flat", "n": 3, "colour": 1}"#, "colour"),
            (
                r#"{"family": "graph", "n": 3, "fields": {"f": "r"},
                   "excluded_regions": [{"shape": "ball", "center": [0, 0], "radii": [1]}]}"#,
                "excluded_regions[0].center",
            ),
        ];
        for (text, want) in cases {
            match load_instance(text) {
                Err(Error::Schema { path, .. }) => assert_eq!(path, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn piecewise_and_zas_instances() {
        let inst = load_instance(
            r#"{"family": "conformal", "n": 3,
                "fields": {"u": {"inner": "1 + (3 - r^2)/4", "outer": "1 + 1/(2*r)", "radius": 1}}}"#,
        )
        .unwrap();
        assert!(inst.metric.is_some());
        let z = load_instance(
            r#"{"family": "zas", "n": 3, "fields": {"phi": "1 - 1/(2*r)", "psi": "1 + (r - 0.5)^2"},
                "excluded_regions": [{"shape": "sphere", "center": [0, 0, 0], "radii": [0.5]}]}"#,
        )
        .unwrap();
        assert!(z.zas[0].background.is_some());
    }
}
