use clap::ValueEnum;
use massgeom_core::mass::{partial_mass_conformal, quasilocal_mass};
use massgeom_core::metrics::{Instance, MetricInstance, SurfaceSpec};
use massgeom_core::numerics::SphereRule;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// Mass enclosed by the coordinate sphere of radius r.
    PartialMass,
    /// Quasi-local mass of the coordinate sphere of radius r.
    Quasilocal,
}

impl Quantity {
    fn column(&self) -> &'static str {
        match self {
            Quantity::PartialMass => "partial_mass",
            Quantity::Quasilocal => "quasilocal_mass",
        }
    }
}

/// Geometric radii from `r_min` to `r_max`, both included.
pub fn radii(r_min: f64, r_max: f64, points: usize) -> CliResult<Vec<f64>> {
    if !(r_min > 0.0 && r_max > r_min) || points < 2 {
        return Err(CliError::Config("profile needs 0 < r-min < r-max and at least 2 points".into()));
    }
    let q = (r_max / r_min).powf(1.0 / (points - 1) as f64);
    Ok((0..points).map(|k| if k + 1 == points { r_max } else { r_min * q.powi(k as i32) }).collect())
}

/// Plot-ready CSV of `quantity` against the radius of origin-centred spheres.
pub fn profile_csv(inst: &Instance, quantity: Quantity, radii: &[f64], degree: usize) -> CliResult<String> {
    let Some(MetricInstance::Conformal(c)) = &inst.metric else {
        return Err(CliError::Config(format!("instance `{}` has no conformal metric to profile", inst.id)));
    };
    let g = inst.metric.as_ref().unwrap();
    let n = inst.n();
    let rule = SphereRule::new(n, degree)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["r", quantity.column()]).map_err(io)?;
    for &r in radii {
        let v = match quantity {
            Quantity::PartialMass => partial_mass_conformal(c.factor(), r, &rule)?,
            Quantity::Quasilocal => quasilocal_mass(g, &SurfaceSpec::centered_sphere(n, r)?, &rule)?,
        };
        w.write_record([format!("{r:e}"), format!("{v:e}")]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}
