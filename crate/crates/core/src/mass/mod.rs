//! Mass functionals and inequality reports.
//!
//! Every mass carries an error estimate. Inequality verdicts compare `lhs - rhs` against a
//! tolerance stored alongside the numbers, so reports can be re-judged without recomputation.

mod adm;
mod bounds;
mod fit;
mod report;
mod volume;
mod zas;

pub use adm::{adm_flux, adm_ladder, adm_mass};
pub use bounds::{af_boundary_bound, black_hole_mass, horizon_mass_term};
pub use fit::{asymptotic_fit, asymptotic_fit_graph, shell_samples, AsymptoticFit};
pub use report::{
    combined_report, locate_round_horizon, penrose_report_graph, two_center_setup, InequalityCheck, InequalityReport,
    ReportSettings, TwoCenterSetup, DEFAULT_TOLERANCE,
};
pub use volume::{mass_conformal, mass_graph, mass_graph_boundary, partial_mass_conformal};
pub use zas::{quasilocal_mass, zas_mass_limit, zas_regular_mass, zas_sequence_value};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::unit_sphere_measure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassMethod {
    AdmFlux,
    ConformalVolume,
    GraphVolume,
    GraphBoundary,
    AsymptoticFit,
}

impl MassMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            MassMethod::AdmFlux => "adm-flux",
            MassMethod::ConformalVolume => "conformal-volume",
            MassMethod::GraphVolume => "graph-volume",
            MassMethod::GraphBoundary => "graph-boundary",
            MassMethod::AsymptoticFit => "asymptotic-fit",
        }
    }
}

/// A total mass split into boundary and volume parts, with an error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassBreakdown {
    pub method: MassMethod,
    pub total: f64,
    pub boundary: f64,
    pub volume: f64,
    pub error: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl MassBreakdown {
    fn new(method: MassMethod, boundary: f64, volume: f64, error: f64) -> Self {
        MassBreakdown {
            method,
            total: boundary + volume,
            boundary,
            volume,
            error,
            warnings: Vec::new(),
        }
    }
}

/// `2(n-1) ω_{n-1}`, the normalization shared by all mass integrals.
pub(crate) fn mass_normalization(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::domain(format!("mass functionals need n >= 3, got {n}")));
    }
    Ok(2.0 * (n as f64 - 1.0) * unit_sphere_measure(n)?)
}
