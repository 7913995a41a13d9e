//! Scalar curvature of conformal and graph metrics, Lam's flux field, mean curvature of
//! hypersurfaces, and Christoffel symbols of the static spacetimes.

mod lam;
mod mean;
mod spacetime;

pub use lam::{lam_divergence, lam_flux, lam_identity_residual};
pub use mean::{
    conformal_surface_data, mean_curvature_conformal, mean_curvature_euclidean, mean_curvature_sphere_conformal,
    ConformalSurfacePoint,
};
pub use spacetime::{christoffel, geodesic_acceleration, ChristoffelTensor};

use crate::error::{Error, Result};
use crate::metrics::ScalarField;
use crate::numerics::{derivatives, unit_sphere_measure, DiffScheme, Jet};

/// `R = -(4(n-1)/(n-2)) u^{-(n+2)/(n-2)} Δu` for `g = u^{4/(n-2)} δ`.
pub fn scalar_curvature_conformal(u: &dyn ScalarField, x: &[f64], scheme: &DiffScheme) -> Result<f64> {
    let n = u.dim() as f64;
    if u.dim() < 3 {
        return Err(Error::domain("conformal scalar curvature needs n >= 3"));
    }
    let jet = derivatives(u, x, 2, scheme)?;
    if !(jet.value > 0.0) {
        return Err(Error::domain(format!("conformal factor is {} at {x:?}", jet.value)));
    }
    Ok(-(4.0 * (n - 1.0) / (n - 2.0)) * jet.value.powf(-(n + 2.0) / (n - 2.0)) * jet.laplacian())
}

/// Scalar curvature of the graph metric `δ + df ⊗ df`, in base coordinates.
pub fn scalar_curvature_graph(f: &dyn ScalarField, x: &[f64], scheme: &DiffScheme) -> Result<f64> {
    let jet = derivatives(f, x, 2, scheme)?;
    Ok(graph_curvature_from_jet(&jet))
}

pub(crate) fn graph_curvature_from_jet(jet: &Jet) -> f64 {
    let n = jet.dim();
    let f = &jet.gradient;
    let h = &jet.hessian;
    let w = 1.0 + jet.grad_norm_sq();
    let lap = jet.laplacian();
    let hh: f64 = h.iter().map(|v| v * v).sum();
    // f_j f_k (f_ii f_jk - f_ij f_ik) = lap·(fᵀHf) - |Hf|²
    let hf: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[(i, j)] * f[j]).sum()).collect();
    let fhf: f64 = (0..n).map(|i| f[i] * hf[i]).sum();
    let hf2: f64 = hf.iter().map(|v| v * v).sum();
    (lap * lap - hh - 2.0 * (lap * fhf - hf2) / w) / w
}

/// Energy density `μ = R / (2(n-1) ω_{n-1})`.
pub fn energy_density(scalar_curvature: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::domain(format!("energy density needs n >= 3, got {n}")));
    }
    Ok(scalar_curvature / (2.0 * (n as f64 - 1.0) * unit_sphere_measure(n)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::parse_field;
    use std::f64::consts::PI;

    #[test]
    fn conformal_examples() {
        let s = DiffScheme::analytic();
        let schw = parse_field("1 + 1/(2*r)", 3).unwrap();
        assert!(scalar_curvature_conformal(&schw, &[0.3, 0.2, -0.7], &s).unwrap().abs() < 1e-12);
        let one = parse_field("1", 4).unwrap();
        assert_eq!(scalar_curvature_conformal(&one, &[1.0; 4], &s).unwrap(), 0.0);
        // Δu(0) = -6, u(0) = 2: R = -8·2^{-5}·(-6) = 3/2
        let bump = parse_field("1 + exp(-r^2)", 3).unwrap();
        let r = scalar_curvature_conformal(&bump, &[0.0; 3], &s).unwrap();
        assert!((r - 1.5).abs() < 1e-14);
        let rf = scalar_curvature_conformal(&bump, &[0.0; 3], &DiffScheme::finite_difference()).unwrap();
        assert!((rf - 1.5).abs() < 1e-6);
    }

    #[test]
    fn conformal_rejects_nonpositive_factor() {
        let u = parse_field("1 - 1/(2*r)", 3).unwrap();
        assert!(scalar_curvature_conformal(&u, &[0.25, 0.0, 0.0], &DiffScheme::analytic()).is_err());
    }

    #[test]
    fn graph_examples() {
        let s = DiffScheme::analytic();
        let c = parse_field("3", 3).unwrap();
        assert_eq!(scalar_curvature_graph(&c, &[1.0, 2.0, 3.0], &s).unwrap(), 0.0);
        let paraboloid = parse_field("r^2/2", 3).unwrap();
        assert!((scalar_curvature_graph(&paraboloid, &[0.0; 3], &s).unwrap() - 6.0).abs() < 1e-14);
        let schw = parse_field("sqrt(8*(r-2))", 3).unwrap();
        assert!(scalar_curvature_graph(&schw, &[0.0, 3.0, 0.0], &s).unwrap().abs() < 1e-14);
    }

    #[test]
    fn energy_density_normalization() {
        assert_eq!(energy_density(0.0, 3).unwrap(), 0.0);
        assert!((energy_density(16.0 * PI, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!(energy_density(1.0, 2).is_err());
    }
}
