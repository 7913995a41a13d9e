use crate::error::Result;
use crate::metrics::ScalarField;
use crate::numerics::{derivatives, DiffMode, DiffScheme, Jet};

use super::graph_curvature_from_jet;

fn flux_from_jet(jet: &Jet) -> Vec<f64> {
    let n = jet.dim();
    let f = &jet.gradient;
    let w = 1.0 + jet.grad_norm_sq();
    let lap = jet.laplacian();
    (0..n)
        .map(|j| {
            let hf: f64 = (0..n).map(|i| jet.hessian[(i, j)] * f[i]).sum();
            (lap * f[j] - hf) / w
        })
        .collect()
}

/// `V = (f_ii f_j - f_ij f_i) / (1 + |∇f|²) ∂_j`, whose divergence is the graph's scalar curvature.
pub fn lam_flux(f: &dyn ScalarField, x: &[f64], scheme: &DiffScheme) -> Result<Vec<f64>> {
    let jet = derivatives(f, x, 2, scheme)?;
    Ok(flux_from_jet(&jet))
}

/// `∇·V` at `x`.
///
/// Analytic mode expands the divergence with the product rule using third derivatives.
/// Difference mode applies a five-point central difference to `V` itself, step
/// `steps[2]·max(1, |x|)`. The Hessians inside `V` also use the third-order step.
pub fn lam_divergence(f: &dyn ScalarField, x: &[f64], scheme: &DiffScheme) -> Result<f64> {
    let n = f.dim();
    match scheme.mode {
        DiffMode::Analytic => {
            let jet = derivatives(f, x, 3, scheme)?;
            let g = &jet.gradient;
            let w = 1.0 + jet.grad_norm_sq();
            let lap = jet.laplacian();
            let hh: f64 = jet.hessian.iter().map(|v| v * v).sum();
            let mut third = 0.0;
            for i in 0..n {
                for j in 0..n {
                    third += jet.third.get(i, i, j) * g[j] - jet.third.get(i, j, j) * g[i];
                }
            }
            let v = flux_from_jet(&jet);
            // ∂_j (1/w) = -2 f_k f_kj / w²
            let mut dw = 0.0;
            for j in 0..n {
                let fkj: f64 = (0..n).map(|k| g[k] * jet.hessian[(k, j)]).sum();
                dw += v[j] * w * (-2.0 * fkj / (w * w));
            }
            Ok((third + lap * lap - hh) / w + dw)
        }
        DiffMode::CentralDifference => {
            let h = scheme.step(3, x);
            let inner = DiffScheme {
                steps: [scheme.steps[0], scheme.steps[2], scheme.steps[2]],
                ..*scheme
            };
            let mut div = 0.0;
            for j in 0..n {
                let at = |t: f64| -> Result<f64> {
                    let mut y = x.to_vec();
                    y[j] += t * h;
                    Ok(lam_flux(f, &y, &inner)?[j])
                };
                div += (-at(2.0)? + 8.0 * at(1.0)? - 8.0 * at(-1.0)? + at(-2.0)?) / (12.0 * h);
            }
            Ok(div)
        }
    }
}

/// `|∇·V - R|` at `x`; Lam's identity says this vanishes.
pub fn lam_identity_residual(f: &dyn ScalarField, x: &[f64], scheme: &DiffScheme) -> Result<f64> {
    let div = lam_divergence(f, x, scheme)?;
    let jet = derivatives(f, x, 2, scheme)?;
    Ok((div - graph_curvature_from_jet(&jet)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::parse_field;

    #[test]
    fn flux_examples() {
        let s = DiffScheme::analytic();
        let c = parse_field("-2", 3).unwrap();
        assert_eq!(lam_flux(&c, &[1.0, 1.0, 1.0], &s).unwrap(), vec![0.0; 3]);
        let p = parse_field("r^2/2", 3).unwrap();
        let v = lam_flux(&p, &[1.0, 0.0, 0.0], &s).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15 && v[1] == 0.0 && v[2] == 0.0);
    }

    #[test]
    fn radial_flux_is_radial() {
        let f = parse_field("sqrt(1 + r^2)", 4).unwrap();
        let x = [0.3, -0.2, 0.9, 0.4];
        let v = lam_flux(&f, &x, &DiffScheme::analytic()).unwrap();
        let ratio = v[0] / x[0];
        for i in 1..4 {
            assert!((v[i] - ratio * x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_on_examples() {
        let s = DiffScheme::analytic();
        let c = parse_field("7", 3).unwrap();
        assert_eq!(lam_identity_residual(&c, &[0.1, 0.2, 0.3], &s).unwrap(), 0.0);
        let f = parse_field("x1*x2*x3 + x1^3 - 2*x2^2", 3).unwrap();
        assert!(lam_identity_residual(&f, &[0.4, -0.3, 0.8], &s).unwrap() < 1e-12);
        let schw = parse_field("sqrt(8*(r-2))", 3).unwrap();
        let fd = lam_identity_residual(&schw, &[0.0, 0.0, 4.0], &DiffScheme::finite_difference()).unwrap();
        assert!(fd < 1e-4, "{fd}");
    }
}
