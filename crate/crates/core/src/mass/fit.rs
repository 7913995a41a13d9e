use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ScalarField;
use crate::numerics::{norm, SphereRule};

use super::{MassBreakdown, MassMethod};

/// Least-squares mass with residual diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub mass: f64,
    /// Spread against a fit on fewer shells (see [`asymptotic_fit`]).
    pub error: f64,
    pub residual_rms: f64,
    /// Condition number of the column-scaled design matrix.
    pub condition: f64,
    pub shells: usize,
}

impl From<AsymptoticFit> for MassBreakdown {
    fn from(f: AsymptoticFit) -> Self {
        MassBreakdown::new(MassMethod::AsymptoticFit, 0.0, f.mass, f.error)
    }
}

/// Values of `field` at the nodes of `rule` scaled to each radius.
pub fn shell_samples(field: &dyn ScalarField, radii: &[f64], rule: &SphereRule) -> Result<Vec<(Vec<f64>, f64)>> {
    let mut out = Vec::with_capacity(radii.len() * rule.len());
    for &r in radii {
        for (theta, _) in rule.iter() {
            let x: Vec<f64> = theta.iter().map(|t| r * t).collect();
            let v = field.value(&x)?;
            out.push((x, v));
        }
    }
    Ok(out)
}

const MAX_CONDITION: f64 = 1e12;

fn shell_count(samples: &[(Vec<f64>, f64)]) -> usize {
    let mut radii: Vec<f64> = samples.iter().map(|(x, _)| norm(x)).collect();
    radii.sort_by(|a, b| a.total_cmp(b));
    radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
    radii.len()
}

/// Solves the column-scaled least-squares problem; returns coefficients, rms residual and
/// condition number.
fn solve(rows: &[Vec<f64>], rhs: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let m = rows.len();
    let k = rows[0].len();
    let mut a = DMatrix::from_fn(m, k, |i, j| rows[i][j]);
    let scales: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
    if scales.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::IllConditioned("a basis column vanishes on the samples".into()));
    }
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let b = DVector::from_column_slice(rhs);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(Error::IllConditioned(format!("condition number {condition:e}")));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    let residual = (&a * &x - &b).norm() / (m as f64).sqrt();
    let coeffs = x.iter().zip(&scales).map(|(c, s)| c / s).collect();
    Ok((coeffs, residual, condition))
}

/// Samples with `|x|` strictly beyond the innermost shell, or on the outermost shell only.
fn outer_shells(samples: &[(Vec<f64>, f64)], drop_innermost: bool) -> Vec<(Vec<f64>, f64)> {
    let radii = samples.iter().map(|(x, _)| norm(x));
    let (rmin, rmax) = radii.fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    samples
        .iter()
        .filter(|(x, _)| {
            let r = norm(x);
            if drop_innermost {
                r > rmin * (1.0 + 1e-9)
            } else {
                (r - rmax).abs() <= 1e-9 * rmax
            }
        })
        .cloned()
        .collect()
}

fn fit_with<F>(
    samples: &[(Vec<f64>, f64)],
    n: usize,
    row: F,
    mass: impl Fn(&[f64]) -> f64,
    single_shell_ok: bool,
) -> Result<AsymptoticFit>
where
    F: Fn(&[f64]) -> Result<(Vec<f64>, f64)>,
{
    if let Some((x, _)) = samples.iter().find(|(x, _)| x.len() != n) {
        return Err(Error::domain(format!("sample {x:?} does not have dimension {n}")));
    }
    let shells = shell_count(samples);
    if shells < 2 {
        return Err(Error::IllConditioned(format!("need samples on at least 2 shells, got {shells}")));
    }
    let build = |s: &[(Vec<f64>, f64)]| -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let mut rows = Vec::with_capacity(s.len());
        let mut rhs = Vec::with_capacity(s.len());
        for (x, v) in s {
            let (r, y) = row(x)?;
            rows.push(r);
            rhs.push(v - y);
        }
        Ok((rows, rhs))
    };
    let (rows, rhs) = build(samples)?;
    let (coeffs, residual_rms, condition) = solve(&rows, &rhs)?;
    let m = mass(&coeffs);
    let error = if shells >= 3 || single_shell_ok {
        let (orows, orhs) = build(&outer_shells(samples, shells >= 3))?;
        match solve(&orows, &orhs) {
            Ok((c, _, _)) => (mass(&c) - m).abs(),
            Err(_) => m.abs(),
        }
    } else {
        // relative size of the first neglected term on the innermost shell
        let rmin = samples.iter().map(|(x, _)| norm(x)).fold(f64::INFINITY, f64::min);
        m.abs() / rmin
    };
    Ok(AsymptoticFit {
        mass: m,
        error,
        residual_rms,
        condition,
        shells,
    })
}

/// Fits `u - 1 ≈ a r^{2-n} + Σ b_i x_i r^{-n}` and returns `m = 2a`.
///
/// The error is the change in `m` when the innermost shell is dropped (three or more
/// shells) or when only the outermost shell is used (two shells).
pub fn asymptotic_fit(samples: &[(Vec<f64>, f64)], n: usize) -> Result<AsymptoticFit> {
    if n < 3 {
        return Err(Error::domain("asymptotic fit needs n >= 3"));
    }
    fit_with(
        samples,
        n,
        |x| {
            let r = norm(x);
            if !(r > 0.0) {
                return Err(Error::domain("sample at the origin"));
            }
            let mut row = vec![r.powi(2 - n as i32)];
            row.extend(x.iter().map(|xi| xi * r.powi(-(n as i32))));
            Ok((row, 1.0))
        },
        |c| 2.0 * c[0],
        true,
    )
}

/// Fits a graph height `f ≈ c + √(2m) ψ(r)` with `ψ' = r^{(2-n)/2}`, returning `m`.
///
/// With only two shells the error is `|m| / r_min`, the relative size of the first
/// neglected term.
pub fn asymptotic_fit_graph(samples: &[(Vec<f64>, f64)], n: usize) -> Result<AsymptoticFit> {
    if n < 3 {
        return Err(Error::domain("asymptotic fit needs n >= 3"));
    }
    let p = (4.0 - n as f64) / 2.0;
    fit_with(
        samples,
        n,
        |x| {
            let r = norm(x);
            if !(r > 0.0) {
                return Err(Error::domain("sample at the origin"));
            }
            let psi = if n == 4 { r.ln() } else { r.powf(p) / p };
            Ok((vec![1.0, psi], 0.0))
        },
        |c| 0.5 * c[1] * c[1],
        false,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{parse_field, schwarzschild_conformal_factor};

    #[test]
    fn recovers_schwarzschild() {
        let rule = SphereRule::new(3, 5).unwrap();
        let u = schwarzschild_conformal_factor(3.0, 3).unwrap();
        let fit = asymptotic_fit(&shell_samples(&u, &[20.0, 40.0], &rule).unwrap(), 3).unwrap();
        assert!((fit.mass - 3.0).abs() < 1e-8, "{fit:?}");
        let one = parse_field("1", 3).unwrap();
        let fit = asymptotic_fit(&shell_samples(&one, &[20.0, 40.0], &rule).unwrap(), 3).unwrap();
        assert_eq!(fit.mass, 0.0);
    }

    #[test]
    fn single_shell_is_rejected() {
        let rule = SphereRule::new(3, 5).unwrap();
        let u = schwarzschild_conformal_factor(1.0, 3).unwrap();
        let s = shell_samples(&u, &[20.0], &rule).unwrap();
        assert!(matches!(asymptotic_fit(&s, 3), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn graph_fit_of_schwarzschild_profile() {
        let rule = SphereRule::new(3, 3).unwrap();
        let f = parse_field("sqrt(8*(r-2))", 3).unwrap();
        let fit = asymptotic_fit_graph(&shell_samples(&f, &[1e4, 2e4, 4e4], &rule).unwrap(), 3).unwrap();
        assert!((fit.mass - 1.0).abs() < 1e-3, "{fit:?}");
    }
}
