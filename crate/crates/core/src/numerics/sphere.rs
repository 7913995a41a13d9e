use std::f64::consts::PI;

use super::{reduce_terms, GaussRule};
use crate::error::{Error, Result};

/// Polynomial degree integrated exactly by [`SphereRule::new`] when no order is given.
pub const DEFAULT_SPHERE_DEGREE: usize = 20;

/// Measure of the unit (n-1)-sphere in flat n-space, `2π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_measure(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("unit sphere measure needs n >= 2, got {n}")));
    }
    // ω_{n-1} = 2π/(n-2) · ω_{n-3}, seeded by ω_0 = 2 and ω_1 = 2π
    let mut omega = if n % 2 == 0 { 2.0 * PI } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 1 };
    while k < n {
        k += 2;
        omega *= 2.0 * PI / (k - 2) as f64;
    }
    Ok(omega)
}

/// Product quadrature on the unit (n-1)-sphere in R^n.
///
/// Built recursively: `x = (t, sqrt(1 - t²) y)` with `y` on the (n-2)-sphere and `t`
/// integrated by the Gauss rule for the weight `(1 - t²)^{(n-3)/2}`; the circle uses the
/// uniform trapezoid rule. The rule is antipodally symmetric and exact for spherical
/// polynomials of degree `<= degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    dim: usize,
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::domain(format!("sphere rule needs n >= 2, got {dim}")));
        }
        let (nodes, weights) = build(dim, degree)?;
        Ok(SphereRule {
            dim,
            degree,
            nodes,
            weights,
        })
    }

    pub fn with_default_degree(dim: usize) -> Result<Self> {
        Self::new(dim, DEFAULT_SPHERE_DEGREE)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }
}

fn build(dim: usize, degree: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if dim == 2 {
        // even count keeps the rule antipodal; exact for trig degree < m
        let m = 2 * (degree / 2 + 1);
        let mut nodes = Vec::with_capacity(2 * m);
        let w = 2.0 * PI / m as f64;
        for j in 0..m {
            let phi = 2.0 * PI * (j as f64 + 0.5) / m as f64;
            nodes.push(phi.cos());
            nodes.push(phi.sin());
        }
        return Ok((nodes, vec![w; m]));
    }
    let (sub_nodes, sub_weights) = build(dim - 1, degree)?;
    let alpha = (dim as f64 - 3.0) / 2.0;
    let mu0 = unit_sphere_measure(dim)? / unit_sphere_measure(dim - 1)?;
    let polar = GaussRule::symmetric_jacobi(degree / 2 + 1, alpha, mu0)?;

    let sub_dim = dim - 1;
    let count = polar.len() * sub_weights.len();
    let mut nodes = Vec::with_capacity(count * dim);
    let mut weights = Vec::with_capacity(count);
    for (&t, &wt) in polar.nodes.iter().zip(&polar.weights) {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for (y, &wy) in sub_nodes.chunks_exact(sub_dim).zip(&sub_weights) {
            nodes.push(t);
            nodes.extend(y.iter().map(|v| s * v));
            weights.push(wt * wy);
        }
    }
    Ok((nodes, weights))
}

/// `∫_{S_ρ(center)} f dS` for the coordinate sphere of radius `radius`.
///
/// `field` receives points on the sphere (not unit vectors).
pub fn integrate_sphere<F>(field: F, rule: &SphereRule, center: Option<&[f64]>, radius: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    if !(radius > 0.0) {
        return Err(Error::domain(format!("sphere radius must be positive, got {radius}")));
    }
    let n = rule.dim();
    if let Some(c) = center {
        if c.len() != n {
            return Err(Error::domain("sphere center has wrong dimension"));
        }
    }
    let scale = radius.powi(n as i32 - 1);
    let sum = reduce_terms(rule.len(), |i| {
        let theta = rule.node(i);
        let x: Vec<f64> = match center {
            Some(c) => theta.iter().zip(c).map(|(t, c)| c + radius * t).collect(),
            None => theta.iter().map(|t| radius * t).collect(),
        };
        Ok(rule.weight(i) * field(&x)?)
    })?;
    Ok(scale * sum)
}
