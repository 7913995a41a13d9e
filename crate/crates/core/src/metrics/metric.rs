use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{derivatives, norm, DiffScheme, SphereRule, StarHole};

use super::expr::parse_field;
use super::field::{FieldRef, ScalarField};
use super::surface::SurfaceSpec;

/// `g = u^{4/(n-2)} δ`, optionally on the complement of a closed ball about the origin.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    dim: usize,
    u: FieldRef,
    excluded_radius: Option<f64>,
}

impl ConformalMetric {
    pub fn new(u: FieldRef) -> Result<Self> {
        let dim = u.dim();
        if dim < 3 {
            return Err(Error::domain(format!("conformal metrics need n >= 3, got {dim}")));
        }
        Ok(ConformalMetric {
            dim,
            u,
            excluded_radius: None,
        })
    }

    pub fn flat(n: usize) -> Result<Self> {
        Self::new(Arc::new(parse_field("1", n)?))
    }

    pub fn with_excluded_radius(mut self, radius: f64) -> Self {
        self.excluded_radius = Some(radius);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factor(&self) -> &dyn ScalarField {
        self.u.as_ref()
    }

    pub fn factor_ref(&self) -> FieldRef {
        self.u.clone()
    }

    pub fn excluded_radius(&self) -> Option<f64> {
        self.excluded_radius
    }

    /// Exponent `4/(n-2)` of the conformal factor.
    pub fn power(&self) -> f64 {
        4.0 / (self.dim as f64 - 2.0)
    }

    pub(crate) fn positive_factor(&self, x: &[f64]) -> Result<f64> {
        let u = self.u.value(x)?;
        if !(u > 0.0) {
            return Err(Error::domain(format!("conformal factor is {u} at {x:?}")));
        }
        Ok(u)
    }

    pub fn components(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let u = self.positive_factor(x)?;
        Ok(DMatrix::identity(self.dim, self.dim) * u.powf(self.power()))
    }
}

/// Induced metric `δ_ij + f_i f_j` on the graph of `f` over the complement of `holes`.
#[derive(Debug, Clone)]
pub struct GraphMetric {
    dim: usize,
    f: FieldRef,
    holes: Vec<StarHole>,
}

impl GraphMetric {
    pub fn new(f: FieldRef, holes: Vec<StarHole>) -> Result<Self> {
        let dim = f.dim();
        if dim < 3 {
            return Err(Error::domain(format!("graph metrics need n >= 3, got {dim}")));
        }
        for (i, h) in holes.iter().enumerate() {
            if h.center.len() != dim || h.semi_axes.len() != dim {
                return Err(Error::domain(format!("excluded region {i} has the wrong dimension")));
            }
            if h.semi_axes.iter().any(|a| !(*a > 0.0)) {
                return Err(Error::domain(format!("excluded region {i} has a non-positive semi-axis")));
            }
        }
        // cheap disjointness test: centers farther apart than the sum of the largest axes
        for i in 0..holes.len() {
            for j in 0..i {
                let d: Vec<f64> = holes[i].center.iter().zip(&holes[j].center).map(|(a, b)| a - b).collect();
                let amax = |h: &StarHole| h.semi_axes.iter().copied().fold(0.0, f64::max);
                if norm(&d) <= amax(&holes[i]) + amax(&holes[j]) {
                    return Err(Error::domain(format!("excluded regions {j} and {i} may overlap")));
                }
            }
        }
        Ok(GraphMetric { dim, f, holes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn height(&self) -> &dyn ScalarField {
        self.f.as_ref()
    }

    pub fn height_ref(&self) -> FieldRef {
        self.f.clone()
    }

    pub fn holes(&self) -> &[StarHole] {
        &self.holes
    }

    pub fn boundary(&self) -> Result<Vec<SurfaceSpec>> {
        self.holes.iter().map(SurfaceSpec::from_hole).collect()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.holes.iter().all(|h| h.gauge(x) >= 1.0)
    }

    pub fn components(&self, x: &[f64], scheme: &DiffScheme) -> Result<DMatrix<f64>> {
        let jet = derivatives(self.f.as_ref(), x, 1, scheme)?;
        let g = nalgebra::DVector::from_column_slice(&jet.gradient);
        Ok(DMatrix::identity(self.dim, self.dim) + &g * g.transpose())
    }

    /// `sqrt(det g) = sqrt(1 + |∇f|²)`.
    pub fn volume_factor(&self, x: &[f64], scheme: &DiffScheme) -> Result<f64> {
        let jet = derivatives(self.f.as_ref(), x, 1, scheme)?;
        Ok((1.0 + jet.grad_norm_sq()).sqrt())
    }

    /// Samples the boundary hypotheses: `f = 0` on each boundary component and
    /// `|∇f|` blowing up along normal approach sequences.
    pub fn check_boundary_hypotheses(&self, rule: &SphereRule) -> Result<()> {
        let scheme = DiffScheme::analytic();
        for (hi, hole) in self.holes.iter().enumerate() {
            let surface = SurfaceSpec::from_hole(hole)?;
            let scale = hole.semi_axes.iter().copied().fold(0.0, f64::max);
            for (theta, _) in rule.iter() {
                let x = surface.ray_point(theta)?;
                let nu = surface.normal(&x)?;
                // square-root profiles may be undefined a rounding error inside Σ
                let f0 = match self.f.value(&x) {
                    Ok(v) if v.is_finite() => v,
                    _ => {
                        let y: Vec<f64> = x.iter().zip(&nu).map(|(x, v)| x + 1e-12 * scale * v).collect();
                        self.f.value(&y)?
                    }
                };
                if !(f0.abs() <= 1e-5 * scale.max(1.0)) {
                    return Err(Error::Hypothesis(format!(
                        "f = {f0:e} on boundary component {hi} at {x:?}; it must vanish there"
                    )));
                }
                let grad_at = |d: f64| -> Result<f64> {
                    let y: Vec<f64> = x.iter().zip(&nu).map(|(x, v)| x + d * scale * v).collect();
                    let jet = derivatives(self.f.as_ref(), &y, 1, &scheme)?;
                    Ok(jet.grad_norm_sq().sqrt())
                };
                let (far, mid, near) = (grad_at(1e-2)?, grad_at(1e-4)?, grad_at(1e-6)?);
                if !(near > mid && mid > far && near > 10.0 * far) {
                    return Err(Error::Hypothesis(format!(
                        "|grad f| does not blow up approaching boundary component {hi} at {x:?} \
                         ({far:e}, {mid:e}, {near:e})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Resolution `g = φ̄^{4/(n-2)} ḡ` near a zero area singularity Σ, with
/// `ḡ = ψ^{4/(n-2)} δ` (flat when `background` is `None`).
#[derive(Debug, Clone)]
pub struct ZasResolution {
    dim: usize,
    pub background: Option<FieldRef>,
    pub phi: FieldRef,
    pub sigma: SurfaceSpec,
}

impl ZasResolution {
    pub fn new(phi: FieldRef, sigma: SurfaceSpec) -> Result<Self> {
        let dim = phi.dim();
        if sigma.dim() != dim {
            return Err(Error::domain("resolution surface and field differ in dimension"));
        }
        if dim < 3 {
            return Err(Error::domain("ZAS resolutions need n >= 3"));
        }
        Ok(ZasResolution {
            dim,
            background: None,
            phi,
            sigma,
        })
    }

    pub fn with_background(mut self, psi: FieldRef) -> Result<Self> {
        if psi.dim() != self.dim {
            return Err(Error::domain("background factor has the wrong dimension"));
        }
        self.background = Some(psi);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Background factor ψ at `x` (1 for a flat background).
    pub fn psi(&self, x: &[f64]) -> Result<f64> {
        match &self.background {
            Some(p) => p.value(x),
            None => Ok(1.0),
        }
    }
}

/// Metric data on the first fundamental form level: components and first partials.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricJet {
    pub g: DMatrix<f64>,
    /// `dg[k][(i, j)] = ∂_k g_ij`
    pub dg: Vec<DMatrix<f64>>,
}

/// A Riemannian metric on (part of) flat n-space from one of the supported families.
#[derive(Debug, Clone)]
pub enum MetricInstance {
    Conformal(ConformalMetric),
    Graph(GraphMetric),
}

impl MetricInstance {
    pub fn dim(&self) -> usize {
        match self {
            MetricInstance::Conformal(c) => c.dim(),
            MetricInstance::Graph(g) => g.dim(),
        }
    }

    /// Decay exponent of `g - δ`, from the field declaration or the family default.
    pub fn decay(&self) -> f64 {
        let n = self.dim() as f64;
        match self {
            MetricInstance::Conformal(c) => c.factor().decay().unwrap_or(n - 2.0),
            // |f_i| ≤ C r^{-p/2} makes f_i f_j ~ r^{-p}
            MetricInstance::Graph(g) => g.height().decay().unwrap_or(n - 2.0),
        }
    }

    pub fn components(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        match self {
            MetricInstance::Conformal(c) => c.components(x),
            MetricInstance::Graph(g) => g.components(x, &DiffScheme::analytic()),
        }
    }

    pub fn metric_jet(&self, x: &[f64], scheme: &DiffScheme) -> Result<MetricJet> {
        let n = self.dim();
        match self {
            MetricInstance::Conformal(c) => {
                let jet = derivatives(c.factor(), x, 1, scheme)?;
                if !(jet.value > 0.0) {
                    return Err(Error::domain(format!("conformal factor is {} at {x:?}", jet.value)));
                }
                let p = c.power();
                let big_u = jet.value.powf(p);
                let du = p * jet.value.powf(p - 1.0);
                let g = DMatrix::identity(n, n) * big_u;
                let dg = jet.gradient.iter().map(|gk| DMatrix::identity(n, n) * (du * gk)).collect();
                Ok(MetricJet { g, dg })
            }
            MetricInstance::Graph(gm) => {
                let jet = derivatives(gm.height(), x, 2, scheme)?;
                let f = &jet.gradient;
                let g = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + f[i] * f[j]);
                let dg = (0..n)
                    .map(|k| DMatrix::from_fn(n, n, |i, j| jet.hessian[(i, k)] * f[j] + f[i] * jet.hessian[(j, k)]))
                    .collect();
                Ok(MetricJet { g, dg })
            }
        }
    }
}
