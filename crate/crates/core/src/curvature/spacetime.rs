use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::metrics::SpacetimeInstance;
use crate::numerics::{norm, DiffMode, DiffScheme};

/// `Γ^a_{bc}` at a chart point, indices over `(t, x_1, .., x_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelTensor {
    dim: usize,
    data: Vec<f64>,
}

impl ChristoffelTensor {
    fn zeros(dim: usize) -> Self {
        ChristoffelTensor {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    /// Spacetime dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.dim + b) * self.dim + c]
    }

    fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        let d = self.dim;
        self.data[(a * d + b) * d + c] = v;
    }

    /// Largest `|Γ^a_{bc} - Γ^a_{cb}|`.
    pub fn symmetry_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    worst = worst.max((self.get(a, b, c) - self.get(a, c, b)).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Christoffel symbols of the static spacetime at spatial point `x`.
///
/// Time derivatives vanish. Spatial derivatives of the components come from the closed-form
/// radial derivatives in analytic mode and from five-point differences of the component
/// evaluator otherwise.
pub fn christoffel(st: &SpacetimeInstance, x: &[f64], scheme: &DiffScheme) -> Result<ChristoffelTensor> {
    let n = st.n;
    if x.len() != n {
        return Err(Error::domain("point has the wrong dimension"));
    }
    let d = n + 1;
    let g = st.components_at(x)?;
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singularity(format!("spacetime metric is singular at {x:?}")))?;
    // dg[c] = ∂_c g, c over spacetime indices; dg[0] = 0
    let mut dg = vec![DMatrix::zeros(d, d); d];
    match scheme.mode {
        DiffMode::Analytic => {
            let r = norm(x);
            let (da, db) = st.radial_derivatives(r)?;
            for i in 0..n {
                let w = x[i] / r;
                let m = &mut dg[i + 1];
                m[(0, 0)] = -da * w;
                for j in 1..d {
                    m[(j, j)] = db * w;
                }
            }
        }
        DiffMode::CentralDifference => {
            let h = scheme.step(1, x);
            for i in 0..n {
                let at = |t: f64| -> Result<DMatrix<f64>> {
                    let mut y = x.to_vec();
                    y[i] += t * h;
                    st.components_at(&y)
                };
                dg[i + 1] = (at(-2.0)? - at(2.0)? + (at(1.0)? - at(-1.0)?) * 8.0) / (12.0 * h);
            }
        }
    }
    let mut gamma = ChristoffelTensor::zeros(d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let mut s = 0.0;
                for e in 0..d {
                    let gi = ginv[(a, e)];
                    if gi != 0.0 {
                        s += gi * (dg[b][(e, c)] + dg[c][(e, b)] - dg[e][(b, c)]);
                    }
                }
                gamma.set(a, b, c, 0.5 * s);
            }
        }
    }
    Ok(gamma)
}

/// Inward coordinate acceleration `a = Γ^n_{00} = A'/(2B)` of a static observer at
/// `(0, .., 0, r)`.
pub fn geodesic_acceleration(k: f64, n: usize, r: f64) -> Result<f64> {
    let st = SpacetimeInstance::new(k, n)?;
    let (da, _) = st.radial_derivatives(r)?;
    Ok(da / (2.0 * st.spatial_factor(r)?))
}
