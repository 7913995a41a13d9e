use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::metrics::ScalarField;

/// Fully symmetric third-order partials `f_ijk`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdOrder {
    n: usize,
    data: Vec<f64>,
}

impl ThirdOrder {
    pub fn zeros(n: usize) -> Self {
        ThirdOrder {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn empty() -> Self {
        ThirdOrder { n: 0, data: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    /// Writes all six permutations of `(i, j, k)`.
    pub fn set_symmetric(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.n;
        for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
            self.data[(a * n + b) * n + c] = v;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Value and partial derivatives of a scalar field at a point, up to `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub order: usize,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
    pub third: ThirdOrder,
}

impl Jet {
    pub fn dim(&self) -> usize {
        self.gradient.len()
    }

    pub fn grad_norm_sq(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum()
    }

    pub fn laplacian(&self) -> f64 {
        self.hessian.trace()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffMode {
    /// Use the field's own derivatives (symbolic for parsed expressions).
    Analytic,
    CentralDifference,
}

/// How derivatives are obtained. Steps are relative: the absolute step for order `k`
/// is `steps[k-1] · max(1, |x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffScheme {
    pub mode: DiffMode,
    pub steps: [f64; 3],
}

impl Default for DiffScheme {
    fn default() -> Self {
        DiffScheme {
            mode: DiffMode::Analytic,
            steps: [1e-5, 1e-4, 1e-3],
        }
    }
}

impl DiffScheme {
    pub fn analytic() -> Self {
        Self::default()
    }

    pub fn finite_difference() -> Self {
        DiffScheme {
            mode: DiffMode::CentralDifference,
            ..Self::default()
        }
    }

    pub fn step(&self, order: usize, x: &[f64]) -> f64 {
        let scale = crate::numerics::norm(x).max(1.0);
        self.steps[order.clamp(1, 3) - 1] * scale
    }
}

/// Partials of `field` at `x` up to `order` (0..=3).
///
/// In analytic mode fields without closed-form derivatives fall back to differences.
pub fn derivatives(field: &dyn ScalarField, x: &[f64], order: usize, scheme: &DiffScheme) -> Result<Jet> {
    if order > 3 {
        return Err(Error::domain(format!("derivative order {order} > 3")));
    }
    if x.len() != field.dim() {
        return Err(Error::domain(format!(
            "point has dimension {}, field has {}",
            x.len(),
            field.dim()
        )));
    }
    if scheme.mode == DiffMode::Analytic {
        if let Some(jet) = field.analytic_jet(x, order) {
            return jet;
        }
    }
    finite_difference_jet(field, x, order, scheme)
}

fn finite_difference_jet(field: &dyn ScalarField, x: &[f64], order: usize, scheme: &DiffScheme) -> Result<Jet> {
    let n = x.len();
    let max_step = if order == 0 { 0.0 } else { 2.0 * scheme.step(order, x) };
    if let Some(d) = field.singular_distance(x) {
        if d <= max_step.max(scheme.step(1, x)) {
            return Err(Error::domain(format!(
                "point {x:?} is within {d:e} of the singular set (stencil needs > {max_step:e})"
            )));
        }
    }
    let f = |offsets: &[(usize, f64)]| -> Result<f64> {
        let mut y = x.to_vec();
        for &(i, d) in offsets {
            y[i] += d;
        }
        let v = field.value(&y)?;
        if !v.is_finite() {
            return Err(Error::domain(format!("field is not finite at {y:?}")));
        }
        Ok(v)
    };
    let value = f(&[])?;

    let mut gradient = Vec::new();
    if order >= 1 {
        let h = scheme.step(1, x);
        for i in 0..n {
            gradient.push((f(&[(i, h)])? - f(&[(i, -h)])?) / (2.0 * h));
        }
    }

    let mut hessian = DMatrix::zeros(0, 0);
    if order >= 2 {
        let h = scheme.step(2, x);
        hessian = DMatrix::zeros(n, n);
        for i in 0..n {
            hessian[(i, i)] = (f(&[(i, h)])? - 2.0 * value + f(&[(i, -h)])?) / (h * h);
            for j in 0..i {
                let v = (f(&[(i, h), (j, h)])? - f(&[(i, h), (j, -h)])? - f(&[(i, -h), (j, h)])?
                    + f(&[(i, -h), (j, -h)])?)
                    / (4.0 * h * h);
                hessian[(i, j)] = v;
                hessian[(j, i)] = v;
            }
        }
    }

    let mut third = ThirdOrder::empty();
    if order >= 3 {
        let h = scheme.step(3, x);
        third = ThirdOrder::zeros(n);
        for i in 0..n {
            let v = (f(&[(i, 2.0 * h)])? - 2.0 * f(&[(i, h)])? + 2.0 * f(&[(i, -h)])? - f(&[(i, -2.0 * h)])?)
                / (2.0 * h * h * h);
            third.set_symmetric(i, i, i, v);
            for j in 0..n {
                if j == i {
                    continue;
                }
                // ∂_j of the central second difference in i
                let d2 = |s: f64| -> Result<f64> {
                    Ok(f(&[(i, h), (j, s)])? - 2.0 * f(&[(j, s)])? + f(&[(i, -h), (j, s)])?)
                };
                let v = (d2(h)? - d2(-h)?) / (2.0 * h * h * h);
                third.set_symmetric(i, i, j, v);
            }
            for j in 0..i {
                for k in 0..j {
                    let mut acc = 0.0;
                    for si in [1.0, -1.0] {
                        for sj in [1.0, -1.0] {
                            for sk in [1.0, -1.0] {
                                acc += si * sj * sk * f(&[(i, si * h), (j, sj * h), (k, sk * h)])?;
                            }
                        }
                    }
                    third.set_symmetric(i, j, k, acc / (8.0 * h * h * h));
                }
            }
        }
    }

    Ok(Jet {
        order,
        value,
        gradient,
        hessian,
        third,
    })
}
