use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{norm, Jet, StarHole};

use super::expr::ExprField;

/// A real-valued function on (a subset of) flat n-space.
pub trait ScalarField: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Closed-form partials up to `order`, if the field has them.
    fn analytic_jet(&self, _x: &[f64], _order: usize) -> Option<Result<Jet>> {
        None
    }

    /// Distance from `x` to the nearest point where the field is not smooth.
    fn singular_distance(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Declared decay exponent `p` of the deviation from the value at infinity.
    fn decay(&self) -> Option<f64> {
        None
    }

    /// Coordinate radii where the field is only piecewise smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn describe(&self) -> String;
}

pub type FieldRef = Arc<dyn ScalarField>;

/// Where a field stops being smooth.
#[derive(Debug, Clone, PartialEq)]
pub enum SingularSet {
    Point(Vec<f64>),
    Boundary(StarHole),
}

impl SingularSet {
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            SingularSet::Point(c) => norm(&x.iter().zip(c).map(|(a, b)| a - b).collect::<Vec<_>>()),
            SingularSet::Boundary(h) => {
                let amin = h.semi_axes.iter().copied().fold(f64::INFINITY, f64::min);
                (h.gauge(x) - 1.0).abs() * amin
            }
        }
    }
}

/// Radial splice: `inner` on `|x| < radius`, `outer` elsewhere.
#[derive(Debug, Clone)]
pub struct PiecewiseRadial {
    inner: ExprField,
    outer: ExprField,
    radius: f64,
}

impl PiecewiseRadial {
    pub fn new(inner: ExprField, outer: ExprField, radius: f64) -> Result<Self> {
        if inner.dim() != outer.dim() {
            return Err(Error::domain("piecewise pieces have different dimensions"));
        }
        if !(radius > 0.0) {
            return Err(Error::domain(format!("splice radius must be positive, got {radius}")));
        }
        Ok(PiecewiseRadial { inner, outer, radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn piece(&self, x: &[f64]) -> &ExprField {
        if norm(x) < self.radius {
            &self.inner
        } else {
            &self.outer
        }
    }
}

impl ScalarField for PiecewiseRadial {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.piece(x).value(x)
    }

    fn analytic_jet(&self, x: &[f64], order: usize) -> Option<Result<Jet>> {
        self.piece(x).analytic_jet(x, order)
    }

    fn singular_distance(&self, x: &[f64]) -> Option<f64> {
        let splice = (norm(x) - self.radius).abs();
        let own = self.piece(x).singular_distance(x);
        Some(own.map_or(splice, |d| d.min(splice)))
    }

    fn decay(&self) -> Option<f64> {
        self.outer.decay()
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.radius]
    }

    fn describe(&self) -> String {
        format!(
            "{} for r < {}, {} otherwise",
            self.inner.describe(),
            self.radius,
            self.outer.describe()
        )
    }
}
