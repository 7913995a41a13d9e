use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample radii `r_k = r0 · ratio^k` and the decay model `v(r) ≈ m + Σ c_j r^{-j·s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationLadder {
    pub r0: f64,
    pub ratio: f64,
    pub count: usize,
    /// Decay exponent `s` of the leading correction.
    pub decay: f64,
    /// Highest polynomial order in `r^{-s}` used by the Neville table.
    pub max_order: usize,
}

impl Default for ExtrapolationLadder {
    fn default() -> Self {
        ExtrapolationLadder {
            r0: 8.0,
            ratio: 2.0,
            count: 7,
            decay: 1.0,
            max_order: 4,
        }
    }
}

impl ExtrapolationLadder {
    pub fn new(r0: f64, decay: f64) -> Self {
        ExtrapolationLadder {
            r0,
            decay,
            ..Self::default()
        }
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn abscissae(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.r0 * self.ratio.powi(k as i32)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    pub limit: f64,
    pub error: f64,
}

/// Richardson limit of `samples` as `r → ∞`.
///
/// Polynomial (Neville) extrapolation to `x = 0` in `x = r^{-s}`, using the
/// `max_order + 1` largest radii. The error is the gap to the next-lower order.
pub fn extrapolate_limit(samples: &[(f64, f64)], ladder: &ExtrapolationLadder) -> Result<Extrapolated> {
    if samples.len() < 2 {
        return Err(Error::Arity {
            expected: 2,
            got: samples.len(),
        });
    }
    if !(ladder.decay > 0.0) {
        return Err(Error::domain(format!("decay exponent must be positive, got {}", ladder.decay)));
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::domain("sample radii must be strictly increasing"));
        }
    }
    if let Some(&(r, v)) = samples.iter().find(|(r, v)| !(*r > 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!("bad sample ({r}, {v})")));
    }

    let used = samples.len().min(ladder.max_order.max(1) + 1);
    let tail = &samples[samples.len() - used..];
    let xs: Vec<f64> = tail.iter().map(|(r, _)| r.powf(-ladder.decay)).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, v)| *v).collect();

    let limit = neville_at_zero(&xs, &ys);
    let lower = neville_at_zero(&xs[1..], &ys[1..]);
    Ok(Extrapolated {
        limit,
        error: (limit - lower).abs(),
    })
}

fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let m = xs.len();
    for level in 1..m {
        for i in 0..m - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(ladder: &ExtrapolationLadder, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        ladder.abscissae().into_iter().map(|r| (r, f(r))).collect()
    }

    #[test]
    fn constant_and_pure_decay() {
        let l = ExtrapolationLadder::new(1.0, 1.0);
        let c = extrapolate_limit(&model(&l, |_| 3.25), &l).unwrap();
        assert!((c.limit - 3.25).abs() < 1e-14);
        let z = extrapolate_limit(&model(&l, |r| 1.0 / r), &l).unwrap();
        assert!(z.limit.abs() < 1e-14);
    }

    #[test]
    fn exact_on_decay_model() {
        let l = ExtrapolationLadder::new(1.0, 1.0);
        let e = extrapolate_limit(&model(&l, |r| 2.0 + 5.0 / r), &l).unwrap();
        assert!((e.limit - 2.0).abs() < 1e-10);
        let l = ExtrapolationLadder::new(3.0, 2.0);
        let e = extrapolate_limit(&model(&l, |r| -1.0 + 7.0 / (r * r) - 2.0 / r.powi(4)), &l).unwrap();
        assert!((e.limit + 1.0).abs() < 1e-10);
    }

    #[test]
    fn argument_errors() {
        let l = ExtrapolationLadder::default();
        assert!(matches!(extrapolate_limit(&[(1.0, 1.0)], &l), Err(Error::Arity { .. })));
        assert!(extrapolate_limit(&[(2.0, 1.0), (1.0, 1.0)], &l).is_err());
    }
}
