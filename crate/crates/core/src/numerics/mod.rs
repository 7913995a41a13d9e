//! Quadrature on spheres and exterior regions, finite differences and limit extrapolation.
//!
//! Everything here is deterministic for a fixed rule: node evaluation may run on
//! the rayon pool but reductions always use [`pairwise_sum`] in node order.

mod diff;
mod extrapolate;
mod gauss;
mod sphere;
mod volume;

pub use diff::{derivatives, DiffMode, DiffScheme, Jet, ThirdOrder};
pub use extrapolate::{extrapolate_limit, Extrapolated, ExtrapolationLadder};
pub use gauss::GaussRule;
pub use sphere::{integrate_sphere, unit_sphere_measure, SphereRule, DEFAULT_SPHERE_DEGREE};
pub use volume::{integrate_exterior_volume, Region, StarHole, VolumeEstimate, VolumeRule};

use crate::error::Result;
use rayon::prelude::*;

const PAIRWISE_BLOCK: usize = 8;
const PARALLEL_THRESHOLD: usize = 2048;

/// Sum with pairwise (cascade) splitting; result depends only on element order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Evaluates `term(i)` for `i in 0..count` and reduces the terms with [`pairwise_sum`].
pub(crate) fn reduce_terms<F>(count: usize, term: F) -> Result<f64>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    let terms: Vec<f64> = if count >= PARALLEL_THRESHOLD {
        (0..count).into_par_iter().map(&term).collect::<Result<_>>()?
    } else {
        (0..count).map(&term).collect::<Result<_>>()?
    };
    Ok(pairwise_sum(&terms))
}

/// Euclidean norm.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_small_ints() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 5050.0);
    }

    #[test]
    fn reduce_terms_is_order_stable_across_thresholds() {
        let count = PARALLEL_THRESHOLD + 17;
        let a = reduce_terms(count, |i| Ok(1.0 / (1.0 + i as f64))).unwrap();
        let b = reduce_terms(count, |i| Ok(1.0 / (1.0 + i as f64))).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
