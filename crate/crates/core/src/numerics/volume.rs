use super::{pairwise_sum, reduce_terms, GaussRule, SphereRule};
use crate::error::{Error, Result};

/// An excluded star-shaped region `{c + s·diag(a)·θ : s < 1}` (ball or axis-aligned ellipsoid).
#[derive(Debug, Clone, PartialEq)]
pub struct StarHole {
    pub center: Vec<f64>,
    pub semi_axes: Vec<f64>,
}

impl StarHole {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        let n = center.len();
        StarHole {
            center,
            semi_axes: vec![radius; n],
        }
    }

    /// Gauge `s(x) = |diag(a)^{-1} (x - c)|`; the hole is `s < 1`.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .zip(&self.semi_axes)
            .map(|((x, c), a)| ((x - c) / a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn jacobian(&self) -> f64 {
        self.semi_axes.iter().product()
    }
}

/// Integration region in flat n-space: everything outside a set of disjoint holes,
/// optionally cut off at an outer coordinate radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub dim: usize,
    pub holes: Vec<StarHole>,
    pub outer_radius: Option<f64>,
}

impl Region {
    pub fn whole(dim: usize) -> Self {
        Region {
            dim,
            holes: Vec::new(),
            outer_radius: None,
        }
    }

    pub fn exterior(dim: usize, holes: Vec<StarHole>) -> Self {
        Region {
            dim,
            holes,
            outer_radius: None,
        }
    }

    /// `{r0 <= |x| <= r1}`; `r0 = 0` gives the closed ball.
    pub fn shell(dim: usize, r0: f64, r1: f64) -> Self {
        let holes = if r0 > 0.0 {
            vec![StarHole::ball(vec![0.0; dim], r0)]
        } else {
            Vec::new()
        };
        Region {
            dim,
            holes,
            outer_radius: Some(r1),
        }
    }
}

/// Radial × angular product rule for [`integrate_exterior_volume`].
///
/// Radial breakpoints are in gauge units `s` of the component being integrated
/// (plain coordinate radius when there are no holes). Beyond the last breakpoint the
/// tail is mapped to `t = 1/s`; the innermost panel at a hole boundary may use
/// `s = 1 + t^k` to smooth `sqrt`-type endpoint singularities.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeRule {
    pub angular: SphereRule,
    pub radial_order: usize,
    pub breakpoints: Option<Vec<f64>>,
    pub extra_breakpoints: Vec<f64>,
    pub tail: bool,
    pub singular_exponent: Option<u32>,
    /// Power `k` of the partition weights `(s_i - 1)^{-k}` when there are several holes.
    pub partition_power: i32,
}

impl VolumeRule {
    pub fn new(angular: SphereRule, radial_order: usize) -> Self {
        VolumeRule {
            angular,
            radial_order,
            breakpoints: None,
            extra_breakpoints: Vec::new(),
            tail: true,
            singular_exponent: None,
            partition_power: 8,
        }
    }

    pub fn standard(dim: usize) -> Result<Self> {
        Ok(Self::new(SphereRule::with_default_degree(dim)?, 24))
    }

    pub fn with_breakpoints(mut self, extra: &[f64]) -> Self {
        self.extra_breakpoints.extend_from_slice(extra);
        self
    }

    pub fn with_singular_exponent(mut self, k: u32) -> Self {
        self.singular_exponent = Some(k);
        self
    }

    fn panels(&self, s0: f64, s_max: Option<f64>) -> Vec<f64> {
        let default: &[f64] = if s0 > 0.0 {
            &[1.05, 1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 32.0]
        } else {
            &[0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 32.0]
        };
        let mut pts: Vec<f64> = self
            .breakpoints
            .clone()
            .unwrap_or_else(|| default.to_vec())
            .into_iter()
            .chain(self.extra_breakpoints.iter().copied())
            .filter(|&b| b > s0 && s_max.is_none_or(|m| b < m))
            .collect();
        pts.push(s0);
        if let Some(m) = s_max {
            pts.push(m);
        }
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
        pts
    }
}

/// Volume integral with a crude error bar: differences against the half-order radial rule
/// and the half-degree angular rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    pub error: f64,
}

/// `∫_region f dV_δ` in flat coordinates.
///
/// Several holes are handled with a partition of unity: each hole contributes the
/// piece `ψ_i f`, integrated in its own star coordinates, with `ψ_i ∝ (s_i - 1)^{-k}`.
pub fn integrate_exterior_volume<F>(integrand: F, region: &Region, rule: &VolumeRule) -> Result<VolumeEstimate>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    let n = region.dim;
    if rule.angular.dim() != n {
        return Err(Error::domain("angular rule dimension does not match region"));
    }
    if rule.radial_order < 2 {
        return Err(Error::domain("radial order must be at least 2"));
    }
    if region.outer_radius.is_some() {
        let centered = region.holes.iter().all(|h| {
            h.center.iter().all(|c| *c == 0.0) && h.semi_axes.windows(2).all(|w| w[0] == w[1])
        });
        if region.holes.len() > 1 || !centered {
            return Err(Error::Unsupported(
                "outer cutoff is only supported for origin-centered shells".into(),
            ));
        }
    }

    let hi = integrate_with_order(&integrand, region, rule, rule.radial_order)?;
    let lo = integrate_with_order(&integrand, region, rule, rule.radial_order / 2)?;
    let coarse = VolumeRule {
        angular: SphereRule::new(n, (rule.angular.degree() / 2).max(1))?,
        ..rule.clone()
    };
    let lo_angular = integrate_with_order(&integrand, region, &coarse, rule.radial_order)?;
    Ok(VolumeEstimate {
        value: hi,
        error: (hi - lo).abs() + (hi - lo_angular).abs(),
    })
}

fn integrate_with_order<F>(integrand: &F, region: &Region, rule: &VolumeRule, order: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    let n = region.dim;
    let gauss = GaussRule::legendre(order)?;
    let components: Vec<StarHole> = if region.holes.is_empty() {
        vec![StarHole::ball(vec![0.0; n], 1.0)]
    } else {
        region.holes.clone()
    };
    let has_holes = !region.holes.is_empty();
    let mut pieces = Vec::with_capacity(components.len());

    for (ci, comp) in components.iter().enumerate() {
        let s0 = if has_holes { 1.0 } else { 0.0 };
        let s_max = region.outer_radius.map(|r| r / comp.semi_axes[0]);
        let panels = rule.panels(s0, s_max);

        // (s, radial weight) pairs, tail handled separately
        let mut radial: Vec<(f64, f64)> = Vec::new();
        for (k, w) in panels.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            match rule.singular_exponent {
                Some(p) if k == 0 && has_holes => {
                    let p = p as f64;
                    let t_hi = (b - a).powf(1.0 / p);
                    for (t, wt) in gauss.on_interval(0.0, t_hi) {
                        radial.push((a + t.powf(p), wt * p * t.powf(p - 1.0)));
                    }
                }
                _ => radial.extend(gauss.on_interval(a, b)),
            }
        }
        if rule.tail && region.outer_radius.is_none() {
            let last = *panels.last().unwrap();
            for (t, wt) in gauss.on_interval(0.0, 1.0 / last) {
                radial.push((1.0 / t, wt / (t * t)));
            }
        }

        let jac = comp.jacobian();
        let ang = &rule.angular;
        let total = radial.len() * ang.len();
        let piece = reduce_terms(total, |idx| {
            let (s, ws) = radial[idx / ang.len()];
            let ai = idx % ang.len();
            let theta = ang.node(ai);
            let x: Vec<f64> = (0..n)
                .map(|d| comp.center[d] + s * comp.semi_axes[d] * theta[d])
                .collect();
            let weight = partition_weight(&x, ci, &region.holes, rule.partition_power);
            if weight == 0.0 {
                return Ok(0.0);
            }
            let v = integrand(&x)?;
            if !v.is_finite() {
                return Err(Error::Singularity(format!("integrand is {v} at {x:?}")));
            }
            Ok(weight * v * ws * ang.weight(ai) * jac * s.powi(n as i32 - 1))
        })?;
        if has_holes {
            check_endpoint(integrand, comp, rule, region)?;
        }
        pieces.push(piece);
    }
    Ok(pairwise_sum(&pieces))
}

fn partition_weight(x: &[f64], i: usize, holes: &[StarHole], power: i32) -> f64 {
    if holes.len() <= 1 {
        return 1.0;
    }
    let mut gauges = Vec::with_capacity(holes.len());
    for h in holes {
        let s = h.gauge(x);
        if s <= 1.0 {
            return 0.0;
        }
        gauges.push(s - 1.0);
    }
    // ψ_i = d_i^{-k} / Σ d_j^{-k} = 1 / Σ (d_i/d_j)^k
    let di = gauges[i];
    1.0 / gauges.iter().map(|dj| (di / dj).powi(power)).sum::<f64>()
}

/// Rejects endpoint behaviour like `(s-1)^{-1}` or worse at a hole boundary.
fn check_endpoint<F>(integrand: &F, comp: &StarHole, rule: &VolumeRule, region: &Region) -> Result<()>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    let n = region.dim;
    let others: Vec<&StarHole> = region.holes.iter().filter(|h| *h != comp).collect();
    let shell_mean = |d: f64| -> Result<Option<f64>> {
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for (theta, w) in rule.angular.iter() {
            let x: Vec<f64> = (0..n)
                .map(|k| comp.center[k] + (1.0 + d) * comp.semi_axes[k] * theta[k])
                .collect();
            if others.iter().any(|h| h.gauge(&x) <= 1.0) {
                continue;
            }
            acc += w * integrand(&x)?.abs();
            wsum += w;
        }
        Ok((wsum > 0.0).then(|| acc / wsum))
    };
    let (d1, d2) = (1e-6, 1e-10);
    if let (Some(g1), Some(g2)) = (shell_mean(d1)?, shell_mean(d2)?) {
        if !g2.is_finite() {
            return Err(Error::Singularity("integrand blows up at hole boundary".into()));
        }
        let (q1, q2) = (d1 * g1, d2 * g2);
        if q2 > 1e-6 && q2 >= 0.5 * q1 {
            return Err(Error::Singularity(format!(
                "integrand grows like (s-1)^-1 or faster at the boundary (d·|f| = {q2:e})"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn rule(n: usize) -> VolumeRule {
        VolumeRule::standard(n).unwrap()
    }

    #[test]
    fn zero_field_integrates_to_zero() {
        let v = integrate_exterior_volume(|_| Ok(0.0), &Region::whole(3), &rule(3)).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn shell_volume_is_exact() {
        for n in 3..=5 {
            let r = VolumeRule::new(SphereRule::new(n, 8).unwrap(), 12);
            let v = integrate_exterior_volume(|_| Ok(1.0), &Region::shell(n, 0.5, 2.5), &r).unwrap();
            let omega = crate::numerics::unit_sphere_measure(n).unwrap();
            let exact = omega / n as f64 * (2.5f64.powi(n as i32) - 0.5f64.powi(n as i32));
            assert!(((v.value - exact) / exact).abs() < 1e-8, "n={n}");
        }
    }

    #[test]
    fn piecewise_ball_field() {
        let r = rule(3).with_breakpoints(&[1.0]);
        let v = integrate_exterior_volume(
            |x| Ok(if norm(x) < 1.0 { 1.5 } else { 0.0 }),
            &Region::whole(3),
            &r,
        )
        .unwrap();
        assert_relative_eq!(v.value, 2.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn inverse_fourth_power_tail() {
        let region = Region::exterior(3, vec![StarHole::ball(vec![0.0; 3], 1.0)]);
        let v = integrate_exterior_volume(|x| Ok(norm(x).powi(-4)), &region, &rule(3)).unwrap();
        assert_relative_eq!(v.value, 4.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn sqrt_singular_boundary_with_substitution() {
        // ∫_{|x|>1} (r-1)^{-1/2} e^{-r} dV over R^3
        let region = Region::exterior(3, vec![StarHole::ball(vec![0.0; 3], 1.0)]);
        let r = rule(3).with_singular_exponent(2);
        let v = integrate_exterior_volume(
            |x| {
                let r = norm(x);
                Ok((r - 1.0).powf(-0.5) * (-r).exp())
            },
            &region,
            &r,
        )
        .unwrap();
        // 4π ∫_1^∞ r² (r-1)^{-1/2} e^{-r} dr = 4π e^{-1} Γ(1/2)(1 + 1 + 3/4)
        let exact = 4.0 * PI * (-1f64).exp() * PI.sqrt() * (1.0 + 1.0 + 0.75);
        assert_relative_eq!(v.value, exact, max_relative = 1e-9);
    }

    #[test]
    fn non_integrable_endpoint_is_rejected() {
        let region = Region::exterior(3, vec![StarHole::ball(vec![0.0; 3], 1.0)]);
        let r = rule(3).with_singular_exponent(2);
        let err = integrate_exterior_volume(|x| Ok(1.0 / (norm(x) - 1.0).powi(2)), &region, &r);
        assert!(matches!(err, Err(Error::Singularity(_))));
    }

    #[test]
    fn two_holes_partition_of_unity() {
        // Gaussian bump away from both holes; exact value π^{3/2}·(1 - tiny)
        let holes = vec![
            StarHole::ball(vec![-3.0, 0.0, 0.0], 0.5),
            StarHole::ball(vec![3.0, 0.0, 0.0], 0.5),
        ];
        let region = Region::exterior(3, holes);
        let v = integrate_exterior_volume(|x| Ok((-x.iter().map(|v| v * v).sum::<f64>()).exp()), &region, &rule(3))
            .unwrap();
        // mass of the Gaussian inside each hole is < e^{-6.25}·(4π/3)(1/8)
        assert_relative_eq!(v.value, PI.powf(1.5), max_relative = 2e-3);
    }
}
