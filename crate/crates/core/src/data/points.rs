use serde::{Deserialize, Serialize};

use super::record::{PerResource, ResourceKind};
use super::{DataError, Result};

/// Daily points for one resource: `booster * (baseline - usage) / baseline`.
///
/// Usage above the baseline gives negative points; no clamping happens here.
pub fn compute_points(baseline: f64, usage: f64, booster: f64) -> Result<f64> {
    if !(baseline.is_finite() && baseline > 0.0) {
        return Err(DataError::NonPositiveBaseline(baseline));
    }
    if !(booster.is_finite() && booster > 0.0) {
        return Err(DataError::NonPositiveBooster(booster));
    }
    if !(usage.is_finite() && usage >= 0.0) {
        return Err(DataError::InvalidUsage(usage));
    }
    Ok(booster * ((baseline - usage) / baseline))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PointsConfig {
    pub boosters: PerResource<f64>,
    pub clamp_points_at_zero: bool,
}

impl Default for PointsConfig {
    fn default() -> Self {
        PointsConfig {
            boosters: PerResource::splat(1.0),
            clamp_points_at_zero: false,
        }
    }
}

impl PointsConfig {
    pub fn resource_points(
        &self,
        resource: ResourceKind,
        baseline: f64,
        usage: f64,
    ) -> Result<f64> {
        let p = compute_points(baseline, usage, self.boosters[resource])?;
        Ok(if self.clamp_points_at_zero {
            p.max(0.0)
        } else {
            p
        })
    }

    /// Sum of the per-resource points for one day.
    pub fn daily_points(
        &self,
        baseline: &PerResource<f64>,
        usage: &PerResource<f64>,
    ) -> Result<f64> {
        ResourceKind::ALL
            .into_iter()
            .map(|r| self.resource_points(r, baseline[r], usage[r]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formula_examples() {
        assert_eq!(compute_points(100.0, 80.0, 1.0).unwrap(), 0.2);
        assert_eq!(compute_points(100.0, 100.0, 5.0).unwrap(), 0.0);
        assert_eq!(compute_points(100.0, 150.0, 1.0).unwrap(), -0.5);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            compute_points(0.0, 1.0, 1.0),
            Err(DataError::NonPositiveBaseline(_))
        ));
        assert!(matches!(
            compute_points(-3.0, 1.0, 1.0),
            Err(DataError::NonPositiveBaseline(_))
        ));
        assert!(compute_points(10.0, -1.0, 1.0).is_err());
        assert!(compute_points(10.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn clamping_is_opt_in() {
        let base = PerResource::splat(100.0);
        let usage = PerResource([150.0, 50.0, 100.0, 0.0]);
        let unclamped = PointsConfig::default();
        assert_eq!(
            unclamped.daily_points(&base, &usage).unwrap(),
            -0.5 + 0.5 + 0.0 + 1.0
        );
        let clamped = PointsConfig {
            clamp_points_at_zero: true,
            ..PointsConfig::default()
        };
        assert_eq!(clamped.daily_points(&base, &usage).unwrap(), 1.5);
    }

    proptest! {
        #[test]
        fn zero_usage_earns_the_booster(b in 1e-3f64..1e4, s in 1e-3f64..1e3) {
            prop_assert_eq!(compute_points(b, 0.0, s).unwrap(), s);
        }

        #[test]
        fn strictly_decreasing_in_usage(b in 1.0f64..1e4, s in 0.1f64..10.0, u in 0.0f64..1e4, du in 1e-3f64..100.0) {
            let lo = compute_points(b, u, s).unwrap();
            let hi = compute_points(b, u + du, s).unwrap();
            prop_assert!(hi < lo);
        }
    }
}
