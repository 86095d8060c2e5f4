//! Three-point-bend strain and the deflection angle seen between the supports.

use super::GeometryError;

fn require_positive(name: &str, v: f64) -> Result<(), GeometryError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::Domain(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn require_non_negative(name: &str, v: f64) -> Result<(), GeometryError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::Domain(format!(
            "{name} must be non-negative and finite, got {v}"
        )))
    }
}

/// Outer-fibre flexural strain of a three-point bend: `6 D d / L^2`.
pub fn flexural_strain(deflection: f64, depth: f64, span: f64) -> Result<f64, GeometryError> {
    require_non_negative("deflection", deflection)?;
    require_positive("depth", depth)?;
    require_positive("span", span)?;
    Ok(6.0 * deflection * depth / (span * span))
}

/// Deviation from flat, in degrees, of a beam pushed down `deflection` at the
/// centre of a `span`: `2 atan(2 D / L)`. The obtuse angle between the
/// supports is `180 - deflection_angle`.
pub fn deflection_angle(deflection: f64, span: f64) -> Result<f64, GeometryError> {
    require_non_negative("deflection", deflection)?;
    require_positive("span", span)?;
    Ok((2.0 * (2.0 * deflection / span).atan()).to_degrees())
}

/// Inverse of [`deflection_angle`] in its first argument.
pub fn deflection_for_angle(angle_deg: f64, span: f64) -> Result<f64, GeometryError> {
    require_positive("span", span)?;
    if !(0.0..180.0).contains(&angle_deg) {
        return Err(GeometryError::Domain(format!(
            "deflection angle must lie in [0, 180), got {angle_deg}"
        )));
    }
    Ok(span / 2.0 * (angle_deg.to_radians() / 2.0).tan())
}

/// Outer-surface strain `t / (2 r)` of a board of depth `t` bent to radius `r`.
pub fn bend_surface_strain(total_depth: f64, bend_radius: f64) -> Result<f64, GeometryError> {
    require_positive("total depth", total_depth)?;
    require_positive("bend radius", bend_radius)?;
    Ok(total_depth / (2.0 * bend_radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_point_bend_samples() {
        // Support span 40 mm, sample depth 0.9 mm.
        let s1 = flexural_strain(3.75, 0.9, 40.0).unwrap();
        let s2 = flexural_strain(3.25, 0.9, 40.0).unwrap();
        let s3 = flexural_strain(3.5, 0.9, 40.0).unwrap();
        assert!((s1 - 0.0127).abs() <= 0.0002 && (s1 - 0.01266).abs() < 1e-5);
        assert!((s2 - 0.0110).abs() <= 0.0002 && (s2 - 0.01097).abs() < 1e-5);
        assert!((s3 - 0.0118).abs() <= 0.0002);
        assert_eq!(flexural_strain(0.0, 0.9, 40.0).unwrap(), 0.0);
    }

    #[test]
    fn obtuse_angles_between_supports() {
        for (d, obtuse) in [(3.75, 158.76), (3.25, 161.54), (3.5, 160.15)] {
            let dev = deflection_angle(d, 40.0).unwrap();
            assert!((180.0 - dev - obtuse).abs() <= 0.02, "{d}: {dev}");
        }
        assert_eq!(deflection_angle(0.0, 40.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(flexural_strain(1.0, 0.9, 0.0).is_err());
        assert!(flexural_strain(1.0, 0.0, 40.0).is_err());
        assert!(flexural_strain(-1.0, 0.9, 40.0).is_err());
        assert!(deflection_angle(1.0, -40.0).is_err());
        assert!(bend_surface_strain(0.0, 3.0).is_err());
        assert!(bend_surface_strain(0.9, 0.0).is_err());
    }

    #[test]
    fn surface_strain_examples() {
        assert!((bend_surface_strain(0.9, 3.0).unwrap() - 0.15).abs() < 1e-15);
        assert!((bend_surface_strain(0.9, 0.45).unwrap() - 1.0).abs() < 1e-15);
    }

    /// Bisection on the forward map, independent of the closed-form inverse.
    fn bisect_deflection(angle: f64, span: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while deflection_angle(hi, span).unwrap() < angle {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if deflection_angle(mid, span).unwrap() < angle {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    proptest! {
        #[test]
        fn strain_is_linear_and_inverse_square(d in 0.0f64..20.0, t in 0.01f64..5.0, l in 1.0f64..200.0, k in 0.1f64..10.0) {
            let base = flexural_strain(d, t, l).unwrap();
            let scaled_d = flexural_strain(d * k, t, l).unwrap();
            let scaled_t = flexural_strain(d, t * k, l).unwrap();
            let scaled_l = flexural_strain(d, t, l * k).unwrap();
            prop_assert!((scaled_d - base * k).abs() <= 1e-12 * (1.0 + scaled_d.abs()));
            prop_assert!((scaled_t - base * k).abs() <= 1e-12 * (1.0 + scaled_t.abs()));
            prop_assert!((scaled_l - base / (k * k)).abs() <= 1e-12 * (1.0 + base.abs()));
        }

        #[test]
        fn deflection_angle_inverts(d in 0.0f64..50.0, l in 5.0f64..200.0) {
            let a = deflection_angle(d, l).unwrap();
            prop_assert!((0.0..180.0).contains(&a));
            prop_assert!((bisect_deflection(a, l) - d).abs() <= 1e-9);
            prop_assert!((deflection_for_angle(a, l).unwrap() - d).abs() <= 1e-9 * (1.0 + d));
        }

        #[test]
        fn deflection_angle_monotone(d in 0.0f64..50.0, e in 1e-6f64..5.0, l in 5.0f64..200.0) {
            prop_assert!(deflection_angle(d + e, l).unwrap() > deflection_angle(d, l).unwrap());
        }

        #[test]
        fn surface_strain_decreases_with_radius(t in 0.1f64..5.0, r in 0.1f64..50.0, e in 1e-3f64..10.0) {
            prop_assert!(bend_surface_strain(t, r + e).unwrap() < bend_surface_strain(t, r).unwrap());
        }
    }
}
