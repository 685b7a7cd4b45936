//! The upper-hemisphere chart `φ(z) = (Re z, Im z, √(R² − |z|²))`.


#[allow(unused_imports)]
use num_traits::Float;
use crate::error::{Error, Result};
use crate::math::{Complex64, Vec3};

pub fn chart_pullback(z: Complex64, radius: f64) -> Result<Vec3> {
    let r2 = z.norm_sqr();
    if !(r2 < radius * radius) {
        return Err(Error::Domain("chart requires |z| < R"));
    }
    Ok(Vec3::new(z.re, z.im, (radius * radius - r2).sqrt()))
}

/// Inverse of [`chart_pullback`]: projects the open upper hemisphere to the disc.
pub fn chart_inverse(x: &Vec3, radius: f64) -> Result<Complex64> {
    if !(x.z > 0.0) || (x.norm() - radius).abs() > 1e-12 * radius {
        return Err(Error::Domain("point is not on the open upper hemisphere"));
    }
    Ok(Complex64::new(x.x, x.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn origin_maps_to_pole() {
        assert_eq!(chart_pullback(Complex64::new(0.0, 0.0), 2.0).unwrap(), Vec3::new(0.0, 0.0, 2.0));
    }

    #[test]
    fn boundary_is_rejected() {
        assert!(matches!(
            chart_pullback(Complex64::new(1.0, 0.0), 1.0),
            Err(Error::Domain(_))
        ));
        assert!(chart_inverse(&Vec3::new(1.0, 0.0, 0.0), 1.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(r in 0.0..0.9f64, th in 0.0..6.3f64, radius in 0.5..3.0f64) {
            let z = Complex64::from_polar(r * radius, th);
            let back = chart_inverse(&chart_pullback(z, radius).unwrap(), radius).unwrap();
            prop_assert!((back - z).norm() <= 1e-14 * radius);
        }
    }
}
