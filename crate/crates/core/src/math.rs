//! Small geometric helpers shared by the sphere and plane models.


#[allow(unused_imports)]
use num_traits::Float;

pub use num_complex::Complex64;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

pub const TAU: f64 = core::f64::consts::TAU;
pub const PI: f64 = core::f64::consts::PI;

/// Cross-product matrix: `skew(a) * b == a.cross(&b)`.
pub fn skew(a: &Vec3) -> Mat3 {
    Mat3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Rotates `x` by the rotation `exp(t * hat(omega))` using the Rodrigues formula.
///
/// The coefficients `sin(θ)/θ` and `(1 - cos θ)/θ²` are evaluated by series
/// for small angles, so `omega` need not be normalized and may vanish.
pub fn rotate(omega: &Vec3, t: f64, x: &Vec3) -> Vec3 {
    let w = omega * t;
    let theta2 = w.norm_squared();
    let (a, b) = rodrigues_coefficients(theta2);
    let wx = w.cross(x);
    x + wx * a + w.cross(&wx) * b
}

/// The rotation matrix `exp(hat(omega))`.
pub fn rotation_matrix(omega: &Vec3) -> Mat3 {
    let (a, b) = rodrigues_coefficients(omega.norm_squared());
    let k = skew(omega);
    Mat3::identity() + k * a + k * k * b
}

fn rodrigues_coefficients(theta2: f64) -> (f64, f64) {
    if theta2 < 1e-8 {
        // Truncation error of these series is below 1e-24 for theta2 < 1e-8.
        let a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
        let b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
        (a, b)
    } else {
        let theta = theta2.sqrt();
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    }
}

/// A rotation taking the north pole `k` to `to` (any unit-norm target).
///
/// The remaining freedom about `to` is fixed by rotating along the great
/// circle through `k` and `to`.
pub fn rotation_from_pole(to: &Vec3) -> Mat3 {
    let k = Vec3::z();
    let u = to.normalize();
    let axis = k.cross(&u);
    let s = axis.norm();
    let c = k.dot(&u);
    if s < 1e-15 {
        if c > 0.0 {
            Mat3::identity()
        } else {
            Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0))
        }
    } else {
        rotation_matrix(&(axis / s * s.atan2(c)))
    }
}

/// Orthonormal frame with third column `e3`, first column the component of
/// `hint` orthogonal to `e3`.
pub fn frame_from(e3: &Vec3, hint: &Vec3) -> Option<Mat3> {
    let e3 = e3.normalize();
    let e1 = hint - e3 * e3.dot(hint);
    let n = e1.norm();
    if n < 1e-14 * hint.norm().max(1e-300) {
        return None;
    }
    let e1 = e1 / n;
    let e2 = e3.cross(&e1);
    Some(Mat3::from_columns(&[e1, e2, e3]))
}

/// Imaginary unit times `z`.
#[inline]
pub fn mul_i(z: Complex64) -> Complex64 {
    Complex64::new(-z.im, z.re)
}

/// The planar symplectic form `ω₀(a, b) = -Im(a b̄)`.
#[inline]
pub fn omega0(a: Complex64, b: Complex64) -> f64 {
    -(a * b.conj()).im
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rotate_matches_matrix_and_preserves_norm() {
        let w = Vec3::new(0.3, -1.2, 0.7);
        let x = Vec3::new(1.0, 2.0, -0.5);
        let a = rotate(&w, 0.8, &x);
        let b = rotation_matrix(&(w * 0.8)) * x;
        assert_relative_eq!(a, b, epsilon = 1e-14);
        assert_relative_eq!(a.norm(), x.norm(), epsilon = 1e-14);
    }

    #[test]
    fn quarter_turn_about_z() {
        let x = rotate(&Vec3::z(), core::f64::consts::FRAC_PI_2, &Vec3::x());
        assert_relative_eq!(x, Vec3::y(), epsilon = 1e-15);
    }

    #[test]
    fn small_angle_branch_is_continuous() {
        let x = Vec3::new(0.2, 0.4, 0.9);
        let w = Vec3::new(1.0, 2.0, 3.0).normalize();
        for t in [9.99e-5, 1.0001e-4] {
            let a = rotate(&w, t, &x);
            let exact = x * t.cos() + w.cross(&x) * t.sin() + w * w.dot(&x) * (1.0 - t.cos());
            assert_relative_eq!(a, exact, epsilon = 1e-16);
        }
    }

    #[test]
    fn pole_rotation_and_frames() {
        let to = Vec3::new(0.3, -0.4, -0.2).normalize();
        let r = rotation_from_pole(&to);
        assert_relative_eq!(r * Vec3::z(), to, epsilon = 1e-14);
        assert_relative_eq!(r.transpose() * r, Mat3::identity(), epsilon = 1e-14);
        let s = rotation_from_pole(&-Vec3::z());
        assert_relative_eq!(s * Vec3::z(), -Vec3::z());
        let f = frame_from(&to, &Vec3::x()).unwrap();
        assert_relative_eq!(f.determinant(), 1.0, epsilon = 1e-14);
        assert!(frame_from(&Vec3::z(), &Vec3::z()).is_none());
    }

    #[test]
    fn omega0_convention() {
        assert_eq!(omega0(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)), 1.0);
        assert_eq!(mul_i(Complex64::new(2.0, 3.0)), Complex64::new(-3.0, 2.0));
    }
}
