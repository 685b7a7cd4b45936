//! The two phase spaces: vortices on a sphere of radius `R`, and vortices in
//! the plane.
//!
//! Each domain supplies the pairwise ingredients (energy term, induced
//! velocity, exact two-vortex flow) and its symmetry data (momentum map,
//! infinitesimal group action, symplectic weights). Everything N-body is
//! assembled from these in [`crate::system`].

#[allow(unused_imports)]
use num_traits::Float;
use core::fmt::Debug;
use core::ops::{Add, Mul, Sub};

use alloc::vec::Vec;

use crate::math::{mul_i, omega0, rotate, Complex64, Vec3, PI, TAU};
use crate::se2::{phase_integral, PlanarMomentum, Se2Algebra};

/// Relative tolerance on `|x| = R` for sphere points.
pub const SPHERE_RADIUS_TOL: f64 = 1e-12;
/// Drift of `|x|` from `R` (relative) above which the integrator reprojects.
pub const RENORMALIZE_TOL: f64 = 1e-13;

pub trait Domain: Copy + Debug + PartialEq {
    type Point: Copy
        + Debug
        + PartialEq
        + Add<Output = Self::Point>
        + Sub<Output = Self::Point>
        + Mul<f64, Output = Self::Point>;
    type Momentum: Copy + Debug + PartialEq;
    type Algebra: Copy + Debug;

    const NAME: &'static str;
    /// Number of real coordinates per vortex.
    const DIM: usize;

    /// Length scale: `R` on the sphere, 1 on the plane.
    fn scale(&self) -> f64;
    fn zero_point() -> Self::Point;
    fn coord(p: &Self::Point, i: usize) -> f64;
    fn set_coord(p: &mut Self::Point, i: usize, value: f64);
    fn check_point(&self, p: &Self::Point) -> bool;

    /// Squared separation (chord length on the sphere).
    fn separation_sq(&self, a: &Self::Point, b: &Self::Point) -> f64;
    /// One term of the Hamiltonian for a pair at squared separation `sep_sq`.
    fn pair_energy(&self, ga: f64, gb: f64, sep_sq: f64) -> f64;
    /// Gradients of [`Domain::pair_energy`] with respect to `a` and `b`
    /// (ambient extension `ln(2R² − 2a·b)` on the sphere).
    fn pair_energy_gradient(
        &self,
        ga: f64,
        gb: f64,
        a: &Self::Point,
        b: &Self::Point,
    ) -> (Self::Point, Self::Point);
    /// Velocity induced at `at` by a vortex of strength `g_from` at `from`.
    fn induced_velocity(
        &self,
        at: &Self::Point,
        from: &Self::Point,
        g_from: f64,
        sep_sq: f64,
    ) -> Self::Point;
    /// Exact time-`t` flow of the two-vortex system.
    fn pair_flow(
        &self,
        a: &Self::Point,
        b: &Self::Point,
        ga: f64,
        gb: f64,
        t: f64,
    ) -> (Self::Point, Self::Point);
    /// Projects back onto the phase space if roundoff drift exceeds
    /// [`RENORMALIZE_TOL`]; returns whether a projection happened.
    fn renormalize(&self, p: &mut Self::Point) -> bool;

    fn momentum(&self, strengths: &[f64], points: &[Self::Point]) -> Self::Momentum;
    fn momentum_components(m: &Self::Momentum) -> [f64; 3];
    /// The component `J_ξ = ⟨J, ξ⟩`.
    fn momentum_pairing(m: &Self::Momentum, xi: &Self::Algebra) -> f64;

    /// Hamiltonian vector of vortex with strength `gamma` at `p`, given the
    /// ambient gradient of the observable there (`ω(X_f, ·) = df`).
    fn hamiltonian_vector(&self, gamma: f64, p: &Self::Point, grad: &Self::Point) -> Self::Point;
    /// The weighted symplectic form of one vortex factor.
    fn symplectic_form(&self, gamma: f64, p: &Self::Point, u: &Self::Point, v: &Self::Point)
        -> f64;
    /// Infinitesimal generator of `xi` at `p`.
    fn act(&self, xi: &Self::Algebra, p: &Self::Point) -> Self::Point;
    fn point_norm(p: &Self::Point) -> f64;
}

/// Sphere of radius `radius`, points in ℝ³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub radius: f64,
}

/// The plane ℂ.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Plane;

impl Sphere {
    pub fn new(radius: f64) -> Self {
        Self { radius }
    }

    pub fn unit() -> Self {
        Self { radius: 1.0 }
    }

    /// Generator `(Γa xa + Γb xb)/(2πR l²)` of the two-vortex rotation.
    pub fn pair_generator(&self, a: &Vec3, b: &Vec3, ga: f64, gb: f64) -> Vec3 {
        let l2 = (a - b).norm_squared();
        (a * ga + b * gb) / (TAU * self.radius * l2)
    }
}

impl Domain for Sphere {
    type Point = Vec3;
    type Momentum = Vec3;
    type Algebra = Vec3;

    const NAME: &'static str = "sphere";
    const DIM: usize = 3;

    fn scale(&self) -> f64 {
        self.radius
    }

    fn zero_point() -> Vec3 {
        Vec3::zeros()
    }

    fn coord(p: &Vec3, i: usize) -> f64 {
        p[i]
    }

    fn set_coord(p: &mut Vec3, i: usize, value: f64) {
        p[i] = value;
    }

    fn check_point(&self, p: &Vec3) -> bool {
        p.iter().all(|c| c.is_finite())
            && (p.norm() - self.radius).abs() <= SPHERE_RADIUS_TOL * self.radius
    }

    // |a − b|² equals 2(R² − a·b) on the sphere and avoids cancellation
    // for close pairs.
    fn separation_sq(&self, a: &Vec3, b: &Vec3) -> f64 {
        (a - b).norm_squared()
    }

    fn pair_energy(&self, ga: f64, gb: f64, sep_sq: f64) -> f64 {
        ga * gb * sep_sq.ln() / (4.0 * PI * self.radius * self.radius)
    }

    fn pair_energy_gradient(&self, ga: f64, gb: f64, a: &Vec3, b: &Vec3) -> (Vec3, Vec3) {
        let r2 = self.radius * self.radius;
        let u = 2.0 * (r2 - a.dot(b));
        let c = -2.0 * ga * gb / (4.0 * PI * r2 * u);
        (b * c, a * c)
    }

    fn induced_velocity(&self, at: &Vec3, from: &Vec3, g_from: f64, sep_sq: f64) -> Vec3 {
        from.cross(at) * (g_from / (TAU * self.radius * sep_sq))
    }

    fn pair_flow(&self, a: &Vec3, b: &Vec3, ga: f64, gb: f64, t: f64) -> (Vec3, Vec3) {
        let w = self.pair_generator(a, b, ga, gb);
        (rotate(&w, t, a), rotate(&w, t, b))
    }

    fn renormalize(&self, p: &mut Vec3) -> bool {
        let n = p.norm();
        if (n - self.radius).abs() > RENORMALIZE_TOL * self.radius {
            *p *= self.radius / n;
            true
        } else {
            false
        }
    }

    fn momentum(&self, strengths: &[f64], points: &[Vec3]) -> Vec3 {
        let mut s = Vec3::zeros();
        for (g, x) in strengths.iter().zip(points) {
            s += x * *g;
        }
        -s / self.radius
    }

    fn momentum_components(m: &Vec3) -> [f64; 3] {
        [m.x, m.y, m.z]
    }

    fn momentum_pairing(m: &Vec3, xi: &Vec3) -> f64 {
        m.dot(xi)
    }

    fn hamiltonian_vector(&self, gamma: f64, p: &Vec3, grad: &Vec3) -> Vec3 {
        p.cross(grad) * (self.radius / gamma)
    }

    fn symplectic_form(&self, gamma: f64, p: &Vec3, u: &Vec3, v: &Vec3) -> f64 {
        let r = self.radius;
        -(gamma / (r * r * r)) * p.dot(&u.cross(v))
    }

    fn act(&self, xi: &Vec3, p: &Vec3) -> Vec3 {
        xi.cross(p)
    }

    fn point_norm(p: &Vec3) -> f64 {
        p.norm()
    }
}

impl Domain for Plane {
    type Point = Complex64;
    type Momentum = PlanarMomentum;
    type Algebra = Se2Algebra;

    const NAME: &'static str = "plane";
    const DIM: usize = 2;

    fn scale(&self) -> f64 {
        1.0
    }

    fn zero_point() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn coord(p: &Complex64, i: usize) -> f64 {
        if i == 0 {
            p.re
        } else {
            p.im
        }
    }

    fn set_coord(p: &mut Complex64, i: usize, value: f64) {
        if i == 0 {
            p.re = value;
        } else {
            p.im = value;
        }
    }

    fn check_point(&self, p: &Complex64) -> bool {
        p.re.is_finite() && p.im.is_finite()
    }

    fn separation_sq(&self, a: &Complex64, b: &Complex64) -> f64 {
        (a - b).norm_sqr()
    }

    fn pair_energy(&self, ga: f64, gb: f64, sep_sq: f64) -> f64 {
        -ga * gb * sep_sq.ln() / (4.0 * PI)
    }

    fn pair_energy_gradient(&self, ga: f64, gb: f64, a: &Complex64, b: &Complex64) -> (Complex64, Complex64) {
        let d = a - b;
        let c = -ga * gb / (4.0 * PI) * 2.0 / d.norm_sqr();
        (d * c, -d * c)
    }

    fn induced_velocity(&self, at: &Complex64, from: &Complex64, g_from: f64, sep_sq: f64) -> Complex64 {
        mul_i(at - from) * (g_from / (TAU * sep_sq))
    }

    fn pair_flow(&self, a: &Complex64, b: &Complex64, ga: f64, gb: f64, t: f64) -> (Complex64, Complex64) {
        let xi = planar_pair_generator(a, b, ga, gb);
        let phi = xi.rate * t;
        let phase = Complex64::from_polar(1.0, phi);
        let shift = xi.velocity * (t * phase_integral(phi));
        (phase * a + shift, phase * b + shift)
    }

    fn renormalize(&self, _p: &mut Complex64) -> bool {
        false
    }

    fn momentum(&self, strengths: &[f64], points: &[Complex64]) -> PlanarMomentum {
        let mut m = PlanarMomentum::default();
        for (g, z) in strengths.iter().zip(points) {
            m.mu -= g * 0.5 * z.norm_sqr();
            m.nu -= mul_i(*z) * *g;
        }
        m
    }

    fn momentum_components(m: &PlanarMomentum) -> [f64; 3] {
        m.to_array()
    }

    fn momentum_pairing(m: &PlanarMomentum, xi: &Se2Algebra) -> f64 {
        m.pair(xi)
    }

    fn hamiltonian_vector(&self, gamma: f64, _p: &Complex64, grad: &Complex64) -> Complex64 {
        -mul_i(*grad) / gamma
    }

    fn symplectic_form(&self, gamma: f64, _p: &Complex64, u: &Complex64, v: &Complex64) -> f64 {
        gamma * omega0(*u, *v)
    }

    fn act(&self, xi: &Se2Algebra, p: &Complex64) -> Complex64 {
        xi.act(*p)
    }

    fn point_norm(p: &Complex64) -> f64 {
        p.norm()
    }
}

/// The se(2) generator of the two-vortex flow:
/// `θ̇ = (Γa + Γb)/(2π d²)`, `ȧ = −i(Γa za + Γb zb)/(2π d²)`.
pub fn planar_pair_generator(a: &Complex64, b: &Complex64, ga: f64, gb: f64) -> Se2Algebra {
    let d2 = (a - b).norm_sqr();
    Se2Algebra {
        rate: (ga + gb) / (TAU * d2),
        velocity: -mul_i(a * ga + b * gb) / (TAU * d2),
    }
}

/// Squared-separation sweep used by both the model and the integrator.
pub(crate) fn closest_pair<D: Domain>(domain: &D, points: &[D::Point]) -> Option<((usize, usize), f64)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = domain.separation_sq(&points[i], &points[j]);
            if best.is_none_or(|(_, b)| d < b) {
                best = Some(((i, j), d));
            }
        }
    }
    best
}

/// Lexicographic `(m, n)`, `m < n` pair list.
pub fn lexicographic_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            v.push((i, j));
        }
    }
    v
}
