//! N-vortex systems: Hamiltonian, momentum map and vector field.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::domain::{closest_pair, Domain, Plane, Sphere};
use crate::error::{Error, Result};
use crate::math::{Complex64, Vec3};

/// Default collision guard, relative to the domain scale.
pub const DEFAULT_MIN_SEPARATION: f64 = 1e-12;

pub type SphereState = Vec<Vec3>;
pub type PlanarState = Vec<Complex64>;

/// A domain together with the vortex strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexSystem<D: Domain> {
    domain: D,
    strengths: Vec<f64>,
    min_separation: f64,
}

pub type SphereSystem = VortexSystem<Sphere>;
pub type PlanarSystem = VortexSystem<Plane>;

impl<D: Domain> VortexSystem<D> {
    pub fn new(domain: D, strengths: Vec<f64>) -> Result<Self> {
        if strengths.is_empty() {
            return Err(Error::InvalidSystem("at least one vortex is required"));
        }
        if strengths.iter().any(|g| *g == 0.0 || !g.is_finite()) {
            return Err(Error::InvalidSystem("vortex strengths must be finite and nonzero"));
        }
        let scale = domain.scale();
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidSystem("sphere radius must be positive"));
        }
        Ok(Self {
            domain,
            strengths,
            min_separation: DEFAULT_MIN_SEPARATION * scale,
        })
    }

    /// Overrides the collision guard (absolute length).
    pub fn with_min_separation(mut self, eps: f64) -> Self {
        self.min_separation = eps;
        self
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn len(&self) -> usize {
        self.strengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strengths.is_empty()
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn total_strength(&self) -> f64 {
        self.strengths.iter().sum()
    }

    /// The system with every strength negated (the "anti" system).
    pub fn negated(&self) -> Self {
        Self {
            domain: self.domain,
            strengths: self.strengths.iter().map(|g| -g).collect(),
            min_separation: self.min_separation,
        }
    }

    /// Concatenates two systems on the same domain.
    pub fn join(&self, other: &Self) -> Self {
        let mut strengths = self.strengths.clone();
        strengths.extend_from_slice(&other.strengths);
        Self {
            domain: self.domain,
            strengths,
            min_separation: self.min_separation.min(other.min_separation),
        }
    }

    pub fn check_len(&self, points: &[D::Point]) -> Result<()> {
        if points.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: points.len(),
            });
        }
        Ok(())
    }

    /// Checks every state invariant: length, points on the phase space,
    /// and no pair closer than the collision guard.
    pub fn check_state(&self, points: &[D::Point]) -> Result<()> {
        self.check_len(points)?;
        if !points.iter().all(|p| self.domain.check_point(p)) {
            return Err(Error::InvalidSystem("point is not on the phase space"));
        }
        self.check_collisions(points)
    }

    pub fn check_collisions(&self, points: &[D::Point]) -> Result<()> {
        if let Some((pair, d2)) = closest_pair(&self.domain, points) {
            let sep = d2.sqrt();
            if !(sep >= self.min_separation) {
                return Err(Error::Collision { pair, separation: sep });
            }
        }
        Ok(())
    }

    pub fn hamiltonian(&self, points: &[D::Point]) -> Result<f64> {
        self.check_len(points)?;
        self.check_collisions(points)?;
        let mut h = 0.0;
        let g = &self.strengths;
        for m in 0..points.len() {
            for n in m + 1..points.len() {
                let d2 = self.domain.separation_sq(&points[m], &points[n]);
                h += self.domain.pair_energy(g[m], g[n], d2);
            }
        }
        Ok(h)
    }

    pub fn momentum(&self, points: &[D::Point]) -> D::Momentum {
        self.domain.momentum(&self.strengths, points)
    }

    pub fn momentum_components(&self, points: &[D::Point]) -> [f64; 3] {
        D::momentum_components(&self.momentum(points))
    }

    /// Velocities of every vortex.
    pub fn vector_field(&self, points: &[D::Point]) -> Result<Vec<D::Point>> {
        self.check_len(points)?;
        self.check_collisions(points)?;
        Ok(self.vector_field_unchecked(points))
    }

    pub(crate) fn vector_field_unchecked(&self, points: &[D::Point]) -> Vec<D::Point> {
        let mut v = alloc::vec![D::zero_point(); points.len()];
        let g = &self.strengths;
        for n in 0..points.len() {
            for m in n + 1..points.len() {
                let d2 = self.domain.separation_sq(&points[m], &points[n]);
                v[n] = v[n] + self.domain.induced_velocity(&points[n], &points[m], g[m], d2);
                v[m] = v[m] + self.domain.induced_velocity(&points[m], &points[n], g[n], d2);
            }
        }
        v
    }

    /// Analytic ambient gradient of the Hamiltonian, one entry per vortex.
    ///
    /// On the sphere the extension `ln(2R² − 2 x_m·x_n)` is differentiated.
    pub fn hamiltonian_gradient(&self, points: &[D::Point]) -> Result<Vec<D::Point>> {
        self.check_len(points)?;
        self.check_collisions(points)?;
        let mut grad = alloc::vec![D::zero_point(); points.len()];
        let g = &self.strengths;
        for m in 0..points.len() {
            for n in m + 1..points.len() {
                let (gm, gn) = self.domain.pair_energy_gradient(g[m], g[n], &points[m], &points[n]);
                grad[m] = grad[m] + gm;
                grad[n] = grad[n] + gn;
            }
        }
        Ok(grad)
    }

    /// Energy of a single pair term.
    pub fn pair_energy(&self, m: usize, n: usize, points: &[D::Point]) -> f64 {
        let d2 = self.domain.separation_sq(&points[m], &points[n]);
        self.domain.pair_energy(self.strengths[m], self.strengths[n], d2)
    }
}

impl VortexSystem<Sphere> {
    pub fn radius(&self) -> f64 {
        self.domain.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{PI, TAU};
    use alloc::vec;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hamiltonian_examples() {
        let s = VortexSystem::new(Sphere::unit(), vec![1.0, 1.0]).unwrap();
        let h = s.hamiltonian(&[Vec3::z(), -Vec3::z()]).unwrap();
        assert_relative_eq!(h, 4f64.ln() / (4.0 * PI), epsilon = 1e-15);
        let p = VortexSystem::new(Plane, vec![1.0, -1.0]).unwrap();
        assert_eq!(p.hamiltonian(&[c(0.0, 0.0), c(0.6, 0.8)]).unwrap(), 0.0);
        let q = VortexSystem::new(Plane, vec![TAU, TAU]).unwrap();
        let e = core::f64::consts::E;
        assert_relative_eq!(q.hamiltonian(&[c(0.0, 0.0), c(e, 0.0)]).unwrap(), -TAU, epsilon = 1e-14);
    }

    #[test]
    fn collisions_and_invalid_systems() {
        let p = VortexSystem::new(Plane, vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            p.hamiltonian(&[c(1.0, 1.0), c(1.0, 1.0)]),
            Err(Error::Collision { pair: (0, 1), .. })
        ));
        assert!(matches!(p.vector_field(&[c(0.0, 0.0)]), Err(Error::DimensionMismatch { expected: 2, found: 1 })));
        let loose = p.clone().with_min_separation(0.5);
        assert!(loose.vector_field(&[c(0.0, 0.0), c(0.3, 0.0)]).is_err());
        assert!(VortexSystem::new(Plane, vec![]).is_err());
        assert!(VortexSystem::new(Plane, vec![1.0, 0.0]).is_err());
        assert!(VortexSystem::new(Sphere::new(0.0), vec![1.0]).is_err());
        assert!(VortexSystem::new(Sphere::new(-2.0), vec![1.0]).is_err());
        let s = VortexSystem::new(Sphere::new(2.0), vec![1.0]).unwrap();
        assert!(s.check_state(&[Vec3::new(0.0, 0.0, 2.0 + 1e-9)]).is_err());
        assert!(s.check_state(&[Vec3::new(0.0, 0.0, 2.0)]).is_ok());
    }

    #[test]
    fn momentum_examples() {
        let s = VortexSystem::new(Sphere::new(3.0), vec![0.7, 0.7]).unwrap();
        let j = s.momentum(&[Vec3::new(0.0, 0.0, 3.0), Vec3::new(0.0, 0.0, -3.0)]);
        assert_eq!(j, Vec3::zeros());
        let (g, d) = (1.3, 0.4);
        let p = VortexSystem::new(Plane, vec![g, -g]).unwrap();
        let m = p.momentum(&[c(0.0, 0.0), c(d, 0.0)]);
        assert_relative_eq!(m.mu, g * d * d / 2.0, epsilon = 1e-15);
        assert_relative_eq!(m.nu.re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(m.nu.im, g * d, epsilon = 1e-15);
    }

    #[test]
    fn vector_field_examples() {
        let s = VortexSystem::new(Sphere::unit(), vec![2.0, 2.0]).unwrap();
        let v = s.vector_field(&[Vec3::x(), -Vec3::x()]).unwrap();
        assert_eq!(v, vec![Vec3::zeros(), Vec3::zeros()]);
        let (g, d) = (0.9, 0.25);
        let p = VortexSystem::new(Plane, vec![g, -g]).unwrap();
        let v = p.vector_field(&[c(0.0, 0.0), c(0.0, d)]).unwrap();
        for w in &v {
            assert_relative_eq!(w.norm(), g / (TAU * d), epsilon = 1e-15);
            assert_relative_eq!(w.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn field_is_derivative_of_pair_flow() {
        let h = 1e-6;
        let d = Sphere::new(1.5);
        let s = VortexSystem::new(d, vec![0.8, -1.7]).unwrap();
        let x = [Vec3::new(0.9, 0.0, 1.2), Vec3::new(0.0, -1.5, 0.0)];
        let v = s.vector_field(&x).unwrap();
        let (p, q) = d.pair_flow(&x[0], &x[1], 0.8, -1.7, h);
        let (pm, qm) = d.pair_flow(&x[0], &x[1], 0.8, -1.7, -h);
        assert_relative_eq!((p - pm) / (2.0 * h), v[0], epsilon = 1e-9);
        assert_relative_eq!((q - qm) / (2.0 * h), v[1], epsilon = 1e-9);
        let pl = VortexSystem::new(Plane, vec![0.8, 1.1]).unwrap();
        let z = [c(0.1, 0.2), c(-0.4, 0.7)];
        let v = pl.vector_field(&z).unwrap();
        let (a, b) = Plane.pair_flow(&z[0], &z[1], 0.8, 1.1, h);
        let (am, bm) = Plane.pair_flow(&z[0], &z[1], 0.8, 1.1, -h);
        assert!(((a - am) / (2.0 * h) - v[0]).norm() < 1e-9);
        assert!(((b - bm) / (2.0 * h) - v[1]).norm() < 1e-9);
    }

    #[test]
    fn analytic_gradient_matches_differences() {
        let pl = VortexSystem::new(Plane, vec![0.8, 1.1, -0.4]).unwrap();
        let z = vec![c(0.1, 0.2), c(-0.4, 0.7), c(0.9, -0.3)];
        let g = pl.hamiltonian_gradient(&z).unwrap();
        let fd = crate::bracket::gradient(&crate::bracket::FnObservable(|s: &[Complex64]| pl.hamiltonian(s).unwrap()), &pl, &z);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn hamiltonian_vector_reproduces_field() {
        let d = Sphere::new(2.0);
        let s = VortexSystem::new(d, vec![0.5, 1.5, -0.8]).unwrap();
        let x = vec![
            Vec3::new(0.0, 0.0, 2.0),
            Vec3::new(1.2, 0.0, 1.6),
            Vec3::new(0.0, -1.6, -1.2),
        ];
        let g = s.hamiltonian_gradient(&x).unwrap();
        let v = s.vector_field(&x).unwrap();
        for n in 0..3 {
            let xh = d.hamiltonian_vector(s.strengths()[n], &x[n], &g[n]);
            assert_relative_eq!(xh, v[n], epsilon = 1e-14);
        }
        let pl = VortexSystem::new(Plane, vec![0.5, 1.5, -0.8]).unwrap();
        let z = vec![c(0.0, 0.0), c(1.0, 0.3), c(-0.2, 0.9)];
        let g = pl.hamiltonian_gradient(&z).unwrap();
        let v = pl.vector_field(&z).unwrap();
        for n in 0..3 {
            assert!((Plane.hamiltonian_vector(pl.strengths()[n], &z[n], &g[n]) - v[n]).norm() < 1e-14);
        }
    }

    #[test]
    fn negated_and_joined() {
        let a = VortexSystem::new(Plane, vec![1.0, -2.0]).unwrap();
        let b = a.negated();
        assert_eq!(b.strengths(), &[-1.0, 2.0]);
        let j = a.join(&b);
        assert_eq!(j.len(), 4);
        assert_eq!(j.total_strength(), 0.0);
    }
}
