//! Poisson brackets of scalar observables under the weighted symplectic form.
//!
//! The bracket is `{f, g} = dg(X_f) = ω(X_g, X_f)`, the rate of change of
//! `g` along the flow of `f`. With this convention and the generator bracket
//! of [`crate::se2::Se2Algebra::bracket`], planar momentum components obey
//! `{J_ξ, J_η} = J_[ξ,η] − Σ(ξ, η)`.

use alloc::vec::Vec;

use crate::domain::Domain;
use crate::system::VortexSystem;

/// Central-difference step for gradients, relative to the domain scale.
pub const FD_STEP: f64 = 1e-6;

/// A scalar function on the phase space.
pub trait Observable<D: Domain> {
    fn value(&self, sys: &VortexSystem<D>, points: &[D::Point]) -> f64;

    /// Analytic ambient gradient, when available.
    fn gradient(&self, _sys: &VortexSystem<D>, _points: &[D::Point]) -> Option<Vec<D::Point>> {
        None
    }
}

/// The Hamiltonian.
pub struct Energy;

impl<D: Domain> Observable<D> for Energy {
    fn value(&self, sys: &VortexSystem<D>, points: &[D::Point]) -> f64 {
        sys.hamiltonian(points).unwrap_or(f64::NAN)
    }

    fn gradient(&self, sys: &VortexSystem<D>, points: &[D::Point]) -> Option<Vec<D::Point>> {
        sys.hamiltonian_gradient(points).ok()
    }
}

/// A momentum component `J_ξ = ⟨J, ξ⟩`.
pub struct MomentumComponent<A>(pub A);

impl<D: Domain> Observable<D> for MomentumComponent<D::Algebra> {
    fn value(&self, sys: &VortexSystem<D>, points: &[D::Point]) -> f64 {
        D::momentum_pairing(&sys.momentum(points), &self.0)
    }
}

/// Wraps a closure as an observable (gradient by central differences).
pub struct FnObservable<F>(pub F);

impl<D: Domain, F: Fn(&[D::Point]) -> f64> Observable<D> for FnObservable<F> {
    fn value(&self, _sys: &VortexSystem<D>, points: &[D::Point]) -> f64 {
        (self.0)(points)
    }
}

/// Ambient gradient: analytic if the observable provides one, otherwise
/// central differences with step `FD_STEP * scale`.
pub fn gradient<D: Domain, O: Observable<D> + ?Sized>(
    obs: &O,
    sys: &VortexSystem<D>,
    points: &[D::Point],
) -> Vec<D::Point> {
    if let Some(g) = obs.gradient(sys, points) {
        return g;
    }
    let h = FD_STEP * sys.domain().scale();
    let mut work: Vec<D::Point> = points.to_vec();
    let mut grad = alloc::vec![D::zero_point(); points.len()];
    for n in 0..points.len() {
        for i in 0..D::DIM {
            let x0 = D::coord(&points[n], i);
            D::set_coord(&mut work[n], i, x0 + h);
            let fp = obs.value(sys, &work);
            D::set_coord(&mut work[n], i, x0 - h);
            let fm = obs.value(sys, &work);
            D::set_coord(&mut work[n], i, x0);
            D::set_coord(&mut grad[n], i, (fp - fm) / (2.0 * h));
        }
    }
    grad
}

/// Hamiltonian vector field of an observable with the given gradient.
pub fn hamiltonian_vector_field<D: Domain>(
    sys: &VortexSystem<D>,
    points: &[D::Point],
    grad: &[D::Point],
) -> Vec<D::Point> {
    points
        .iter()
        .zip(grad)
        .zip(sys.strengths())
        .map(|((p, g), gamma)| sys.domain().hamiltonian_vector(*gamma, p, g))
        .collect()
}

/// `{f, g}` from precomputed gradients.
pub fn bracket_from_gradients<D: Domain>(
    sys: &VortexSystem<D>,
    points: &[D::Point],
    grad_f: &[D::Point],
    grad_g: &[D::Point],
) -> f64 {
    let xf = hamiltonian_vector_field(sys, points, grad_f);
    let xg = hamiltonian_vector_field(sys, points, grad_g);
    let mut s = 0.0;
    for n in 0..points.len() {
        s += sys
            .domain()
            .symplectic_form(sys.strengths()[n], &points[n], &xg[n], &xf[n]);
    }
    s
}

pub fn poisson_bracket<D: Domain, F: Observable<D> + ?Sized, G: Observable<D> + ?Sized>(
    sys: &VortexSystem<D>,
    f: &F,
    g: &G,
    points: &[D::Point],
) -> f64 {
    let gf = gradient(f, sys, points);
    let gg = gradient(g, sys, points);
    bracket_from_gradients(sys, points, &gf, &gg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Plane, Sphere};
    use crate::math::{Complex64, Vec3};
    use crate::se2::{cocycle_form, Se2Algebra};
    use alloc::vec;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn planar() -> (VortexSystem<Plane>, Vec<Complex64>) {
        (
            VortexSystem::new(Plane, vec![1.0, -0.6, 2.1]).unwrap(),
            vec![c(0.3, -0.1), c(-0.5, 0.8), c(1.1, 0.6)],
        )
    }

    #[test]
    fn energy_commutes_with_itself_and_momentum() {
        let (p, z) = planar();
        assert!(poisson_bracket(&p, &Energy, &Energy, &z).abs() < 1e-14);
        let xi = Se2Algebra::new(0.7, c(0.2, -1.0));
        assert!(poisson_bracket(&p, &Energy, &MomentumComponent(xi), &z).abs() < 1e-8);
        let s = VortexSystem::new(Sphere::unit(), vec![1.0, 0.5, -0.8]).unwrap();
        let x = vec![Vec3::z(), Vec3::new(0.6, 0.0, 0.8), Vec3::new(0.0, -0.6, -0.8)];
        assert!(poisson_bracket(&s, &Energy, &Energy, &x).abs() < 1e-14);
        assert!(poisson_bracket(&s, &Energy, &MomentumComponent(Vec3::new(0.3, 1.0, -0.2)), &x).abs() < 1e-8);
    }

    #[test]
    fn bracket_drives_the_flow() {
        // {H, g} = dg(X_H), with X_H the vortex velocities.
        let (p, z) = planar();
        let v = p.vector_field(&z).unwrap();
        let probe = FnObservable(|s: &[Complex64]| s[1].re * s[2].im);
        let expect = v[1].re * z[2].im + z[1].re * v[2].im;
        assert!((poisson_bracket(&p, &Energy, &probe, &z) - expect).abs() < 1e-8);
    }

    #[test]
    fn translations() {
        let (p, z) = planar();
        let xi = Se2Algebra::new(0.0, c(1.0, 0.0));
        let eta = Se2Algebra::new(0.0, c(0.0, 1.0));
        let b = poisson_bracket(&p, &MomentumComponent(xi), &MomentumComponent(eta), &z);
        assert!((b + cocycle_form(p.total_strength(), &xi, &eta)).abs() < 1e-8);
        assert!(poisson_bracket(&p, &MomentumComponent(xi), &MomentumComponent(xi), &z).abs() < 1e-12);
    }

    #[test]
    fn rotation_momenta_close_on_the_algebra() {
        let s = VortexSystem::new(Sphere::new(1.7), vec![1.0, 0.5, -0.8]).unwrap();
        let x: Vec<Vec3> = [Vec3::new(0.2, 0.3, 0.9), Vec3::new(-0.6, 0.1, 0.2), Vec3::new(0.1, -0.9, -0.4)]
            .iter()
            .map(|v| v.normalize() * 1.7)
            .collect();
        let xi = Vec3::new(0.3, -0.7, 0.4);
        let eta = Vec3::new(-1.1, 0.2, 0.5);
        let b = poisson_bracket(&s, &MomentumComponent(xi), &MomentumComponent(eta), &x);
        let j = s.momentum(&x).dot(&-xi.cross(&eta));
        assert!((b - j).abs() < 1e-8, "{b} {j}");
    }

    proptest! {
        #[test]
        fn momentum_commutation_identity(
            pts in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 2..6),
            gam in prop::collection::vec(prop_oneof![-2.0..-0.1f64, 0.1..2.0f64], 6),
            a in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
            b in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
        ) {
            let z: Vec<Complex64> = pts.iter().map(|(x, y)| c(*x, *y)).collect();
            let sys = VortexSystem::new(Plane, gam[..z.len()].to_vec()).unwrap().with_min_separation(1e-3);
            prop_assume!(sys.check_collisions(&z).is_ok());
            let xi = Se2Algebra::new(a.0, c(a.1, a.2));
            let eta = Se2Algebra::new(b.0, c(b.1, b.2));
            let lhs = poisson_bracket(&sys, &MomentumComponent(xi), &MomentumComponent(eta), &z);
            let jb = Plane::momentum_pairing(&sys.momentum(&z), &xi.bracket(&eta));
            let sigma = cocycle_form(sys.total_strength(), &xi, &eta);
            prop_assert!((lhs - jb + sigma).abs() <= 1e-8, "{} {} {}", lhs, jb, sigma);
        }
    }
}
