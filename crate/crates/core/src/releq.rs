//! Zero-momentum polygonal relative equilibria: a central vortex of
//! strength `Γ` surrounded by a regular ring of `N − 1` equal vortices.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::domain::{Domain, Plane, Sphere};
use crate::error::{Error, Result};
use crate::math::{Complex64, Mat3, Vec3, PI, TAU};
use crate::se2::Se2Algebra;
use crate::system::VortexSystem;

/// Guard on `|cos α|`; the ring strength diverges at `α = π/2`.
pub const EQUATOR_GUARD: f64 = 1e-12;

/// Multipliers of the sphere constraints, one value shared by the ring and
/// one for the central vortex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    pub outer: f64,
    pub central: f64,
}

/// A state whose motion is a one-parameter subgroup orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeEquilibrium<D: Domain> {
    pub system: VortexSystem<D>,
    pub state: Vec<D::Point>,
    pub generator: D::Algebra,
    /// Sphere only.
    pub multipliers: Option<Multipliers>,
    pub n: usize,
    /// Opening angle on the sphere, ring radius in the plane.
    pub alpha: f64,
    pub gamma: f64,
}

pub type SphereReleq = RelativeEquilibrium<Sphere>;
pub type PlanarReleq = RelativeEquilibrium<Plane>;

/// Sums over the nontrivial `N`-th roots of unity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolygonCoefficients {
    pub n: usize,
    /// `Σ 1/(e^{−2πik/N} − 1)`, by direct summation (real part).
    pub mu: f64,
    /// `Σ 1/|e^{2πik/N} − 1|²`, by direct summation.
    pub nu: f64,
    /// Imaginary part left over in the `mu` sum.
    pub mu_imag: f64,
}

impl PolygonCoefficients {
    pub fn mu_closed(&self) -> f64 {
        -0.5 * (self.n as f64 - 1.0)
    }

    pub fn nu_closed(&self) -> f64 {
        let n = self.n as f64;
        (n * n - 1.0) / 12.0
    }

    /// Largest deviation of the direct sums from the closed forms.
    pub fn closed_form_error(&self) -> f64 {
        (self.mu - self.mu_closed())
            .abs()
            .max((self.nu - self.nu_closed()).abs())
            .max(self.mu_imag.abs())
    }
}

pub fn polygon_coefficients(n: usize) -> Result<PolygonCoefficients> {
    if n < 2 {
        return Err(Error::UnsupportedN(n));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut mu = Complex64::new(0.0, 0.0);
    let mut nu = 0.0;
    for k in 1..n {
        let th = TAU * k as f64 / n as f64;
        mu += one / (Complex64::from_polar(1.0, -th) - one);
        nu += 1.0 / (Complex64::from_polar(1.0, th) - one).norm_sqr();
    }
    Ok(PolygonCoefficients {
        n,
        mu: mu.re,
        nu,
        mu_imag: mu.im,
    })
}

fn check_common(n: usize, gamma: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::UnsupportedN(n));
    }
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidSystem("central strength must be finite and nonzero"));
    }
    Ok(())
}

/// Ring strength `−Γ/((N − 1) cos α)` that makes the momentum vanish.
pub fn ring_strength(n: usize, alpha: f64, gamma: f64) -> f64 {
    -gamma / ((n as f64 - 1.0) * alpha.cos())
}

/// Angular velocity `ξ_e·k` of the sphere family.
pub fn sphere_rotation_rate(n: usize, alpha: f64, gamma: f64, radius: f64) -> f64 {
    let s = alpha.sin();
    gamma / (4.0 * PI * radius * radius * s * s) * (1.0 / (n as f64 - 1.0) + alpha.cos())
}

/// Angular velocity `θ̇_α` of the planar family with ring radius `alpha`.
pub fn planar_rotation_rate(n: usize, alpha: f64, gamma: f64) -> f64 {
    let n = n as f64;
    n / (n - 1.0) * gamma / (4.0 * PI * alpha * alpha)
}

/// Closed-form multipliers of the sphere family.
pub fn sphere_multipliers(n: usize, alpha: f64, gamma: f64, radius: f64) -> Multipliers {
    let nf = n as f64;
    let (s, c) = alpha.sin_cos();
    let r2s2 = radius * radius * s * s;
    Multipliers {
        outer: -gamma / (r2s2 * c) * (nf - 2.0) * (nf - 6.0) / (12.0 * (nf - 1.0)),
        central: -gamma / r2s2 * (c + nf / (2.0 * (nf - 1.0))),
    }
}

pub fn build_sphere_releq(n: usize, alpha: f64, gamma: f64, radius: f64) -> Result<SphereReleq> {
    check_common(n, gamma)?;
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::Domain("opening angle must lie in (0, π)"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidSystem("sphere radius must be positive"));
    }
    let (s, c) = alpha.sin_cos();
    if c.abs() < EQUATOR_GUARD {
        return Err(Error::Domain("ring strength diverges at α = π/2"));
    }
    let g1 = ring_strength(n, alpha, gamma);
    let m = n - 1;
    let mut state = Vec::with_capacity(n);
    for k in 0..m {
        let (sp, cp) = (TAU * k as f64 / m as f64).sin_cos();
        state.push(Vec3::new(radius * s * cp, radius * s * sp, radius * c));
    }
    state.push(Vec3::new(0.0, 0.0, radius));
    let mut strengths = alloc::vec![g1; m];
    strengths.push(gamma);
    Ok(RelativeEquilibrium {
        system: VortexSystem::new(Sphere::new(radius), strengths)?,
        state,
        generator: Vec3::new(0.0, 0.0, sphere_rotation_rate(n, alpha, gamma, radius)),
        multipliers: Some(sphere_multipliers(n, alpha, gamma, radius)),
        n,
        alpha,
        gamma,
    })
}

pub fn build_planar_releq(n: usize, alpha: f64, gamma: f64) -> Result<PlanarReleq> {
    check_common(n, gamma)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain("ring radius must be positive"));
    }
    let m = n - 1;
    let mut state = Vec::with_capacity(n);
    for k in 0..m {
        state.push(Complex64::from_polar(alpha, TAU * k as f64 / m as f64));
    }
    state.push(Complex64::new(0.0, 0.0));
    let mut strengths = alloc::vec![-gamma / m as f64; m];
    strengths.push(gamma);
    Ok(RelativeEquilibrium {
        system: VortexSystem::new(Plane, strengths)?,
        state,
        generator: Se2Algebra::new(planar_rotation_rate(n, alpha, gamma), Complex64::new(0.0, 0.0)),
        multipliers: None,
        n,
        alpha,
        gamma,
    })
}

/// `max_n |ẋ_n − ξ·x_n|` for an arbitrary state and generator.
pub fn relative_residual<D: Domain>(
    sys: &VortexSystem<D>,
    state: &[D::Point],
    generator: &D::Algebra,
) -> Result<f64> {
    let v = sys.vector_field(state)?;
    let d = sys.domain();
    Ok(v.iter()
        .zip(state)
        .map(|(vn, x)| D::point_norm(&(*vn - d.act(generator, x))))
        .fold(0.0, f64::max))
}

pub fn releq_residual<D: Domain>(re: &RelativeEquilibrium<D>) -> f64 {
    relative_residual(&re.system, &re.state, &re.generator).unwrap_or(f64::INFINITY)
}

impl<D: Domain> RelativeEquilibrium<D> {
    pub fn residual(&self) -> f64 {
        releq_residual(self)
    }

    pub fn total_strength(&self) -> f64 {
        self.system.total_strength()
    }
}

impl RelativeEquilibrium<Sphere> {
    pub fn radius(&self) -> f64 {
        self.system.radius()
    }

    /// Per-vortex multipliers in the stored (unscaled) form.
    pub fn multiplier_list(&self) -> Vec<f64> {
        let m = self.multipliers.unwrap_or_else(|| sphere_multipliers(self.n, self.alpha, self.gamma, self.radius()));
        let mut v = alloc::vec![m.outer; self.n - 1];
        v.push(m.central);
        v
    }

    /// `λ̃_m = −Γ_m λ_m/(2πR²)`: the multipliers of `|x_m|²/2` in the
    /// augmented Hamiltonian.
    pub fn scaled_multipliers(&self) -> Vec<f64> {
        let r = self.radius();
        self.multiplier_list()
            .iter()
            .zip(self.system.strengths())
            .map(|(l, g)| -g * l / (TAU * r * r))
            .collect()
    }

    /// The equilibrium moved by the rotation `a`.
    pub fn rotated(&self, a: &Mat3) -> Self {
        Self {
            state: self.state.iter().map(|x| a * x).collect(),
            generator: a * self.generator,
            ..self.clone()
        }
    }
}

/// `S_m = Σ_{n≠m} Γ_n x_n / l_mn²`, the left side of the stationarity
/// condition `S_m = λ_m x_m + 2πR ξ`.
pub fn stationarity_sum(sys: &VortexSystem<Sphere>, state: &[Vec3], m: usize) -> Vec3 {
    let mut s = Vec3::zeros();
    for (n, (x, g)) in state.iter().zip(sys.strengths()).enumerate() {
        if n != m {
            s += x * (*g / (state[m] - x).norm_squared());
        }
    }
    s
}

/// Multiplier of vortex `m` recovered from the stationarity condition.
pub fn multiplier_from_state(sys: &VortexSystem<Sphere>, state: &[Vec3], generator: &Vec3, m: usize) -> f64 {
    let r = sys.radius();
    (stationarity_sum(sys, state, m) - generator * (TAU * r)).dot(&state[m]) / (r * r)
}

/// `X_0 = Σ_{k≥2} x_k / l_k1²` over the ring, by direct summation.
pub fn ring_sum(re: &SphereReleq) -> Vec3 {
    let x1 = re.state[0];
    re.state[1..re.n - 1]
        .iter()
        .fold(Vec3::zeros(), |acc, x| acc + x / (x - x1).norm_squared())
}

/// Closed form of [`ring_sum`] in terms of the `(N − 1)`-gon coefficients.
pub fn ring_sum_closed(n: usize, alpha: f64, radius: f64) -> Vec3 {
    let m = (n - 1) as f64;
    let mu = -0.5 * (m - 1.0);
    let nu = (m * m - 1.0) / 12.0;
    let (s, c) = alpha.sin_cos();
    Vec3::new((mu + nu) / (radius * s), 0.0, nu * c / (radius * s * s))
}

/// Relative difference between the sphere rotation rate and the planar
/// rate at ring radius `R sin α`.
pub fn sphere_to_plane_consistency(n: usize, alpha: f64, gamma: f64, radius: f64) -> f64 {
    let sphere = sphere_rotation_rate(n, alpha, gamma, radius);
    let plane = planar_rotation_rate(n, radius * alpha.sin(), gamma);
    ((sphere - plane) / plane).abs()
}
