//! The Euclidean group SE(2) acting on the plane, its Lie algebra, and the
//! non-equivariance cocycle of the planar vortex momentum map.


#[allow(unused_imports)]
use num_traits::Float;
use crate::math::{mul_i, omega0, Complex64};

/// A group element `(e^{iθ}, a)` acting by `z ↦ e^{iθ} z + a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se2Element {
    pub phase: Complex64,
    pub translation: Complex64,
}

/// An algebra element `(θ̇, ȧ)` with infinitesimal action `z ↦ iθ̇ z + ȧ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Se2Algebra {
    pub rate: f64,
    pub velocity: Complex64,
}

/// A point of se(2)* ≅ ℝ³, written `(μ, ν)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarMomentum {
    pub mu: f64,
    pub nu: Complex64,
}

impl PlanarMomentum {
    pub fn to_array(&self) -> [f64; 3] {
        [self.mu, self.nu.re, self.nu.im]
    }

    /// The pairing `⟨(μ, ν), (θ̇, ȧ)⟩` by the standard inner product of ℝ³.
    pub fn pair(&self, xi: &Se2Algebra) -> f64 {
        self.mu * xi.rate + (self.nu * xi.velocity.conj()).re
    }
}

impl Se2Element {
    pub fn identity() -> Self {
        Self {
            phase: Complex64::new(1.0, 0.0),
            translation: Complex64::new(0.0, 0.0),
        }
    }

    pub fn new(theta: f64, translation: Complex64) -> Self {
        Self {
            phase: Complex64::from_polar(1.0, theta),
            translation,
        }
    }

    pub fn act(&self, z: Complex64) -> Complex64 {
        self.phase * z + self.translation
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            phase: self.phase * other.phase,
            translation: self.phase * other.translation + self.translation,
        }
    }

    /// `Ad_g (θ̇, ȧ) = (θ̇, e^{iθ} ȧ − iθ̇ a)`.
    pub fn adjoint(&self, v: &Se2Algebra) -> Se2Algebra {
        Se2Algebra {
            rate: v.rate,
            velocity: self.phase * v.velocity - mul_i(self.translation) * v.rate,
        }
    }

    /// `CoAd_g (μ, ν) = (μ − ω₀(e^{iθ} ν, a), e^{iθ} ν)`.
    pub fn coadjoint(&self, m: &PlanarMomentum) -> PlanarMomentum {
        let rotated = self.phase * m.nu;
        PlanarMomentum {
            mu: m.mu - omega0(rotated, self.translation),
            nu: rotated,
        }
    }

    /// The cocycle `σ(g) = J(g·p) − CoAd_g J(p) = −(ΣΓ)(½|a|², ia)` (any `p`).
    pub fn cocycle_sigma(&self, total_strength: f64) -> PlanarMomentum {
        let a = self.translation;
        PlanarMomentum {
            mu: -total_strength * 0.5 * a.norm_sqr(),
            nu: -total_strength * mul_i(a),
        }
    }
}

impl Se2Algebra {
    pub fn new(rate: f64, velocity: Complex64) -> Self {
        Self { rate, velocity }
    }

    /// Infinitesimal generator evaluated at `z`.
    pub fn act(&self, z: Complex64) -> Complex64 {
        mul_i(z) * self.rate + self.velocity
    }

    /// `ad_ξ η = (0, i(θ̇_ξ ȧ_η − θ̇_η ȧ_ξ))`, the derivative of `Ad`.
    pub fn ad(&self, other: &Self) -> Self {
        Self {
            rate: 0.0,
            velocity: mul_i(other.velocity * self.rate - self.velocity * other.rate),
        }
    }

    /// The Lie bracket used by the momentum commutation identity: the
    /// Jacobi-Lie bracket of the generating vector fields, `[ξ, η] = −ad_ξ η`.
    pub fn bracket(&self, other: &Self) -> Self {
        let a = self.ad(other);
        Self {
            rate: 0.0,
            velocity: -a.velocity,
        }
    }

    /// The group element `exp(t ξ)`.
    pub fn exp(&self, t: f64) -> Se2Element {
        let phi = self.rate * t;
        Se2Element {
            phase: Complex64::from_polar(1.0, phi),
            translation: self.velocity * t * phase_integral(phi),
        }
    }
}

/// `(e^{iφ} − 1)/(iφ)`, with a three-term series for `|φ| < 1e-6`.
pub(crate) fn phase_integral(phi: f64) -> Complex64 {
    if phi.abs() < 1e-6 {
        Complex64::new(1.0 - phi * phi / 6.0, 0.5 * phi)
    } else {
        Complex64::new(phi.sin() / phi, (1.0 - phi.cos()) / phi)
    }
}

/// The two-form `Σ(ξ₁, ξ₂) = (ΣΓ) ω₀(ȧ₁, ȧ₂)`, derivative of the cocycle.
pub fn cocycle_form(total_strength: f64, a: &Se2Algebra, b: &Se2Algebra) -> f64 {
    if total_strength == 0.0 {
        return 0.0;
    }
    total_strength * omega0(a.velocity, b.velocity)
}

/// All four structure maps of SE(2) for a given element and algebra vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se2Structure {
    pub adjoint: Se2Algebra,
    pub coadjoint: PlanarMomentum,
    pub cocycle_sigma: PlanarMomentum,
    pub cocycle_form: f64,
}

/// Evaluates `Ad_g v`, `CoAd_g μ`, `σ(g)` and `Σ(v, w)` in one call.
pub fn se2_structure(
    g: &Se2Element,
    v: &Se2Algebra,
    w: &Se2Algebra,
    mu: &PlanarMomentum,
    total_strength: f64,
) -> Se2Structure {
    Se2Structure {
        adjoint: g.adjoint(v),
        coadjoint: g.coadjoint(mu),
        cocycle_sigma: g.cocycle_sigma(total_strength),
        cocycle_form: cocycle_form(total_strength, v, w),
    }
}
