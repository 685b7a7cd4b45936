//! Energy-momentum stability of the sphere equilibria, the resonance check
//! for `N = 4`, and linearizations of the relative vector field.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::domain::{Domain, Plane, Sphere};
use crate::error::{Error, Result};
use crate::math::{skew, Complex64, Mat3, Vec3, PI, TAU};
use crate::releq::{build_sphere_releq, RelativeEquilibrium, SphereReleq};

/// Default definiteness tolerance, relative to the spectral norm.
pub const DEFINITENESS_TOL: f64 = 1e-9;
/// Width to which [`critical_alpha`] narrows its bracket.
pub const CRITICAL_ALPHA_TOL: f64 = 1e-4;
/// Relative threshold separating the null space of the constraint rows.
const NULL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    FormallyStable,
    Indefinite,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub verdict: Verdict,
    /// Spectrum of the projected Hessian, ascending.
    pub eigenvalues: Vec<f64>,
    pub subspace_dim: usize,
    pub tolerance_used: f64,
    /// Spectral norm of the ambient augmented Hessian.
    pub hessian_norm: f64,
}

impl StabilityReport {
    pub fn lambda_min(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }

    pub fn lambda_max(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    /// `min_i(s λ_i) / max_i |λ_i|` with `s` the sign of the dominant
    /// eigenvalue: positive when definite, negative when indefinite.
    pub fn definiteness(&self) -> f64 {
        let Some(dom) = self
            .eigenvalues
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        else {
            return 1.0;
        };
        let s = dom.signum();
        let m = self.eigenvalues.iter().map(|e| s * e).fold(f64::INFINITY, f64::min);
        m / dom.abs()
    }
}

fn block_add(g: &mut DMatrix<f64>, i: usize, j: usize, b: &Mat3) {
    let mut v = g.fixed_view_mut::<3, 3>(3 * i, 3 * j);
    v += b;
}

/// Second derivative of `H − J_ξ − Σ λ̃_m |x_m|²/2` on `(ℝ³)^N`.
pub fn augmented_hessian(re: &SphereReleq) -> DMatrix<f64> {
    let n = re.state.len();
    let r = re.radius();
    let g = re.system.strengths();
    let x = &re.state;
    let mut h = DMatrix::zeros(3 * n, 3 * n);
    for m in 0..n {
        for k in m + 1..n {
            let c = g[m] * g[k] / (4.0 * PI * r * r);
            let u = 2.0 * (r * r - x[m].dot(&x[k]));
            let u2 = u * u;
            block_add(&mut h, m, m, &(x[k] * x[k].transpose() * (-4.0 * c / u2)));
            block_add(&mut h, k, k, &(x[m] * x[m].transpose() * (-4.0 * c / u2)));
            let b = Mat3::identity() * (-2.0 * c / u) - x[k] * x[m].transpose() * (4.0 * c / u2);
            block_add(&mut h, m, k, &b);
            block_add(&mut h, k, m, &b.transpose());
        }
    }
    for (m, lt) in re.scaled_multipliers().iter().enumerate() {
        block_add(&mut h, m, m, &(Mat3::identity() * -lt));
    }
    h
}

/// Orthonormal basis (columns) of the admissible subspace: tangent to the
/// spheres, tangent to the momentum level, Euclidean-orthogonal to the
/// group orbit.
pub fn admissible_basis(re: &SphereReleq) -> Result<DMatrix<f64>> {
    constrained_basis(re, true)
}

/// Orthonormal basis of the tangent space to the momentum level set.
pub fn momentum_level_basis(re: &SphereReleq) -> Result<DMatrix<f64>> {
    constrained_basis(re, false)
}

fn constrained_basis(re: &SphereReleq, transverse: bool) -> Result<DMatrix<f64>> {
    let n = re.state.len();
    let g = re.system.strengths();
    let mut rows: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(n + 6);
    for (m, x) in re.state.iter().enumerate() {
        let mut row = nalgebra::DVector::zeros(3 * n);
        row.fixed_rows_mut::<3>(3 * m).copy_from(x);
        rows.push(row);
    }
    for i in 0..3 {
        let e = Vec3::ith(i, 1.0);
        let mut mom = nalgebra::DVector::zeros(3 * n);
        let mut orbit = nalgebra::DVector::zeros(3 * n);
        for (k, x) in re.state.iter().enumerate() {
            mom[3 * k + i] = g[k];
            orbit.fixed_rows_mut::<3>(3 * k).copy_from(&e.cross(x));
        }
        rows.push(mom);
        if transverse {
            rows.push(orbit);
        }
    }
    let mut ctc = DMatrix::zeros(3 * n, 3 * n);
    for row in &rows {
        let nr = row.norm();
        if nr > 0.0 {
            ctc += row * row.transpose() / (nr * nr);
        }
    }
    let eig = SymmetricEigen::new(ctc);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..3 * n)
        .filter(|&i| eig.eigenvalues[i] < NULL_TOL * top)
        .collect();
    let expected = if transverse { (2 * n).saturating_sub(6) } else { 2 * n - 3 };
    if keep.len() != expected {
        return Err(Error::DegenerateSubspace {
            expected,
            found: keep.len(),
        });
    }
    Ok(eig.eigenvectors.select_columns(&keep))
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0, |a, e| a.max(e.abs()))
}

pub fn formal_stability(re: &SphereReleq) -> Result<StabilityReport> {
    formal_stability_with_tol(re, DEFINITENESS_TOL)
}

pub fn formal_stability_with_tol(re: &SphereReleq, tol: f64) -> Result<StabilityReport> {
    let h = augmented_hessian(re);
    let basis = admissible_basis(re)?;
    let norm = spectral_norm(&h);
    let dim = basis.ncols();
    let mut eigenvalues: Vec<f64> = if dim == 0 {
        Vec::new()
    } else {
        let p = basis.transpose() * &h * &basis;
        let p = (&p + p.transpose()) * 0.5;
        SymmetricEigen::new(p).eigenvalues.iter().copied().collect()
    };
    eigenvalues.sort_by(f64::total_cmp);
    let verdict = classify(&eigenvalues, norm, tol);
    Ok(StabilityReport {
        verdict,
        eigenvalues,
        subspace_dim: dim,
        tolerance_used: tol,
        hessian_norm: norm,
    })
}

fn classify(eigs: &[f64], norm: f64, tol: f64) -> Verdict {
    let (Some(&lo), Some(&hi)) = (eigs.first(), eigs.last()) else {
        return Verdict::FormallyStable;
    };
    if eigs.iter().any(|e| e.abs() < tol * norm) {
        return Verdict::Degenerate;
    }
    let max_abs = lo.abs().max(hi.abs());
    let min_abs = eigs.iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
    if (lo > 0.0 || hi < 0.0) && min_abs / max_abs > tol {
        Verdict::FormallyStable
    } else {
        Verdict::Indefinite
    }
}

/// The opening angle in `bracket` at which the projected Hessian of the
/// `N`-vortex family loses definiteness, located by bisection.
pub fn critical_alpha(n: usize, bracket: (f64, f64)) -> Result<f64> {
    let f = |a: f64| -> Result<f64> {
        let re = build_sphere_releq(n, a, 1.0, 1.0)?;
        Ok(formal_stability(&re)?.definiteness())
    };
    let (mut lo, mut hi) = bracket;
    let no_change = Error::NoSignChange { lo, hi };
    if !(lo < hi) {
        return Err(no_change);
    }
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo.signum() == fhi.signum() || flo == 0.0 || fhi == 0.0 {
        return Err(no_change);
    }
    while hi - lo > CRITICAL_ALPHA_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)?.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `1 − 3(9c² + 4c + 3) s² / (3c² + 2c + 3)` for the four-vortex family.
pub fn resonance_ratio(alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    1.0 - 3.0 * (9.0 * c * c + 4.0 * c + 3.0) * s * s / (3.0 * c * c + 2.0 * c + 3.0)
}

/// Domains with an analytic Jacobian of the relative vector field.
pub trait Linearize: Domain {
    fn relative_jacobian(
        sys: &crate::system::VortexSystem<Self>,
        state: &[Self::Point],
        generator: &Self::Algebra,
    ) -> DMatrix<f64>;
}

impl Linearize for Sphere {
    fn relative_jacobian(sys: &crate::system::VortexSystem<Self>, x: &[Vec3], xi: &Vec3) -> DMatrix<f64> {
        let n = x.len();
        let g = sys.strengths();
        let k = 1.0 / (TAU * sys.radius());
        let mut jac = DMatrix::zeros(3 * n, 3 * n);
        for a in 0..n {
            let mut diag = -skew(xi);
            for b in 0..n {
                if a == b {
                    continue;
                }
                let d = x[a] - x[b];
                let q = d.norm_squared();
                let c = x[b].cross(&x[a]);
                // F_a = k Γ_b (x_b × x_a)/|x_a − x_b|²
                diag += (skew(&x[b]) / q - c * d.transpose() * (2.0 / (q * q))) * (k * g[b]);
                let off = (-skew(&x[a]) / q + c * d.transpose() * (2.0 / (q * q))) * (k * g[b]);
                block_add(&mut jac, a, b, &off);
            }
            block_add(&mut jac, a, a, &diag);
        }
        jac
    }
}

impl Linearize for Plane {
    fn relative_jacobian(
        sys: &crate::system::VortexSystem<Self>,
        z: &[Complex64],
        xi: &crate::se2::Se2Algebra,
    ) -> DMatrix<f64> {
        let n = z.len();
        let g = sys.strengths();
        let mut jac = DMatrix::zeros(2 * n, 2 * n);
        for a in 0..n {
            // F_a = (i/2π) Σ Γ_b / conj(z_a − z_b); its derivative is δ ↦ A conj(δ).
            let mut diag = nalgebra::Matrix2::new(0.0, xi.rate, -xi.rate, 0.0);
            for b in 0..n {
                if a == b {
                    continue;
                }
                let d = (z[a] - z[b]).conj();
                let aa = -Complex64::new(0.0, 1.0) / (d * d) * (g[b] / TAU);
                let m = nalgebra::Matrix2::new(aa.re, aa.im, aa.im, -aa.re);
                diag += m;
                let mut v = jac.fixed_view_mut::<2, 2>(2 * a, 2 * b);
                v -= m;
            }
            let mut v = jac.fixed_view_mut::<2, 2>(2 * a, 2 * a);
            v += diag;
        }
        jac
    }
}

/// Analytic Jacobian of `ẋ − ξ_e·x` at the equilibrium, in ambient coordinates.
pub fn linearization<D: Linearize>(re: &RelativeEquilibrium<D>) -> DMatrix<f64> {
    D::relative_jacobian(&re.system, &re.state, &re.generator)
}

/// Central-difference Jacobian of the relative field with step `1e-6·scale`.
pub fn linearization_fd<D: Domain>(re: &RelativeEquilibrium<D>) -> DMatrix<f64> {
    let dim = D::DIM;
    let n = re.state.len();
    let h = 1e-6 * re.system.domain().scale();
    let d = re.system.domain();
    let rel = |s: &[D::Point]| -> Vec<D::Point> {
        let v = re.system.vector_field(s).expect("perturbed state collided");
        v.iter().zip(s).map(|(vn, x)| *vn - d.act(&re.generator, x)).collect()
    };
    let mut jac = DMatrix::zeros(dim * n, dim * n);
    let mut work = re.state.clone();
    for b in 0..n {
        for j in 0..dim {
            let x0 = D::coord(&work[b], j);
            D::set_coord(&mut work[b], j, x0 + h);
            let fp = rel(&work);
            D::set_coord(&mut work[b], j, x0 - h);
            let fm = rel(&work);
            D::set_coord(&mut work[b], j, x0);
            for a in 0..n {
                for i in 0..dim {
                    jac[(dim * a + i, dim * b + j)] = (D::coord(&fp[a], i) - D::coord(&fm[a], i)) / (2.0 * h);
                }
            }
        }
    }
    jac
}

/// Eigenvalues of a real square matrix.
pub fn spectrum(m: &DMatrix<f64>) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().map(|c| Complex64::new(c.re, c.im)).collect()
}
