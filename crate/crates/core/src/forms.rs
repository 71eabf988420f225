//! Isotropic quadratic energy densities: the 3D form, its plane relaxation
//! and the thickness-averaged form used by the plate energy.

use crate::math::KahanSum;
use crate::quadrature::GaussLegendre;
use crate::strain::StrainProfile;
use crate::tensor::{Mat2, Mat3, Sym2, Vec3};
use crate::{Error, Result};

/// Lamé pair of an isotropic linear material.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsotropicModuli {
    mu: f64,
    lambda: f64,
}

impl IsotropicModuli {
    /// Requires `mu > 0` and `2 mu + 3 lambda > 0`, i.e. a positive definite
    /// 3D form on symmetric matrices.
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu.is_finite() && lambda.is_finite()) {
            return Err(Error::Moduli("moduli must be finite".into()));
        }
        if mu <= 0.0 {
            return Err(Error::Moduli(alloc::format!("mu must be positive, got {mu}")));
        }
        if 2.0 * mu + 3.0 * lambda <= 0.0 {
            return Err(Error::Moduli(alloc::format!("2 mu + 3 lambda must be positive, got {}", 2.0 * mu + 3.0 * lambda)));
        }
        Ok(IsotropicModuli { mu, lambda })
    }

    /// Moduli with the given plate ratio `beta = lambda / (2 mu + lambda)`.
    pub fn from_beta(mu: f64, beta: f64) -> Result<Self> {
        if !(beta > -0.5 && beta < 1.0) {
            return Err(Error::Moduli(alloc::format!("beta must lie in (-1/2, 1) to come from Lamé moduli, got {beta}")));
        }
        IsotropicModuli::new(mu, 2.0 * mu * beta / (1.0 - beta))
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.lambda / (2.0 * self.mu + self.lambda)
    }
}

/// `2μ|F_sym|² + λ(tr F)²`.
pub fn q3(m: &IsotropicModuli, f: &Mat3) -> f64 {
    2.0 * m.mu * f.sym().frobenius_sq() + m.lambda * f.trace() * f.trace()
}

/// Plate form in closed form, `2μ(|G_sym|² + β(tr G)²)`.
pub fn q2_closed(m: &IsotropicModuli, g: &Mat2) -> f64 {
    q2_sym(m.mu, m.beta(), &g.sym())
}

/// Plate form on a symmetric argument, parametrized by `(μ, β)` directly.
pub fn q2_sym(mu: f64, beta: f64, g: &Sym2) -> f64 {
    let tr = g.trace();
    2.0 * mu * (g.frobenius_sq() + beta * tr * tr)
}

/// Symmetric bilinear form associated with [`q2_sym`].
pub fn q2_bilinear(mu: f64, beta: f64, a: &Sym2, b: &Sym2) -> f64 {
    2.0 * mu * (a.inner(b) + beta * a.trace() * b.trace())
}

/// Plate form obtained by relaxing the third column: minimizes
/// `Q₃(Ĝ + d ⊗ e₃)` over `d ∈ ℝ³` and returns the value with the minimizer.
pub fn q2_relaxed(m: &IsotropicModuli, g: &Mat2) -> Result<(f64, Vec3)> {
    relax_third_column(|f| q3(m, f), g)
}

/// Minimizer of [`q2_relaxed`] in closed form: only the normal stretch
/// `−λ tr G / (2μ + λ)` is nonzero.
pub fn relaxation_minimizer(m: &IsotropicModuli, g: &Sym2) -> Vec3 {
    [0.0, 0.0, -m.lambda * g.trace() / (2.0 * m.mu + m.lambda)]
}

/// Relaxation of an arbitrary quadratic form on 3×3 matrices.
///
/// The first-order system is assembled through polarization
/// `B(X, Y) = (Q(X + Y) − Q(X − Y)) / 4` and solved exactly.
pub fn relax_third_column<Q: Fn(&Mat3) -> f64>(q: Q, g: &Mat2) -> Result<(f64, Vec3)> {
    let ghat = g.hat();
    let basis = |i: usize| {
        let mut e = Mat3::ZERO;
        e.0[i][2] = 1.0;
        e
    };
    let bil = |x: &Mat3, y: &Mat3| 0.25 * (q(&(*x + *y)) - q(&(*x - *y)));
    let mut a = Mat3::ZERO;
    let mut rhs = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            a.0[i][j] = bil(&basis(i), &basis(j));
        }
        rhs[i] = -bil(&ghat, &basis(i));
    }
    let scale = a.max_abs();
    if !(scale > 0.0) || a.det().abs() <= 1e-14 * scale * scale * scale {
        return Err(Error::Singular);
    }
    let d = a.inverse().ok_or(Error::Singular)?.apply(rhs);
    let mut f = ghat;
    for (i, di) in d.iter().enumerate() {
        f.0[i][2] += di;
    }
    Ok((q(&f).max(0.0), d))
}

/// The four terms of the thickness-averaged plate form:
/// a bending part and three strain-only parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QbarTerms {
    /// `Q₂(G − 12∫tB̌) / 12`.
    pub bending: f64,
    /// `∫Q₂(B̌)`.
    pub mean_square: f64,
    /// `−Q₂(∫B̌)`.
    pub mean_part: f64,
    /// `−12 Q₂(∫tB̌)`.
    pub moment_part: f64,
}

impl QbarTerms {
    pub fn total(&self) -> f64 {
        [self.bending, self.mean_square, self.mean_part, self.moment_part]
            .into_iter()
            .collect::<KahanSum>()
            .value()
    }

    /// Sum of the three terms that do not depend on `G`.
    pub fn strain_only(&self) -> f64 {
        [self.mean_square, self.mean_part, self.moment_part].into_iter().collect::<KahanSum>().value()
    }
}

/// `∫ Q₂(D + tG − B̌(t)) dt` with `D` the thickness mean of `B̌`, which is
/// the unique minimizer over `D`.
pub fn qbar2(m: &IsotropicModuli, profile: &StrainProfile, g: &Sym2, gauss: &GaussLegendre) -> f64 {
    let (mu, beta) = (m.mu(), m.beta());
    let mean = profile.plane_moment(0, gauss);
    profile.integrate(gauss, |t, b| q2_sym(mu, beta, &(mean + *g * t - b.check())))
}

pub fn qbar2_decomposed(m: &IsotropicModuli, profile: &StrainProfile, g: &Sym2, gauss: &GaussLegendre) -> QbarTerms {
    let (mu, beta) = (m.mu(), m.beta());
    let mean = profile.plane_moment(0, gauss);
    let first = profile.plane_moment(1, gauss);
    QbarTerms {
        bending: q2_sym(mu, beta, &(*g - first * 12.0)) / 12.0,
        mean_square: profile.integrate(gauss, |_, b| q2_sym(mu, beta, &b.check())),
        mean_part: -q2_sym(mu, beta, &mean),
        moment_part: -12.0 * q2_sym(mu, beta, &first),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Sym3;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn q3_examples() {
        let m = IsotropicModuli::new(1.0, 0.0).unwrap();
        assert_eq!(q3(&m, &Mat3::IDENTITY), 6.0);
        let skew = Mat3([[0.0, 1.0, 2.0], [-1.0, 0.0, -3.0], [-2.0, 3.0, 0.0]]);
        assert_eq!(q3(&m, &skew), 0.0);
        let m = IsotropicModuli::new(2.0, 1.0).unwrap();
        assert_eq!(q3(&m, &Mat3::diag(1.0, 2.0, 3.0)), 92.0);
    }

    #[test]
    fn q2_examples() {
        let m = IsotropicModuli::new(1.0, 0.0).unwrap();
        assert_eq!(q2_closed(&m, &Mat2::IDENTITY), 4.0);
        assert_eq!(IsotropicModuli::new(1.0, 2.0).unwrap().beta(), 0.5);
        let m = IsotropicModuli::new(1.0, 1.0).unwrap();
        assert!(approx(q2_closed(&m, &Mat2::IDENTITY), 20.0 / 3.0, 1e-15));
        let (v, d) = q2_relaxed(&m, &Mat2::IDENTITY).unwrap();
        assert!(approx(v, 20.0 / 3.0, 1e-13));
        // Isotropic minimizer only stretches the normal direction.
        assert!(d[0].abs() < 1e-14 && d[1].abs() < 1e-14);
        assert!(approx(d[2], -2.0 / 3.0, 1e-14));
        assert_eq!(q2_relaxed(&m, &Mat2::ZERO).unwrap(), (0.0, [0.0; 3]));
    }

    #[test]
    fn moduli_validation() {
        assert!(IsotropicModuli::new(0.0, 1.0).is_err());
        assert!(IsotropicModuli::new(1.0, -0.7).is_err());
        assert!(IsotropicModuli::new(1.0, -0.6).is_ok());
        let m = IsotropicModuli::from_beta(1.5, 0.3).unwrap();
        assert!(approx(m.beta(), 0.3, 1e-15));
    }

    #[test]
    fn decomposition_for_odd_linear_profile() {
        let gauss = GaussLegendre::new(16).unwrap();
        let m = IsotropicModuli::new(1.3, 0.4).unwrap();
        let mm = Sym2::new(0.7, -0.2, 0.3);
        let profile = StrainProfile::polynomial(alloc::vec![Sym3::ZERO, Sym3::from_plane(mm)]).unwrap();
        let terms = qbar2_decomposed(&m, &profile, &mm, &gauss);
        let q = q2_sym(m.mu(), m.beta(), &mm);
        assert!(terms.bending.abs() < 1e-15);
        assert!(approx(terms.mean_square, q / 12.0, 1e-14));
        assert!(terms.mean_part.abs() < 1e-15);
        assert!(approx(terms.moment_part, -q / 12.0, 1e-14));
        assert!(qbar2(&m, &profile, &mm, &gauss).abs() < 1e-14);
    }
}
