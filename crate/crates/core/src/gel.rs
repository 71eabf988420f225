//! Flory-Rehner gels: free-swelling stretch, its sensitivity to the chain
//! density, the effective plate moduli and the bilayer strip.

use alloc::vec::Vec;

use crate::cylinder::{Cylinder, PiecewiseCylinder};
use crate::domain::{Cut, PlateDomain, Side};
use crate::energy::{limit_energy, Density, QuadratureOptions};
use crate::forms::{q2_sym, relax_third_column, IsotropicModuli};
use crate::math::{golden_section, ln, ln_1p, powi, sign};
use crate::quadrature::GaussLegendre;
use crate::strain::{ScalarProfile, StrainField, StrainProfile};
use crate::tensor::{Mat2, Mat3, Orth2, RigidMotion3, Rot3, Sym2, Sym3};
use crate::{Error, Result};

/// Stretches closer to one than this are reported as no swelling.
pub const NO_SWELLING_TOL: f64 = 1e-4;

/// Smallest stretch excess probed when bracketing the swelling minimizer.
const SCAN_START: f64 = 1e-150;

/// Material and environment constants of a Flory-Rehner gel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GelParameters {
    /// Volume per solvent molecule.
    pub v: f64,
    /// Reference chain density.
    pub nbar: f64,
    /// Flory interaction parameter.
    pub chi: f64,
    /// Environmental coefficient.
    pub delta: f64,
}

impl GelParameters {
    pub fn new(v: f64, nbar: f64, chi: f64, delta: f64) -> Result<Self> {
        let p = GelParameters { v, nbar, chi, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.v, self.nbar, self.chi, self.delta].iter().all(|x| x.is_finite()) {
            return Err(Error::GelParameters("parameters must be finite".into()));
        }
        if !(self.chi > 0.0 && self.chi <= 0.5) {
            return Err(Error::GelParameters(alloc::format!("chi must lie in (0, 1/2], got {}", self.chi)));
        }
        if self.delta < 0.0 {
            return Err(Error::GelParameters(alloc::format!("delta must be nonnegative, got {}", self.delta)));
        }
        if !(self.v * self.nbar > 0.0) {
            return Err(Error::GelParameters("v * nbar must be positive".into()));
        }
        Ok(())
    }

    /// `v N̄`.
    pub fn vn(&self) -> f64 {
        self.v * self.nbar
    }

    fn with_nbar(&self, nbar: f64) -> GelParameters {
        GelParameters { nbar, ..*self }
    }
}

/// Mixing energy as a function of the excess volume `e = J − 1 ≥ 0`.
fn mixing_excess(e: f64, chi: f64) -> f64 {
    if e == 0.0 {
        return 0.0;
    }
    let j = 1.0 + e;
    e * (ln(e) - ln_1p(e)) + chi * e / j
}

/// `ln(1 − u) + u` without cancellation for small `u`.
fn ln_one_minus_plus(u: f64) -> f64 {
    if u > 0.5 {
        return ln_1p(-u) + u;
    }
    // −Σ_{k≥2} uᵏ/k
    let mut sum = 0.0;
    let mut power = u;
    for k in 2..200 {
        power *= u;
        let term = power / k as f64;
        sum -= term;
        if term <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn mixing_slope_excess(e: f64, chi: f64) -> f64 {
    let j = 1.0 + e;
    if e < 1.0 {
        return ln(e) - ln_1p(e) + 1.0 / j + chi / (j * j);
    }
    let u = 1.0 / j;
    ln_one_minus_plus(u) + chi * u * u
}

fn mixing_curvature_excess(e: f64, chi: f64) -> f64 {
    let j = 1.0 + e;
    1.0 / (j * j * e) - 2.0 * chi / (j * j * j)
}

/// `(J − 1) ln((J − 1)/J) + χ(J − 1)/J` for `J ≥ 1`.
pub fn mixing_energy(j: f64, chi: f64) -> Result<f64> {
    if !(j >= 1.0) || !j.is_finite() {
        return Err(Error::GelParameters(alloc::format!("volume ratio must be finite and at least 1, got {j}")));
    }
    if j == 1.0 {
        return Ok(0.0);
    }
    let inv = 1.0 / j;
    Ok((j - 1.0) * ln_1p(-inv) + chi * (j - 1.0) * inv)
}

/// Derivative of [`mixing_energy`] for `J > 1`.
pub fn mixing_slope(j: f64, chi: f64) -> f64 {
    mixing_slope_excess(j - 1.0, chi)
}

/// Second derivative of [`mixing_energy`] for `J > 1`.
pub fn mixing_curvature(j: f64, chi: f64) -> f64 {
    mixing_curvature_excess(j - 1.0, chi)
}

/// Homogeneous Flory-Rehner density at chain density `n`; `None` when
/// `det F < 1`.
pub fn flory_rehner(p: &GelParameters, n: f64, f: &Mat3) -> Option<f64> {
    let det = f.det();
    if !(det >= 1.0) {
        return None;
    }
    let mix = mixing_excess(det - 1.0, p.chi);
    Some(0.5 * p.v * n * (f.frobenius_sq() - 3.0) + mix + p.delta * (det - 1.0))
}

/// First Piola stress of [`flory_rehner`], for `det F > 1`.
pub fn flory_rehner_stress(p: &GelParameters, n: f64, f: &Mat3) -> Mat3 {
    let det = f.det();
    *f * (p.v * n) + f.cofactor() * (mixing_slope_excess(det - 1.0, p.chi) + p.delta)
}

/// `J − 1` for `J = (1 + s)³`, accurate for small `s`.
fn cube_excess(s: f64) -> f64 {
    s * (3.0 + s * (3.0 + s))
}

/// Energy of the isotropic stretch `(1 + s) I` and its first two
/// derivatives with respect to the stretch.
fn stretch_energy(p: &GelParameters, n: f64, s: f64) -> (f64, f64, f64) {
    let l = 1.0 + s;
    let e = cube_excess(s);
    let vn = p.v * n;
    let w1 = mixing_slope_excess(e, p.chi) + p.delta;
    let w2 = mixing_curvature_excess(e, p.chi);
    let f = 0.5 * vn * 3.0 * s * (2.0 + s) + mixing_excess(e, p.chi) + p.delta * e;
    let f1 = 3.0 * vn * l + 3.0 * l * l * w1;
    let f2 = 3.0 * vn + 6.0 * l * w1 + 9.0 * powi(l, 4) * w2;
    (f, f1, f2)
}

/// Result of the free-swelling solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwellingSolution {
    pub alpha: f64,
    /// `f′(α)`.
    pub first_order_residual: f64,
    /// `f″(α)`.
    pub second_derivative: f64,
}

fn solve_stretch(p: &GelParameters, n: f64) -> Result<SwellingSolution> {
    let slope = |s: f64| stretch_energy(p, n, s).1;
    // Geometric scan for a sign change of f′ on (0, ∞) in the excess s.
    let mut lo = SCAN_START;
    if slope(lo) >= 0.0 {
        return Err(Error::NoSwelling { excess: 0.0, slope_at_one: slope(lo) });
    }
    let mut hi = lo;
    loop {
        hi *= 2.0;
        if slope(hi) > 0.0 {
            break;
        }
        lo = hi;
        if hi > 1e8 {
            return Err(Error::GelParameters("no bounded free-swelling stretch".into()));
        }
    }
    let (s0, _) = golden_section(|s| stretch_energy(p, n, s).0, lo, hi, 1e-10 * hi);
    // Newton on f′ with a bisection safeguard.
    let (mut a, mut b) = (lo, hi);
    let mut s = s0;
    for _ in 0..200 {
        let (_, f1, f2) = stretch_energy(p, n, s);
        if f1 < 0.0 {
            a = s;
        } else {
            b = s;
        }
        let mut next = s - f1 / f2;
        if !(next > a && next < b) || !(f2 > 0.0) {
            next = 0.5 * (a + b);
        }
        if (next - s).abs() <= 4.0 * f64::EPSILON * (1.0 + s) {
            s = next;
            break;
        }
        s = next;
    }
    let (_, f1, f2) = stretch_energy(p, n, s);
    if s < NO_SWELLING_TOL {
        return Err(Error::NoSwelling { excess: s, slope_at_one: slope(SCAN_START) });
    }
    Ok(SwellingSolution { alpha: 1.0 + s, first_order_residual: f1, second_derivative: f2 })
}

/// Minimizes `f(λ) = (vN̄/2)(3λ² − 3) + W_vol(λ³) + δ(λ³ − 1)` over `λ ≥ 1`.
///
/// Because `W_vol′(1⁺) = −∞` the minimizer is always above one; stretches
/// within [`NO_SWELLING_TOL`] of one are reported as no swelling.
pub fn free_swelling_stretch(p: &GelParameters) -> Result<SwellingSolution> {
    p.validate()?;
    solve_stretch(p, p.nbar)
}

/// Sensitivity `dα/dN̄`, computed by differences and by implicit
/// differentiation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaEstimate {
    pub finite_difference: f64,
    pub implicit: f64,
}

impl ThetaEstimate {
    pub fn value(&self) -> f64 {
        self.implicit
    }

    pub fn relative_disagreement(&self) -> f64 {
        (self.finite_difference - self.implicit).abs() / self.implicit.abs()
    }
}

pub fn theta_coefficient(p: &GelParameters) -> Result<ThetaEstimate> {
    let sol = free_swelling_stretch(p)?;
    let central = |eps: f64| -> Result<f64> {
        let plus = solve_stretch(&p.with_nbar(p.nbar + eps), p.nbar + eps)?.alpha;
        let minus = solve_stretch(&p.with_nbar(p.nbar - eps), p.nbar - eps)?.alpha;
        Ok((plus - minus) / (2.0 * eps))
    };
    // Richardson-extrapolated central differences; the larger step keeps
    // the rounding noise of the solves small.
    let eps = 1e-3 * p.nbar;
    let (coarse, fine) = (central(eps)?, central(0.5 * eps)?);
    let finite_difference = (4.0 * fine - coarse) / 3.0;
    let implicit = -3.0 * p.v * sol.alpha / sol.second_derivative;
    Ok(ThetaEstimate { finite_difference, implicit })
}

/// Effective plate moduli of the gel at the swollen state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GelModuli {
    /// Shear modulus `G`.
    pub shear: f64,
    /// Plate coefficient `Λ(α)` of `tr²` in the plate form.
    pub plate_lambda: f64,
    /// Second Lamé coefficient of the 3D Hessian.
    pub bulk_lambda: f64,
    /// Largest mismatch between the relaxed Hessian and the fitted form.
    pub fit_residual: f64,
}

impl GelModuli {
    /// `β = Λ / (2G)`.
    pub fn beta(&self) -> f64 {
        self.plate_lambda / (2.0 * self.shear)
    }

    /// Plate form `2G|F_sym|² + Λ tr²F`.
    pub fn q2(&self, f: &Sym2) -> f64 {
        q2_sym(self.shear, self.beta(), f)
    }

    /// `(2G + 2Λ)/(2G + Λ)`: ratio of principal to target curvature for
    /// isotropic targets.
    pub fn round_factor(&self) -> f64 {
        (2.0 * self.shear + 2.0 * self.plate_lambda) / (2.0 * self.shear + self.plate_lambda)
    }

    pub fn isotropic(&self) -> Result<IsotropicModuli> {
        IsotropicModuli::new(self.shear, self.bulk_lambda)
    }
}

/// Hessian of the density at `αI` from Richardson-extrapolated centered
/// differences of the analytic stress.
fn stress_hessian(p: &GelParameters, alpha: f64) -> [[f64; 9]; 9] {
    let base = Mat3::IDENTITY * alpha;
    let unit = |b: usize| {
        let mut e = Mat3::ZERO;
        e.0[b / 3][b % 3] = 1.0;
        e
    };
    let diff = |b: usize, h: f64| {
        let dp = flory_rehner_stress(p, p.nbar, &(base + unit(b) * h)) - flory_rehner_stress(p, p.nbar, &(base - unit(b) * h));
        dp * (0.5 / h)
    };
    let step = 1e-5 * alpha;
    let mut hess = [[0.0; 9]; 9];
    for b in 0..9 {
        let coarse = diff(b, step);
        let fine = diff(b, 0.5 * step);
        let rich = (fine * 4.0 - coarse) * (1.0 / 3.0);
        for a in 0..9 {
            hess[a][b] = rich.0[a / 3][a % 3];
        }
    }
    for a in 0..9 {
        for b in 0..a {
            let s = 0.5 * (hess[a][b] + hess[b][a]);
            hess[a][b] = s;
            hess[b][a] = s;
        }
    }
    hess
}

/// Fits `(G, Λ)` to the plate relaxation of the numerical Hessian at `αI`.
pub fn gel_moduli(p: &GelParameters, alpha: f64) -> Result<GelModuli> {
    p.validate()?;
    if !(alpha > 1.0) {
        return Err(Error::GelParameters(alloc::format!("swollen stretch must exceed 1, got {alpha}")));
    }
    let hess = stress_hessian(p, alpha);
    let q = |f: &Mat3| {
        let x: Vec<f64> = (0..9).map(|a| f.0[a / 3][a % 3]).collect();
        let mut acc = 0.0;
        for a in 0..9 {
            for b in 0..9 {
                acc += x[a] * hess[a][b] * x[b];
            }
        }
        acc
    };
    let relaxed = |g: &Sym2| relax_third_column(q, &g.to_mat()).map(|(v, _)| v);
    let stretch = relaxed(&Sym2::diag(1.0, 0.0))?;
    let shear_probe = relaxed(&Sym2::new(0.0, 1.0, 0.0))?;
    // Q₂(e₁⊗e₁) = 2G + Λ and Q₂(e₁⊗e₂ + e₂⊗e₁) = 4G.
    let shear = shear_probe / 4.0;
    let plate_lambda = stretch - 2.0 * shear;
    if !(shear > 0.0) || !(2.0 * shear + plate_lambda > 0.0) {
        return Err(Error::GelParameters(alloc::format!(
            "swollen Hessian is not positive on plate strains (G = {shear}, Λ = {plate_lambda})"
        )));
    }
    let fitted = |g: &Sym2| 2.0 * shear * g.frobenius_sq() + plate_lambda * g.trace() * g.trace();
    let probes = [Sym2::IDENTITY, Sym2::diag(1.0, -1.0), Sym2::new(0.3, -0.7, 1.1), Sym2::diag(0.0, 1.0)];
    let mut fit_residual: f64 = 0.0;
    for g in probes {
        let v = relaxed(&g)?;
        fit_residual = fit_residual.max((v - fitted(&g)).abs() / (1.0 + v.abs()));
    }
    // Λ = 2Gλ/(2G + λ) inverted for the 3D coefficient.
    let bulk_lambda = 2.0 * shear * plate_lambda / (2.0 * shear - plate_lambda);
    Ok(GelModuli { shear, plate_lambda, bulk_lambda, fit_residual })
}

/// Closed-form moduli at the swollen state: `G = vN̄`,
/// `λ = α⁴ W_vol″(α³) − vN̄`.
pub fn gel_moduli_closed_form(p: &GelParameters, alpha: f64) -> GelModuli {
    let shear = p.vn();
    let bulk_lambda = powi(alpha, 4) * mixing_curvature(powi(alpha, 3), p.chi) - shear;
    let plate_lambda = 2.0 * shear * bulk_lambda / (2.0 * shear + bulk_lambda);
    GelModuli { shear, plate_lambda, bulk_lambda, fit_residual: 0.0 }
}

/// Everything derived from the gel parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedGelConstants {
    pub swelling: SwellingSolution,
    pub theta: ThetaEstimate,
    pub moduli: GelModuli,
}

impl DerivedGelConstants {
    pub fn alpha(&self) -> f64 {
        self.swelling.alpha
    }
}

pub fn derive_constants(p: &GelParameters) -> Result<DerivedGelConstants> {
    let swelling = free_swelling_stretch(p)?;
    let theta = theta_coefficient(p)?;
    let moduli = gel_moduli(p, swelling.alpha)?;
    Ok(DerivedGelConstants { swelling, theta, moduli })
}

/// Thickness profiles `g` of the chain density perturbation, one per piece,
/// each with zero thickness mean.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainDensityPerturbation {
    profiles: Vec<ScalarProfile>,
}

impl ChainDensityPerturbation {
    pub fn new(profiles: Vec<ScalarProfile>) -> Result<Self> {
        let gauss = GaussLegendre::new(16)?;
        for (k, g) in profiles.iter().enumerate() {
            g.validate()?;
            let mean = g.integrate(&gauss, |_, v| v);
            let scale = g.integrate(&gauss, |_, v| v.abs()).max(1.0);
            if mean.abs() > 1e-12 * scale {
                return Err(Error::MeanViolation { subdomain: k, mean });
            }
        }
        Ok(ChainDensityPerturbation { profiles })
    }

    pub fn profiles(&self) -> &[ScalarProfile] {
        &self.profiles
    }

    pub fn profile(&self, k: usize) -> &ScalarProfile {
        &self.profiles[k]
    }
}

/// `a = 12 Θ ∫ t g(t) dt` on piece `k`; the target curvature is `a I₂`.
pub fn gel_target_curvature(g: &ChainDensityPerturbation, theta: f64, k: usize) -> Result<Sym2> {
    let gauss = GaussLegendre::new(16)?;
    let profile = g.profiles.get(k).ok_or(Error::Unclassified { expected: k + 1, got: g.profiles.len() })?;
    let a = 12.0 * theta * profile.moment(1, &gauss);
    Ok(Sym2::IDENTITY * a)
}

/// Spontaneous strain `b/α I₃` with `b = Θg` per piece, the unit-well
/// version of the gel problem on `domain`.
pub fn unit_strain_field(
    domain: PlateDomain,
    g: &ChainDensityPerturbation,
    theta: f64,
    alpha: f64,
) -> Result<StrainField> {
    let profiles = g
        .profiles
        .iter()
        .map(|p| StrainProfile::scaled(p.clone(), Sym3::isotropic(theta / alpha)))
        .collect::<Result<Vec<_>>>()?;
    StrainField::new(domain, profiles)
}

/// The strip `(−d, d) × (0, ℓ)` cut along `x₁ = 0`; piece 0 is the left half.
pub fn bilayer_domain(d: f64, ell: f64) -> Result<PlateDomain> {
    PlateDomain::new([-d, 0.0], [d, ell], alloc::vec![Cut::polyline(alloc::vec![[0.0, 0.0], [0.0, ell]], Side::Right)])
}

/// The two-arc `α`-isometry
/// `y₁ = α(αr₁(cos(x₁/αr₁) − 1), σ₁αr₁ sin(x₁/αr₁), σ₂x₂)` and
/// `y₂ = α(σ₀αr₂(cos(x₁/αr₂) − 1), σ₁αr₂ sin(x₁/αr₂), σ₂x₂)`
/// with unsigned radii `r₁, r₂` and signs `σ = (σ₀, σ₁, σ₂)`.
pub fn bilayer_surface(domain: &PlateDomain, alpha: f64, radii: [f64; 2], sigma: [f64; 3]) -> Result<PiecewiseCylinder> {
    let [s0, s1, s2] = sigma;
    if sigma.iter().any(|s| s.abs() != 1.0) {
        return Err(Error::Bilayer { a1: radii[0], a2: radii[1] });
    }
    // diag(σ₀ or 1, σ₁, σ₂) C(x) written as R C(ρx) with R a rotation.
    let piece = |lead: f64, r: f64| -> Result<Cylinder> {
        let flip = lead * s1 * s2;
        let rho = Orth2::new(Mat2::diag(1.0, flip))?;
        let rotation = Rot3::new(Mat3::diag(lead, s1, s2 * flip))?;
        Cylinder::new(alpha * r, RigidMotion3 { translation: [0.0; 3], rotation }, rho)
    };
    let cylinders = alloc::vec![piece(1.0, radii[0])?, piece(s0, radii[1])?];
    PiecewiseCylinder::from_parts(domain.clone(), cylinders, alpha)
}

/// One minimizing configuration of the bilayer strip.
#[derive(Clone, Debug, PartialEq)]
pub struct BilayerBranch {
    /// `(σ₀, σ₁, σ₂)`.
    pub sigma: [f64; 3],
    pub surface: PiecewiseCylinder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BilayerResult {
    pub constants: DerivedGelConstants,
    /// Target curvature coefficients `a₁, a₂`.
    pub targets: [f64; 2],
    /// Principal curvatures `𝔯ₖ = aₖ(2G + 2Λ)/(2G + Λ)`.
    pub curvatures: [f64; 2],
    /// Branches for `σ₁ = −1` and `σ₁ = +1`.
    pub branches: [BilayerBranch; 2],
}

/// Minimizers of the gel plate energy on the strip `(−d, d) × (0, ℓ)` with
/// perturbation `g₁` on the left half and `g₂` on the right.
pub fn bilayer_minimizers(
    p: &GelParameters,
    g1: &ScalarProfile,
    g2: &ScalarProfile,
    d: f64,
    ell: f64,
) -> Result<BilayerResult> {
    let constants = derive_constants(p)?;
    let pert = ChainDensityPerturbation::new(alloc::vec![g1.clone(), g2.clone()])?;
    let theta = constants.theta.value();
    let a1 = gel_target_curvature(&pert, theta, 0)?.xx;
    let a2 = gel_target_curvature(&pert, theta, 1)?.xx;
    let scale = a1.abs().max(a2.abs());
    if a1 == 0.0 || a2 == 0.0 || (a1 - a2).abs() <= 1e-12 * scale {
        return Err(Error::Bilayer { a1, a2 });
    }
    let factor = constants.moduli.round_factor();
    let curvatures = [a1 * factor, a2 * factor];
    let radii = [1.0 / curvatures[0].abs(), 1.0 / curvatures[1].abs()];
    let domain = bilayer_domain(d, ell)?;
    let s0 = sign(curvatures[0]) * sign(curvatures[1]);
    let branch = |s1: f64| -> Result<BilayerBranch> {
        let sigma = [s0, s1, s1 * sign(curvatures[0])];
        Ok(BilayerBranch { sigma, surface: bilayer_surface(&domain, constants.alpha(), radii, sigma)? })
    };
    Ok(BilayerResult { constants, targets: [a1, a2], curvatures, branches: [branch(-1.0)?, branch(1.0)?] })
}

/// `(1/24) ∫ Q₂(A_y − a I₂)` of the gel plate energy for an `α`-isometry
/// made of cylinders, with `Q₂` from the fitted gel moduli.
pub fn gel_bending_energy(surface: &PiecewiseCylinder, targets: &[f64], moduli: &GelModuli) -> f64 {
    let domain = surface.domain();
    (0..domain.piece_count())
        .map(|k| {
            let area = crate::quadrature::signed_area(domain.piece(k)).abs();
            area * moduli.q2(&(surface.curvature_in(k) - Sym2::IDENTITY * targets[k])) / 24.0
        })
        .sum()
}

/// Bending energy of one bilayer branch computed two ways.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RescalingCheck {
    /// Curvature part of the limit energy of the `1/α`-rescaled unit
    /// isometry, with strain `b/α I₃` and moduli `α²(G, λ)`.
    pub unit_problem: f64,
    /// [`gel_bending_energy`] of the swollen surface.
    pub gel_problem: f64,
}

impl RescalingCheck {
    pub fn difference(&self) -> f64 {
        (self.unit_problem - self.gel_problem).abs()
    }
}

/// Checks that the change of variables `F ↦ αF` maps the gel plate energy of
/// a bilayer branch onto the unit-well limit energy.
pub fn rescaling_check(
    result: &BilayerResult,
    branch: usize,
    g: &ChainDensityPerturbation,
    opts: &QuadratureOptions,
) -> Result<RescalingCheck> {
    let surface = &result.branches[branch].surface;
    let alpha = result.constants.alpha();
    let unit = surface.scaled(1.0 / alpha);
    let field = unit_strain_field(surface.domain().clone(), g, result.constants.theta.value(), alpha)?;
    let m = result.constants.moduli;
    let a2 = alpha * alpha;
    let moduli = IsotropicModuli::new(a2 * m.shear, a2 * m.bulk_lambda)?;
    let unit_problem = limit_energy(&unit, &field, &moduli, opts)?.curvature_part;
    Ok(RescalingCheck { unit_problem, gel_problem: gel_bending_energy(surface, &result.targets, &m) })
}

/// Gel density after the change of variables `F ↦ αF`, shifted so that its
/// minimum over `F` is zero at every point:
/// `W^h(x, αF) − min W^h(x, ·)` with chain density `N̄ + h g`.
#[derive(Clone, Debug)]
pub struct RescaledGelDensity<'a> {
    pub params: GelParameters,
    pub alpha: f64,
    pub perturbation: &'a ChainDensityPerturbation,
    pub moduli: GelModuli,
}

impl Density for RescaledGelDensity<'_> {
    fn value(&self, piece: usize, t: f64, h: f64, f: &Mat3) -> f64 {
        let n = self.params.nbar + h * self.perturbation.profile(piece).eval(t);
        let local = self.params.with_nbar(n);
        let Some(w) = flory_rehner(&local, n, &(*f * self.alpha)) else {
            return f64::INFINITY;
        };
        let floor = solve_stretch(&local, n).map(|s| stretch_energy(&local, n, s.alpha - 1.0).0).unwrap_or(0.0);
        (w - floor).max(0.0)
    }

    fn moduli(&self) -> IsotropicModuli {
        let a2 = self.alpha * self.alpha;
        IsotropicModuli::new(a2 * self.moduli.shear, a2 * self.moduli.bulk_lambda).expect("swollen gel moduli are positive")
    }

    fn breakpoints(&self, piece: usize) -> &[f64] {
        self.perturbation.profile(piece).breakpoints()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bench() -> GelParameters {
        GelParameters::new(1.0, 0.001, 0.45, 0.0).unwrap()
    }

    #[test]
    fn mixing_energy_examples() {
        assert_eq!(mixing_energy(1.0, 0.3).unwrap(), 0.0);
        assert!((mixing_energy(1e6, 0.3).unwrap() - (0.3 - 1.0)).abs() < 1e-5);
        assert!(mixing_energy(0.99, 0.3).is_err());
    }

    #[test]
    fn mixing_derivatives_match_differences() {
        for j in [1.01, 1.5, 3.0, 40.0] {
            let h = 1e-6 * j;
            let fd = (mixing_energy(j + h, 0.4).unwrap() - mixing_energy(j - h, 0.4).unwrap()) / (2.0 * h);
            assert!((fd - mixing_slope(j, 0.4)).abs() < 1e-7 * (1.0 + fd.abs()));
            let fd2 = (mixing_slope(j + h, 0.4) - mixing_slope(j - h, 0.4)) / (2.0 * h);
            assert!((fd2 - mixing_curvature(j, 0.4)).abs() < 1e-6 * (1.0 + fd2.abs()));
        }
    }

    #[test]
    fn mixing_slope_keeps_relative_accuracy_for_large_volumes() {
        let chi = 0.3;
        for j in [2.0f64, 1e2, 1e4, 1e7] {
            let u = 1.0 / j;
            // ln(1 − u) + u + χu² expanded to well below rounding.
            let series = (chi - 0.5) * u * u - (3..200).map(|k| u.powi(k) / k as f64).sum::<f64>();
            let got = mixing_slope(j, chi);
            assert!((got - series).abs() <= 1e-14 * series.abs(), "J = {j}: {got} vs {series}");
        }
    }

    #[test]
    fn swelling_stretch_is_interior() {
        let sol = free_swelling_stretch(&bench()).unwrap();
        assert!(sol.alpha > 1.0);
        assert!(sol.first_order_residual.abs() < 1e-10);
        assert!(sol.second_derivative > 0.0);
    }

    #[test]
    fn strong_environment_suppresses_swelling() {
        let p = GelParameters::new(1.0, 0.001, 0.45, 10.0).unwrap();
        assert!(matches!(free_swelling_stretch(&p), Err(Error::NoSwelling { .. })));
    }

    #[test]
    fn theta_routes_agree() {
        let t = theta_coefficient(&bench()).unwrap();
        assert!(t.value() != 0.0);
        assert!(t.relative_disagreement() < 1e-6, "{t:?}");
    }

    #[test]
    fn fitted_moduli_match_closed_form() {
        let p = bench();
        let alpha = free_swelling_stretch(&p).unwrap().alpha;
        let m = gel_moduli(&p, alpha).unwrap();
        let c = gel_moduli_closed_form(&p, alpha);
        assert!(m.fit_residual < 1e-8);
        assert!((m.shear - c.shear).abs() < 1e-8 * c.shear);
        assert!((m.plate_lambda - c.plate_lambda).abs() < 1e-7 * c.plate_lambda.abs().max(c.shear));
        assert!(m.shear > 0.0 && m.plate_lambda > 0.0);
    }

    #[test]
    fn target_curvature_examples() {
        let odd = ChainDensityPerturbation::new(alloc::vec![ScalarProfile::Polynomial(alloc::vec![0.0, 1.0])]).unwrap();
        assert!((gel_target_curvature(&odd, 1.0, 0).unwrap() - Sym2::IDENTITY).max_abs() < 1e-14);
        let even = ChainDensityPerturbation::new(alloc::vec![ScalarProfile::Polynomial(alloc::vec![-1.0 / 12.0, 0.0, 1.0])]).unwrap();
        assert!(gel_target_curvature(&even, 1.0, 0).unwrap().max_abs() < 1e-15);
        let biased = ScalarProfile::Polynomial(alloc::vec![0.1, 1.0]);
        assert!(matches!(ChainDensityPerturbation::new(alloc::vec![biased]), Err(Error::MeanViolation { .. })));
    }

    #[test]
    fn bilayer_signs() {
        let p = bench();
        let up = ScalarProfile::Polynomial(alloc::vec![0.0, 1.0]);
        let up2 = ScalarProfile::Polynomial(alloc::vec![0.0, 2.5]);
        let theta_sign = sign(theta_coefficient(&p).unwrap().value());
        let same = bilayer_minimizers(&p, &up, &up2, 1.0, 2.0).unwrap();
        assert_eq!(same.branches[0].sigma[0], 1.0);
        let flipped_g = ScalarProfile::Polynomial(alloc::vec![0.0, -0.5 * theta_sign]);
        let first = ScalarProfile::Polynomial(alloc::vec![0.0, theta_sign]);
        let mixed = bilayer_minimizers(&p, &first, &flipped_g, 1.0, 2.0).unwrap();
        assert_eq!(mixed.branches[1].sigma[0], -1.0);
        for r in [&same, &mixed] {
            for b in &r.branches {
                let s = &b.surface;
                assert!(s.max_position_jump() < 1e-12 && s.max_gradient_jump() < 1e-12);
                for k in 0..2 {
                    assert!((s.curvature_in(k) - Sym2::diag(r.curvatures[k], 0.0)).max_abs() < 1e-10 * r.curvatures[k].abs());
                }
            }
        }
    }

    #[test]
    fn unit_rescaling_reproduces_gel_bending() {
        let p = bench();
        let g1 = ScalarProfile::Polynomial(alloc::vec![0.0, 1.0]);
        let g2 = ScalarProfile::Polynomial(alloc::vec![0.0, -0.4]);
        let r = bilayer_minimizers(&p, &g1, &g2, 1.0, 2.0).unwrap();
        let pert = ChainDensityPerturbation::new(alloc::vec![g1, g2]).unwrap();
        for b in 0..2 {
            let c = rescaling_check(&r, b, &pert, &QuadratureOptions::default()).unwrap();
            assert!(c.gel_problem > 0.0);
            assert!(c.difference() < 1e-8 * c.gel_problem.max(1.0), "{c:?}");
        }
    }

    #[test]
    fn rescaled_density_has_a_rotation_well_with_quadratic_growth() {
        use crate::energy::{dist_sq_to_well, Density};
        use crate::tensor::Rot3;
        let p = bench();
        let c = derive_constants(&p).unwrap();
        let pert = ChainDensityPerturbation::new(alloc::vec![ScalarProfile::Polynomial(alloc::vec![0.0, 1.0])]).unwrap();
        let w = RescaledGelDensity { params: p, alpha: c.alpha(), perturbation: &pert, moduli: c.moduli };
        let rotations = [Rot3::about_z(0.0), Rot3::about_z(0.7), Rot3::about_axis([1.0, -2.0, 0.5], 2.1)];
        let directions = [
            Mat3::diag(1.0, 0.0, 0.0),
            Mat3::diag(1.0, -1.0, 0.3),
            Mat3([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
            Mat3([[0.2, 0.5, -0.4], [0.1, -0.3, 0.9], [0.6, 0.0, 0.4]]),
        ];
        let floor = c.alpha() * c.alpha() * c.moduli.shear;
        for r in rotations {
            let rm = r.matrix();
            // The well is SO(3) and sits at zero.
            assert!(w.value(0, 0.2, 0.0, &rm).abs() < 1e-15);
            for d in directions {
                for eps in [1e-3, 1e-2] {
                    let f = rm * (Mat3::IDENTITY + d * eps);
                    let v = w.value(0, 0.2, 0.0, &f);
                    // Frame indifference, up to the rounding of `w − min w`.
                    let turned = Rot3::about_axis([0.3, 0.4, 1.0], -1.3).matrix() * f;
                    assert!((w.value(0, 0.2, 0.0, &turned) - v).abs() <= 1e-13);
                    // Growth away from the well.
                    let dist = dist_sq_to_well(&f, &Mat3::IDENTITY);
                    assert!(v >= 0.5 * floor * dist, "v = {v:e}, dist² = {dist:e}");
                }
            }
        }
    }
}
