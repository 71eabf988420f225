//! Plate limit energy, its pointwise lower bound, rescaled 3D energies and
//! the recovery-sequence experiment linking the two.

use alloc::vec::Vec;

use crate::classify::pointwise_lower_bound_density;
use crate::cylinder::{Cylinder, PiecewiseCylinder};
use crate::domain::PlateDomain;
use crate::forms::{q2_sym, qbar2_decomposed, relaxation_minimizer, IsotropicModuli};
use crate::math::{log_log_slope, sqrt, KahanSum};
use crate::quadrature::{GaussLegendre, PlanarRule};
use crate::strain::{CompatibilityReport, InPlaneDisplacement, StrainField, Witness};
use crate::tensor::{add3, dot3, scale3, sub3, Mat2, Mat3, Mat3x2, Sym2, Sym3, Vec2, Vec3};
use crate::{Error, Result};

/// Largest accepted `|∇yᵀ∇y − I|` at quadrature nodes.
pub const ISOMETRY_TOL: f64 = 1e-6;
/// Step of finite-difference curvature estimates.
pub const FD_STEP: f64 = 1e-4;
/// Thickness values used by the default Γ experiment.
pub const DEFAULT_H_LADDER: [f64; 5] = [0.1, 0.05, 0.025, 0.0125, 0.00625];

/// A deformed mid-plane evaluated piece by piece.
pub trait SampledSurface {
    fn position(&self, piece: usize, x: Vec2) -> Vec3;
    fn gradient(&self, piece: usize, x: Vec2) -> Mat3x2;

    fn normal(&self, piece: usize, x: Vec2) -> Vec3 {
        self.gradient(piece, x).unit_normal()
    }

    /// `(∇y)ᵀ∇ν`; finite differences of the normal unless overridden.
    fn curvature(&self, piece: usize, x: Vec2) -> Sym2 {
        fd_curvature(self, piece, x, FD_STEP)
    }
}

/// `(∇y)ᵀ∇ν` with `∇ν` from centered differences of the normal.
pub fn fd_curvature<S: SampledSurface + ?Sized>(s: &S, piece: usize, x: Vec2, step: f64) -> Sym2 {
    let g = s.gradient(piece, x);
    let dn = |j: usize| {
        let mut a = x;
        let mut b = x;
        a[j] += step;
        b[j] -= step;
        scale3(0.5 / step, sub3(s.normal(piece, a), s.normal(piece, b)))
    };
    let (d1, d2) = (dn(0), dn(1));
    let (g1, g2) = (g.col(0), g.col(1));
    let off = 0.5 * (dot3(g1, d2) + dot3(g2, d1));
    Sym2::new(dot3(g1, d1), off, dot3(g2, d2))
}

impl SampledSurface for PiecewiseCylinder {
    fn position(&self, piece: usize, x: Vec2) -> Vec3 {
        self.eval_in(piece, x)
    }

    fn gradient(&self, piece: usize, x: Vec2) -> Mat3x2 {
        self.gradient_in(piece, x)
    }

    fn normal(&self, piece: usize, x: Vec2) -> Vec3 {
        self.normal_in(piece, x)
    }

    fn curvature(&self, piece: usize, _x: Vec2) -> Sym2 {
        self.curvature_in(piece)
    }
}

impl SampledSurface for Cylinder {
    fn position(&self, _piece: usize, x: Vec2) -> Vec3 {
        self.eval(x)
    }

    fn gradient(&self, _piece: usize, x: Vec2) -> Mat3x2 {
        Cylinder::gradient(self, x)
    }

    fn normal(&self, _piece: usize, x: Vec2) -> Vec3 {
        Cylinder::normal(self, x)
    }

    fn curvature(&self, _piece: usize, _x: Vec2) -> Sym2 {
        self.second_fundamental_form()
    }
}

/// Quadrature resolution shared by the energy routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureOptions {
    /// Subdivisions per triangle edge of each piece.
    pub cells: usize,
    /// Gauss nodes per direction on each sub-triangle.
    pub plane_nodes: usize,
    /// Gauss nodes per thickness segment in 3D integrals.
    pub thickness_nodes: usize,
    /// Gauss nodes for thickness moments of strain profiles.
    pub profile_nodes: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { cells: 16, plane_nodes: 2, thickness_nodes: 8, profile_nodes: 16 }
    }
}

impl QuadratureOptions {
    fn plane_rules(&self, domain: &PlateDomain) -> Result<Vec<PlanarRule>> {
        let gauss = GaussLegendre::new(self.plane_nodes)?;
        (0..domain.piece_count()).map(|k| domain.piece_rule(k, &gauss, self.cells)).collect()
    }
}

/// An energy split into its curvature-dependent part and the additional
/// terms that depend only on the strain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySplit {
    pub curvature_part: f64,
    pub additional: f64,
}

impl EnergySplit {
    pub fn total(&self) -> f64 {
        self.curvature_part + self.additional
    }
}

/// Additional terms per unit area of each piece: half the strain-only part
/// of the thickness-averaged form.
fn additional_densities(field: &StrainField, m: &IsotropicModuli, gauss: &GaussLegendre) -> Vec<f64> {
    field
        .profiles()
        .iter()
        .map(|p| 0.5 * qbar2_decomposed(m, p, &Sym2::ZERO, gauss).strain_only())
        .collect()
}

/// `1/24 ∫ Q₂(A_y − Ā) + ad.t.` for an isometric surface.
pub fn limit_energy<S: SampledSurface + ?Sized>(
    surface: &S,
    field: &StrainField,
    m: &IsotropicModuli,
    opts: &QuadratureOptions,
) -> Result<EnergySplit> {
    let gauss_t = GaussLegendre::new(opts.profile_nodes)?;
    let rules = opts.plane_rules(field.domain())?;
    let extra = additional_densities(field, m, &gauss_t);
    let (mu, beta) = (m.mu(), m.beta());
    let mut bending = KahanSum::new();
    let mut additional = KahanSum::new();
    for (k, rule) in rules.iter().enumerate() {
        let target = field.profile(k).target_curvature(&gauss_t);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let defect = (surface.gradient(k, *x).gram() - Mat2::IDENTITY).max_abs();
            if !(defect <= ISOMETRY_TOL) {
                return Err(Error::NotAnIsometry { defect, x: x[0], y: x[1] });
            }
            bending.add(w * q2_sym(mu, beta, &(surface.curvature(k, *x) - target)) / 24.0);
        }
        additional.add(extra[k] * rule.area());
    }
    Ok(EnergySplit { curvature_part: bending.value(), additional: additional.value() })
}

/// `1/24 ∫ min_F Q₂(F − Ā) + ad.t.` over rank-one symmetric `F`.
pub fn lower_bound(field: &StrainField, m: &IsotropicModuli, opts: &QuadratureOptions) -> Result<EnergySplit> {
    let gauss_t = GaussLegendre::new(opts.profile_nodes)?;
    let rules = opts.plane_rules(field.domain())?;
    let extra = additional_densities(field, m, &gauss_t);
    let mut bending = KahanSum::new();
    let mut additional = KahanSum::new();
    for (k, rule) in rules.iter().enumerate() {
        let target = field.profile(k).target_curvature(&gauss_t);
        let density = pointwise_lower_bound_density(&target, m.beta(), m.mu())?;
        let area = rule.area();
        bending.add(density * area / 24.0);
        additional.add(extra[k] * area);
    }
    Ok(EnergySplit { curvature_part: bending.value(), additional: additional.value() })
}

/// A 3D energy density family `W^h(x, F)` evaluated at thickness `t`.
pub trait Density {
    fn value(&self, piece: usize, t: f64, h: f64, f: &Mat3) -> f64;

    /// Quadratic form `Q₃ = D²W(I)` of the limiting density, as moduli.
    fn moduli(&self) -> IsotropicModuli;

    /// Thickness values where the density may jump.
    fn breakpoints(&self, _piece: usize) -> &[f64] {
        &[]
    }
}

/// `dist²(F, SO(3)U)` for symmetric positive definite `U`.
pub fn dist_sq_to_well(f: &Mat3, u: &Mat3) -> f64 {
    let m = *f * *u;
    if m.det() > 0.0 {
        if let Some(r) = m.polar_rotation() {
            return (*f - r * *u).frobenius_sq();
        }
    }
    let s = (m.transpose() * m).sym().eigenvalues().map(|v| sqrt(v.max(0.0)));
    let sign = if m.det() < 0.0 { -1.0 } else { 1.0 };
    (f.frobenius_sq() + u.frobenius_sq() - 2.0 * (s[0] + s[1] + sign * s[2])).max(0.0)
}

fn well(field: &StrainField, piece: usize, t: f64, h: f64) -> Mat3 {
    Mat3::IDENTITY + field.profile(piece).eval(t).to_mat() * h
}

/// `dist²(F, SO(3)(I + hB))`, whose limiting form is `2|F_sym|²`.
#[derive(Clone, Copy, Debug)]
pub struct DistanceToWell<'a> {
    pub field: &'a StrainField,
}

impl Density for DistanceToWell<'_> {
    fn value(&self, piece: usize, t: f64, h: f64, f: &Mat3) -> f64 {
        dist_sq_to_well(f, &well(self.field, piece, t, h))
    }

    fn moduli(&self) -> IsotropicModuli {
        IsotropicModuli::new(1.0, 0.0).expect("unit shear modulus is valid")
    }

    fn breakpoints(&self, piece: usize) -> &[f64] {
        self.field.profile(piece).breakpoints()
    }
}

/// `μ|E|² + (λ/2)(tr E)²` with `E = (FᵀF − U²)/2` and `U = I + hB`.
#[derive(Clone, Copy, Debug)]
pub struct StVenant<'a> {
    pub field: &'a StrainField,
    pub moduli: IsotropicModuli,
}

impl Density for StVenant<'_> {
    fn value(&self, piece: usize, t: f64, h: f64, f: &Mat3) -> f64 {
        let u = well(self.field, piece, t, h);
        let e = (f.transpose() * *f - u * u) * 0.5;
        let tr = e.trace();
        self.moduli.mu() * e.frobenius_sq() + 0.5 * self.moduli.lambda() * tr * tr
    }

    fn moduli(&self) -> IsotropicModuli {
        self.moduli
    }

    fn breakpoints(&self, piece: usize) -> &[f64] {
        self.field.profile(piece).breakpoints()
    }
}

/// A deformation of the reference slab `ω × (−½, ½)`, evaluated per piece.
pub trait Deformation3 {
    fn value(&self, piece: usize, x: Vec3) -> Vec3;
    /// Unscaled gradient `(∂₁y | ∂₂y | ∂₃y)`.
    fn gradient(&self, piece: usize, x: Vec3) -> Mat3;
}

/// `∫_Ω W^h(x, ∇_h y) dx` with `∇_h y = (∂₁y | ∂₂y | ∂₃y / h)`.
pub fn energy_3d<D: Deformation3 + ?Sized, W: Density + ?Sized>(
    h: f64,
    y: &D,
    density: &W,
    domain: &PlateDomain,
    opts: &QuadratureOptions,
) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Degenerate(alloc::format!("thickness ratio must be positive, got {h}")));
    }
    let gauss_t = GaussLegendre::new(opts.thickness_nodes)?;
    let rules = opts.plane_rules(domain)?;
    let mut acc = KahanSum::new();
    for (k, rule) in rules.iter().enumerate() {
        let breaks = density.breakpoints(k);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let mut a = -0.5;
            for &b in breaks.iter().chain(core::iter::once(&0.5)) {
                for (t, wt) in gauss_t.on(a, b) {
                    let mut g = y.gradient(k, [x[0], x[1], t]);
                    for row in g.0.iter_mut() {
                        row[2] /= h;
                    }
                    acc.add(w * wt * density.value(k, t, h, &g));
                }
                a = b;
            }
        }
    }
    Ok(acc.value())
}

/// Nodal samples of a 3D map on a box grid, differentiated by centered
/// differences and interpolated trilinearly.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDeformation {
    lo: Vec3,
    spacing: Vec3,
    n: [usize; 3],
    values: Vec<Vec3>,
}

impl GridDeformation {
    /// Samples `f` on `n[0] × n[1] × n[2]` nodes covering `[lo, hi]`.
    pub fn sample<F: FnMut(Vec3) -> Vec3>(lo: Vec3, hi: Vec3, n: [usize; 3], mut f: F) -> Result<Self> {
        if n.iter().any(|&k| k < 3) {
            return Err(Error::GridTooSmall { min: 3, got: n.iter().copied().min().unwrap_or(0) });
        }
        let spacing = [0, 1, 2].map(|i| (hi[i] - lo[i]) / (n[i] - 1) as f64);
        if spacing.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Degenerate("grid box has empty extent".into()));
        }
        let mut values = Vec::with_capacity(n[0] * n[1] * n[2]);
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    values.push(f([
                        lo[0] + i as f64 * spacing[0],
                        lo[1] + j as f64 * spacing[1],
                        lo[2] + k as f64 * spacing[2],
                    ]));
                }
            }
        }
        Ok(GridDeformation { lo, spacing, n, values })
    }

    fn at(&self, idx: [usize; 3]) -> Vec3 {
        self.values[(idx[2] * self.n[1] + idx[1]) * self.n[0] + idx[0]]
    }

    /// Second-order difference quotient at a node, one-sided on the boundary.
    fn node_gradient(&self, idx: [usize; 3]) -> Mat3 {
        let mut g = Mat3::ZERO;
        for d in 0..3 {
            let (mut a, mut b) = (idx, idx);
            let col = if idx[d] == 0 {
                b[d] += 1;
                let mut c = idx;
                c[d] += 2;
                let (p0, p1, p2) = (self.at(idx), self.at(b), self.at(c));
                [0, 1, 2].map(|r| (-3.0 * p0[r] + 4.0 * p1[r] - p2[r]) / (2.0 * self.spacing[d]))
            } else if idx[d] == self.n[d] - 1 {
                a[d] -= 1;
                let mut c = idx;
                c[d] -= 2;
                let (p0, p1, p2) = (self.at(idx), self.at(a), self.at(c));
                [0, 1, 2].map(|r| (3.0 * p0[r] - 4.0 * p1[r] + p2[r]) / (2.0 * self.spacing[d]))
            } else {
                a[d] -= 1;
                b[d] += 1;
                let (pa, pb) = (self.at(a), self.at(b));
                [0, 1, 2].map(|r| (pb[r] - pa[r]) / (2.0 * self.spacing[d]))
            };
            for r in 0..3 {
                g.0[r][d] = col[r];
            }
        }
        g
    }

    fn locate(&self, x: Vec3) -> ([usize; 3], Vec3) {
        let mut idx = [0; 3];
        let mut frac = [0.0; 3];
        for d in 0..3 {
            let f = ((x[d] - self.lo[d]) / self.spacing[d]).clamp(0.0, (self.n[d] - 1) as f64);
            let i = (crate::math::floor(f) as usize).min(self.n[d] - 2);
            idx[d] = i;
            frac[d] = f - i as f64;
        }
        (idx, frac)
    }

    fn interpolate<T, F>(&self, x: Vec3, zero: T, mut node: F) -> T
    where
        T: core::ops::Add<Output = T> + core::ops::Mul<f64, Output = T> + Copy,
        F: FnMut([usize; 3]) -> T,
    {
        let (idx, f) = self.locate(x);
        let mut acc = zero;
        for corner in 0..8 {
            let bits = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let weight: f64 = (0..3).map(|d| if bits[d] == 1 { f[d] } else { 1.0 - f[d] }).product();
            acc = acc + node([idx[0] + bits[0], idx[1] + bits[1], idx[2] + bits[2]]) * weight;
        }
        acc
    }
}

#[derive(Clone, Copy)]
struct V3(Vec3);

impl core::ops::Add for V3 {
    type Output = V3;
    fn add(self, o: V3) -> V3 {
        V3(add3(self.0, o.0))
    }
}

impl core::ops::Mul<f64> for V3 {
    type Output = V3;
    fn mul(self, s: f64) -> V3 {
        V3(scale3(s, self.0))
    }
}

impl Deformation3 for GridDeformation {
    fn value(&self, _piece: usize, x: Vec3) -> Vec3 {
        self.interpolate(x, V3([0.0; 3]), |i| V3(self.at(i))).0
    }

    fn gradient(&self, _piece: usize, x: Vec3) -> Mat3 {
        self.interpolate(x, Mat3::ZERO, |i| self.node_gradient(i))
    }
}

/// Point data of the mid-plane needed by the recovery ansatz.
struct Frame {
    position: Vec3,
    tangent: Mat3x2,
    normal: Vec3,
    curvature: Sym2,
    shift: Vec2,
    shift_gradient: Mat2,
}

/// `y + h(x₃ν + ∇y g̃) + h²D` with `∇_sym g̃ = D_min` and
/// `D(x', x₃) = ∫₀^{x₃} d̄` built from the pointwise relaxation minimizer.
pub struct RecoveryDeformation<'a, S: SampledSurface + ?Sized> {
    surface: &'a S,
    field: &'a StrainField,
    witness: Witness,
    moduli: IsotropicModuli,
    h: f64,
    gauss: GaussLegendre,
    step: f64,
}

/// Recovery deformation for a compatible strain field.
pub fn recovery_deformation<'a, S: SampledSurface + ?Sized>(
    surface: &'a S,
    report: &CompatibilityReport,
    field: &'a StrainField,
    moduli: IsotropicModuli,
    h: f64,
) -> Result<RecoveryDeformation<'a, S>> {
    let witness = match (&report.witness, report.compatible) {
        (Some(w), true) => w.clone(),
        _ => return Err(Error::Incompatible { residual: report.max_residual }),
    };
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Degenerate(alloc::format!("thickness ratio must be positive, got {h}")));
    }
    Ok(RecoveryDeformation {
        surface,
        field,
        witness,
        moduli,
        h,
        gauss: GaussLegendre::new(8)?,
        step: 1e-5 * field.domain().diameter(),
    })
}

impl<S: SampledSurface + ?Sized> RecoveryDeformation<'_, S> {
    fn frame(&self, piece: usize, x: Vec2) -> Frame {
        Frame {
            position: self.surface.position(piece, x),
            tangent: self.surface.gradient(piece, x),
            normal: self.surface.normal(piece, x),
            curvature: self.surface.curvature(piece, x),
            shift: self.witness.value(x),
            shift_gradient: self.witness.gradient(x),
        }
    }

    /// `d̄` at thickness `t` in world coordinates.
    fn director_correction(&self, piece: usize, fr: &Frame, t: f64) -> Vec3 {
        let b = self.field.profile(piece).eval(t);
        let fbar = fr.curvature * t + fr.shift_gradient.sym() - b.check();
        let ell = relaxation_minimizer(&self.moduli, &fbar);
        let ag = fr.curvature.to_mat().apply(fr.shift);
        let local = [ell[0] + 2.0 * b.xz + ag[0], ell[1] + 2.0 * b.yz + ag[1], ell[2] + b.zz];
        let (g1, g2) = (fr.tangent.col(0), fr.tangent.col(1));
        add3(add3(scale3(local[0], g1), scale3(local[1], g2)), scale3(local[2], fr.normal))
    }

    fn integrated_correction(&self, piece: usize, fr: &Frame, x3: f64) -> Vec3 {
        let breaks = self.field.profile(piece).breakpoints();
        let (lo, hi, sign) = if x3 >= 0.0 { (0.0, x3, 1.0) } else { (x3, 0.0, -1.0) };
        let mut out = [0.0; 3];
        let mut a = lo;
        let inner = breaks.iter().copied().filter(|&b| b > lo && b < hi);
        for b in inner.chain(core::iter::once(hi)) {
            for (t, w) in self.gauss.on(a, b) {
                out = add3(out, scale3(w, self.director_correction(piece, fr, t)));
            }
            a = b;
        }
        scale3(sign, out)
    }

    fn correction_at(&self, piece: usize, x: Vec2, x3: f64) -> Vec3 {
        self.integrated_correction(piece, &self.frame(piece, x), x3)
    }
}

impl<S: SampledSurface + ?Sized> Deformation3 for RecoveryDeformation<'_, S> {
    fn value(&self, piece: usize, x: Vec3) -> Vec3 {
        let p = [x[0], x[1]];
        let fr = self.frame(piece, p);
        let h = self.h;
        let shift = fr.tangent.apply(fr.shift);
        let first = add3(scale3(x[2], fr.normal), shift);
        add3(add3(fr.position, scale3(h, first)), scale3(h * h, self.integrated_correction(piece, &fr, x[2])))
    }

    fn gradient(&self, piece: usize, x: Vec3) -> Mat3 {
        let p = [x[0], x[1]];
        let fr = self.frame(piece, p);
        let h = self.h;
        let ag = fr.curvature.to_mat().apply(fr.shift);
        let a = fr.curvature.to_mat();
        let mut cols = [[0.0; 3]; 3];
        for j in 0..2 {
            let tangent = fr.tangent.col(j);
            let dnu = add3(scale3(a.0[0][j], fr.tangent.col(0)), scale3(a.0[1][j], fr.tangent.col(1)));
            let dshift = add3(
                scale3(-ag[j], fr.normal),
                add3(scale3(fr.shift_gradient.0[0][j], fr.tangent.col(0)), scale3(fr.shift_gradient.0[1][j], fr.tangent.col(1))),
            );
            let mut plus = p;
            let mut minus = p;
            plus[j] += self.step;
            minus[j] -= self.step;
            let dd = scale3(
                0.5 / self.step,
                sub3(self.correction_at(piece, plus, x[2]), self.correction_at(piece, minus, x[2])),
            );
            cols[j] = add3(add3(tangent, scale3(h, add3(scale3(x[2], dnu), dshift))), scale3(h * h, dd));
        }
        cols[2] = add3(scale3(h, fr.normal), scale3(h * h, self.director_correction(piece, &fr, x[2])));
        Mat3::from_cols(cols[0], cols[1], cols[2])
    }
}

/// One row of the Γ experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaRow {
    pub h: f64,
    /// `h⁻² 𝓔ʰ(yʰ)`.
    pub scaled_energy: f64,
    /// `|h⁻² 𝓔ʰ(yʰ) − 𝓔⁰(y)|`.
    pub gap: f64,
    /// `h⁻² 𝓔ʰ(yʰ) / 𝓔⁰(y)`; NaN when the limit vanishes.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaTable {
    pub limit: EnergySplit,
    pub rows: Vec<GammaRow>,
    /// Fitted log-log slope of the gap against `h`, when all gaps are
    /// positive.
    pub rate: Option<f64>,
}

impl GammaTable {
    pub fn from_rows(limit: EnergySplit, mut rows: Vec<GammaRow>) -> GammaTable {
        rows.sort_by(|a, b| b.h.total_cmp(&a.h));
        let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
        let rate = if gaps.iter().all(|g| *g > 0.0) { log_log_slope(&hs, &gaps) } else { None };
        GammaTable { limit, rows, rate }
    }
}

/// `h⁻² 𝓔ʰ` of the recovery deformation at one thickness ratio.
pub fn gamma_row<S: SampledSurface + ?Sized, W: Density + ?Sized>(
    surface: &S,
    field: &StrainField,
    report: &CompatibilityReport,
    density: &W,
    limit: &EnergySplit,
    h: f64,
    opts: &QuadratureOptions,
) -> Result<GammaRow> {
    let y = recovery_deformation(surface, report, field, density.moduli(), h)?;
    let scaled_energy = energy_3d(h, &y, density, field.domain(), opts)? / (h * h);
    let e0 = limit.total();
    let ratio = if e0 == 0.0 { f64::NAN } else { scaled_energy / e0 };
    Ok(GammaRow { h, scaled_energy, gap: (scaled_energy - e0).abs(), ratio })
}

/// Runs [`gamma_row`] along a ladder of thickness ratios.
pub fn gamma_experiment<S: SampledSurface + ?Sized, W: Density + ?Sized>(
    surface: &S,
    field: &StrainField,
    report: &CompatibilityReport,
    density: &W,
    ladder: &[f64],
    opts: &QuadratureOptions,
) -> Result<GammaTable> {
    if !report.compatible {
        return Err(Error::Incompatible { residual: report.max_residual });
    }
    let limit = limit_energy(surface, field, &density.moduli(), opts)?;
    let rows = ladder
        .iter()
        .map(|&h| gamma_row(surface, field, report, density, &limit, h, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(GammaTable::from_rows(limit, rows))
}

/// Piecewise-constant strain helper: `t ↦ t·M` on every piece.
pub fn odd_linear_field(domain: PlateDomain, m: Sym3) -> Result<StrainField> {
    let n = domain.piece_count();
    let profile = crate::strain::StrainProfile::polynomial(alloc::vec![Sym3::ZERO, m])?;
    StrainField::new(domain, alloc::vec![profile; n])
}
