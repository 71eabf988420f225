//! Spontaneous strain profiles through the thickness, their moments, and
//! the Saint-Venant compatibility test for the mean in-plane strain.

use alloc::vec::Vec;

use crate::domain::PlateDomain;
use crate::math::{floor, powi, KahanSum};
use crate::quadrature::GaussLegendre;
use crate::tensor::{Mat2, Sym2, Sym3, Vec2};
use crate::{Error, Result};

/// A real function of the thickness variable `t ∈ (-1/2, 1/2)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarProfile {
    /// `Σ cₖ tᵏ`.
    Polynomial(Vec<f64>),
    /// `values[i]` on `(breaks[i-1], breaks[i])`, with the outer bounds at `∓1/2`.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
}

impl ScalarProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            ScalarProfile::Polynomial(c) => {
                if c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Profile("non-finite polynomial coefficient".into()));
                }
            }
            ScalarProfile::PiecewiseConstant { breaks, values } => {
                check_breaks(breaks, values.len())?;
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Profile("non-finite piecewise value".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarProfile::Polynomial(c) => c.iter().rev().fold(0.0, |acc, v| acc * t + v),
            ScalarProfile::PiecewiseConstant { breaks, values } => values[interval_of(breaks, t)],
        }
    }

    /// Interior thickness values where the profile may jump.
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            ScalarProfile::Polynomial(_) => &[],
            ScalarProfile::PiecewiseConstant { breaks, .. } => breaks,
        }
    }

    /// `∫ f(t, g(t)) dt` over the thickness, one Gauss rule per smooth piece.
    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, gauss: &GaussLegendre, mut f: F) -> f64 {
        integrate_pieces(self.breakpoints(), gauss, |t| f(t, self.eval(t)))
    }

    /// `∫ tᵏ g(t) dt`.
    pub fn moment(&self, k: i32, gauss: &GaussLegendre) -> f64 {
        self.integrate(gauss, |t, g| powi(t, k) * g)
    }
}

fn check_breaks(breaks: &[f64], values: usize) -> Result<()> {
    if values != breaks.len() + 1 {
        return Err(Error::Profile(alloc::format!(
            "{} breakpoints need {} values, got {values}",
            breaks.len(),
            breaks.len() + 1
        )));
    }
    let mut prev = -0.5;
    for &b in breaks {
        if !(b > prev && b < 0.5) {
            return Err(Error::Profile("breakpoints must increase strictly inside (-1/2, 1/2)".into()));
        }
        prev = b;
    }
    Ok(())
}

fn interval_of(breaks: &[f64], t: f64) -> usize {
    breaks.iter().take_while(|&&b| t >= b).count()
}

fn integrate_pieces<F: FnMut(f64) -> f64>(breaks: &[f64], gauss: &GaussLegendre, mut f: F) -> f64 {
    let mut acc = KahanSum::new();
    let mut a = -0.5;
    for &b in breaks.iter().chain(core::iter::once(&0.5)) {
        for (t, w) in gauss.on(a, b) {
            acc.add(w * f(t));
        }
        a = b;
    }
    acc.value()
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Polynomial(Vec<Sym3>),
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<Sym3> },
    Scaled { g: ScalarProfile, m: Sym3 },
}

/// Spontaneous strain as a function of the thickness variable.
#[derive(Clone, Debug, PartialEq)]
pub struct StrainProfile {
    repr: Repr,
}

impl StrainProfile {
    /// `Σ Mₖ tᵏ`.
    pub fn polynomial(coefficients: Vec<Sym3>) -> Result<Self> {
        if coefficients.iter().any(|m| m.to_array().iter().any(|v| !v.is_finite())) {
            return Err(Error::Profile("non-finite coefficient".into()));
        }
        Ok(StrainProfile { repr: Repr::Polynomial(coefficients) })
    }

    pub fn piecewise_constant(breaks: Vec<f64>, values: Vec<Sym3>) -> Result<Self> {
        check_breaks(&breaks, values.len())?;
        if values.iter().any(|m| m.to_array().iter().any(|v| !v.is_finite())) {
            return Err(Error::Profile("non-finite value".into()));
        }
        Ok(StrainProfile { repr: Repr::PiecewiseConstant { breaks, values } })
    }

    /// `g(t) M`.
    pub fn scaled(g: ScalarProfile, m: Sym3) -> Result<Self> {
        g.validate()?;
        if m.to_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::Profile("non-finite matrix".into()));
        }
        Ok(StrainProfile { repr: Repr::Scaled { g, m } })
    }

    pub fn zero() -> Self {
        StrainProfile { repr: Repr::Polynomial(Vec::new()) }
    }

    pub fn eval(&self, t: f64) -> Sym3 {
        match &self.repr {
            Repr::Polynomial(c) => c.iter().rev().fold(Sym3::ZERO, |acc, m| acc.scale(t).add(m)),
            Repr::PiecewiseConstant { breaks, values } => values[interval_of(breaks, t)],
            Repr::Scaled { g, m } => m.scale(g.eval(t)),
        }
    }

    /// Interior thickness values where the profile may jump.
    pub fn breakpoints(&self) -> &[f64] {
        match &self.repr {
            Repr::Polynomial(_) => &[],
            Repr::PiecewiseConstant { breaks, .. } => breaks,
            Repr::Scaled { g, .. } => g.breakpoints(),
        }
    }

    /// `∫ f(t, B(t)) dt` over the thickness.
    pub fn integrate<F: FnMut(f64, Sym3) -> f64>(&self, gauss: &GaussLegendre, mut f: F) -> f64 {
        integrate_pieces(self.breakpoints(), gauss, |t| f(t, self.eval(t)))
    }

    /// `∫ tᵏ B(t) dt`.
    pub fn moment(&self, k: i32, gauss: &GaussLegendre) -> Sym3 {
        let mut out = [0.0; 6];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.integrate(gauss, |t, b| powi(t, k) * b.to_array()[i]);
        }
        Sym3::from_array(out)
    }

    /// In-plane block of [`moment`](Self::moment).
    pub fn plane_moment(&self, k: i32, gauss: &GaussLegendre) -> Sym2 {
        self.moment(k, gauss).check()
    }

    /// Thickness mean of the in-plane block.
    pub fn mean(&self, gauss: &GaussLegendre) -> Sym2 {
        self.plane_moment(0, gauss)
    }

    /// `12 ∫ t B̌(t) dt`.
    pub fn target_curvature(&self, gauss: &GaussLegendre) -> Sym2 {
        self.plane_moment(1, gauss) * 12.0
    }
}

/// A plate with one strain profile per piece.
#[derive(Clone, Debug, PartialEq)]
pub struct StrainField {
    domain: PlateDomain,
    profiles: Vec<StrainProfile>,
}

impl StrainField {
    pub fn new(domain: PlateDomain, profiles: Vec<StrainProfile>) -> Result<Self> {
        if profiles.len() != domain.piece_count() {
            return Err(Error::Domain(alloc::format!(
                "{} pieces but {} strain profiles",
                domain.piece_count(),
                profiles.len()
            )));
        }
        Ok(StrainField { domain, profiles })
    }

    pub fn domain(&self) -> &PlateDomain {
        &self.domain
    }

    pub fn profiles(&self) -> &[StrainProfile] {
        &self.profiles
    }

    pub fn profile(&self, k: usize) -> &StrainProfile {
        &self.profiles[k]
    }
}

/// Thickness mean of the in-plane strain at `x`.
pub fn d_min(field: &StrainField, x: Vec2, gauss: &GaussLegendre) -> Result<Sym2> {
    let k = field.domain.locate(x)?;
    Ok(field.profiles[k].mean(gauss))
}

/// `12 ∫ t B̌(x, t) dt`.
pub fn target_curvature(field: &StrainField, x: Vec2, gauss: &GaussLegendre) -> Result<Sym2> {
    let k = field.domain.locate(x)?;
    Ok(field.profiles[k].target_curvature(gauss))
}

/// Values of a symmetric field on a uniform node grid, row-major in `x₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymGrid {
    pub lo: Vec2,
    pub spacing: Vec2,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<Sym2>,
}

impl SymGrid {
    /// Samples `f` at `nx × ny` nodes with the given origin and spacing.
    pub fn sample<F: FnMut(Vec2) -> Sym2>(lo: Vec2, spacing: Vec2, nx: usize, ny: usize, mut f: F) -> Self {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f([lo[0] + i as f64 * spacing[0], lo[1] + j as f64 * spacing[1]]));
            }
        }
        SymGrid { lo, spacing, nx, ny, values }
    }

    pub fn at(&self, i: usize, j: usize) -> Sym2 {
        self.values[j * self.nx + i]
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        [self.lo[0] + i as f64 * self.spacing[0], self.lo[1] + j as f64 * self.spacing[1]]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.max_abs()))
    }
}

/// Node-wise incompatibility on the interior of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    /// Interior values, `(nx − 2) × (ny − 2)`, row-major.
    pub values: Vec<f64>,
    pub max_abs: f64,
}

/// `∂₂₂D₁₁ + ∂₁₁D₂₂ − 2∂₁₂D₁₂` by centered second differences.
pub fn saint_venant_residual(grid: &SymGrid) -> Result<Residual> {
    let min = 4;
    let got = grid.nx.min(grid.ny);
    if got < min {
        return Err(Error::GridTooSmall { min, got });
    }
    let [sx, sy] = grid.spacing;
    if !(sx > 0.0 && sy > 0.0) {
        return Err(Error::Degenerate("grid spacing must be positive".into()));
    }
    let mut values = Vec::with_capacity((grid.nx - 2) * (grid.ny - 2));
    let mut max_abs = 0.0_f64;
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let c = grid.at(i, j);
            let d22_11 = (grid.at(i, j + 1).xx - 2.0 * c.xx + grid.at(i, j - 1).xx) / (sy * sy);
            let d11_22 = (grid.at(i + 1, j).yy - 2.0 * c.yy + grid.at(i - 1, j).yy) / (sx * sx);
            let d12_12 = (grid.at(i + 1, j + 1).xy - grid.at(i + 1, j - 1).xy - grid.at(i - 1, j + 1).xy
                + grid.at(i - 1, j - 1).xy)
                / (4.0 * sx * sy);
            let r = d22_11 + d11_22 - 2.0 * d12_12;
            max_abs = max_abs.max(r.abs());
            values.push(r);
        }
    }
    Ok(Residual { values, max_abs })
}

/// An in-plane displacement `w` with its gradient.
pub trait InPlaneDisplacement {
    fn value(&self, x: Vec2) -> Vec2;
    fn gradient(&self, x: Vec2) -> Mat2;
}

/// Displacement whose symmetrized gradient reproduces a compatible field.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Zero,
    /// `w(x) = M x`.
    Affine(Mat2),
    Grid(GridWitness),
}

impl InPlaneDisplacement for Witness {
    fn value(&self, x: Vec2) -> Vec2 {
        match self {
            Witness::Zero => [0.0, 0.0],
            Witness::Affine(m) => m.apply(x),
            Witness::Grid(g) => g.value(x),
        }
    }

    fn gradient(&self, x: Vec2) -> Mat2 {
        match self {
            Witness::Zero => Mat2::ZERO,
            Witness::Affine(m) => *m,
            Witness::Grid(g) => g.gradient(x),
        }
    }
}

/// Bilinear nodal displacement obtained by least-squares integration.
#[derive(Clone, Debug, PartialEq)]
pub struct GridWitness {
    lo: Vec2,
    spacing: Vec2,
    nx: usize,
    ny: usize,
    nodes: Vec<Vec2>,
}

impl GridWitness {
    fn cell(&self, x: Vec2) -> (usize, usize, f64, f64) {
        let fx = ((x[0] - self.lo[0]) / self.spacing[0]).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((x[1] - self.lo[1]) / self.spacing[1]).clamp(0.0, (self.ny - 1) as f64);
        let i = (floor(fx) as usize).min(self.nx - 2);
        let j = (floor(fy) as usize).min(self.ny - 2);
        (i, j, fx - i as f64, fy - j as f64)
    }

    fn node(&self, i: usize, j: usize) -> Vec2 {
        self.nodes[j * self.nx + i]
    }
}

impl InPlaneDisplacement for GridWitness {
    fn value(&self, x: Vec2) -> Vec2 {
        let (i, j, u, v) = self.cell(x);
        let mut out = [0.0; 2];
        for c in 0..2 {
            out[c] = (1.0 - u) * (1.0 - v) * self.node(i, j)[c]
                + u * (1.0 - v) * self.node(i + 1, j)[c]
                + (1.0 - u) * v * self.node(i, j + 1)[c]
                + u * v * self.node(i + 1, j + 1)[c];
        }
        out
    }

    fn gradient(&self, x: Vec2) -> Mat2 {
        let (i, j, u, v) = self.cell(x);
        let mut g = Mat2::ZERO;
        for c in 0..2 {
            let (a, b, cc, d) = (self.node(i, j)[c], self.node(i + 1, j)[c], self.node(i, j + 1)[c], self.node(i + 1, j + 1)[c]);
            g.0[c][0] = ((1.0 - v) * (b - a) + v * (d - cc)) / self.spacing[0];
            g.0[c][1] = ((1.0 - u) * (cc - a) + u * (d - b)) / self.spacing[1];
        }
        g
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityReport {
    pub compatible: bool,
    pub max_residual: f64,
    /// Threshold the residual was compared against.
    pub tolerance: f64,
    pub spacing: Vec2,
    pub witness: Option<Witness>,
    /// Root-mean-square mismatch `|∇_sym w − D|` of the witness at cell centres.
    pub fit_error: Option<f64>,
}

impl CompatibilityReport {
    /// Incompatible fields lead to a plate limit that this crate does not
    /// compute.
    pub fn outside_validated_theory(&self) -> bool {
        !self.compatible
    }
}

/// Relative tolerance of the compatibility decision.
pub const COMPATIBILITY_TOL: f64 = 1e-6;

/// Decides compatibility of sampled data and, when compatible, integrates a
/// displacement witness.
pub fn compatibility_from_samples(grid: &SymGrid) -> Result<CompatibilityReport> {
    let residual = saint_venant_residual(grid)?;
    let scale = grid.max_abs();
    let tolerance = COMPATIBILITY_TOL * scale.max(1.0);
    let compatible = residual.max_abs < tolerance;
    let (witness, fit_error) = if !compatible {
        (None, None)
    } else if scale == 0.0 {
        (Some(Witness::Zero), Some(0.0))
    } else if grid.values.iter().all(|v| (*v - grid.values[0]).max_abs() <= 1e-14 * scale) {
        (Some(Witness::Affine(grid.values[0].to_mat())), Some(0.0))
    } else {
        let w = integrate_witness(grid);
        let err = witness_fit_error(grid, &w);
        (Some(Witness::Grid(w)), Some(err))
    };
    Ok(CompatibilityReport { compatible, max_residual: residual.max_abs, tolerance, spacing: grid.spacing, witness, fit_error })
}

/// Samples the mean strain of `field` on an `n × n` node grid covering the
/// closed plate and runs [`compatibility_from_samples`].
pub fn compatibility_report(field: &StrainField, n: usize, gauss: &GaussLegendre) -> Result<CompatibilityReport> {
    let grid = sample_d_min(field, n, gauss)?;
    compatibility_from_samples(&grid)
}

/// Mean strain on an `n × n` node grid; nodes on cuts take the value of the
/// lowest-indexed adjacent piece.
pub fn sample_d_min(field: &StrainField, n: usize, gauss: &GaussLegendre) -> Result<SymGrid> {
    if n < 4 {
        return Err(Error::GridTooSmall { min: 4, got: n });
    }
    let d = &field.domain;
    let (lo, hi) = (d.lo(), d.hi());
    let spacing = [(hi[0] - lo[0]) / (n - 1) as f64, (hi[1] - lo[1]) / (n - 1) as f64];
    let means: Vec<Sym2> = field.profiles.iter().map(|p| p.mean(gauss)).collect();
    let mut missing = None;
    let grid = SymGrid::sample(lo, spacing, n, n, |x| match d.locate_closed(x) {
        Some(k) => means[k],
        None => {
            missing.get_or_insert(x);
            Sym2::ZERO
        }
    });
    match missing {
        Some(x) => Err(Error::Location { x: x[0], y: x[1] }),
        None => Ok(grid),
    }
}

/// Cell-centre symmetric gradient of the bilinear interpolant, as the three
/// weighted components `(e₁₁, e₂₂, √2 e₁₂)`.
fn cell_strain(nodes: &[Vec2], nx: usize, i: usize, j: usize, s: Vec2) -> [f64; 3] {
    let n = |a: usize, b: usize| nodes[b * nx + a];
    let (p00, p10, p01, p11) = (n(i, j), n(i + 1, j), n(i, j + 1), n(i + 1, j + 1));
    let mut g = [[0.0; 2]; 2];
    for c in 0..2 {
        g[c][0] = 0.5 * ((p10[c] - p00[c]) + (p11[c] - p01[c])) / s[0];
        g[c][1] = 0.5 * ((p01[c] - p00[c]) + (p11[c] - p10[c])) / s[1];
    }
    [g[0][0], g[1][1], core::f64::consts::SQRT_2 * 0.5 * (g[0][1] + g[1][0])]
}

/// Transpose of [`cell_strain`], accumulated into `out`.
fn cell_strain_adjoint(out: &mut [Vec2], nx: usize, i: usize, j: usize, s: Vec2, r: [f64; 3]) {
    let off = core::f64::consts::SQRT_2 * 0.5 * r[2];
    // Gradient entries g[c][k] receive: g00 ← r0, g11 ← r1, g01, g10 ← off.
    let g = [[r[0], off], [off, r[1]]];
    let idx = |a: usize, b: usize| b * nx + a;
    for c in 0..2 {
        let gx = 0.5 * g[c][0] / s[0];
        let gy = 0.5 * g[c][1] / s[1];
        out[idx(i + 1, j)][c] += gx - gy;
        out[idx(i, j)][c] += -gx - gy;
        out[idx(i + 1, j + 1)][c] += gx + gy;
        out[idx(i, j + 1)][c] += -gx + gy;
    }
}

fn cell_target(grid: &SymGrid, i: usize, j: usize) -> [f64; 3] {
    let avg = (grid.at(i, j) + grid.at(i + 1, j) + grid.at(i, j + 1) + grid.at(i + 1, j + 1)) * 0.25;
    [avg.xx, avg.yy, core::f64::consts::SQRT_2 * avg.xy]
}

/// Minimum-norm least-squares solution by CGLS; the minimum norm fixes the
/// rigid-motion gauge.
fn integrate_witness(grid: &SymGrid) -> GridWitness {
    let (nx, ny, s) = (grid.nx, grid.ny, grid.spacing);
    let cells = (nx - 1) * (ny - 1);
    let apply = |x: &[Vec2], out: &mut Vec<[f64; 3]>| {
        out.clear();
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                out.push(cell_strain(x, nx, i, j, s));
            }
        }
    };
    let adjoint = |r: &[[f64; 3]], out: &mut Vec<Vec2>| {
        out.iter_mut().for_each(|v| *v = [0.0, 0.0]);
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                cell_strain_adjoint(out, nx, i, j, s, r[j * (nx - 1) + i]);
            }
        }
    };
    let dot_nodes = |a: &[Vec2], b: &[Vec2]| a.iter().zip(b).map(|(p, q)| p[0] * q[0] + p[1] * q[1]).collect::<KahanSum>().value();
    let dot_cells = |a: &[[f64; 3]], b: &[[f64; 3]]| {
        a.iter().zip(b).map(|(p, q)| p[0] * q[0] + p[1] * q[1] + p[2] * q[2]).collect::<KahanSum>().value()
    };

    let mut x = alloc::vec![[0.0; 2]; nx * ny];
    let mut r: Vec<[f64; 3]> = Vec::with_capacity(cells);
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            r.push(cell_target(grid, i, j));
        }
    }
    let mut sv = alloc::vec![[0.0; 2]; nx * ny];
    adjoint(&r, &mut sv);
    let mut p = sv.clone();
    let mut gamma = dot_nodes(&sv, &sv);
    let gamma0 = gamma;
    let mut q: Vec<[f64; 3]> = Vec::with_capacity(cells);
    for _ in 0..20 * (nx + ny) * 10 {
        if gamma <= 1e-30 * gamma0 || gamma == 0.0 {
            break;
        }
        apply(&p, &mut q);
        let qq = dot_cells(&q, &q);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        for (xi, pi) in x.iter_mut().zip(&p) {
            xi[0] += alpha * pi[0];
            xi[1] += alpha * pi[1];
        }
        for (ri, qi) in r.iter_mut().zip(&q) {
            for c in 0..3 {
                ri[c] -= alpha * qi[c];
            }
        }
        adjoint(&r, &mut sv);
        let next = dot_nodes(&sv, &sv);
        let beta = next / gamma;
        gamma = next;
        for (pi, si) in p.iter_mut().zip(&sv) {
            pi[0] = si[0] + beta * pi[0];
            pi[1] = si[1] + beta * pi[1];
        }
    }
    GridWitness { lo: grid.lo, spacing: s, nx, ny, nodes: x }
}

fn witness_fit_error(grid: &SymGrid, w: &GridWitness) -> f64 {
    let mut acc = KahanSum::new();
    let mut count = 0.0;
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            let e = cell_strain(&w.nodes, grid.nx, i, j, grid.spacing);
            let t = cell_target(grid, i, j);
            acc.add(powi(e[0] - t[0], 2) + powi(e[1] - t[1], 2) + powi(e[2] - t[2], 2));
            count += 1.0;
        }
    }
    crate::math::sqrt(acc.value() / count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Cut, Side};

    fn gauss() -> GaussLegendre {
        GaussLegendre::new(16).unwrap()
    }

    fn iso(s: f64) -> Sym3 {
        Sym3::from_plane(Sym2::diag(s, s))
    }

    fn example_field() -> StrainField {
        let domain = PlateDomain::new(
            [0.0, 0.0],
            [2.0, 1.0],
            alloc::vec![Cut::polyline(alloc::vec![[1.0, 0.0], [1.0, 1.0]], Side::Right)],
        )
        .unwrap();
        let p1 = StrainProfile::polynomial(alloc::vec![iso(1.0), iso(1.0)]).unwrap();
        let p2 = StrainProfile::polynomial(alloc::vec![iso(1.0), Sym3::ZERO, Sym3::ZERO, iso(1.0)]).unwrap();
        StrainField::new(domain, alloc::vec![p1, p2]).unwrap()
    }

    #[test]
    fn moments_of_piecewise_polynomial_field() {
        let f = example_field();
        let g = gauss();
        for x in [[0.5, 0.5], [1.5, 0.5]] {
            assert!((d_min(&f, x, &g).unwrap() - Sym2::IDENTITY).max_abs() < 1e-15);
        }
        assert!((target_curvature(&f, [0.5, 0.5], &g).unwrap() - Sym2::IDENTITY).max_abs() < 1e-15);
        assert!((target_curvature(&f, [1.5, 0.5], &g).unwrap() - Sym2::IDENTITY * 0.15).max_abs() < 1e-15);
        assert!(d_min(&f, [1.0, 0.5], &g).is_err());
        assert!(d_min(&f, [2.5, 0.5], &g).is_err());
    }

    #[test]
    fn odd_and_even_moments() {
        let g = gauss();
        let m = Sym3::from_array([0.3, -0.2, 0.1, 0.5, 0.0, 0.2]);
        let odd = StrainProfile::scaled(ScalarProfile::Polynomial(alloc::vec![0.0, 1.0, 0.0, -2.0]), m).unwrap();
        assert!(odd.mean(&g).max_abs() < 1e-16);
        let linear = StrainProfile::polynomial(alloc::vec![Sym3::ZERO, m]).unwrap();
        assert!((linear.target_curvature(&g) - m.check()).max_abs() < 1e-15);
        let even = StrainProfile::piecewise_constant(alloc::vec![-0.25, 0.25], alloc::vec![m, m.scale(2.0), m]).unwrap();
        assert!(even.target_curvature(&g).max_abs() < 1e-16);
        assert!((even.mean(&g) - m.check() * 1.5).max_abs() < 1e-15);
    }

    #[test]
    fn profile_validation() {
        assert!(StrainProfile::piecewise_constant(alloc::vec![0.1, 0.0], alloc::vec![Sym3::ZERO; 3]).is_err());
        assert!(StrainProfile::piecewise_constant(alloc::vec![0.1], alloc::vec![Sym3::ZERO; 3]).is_err());
        assert!(StrainProfile::polynomial(alloc::vec![Sym3::isotropic(f64::NAN)]).is_err());
    }

    #[test]
    fn residual_examples() {
        let s = 0.1;
        let constant = SymGrid::sample([0.0, 0.0], [s, s], 8, 8, |_| Sym2::new(1.0, 0.3, -2.0));
        assert_eq!(saint_venant_residual(&constant).unwrap().max_abs, 0.0);
        let bad = SymGrid::sample([0.0, 0.0], [s, s], 8, 8, |x| Sym2::diag(x[1] * x[1], 0.0));
        let r = saint_venant_residual(&bad).unwrap();
        assert!(r.values.iter().all(|v| (v - 2.0).abs() < 1e-9));
        let small = SymGrid::sample([0.0, 0.0], [s, s], 3, 8, |_| Sym2::ZERO);
        assert_eq!(saint_venant_residual(&small), Err(Error::GridTooSmall { min: 4, got: 3 }));
    }

    #[test]
    fn compatibility_verdicts() {
        let g = gauss();
        let report = compatibility_report(&example_field(), 17, &g).unwrap();
        assert!(report.compatible);
        match report.witness {
            Some(Witness::Affine(m)) => assert!((m - Mat2::IDENTITY).max_abs() < 1e-14),
            other => panic!("unexpected witness {other:?}"),
        }

        let zero = StrainField::new(PlateDomain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap(), alloc::vec![StrainProfile::zero()]).unwrap();
        let report = compatibility_report(&zero, 9, &g).unwrap();
        assert!(report.compatible);
        assert_eq!(report.witness, Some(Witness::Zero));

        let s = 1.0 / 32.0;
        let bad = SymGrid::sample([0.0, 0.0], [s, s], 33, 33, |x| Sym2::diag(x[1] * x[1], 0.0));
        let report = compatibility_from_samples(&bad).unwrap();
        assert!(!report.compatible && report.outside_validated_theory());
    }

    #[test]
    fn witness_of_smooth_symmetric_gradient() {
        // w = (x₁x₂, x₁²/2 + sin x₂)
        let s = 1.0 / 32.0;
        let grid = SymGrid::sample([0.0, 0.0], [s, s], 33, 33, |x| Sym2::new(x[1], x[0], libm::cos(x[1])));
        let report = compatibility_from_samples(&grid).unwrap();
        assert!(report.compatible, "{}", report.max_residual);
        assert!(report.fit_error.unwrap() < 1e-3, "{:?}", report.fit_error);
        let w = report.witness.unwrap();
        let e = w.gradient([0.5, 0.5]).sym();
        assert!((e - Sym2::new(0.5, 0.5, libm::cos(0.5))).max_abs() < 2e-2);
    }
}
