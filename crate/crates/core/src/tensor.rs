//! Fixed-size 2×2 and 3×3 tensors, their symmetric and orthogonal subsets,
//! and the block embeddings between the two sizes.

use core::ops::{Add, Mul, Neg, Sub};

use crate::math::{cos, sin, sqrt};
use crate::{Error, Result};

pub type Vec2 = [f64; 2];
pub type Vec3 = [f64; 3];

/// Tolerance below which a matrix is accepted as orthogonal unchanged.
pub const ORTHO_TOL: f64 = 1e-12;
/// Tolerance below which a nearly orthogonal matrix is projected back.
pub const REPAIR_TOL: f64 = 1e-6;

pub fn dot2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm2(a: Vec2) -> f64 {
    crate::math::hypot(a[0], a[1])
}

pub fn cross2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: Vec3) -> f64 {
    sqrt(dot3(a, a))
}

pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale3(s: f64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

pub fn sub2(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

/// Row-major 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2(pub [[f64; 2]; 2]);

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat3(pub [[f64; 3]; 3]);

/// 3×2 matrix, e.g. the in-plane gradient of a surface.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat3x2(pub [[f64; 2]; 3]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0; 2]; 2]);
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2([[a, 0.0], [0.0, b]])
    }

    /// Outer product `a ⊗ b`.
    pub fn outer(a: Vec2, b: Vec2) -> Self {
        Mat2([[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum()
    }

    pub fn frobenius(&self) -> f64 {
        sqrt(self.frobenius_sq())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn col(&self, j: usize) -> Vec2 {
        [self.0[0][j], self.0[1][j]]
    }

    pub fn row(&self, i: usize) -> Vec2 {
        self.0[i]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// Embeds into the upper-left block of a 3×3 matrix with zero third row
    /// and column.
    pub fn hat(&self) -> Mat3 {
        let m = &self.0;
        Mat3([[m[0][0], m[0][1], 0.0], [m[1][0], m[1][1], 0.0], [0.0, 0.0, 0.0]])
    }

    pub fn sym(&self) -> Sym2 {
        let m = &self.0;
        Sym2::new(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1])
    }
}

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Mat3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn outer(a: Vec3, b: Vec3) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i] * b[j];
            }
        }
        Mat3(m)
    }

    /// Matrix with the given columns.
    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3([[c0[0], c1[0], c2[0]], [c0[1], c1[1], c2[1]], [c0[2], c1[2], c2[2]]])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[0.0; 3]; 3];
        for (i, row) in self.0.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                t[j][i] = *v;
            }
        }
        Mat3(t)
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Cofactor matrix, `det(F) F⁻ᵀ` for invertible `F`.
    pub fn cofactor(&self) -> Self {
        let m = &self.0;
        Mat3([
            [
                m[1][1] * m[2][2] - m[1][2] * m[2][1],
                m[1][2] * m[2][0] - m[1][0] * m[2][2],
                m[1][0] * m[2][1] - m[1][1] * m[2][0],
            ],
            [
                m[0][2] * m[2][1] - m[0][1] * m[2][2],
                m[0][0] * m[2][2] - m[0][2] * m[2][0],
                m[0][1] * m[2][0] - m[0][0] * m[2][1],
            ],
            [
                m[0][1] * m[1][2] - m[0][2] * m[1][1],
                m[0][2] * m[1][0] - m[0][0] * m[1][2],
                m[0][0] * m[1][1] - m[0][1] * m[1][0],
            ],
        ])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(self.cofactor().transpose() * (1.0 / d))
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum()
    }

    pub fn frobenius(&self) -> f64 {
        sqrt(self.frobenius_sq())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        [dot3(m[0], v), dot3(m[1], v), dot3(m[2], v)]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// Upper-left 2×2 block.
    pub fn check(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0], m[0][1]], [m[1][0], m[1][1]]])
    }

    pub fn sym(&self) -> Sym3 {
        let m = &self.0;
        Sym3 {
            xx: m[0][0],
            yy: m[1][1],
            zz: m[2][2],
            xy: 0.5 * (m[0][1] + m[1][0]),
            xz: 0.5 * (m[0][2] + m[2][0]),
            yz: 0.5 * (m[1][2] + m[2][1]),
        }
    }

    /// Rotation by `theta` about the third axis.
    pub fn rotation_about_z(theta: f64) -> Self {
        let (s, c) = (sin(theta), cos(theta));
        Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Orthogonal polar factor of a matrix with positive determinant,
    /// by the scaled Newton iteration `X ← (γX + X⁻ᵀ/γ)/2`.
    pub fn polar_rotation(&self) -> Option<Mat3> {
        if !(self.det() > 0.0) {
            return None;
        }
        let mut x = *self;
        for _ in 0..100 {
            let inv_t = x.inverse()?.transpose();
            let gamma = sqrt(sqrt(inv_t.frobenius_sq() / x.frobenius_sq()));
            let next = (x * gamma + inv_t * (1.0 / gamma)) * 0.5;
            let change = (next - x).max_abs();
            x = next;
            if change < 1e-15 {
                break;
            }
        }
        // One unscaled step cleans up the last ulp-level drift.
        let inv_t = x.inverse()?.transpose();
        Some((x + inv_t) * 0.5)
    }

    /// Largest entry of `MᵀM − I` in absolute value.
    pub fn orthogonality_defect(&self) -> f64 {
        (self.transpose() * *self - Mat3::IDENTITY).max_abs()
    }
}

impl Mat3x2 {
    pub fn from_cols(c0: Vec3, c1: Vec3) -> Self {
        Mat3x2([[c0[0], c1[0]], [c0[1], c1[1]], [c0[2], c1[2]]])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    /// First fundamental form `GᵀG`.
    pub fn gram(&self) -> Mat2 {
        let (a, b) = (self.col(0), self.col(1));
        Mat2([[dot3(a, a), dot3(a, b)], [dot3(b, a), dot3(b, b)]])
    }

    /// Unit normal `∂₁ ∧ ∂₂ / |∂₁ ∧ ∂₂|`.
    pub fn unit_normal(&self) -> Vec3 {
        let n = cross3(self.col(0), self.col(1));
        let len = norm3(n);
        scale3(1.0 / len, n)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &Mat3x2) -> Mat3x2 {
        let mut out = [[0.0; 2]; 3];
        for i in 0..3 {
            for j in 0..2 {
                out[i][j] = self.0[i][j] - other.0[i][j];
            }
        }
        Mat3x2(out)
    }

    pub fn scale(&self, s: f64) -> Mat3x2 {
        let mut out = self.0;
        out.iter_mut().flatten().for_each(|v| *v *= s);
        Mat3x2(out)
    }

    pub fn apply(&self, v: Vec2) -> Vec3 {
        let a = &self.0;
        [0, 1, 2].map(|i| a[i][0] * v[0] + a[i][1] * v[1])
    }

    /// `M · self` for a 3×3 matrix `M`.
    pub fn left_mul(&self, m: &Mat3) -> Mat3x2 {
        Mat3x2::from_cols(m.apply(self.col(0)), m.apply(self.col(1)))
    }

    /// `self · N` for a 2×2 matrix `N`.
    pub fn right_mul(&self, n: &Mat2) -> Mat3x2 {
        let mut out = [[0.0; 2]; 3];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = [
                row[0] * n.0[0][0] + row[1] * n.0[1][0],
                row[0] * n.0[0][1] + row[1] * n.0[1][1],
            ];
        }
        Mat3x2(out)
    }
}

macro_rules! impl_linear {
    ($t:ident, $n:expr) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                let mut out = self.0;
                for i in 0..$n {
                    for j in 0..$n {
                        out[i][j] += rhs.0[i][j];
                    }
                }
                $t(out)
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                let mut out = self.0;
                for i in 0..$n {
                    for j in 0..$n {
                        out[i][j] -= rhs.0[i][j];
                    }
                }
                $t(out)
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                self * -1.0
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                let mut out = self.0;
                out.iter_mut().flatten().for_each(|v| *v *= s);
                $t(out)
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, rhs: $t) -> $t {
                let mut out = [[0.0; $n]; $n];
                for i in 0..$n {
                    for j in 0..$n {
                        for k in 0..$n {
                            out[i][j] += self.0[i][k] * rhs.0[k][j];
                        }
                    }
                }
                $t(out)
            }
        }
    };
}

impl_linear!(Mat2, 2);
impl_linear!(Mat3, 3);

/// Symmetric 2×2 matrix stored by its three independent entries.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };
    pub const IDENTITY: Sym2 = Sym2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Sym2 { xx: a, xy: 0.0, yy: b }
    }

    /// `n ⊗ n`.
    pub fn dyad(n: Vec2) -> Self {
        Sym2::new(n[0] * n[0], n[0] * n[1], n[1] * n[1])
    }

    pub fn to_mat(&self) -> Mat2 {
        Mat2([[self.xx, self.xy], [self.xy, self.yy]])
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.xx * self.xx + 2.0 * self.xy * self.xy + self.yy * self.yy
    }

    pub fn frobenius(&self) -> f64 {
        sqrt(self.frobenius_sq())
    }

    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xy.abs()).max(self.yy.abs())
    }

    /// Frobenius inner product.
    pub fn inner(&self, other: &Sym2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    /// `Q S Qᵀ`.
    pub fn conjugate(&self, q: &Mat2) -> Sym2 {
        (*q * self.to_mat() * q.transpose()).sym()
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }

    /// Closed-form eigen-decomposition `S = ρ diag(a, b) ρᵀ`.
    ///
    /// The rotation is chosen closest to the identity: its first column makes
    /// an angle in `(-π/4, π/4]` with `e₁`. Multiples of the identity get
    /// `ρ = I`.
    pub fn eigen(&self) -> SymEigen2 {
        let half_diff = 0.5 * (self.xx - self.yy);
        let radius = crate::math::hypot(half_diff, self.xy);
        let mean = 0.5 * (self.xx + self.yy);
        if radius == 0.0 {
            return SymEigen2 { values: [mean, mean], angle: 0.0 };
        }
        let mut angle = 0.5 * crate::math::atan2(self.xy, half_diff);
        let mut values = [mean + radius, mean - radius];
        let quarter = core::f64::consts::FRAC_PI_4;
        if angle > quarter {
            angle -= core::f64::consts::FRAC_PI_2;
            values.swap(0, 1);
        } else if angle <= -quarter {
            angle += core::f64::consts::FRAC_PI_2;
            values.swap(0, 1);
        }
        SymEigen2 { values, angle }
    }
}

/// Eigen-decomposition of a [`Sym2`]: eigenvalue `values[k]` belongs to
/// column `k` of the rotation by `angle`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymEigen2 {
    pub values: [f64; 2],
    pub angle: f64,
}

impl SymEigen2 {
    pub fn rotation(&self) -> Rot2 {
        Rot2::from_angle(self.angle)
    }

    pub fn vector(&self, k: usize) -> Vec2 {
        self.rotation().matrix().col(k)
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, r: Sym2) -> Sym2 {
        Sym2::new(self.xx + r.xx, self.xy + r.xy, self.yy + r.yy)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, r: Sym2) -> Sym2 {
        Sym2::new(self.xx - r.xx, self.xy - r.xy, self.yy - r.yy)
    }
}

impl Neg for Sym2 {
    type Output = Sym2;
    fn neg(self) -> Sym2 {
        Sym2::new(-self.xx, -self.xy, -self.yy)
    }
}

impl Mul<f64> for Sym2 {
    type Output = Sym2;
    fn mul(self, s: f64) -> Sym2 {
        Sym2::new(s * self.xx, s * self.xy, s * self.yy)
    }
}

/// Symmetric 3×3 matrix stored by its six independent entries.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Sym3 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

impl Sym3 {
    pub const ZERO: Sym3 = Sym3 { xx: 0.0, yy: 0.0, zz: 0.0, xy: 0.0, xz: 0.0, yz: 0.0 };

    /// Entries in the order `[xx, yy, zz, xy, xz, yz]`.
    pub const fn from_array(a: [f64; 6]) -> Self {
        Sym3 { xx: a[0], yy: a[1], zz: a[2], xy: a[3], xz: a[4], yz: a[5] }
    }

    pub const fn to_array(&self) -> [f64; 6] {
        [self.xx, self.yy, self.zz, self.xy, self.xz, self.yz]
    }

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Sym3 { xx: a, yy: b, zz: c, xy: 0.0, xz: 0.0, yz: 0.0 }
    }

    pub fn isotropic(s: f64) -> Self {
        Sym3::diag(s, s, s)
    }

    /// Pads a symmetric 2×2 block with zeros.
    pub fn from_plane(s: Sym2) -> Self {
        Sym3 { xx: s.xx, yy: s.yy, zz: 0.0, xy: s.xy, xz: 0.0, yz: 0.0 }
    }

    pub fn to_mat(&self) -> Mat3 {
        Mat3([[self.xx, self.xy, self.xz], [self.xy, self.yy, self.yz], [self.xz, self.yz, self.zz]])
    }

    pub fn check(&self) -> Sym2 {
        Sym2::new(self.xx, self.xy, self.yy)
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.xx * self.xx
            + self.yy * self.yy
            + self.zz * self.zz
            + 2.0 * (self.xy * self.xy + self.xz * self.xz + self.yz * self.yz)
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Sym3 {
        let mut a = self.to_array();
        a.iter_mut().for_each(|v| *v *= s);
        Sym3::from_array(a)
    }

    pub fn add(&self, other: &Sym3) -> Sym3 {
        let (mut a, b) = (self.to_array(), other.to_array());
        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        Sym3::from_array(a)
    }

    /// Eigenvalues in descending order (trigonometric closed form).
    pub fn eigenvalues(&self) -> [f64; 3] {
        let p1 = self.xy * self.xy + self.xz * self.xz + self.yz * self.yz;
        let q = self.trace() / 3.0;
        if p1 <= 1e-300 * (1.0 + q * q) {
            let mut d = [self.xx, self.yy, self.zz];
            d.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
            return d;
        }
        let p2 = (self.xx - q) * (self.xx - q) + (self.yy - q) * (self.yy - q) + (self.zz - q) * (self.zz - q)
            + 2.0 * p1;
        let p = sqrt(p2 / 6.0);
        let b = (self.to_mat() - Mat3::IDENTITY * q) * (1.0 / p);
        let r = (b.det() / 2.0).clamp(-1.0, 1.0);
        let phi = crate::math::acos(r) / 3.0;
        let e1 = q + 2.0 * p * cos(phi);
        let e3 = q + 2.0 * p * cos(phi + 2.0 * core::f64::consts::PI / 3.0);
        let e2 = 3.0 * q - e1 - e3;
        [e1, e2, e3]
    }
}

/// Proper rotation of the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rot2(Mat2);

impl Rot2 {
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = (sin(theta), cos(theta));
        Rot2(Mat2([[c, -s], [s, c]]))
    }

    pub fn new(m: Mat2) -> Result<Self> {
        let o = Orth2::new(m)?;
        if o.det() < 0.0 {
            return Err(Error::NotOrthogonal { defect: 2.0 });
        }
        Ok(Rot2(o.0))
    }

    pub fn matrix(&self) -> Mat2 {
        self.0
    }

    pub fn angle(&self) -> f64 {
        crate::math::atan2(self.0 .0[1][0], self.0 .0[0][0])
    }
}

/// Orthogonal map of the plane, determinant ±1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Orth2(Mat2);

impl Orth2 {
    pub const IDENTITY: Orth2 = Orth2(Mat2::IDENTITY);

    /// Accepts `m` if `mᵀm = I` within [`ORTHO_TOL`]; projects it onto
    /// `Orth(2)` if the defect is below [`REPAIR_TOL`]; rejects otherwise.
    pub fn new(m: Mat2) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NotOrthogonal { defect: f64::INFINITY });
        }
        let defect = (m.transpose() * m - Mat2::IDENTITY).max_abs();
        if defect <= ORTHO_TOL {
            return Ok(Orth2(m));
        }
        if defect > REPAIR_TOL {
            return Err(Error::NotOrthogonal { defect });
        }
        // Polar factor of a 2×2 matrix: rotation part of the nearest
        // (possibly reflected) orthogonal matrix.
        let sign = crate::math::sign(m.det());
        let flip = Mat2::diag(1.0, sign);
        let a = m * flip;
        let theta = crate::math::atan2(a.0[1][0] - a.0[0][1], a.0[0][0] + a.0[1][1]);
        Ok(Orth2(Rot2::from_angle(theta).0 * flip))
    }

    pub fn rotation(r: Rot2) -> Self {
        Orth2(r.0)
    }

    /// Reflection-or-rotation with first row `n` (unit) and determinant `sign`.
    pub fn with_first_row(n: Vec2, sign: f64) -> Result<Self> {
        let s = crate::math::sign(sign);
        Orth2::new(Mat2([[n[0], n[1]], [-s * n[1], s * n[0]]]))
    }

    pub fn matrix(&self) -> Mat2 {
        self.0
    }

    pub fn det(&self) -> f64 {
        self.0.det()
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        self.0.apply(v)
    }

    pub fn transpose(&self) -> Orth2 {
        Orth2(self.0.transpose())
    }
}

/// Proper rotation of space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rot3(Mat3);

impl Rot3 {
    pub const IDENTITY: Rot3 = Rot3(Mat3::IDENTITY);

    /// Same acceptance/repair policy as [`Orth2::new`], plus `det > 0`.
    pub fn new(m: Mat3) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NotOrthogonal { defect: f64::INFINITY });
        }
        let defect = m.orthogonality_defect();
        if m.det() <= 0.0 {
            return Err(Error::NotOrthogonal { defect: defect.max(1.0) });
        }
        if defect <= ORTHO_TOL {
            return Ok(Rot3(m));
        }
        if defect > REPAIR_TOL {
            return Err(Error::NotOrthogonal { defect });
        }
        let r = m.polar_rotation().ok_or(Error::NotOrthogonal { defect })?;
        Ok(Rot3(r))
    }

    pub fn about_z(theta: f64) -> Self {
        Rot3(Mat3::rotation_about_z(theta))
    }

    /// Rotation about a unit axis (Rodrigues).
    pub fn about_axis(axis: Vec3, theta: f64) -> Self {
        let n = scale3(1.0 / norm3(axis), axis);
        let (s, c) = (sin(theta), cos(theta));
        let k = Mat3([[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]]);
        Rot3(Mat3::IDENTITY + k * s + (k * k) * (1.0 - c))
    }

    pub fn matrix(&self) -> Mat3 {
        self.0
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        self.0.apply(v)
    }

    pub fn transpose(&self) -> Rot3 {
        Rot3(self.0.transpose())
    }

    pub fn compose(&self, other: &Rot3) -> Rot3 {
        Rot3(self.0 * other.0)
    }
}

/// `x ↦ R x + v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidMotion3 {
    pub translation: Vec3,
    pub rotation: Rot3,
}

impl RigidMotion3 {
    pub const IDENTITY: RigidMotion3 = RigidMotion3 { translation: [0.0; 3], rotation: Rot3::IDENTITY };

    pub fn apply(&self, p: Vec3) -> Vec3 {
        add3(self.rotation.apply(p), self.translation)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &RigidMotion3) -> RigidMotion3 {
        RigidMotion3 {
            translation: self.apply(other.translation),
            rotation: self.rotation.compose(&other.rotation),
        }
    }
}

/// Upper-left 2×2 block of a 3×3 matrix.
pub fn check(f: &Mat3) -> Mat2 {
    f.check()
}

/// Embeds a 2×2 matrix into the upper-left block of a zero 3×3 matrix.
pub fn hat(g: &Mat2) -> Mat3 {
    g.hat()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_and_hat_blocks() {
        assert_eq!(check(&Mat3::IDENTITY), Mat2::IDENTITY);
        assert_eq!(check(&Mat3::diag(1.0, 2.0, 3.0)), Mat2::diag(1.0, 2.0));
        let mut f = Mat3::ZERO;
        f.0[0][1] = 5.0;
        assert_eq!(check(&f).0[0][1], 5.0);
        assert_eq!(hat(&Mat2::IDENTITY), Mat3::diag(1.0, 1.0, 0.0));
        assert_eq!(hat(&Mat2::ZERO), Mat3::ZERO);
    }

    #[test]
    fn hat_after_check_loses_the_third_row() {
        let f = Mat3::diag(1.0, 2.0, 3.0);
        assert_ne!(hat(&check(&f)), f);
    }

    #[test]
    fn symmetric_part() {
        assert_eq!(Mat2::new(0.0, 1.0, -1.0, 0.0).sym(), Sym2::ZERO);
        assert_eq!(Mat2::new(1.0, 2.0, 2.0, 3.0).sym(), Sym2::new(1.0, 2.0, 3.0));
        assert_eq!(Mat2::new(0.0, 2.0, 0.0, 0.0).sym(), Sym2::new(0.0, 1.0, 0.0));
        let skew3 = Mat3([[0.0, 1.0, -2.0], [-1.0, 0.0, 3.0], [2.0, -3.0, 0.0]]);
        assert_eq!(skew3.sym(), Sym3::ZERO);
    }

    #[test]
    fn eigen_frame_closest_to_identity() {
        let e = Sym2::diag(1.0, 3.0).eigen();
        assert_eq!(e.angle, 0.0);
        assert_eq!(e.values, [1.0, 3.0]);
        let e = Sym2::new(2.0, 0.7, -1.0).eigen();
        let back = Sym2::diag(e.values[0], e.values[1]).conjugate(&e.rotation().matrix());
        assert!((back - Sym2::new(2.0, 0.7, -1.0)).max_abs() < 1e-14);
        assert!(e.angle.abs() <= core::f64::consts::FRAC_PI_4 + 1e-15);
        assert_eq!(Sym2::IDENTITY.eigen().angle, 0.0);
    }

    #[test]
    fn sym3_eigenvalues_match_diagonal_and_rotated() {
        let e = Sym3::diag(3.0, -1.0, 2.0).eigenvalues();
        assert_eq!(e, [3.0, 2.0, -1.0]);
        let r = Rot3::about_axis([1.0, 2.0, 0.5], 0.7).matrix();
        let m = (r * Mat3::diag(4.0, 1.5, -2.0) * r.transpose()).sym();
        let e = m.eigenvalues();
        assert!((e[0] - 4.0).abs() < 1e-12 && (e[1] - 1.5).abs() < 1e-12 && (e[2] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_constructors_repair_or_reject() {
        let r = Rot3::about_axis([0.3, -1.0, 0.2], 1.1).matrix();
        let mut nudged = r;
        nudged.0[0][0] += 1e-8;
        let fixed = Rot3::new(nudged).unwrap();
        assert!(fixed.matrix().orthogonality_defect() < 1e-14);
        let mut broken = r;
        broken.0[0][0] += 1e-3;
        assert!(Rot3::new(broken).is_err());
        assert!(Rot3::new(Mat3::diag(1.0, 1.0, -1.0)).is_err());

        let refl = Mat2::diag(1.0, -1.0);
        assert_eq!(Orth2::new(refl).unwrap().det(), -1.0);
        let mut near = Rot2::from_angle(0.4).matrix() * refl;
        near.0[1][0] += 5e-8;
        let o = Orth2::new(near).unwrap();
        assert!((o.matrix().transpose() * o.matrix() - Mat2::IDENTITY).max_abs() < 1e-14);
        assert!((o.det() + 1.0).abs() < 1e-14);
        assert!(Rot2::new(refl).is_err());
    }

    #[test]
    fn polar_factor_of_stretched_rotation() {
        let r = Rot3::about_axis([1.0, 1.0, 1.0], 0.9).matrix();
        let u = Sym3::from_array([1.2, 0.9, 1.1, 0.05, -0.02, 0.03]).to_mat();
        let p = (r * u).polar_rotation().unwrap();
        assert!((p - r).max_abs() < 1e-13);
    }

    #[test]
    fn cofactor_is_det_inverse_transpose() {
        let m = Mat3([[2.0, 0.3, -1.0], [0.1, 1.5, 0.2], [0.4, -0.7, 3.0]]);
        let c = m.cofactor();
        let expected = m.inverse().unwrap().transpose() * m.det();
        assert!((c - expected).max_abs() < 1e-13);
    }
}
