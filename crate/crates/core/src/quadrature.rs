//! Gauss-Legendre rules on intervals, triangles and simple polygons.

use alloc::vec::Vec;

use crate::math::{cos, KahanSum};
use crate::tensor::{cross2, Vec2};
use crate::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule, exact for polynomials of degree `2n − 1`.
    ///
    /// Nodes come from Newton iteration on the three-term recurrence,
    /// started at the Chebyshev approximation.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Degenerate("quadrature rule needs at least one node".into()));
        }
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(node, weight)` pairs mapped affinely onto `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    /// Integral of `f` over `[a, b]` with compensated accumulation.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).collect::<KahanSum>().value()
    }

    /// Integral over the thickness interval `(-1/2, 1/2)`.
    pub fn thickness<F: FnMut(f64) -> f64>(&self, f: F) -> f64 {
        self.integrate(-0.5, 0.5, f)
    }
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A weighted point set in the plane.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlanarRule {
    pub points: Vec<Vec2>,
    pub weights: Vec<f64>,
}

impl PlanarRule {
    pub fn integrate<F: FnMut(Vec2) -> f64>(&self, mut f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(*p)).collect::<KahanSum>().value()
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().copied().collect::<KahanSum>().value()
    }

    pub fn extend(&mut self, other: PlanarRule) {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
    }
}

/// Collapsed-square (Duffy) rule on a triangle from an `n × n` tensor rule.
/// Exact for polynomials of degree `2n − 2`.
pub fn triangle_rule(gauss: &GaussLegendre, tri: [Vec2; 3]) -> PlanarRule {
    let [a, b, c] = tri;
    let jac = cross2([b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]]).abs();
    let mut rule = PlanarRule::default();
    for (u, wu) in gauss.on(0.0, 1.0) {
        for (v, wv) in gauss.on(0.0, 1.0) {
            // (u, v) in the unit square → (s, t) = (u, (1 − u) v) in the unit triangle.
            let s = u;
            let t = (1.0 - u) * v;
            let p = [
                a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]),
                a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1]),
            ];
            rule.points.push(p);
            rule.weights.push(wu * wv * (1.0 - u) * jac);
        }
    }
    rule
}

/// Tensor Gauss rule on an axis-aligned rectangle split into `cells × cells`
/// sub-rectangles.
pub fn rectangle_rule(gauss: &GaussLegendre, lo: Vec2, hi: Vec2, cells: usize) -> PlanarRule {
    let cells = cells.max(1);
    let (dx, dy) = ((hi[0] - lo[0]) / cells as f64, (hi[1] - lo[1]) / cells as f64);
    let mut rule = PlanarRule::default();
    for i in 0..cells {
        for j in 0..cells {
            let x0 = lo[0] + i as f64 * dx;
            let y0 = lo[1] + j as f64 * dy;
            for (x, wx) in gauss.on(x0, x0 + dx) {
                for (y, wy) in gauss.on(y0, y0 + dy) {
                    rule.points.push([x, y]);
                    rule.weights.push(wx * wy);
                }
            }
        }
    }
    rule
}

/// Signed area (positive for counter-clockwise vertex order).
pub fn signed_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            0.5 * (p[0] * q[1] - q[0] * p[1])
        })
        .collect::<KahanSum>()
        .value()
}

/// Ear-clipping triangulation of a simple counter-clockwise polygon.
/// Collinear vertices are allowed.
pub fn triangulate(poly: &[Vec2]) -> Result<Vec<[Vec2; 3]>> {
    if poly.len() < 3 {
        return Err(Error::Degenerate("polygon with fewer than three vertices".into()));
    }
    let scale = poly.iter().fold(0.0_f64, |m, p| m.max(p[0].abs()).max(p[1].abs())).max(1.0);
    let eps = 1e-13 * scale * scale;
    let mut idx: Vec<usize> = (0..poly.len()).collect();
    let mut out = Vec::with_capacity(poly.len() - 2);
    let mut guard = 0;
    while idx.len() > 3 {
        let n = idx.len();
        let mut clipped = false;
        for k in 0..n {
            let (ia, ib, ic) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            let turn = cross2([b[0] - a[0], b[1] - a[1]], [c[0] - b[0], c[1] - b[1]]);
            if turn.abs() <= eps {
                // Collinear vertex: drop it without emitting a triangle.
                idx.remove(k);
                clipped = true;
                break;
            }
            if turn < 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                j != ia && j != ib && j != ic && point_in_triangle(poly[j], a, b, c, eps)
            });
            if !blocked {
                out.push([a, b, c]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        guard += 1;
        if !clipped || guard > 10 * poly.len() {
            return Err(Error::Degenerate("polygon is not simple and counter-clockwise".into()));
        }
    }
    let (a, b, c) = (poly[idx[0]], poly[idx[1]], poly[idx[2]]);
    if cross2([b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]]) > eps {
        out.push([a, b, c]);
    }
    Ok(out)
}

fn point_in_triangle(p: Vec2, a: Vec2, b: Vec2, c: Vec2, eps: f64) -> bool {
    let d1 = cross2([b[0] - a[0], b[1] - a[1]], [p[0] - a[0], p[1] - a[1]]);
    let d2 = cross2([c[0] - b[0], c[1] - b[1]], [p[0] - b[0], p[1] - b[1]]);
    let d3 = cross2([a[0] - c[0], a[1] - c[1]], [p[0] - c[0], p[1] - c[1]]);
    d1 >= -eps && d2 >= -eps && d3 >= -eps
}

/// Quadrature on a simple counter-clockwise polygon: the polygon is
/// triangulated and every triangle is split `refine × refine` times before
/// the collapsed rule is applied.
pub fn polygon_rule(gauss: &GaussLegendre, poly: &[Vec2], refine: usize) -> Result<PlanarRule> {
    let mut rule = PlanarRule::default();
    for tri in triangulate(poly)? {
        for sub in subdivide_triangle(tri, refine.max(1)) {
            rule.extend(triangle_rule(gauss, sub));
        }
    }
    Ok(rule)
}

/// Uniform `m²`-way split of a triangle.
fn subdivide_triangle(tri: [Vec2; 3], m: usize) -> Vec<[Vec2; 3]> {
    let [a, b, c] = tri;
    let at = |i: usize, j: usize| -> Vec2 {
        let (s, t) = (i as f64 / m as f64, j as f64 / m as f64);
        [a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]), a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1])]
    };
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m - i {
            out.push([at(i, j), at(i + 1, j), at(i, j + 1)]);
            if i + j + 1 < m {
                out.push([at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        for n in 1..=20 {
            let g = GaussLegendre::new(n).unwrap();
            assert!((g.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = g.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn thickness_moments() {
        let g = GaussLegendre::new(16).unwrap();
        assert!((g.thickness(|t| 12.0 * t * t) - 1.0).abs() < 1e-15);
        assert!((g.thickness(|t| 12.0 * t.powi(4)) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn triangle_rule_degree() {
        let g = GaussLegendre::new(4).unwrap();
        let rule = triangle_rule(&g, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!((rule.area() - 0.5).abs() < 1e-15);
        // ∫ x² y dA over the unit triangle = 1/60.
        assert!((rule.integrate(|p| p[0] * p[0] * p[1]) - 1.0 / 60.0).abs() < 1e-15);
    }

    #[test]
    fn polygon_area_and_moment() {
        let g = GaussLegendre::new(3).unwrap();
        let l_shape = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
        let rule = polygon_rule(&g, &l_shape, 2).unwrap();
        assert!((rule.area() - 3.0).abs() < 1e-13);
        assert!((signed_area(&l_shape) - 3.0).abs() < 1e-15);
        // [0,2]×[0,1] contributes 2 and [0,1]×[1,2] contributes 0.5.
        assert!((rule.integrate(|p| p[0]) - 2.5).abs() < 1e-13);
    }

    #[test]
    fn collinear_vertices_are_tolerated() {
        let g = GaussLegendre::new(2).unwrap();
        let square = [[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.5]];
        assert!((polygon_rule(&g, &square, 1).unwrap().area() - 1.0).abs() < 1e-14);
    }
}
