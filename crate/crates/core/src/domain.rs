//! Rectangular plates subdivided by a sequence of polyline cuts.
//!
//! Each cut splits the current remainder of the plate into two components.
//! The component on the cut's [`Side`] marked as `keep` becomes the new
//! remainder; the other one is frozen as the next piece. After the last cut
//! the remainder becomes the final piece, so `n` cuts produce `n + 1`
//! pieces indexed in the order they were frozen.

use alloc::vec::Vec;

use crate::math::hypot;
use crate::quadrature::{polygon_rule, signed_area, GaussLegendre, PlanarRule};
use crate::tensor::{cross2, dot2, norm2, sub2, Vec2};
use crate::{Error, Result};

/// Which side of a directed cut (from its first to its last vertex).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Side {
    #[default]
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub points: Vec<Vec2>,
    /// Side that continues to be subdivided by later cuts.
    pub keep: Side,
}

impl Cut {
    pub fn segment(a: Vec2, b: Vec2) -> Self {
        Cut { points: alloc::vec![a, b], keep: Side::Left }
    }

    pub fn polyline(points: Vec<Vec2>, keep: Side) -> Self {
        Cut { points, keep }
    }

    pub fn start(&self) -> Vec2 {
        self.points[0]
    }

    pub fn end(&self) -> Vec2 {
        self.points[self.points.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| norm2(sub2(w[1], w[0]))).sum()
    }

    /// Largest distance of a vertex from the chord joining the endpoints.
    pub fn chord_deviation(&self) -> f64 {
        let (a, b) = (self.start(), self.end());
        let dir = sub2(b, a);
        let len = norm2(dir);
        self.points.iter().fold(0.0_f64, |m, p| m.max(cross2(dir, sub2(*p, a)).abs() / len))
    }

    /// The endpoint with lexicographically smaller coordinates.
    pub fn anchor(&self) -> Vec2 {
        let (a, b) = (self.start(), self.end());
        if (a[0], a[1]) <= (b[0], b[1]) {
            a
        } else {
            b
        }
    }

    /// Point at arclength fraction `s ∈ [0, 1]`.
    pub fn at(&self, s: f64) -> Vec2 {
        let total = self.length();
        let mut remaining = s.clamp(0.0, 1.0) * total;
        for w in self.points.windows(2) {
            let len = norm2(sub2(w[1], w[0]));
            if remaining <= len || len == 0.0 {
                let f = if len > 0.0 { remaining / len } else { 0.0 };
                return [w[0][0] + f * (w[1][0] - w[0][0]), w[0][1] + f * (w[1][1] - w[0][1])];
            }
            remaining -= len;
        }
        self.end()
    }

    /// Unit tangent and left normal of the segment containing fraction `s`.
    fn frame_at(&self, s: f64) -> (Vec2, Vec2) {
        let total = self.length();
        let mut remaining = s.clamp(0.0, 1.0) * total;
        let mut last = sub2(self.points[1], self.points[0]);
        for w in self.points.windows(2) {
            let d = sub2(w[1], w[0]);
            let len = norm2(d);
            if len > 0.0 {
                last = d;
            }
            if remaining <= len {
                break;
            }
            remaining -= len;
        }
        let len = norm2(last);
        let t = [last[0] / len, last[1] / len];
        (t, [-t[1], t[0]])
    }

    /// `n` points spread uniformly by arclength, endpoints included.
    pub fn samples(&self, n: usize) -> Vec<Vec2> {
        let n = n.max(2);
        (0..n).map(|i| self.at(i as f64 / (n - 1) as f64)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlateDomain {
    lo: Vec2,
    hi: Vec2,
    cuts: Vec<Cut>,
    pieces: Vec<Vec<Vec2>>,
    tol: f64,
}

impl PlateDomain {
    /// The rectangle `(lo₁, hi₁) × (lo₂, hi₂)` subdivided by `cuts`.
    pub fn new(lo: Vec2, hi: Vec2, cuts: Vec<Cut>) -> Result<Self> {
        if !(lo.iter().chain(&hi).all(|v| v.is_finite()) && hi[0] > lo[0] && hi[1] > lo[1]) {
            return Err(Error::Domain(alloc::format!("rectangle {lo:?}..{hi:?} is empty or not finite")));
        }
        let diameter = hypot(hi[0] - lo[0], hi[1] - lo[1]);
        let tol = 1e-9 * diameter;
        let mut remainder = alloc::vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]];
        let mut pieces = Vec::with_capacity(cuts.len() + 1);
        for (index, cut) in cuts.iter().enumerate() {
            validate_cut(index, cut, &remainder, tol)?;
            let (left, right) = split(&remainder, cut, tol)
                .map_err(|reason| Error::MalformedCut { index, reason: reason.into() })?;
            for poly in [&left, &right] {
                if signed_area(poly) <= tol * diameter {
                    return Err(Error::MalformedCut { index, reason: "cut leaves an empty component".into() });
                }
            }
            let (frozen, kept) = match cut.keep {
                Side::Left => (right, left),
                Side::Right => (left, right),
            };
            pieces.push(frozen);
            remainder = kept;
        }
        pieces.push(remainder);
        Ok(PlateDomain { lo, hi, cuts, pieces, tol })
    }

    /// Unsubdivided rectangle.
    pub fn rectangle(lo: Vec2, hi: Vec2) -> Result<Self> {
        PlateDomain::new(lo, hi, Vec::new())
    }

    pub fn lo(&self) -> Vec2 {
        self.lo
    }

    pub fn hi(&self) -> Vec2 {
        self.hi
    }

    pub fn diameter(&self) -> f64 {
        hypot(self.hi[0] - self.lo[0], self.hi[1] - self.lo[1])
    }

    pub fn area(&self) -> f64 {
        (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// Counter-clockwise boundary polygon of piece `k`.
    pub fn piece(&self, k: usize) -> &[Vec2] {
        &self.pieces[k]
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Whether `p` lies on the outer boundary of the rectangle.
    pub fn on_outer_boundary(&self, p: Vec2) -> bool {
        let t = self.tol;
        let inside = p[0] >= self.lo[0] - t && p[0] <= self.hi[0] + t && p[1] >= self.lo[1] - t && p[1] <= self.hi[1] + t;
        inside
            && ((p[0] - self.lo[0]).abs() <= t
                || (p[0] - self.hi[0]).abs() <= t
                || (p[1] - self.lo[1]).abs() <= t
                || (p[1] - self.hi[1]).abs() <= t)
    }

    /// Index of the piece whose interior contains `p`. Points outside the
    /// open rectangle or on a cut are rejected.
    pub fn locate(&self, p: Vec2) -> Result<usize> {
        let err = Error::Location { x: p[0], y: p[1] };
        let t = self.tol;
        if !(p[0] > self.lo[0] + t && p[0] < self.hi[0] - t && p[1] > self.lo[1] + t && p[1] < self.hi[1] - t) {
            return Err(err);
        }
        for cut in &self.cuts {
            if cut.points.windows(2).any(|w| segment_distance(p, w[0], w[1]) <= t) {
                return Err(err);
            }
        }
        self.pieces.iter().position(|poly| contains(poly, p)).ok_or(err)
    }

    /// Like [`locate`](Self::locate) but accepts the closed rectangle; a
    /// point on a cut goes to the lowest-indexed adjacent piece.
    pub fn locate_closed(&self, p: Vec2) -> Option<usize> {
        if let Ok(k) = self.locate(p) {
            return Some(k);
        }
        self.pieces.iter().position(|poly| contains(poly, p) || on_polygon_boundary(poly, p, self.tol))
    }

    /// Pieces touching cut `k` on each side, found by probing just off the
    /// cut at `samples` points. The first vector lists pieces on the left.
    pub fn cut_neighbors(&self, k: usize, samples: usize) -> (Vec<usize>, Vec<usize>) {
        let cut = &self.cuts[k];
        let offset = 1e-6 * self.diameter();
        let (mut left, mut right) = (Vec::new(), Vec::new());
        let n = samples.max(3);
        for i in 1..n {
            let s = i as f64 / n as f64;
            let p = cut.at(s);
            let (_, normal) = cut.frame_at(s);
            for (sign, out) in [(1.0, &mut left), (-1.0, &mut right)] {
                let q = [p[0] + sign * offset * normal[0], p[1] + sign * offset * normal[1]];
                if let Ok(j) = self.locate(q) {
                    if !out.contains(&j) {
                        out.push(j);
                    }
                }
            }
        }
        left.sort_unstable();
        right.sort_unstable();
        (left, right)
    }

    /// Quadrature rule on piece `k`: triangulation, `refine²` sub-triangles
    /// per triangle, `gauss²` collapsed nodes per sub-triangle.
    pub fn piece_rule(&self, k: usize, gauss: &GaussLegendre, refine: usize) -> Result<PlanarRule> {
        polygon_rule(gauss, &self.pieces[k], refine)
    }
}

fn validate_cut(index: usize, cut: &Cut, remainder: &[Vec2], tol: f64) -> Result<()> {
    let bad = |reason: &str| Err(Error::MalformedCut { index, reason: reason.into() });
    if cut.points.len() < 2 {
        return bad("a cut needs at least two vertices");
    }
    if cut.points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return bad("non-finite vertex");
    }
    if cut.points.windows(2).any(|w| norm2(sub2(w[1], w[0])) <= tol) {
        return bad("repeated consecutive vertex");
    }
    let segs: Vec<(Vec2, Vec2)> = cut.points.windows(2).map(|w| (w[0], w[1])).collect();
    for i in 0..segs.len() {
        for j in i + 2..segs.len() {
            if segments_intersect(segs[i].0, segs[i].1, segs[j].0, segs[j].1, tol) {
                return bad("cut intersects itself");
            }
        }
    }
    for p in [cut.start(), cut.end()] {
        if !on_polygon_boundary(remainder, p, tol) {
            return bad("endpoint is not on the boundary of the part being split");
        }
    }
    for p in &cut.points[1..cut.points.len() - 1] {
        if !contains(remainder, *p) || on_polygon_boundary(remainder, *p, tol) {
            return bad("interior vertex is not inside the part being split");
        }
    }
    // The open cut must stay in the open remainder.
    for &(a, b) in &segs {
        let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        if !contains(remainder, mid) || on_polygon_boundary(remainder, mid, tol) {
            return bad("cut runs along or outside the boundary");
        }
        let n = remainder.len();
        for e in 0..n {
            let (c, d) = (remainder[e], remainder[(e + 1) % n]);
            if proper_crossing(a, b, c, d, tol) {
                return bad("cut crosses the boundary");
            }
        }
    }
    Ok(())
}

/// Splits a counter-clockwise polygon along a cut whose endpoints lie on its
/// boundary. Returns `(left, right)` with respect to the cut direction.
fn split(poly: &[Vec2], cut: &Cut, tol: f64) -> core::result::Result<(Vec<Vec2>, Vec<Vec2>), &'static str> {
    let mut ring: Vec<Vec2> = poly.to_vec();
    insert_on_boundary(&mut ring, cut.start(), tol).ok_or("start is not on the boundary")?;
    let i1 = insert_on_boundary(&mut ring, cut.end(), tol).ok_or("end is not on the boundary")?;
    // Inserting the end may have shifted the start.
    let i0 = ring.iter().position(|p| same(*p, cut.start(), tol)).ok_or("start is not on the boundary")?;
    if i0 == i1 {
        return Err("endpoints coincide");
    }
    let n = ring.len();
    let walk = |from: usize, to: usize| {
        let mut out = Vec::new();
        let mut i = (from + 1) % n;
        while i != to {
            out.push(ring[i]);
            i = (i + 1) % n;
        }
        out
    };
    let mut left: Vec<Vec2> = cut.points.clone();
    left.extend(walk(i1, i0));
    let mut right: Vec<Vec2> = alloc::vec![ring[i0]];
    right.extend(walk(i0, i1));
    right.extend(cut.points.iter().rev().take(cut.points.len() - 1).copied());
    Ok((left, right))
}

fn same(a: Vec2, b: Vec2, tol: f64) -> bool {
    norm2(sub2(a, b)) <= tol
}

/// Ensures `p` is a vertex of `ring` and returns its index.
fn insert_on_boundary(ring: &mut Vec<Vec2>, p: Vec2, tol: f64) -> Option<usize> {
    if let Some(i) = ring.iter().position(|q| same(*q, p, tol)) {
        return Some(i);
    }
    let n = ring.len();
    let e = (0..n).find(|&e| segment_distance(p, ring[e], ring[(e + 1) % n]) <= tol)?;
    ring.insert(e + 1, p);
    Some(e + 1)
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = sub2(b, a);
    let len2 = dot2(ab, ab);
    let s = if len2 > 0.0 { (dot2(sub2(p, a), ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    norm2(sub2(p, [a[0] + s * ab[0], a[1] + s * ab[1]]))
}

fn on_polygon_boundary(poly: &[Vec2], p: Vec2, tol: f64) -> bool {
    let n = poly.len();
    (0..n).any(|e| segment_distance(p, poly[e], poly[(e + 1) % n]) <= tol)
}

/// Even-odd point-in-polygon test.
fn contains(poly: &[Vec2], p: Vec2) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2, tol: f64) -> bool {
    proper_crossing(a, b, c, d, tol)
        || segment_distance(a, c, d) <= tol
        || segment_distance(b, c, d) <= tol
        || segment_distance(c, a, b) <= tol
        || segment_distance(d, a, b) <= tol
}

/// Strict crossing of the open segments `ab` and `cd`.
fn proper_crossing(a: Vec2, b: Vec2, c: Vec2, d: Vec2, tol: f64) -> bool {
    let ab = sub2(b, a);
    let cd = sub2(d, c);
    let lab = norm2(ab);
    let lcd = norm2(cd);
    let o1 = cross2(ab, sub2(c, a)) / lab;
    let o2 = cross2(ab, sub2(d, a)) / lab;
    let o3 = cross2(cd, sub2(a, c)) / lcd;
    let o4 = cross2(cd, sub2(b, c)) / lcd;
    ((o1 > tol && o2 < -tol) || (o1 < -tol && o2 > tol)) && ((o3 > tol && o4 < -tol) || (o3 < -tol && o4 > tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strips() -> PlateDomain {
        PlateDomain::new(
            [0.0, 0.0],
            [3.0, 1.0],
            alloc::vec![
                Cut::polyline(alloc::vec![[1.0, 0.0], [1.0, 1.0]], Side::Right),
                Cut::polyline(alloc::vec![[2.0, 0.0], [2.0, 1.0]], Side::Right),
            ],
        )
        .unwrap()
    }

    #[test]
    fn strips_are_ordered_left_to_right() {
        let d = strips();
        assert_eq!(d.piece_count(), 3);
        assert_eq!(d.locate([0.5, 0.5]).unwrap(), 0);
        assert_eq!(d.locate([1.5, 0.5]).unwrap(), 1);
        assert_eq!(d.locate([2.5, 0.5]).unwrap(), 2);
        for k in 0..3 {
            assert!((signed_area(d.piece(k)) - 1.0).abs() < 1e-14);
        }
        assert!(d.locate([1.0, 0.5]).is_err());
        assert!(d.locate([3.5, 0.5]).is_err());
        assert_eq!(d.locate_closed([1.0, 0.5]), Some(0));
        assert_eq!(d.cut_neighbors(0, 8), (alloc::vec![0], alloc::vec![1]));
    }

    #[test]
    fn diagonal_corner_cut() {
        let d = PlateDomain::new(
            [0.0, 0.0],
            [3.0, 3.0],
            alloc::vec![Cut::polyline(alloc::vec![[1.0, 0.0], [1.0, 3.0]], Side::Right), Cut::segment([2.0, 3.0], [3.0, 2.0])],
        )
        .unwrap();
        assert_eq!(d.piece_count(), 3);
        assert!((signed_area(d.piece(2)) - 0.5).abs() < 1e-14);
        assert!((signed_area(d.piece(1)) - 5.5).abs() < 1e-14);
        assert_eq!(d.locate([2.9, 2.9]).unwrap(), 2);
    }

    #[test]
    fn cut_on_earlier_cut() {
        // Second cut ends on the first one.
        let d = PlateDomain::new(
            [0.0, 0.0],
            [2.0, 2.0],
            alloc::vec![
                Cut::polyline(alloc::vec![[1.0, 0.0], [1.0, 2.0]], Side::Right),
                Cut::segment([1.0, 1.0], [2.0, 1.0]),
            ],
        )
        .unwrap();
        assert_eq!(d.piece_count(), 3);
        let (left, right) = d.cut_neighbors(0, 16);
        assert_eq!(left, alloc::vec![0]);
        assert_eq!(right, alloc::vec![1, 2]);
    }

    #[test]
    fn rejects_bad_cuts() {
        let lo = [0.0, 0.0];
        let hi = [1.0, 1.0];
        assert!(PlateDomain::new(lo, hi, alloc::vec![Cut::segment([0.5, 0.2], [0.5, 1.0])]).is_err());
        assert!(PlateDomain::new(lo, hi, alloc::vec![Cut::segment([0.0, 0.0], [1.0, 0.0])]).is_err());
        let zigzag = Cut::polyline(alloc::vec![[0.2, 0.0], [0.8, 0.6], [0.8, 0.3], [0.2, 0.6], [0.2, 1.0]], Side::Left);
        assert!(PlateDomain::new(lo, hi, alloc::vec![zigzag]).is_err());
        assert!(PlateDomain::new(hi, lo, Vec::new()).is_err());
    }

    #[test]
    fn arc_cut_area_is_preserved() {
        let arc: Vec<Vec2> = (0..=16)
            .map(|i| {
                let s = i as f64 / 16.0;
                [0.5 + 0.2 * libm::sin(core::f64::consts::PI * s), s]
            })
            .collect();
        let d = PlateDomain::new([0.0, 0.0], [1.0, 1.0], alloc::vec![Cut::polyline(arc, Side::Left)]).unwrap();
        let total: f64 = (0..2).map(|k| signed_area(d.piece(k))).sum();
        assert!((total - 1.0).abs() < 1e-14);
        let g = GaussLegendre::new(3).unwrap();
        let area: f64 = (0..2).map(|k| d.piece_rule(k, &g, 1).unwrap().area()).sum();
        assert!((area - 1.0).abs() < 1e-13);
    }
}
