//! Cylinders `x ↦ v + R C_r(ρ x)`, the conditions under which two of them
//! glue to a C¹ isometry across a cut, and patchworks over a subdivided
//! plate.

use alloc::string::String;
use alloc::vec::Vec;

use crate::classify::{MinimizerSet, RankOne};
use crate::domain::{Cut, PlateDomain};
use crate::math::{cos, sign, sin};
use crate::tensor::{
    add3, cross2, norm2, norm3, scale3, sub2, sub3, Mat2, Mat3, Mat3x2, Orth2, RigidMotion3, Rot3, Sym2, Vec2, Vec3,
};
use crate::{Error, Result};

/// Default number of sample points per cut for continuity checks.
pub const CUT_SAMPLES: usize = 32;
/// Jump tolerance across cuts on unit-size plates.
pub const JUMP_TOL: f64 = 1e-8;
/// Tolerance on the sine of the angle between a ruling and a cut.
pub const PARALLEL_TOL: f64 = 1e-9;

/// `(r(cos(z₁/r) − 1), r sin(z₁/r), z₂)`, or `(0, z₁, z₂)` for `r = ∞`.
pub fn profile(radius: f64, z: Vec2) -> Vec3 {
    if radius.is_infinite() {
        return [0.0, z[0], z[1]];
    }
    let th = z[0] / radius;
    [radius * (cos(th) - 1.0), radius * sin(th), z[1]]
}

/// Turning angle of the profile at `z`, zero for planes.
fn turning(radius: f64, z: Vec2) -> f64 {
    if radius.is_infinite() {
        0.0
    } else {
        z[0] / radius
    }
}

/// The planar block embedding `[[0,0],[1,0],[0,1]]` rotated about `e₃`.
fn rotated_embedding(theta: f64) -> Mat3x2 {
    let (s, c) = (sin(theta), cos(theta));
    Mat3x2([[-s, 0.0], [c, 0.0], [0.0, 1.0]])
}

/// A cylinder of radius `r ∈ (0, ∞]` placed by a rigid motion and
/// reparametrized by an orthogonal map of the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cylinder {
    radius: f64,
    pub motion: RigidMotion3,
    pub rho: Orth2,
}

impl Cylinder {
    pub fn new(radius: f64, motion: RigidMotion3, rho: Orth2) -> Result<Self> {
        if !(radius > 0.0) || radius.is_nan() {
            return Err(Error::Degenerate(alloc::format!("cylinder radius must be positive, got {radius}")));
        }
        Ok(Cylinder { radius, motion, rho })
    }

    pub fn planar(motion: RigidMotion3, rho: Orth2) -> Self {
        Cylinder { radius: f64::INFINITY, motion, rho }
    }

    /// The unplaced cylinder whose second fundamental form is `κ n ⊗ n`:
    /// radius `1/|κ|`, first row of `ρ` equal to `n`, `det ρ = sign κ`.
    pub fn from_element(e: &RankOne) -> Result<Self> {
        let n = e.normal;
        let len = norm2(n);
        let n = [n[0] / len, n[1] / len];
        if e.curvature == 0.0 {
            return Ok(Cylinder::planar(RigidMotion3::IDENTITY, Orth2::with_first_row(n, 1.0)?));
        }
        let rho = Orth2::with_first_row(n, sign(e.curvature))?;
        Cylinder::new(1.0 / e.curvature.abs(), RigidMotion3::IDENTITY, rho)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_planar(&self) -> bool {
        self.radius.is_infinite()
    }

    /// Signed principal curvature `det ρ / r`.
    pub fn curvature(&self) -> f64 {
        if self.is_planar() {
            0.0
        } else {
            self.rho.det() / self.radius
        }
    }

    pub fn eval(&self, x: Vec2) -> Vec3 {
        self.motion.apply(profile(self.radius, self.rho.apply(x)))
    }

    /// `R ∇C_r(ρx) ρ`.
    pub fn gradient(&self, x: Vec2) -> Mat3x2 {
        let z = self.rho.apply(x);
        rotated_embedding(turning(self.radius, z)).left_mul(&self.motion.rotation.matrix()).right_mul(&self.rho.matrix())
    }

    /// Unit normal `∂₁y ∧ ∂₂y`.
    pub fn normal(&self, x: Vec2) -> Vec3 {
        let z = self.rho.apply(x);
        let th = turning(self.radius, z);
        let base = if self.is_planar() { [1.0, 0.0, 0.0] } else { [cos(th), sin(th), 0.0] };
        scale3(self.rho.det(), self.motion.rotation.apply(base))
    }

    /// `(det ρ) ρᵀ diag(1/r, 0) ρ`, constant over the plane.
    pub fn second_fundamental_form(&self) -> Sym2 {
        if self.is_planar() {
            return Sym2::ZERO;
        }
        let row = self.rho.matrix().row(0);
        Sym2::dyad(row) * (self.rho.det() / self.radius)
    }

    /// Direction of the straight lines on the surface, `ρᵀe₂`.
    pub fn ruling(&self) -> Vec2 {
        self.rho.matrix().row(1)
    }

    /// Representative of `x ↦ self(x + u)` with the shift absorbed into the
    /// rigid motion.
    pub fn translate_in_plane(&self, u: Vec2) -> Result<Cylinder> {
        if self.is_planar() {
            return Err(Error::PlanarTranslation);
        }
        let w = self.rho.apply(u);
        let r = self.motion.rotation;
        let translation = add3(self.motion.translation, r.apply(profile(self.radius, w)));
        let rotation = r.compose(&Rot3::about_z(w[0] / self.radius));
        Ok(Cylinder { radius: self.radius, motion: RigidMotion3 { translation, rotation }, rho: self.rho })
    }

    /// Applies a rigid motion after the cylinder.
    pub fn moved(&self, m: &RigidMotion3) -> Cylinder {
        Cylinder { radius: self.radius, motion: m.compose(&self.motion), rho: self.rho }
    }
}

/// `R R̂_θ` at the point `p` together with `v + R C_r(ρp)`.
fn frame_at(c: &Cylinder, p: Vec2) -> (Mat3, Vec3) {
    let z = c.rho.apply(p);
    let rot = c.motion.rotation.matrix() * Mat3::rotation_about_z(turning(c.radius, z));
    (rot, c.eval(p))
}

/// `diag-block(det M, M)`: the rotation of space induced by an orthogonal
/// map of the `(e₂, e₃)` plane.
fn block(m: &Mat2) -> Mat3 {
    let a = &m.0;
    Mat3([[m.det(), 0.0, 0.0], [0.0, a[0][0], a[0][1]], [0.0, a[1][0], a[1][1]]])
}

/// Places `next` so that it meets `placed` to first order at `p`.
pub fn glue(placed: &Cylinder, next: &Cylinder, p: Vec2) -> Result<Cylinder> {
    let (frame_k, point_k) = frame_at(placed, p);
    let m = placed.rho.matrix() * next.rho.matrix().transpose();
    let z = next.rho.apply(p);
    let theta = turning(next.radius, z);
    let rotation = Rot3::new(frame_k * block(&m) * Mat3::rotation_about_z(theta).transpose())?;
    let translation = sub3(point_k, rotation.apply(profile(next.radius, z)));
    Ok(Cylinder { radius: next.radius, motion: RigidMotion3 { translation, rotation }, rho: next.rho })
}

/// Largest jumps of position and gradient between two cylinders at the
/// given points.
pub fn sampled_jump(c1: &Cylinder, c2: &Cylinder, points: &[Vec2]) -> (f64, f64) {
    points.iter().fold((0.0_f64, 0.0_f64), |(jy, jg), p| {
        (jy.max(norm3(sub3(c1.eval(*p), c2.eval(*p)))), jg.max(c1.gradient(*p).sub(&c2.gradient(*p)).max_abs()))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Violation {
    CutNotStraight,
    RulingNotParallel,
    /// The rigid motions do not satisfy the matching identities at the
    /// anchor point of the cut.
    MotionMismatch,
    /// Algebraic checks passed but sampled values jump across the cut.
    SampledJump,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PatchVerdict {
    Valid,
    /// Equal signed curvatures: the gluing imposes no condition on the cut.
    TrivialSameCurvature,
    Violation(Violation),
}

/// Algebraic part of [`patch_check`]: straightness, ruling parallelism and
/// the matching identities at the anchor, in this order.
pub fn patch_check_algebraic(c1: &Cylinder, c2: &Cylinder, cut: &Cut) -> Result<PatchVerdict> {
    validate_cut_geometry(cut)?;
    let same_curvature = match (c1.is_planar(), c2.is_planar()) {
        (true, true) => true,
        (false, false) => (c1.radius - c2.radius).abs() <= 1e-12 * c1.radius && c1.rho.det() == c2.rho.det(),
        _ => false,
    };
    if same_curvature {
        return Ok(PatchVerdict::TrivialSameCurvature);
    }
    let len = cut.length();
    if cut.chord_deviation() > 1e-9 * len {
        return Ok(PatchVerdict::Violation(Violation::CutNotStraight));
    }
    let dir = sub2(cut.end(), cut.start());
    let dir = [dir[0] / norm2(dir), dir[1] / norm2(dir)];
    for c in [c1, c2] {
        if !c.is_planar() && cross2(c.ruling(), dir).abs() > PARALLEL_TOL {
            return Ok(PatchVerdict::Violation(Violation::RulingNotParallel));
        }
    }
    let p = cut.anchor();
    let (f1, y1) = frame_at(c1, p);
    let (f2, y2) = frame_at(c2, p);
    let m = c1.rho.matrix() * c2.rho.matrix().transpose();
    let rot_defect = (f1.transpose() * f2 - block(&m)).max_abs();
    let pos_defect = norm3(sub3(y1, y2));
    let scale = 1.0 + norm3(y1).max(norm3(y2));
    if rot_defect > 1e-9 || pos_defect > 1e-9 * scale {
        return Ok(PatchVerdict::Violation(Violation::MotionMismatch));
    }
    Ok(PatchVerdict::Valid)
}

/// Two-cylinder patching test, including a sampled continuity check of
/// positions and gradients at [`CUT_SAMPLES`] points along the cut.
pub fn patch_check(c1: &Cylinder, c2: &Cylinder, cut: &Cut) -> Result<PatchVerdict> {
    let verdict = patch_check_algebraic(c1, c2, cut)?;
    if verdict != PatchVerdict::Valid {
        return Ok(verdict);
    }
    let tol = JUMP_TOL * cut_scale(cut);
    let (jy, jg) = sampled_jump(c1, c2, &cut.samples(CUT_SAMPLES));
    if jy > tol || jg > tol {
        return Ok(PatchVerdict::Violation(Violation::SampledJump));
    }
    Ok(PatchVerdict::Valid)
}

fn cut_scale(cut: &Cut) -> f64 {
    cut.points.iter().fold(cut.length(), |m, p| m.max(norm2(*p))).max(1.0)
}

fn validate_cut_geometry(cut: &Cut) -> Result<()> {
    if cut.points.len() < 2 || cut.points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::MalformedCut { index: 0, reason: "cut needs at least two finite vertices".into() });
    }
    if !(cut.length() > 0.0) || norm2(sub2(cut.end(), cut.start())) == 0.0 {
        return Err(Error::MalformedCut { index: 0, reason: "cut endpoints coincide".into() });
    }
    Ok(())
}

/// Shared boundary between two pieces along one cut.
#[derive(Clone, Debug, PartialEq)]
pub struct Interface {
    pub cut: usize,
    /// Piece on the left of the directed cut, then the one on the right.
    pub pieces: (usize, usize),
    /// Whether the two pieces are the only ones touching the cut.
    pub whole_cut: bool,
    /// Point on the shared boundary used for gluing: the lexicographically
    /// smaller endpoint when the interface is the whole cut.
    pub anchor: Vec2,
    /// Sample points of the shared boundary.
    pub samples: Vec<Vec2>,
}

/// Interfaces of a subdivided plate, found by probing both sides of every
/// cut at [`CUT_SAMPLES`] points.
pub fn interfaces(domain: &PlateDomain) -> Vec<Interface> {
    let mut out = Vec::new();
    let offset = 1e-6 * domain.diameter();
    for (c, cut) in domain.cuts().iter().enumerate() {
        let (left, right) = domain.cut_neighbors(c, CUT_SAMPLES);
        let whole = left.len() == 1 && right.len() == 1;
        for &l in &left {
            for &r in &right {
                let mut samples = Vec::new();
                let n = CUT_SAMPLES;
                for i in 0..n {
                    let s = i as f64 / (n - 1) as f64;
                    let p = cut.at(s);
                    if whole {
                        samples.push(p);
                        continue;
                    }
                    let s_in = (i as f64 + 0.5) / n as f64;
                    let q = cut.at(s_in);
                    let t = sub2(cut.at((s_in + 1e-3).min(1.0)), cut.at((s_in - 1e-3).max(0.0)));
                    let len = norm2(t);
                    let nrm = [-t[1] / len, t[0] / len];
                    let lp = domain.locate([q[0] + offset * nrm[0], q[1] + offset * nrm[1]]);
                    let rp = domain.locate([q[0] - offset * nrm[0], q[1] - offset * nrm[1]]);
                    if lp == Ok(l) && rp == Ok(r) {
                        samples.push(q);
                    }
                }
                if samples.is_empty() {
                    continue;
                }
                let anchor = if whole { cut.anchor() } else { samples[0] };
                out.push(Interface { cut: c, pieces: (l, r), whole_cut: whole, anchor, samples });
            }
        }
    }
    out
}

/// Why no pointwise minimizer exists.
#[derive(Clone, Debug, PartialEq)]
pub enum Obstruction {
    /// A cut between pieces of different curvature is not a segment.
    CurvedCut { cut: usize },
    /// A cut between pieces of different curvature does not run from
    /// boundary to boundary of the plate.
    CutEndsInside { cut: usize },
    /// A curved piece is bordered by cuts in different directions.
    NonParallelCuts { piece: usize, cuts: (usize, usize) },
    /// No optimal curvature tensor of a piece has its ruling along a cut.
    ConflictingRulings { piece: usize, cut: usize },
    /// Neighbors with equal principal curvature but no common optimal
    /// tensor; not covered by the construction.
    UnsupportedEqualCurvature { pieces: (usize, usize), cut: usize },
}

impl Obstruction {
    pub fn kind(&self) -> &'static str {
        match self {
            Obstruction::CurvedCut { .. } => "CurvedCut",
            Obstruction::CutEndsInside { .. } => "CutEndsInside",
            Obstruction::NonParallelCuts { .. } => "NonParallelCuts",
            Obstruction::ConflictingRulings { .. } => "ConflictingRulings",
            Obstruction::UnsupportedEqualCurvature { .. } => "UnsupportedEqualCurvature",
        }
    }

    /// The cut where the obstruction was detected.
    pub fn cut(&self) -> usize {
        match self {
            Obstruction::CurvedCut { cut }
            | Obstruction::CutEndsInside { cut }
            | Obstruction::ConflictingRulings { cut, .. }
            | Obstruction::UnsupportedEqualCurvature { cut, .. } => *cut,
            Obstruction::NonParallelCuts { cuts, .. } => cuts.1,
        }
    }
}

/// Data certifying that a pointwise minimizer exists.
#[derive(Clone, Debug, PartialEq)]
pub struct ExistenceWitness {
    /// One optimal curvature tensor per piece.
    pub elements: Vec<RankOne>,
    /// Interfaces across which both sides carry the same tensor and hence
    /// the same cylinder.
    pub merged: Vec<usize>,
    /// Pieces whose tensor was not forced by any cut (documented free choice).
    pub free_choices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Existence {
    Exists(ExistenceWitness),
    Obstruction { reason: Obstruction, location: Vec2 },
}

impl Existence {
    pub fn exists(&self) -> bool {
        matches!(self, Existence::Exists(_))
    }
}

/// Candidate tensors of a group of pieces that must share one cylinder.
#[derive(Clone, Debug)]
enum Candidates {
    Any(f64),
    Finite(Vec<RankOne>),
}

fn candidates(set: &MinimizerSet) -> Candidates {
    match set.case {
        crate::classify::CaseTag::Round => Candidates::Any(set.curvature),
        _ => Candidates::Finite(set.finite_elements()),
    }
}

fn same_tensor(a: &RankOne, b: &RankOne) -> bool {
    let scale = 1.0 + a.curvature.abs().max(b.curvature.abs());
    (a.tensor() - b.tensor()).max_abs() <= 1e-10 * scale
}

fn intersect(a: Candidates, b: Candidates) -> Candidates {
    match (a, b) {
        (Candidates::Any(k), Candidates::Any(_)) => Candidates::Any(k),
        (Candidates::Any(_), Candidates::Finite(f)) | (Candidates::Finite(f), Candidates::Any(_)) => Candidates::Finite(f),
        (Candidates::Finite(f), Candidates::Finite(g)) => {
            Candidates::Finite(f.into_iter().filter(|x| g.iter().any(|y| same_tensor(x, y))).collect())
        }
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Decides whether piecewise-constant targets admit an isometry whose
/// curvature is optimal on every piece, and picks the optimal tensors.
///
/// Neighbors with equal principal curvature are merged into one cylinder
/// when they share an optimal tensor; otherwise the configuration is
/// reported as unsupported.
pub fn pointwise_minimizer_exists(domain: &PlateDomain, sets: &[MinimizerSet]) -> Result<Existence> {
    let n = domain.piece_count();
    if sets.len() != n {
        return Err(Error::Unclassified { expected: n, got: sets.len() });
    }
    let ifaces = interfaces(domain);
    let curv_equal = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));

    // Merge equal-curvature neighbors.
    let mut parent: Vec<usize> = (0..n).collect();
    let mut merged = Vec::new();
    for (i, f) in ifaces.iter().enumerate() {
        let (a, b) = f.pieces;
        if curv_equal(sets[a].curvature, sets[b].curvature) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[rb] = ra;
            }
            merged.push(i);
        }
    }
    let mut group_cands: Vec<Option<Candidates>> = alloc::vec![None; n];
    for k in 0..n {
        let r = find(&mut parent, k);
        let next = match group_cands[r].take() {
            None => candidates(&sets[k]),
            Some(c) => intersect(c, candidates(&sets[k])),
        };
        group_cands[r] = Some(next);
    }
    for &i in &merged {
        let f = &ifaces[i];
        let r = find(&mut parent, f.pieces.0);
        if let Some(Candidates::Finite(v)) = &group_cands[r] {
            if v.is_empty() {
                return Ok(Existence::Obstruction {
                    reason: Obstruction::UnsupportedEqualCurvature { pieces: f.pieces, cut: f.cut },
                    location: f.anchor,
                });
            }
        }
    }

    // Geometric conditions on the remaining interfaces.
    let mut required: Vec<Option<(Vec2, usize)>> = alloc::vec![None; n];
    for (i, f) in ifaces.iter().enumerate() {
        if merged.contains(&i) {
            continue;
        }
        let cut = &domain.cuts()[f.cut];
        if cut.chord_deviation() > 1e-9 * cut.length() {
            return Ok(Existence::Obstruction { reason: Obstruction::CurvedCut { cut: f.cut }, location: cut.anchor() });
        }
        for p in [cut.start(), cut.end()] {
            if !domain.on_outer_boundary(p) {
                return Ok(Existence::Obstruction { reason: Obstruction::CutEndsInside { cut: f.cut }, location: p });
            }
        }
        let d = sub2(cut.end(), cut.start());
        let dir = [d[0] / norm2(d), d[1] / norm2(d)];
        for piece in [f.pieces.0, f.pieces.1] {
            if sets[piece].curvature == 0.0 {
                continue;
            }
            let r = find(&mut parent, piece);
            match required[r] {
                None => required[r] = Some((dir, f.cut)),
                Some((prev, prev_cut)) => {
                    if cross2(prev, dir).abs() > PARALLEL_TOL {
                        return Ok(Existence::Obstruction {
                            reason: Obstruction::NonParallelCuts { piece, cuts: (prev_cut, f.cut) },
                            location: f.anchor,
                        });
                    }
                }
            }
        }
    }

    // Choose one tensor per group.
    let mut chosen: Vec<Option<RankOne>> = alloc::vec![None; n];
    let mut free_choices = Vec::new();
    for k in 0..n {
        let r = find(&mut parent, k);
        if chosen[r].is_some() {
            continue;
        }
        let cands = group_cands[r].clone().unwrap_or(Candidates::Finite(Vec::new()));
        let pick = match (required[r], cands) {
            (Some((dir, cut)), c) => {
                let normal = [-dir[1], dir[0]];
                let found = match c {
                    Candidates::Any(kappa) => Some(RankOne { curvature: kappa, normal }),
                    Candidates::Finite(v) => v.into_iter().find(|e| cross2(e.ruling(), dir).abs() <= PARALLEL_TOL),
                };
                match found {
                    Some(e) => e,
                    None => {
                        let piece = (0..n)
                            .find(|&j| find(&mut parent, j) == r && sets[j].element_with_ruling(dir, PARALLEL_TOL).is_none())
                            .unwrap_or(k);
                        let location = domain.cuts()[cut].anchor();
                        return Ok(Existence::Obstruction {
                            reason: Obstruction::ConflictingRulings { piece, cut },
                            location,
                        });
                    }
                }
            }
            (None, Candidates::Any(kappa)) => {
                free_choices.push(k);
                RankOne { curvature: kappa, normal: sets[k].frame.matrix().col(0) }
            }
            (None, Candidates::Finite(v)) => {
                if v.len() > 1 || sets[k].curvature == 0.0 {
                    free_choices.push(k);
                }
                v[0]
            }
        };
        chosen[r] = Some(pick);
    }
    let elements = (0..n).map(|k| chosen[find(&mut parent, k)].expect("every group is assigned")).collect();
    Ok(Existence::Exists(ExistenceWitness { elements, merged: merged.iter().map(|&i| ifaces[i].cut).collect(), free_choices }))
}

/// Continuity record of one interface of a patchwork.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceRecord {
    pub cut: usize,
    pub pieces: (usize, usize),
    pub anchor: Vec2,
    /// `ρ_k ρ_jᵀ` of the two sides; diagonal `diag(σ₁, σ₂)` for curved pairs.
    pub transfer: Mat2,
    pub position_jump: f64,
    pub gradient_jump: f64,
}

/// A C¹ isometry built from one cylinder per piece, optionally scaled by a
/// constant factor (an `α`-isometry for `α ≠ 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseCylinder {
    domain: PlateDomain,
    cylinders: Vec<Cylinder>,
    interfaces: Vec<InterfaceRecord>,
    scale: f64,
}

impl PiecewiseCylinder {
    /// Assembles already placed cylinders and records their interface jumps.
    pub fn from_parts(domain: PlateDomain, cylinders: Vec<Cylinder>, scale: f64) -> Result<Self> {
        if cylinders.len() != domain.piece_count() {
            return Err(Error::Domain(alloc::format!(
                "{} pieces but {} cylinders",
                domain.piece_count(),
                cylinders.len()
            )));
        }
        let interfaces = interfaces(&domain)
            .into_iter()
            .map(|f| {
                let (a, b) = f.pieces;
                let (jy, jg) = sampled_jump(&cylinders[a], &cylinders[b], &f.samples);
                InterfaceRecord {
                    cut: f.cut,
                    pieces: f.pieces,
                    anchor: f.anchor,
                    transfer: cylinders[a].rho.matrix() * cylinders[b].rho.matrix().transpose(),
                    position_jump: scale.abs() * jy,
                    gradient_jump: scale.abs() * jg,
                }
            })
            .collect();
        Ok(PiecewiseCylinder { domain, cylinders, interfaces, scale })
    }

    pub fn domain(&self) -> &PlateDomain {
        &self.domain
    }

    pub fn cylinders(&self) -> &[Cylinder] {
        &self.cylinders
    }

    pub fn interfaces(&self) -> &[InterfaceRecord] {
        &self.interfaces
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same surface multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> PiecewiseCylinder {
        let mut out = self.clone();
        out.scale *= factor;
        for r in &mut out.interfaces {
            r.position_jump *= factor.abs();
            r.gradient_jump *= factor.abs();
        }
        out
    }

    pub fn eval_in(&self, piece: usize, x: Vec2) -> Vec3 {
        scale3(self.scale, self.cylinders[piece].eval(x))
    }

    pub fn gradient_in(&self, piece: usize, x: Vec2) -> Mat3x2 {
        self.cylinders[piece].gradient(x).scale(self.scale)
    }

    pub fn normal_in(&self, piece: usize, x: Vec2) -> Vec3 {
        scale3(sign(self.scale), self.cylinders[piece].normal(x))
    }

    /// `(∇y)ᵀ∇ν` on a piece.
    pub fn curvature_in(&self, piece: usize) -> Sym2 {
        self.cylinders[piece].second_fundamental_form() * self.scale
    }

    pub fn eval(&self, x: Vec2) -> Result<Vec3> {
        let k = self.domain.locate_closed(x).ok_or(Error::Location { x: x[0], y: x[1] })?;
        Ok(self.eval_in(k, x))
    }

    pub fn max_position_jump(&self) -> f64 {
        self.interfaces.iter().fold(0.0, |m, r| m.max(r.position_jump))
    }

    pub fn max_gradient_jump(&self) -> f64 {
        self.interfaces.iter().fold(0.0, |m, r| m.max(r.gradient_jump))
    }

    /// `max |∇yᵀ∇y − s² I|` over the given points.
    pub fn isometry_defect(&self, points: &[Vec2]) -> f64 {
        let target = Mat2::IDENTITY * (self.scale * self.scale);
        points
            .iter()
            .filter_map(|p| self.domain.locate_closed(*p).map(|k| (k, *p)))
            .fold(0.0, |m, (k, p)| m.max((self.gradient_in(k, p).gram() - target).max_abs()))
    }

    /// Applies a rigid motion to the whole surface (in unscaled units).
    pub fn moved(&self, m: &RigidMotion3) -> PiecewiseCylinder {
        let mut out = self.clone();
        out.cylinders = self.cylinders.iter().map(|c| c.moved(m)).collect();
        out
    }
}

/// Builds the patchwork for the given tensors: piece 0 keeps the identity
/// motion; every other piece is glued at the anchor of an interface with an
/// already placed neighbor. All interfaces are then sampled and any jump
/// above tolerance is reported as a construction error.
pub fn construct_patchwork(domain: &PlateDomain, elements: &[RankOne]) -> Result<PiecewiseCylinder> {
    let n = domain.piece_count();
    if elements.len() != n {
        return Err(Error::Unclassified { expected: n, got: elements.len() });
    }
    let base: Vec<Cylinder> = elements.iter().map(Cylinder::from_element).collect::<Result<_>>()?;
    let ifaces = interfaces(domain);
    let mut placed: Vec<Option<Cylinder>> = alloc::vec![None; n];
    placed[0] = Some(base[0]);
    let mut queue = alloc::collections::VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        let ck = placed[k].expect("queued pieces are placed");
        for f in &ifaces {
            let j = match f.pieces {
                (a, b) if a == k => b,
                (a, b) if b == k => a,
                _ => continue,
            };
            if placed[j].is_some() {
                continue;
            }
            placed[j] = Some(glue(&ck, &base[j], f.anchor)?);
            queue.push_back(j);
        }
    }
    let cylinders: Vec<Cylinder> = placed
        .into_iter()
        .enumerate()
        .map(|(k, c)| c.ok_or(Error::Construction { cut: 0, reason: alloc::format!("piece {k} is not connected to piece 0") }))
        .collect::<Result<_>>()?;
    let surface = PiecewiseCylinder::from_parts(domain.clone(), cylinders, 1.0)?;
    let tol = JUMP_TOL * domain.diameter().max(1.0);
    for r in &surface.interfaces {
        if r.position_jump > tol || r.gradient_jump > tol {
            let reason: String = alloc::format!(
                "jump across pieces {:?}: position {:e}, gradient {:e}",
                r.pieces,
                r.position_jump,
                r.gradient_jump
            );
            return Err(Error::Construction { cut: r.cut, reason });
        }
    }
    Ok(surface)
}
