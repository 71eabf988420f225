//! Wavefront OBJ export of cylinder patchworks and re-measurement of the
//! curvature tensor from an imported mesh.
//!
//! Every vertex carries its reference coordinates as a texture coordinate,
//! so an imported mesh still knows the parametrization it was sampled from.

use std::fmt::Write as _;

use morphoplate_core::cylinder::PiecewiseCylinder;
use morphoplate_core::quadrature::{signed_area, triangulate};
use morphoplate_core::tensor::{Sym2, Vec2, Vec3};
use nalgebra::{DMatrix, Vector3};

use crate::Error;

/// Tolerance of the re-imported curvature against the analytic one.
pub const REIMPORT_TOL: f64 = 1e-3;

/// Diffuse colours cycled over pieces.
const PALETTE: [[f64; 3]; 6] = [
    [0.10, 0.10, 0.10],
    [0.80, 0.15, 0.15],
    [0.15, 0.60, 0.20],
    [0.15, 0.35, 0.80],
    [0.85, 0.60, 0.10],
    [0.55, 0.25, 0.70],
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mesh {
    pub positions: Vec<Vec3>,
    /// Reference coordinates, one per position.
    pub params: Vec<Vec2>,
    pub groups: Vec<Group>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Group {
    pub name: String,
    pub material: String,
    /// Zero-based vertex indices, counter-clockwise in the reference plane.
    pub faces: Vec<[usize; 3]>,
}

impl Group {
    fn vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.faces.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn piece_name(k: usize) -> String {
    format!("piece_{k}")
}

fn is_axis_rectangle(poly: &[Vec2]) -> bool {
    poly.len() == 4
        && (0..4).all(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % 4]);
            a[0] == b[0] || a[1] == b[1]
        })
}

/// Samples every piece of `surface`: a `resolution × resolution` grid on
/// rectangular pieces, otherwise each triangle of the piece subdivided
/// `resolution` times per edge.
pub fn tessellate(surface: &PiecewiseCylinder, resolution: usize) -> Result<Mesh, Error> {
    if resolution == 0 {
        return Err(Error::Mesh("resolution must be positive".into()));
    }
    let n = resolution;
    let domain = surface.domain();
    let mut mesh = Mesh::default();
    for k in 0..domain.piece_count() {
        let poly = domain.piece(k);
        let mut group = Group { name: piece_name(k), material: piece_name(k), faces: Vec::new() };
        let push = |mesh: &mut Mesh, x: Vec2| {
            mesh.positions.push(surface.eval_in(k, x));
            mesh.params.push(x);
            mesh.positions.len() - 1
        };
        if is_axis_rectangle(poly) {
            let lo = [poly.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min), poly.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min)];
            let hi = [poly.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max), poly.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max)];
            let base = mesh.positions.len();
            for j in 0..=n {
                for i in 0..=n {
                    let s = [i as f64 / n as f64, j as f64 / n as f64];
                    push(&mut mesh, [lo[0] + s[0] * (hi[0] - lo[0]), lo[1] + s[1] * (hi[1] - lo[1])]);
                }
            }
            let id = |i: usize, j: usize| base + j * (n + 1) + i;
            for j in 0..n {
                for i in 0..n {
                    group.faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                    group.faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                }
            }
        } else {
            for tri in triangulate(poly)? {
                let [a, mut b, mut c] = tri;
                if signed_area(&tri) < 0.0 {
                    core::mem::swap(&mut b, &mut c);
                }
                let base = mesh.positions.len();
                let mut index = vec![vec![0usize; n + 1]; n + 1];
                for (i, row) in index.iter_mut().enumerate() {
                    for (j, slot) in row.iter_mut().enumerate().take(n + 1 - i) {
                        let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                        let x = [a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]), a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1])];
                        *slot = push(&mut mesh, x);
                    }
                }
                debug_assert!(mesh.positions.len() - base == (n + 1) * (n + 2) / 2);
                for i in 0..n {
                    for j in 0..n - i {
                        group.faces.push([index[i][j], index[i + 1][j], index[i][j + 1]]);
                        if i + j + 1 < n {
                            group.faces.push([index[i + 1][j], index[i + 1][j + 1], index[i][j + 1]]);
                        }
                    }
                }
            }
        }
        mesh.groups.push(group);
    }
    Ok(mesh)
}

/// OBJ text referencing the material library `mtl_name`.
pub fn to_obj(mesh: &Mesh, mtl_name: &str) -> String {
    let mut out = String::with_capacity(64 * mesh.positions.len());
    let _ = writeln!(out, "# morphoplate surface: {} vertices, {} pieces", mesh.positions.len(), mesh.groups.len());
    let _ = writeln!(out, "mtllib {mtl_name}");
    for p in &mesh.positions {
        let _ = writeln!(out, "v {:.12e} {:.12e} {:.12e}", p[0], p[1], p[2]);
    }
    for x in &mesh.params {
        let _ = writeln!(out, "vt {:.12e} {:.12e}", x[0], x[1]);
    }
    for g in &mesh.groups {
        let _ = writeln!(out, "g {}", g.name);
        let _ = writeln!(out, "usemtl {}", g.material);
        for f in &g.faces {
            let [a, b, c] = f.map(|i| i + 1);
            let _ = writeln!(out, "f {a}/{a} {b}/{b} {c}/{c}");
        }
    }
    out
}

/// Material library with one distinct diffuse colour per group.
pub fn to_mtl(mesh: &Mesh) -> String {
    let mut out = String::new();
    for (k, g) in mesh.groups.iter().enumerate() {
        let [r, gr, b] = PALETTE[k % PALETTE.len()];
        let _ = writeln!(out, "newmtl {}", g.material);
        let _ = writeln!(out, "Ka 0.0 0.0 0.0");
        let _ = writeln!(out, "Kd {r:.3} {gr:.3} {b:.3}");
        let _ = writeln!(out, "Ks 0.0 0.0 0.0");
        let _ = writeln!(out, "d 1.0");
        out.push('\n');
    }
    out
}

/// Reads the subset of OBJ written by [`to_obj`]: `v`, `vt`, `g`, `usemtl`
/// and triangular `f` records with texture indices.
pub fn parse_obj(text: &str) -> Result<Mesh, Error> {
    let mut mesh = Mesh::default();
    let mut texcoords: Vec<Vec2> = Vec::new();
    let mut tex_of: Vec<Option<usize>> = Vec::new();
    let bad = |line: usize, what: &str| Error::Mesh(format!("line {}: {what}", line + 1));
    let numbers = |line: usize, fields: &[&str], n: usize| -> Result<Vec<f64>, Error> {
        if fields.len() < n {
            return Err(bad(line, "too few coordinates"));
        }
        fields[..n].iter().map(|s| s.parse::<f64>().map_err(|_| bad(line, "malformed number"))).collect()
    };
    for (ln, raw) in text.lines().enumerate() {
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let Some((&tag, rest)) = fields.split_first() else { continue };
        match tag {
            "v" => {
                let c = numbers(ln, rest, 3)?;
                mesh.positions.push([c[0], c[1], c[2]]);
                tex_of.push(None);
            }
            "vt" => {
                let c = numbers(ln, rest, 2)?;
                texcoords.push([c[0], c[1]]);
            }
            "g" => mesh.groups.push(Group { name: rest.join(" "), ..Default::default() }),
            "usemtl" => {
                if mesh.groups.is_empty() {
                    mesh.groups.push(Group::default());
                }
                mesh.groups.last_mut().unwrap().material = rest.join(" ");
            }
            "f" => {
                if rest.len() != 3 {
                    return Err(bad(ln, "only triangles are supported"));
                }
                if mesh.groups.is_empty() {
                    mesh.groups.push(Group::default());
                }
                let mut face = [0usize; 3];
                for (slot, item) in face.iter_mut().zip(rest) {
                    let mut parts = item.split('/');
                    let v: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(ln, "malformed face"))?;
                    let t: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(ln, "face without texture index"))?;
                    if v == 0 || v > mesh.positions.len() || t == 0 || t > texcoords.len() {
                        return Err(bad(ln, "face index out of range"));
                    }
                    match tex_of[v - 1] {
                        Some(old) if texcoords[old] != texcoords[t - 1] => return Err(bad(ln, "vertex with two texture coordinates")),
                        _ => tex_of[v - 1] = Some(t - 1),
                    }
                    *slot = v - 1;
                }
                mesh.groups.last_mut().unwrap().faces.push(face);
            }
            _ => {}
        }
    }
    mesh.params = tex_of.iter().map(|t| t.map(|i| texcoords[i]).unwrap_or([f64::NAN; 2])).collect();
    Ok(mesh)
}

/// Monomials `uᵃvᵇ` with `a + b ≤ 4`, ordered by degree.
const FIT_TERMS: [(i32, i32); 15] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
];

/// Curvature tensor `(∇y)ᵀ∇ν` of a group at `x`, from a local quartic
/// least-squares fit of the positions against the reference coordinates of
/// the vertices within `radius` of `x`.
pub fn fitted_curvature(mesh: &Mesh, group: usize, x: Vec2, radius: f64) -> Result<Sym2, Error> {
    let g = mesh.groups.get(group).ok_or_else(|| Error::Mesh(format!("no group {group}")))?;
    let near: Vec<usize> = g
        .vertices()
        .into_iter()
        .filter(|&i| {
            let p = mesh.params[i];
            (p[0] - x[0]).hypot(p[1] - x[1]) <= radius
        })
        .collect();
    if near.len() < 2 * FIT_TERMS.len() {
        return Err(Error::Mesh(format!("only {} vertices near ({}, {})", near.len(), x[0], x[1])));
    }
    let design = DMatrix::from_fn(near.len(), FIT_TERMS.len(), |r, c| {
        let p = mesh.params[near[r]];
        let (u, v) = ((p[0] - x[0]) / radius, (p[1] - x[1]) / radius);
        let (a, b) = FIT_TERMS[c];
        u.powi(a) * v.powi(b)
    });
    let rhs = DMatrix::from_fn(near.len(), 3, |r, c| mesh.positions[near[r]][c]);
    let coef = design.svd(true, true).solve(&rhs, 1e-14).map_err(|e| Error::Mesh(e.to_string()))?;
    let row = |k: usize, s: f64| Vector3::new(coef[(k, 0)], coef[(k, 1)], coef[(k, 2)]) * s;
    let r2 = radius * radius;
    let (d1, d2) = (row(1, 1.0 / radius), row(2, 1.0 / radius));
    let (d11, d12, d22) = (row(3, 2.0 / r2), row(4, 1.0 / r2), row(5, 2.0 / r2));
    let nu = d1.cross(&d2).normalize();
    Ok(Sym2::new(-nu.dot(&d11), -nu.dot(&d12), -nu.dot(&d22)))
}

/// Worst deviation of re-measured curvature tensors from the analytic ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReimportCheck {
    pub max_error: f64,
    pub points: usize,
    /// Largest local fit radius used.
    pub fit_radius: f64,
    pub tolerance: f64,
}

impl ReimportCheck {
    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

/// Parses `obj` and compares fitted curvatures with `surface` at the
/// centroid of each piece and half way from it to every corner.
pub fn reimport_check(surface: &PiecewiseCylinder, obj: &str, resolution: usize) -> Result<ReimportCheck, Error> {
    let mesh = parse_obj(obj)?;
    let domain = surface.domain();
    if mesh.groups.len() != domain.piece_count() {
        return Err(Error::Mesh(format!("{} groups for {} pieces", mesh.groups.len(), domain.piece_count())));
    }
    let mut fit_radius: f64 = 0.0;
    let mut max_error: f64 = 0.0;
    let mut points = 0;
    for k in 0..domain.piece_count() {
        let poly = domain.piece(k);
        let extent = |i: usize| {
            let (lo, hi) = poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[i]), b.max(p[i])));
            hi - lo
        };
        // About four mesh spacings, enough vertices for the quartic fit.
        let radius = 4.0 * extent(0).max(extent(1)) / resolution as f64;
        fit_radius = fit_radius.max(radius);
        let m = poly.len() as f64;
        let c = [poly.iter().map(|p| p[0]).sum::<f64>() / m, poly.iter().map(|p| p[1]).sum::<f64>() / m];
        let exact = surface.curvature_in(k);
        let mut probe = |x: Vec2| -> Result<(), Error> {
            let fit = fitted_curvature(&mesh, k, x, radius)?;
            max_error = max_error.max((fit - exact).max_abs());
            points += 1;
            Ok(())
        };
        probe(c)?;
        for p in poly {
            probe([0.5 * (c[0] + p[0]), 0.5 * (c[1] + p[1])])?;
        }
    }
    Ok(ReimportCheck { max_error, points, fit_radius, tolerance: REIMPORT_TOL })
}
