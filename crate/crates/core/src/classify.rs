//! Pointwise minimizers of the bending density over rank-one curvature
//! tensors: closed-form classification and a brute-force oracle.

use alloc::vec::Vec;

use crate::forms::q2_sym;
use crate::math::{cos, golden_section, rem_euclid, sin, sqrt};
use crate::tensor::{cross2, Mat2, Rot2, Sym2, Vec2};
use crate::{Error, Result};

/// Relative tolerance separating `|a| > |b|` from `|a| = |b|`.
pub const CASE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// Equal principal targets: every direction is optimal.
    Round,
    /// Opposite principal targets: two optimal directions.
    Saddle,
    /// First principal target dominates.
    Dominant1,
    /// Second principal target dominates.
    Dominant2,
    /// Zero target.
    Flat,
}

impl CaseTag {
    pub fn name(&self) -> &'static str {
        match self {
            CaseTag::Round => "ROUND",
            CaseTag::Saddle => "SADDLE",
            CaseTag::Dominant1 => "DOMINANT_1",
            CaseTag::Dominant2 => "DOMINANT_2",
            CaseTag::Flat => "FLAT",
        }
    }
}

/// A single optimal curvature tensor `κ n ⊗ n`. Its ruling direction is
/// `n` rotated by a quarter turn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankOne {
    pub curvature: f64,
    pub normal: Vec2,
}

impl RankOne {
    pub fn tensor(&self) -> Sym2 {
        Sym2::dyad(self.normal) * self.curvature
    }

    pub fn ruling(&self) -> Vec2 {
        [-self.normal[1], self.normal[0]]
    }
}

/// Admissible ruling directions of a minimizer set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rulings {
    Any,
    Two([Vec2; 2]),
    One(Vec2),
    Unconstrained,
}

/// Symbolic description of the set of optimal rank-one curvature tensors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimizerSet {
    pub case: CaseTag,
    /// Signed nonzero principal curvature of the optimal tensors.
    pub curvature: f64,
    /// Eigenvalues of the target in the frame [`frame`](Self::frame).
    pub eigenvalues: [f64; 2],
    /// Eigenframe of the target, the rotation closest to the identity.
    pub frame: Rot2,
}

impl MinimizerSet {
    /// Finite members: all of them except for [`CaseTag::Round`], where
    /// the members are `κ n ⊗ n` for every unit `n`.
    pub fn finite_elements(&self) -> Vec<RankOne> {
        let q = self.frame.matrix();
        let (e1, e2) = (q.col(0), q.col(1));
        match self.case {
            CaseTag::Flat => alloc::vec![RankOne { curvature: 0.0, normal: e1 }],
            CaseTag::Dominant1 => alloc::vec![RankOne { curvature: self.curvature, normal: e1 }],
            CaseTag::Dominant2 => alloc::vec![RankOne { curvature: self.curvature, normal: e2 }],
            CaseTag::Saddle => alloc::vec![
                RankOne { curvature: self.curvature, normal: e1 },
                RankOne { curvature: -self.curvature, normal: e2 },
            ],
            CaseTag::Round => Vec::new(),
        }
    }

    /// A materialized sample: `samples` evenly spaced directions in the
    /// round case, the finite list otherwise.
    pub fn sample(&self, samples: usize) -> Vec<RankOne> {
        if self.case != CaseTag::Round {
            return self.finite_elements();
        }
        (0..samples.max(1))
            .map(|k| {
                let th = core::f64::consts::PI * k as f64 / samples.max(1) as f64;
                RankOne { curvature: self.curvature, normal: [cos(th), sin(th)] }
            })
            .collect()
    }

    pub fn rulings(&self) -> Rulings {
        match self.case {
            CaseTag::Flat => Rulings::Unconstrained,
            CaseTag::Round => Rulings::Any,
            CaseTag::Saddle => {
                let e = self.finite_elements();
                Rulings::Two([e[0].ruling(), e[1].ruling()])
            }
            CaseTag::Dominant1 | CaseTag::Dominant2 => Rulings::One(self.finite_elements()[0].ruling()),
        }
    }

    /// The member whose ruling is parallel to `dir`, if any. Parallelism is
    /// tested on unit vectors with absolute tolerance `tol` on the sine of
    /// the angle between them.
    pub fn element_with_ruling(&self, dir: Vec2, tol: f64) -> Option<RankOne> {
        let len = crate::tensor::norm2(dir);
        let d = [dir[0] / len, dir[1] / len];
        match self.case {
            CaseTag::Flat => Some(RankOne { curvature: 0.0, normal: [-d[1], d[0]] }),
            CaseTag::Round => Some(RankOne { curvature: self.curvature, normal: [-d[1], d[0]] }),
            _ => self.finite_elements().into_iter().find(|e| cross2(e.ruling(), d).abs() <= tol),
        }
    }

    /// Whether `f` is a member, within `tol` in the max norm.
    pub fn contains(&self, f: &Sym2, tol: f64) -> bool {
        match self.case {
            CaseTag::Round => {
                // Rank one with trace equal to the curvature.
                (f.trace() - self.curvature).abs() <= tol && f.det().abs() <= tol * (1.0 + f.max_abs())
            }
            _ => self.finite_elements().iter().any(|e| (e.tensor() - *f).max_abs() <= tol),
        }
    }
}

/// Closed-form minimizers of `Q₂(F − Ā)` over `F = c n ⊗ n`.
pub fn classify(target: &Sym2, beta: f64) -> Result<MinimizerSet> {
    if !(beta > -0.5) || !beta.is_finite() {
        return Err(Error::Moduli(alloc::format!("beta must exceed -1/2, got {beta}")));
    }
    if !target.is_finite() {
        return Err(Error::Degenerate("non-finite target curvature".into()));
    }
    let eig = target.eigen();
    let [a, b] = eig.values;
    let frame = eig.rotation();
    let set = |case, curvature| Ok(MinimizerSet { case, curvature, eigenvalues: [a, b], frame });
    if *target == Sym2::ZERO {
        return set(CaseTag::Flat, 0.0);
    }
    let (abs_a, abs_b) = (a.abs(), b.abs());
    let scale = abs_a.max(abs_b);
    if (abs_a - abs_b).abs() <= CASE_TOL * scale {
        if a * b >= 0.0 {
            let mean = 0.5 * (a + b);
            return set(CaseTag::Round, mean * (1.0 + 2.0 * beta) / (1.0 + beta));
        }
        let half = 0.5 * (a - b);
        return set(CaseTag::Saddle, half / (1.0 + beta));
    }
    if abs_a > abs_b {
        set(CaseTag::Dominant1, a + b * beta / (1.0 + beta))
    } else {
        set(CaseTag::Dominant2, b + a * beta / (1.0 + beta))
    }
}

/// `min Q₂(F − Ā)` over rank-one symmetric `F`, evaluated at a member of
/// the closed-form set.
pub fn pointwise_lower_bound_density(target: &Sym2, beta: f64, mu: f64) -> Result<f64> {
    let set = classify(target, beta)?;
    let member = set.sample(1)[0].tensor();
    Ok(q2_sym(mu, beta, &(member - *target)))
}

/// One local minimum found by [`brute_force_minimizer_set`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleMinimum {
    pub c: f64,
    pub theta: f64,
    pub value: f64,
}

impl OracleMinimum {
    pub fn tensor(&self) -> Sym2 {
        Sym2::dyad([cos(self.theta), sin(self.theta)]) * self.c
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub minimum: f64,
    pub minima: Vec<OracleMinimum>,
}

/// Grid search over `(c, θ)` with golden-section refinement in both
/// variables. `θ` sweeps `[0, π)` at `resolution` points; every refined
/// local minimum within `1e-9` of the best value is returned.
pub fn brute_force_minimizer_set(target: &Sym2, beta: f64, resolution: usize) -> Result<OracleResult> {
    if resolution < 64 {
        return Err(Error::GridTooSmall { min: 64, got: resolution });
    }
    if !(beta > -0.5) {
        return Err(Error::Moduli(alloc::format!("beta must exceed -1/2, got {beta}")));
    }
    let q = |f: &Sym2| q2_sym(1.0, beta, f);
    // |c*| ≤ sqrt(Q(Ā)/Q(n⊗n)) by Cauchy-Schwarz in the Q-inner product.
    let bound = sqrt(q(target) / (2.0 * (1.0 + beta))) + 1.0;
    let inner = |theta: f64| -> (f64, f64) {
        let nn = Sym2::dyad([cos(theta), sin(theta)]);
        golden_section(|c| q(&(nn * c - *target)), -bound, bound, 1e-13 * bound)
    };
    let h = core::f64::consts::PI / resolution as f64;
    let values: Vec<f64> = (0..resolution).map(|i| inner(i as f64 * h).1).collect();
    let mut minima = Vec::new();
    for i in 0..resolution {
        let prev = values[(i + resolution - 1) % resolution];
        let next = values[(i + 1) % resolution];
        if values[i] <= prev && values[i] <= next {
            let centre = i as f64 * h;
            let (theta, _) = golden_section(|t| inner(t).1, centre - h, centre + h, 1e-11);
            let (c, value) = inner(theta);
            minima.push(OracleMinimum { c, theta: rem_euclid(theta, core::f64::consts::PI), value });
        }
    }
    let minimum = minima.iter().map(|m| m.value).chain(values.iter().copied()).fold(f64::INFINITY, f64::min);
    minima.retain(|m| m.value <= minimum + 1e-9);
    // Flat directions (the round case) have no strict local minima; keep
    // every grid point on the optimal level as well.
    for (i, v) in values.iter().enumerate() {
        if *v <= minimum + 1e-9 && !minima.iter().any(|m| (m.theta - i as f64 * h).abs() < 0.5 * h) {
            let theta = i as f64 * h;
            let (c, value) = inner(theta);
            minima.push(OracleMinimum { c, theta, value });
        }
    }
    Ok(OracleResult { minimum, minima })
}

/// Rotates every member of a set: `ρ F ρᵀ`.
pub fn conjugate_elements(elements: &[RankOne], rho: &Mat2) -> Vec<Sym2> {
    elements.iter().map(|e| e.tensor().conjugate(rho)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_cases() {
        let s = classify(&Sym2::diag(1.0, 1.0), 0.0).unwrap();
        assert_eq!((s.case, s.curvature), (CaseTag::Round, 1.0));
        assert_eq!(s.rulings(), Rulings::Any);

        let s = classify(&Sym2::diag(1.0, -1.0), 1.0).unwrap();
        assert_eq!((s.case, s.curvature), (CaseTag::Saddle, 0.5));
        let e: Vec<Sym2> = s.finite_elements().iter().map(|e| e.tensor()).collect();
        assert!(e.contains(&Sym2::diag(0.5, 0.0)) && e.contains(&Sym2::diag(0.0, -0.5)));

        let s = classify(&Sym2::diag(2.0, 1.0), 1.0).unwrap();
        assert_eq!((s.case, s.curvature), (CaseTag::Dominant1, 2.5));
        assert_eq!(s.finite_elements()[0].tensor(), Sym2::diag(2.5, 0.0));

        let s = classify(&Sym2::ZERO, 0.3).unwrap();
        assert_eq!((s.case, s.curvature), (CaseTag::Flat, 0.0));

        let s = classify(&Sym2::diag(0.2, 1.0), 0.0).unwrap();
        assert_eq!(s.case, CaseTag::Dominant2);
        assert_eq!(s.rulings(), Rulings::One([-1.0, 0.0]));
        assert!(classify(&Sym2::IDENTITY, -0.5).is_err());
    }

    #[test]
    fn lower_bound_density_examples() {
        assert_eq!(pointwise_lower_bound_density(&Sym2::diag(1.0, 0.0), 0.4, 1.0).unwrap(), 0.0);
        assert!((pointwise_lower_bound_density(&Sym2::IDENTITY, 0.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_round_and_flat() {
        let r = brute_force_minimizer_set(&Sym2::IDENTITY, 0.0, 64).unwrap();
        assert!(r.minima.len() >= 60);
        assert!(r.minima.iter().all(|m| (m.c - 1.0).abs() < 1e-7));
        let r = brute_force_minimizer_set(&Sym2::ZERO, 0.7, 64).unwrap();
        assert!(r.minimum.abs() < 1e-20);
        assert!(r.minima.iter().all(|m| m.c.abs() < 1e-9));
    }

    #[test]
    fn oracle_agrees_on_rotated_saddle() {
        let rho = Rot2::from_angle(0.3).matrix();
        let target = Sym2::diag(1.5, -1.5).conjugate(&rho);
        let set = classify(&target, 0.8).unwrap();
        assert_eq!(set.case, CaseTag::Saddle);
        let oracle = brute_force_minimizer_set(&target, 0.8, 128).unwrap();
        assert_eq!(oracle.minima.len(), 2);
        for e in set.finite_elements() {
            assert!(oracle.minima.iter().any(|m| (m.tensor() - e.tensor()).max_abs() < 1e-6));
        }
    }
}
