//! Serializable report sections. Field order is the output order.

use morphoplate_core::classify::{MinimizerSet, RankOne};
use morphoplate_core::cylinder::{Existence, InterfaceRecord, PiecewiseCylinder};
use morphoplate_core::energy::{EnergySplit, GammaTable};
use morphoplate_core::forms::IsotropicModuli;
use morphoplate_core::gel::{GelModuli, GelParameters, RescalingCheck, SwellingSolution, ThetaEstimate};
use morphoplate_core::strain::{CompatibilityReport, Witness};
use morphoplate_core::tensor::{Mat2, Mat3, Sym2, Vec2, Vec3};
use serde::Serialize;

use crate::config::QuadratureSpec;
use crate::mesh::ReimportCheck;

/// Identifies the file type.
pub const REPORT_FORMAT: &str = "morphoplate-report";

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub format: &'static str,
    pub schema_version: u32,
    pub command: &'static str,
    pub scenario: String,
    pub settings: Settings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strain: Option<StrainSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub existence: Option<ExistenceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energies: Option<EnergySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gel: Option<GelSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Settings {
    /// Nodes per direction of the compatibility grid.
    pub grid: usize,
    pub quadrature: QuadratureSpec,
    pub moduli: ModuliOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_ladder: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh_resolution: Option<usize>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ModuliOut {
    pub mu: f64,
    pub lambda: f64,
    pub beta: f64,
}

impl From<&IsotropicModuli> for ModuliOut {
    fn from(m: &IsotropicModuli) -> Self {
        ModuliOut { mu: m.mu(), lambda: m.lambda(), beta: m.beta() }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct S2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl From<Sym2> for S2 {
    fn from(s: Sym2) -> Self {
        S2 { xx: s.xx, xy: s.xy, yy: s.yy }
    }
}

pub fn mat2(m: &Mat2) -> [[f64; 2]; 2] {
    m.0
}

pub fn mat3(m: &Mat3) -> [[f64; 3]; 3] {
    m.0
}

#[derive(Clone, Debug, Serialize)]
pub struct StrainSummary {
    pub compatibility: CompatibilityOut,
    pub pieces: Vec<PieceSummary>,
    /// Neighboring pieces that share a cut but carry the same target.
    pub equal_neighbor_targets: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompatibilityOut {
    pub compatible: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub grid: usize,
    pub spacing: Vec2,
    pub witness: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_gradient: Option<[[f64; 2]; 2]>,
    pub fit_error: Option<f64>,
    pub outside_validated_theory: bool,
}

impl CompatibilityOut {
    pub fn new(r: &CompatibilityReport, grid: usize) -> Self {
        let (witness, witness_gradient) = match &r.witness {
            None => (None, None),
            Some(Witness::Zero) => (Some("zero"), None),
            Some(Witness::Affine(m)) => (Some("affine"), Some(mat2(m))),
            Some(Witness::Grid(_)) => (Some("grid"), None),
        };
        CompatibilityOut {
            compatible: r.compatible,
            max_residual: r.max_residual,
            tolerance: r.tolerance,
            grid,
            spacing: r.spacing,
            witness,
            witness_gradient,
            fit_error: r.fit_error,
            outside_validated_theory: r.outside_validated_theory(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceSummary {
    pub index: usize,
    pub area: f64,
    pub mean_strain: S2,
    pub target_curvature: S2,
    pub classification: ClassificationOut,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationOut {
    pub case: &'static str,
    pub curvature: f64,
    pub eigenvalues: [f64; 2],
    pub frame_angle: f64,
    /// `min Q₂(F − Ā)` over optimal tensors.
    pub lower_bound_density: f64,
    /// Empty when every direction is optimal.
    pub elements: Vec<ElementOut>,
}

impl ClassificationOut {
    pub fn new(set: &MinimizerSet, lower_bound_density: f64) -> Self {
        ClassificationOut {
            case: set.case.name(),
            curvature: set.curvature,
            eigenvalues: set.eigenvalues,
            frame_angle: set.frame.angle(),
            lower_bound_density,
            elements: set.finite_elements().iter().map(ElementOut::from).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ElementOut {
    pub curvature: f64,
    pub normal: Vec2,
    pub ruling: Vec2,
}

impl From<&RankOne> for ElementOut {
    fn from(e: &RankOne) -> Self {
        ElementOut { curvature: e.curvature, normal: e.normal, ruling: e.ruling() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExistenceSummary {
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<ObstructionOut>,
    pub chosen: Vec<ElementOut>,
    pub merged_cuts: Vec<usize>,
    pub free_choices: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionOut {
    pub kind: &'static str,
    pub cut: usize,
    pub location: Vec2,
    pub detail: String,
}

impl From<&Existence> for ExistenceSummary {
    fn from(e: &Existence) -> Self {
        match e {
            Existence::Exists(w) => ExistenceSummary {
                verdict: "exists",
                obstruction: None,
                chosen: w.elements.iter().map(ElementOut::from).collect(),
                merged_cuts: w.merged.clone(),
                free_choices: w.free_choices.clone(),
            },
            Existence::Obstruction { reason, location } => ExistenceSummary {
                verdict: "obstruction",
                obstruction: Some(ObstructionOut {
                    kind: reason.kind(),
                    cut: reason.cut(),
                    location: *location,
                    detail: format!("{reason:?}"),
                }),
                chosen: Vec::new(),
                merged_cuts: Vec::new(),
                free_choices: Vec::new(),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceSummary {
    pub scale: f64,
    pub isometry_defect: f64,
    pub isometry_samples: usize,
    pub max_position_jump: f64,
    pub max_gradient_jump: f64,
    pub jump_tolerance: f64,
    pub pieces: Vec<CylinderOut>,
    pub interfaces: Vec<InterfaceOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CylinderOut {
    pub index: usize,
    /// `null` for a plane.
    pub radius: f64,
    pub rotation: [[f64; 3]; 3],
    pub translation: Vec3,
    pub parameter_map: [[f64; 2]; 2],
    pub curvature: S2,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub requested: Option<S2>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InterfaceOut {
    pub cut: usize,
    pub pieces: [usize; 2],
    pub anchor: Vec2,
    pub position_jump: f64,
    pub gradient_jump: f64,
}

impl From<&InterfaceRecord> for InterfaceOut {
    fn from(r: &InterfaceRecord) -> Self {
        InterfaceOut {
            cut: r.cut,
            pieces: [r.pieces.0, r.pieces.1],
            anchor: r.anchor,
            position_jump: r.position_jump,
            gradient_jump: r.gradient_jump,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshOut {
    pub file: String,
    pub materials: String,
    pub resolution: usize,
    pub vertices: usize,
    pub faces: usize,
    pub reimport: ReimportOut,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReimportOut {
    pub max_curvature_error: f64,
    pub points: usize,
    pub fit_radius: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl From<&ReimportCheck> for ReimportOut {
    fn from(c: &ReimportCheck) -> Self {
        ReimportOut {
            max_curvature_error: c.max_error,
            points: c.points,
            fit_radius: c.fit_radius,
            tolerance: c.tolerance,
            passed: c.passed(),
        }
    }
}

/// Surface summary with per-piece cylinder data; `requested` holds the
/// tensors the construction was asked to realize, if any.
pub fn surface_summary(s: &PiecewiseCylinder, requested: Option<&[Sym2]>, samples: &[Vec2]) -> SurfaceSummary {
    let pieces = s
        .cylinders()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let achieved = s.curvature_in(k);
            let req = requested.map(|r| r[k]);
            CylinderOut {
                index: k,
                radius: c.radius(),
                rotation: mat3(&c.motion.rotation.matrix()),
                translation: c.motion.translation,
                parameter_map: mat2(&c.rho.matrix()),
                curvature: achieved.into(),
                requested: req.map(S2::from),
                curvature_error: req.map(|r| (achieved - r).max_abs()),
            }
        })
        .collect();
    SurfaceSummary {
        scale: s.scale(),
        isometry_defect: s.isometry_defect(samples),
        isometry_samples: samples.len(),
        max_position_jump: s.max_position_jump(),
        max_gradient_jump: s.max_gradient_jump(),
        jump_tolerance: morphoplate_core::cylinder::JUMP_TOL * s.domain().diameter().max(1.0),
        pieces,
        interfaces: s.interfaces().iter().map(InterfaceOut::from).collect(),
        mesh: None,
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SplitOut {
    pub curvature_part: f64,
    pub additional: f64,
    pub total: f64,
}

impl From<&EnergySplit> for SplitOut {
    fn from(e: &EnergySplit) -> Self {
        SplitOut { curvature_part: e.curvature_part, additional: e.additional, total: e.total() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergySummary {
    pub limit: SplitOut,
    pub lower_bound: SplitOut,
    pub gap: f64,
    pub relative_gap: f64,
    pub isometry_tolerance: f64,
}

impl EnergySummary {
    pub fn new(limit: &EnergySplit, lower: &EnergySplit) -> Self {
        let gap = limit.total() - lower.total();
        EnergySummary {
            limit: limit.into(),
            lower_bound: lower.into(),
            gap,
            relative_gap: gap.abs() / lower.total().abs().max(1.0),
            isometry_tolerance: morphoplate_core::energy::ISOMETRY_TOL,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaSummary {
    pub density: &'static str,
    pub moduli: ModuliOut,
    pub limit: SplitOut,
    pub rows: Vec<GammaRowOut>,
    /// Fitted log-log slope of the gap; `null` when some gap vanishes.
    pub rate: Option<f64>,
    pub table: String,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GammaRowOut {
    pub h: f64,
    pub scaled_energy: f64,
    pub gap: f64,
    pub ratio: f64,
}

impl GammaSummary {
    pub fn new(density: &'static str, moduli: &IsotropicModuli, t: &GammaTable, table: String) -> Self {
        GammaSummary {
            density,
            moduli: moduli.into(),
            limit: (&t.limit).into(),
            rows: t
                .rows
                .iter()
                .map(|r| GammaRowOut { h: r.h, scaled_energy: r.scaled_energy, gap: r.gap, ratio: r.ratio })
                .collect(),
            rate: t.rate,
            table,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GelSummary {
    pub parameters: GelParametersOut,
    pub swelling: SwellingOut,
    pub theta: ThetaOut,
    pub moduli: GelModuliOut,
    pub closed_form_moduli: GelModuliOut,
    /// `|(1+2β)/(1+β) − (2G+2Λ)/(2G+Λ)|` with `β = Λ/(2G)`.
    pub identity_defect: f64,
    pub targets: [f64; 2],
    pub curvatures: [f64; 2],
    pub branches: Vec<BranchOut>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GelParametersOut {
    pub v: f64,
    pub nbar: f64,
    pub chi: f64,
    pub delta: f64,
}

impl From<&GelParameters> for GelParametersOut {
    fn from(p: &GelParameters) -> Self {
        GelParametersOut { v: p.v, nbar: p.nbar, chi: p.chi, delta: p.delta }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SwellingOut {
    pub alpha: f64,
    pub first_order_residual: f64,
    pub second_derivative: f64,
}

impl From<&SwellingSolution> for SwellingOut {
    fn from(s: &SwellingSolution) -> Self {
        SwellingOut { alpha: s.alpha, first_order_residual: s.first_order_residual, second_derivative: s.second_derivative }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThetaOut {
    pub value: f64,
    pub finite_difference: f64,
    pub implicit: f64,
    pub relative_disagreement: f64,
}

impl From<&ThetaEstimate> for ThetaOut {
    fn from(t: &ThetaEstimate) -> Self {
        ThetaOut {
            value: t.value(),
            finite_difference: t.finite_difference,
            implicit: t.implicit,
            relative_disagreement: t.relative_disagreement(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GelModuliOut {
    pub shear: f64,
    pub plate_lambda: f64,
    pub bulk_lambda: f64,
    pub beta: f64,
    pub fit_residual: f64,
}

impl From<&GelModuli> for GelModuliOut {
    fn from(m: &GelModuli) -> Self {
        GelModuliOut {
            shear: m.shear,
            plate_lambda: m.plate_lambda,
            bulk_lambda: m.bulk_lambda,
            beta: m.beta(),
            fit_residual: m.fit_residual,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchOut {
    pub sigma: [f64; 3],
    pub surface: SurfaceSummary,
    pub rescaling: RescalingOut,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RescalingOut {
    pub unit_problem: f64,
    pub gel_problem: f64,
    pub difference: f64,
}

impl From<&RescalingCheck> for RescalingOut {
    fn from(c: &RescalingCheck) -> Self {
        RescalingOut { unit_problem: c.unit_problem, gel_problem: c.gel_problem, difference: c.difference() }
    }
}
