//! Versioned JSON scenario files.
//!
//! Lengths are in mid-plane units and angles in radians. The plate is
//! already nondimensionalized by its thickness-to-width ratio `h`, which
//! only enters through the thickness ladder of the Γ experiment.

use std::path::Path;

use morphoplate_core::domain::{Cut, PlateDomain, Side};
use morphoplate_core::energy::QuadratureOptions;
use morphoplate_core::forms::IsotropicModuli;
use morphoplate_core::gel::GelParameters;
use morphoplate_core::strain::{ScalarProfile, StrainField, StrainProfile};
use morphoplate_core::tensor::{Sym2, Sym3};
use serde::{Deserialize, Serialize};

use crate::Error;

/// Schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub moduli: ModuliSpec,
    /// One thickness profile of the spontaneous strain per piece.
    #[serde(default)]
    pub strain: Option<Vec<StrainSpec>>,
    #[serde(default)]
    pub gel: Option<GelSpec>,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    #[serde(default)]
    pub cuts: Vec<CutSpec>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CutSpec {
    pub points: Vec<[f64; 2]>,
    /// Side of the cut, seen along its direction, that later cuts subdivide.
    #[serde(default)]
    pub keep: SideSpec,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SideSpec {
    #[default]
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModuliSpec {
    pub mu: f64,
    pub lambda: f64,
}

impl Default for ModuliSpec {
    fn default() -> Self {
        ModuliSpec { mu: 1.0, lambda: 0.0 }
    }
}

/// Symmetric 3×3 matrix by entries; missing entries are zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sym3Spec {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

impl From<Sym3Spec> for Sym3 {
    fn from(s: Sym3Spec) -> Sym3 {
        Sym3::from_array([s.xx, s.yy, s.zz, s.xy, s.xz, s.yz])
    }
}

impl From<Sym2> for Sym3Spec {
    fn from(s: Sym2) -> Sym3Spec {
        Sym3Spec { xx: s.xx, yy: s.yy, xy: s.xy, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarSpec {
    /// Coefficients of `1, t, t², …`.
    Polynomial(Vec<f64>),
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
}

impl From<&ScalarSpec> for ScalarProfile {
    fn from(s: &ScalarSpec) -> ScalarProfile {
        match s {
            ScalarSpec::Polynomial(c) => ScalarProfile::Polynomial(c.clone()),
            ScalarSpec::PiecewiseConstant { breaks, values } => {
                ScalarProfile::PiecewiseConstant { breaks: breaks.clone(), values: values.clone() }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StrainSpec {
    /// Matrix coefficients of `1, t, t², …`.
    Polynomial(Vec<Sym3Spec>),
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<Sym3Spec> },
    /// `g(t) M`.
    Scaled { profile: ScalarSpec, matrix: Sym3Spec },
}

impl StrainSpec {
    pub fn build(&self) -> Result<StrainProfile, Error> {
        Ok(match self {
            StrainSpec::Polynomial(c) => StrainProfile::polynomial(c.iter().map(|&m| m.into()).collect())?,
            StrainSpec::PiecewiseConstant { breaks, values } => {
                StrainProfile::piecewise_constant(breaks.clone(), values.iter().map(|&m| m.into()).collect())?
            }
            StrainSpec::Scaled { profile, matrix } => StrainProfile::scaled(profile.into(), (*matrix).into())?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GelParameterSpec {
    pub v: f64,
    pub nbar: f64,
    pub chi: f64,
    pub delta: f64,
}

/// Bilayer strip `(−d, d) × (0, ℓ)` with one chain density perturbation
/// per half.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GelSpec {
    pub parameters: GelParameterSpec,
    pub left: ScalarSpec,
    pub right: ScalarSpec,
    pub half_width: f64,
    pub length: f64,
}

impl GelSpec {
    pub fn parameters(&self) -> Result<GelParameters, Error> {
        let p = self.parameters;
        Ok(GelParameters::new(p.v, p.nbar, p.chi, p.delta)?)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensitySpec {
    /// Squared distance to the energy well; fixes `μ = 1, λ = 0`.
    #[default]
    DistanceToWell,
    /// St. Venant-type density with the scenario moduli.
    StVenant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub cells: usize,
    pub plane_nodes: usize,
    pub thickness_nodes: usize,
    pub profile_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        let q = QuadratureOptions::default();
        QuadratureSpec {
            cells: q.cells,
            plane_nodes: q.plane_nodes,
            thickness_nodes: q.thickness_nodes,
            profile_nodes: q.profile_nodes,
        }
    }
}

impl From<QuadratureSpec> for QuadratureOptions {
    fn from(q: QuadratureSpec) -> QuadratureOptions {
        QuadratureOptions {
            cells: q.cells,
            plane_nodes: q.plane_nodes,
            thickness_nodes: q.thickness_nodes,
            profile_nodes: q.profile_nodes,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    /// Nodes per direction of the compatibility grid.
    pub grid: usize,
    pub quadrature: QuadratureSpec,
    pub h_ladder: Vec<f64>,
    pub density: DensitySpec,
    /// Subdivisions per piece of exported meshes.
    pub mesh_resolution: usize,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        AnalysisSpec {
            grid: 33,
            quadrature: QuadratureSpec::default(),
            h_ladder: morphoplate_core::energy::DEFAULT_H_LADDER.to_vec(),
            density: DensitySpec::default(),
            mesh_resolution: 128,
        }
    }
}

/// File names written inside the output directory.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub report: String,
    /// Mesh base name; `.obj` and `.mtl` are appended.
    pub mesh: String,
    pub table: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { report: "report.json".into(), mesh: "surface".into(), table: "gamma.csv".into() }
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario, Error> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| {
            // serde_json appends the location, which the error already carries.
            let full = e.to_string();
            let suffix = format!(" at line {} column {}", e.line(), e.column());
            let message = full.strip_suffix(&suffix).unwrap_or(&full).to_string();
            Error::Schema { line: e.line(), column: e.column(), message }
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        Scenario::from_json(&text)
    }

    fn validate(&self) -> Result<(), Error> {
        let invalid = |m: &str| Err(Error::Invalid(m.to_string()));
        if self.version != SCHEMA_VERSION {
            return Err(Error::Invalid(format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.version)));
        }
        if self.analysis.grid < 3 {
            return invalid("analysis.grid must be at least 3");
        }
        if self.analysis.mesh_resolution == 0 {
            return invalid("analysis.mesh_resolution must be positive");
        }
        if self.analysis.h_ladder.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return invalid("analysis.h_ladder entries must be positive");
        }
        let q = self.analysis.quadrature;
        if q.cells == 0 || q.plane_nodes == 0 || q.thickness_nodes == 0 || q.profile_nodes == 0 {
            return invalid("quadrature sizes must be positive");
        }
        for name in [&self.output.report, &self.output.mesh, &self.output.table] {
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(Error::Invalid(format!("output name {name:?} must be a plain file name")));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<PlateDomain, Error> {
        let d = self.domain.as_ref().ok_or_else(|| Error::Invalid("scenario has no domain".into()))?;
        let cuts = d
            .cuts
            .iter()
            .map(|c| {
                let keep = match c.keep {
                    SideSpec::Left => Side::Left,
                    SideSpec::Right => Side::Right,
                };
                Cut::polyline(c.points.clone(), keep)
            })
            .collect();
        Ok(PlateDomain::new(d.lo, d.hi, cuts)?)
    }

    pub fn strain_field(&self) -> Result<StrainField, Error> {
        let domain = self.domain()?;
        let specs = self.strain.as_ref().ok_or_else(|| Error::Invalid("scenario has no strain profiles".into()))?;
        let profiles = specs.iter().map(StrainSpec::build).collect::<Result<Vec<_>, _>>()?;
        Ok(StrainField::new(domain, profiles)?)
    }

    pub fn moduli(&self) -> Result<IsotropicModuli, Error> {
        Ok(IsotropicModuli::new(self.moduli.mu, self.moduli.lambda)?)
    }

    pub fn gel(&self) -> Result<&GelSpec, Error> {
        self.gel.as_ref().ok_or_else(|| Error::Invalid("scenario has no gel section".into()))
    }

    pub fn quadrature(&self) -> QuadratureOptions {
        self.analysis.quadrature.into()
    }
}
