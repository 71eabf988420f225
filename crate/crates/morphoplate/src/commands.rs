//! The four analysis commands. Each writes a JSON report (plus meshes or
//! tables) into an output directory and returns the files it wrote.

use std::path::{Path, PathBuf};

use morphoplate_core::classify::{classify, pointwise_lower_bound_density, MinimizerSet};
use morphoplate_core::cylinder::{construct_patchwork, pointwise_minimizer_exists, Existence, PiecewiseCylinder};
use morphoplate_core::energy::{
    gamma_row, limit_energy, lower_bound, Density, DistanceToWell, GammaTable, QuadratureOptions, StVenant,
};
use morphoplate_core::forms::IsotropicModuli;
use morphoplate_core::gel::{bilayer_minimizers, rescaling_check, ChainDensityPerturbation};
use morphoplate_core::quadrature::{signed_area, GaussLegendre};
use morphoplate_core::strain::{compatibility_report, ScalarProfile, StrainField};
use morphoplate_core::tensor::{Sym2, Vec2};
use rayon::prelude::*;

use crate::config::{DensitySpec, Scenario, SCHEMA_VERSION};
use crate::json;
use crate::mesh::{reimport_check, tessellate, to_mtl, to_obj};
use crate::report::*;
use crate::Error;

/// Nodes per direction of the isometry check grid.
const ISOMETRY_SAMPLES: usize = 41;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Minimize,
    Gamma,
    Gel,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Minimize => "minimize",
            Command::Gamma => "gamma",
            Command::Gel => "gel",
        }
    }
}

/// Command-line overrides of the scenario's analysis settings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub h_ladder: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    /// No pointwise minimizer exists; a valid outcome, reported as such.
    Obstruction,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Obstruction => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub files: Vec<PathBuf>,
}

/// Runs `command` on `scenario`, writing into `out` (created if needed).
pub fn run(command: Command, scenario: &Scenario, overrides: &Overrides, out: &Path) -> Result<Outcome, Error> {
    let mut scenario = scenario.clone();
    if let Some(g) = overrides.grid {
        if g < 3 {
            return Err(Error::Invalid("--grid must be at least 3".into()));
        }
        scenario.analysis.grid = g;
    }
    if let Some(l) = &overrides.h_ladder {
        if l.is_empty() || l.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::Invalid("--h-ladder entries must be positive".into()));
        }
        scenario.analysis.h_ladder = l.clone();
    }
    std::fs::create_dir_all(out).map_err(|e| Error::Io { path: out.to_path_buf(), source: e })?;
    let mut writer = Writer { dir: out, files: Vec::new() };
    let status = match command {
        Command::Analyze => analyze(&scenario, &mut writer)?,
        Command::Minimize => minimize(&scenario, &mut writer)?,
        Command::Gamma => gamma(&scenario, &mut writer)?,
        Command::Gel => gel(&scenario, &mut writer)?,
    };
    Ok(Outcome { status, files: writer.files })
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Error> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::Io { path: path.clone(), source: e })?;
        self.files.push(path);
        Ok(())
    }

    fn report(&mut self, scenario: &Scenario, report: &Report) -> Result<(), Error> {
        self.write(&scenario.output.report, &json::to_vec(report))
    }

    /// Writes `base.obj` and `base.mtl` and re-measures the written mesh.
    fn mesh(&mut self, base: &str, surface: &PiecewiseCylinder, resolution: usize) -> Result<MeshOut, Error> {
        let mesh = tessellate(surface, resolution)?;
        let (obj_name, mtl_name) = (format!("{base}.obj"), format!("{base}.mtl"));
        let obj = to_obj(&mesh, &mtl_name);
        self.write(&obj_name, obj.as_bytes())?;
        self.write(&mtl_name, to_mtl(&mesh).as_bytes())?;
        let check = reimport_check(surface, &obj, resolution)?;
        Ok(MeshOut {
            file: obj_name,
            materials: mtl_name,
            resolution,
            vertices: mesh.positions.len(),
            faces: mesh.groups.iter().map(|g| g.faces.len()).sum(),
            reimport: (&check).into(),
        })
    }
}

fn base_report(command: Command, scenario: &Scenario, moduli: &IsotropicModuli) -> Report {
    Report {
        format: REPORT_FORMAT,
        schema_version: SCHEMA_VERSION,
        command: command.name(),
        scenario: scenario.name.clone(),
        settings: Settings {
            grid: scenario.analysis.grid,
            quadrature: scenario.analysis.quadrature,
            moduli: moduli.into(),
            density: None,
            h_ladder: None,
            mesh_resolution: None,
        },
        strain: None,
        existence: None,
        surface: None,
        energies: None,
        gamma: None,
        gel: None,
    }
}

/// Regular grid over the bounding box of the plate.
fn sample_points(lo: Vec2, hi: Vec2, n: usize) -> Vec<Vec2> {
    let mut pts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let (s, t) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
            pts.push([lo[0] + s * (hi[0] - lo[0]), lo[1] + t * (hi[1] - lo[1])]);
        }
    }
    pts
}

struct StrainAnalysis {
    summary: StrainSummary,
    sets: Vec<MinimizerSet>,
    report: morphoplate_core::strain::CompatibilityReport,
}

fn analyze_strain(field: &StrainField, moduli: &IsotropicModuli, grid: usize, opts: &QuadratureOptions) -> Result<StrainAnalysis, Error> {
    let gauss = GaussLegendre::new(opts.profile_nodes)?;
    let report = compatibility_report(field, grid, &gauss)?;
    let domain = field.domain();
    let mut sets = Vec::new();
    let mut pieces = Vec::new();
    let mut targets = Vec::new();
    for (k, profile) in field.profiles().iter().enumerate() {
        let target = profile.target_curvature(&gauss);
        let set = classify(&target, moduli.beta())?;
        let density = pointwise_lower_bound_density(&target, moduli.beta(), moduli.mu())?;
        pieces.push(PieceSummary {
            index: k,
            area: signed_area(domain.piece(k)).abs(),
            mean_strain: profile.mean(&gauss).into(),
            target_curvature: target.into(),
            classification: ClassificationOut::new(&set, density),
        });
        sets.push(set);
        targets.push(target);
    }
    let mut equal_neighbor_targets = Vec::new();
    for iface in morphoplate_core::cylinder::interfaces(domain) {
        let (a, b) = iface.pieces;
        let scale = 1.0 + targets[a].max_abs().max(targets[b].max_abs());
        if (targets[a] - targets[b]).max_abs() <= 1e-12 * scale && !equal_neighbor_targets.contains(&[a, b]) {
            equal_neighbor_targets.push([a, b]);
        }
    }
    let summary = StrainSummary { compatibility: CompatibilityOut::new(&report, grid), pieces, equal_neighbor_targets };
    Ok(StrainAnalysis { summary, sets, report })
}

fn analyze(scenario: &Scenario, w: &mut Writer) -> Result<Status, Error> {
    let field = scenario.strain_field()?;
    let moduli = scenario.moduli()?;
    let opts = scenario.quadrature();
    let analysis = analyze_strain(&field, &moduli, scenario.analysis.grid, &opts)?;
    let mut report = base_report(Command::Analyze, scenario, &moduli);
    report.strain = Some(analysis.summary);
    w.report(scenario, &report)?;
    Ok(Status::Success)
}

/// A patchwork with the tensor requested on each piece.
type Built = (PiecewiseCylinder, Vec<Sym2>);

/// Existence decision and, when it succeeds, the patchwork with the chosen
/// tensors.
fn patchwork(field: &StrainField, sets: &[MinimizerSet]) -> Result<(Existence, Option<Built>), Error> {
    let existence = pointwise_minimizer_exists(field.domain(), sets)?;
    let built = match &existence {
        Existence::Exists(witness) => {
            let surface = construct_patchwork(field.domain(), &witness.elements)?;
            Some((surface, witness.elements.iter().map(|e| e.tensor()).collect()))
        }
        Existence::Obstruction { .. } => None,
    };
    Ok((existence, built))
}

fn minimize(scenario: &Scenario, w: &mut Writer) -> Result<Status, Error> {
    let field = scenario.strain_field()?;
    let moduli = scenario.moduli()?;
    let opts = scenario.quadrature();
    let analysis = analyze_strain(&field, &moduli, scenario.analysis.grid, &opts)?;
    let (existence, built) = patchwork(&field, &analysis.sets)?;
    let mut report = base_report(Command::Minimize, scenario, &moduli);
    report.settings.mesh_resolution = Some(scenario.analysis.mesh_resolution);
    report.strain = Some(analysis.summary);
    report.existence = Some((&existence).into());
    let Some((surface, requested)) = built else {
        w.report(scenario, &report)?;
        return Ok(Status::Obstruction);
    };
    let domain = field.domain();
    let samples = sample_points(domain.lo(), domain.hi(), ISOMETRY_SAMPLES);
    let mut summary = surface_summary(&surface, Some(&requested), &samples);
    summary.mesh = Some(w.mesh(&scenario.output.mesh, &surface, scenario.analysis.mesh_resolution)?);
    let limit = limit_energy(&surface, &field, &moduli, &opts)?;
    let lower = lower_bound(&field, &moduli, &opts)?;
    report.surface = Some(summary);
    report.energies = Some(EnergySummary::new(&limit, &lower));
    w.report(scenario, &report)?;
    Ok(Status::Success)
}

/// The Γ table with rows computed in parallel; each row is independent, so
/// the result does not depend on the thread count.
fn parallel_gamma<W: Density + Sync + ?Sized>(
    surface: &PiecewiseCylinder,
    field: &StrainField,
    report: &morphoplate_core::strain::CompatibilityReport,
    density: &W,
    ladder: &[f64],
    opts: &QuadratureOptions,
) -> Result<GammaTable, Error> {
    if !report.compatible {
        return Err(morphoplate_core::Error::Incompatible { residual: report.max_residual }.into());
    }
    let limit = limit_energy(surface, field, &density.moduli(), opts)?;
    let rows = ladder
        .par_iter()
        .map(|&h| gamma_row(surface, field, report, density, &limit, h, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GammaTable::from_rows(limit, rows))
}

fn gamma(scenario: &Scenario, w: &mut Writer) -> Result<Status, Error> {
    let field = scenario.strain_field()?;
    let opts = scenario.quadrature();
    let (density_name, moduli) = match scenario.analysis.density {
        DensitySpec::DistanceToWell => ("distance_to_well", IsotropicModuli::new(1.0, 0.0)?),
        DensitySpec::StVenant => ("st_venant", scenario.moduli()?),
    };
    let analysis = analyze_strain(&field, &moduli, scenario.analysis.grid, &opts)?;
    let mut report = base_report(Command::Gamma, scenario, &moduli);
    report.settings.density = Some(density_name);
    report.settings.h_ladder = Some(scenario.analysis.h_ladder.clone());
    let compat = analysis.report;
    report.strain = Some(analysis.summary);
    if !compat.compatible {
        return Err(morphoplate_core::Error::Incompatible { residual: compat.max_residual }.into());
    }
    let (existence, built) = patchwork(&field, &analysis.sets)?;
    report.existence = Some((&existence).into());
    let Some((surface, requested)) = built else {
        w.report(scenario, &report)?;
        return Ok(Status::Obstruction);
    };
    let ladder = &scenario.analysis.h_ladder;
    let table = match scenario.analysis.density {
        DensitySpec::DistanceToWell => parallel_gamma(&surface, &field, &compat, &DistanceToWell { field: &field }, ladder, &opts)?,
        DensitySpec::StVenant => parallel_gamma(&surface, &field, &compat, &StVenant { field: &field, moduli }, ladder, &opts)?,
    };
    let domain = field.domain();
    let samples = sample_points(domain.lo(), domain.hi(), ISOMETRY_SAMPLES);
    report.surface = Some(surface_summary(&surface, Some(&requested), &samples));
    let lower = lower_bound(&field, &moduli, &opts)?;
    report.energies = Some(EnergySummary::new(&table.limit, &lower));
    w.write(&scenario.output.table, &gamma_csv(&table)?)?;
    report.gamma = Some(GammaSummary::new(density_name, &moduli, &table, scenario.output.table.clone()));
    w.report(scenario, &report)?;
    Ok(Status::Success)
}

fn csv_float(x: f64) -> String {
    if x.is_finite() {
        json::format_float(x)
    } else {
        "NaN".into()
    }
}

/// `h, scaled_energy, limit, gap, ratio` rows in descending `h`.
pub fn gamma_csv(table: &GammaTable) -> Result<Vec<u8>, Error> {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["h", "scaled_energy", "limit", "gap", "ratio"])?;
    for r in &table.rows {
        out.write_record([r.h, r.scaled_energy, table.limit.total(), r.gap, r.ratio].map(csv_float))?;
    }
    out.into_inner().map_err(|e| Error::Io { path: PathBuf::from("<table>"), source: e.into_error() })
}

fn gel(scenario: &Scenario, w: &mut Writer) -> Result<Status, Error> {
    let spec = scenario.gel()?;
    let params = spec.parameters()?;
    let (g1, g2): (ScalarProfile, ScalarProfile) = ((&spec.left).into(), (&spec.right).into());
    let result = bilayer_minimizers(&params, &g1, &g2, spec.half_width, spec.length)?;
    let pert = ChainDensityPerturbation::new(vec![g1, g2])?;
    let opts = scenario.quadrature();
    let constants = &result.constants;
    let m = constants.moduli;
    let closed = morphoplate_core::gel::gel_moduli_closed_form(&params, constants.alpha());
    let beta = m.beta();
    let identity_defect = ((1.0 + 2.0 * beta) / (1.0 + beta) - m.round_factor()).abs();
    let moduli = m.isotropic()?;
    let mut report = base_report(Command::Gel, scenario, &moduli);
    report.settings.mesh_resolution = Some(scenario.analysis.mesh_resolution);
    let mut branches = Vec::new();
    for (b, branch) in result.branches.iter().enumerate() {
        let s = &branch.surface;
        let domain = s.domain();
        let samples = sample_points(domain.lo(), domain.hi(), ISOMETRY_SAMPLES);
        let requested: Vec<Sym2> = result.curvatures.iter().map(|&c| Sym2::diag(c, 0.0)).collect();
        let mut summary = surface_summary(s, Some(&requested), &samples);
        let suffix = if branch.sigma[1] < 0.0 { "minus" } else { "plus" };
        let base = format!("{}_{suffix}", scenario.output.mesh);
        summary.mesh = Some(w.mesh(&base, s, scenario.analysis.mesh_resolution)?);
        let check = rescaling_check(&result, b, &pert, &opts)?;
        branches.push(BranchOut { sigma: branch.sigma, surface: summary, rescaling: (&check).into() });
    }
    report.gel = Some(GelSummary {
        parameters: (&params).into(),
        swelling: (&constants.swelling).into(),
        theta: (&constants.theta).into(),
        moduli: (&m).into(),
        closed_form_moduli: (&closed).into(),
        identity_defect,
        targets: result.targets,
        curvatures: result.curvatures,
        branches,
    });
    w.report(scenario, &report)?;
    Ok(Status::Success)
}
