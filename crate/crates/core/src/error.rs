use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not orthogonal (defect {defect:e})")]
    NotOrthogonal { defect: f64 },
    #[error("inadmissible moduli: {0}")]
    Moduli(String),
    #[error("point ({x}, {y}) is outside the plate or on a cut")]
    Location { x: f64, y: f64 },
    #[error("malformed domain: {0}")]
    Domain(String),
    #[error("malformed cut {index}: {reason}")]
    MalformedCut { index: usize, reason: String },
    #[error("invalid strain profile: {0}")]
    Profile(String),
    #[error("grid too small: need at least {min} nodes per direction, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error("singular linear system")]
    Singular,
    #[error("degenerate quadrature or grid: {0}")]
    Degenerate(String),
    #[error("surface is not an isometry (defect {defect:e} at ({x}, {y}))")]
    NotAnIsometry { defect: f64, x: f64, y: f64 },
    #[error("strain field is not compatible (max residual {residual:e}); recovery construction not covered")]
    Incompatible { residual: f64 },
    #[error("expected {expected} minimizer sets, got {got}")]
    Unclassified { expected: usize, got: usize },
    #[error("patchwork construction failed at cut {cut}: {reason}")]
    Construction { cut: usize, reason: String },
    #[error("cylinder is planar; in-plane shifts of planes are handled separately")]
    PlanarTranslation,
    #[error("free swelling stretch is at the boundary (alpha - 1 = {excess:e}, f'(1+) = {slope_at_one:e})")]
    NoSwelling { excess: f64, slope_at_one: f64 },
    #[error("invalid gel parameters: {0}")]
    GelParameters(String),
    #[error("chain density perturbation has nonzero thickness mean {mean:e} on subdomain {subdomain}")]
    MeanViolation { subdomain: usize, mean: f64 },
    #[error("bilayer needs distinct nonzero curvatures (a1 = {a1}, a2 = {a2})")]
    Bilayer { a1: f64, a2: f64 },
}
