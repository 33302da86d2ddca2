use thiserror::Error;

use crate::model::State;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("flux is not finite at rho = {rho}, a = {a}")]
    DegenerateFlux { rho: f64, a: f64 },
    #[error("states coincide (rho = {rho})")]
    CoincidentStates { rho: f64 },
    #[error("states not on a common a-curve: u_l = {u_l}, u_r = {u_r}")]
    OffCurve { u_l: f64, u_r: f64 },
    #[error("xi = {xi} lies outside the fan for u_l = {u_l}")]
    OutsideFan { u_l: f64, xi: f64 },
    #[error("no a-rarefaction exists when a = -1")]
    NoRarefaction,
    #[error("contact curve evaluated at its pole rho = {rho_bar}")]
    Pole { rho_bar: f64 },
    #[error("left state sits on rho = rho_bar; use the vertical contact")]
    VerticalBranch,
    #[error("state rho = {rho} is not on the critical line rho = {rho_bar}")]
    NotOnCriticalLine { rho: f64, rho_bar: f64 },
    #[error("full degeneracy: velocity vanishes")]
    FullDegeneracy,
    #[error("delta-speed quadratic has no real root (discriminant {disc})")]
    NoDeltaSpeed { disc: f64 },
    #[error("delta-speed quadratic degenerates completely")]
    DegenerateQuadratic,
    #[error("[rho u] = 0: pair is not in the delta regime")]
    NotInDeltaRegime,
    #[error("delta weight rate {rate} is not positive")]
    NonGrowingDelta { rate: f64 },
    #[error("unsupported shadow-wave exponents {0:?}")]
    UnsupportedAnsatz((f64, f64, f64, f64)),
    #[error("{admissible} of the delta-speed roots {roots:?} are overcompressive")]
    AmbiguousRootFinding { roots: Vec<f64>, admissible: usize },
    #[error("no intersection: {0}")]
    NoIntersection(String),
    #[error("non-finite update at t = {t}")]
    BlowupDetected { t: f64 },
    #[error("maximal wave speed vanishes; the field cannot be stepped")]
    StagnantField,
    #[error("field at t = 0 has no self-similar profile")]
    NotSelfSimilarYet,
    #[error("no delta-like peak detected")]
    NoSingularityDetected,
    #[error("invariant region violated at {state:?}: normal component {normal}")]
    InvariantRegionViolation { state: State, normal: f64 },
    #[error("desingularization divides by {0}")]
    Desingularization(f64),
    #[error("spectrum {found:?} differs from {expected:?}")]
    SpectrumMismatch { expected: Vec<f64>, found: Vec<f64> },
    #[error("heteroclinic orbit not found: {0}")]
    HeteroclinicNotFound(String),
    #[error("viscous profile not found: {0}")]
    ProfileNotFound(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the CLI. Every variant maps to its own value.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams(_) => 10,
            Error::DegenerateFlux { .. } => 11,
            Error::CoincidentStates { .. } => 12,
            Error::OffCurve { .. } => 13,
            Error::OutsideFan { .. } => 14,
            Error::NoRarefaction => 15,
            Error::Pole { .. } => 16,
            Error::VerticalBranch => 17,
            Error::NotOnCriticalLine { .. } => 18,
            Error::FullDegeneracy => 19,
            Error::NoDeltaSpeed { .. } => 20,
            Error::DegenerateQuadratic => 21,
            Error::NotInDeltaRegime => 22,
            Error::NonGrowingDelta { .. } => 23,
            Error::UnsupportedAnsatz(_) => 24,
            Error::AmbiguousRootFinding { .. } => 25,
            Error::NoIntersection(_) => 26,
            Error::BlowupDetected { .. } => 27,
            Error::StagnantField => 28,
            Error::NotSelfSimilarYet => 29,
            Error::NoSingularityDetected => 30,
            Error::InvariantRegionViolation { .. } => 31,
            Error::Desingularization(_) => 32,
            Error::SpectrumMismatch { .. } => 33,
            Error::HeteroclinicNotFound(_) => 34,
            Error::ProfileNotFound(_) => 35,
            Error::Integration(_) => 36,
            Error::Config(_) => 4,
            Error::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
