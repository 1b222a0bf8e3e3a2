use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used for CLI exit codes and FFI status values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: the request itself is outside the operation's domain.
    Validation,
    /// A well-posed computation failed to converge or met a degenerate case.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),

    #[error("glancing ray: |xi| = {xi} is within the glancing cutoff of 1")]
    GlancingRay { xi: f64 },
    #[error("no transversal hit for ray from s = {s} with xi = {xi}")]
    NoTransversalHit { s: f64, xi: f64 },
    #[error("newton iteration diverged after {iterations} steps (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },
    #[error("degenerate chord: endpoints coincide")]
    DegenerateChord,
    #[error("bounce {index}: {source}")]
    AtBounce {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("orbit too short: {len} points, need at least {min}")]
    OrbitTooShort { len: usize, min: usize },
    #[error("orbit leaves its invariant circle: conserved quantity drifts by {drift:e}")]
    NonCircleOrbit { drift: f64 },
    #[error("resonant rotation number {rho} (order {order})")]
    ResonantRotation { rho: f64, order: i64 },
    #[error("conjugacy fit diverged: residual {residual:e}")]
    FitDiverged { residual: f64 },
    #[error("orbit is not periodic: return defect {defect:e}")]
    NonPeriodicOrbit { defect: f64 },
    #[error("hyperbolic periodic point: trace {trace}")]
    HyperbolicPoint { trace: f64 },

    #[error("function has non-zero mean {mean_abs:e}")]
    NonZeroMean { mean_abs: f64 },
    #[error("resonant mode k = {k:?}")]
    ResonantMode { k: Vec<i64> },

    #[error("circle touches the glancing set: min sin(theta) = {min_sin:e}")]
    GlancingCircle { min_sin: f64 },
    #[error("h = {h} outside the admissible range ({lo}, {hi})")]
    HOutOfRange { h: f64, lo: f64, hi: f64 },
    #[error("circles are not exchanged by the symmetry (Hausdorff distance {hausdorff:e})")]
    NotExchanged { hausdorff: f64 },
    #[error("quadrature did not converge: last change {change:e} at {nodes} nodes")]
    QuadratureNonConvergence { nodes: usize, change: f64 },

    #[error("D(I0) = {d} is not positive")]
    NonPositiveD { d: f64 },
    #[error("missing derivative of L of order {order}")]
    MissingJet { order: usize },
    #[error("degenerate action: I0 = 0")]
    DegenerateAction,
    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("no eigenvalue at or above alpha = {alpha}")]
    EmptySpectrumAboveAlpha { alpha: f64 },
    #[error("d = {d} must exceed n/2 = {}", *n as f64 / 2.0)]
    DTooSmall { d: f64, n: usize },
    #[error("path q = {q:?} leaves its interval at t = {t}")]
    PathJumpsGap { q: (i64, i64), t: f64 },
    #[error("t-grid too coarse for q = {q:?}: step {step:e} exceeds {limit:e}")]
    GridTooCoarse { q: (i64, i64), step: f64, limit: f64 },

    #[error("rank deficient: no singular value above {threshold:e}")]
    RankDeficient { threshold: f64 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            InvalidParameter(_) | Unsupported(_) | Io(_) | Parse(_) | GlancingRay { .. }
            | DegenerateChord | OrbitTooShort { .. } | NonZeroMean { .. } | ResonantMode { .. }
            | HOutOfRange { .. } | DTooSmall { .. } | EmptySpectrumAboveAlpha { .. }
            | MissingJet { .. } | DegenerateAction | NonPeriodicOrbit { .. }
            | ResonantRotation { .. } => ErrorKind::Validation,
            AtBounce { source, .. } => source.kind(),
            _ => ErrorKind::Numerical,
        }
    }

    /// Stable machine-readable tag.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidParameter(_) => "InvalidParameter",
            Unsupported(_) => "Unsupported",
            Io(_) => "Io",
            Parse(_) => "Parse",
            GlancingRay { .. } => "GlancingRay",
            NoTransversalHit { .. } => "NoTransversalHit",
            NewtonDivergence { .. } => "NewtonDivergence",
            DegenerateChord => "DegenerateChord",
            AtBounce { source, .. } => source.code(),
            OrbitTooShort { .. } => "OrbitTooShort",
            NonCircleOrbit { .. } => "NonCircleOrbit",
            ResonantRotation { .. } => "ResonantRotation",
            FitDiverged { .. } => "FitDiverged",
            NonPeriodicOrbit { .. } => "NonPeriodicOrbit",
            HyperbolicPoint { .. } => "HyperbolicPoint",
            NonZeroMean { .. } => "NonZeroMean",
            ResonantMode { .. } => "ResonantMode",
            GlancingCircle { .. } => "GlancingCircle",
            HOutOfRange { .. } => "HOutOfRange",
            NotExchanged { .. } => "NotExchanged",
            QuadratureNonConvergence { .. } => "QuadratureNonConvergence",
            NonPositiveD { .. } => "NonPositiveD",
            MissingJet { .. } => "MissingJet",
            DegenerateAction => "DegenerateAction",
            OracleFailure(_) => "OracleFailure",
            EmptySpectrumAboveAlpha { .. } => "EmptySpectrumAboveAlpha",
            DTooSmall { .. } => "DTooSmall",
            PathJumpsGap { .. } => "PathJumpsGap",
            GridTooCoarse { .. } => "GridTooCoarse",
            RankDeficient { .. } => "RankDeficient",
        }
    }

    pub(crate) fn at_bounce(self, index: usize) -> Error {
        Error::AtBounce { index, source: Box::new(self) }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
