use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("fractional order must lie strictly inside (0, 1), got {0}")]
    FractionalOrderOutOfRange(f64),

    #[error("invalid kernel spec: {0}")]
    InvalidKernel(String),

    #[error(
        "{name} = {value} is not commensurate with the grid spacing h = {spacing} \
         ({name}/h = {ratio})"
    )]
    NonCommensurate {
        name: &'static str,
        value: f64,
        spacing: f64,
        ratio: f64,
    },

    #[error("moment of order {k} over [{a}, {b}] diverges for the singular kernel")]
    NonIntegrableMoment { k: u8, a: f64, b: f64 },

    #[error(
        "singularity truncation eps = {eps:e} is below the admissible minimum {min:e} \
         for grid spacing h = {h}"
    )]
    EpsilonTooSmall { eps: f64, min: f64, h: f64 },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },

    #[error("factorization failed at row {row} (non-positive pivot {pivot:e})")]
    Factorization { row: usize, pivot: f64 },

    #[error("non-finite value produced at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },

    #[error(
        "spectral box too small: |u({edge})| = {value:e} exceeds {bound:e}; \
         double the box half-width"
    )]
    TailMass { edge: f64, value: f64, bound: f64 },

    #[error("initial data does not vanish at the grid ends ({value:e} > {bound:e})")]
    TailTruncation { value: f64, bound: f64 },

    #[error("system {label} requires {requirement}; got {detail}")]
    RegimeMismatch {
        label: &'static str,
        requirement: &'static str,
        detail: String,
    },

    #[error(
        "grid would need {nodes} nodes, above the cap {cap}; \
         coarsen the spacing to at least h = {suggested_h:e}"
    )]
    ResourceCap {
        nodes: usize,
        cap: usize,
        suggested_h: f64,
    },

    #[error("sweep entry {param} = {value} failed: {source}")]
    SweepEntry {
        param: &'static str,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("check {name} failed: {detail}")]
    CheckFailed { name: String, detail: String },

    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Factorization { .. }
            | Error::NonFinite { .. }
            | Error::TailMass { .. }
            | Error::CheckFailed { .. } => true,
            Error::SweepEntry { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
