use thiserror::Error;

/// Errors raised by the laboratory. Domain checks are hard errors: a point
/// outside a chart, a sign condition that fails, or a degenerate matrix is
/// reported instead of being silently patched.
#[derive(Debug, Error)]
pub enum GnatError {
    #[error("point {point:?} lies outside the domain of chart `{chart}`")]
    OutsideDomain { chart: String, point: Vec<f64> },

    #[error("metric of chart `{chart}` is not positive definite at {point:?} (pivot {pivot:.3e})")]
    NotPositiveDefinite {
        chart: String,
        point: Vec<f64>,
        pivot: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("`{op}` requires a two-dimensional base, chart has dimension {dim}")]
    SurfaceOnly { op: &'static str, dim: usize },

    #[error("generator curve denominator vanishes near t = {t} (|den| = {den:.3e})")]
    CurvePole { t: f64, den: f64 },

    #[error("degenerate configuration at t = {t}: {witness}")]
    Degenerate { t: f64, witness: String },

    #[error("sign condition fails: {scalar} = {value:.6e} at t = {t}")]
    SignCondition {
        scalar: &'static str,
        value: f64,
        t: f64,
    },

    #[error("`{op}` needs a nonzero fiber vector")]
    ZeroVector { op: &'static str },

    #[error("`{op}` requires a base chart of known constant curvature, `{chart}` is not")]
    NotConstantCurvature { op: &'static str, chart: String },

    #[error("singular frame: {0}")]
    SingularFrame(String),

    #[error("eigenvalue iteration did not converge within {0} sweeps")]
    EigenNoConverge(usize),

    #[error("complex eigenvalue pair: {0}")]
    ComplexPair(String),

    #[error("empty sample: {0}")]
    EmptySample(&'static str),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, GnatError>;
