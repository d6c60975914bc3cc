use thiserror::Error;

/// Failures raised by polygon constructions and analyses.
///
/// Residual-type variants carry the measured relative residual so callers can
/// report how far a numerical identity was violated.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("period must be at least 3, got {0}")]
    PeriodTooShort(usize),
    #[error("sequence lengths differ: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    #[error("non-convex: polygon is not locally convex with respect to the origin at node {node}")]
    NotLocallyConvex { node: usize },
    #[error("non-transversal: field is not transversal at edge {edge}+1/2")]
    NonTransversal { edge: usize },
    #[error("non-parallel: field increment is not tangential at edge {edge}+1/2 (residual {residual:.3e})")]
    NotParallel { edge: usize, residual: f64 },
    #[error("degenerate sign at index {index}: value lies inside the tolerance dead-band")]
    DegenerateSign { index: usize },
    #[error("non-generic polygon: four consecutive nodes are coplanar around edge {edge}+1/2")]
    NotGeneric { edge: usize },
    #[error("polygon is not equal-volume (max |alpha - 1| = {deviation:.3e})")]
    NotEqualVolume { deviation: f64 },
    #[error("lambda does not close up around the cycle (sum of tau = {sum:.3e})")]
    IntegrationInconsistent { sum: f64 },
    #[error("third derivative leaves the expected span at edge {edge}+1/2 (residual {residual:.3e})")]
    DecompositionResidual { edge: usize, residual: f64 },
    #[error("duality relation `{relation}` violated (residual {residual:.3e})")]
    DualityResidual {
        relation: &'static str,
        residual: f64,
    },
    #[error("identity `{check}` violated (residual {residual:.3e})")]
    Residual { check: &'static str, residual: f64 },
    #[error("dual of the constant-field pair is not planar (residual {residual:.3e})")]
    NotPlanarDual { residual: f64 },
    #[error("node {node} cannot be radially projected onto the plane z = 1")]
    NonProjectable { node: usize },
    #[error("field is not exact at node {node} (residual {residual:.3e})")]
    NotExact { node: usize, residual: f64 },
    #[error("equal-volume normalization is singular for n = {n} (compatibility residual {residual:.3e})")]
    SingularNormalization { n: usize, residual: f64 },
    #[error("instance generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
