use thiserror::Error;

/// Errors shared across the kernel.
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NonPrimeModulus(String),
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("empty variable list")]
    EmptyVariableList,
    #[error("polynomial rings over polynomial bases are not supported")]
    NestedPolyRing,
    #[error("elements belong to different rings")]
    RingMismatch,
    #[error("{0} is not divisible by {1}")]
    NotDivisible(String, String),
    #[error("division by {0} is ambiguous: ring has {0}-torsion")]
    TorsionAmbiguity(String),
    #[error("division by zero integer")]
    DivisionByZero,
    #[error("variable `{0}` missing from assignment")]
    MissingVariable(String),
    #[error("ghost vector is not integral at index {index}: {detail}")]
    NotIntegral { index: usize, detail: String },
    #[error("monomial count {0} exceeds the configured cap {1}")]
    ResourceLimit(usize, usize),
    #[error("polynomial cache is corrupt: {0}")]
    CorruptCache(String),
    #[error("Witt vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("Witt vector length {0} exceeds the context maximum {1}")]
    LengthOverflow(usize, usize),
    #[error("delta touches truncated variable of order {0}")]
    TruncationExceeded(usize),
    #[error("Cartier elements have mismatched owner or precision")]
    Mismatch,
    #[error("nonzero coefficient dropped past V^{0} in exact mode")]
    PrecisionOverflow(usize),
    #[error("coefficient object is not torsion-free")]
    NotTorsionFree,
    #[error("isomorphism check failed: {0}")]
    IsoFailure(String),
    #[error("underlying module is not finitely generated free")]
    NotFree,
    #[error("ring does not have characteristic p = {0}")]
    NotCharP(u64),
    #[error("Frobenius is not bijective on this ring")]
    NotPerfect,
    #[error("family incompatible at level {0}")]
    IncompatibleFamily(usize),
    #[error("map is not a Frobenius lift: {0}")]
    NotFrobeniusLift(String),
    #[error("map is not a ring homomorphism: {0}")]
    NotRingHom(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
