use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("form is not positive definite: a = {a}, 4ac - b^2 = {det}")]
    NotPositiveDefinite { a: String, det: String },
    #[error("level must be positive, got {0}")]
    NonPositiveLevel(String),
    #[error("the zero vector has no frequency")]
    ZeroVector,
    #[error("coefficient overflow: {0}")]
    CoefficientOverflow(String),
    #[error("no lattice vector has Y <= {y_max}")]
    CutoffTooSmall { y_max: f64 },
    #[error("spectra truncated at different cutoffs: {0} vs {1}")]
    CutoffMismatch(f64, f64),
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("grid step {step} exceeds the resolution limit {limit}")]
    GridTooCoarse { step: f64, limit: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("samples are empty")]
    EmptySamples,
    #[error("sample grids differ")]
    GridMismatch,
    #[error("cutoff y_max = {y_max} is below 1/h = {inv_h}")]
    CutoffTooSmallForH { y_max: f64, inv_h: f64 },
    #[error("window width must lie in (0, 1), got {0}")]
    InvalidWindow(f64),
    #[error("pair fits none of the known regimes: {0}")]
    UnclassifiedCase(String),
    #[error("{n} has a cofactor {cofactor} beyond the trial division bound")]
    FactorizationFailure { n: u64, cofactor: u64 },
    #[error("the two routes for a({k}) disagree: {by_count} vs {by_product}")]
    RouteMismatch { k: u64, by_count: u64, by_product: u64 },
    #[error("character ({0}/.) is principal")]
    PrincipalCharacter(i64),
    #[error("3*alpha = {0} is a perfect square; use the square-case constant")]
    SquareCase(u64),
    #[error("{p}^(2*{k}) residue pairs exceed the exhaustive budget {budget}")]
    BudgetExceeded { p: u64, k: u32, budget: u64 },
    #[error("no density formula covers p = {p}, alpha = {alpha}")]
    UnhandledCase { p: u64, alpha: u64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
