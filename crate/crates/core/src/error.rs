//! Error type shared by all modules.

/// Errors reported by the library. The CLI maps these onto its exit-code
/// contract (parse failures are handled by the CLI itself).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("zero vector where a nonzero direction is required")]
    ZeroVector,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unbounded region: {0}")]
    UnboundedRegion(String),

    #[error("degenerate box: {0}")]
    DegenerateBox(String),

    #[error("sample budget too small: n = {0}, minimum is 1000")]
    SampleBudget(usize),

    #[error("lattice resolution too coarse: {0}")]
    Resolution(String),

    #[error("packet support clipped by the lattice box: {0}")]
    PacketClipped(String),

    #[error("lattice spacings differ between operands")]
    SpacingMismatch,

    #[error("support too large for the direct quadratic path ({0} cells); use nullform_sectored")]
    SupportTooLarge(usize),

    #[error("region is not an approximate tiling set: {0}")]
    NonTilingRegion(String),

    #[error("missing extras for {id}: required keys {keys:?}")]
    MissingExtras { id: String, keys: Vec<String> },

    #[error("strategy {strategy} does not apply to {id}: {reason}")]
    StrategyMismatch {
        id: String,
        strategy: String,
        reason: String,
    },

    #[error("sweep budget exceeded: {got} configurations, limit {limit}")]
    BudgetExceeded { got: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
