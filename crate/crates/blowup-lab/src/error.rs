use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type; variants mirror the failure modes of the
/// individual subsystems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    /// The compatibility equation `2bR = e^{q(a + bR^2)}` has no root in the
    /// searched interval for the requested center value.
    #[error("no compatibility root in (0, {b_max}] for center value a = {center}")]
    NoCompatibleRoot { center: f64, b_max: f64 },

    #[error("non-finite value in field input")]
    NonFiniteInput,

    #[error("floating-point overflow: {0}")]
    Overflow(String),

    /// The adaptive step collapsed below time resolution; the solution is
    /// effectively at blow-up.
    #[error("time step underflow (dt = {dt:.3e})")]
    Underflow { dt: f64 },

    #[error("invalid step control: {0}")]
    InvalidControl(String),

    #[error("elapsed time must be positive (got {0})")]
    NonpositiveTime(f64),

    #[error("field point outside the domain: r = {r}, radius = {radius}")]
    Domain { r: f64, radius: f64 },

    #[error("snapshots too sparse for the requested window: {0}")]
    InsufficientSnapshots(String),

    #[error("not enough usable samples: {0}")]
    InsufficientSamples(String),

    #[error("trace maximum is not nondecreasing")]
    NonmonotoneTrace,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// The smallness gate on the reaction coefficient failed.
    #[error("coefficient smallness condition violated: lhs = {lhs:.6e} > rhs = {rhs:.6e}")]
    SmallnessViolated { lhs: f64, rhs: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown verify suite `{0}` (expected kernel|operators|conditions|supersolution)")]
    UnknownSuite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
