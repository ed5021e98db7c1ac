//! Exact small-block analysis of polar codes over noisy qubit channels.
//!
//! The library follows one pipeline: a qubit channel (Kraus operators) induces
//! a pair of classical-quantum channels, one carrying an amplitude variable
//! and one carrying a phase variable. Polarizing both simultaneously splits
//! the block indices into four classes, and the class sizes give achievable
//! entanglement and secret-key rates. Everything is computed by dense,
//! numerically exact linear algebra at tiny blocklengths, backed by the
//! erasure-channel recursion when blocks grow beyond the exact budget.
//!
//! Modules mirror the pipeline:
//!
//! * [`qcore`] — states, channels, entropies, fidelities, subsystem algebra
//! * [`channels`] — induced amplitude/phase/reservoir channels and their
//!   private (shield/eavesdropper) variants
//! * [`polarize`] — channel synthesis, fidelity recursions, polarization tables
//! * [`design`] — index partitions, rate reports, private-information search
//! * [`protosim`] — state-vector simulation of the coherent and private
//!   protocols at tiny blocklengths
//! * [`report`] — CSV and structured-text emission shared by the CLI and the
//!   runnable examples
//!
//! Start with the `examples/` directory; each file there exercises one major
//! capability end to end.

pub mod channels;
pub mod design;
pub mod files;
pub mod polarize;
pub mod protosim;
pub mod qcore;
pub mod report;

use thiserror::Error;

/// Tolerance for structural invariants (hermiticity, normalization, isometry
/// defect). Violations beyond this are construction errors.
pub const TOL_STRUCTURAL: f64 = 1e-10;

/// Tolerance used by numerical assertions in reports and tests.
pub const TOL_ASSERT: f64 = 1e-9;

/// Kraus completeness tolerance for user-supplied channel files.
pub const TOL_KRAUS: f64 = 1e-8;

/// Eigenvalues of a Choi matrix below this are treated as rank noise and
/// dropped when deriving a minimal Stinespring dilation.
pub const RANK_TRUNCATION_TOL: f64 = 1e-12;

/// Exact synthesis refuses blocks whose dimension exceeds this, rather than
/// degrading silently.
pub const MAX_BLOCK_DIM: usize = 1 << 16;

/// Tighter cap for blocks that need dense eigendecompositions (outputs that
/// do not commute). Commuting outputs ride probability vectors up to
/// [`MAX_BLOCK_DIM`] instead.
pub const MAX_DENSE_BLOCK_DIM: usize = 1 << 12;

/// Crate-wide error type. The CLI maps `BudgetExceeded` to its own exit code;
/// everything else user-facing is a validation failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("label mismatch: {0}")]
    LabelMismatch(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
