//! Link-level simulation and analytic error-rate tools for a two-user
//! downlink in which both users share OFDM subcarriers through power-domain
//! superposition and part of the payload is carried by the joint choice of
//! active subcarriers (the signal envelope) instead of by modulated symbols.
//!
//! The crate is organised bottom-up:
//!
//! * [`codec`] — bit-to-subblock mapping: joint activation-pattern selection
//!   for the far/near user pair and BPSK symbol placement, plus the inverse.
//! * [`phy`] — power allocation, superposition, Rayleigh fading and AWGN.
//! * [`detect`] — joint maximum-likelihood detection: envelope-aware SIC at
//!   the near user and direct detection at the far user.
//! * [`quad`] — adaptive Gauss-Kronrod quadrature for the semi-infinite
//!   fading averages used by the analytic error-rate expressions.
//! * [`theory`] — closed-form and integral pairwise error probabilities and
//!   the assembled per-user BER predictions.
//! * [`metrics`] — spectral/energy efficiency bookkeeping and mergeable
//!   error tallies.
//! * [`sim`] — seeded, parallel Monte Carlo engine driving the full chain
//!   for the main scheme and three reference schemes.

pub mod codec;
pub mod detect;
pub mod metrics;
pub mod phy;
pub mod quad;
pub mod sim;
pub mod theory;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid subblock geometry (subcarrier / activation counts).
    #[error("invalid geometry: {0}")]
    Geometry(String),
    /// Invalid power split between the two users.
    #[error("invalid power allocation: {0}")]
    Allocation(String),
    /// A bit string had the wrong length for the requested operation.
    #[error("bit string has length {got}, expected {want}")]
    BitLength { got: usize, want: usize },
    /// A subblock does not correspond to any legal codebook entry.
    #[error("illegal subblock realization: {0}")]
    Pattern(String),
    /// Mismatched vector lengths in a signal-path operation.
    #[error("length mismatch: {0}")]
    Length(String),
    /// Numerical integration failed to reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    /// Invalid run configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
