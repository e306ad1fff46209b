//! Recovery of k-sparse vectors from random quadratic measurements.
//!
//! The library covers the full experimental pipeline:
//!
//! * [`sensing`] — instance generation (Gaussian quadratic, rank-one
//!   phase-retrieval and binary variants), empirical risk, gradients and
//!   empirical RIP probes, with a counter-based RNG so streamed and
//!   materialized ensembles are bit-identical,
//! * [`init`] — diagonal-pivot / column-correlation / restricted-spectral
//!   initialization for the quadratic model,
//! * [`pr`] — the analogous initialization for intensity (phase retrieval)
//!   measurements,
//! * [`spf`] — sparse power factorization (outer relinearize + normalize loop
//!   around an inner iterative-hard-thresholding solve),
//! * [`tgd`] — truncated gradient descent with a data-driven threshold,
//! * [`ogp`] — overlap-landscape tools: exact overlap counts, first-moment
//!   curves, brute-force overlap-restricted minima, overlap-gap witnesses and
//!   an empirical chi-squared tail validator.
//!
//! Heavy inner sums are data-parallel through [`par`] when the `parallel`
//! feature (default) is enabled; the reduction order is fixed so results are
//! byte-identical across thread counts and to the sequential fallback.

pub mod error;
pub mod init;
pub mod instfile;
pub mod linalg;
pub mod ogp;
pub mod par;
pub mod pr;
pub mod rng;
pub mod sensing;
pub mod spf;
pub mod tgd;
pub mod trace;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
