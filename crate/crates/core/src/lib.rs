//! Non-autonomous dynamics of inner functions on the unit disc.
//!
//! The library works with forward compositions `G_n^m = g_{m-1} ∘ … ∘ g_n` of
//! finite Blaschke products fixing the origin. It builds the linearizing
//! coordinates `φ_n = lim_m G_n^m / Λ_n^m` (with `Λ_n^m` the product of the
//! derivatives at 0), classifies sequences by the behaviour of that derivative
//! product, verifies the conjugacy of power-map towers on annuli and punctured
//! discs, samples grand orbits, and turns the resulting component data into a
//! deformation-dimension verdict.
//!
//! Everything is deterministic: random sampling is seeded explicitly and the
//! only parallelism (rayon, sized by `WANDER_LAB_THREADS`) is used for
//! order-independent reductions.

pub mod cli;
pub mod hypgeo;
pub mod innerseq;
pub mod linearize;
pub mod orbitrel;
pub mod poly;
pub mod powertower;
pub mod sample;
pub mod teichreport;

use num_complex::Complex64;

/// Errors shared by every module. Domain violations carry enough context to
/// name the offending input; numerical failures carry a diagnostic.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point {0} lies on or outside the open unit disc")]
    OutsideDisc(Complex64),
    #[error("{what} out of range (got {value})")]
    BadParameter { what: &'static str, value: f64 },
    #[error("{what} out of range (got {value})")]
    BadIndex { what: &'static str, value: usize },
    #[error("zero #{index} has modulus {modulus}, not strictly inside the unit disc")]
    ZeroOutsideDisc { index: usize, modulus: f64 },
    #[error("rotation must be unimodular, got modulus {0}")]
    RotationNotUnimodular(f64),
    #[error("map does not fix the origin (no zero at 0)")]
    OriginNotFixed,
    #[error("origin is a critical point (zero at 0 has multiplicity > 1)")]
    DegenerateOrigin,
    #[error("cusp coordinate {0} lies outside the standard collar (boundary at log 2)")]
    OutsideCollar(f64),
    #[error("radius {radius} lies outside the annulus of modulus {modulus}")]
    OutsideAnnulus { radius: f64, modulus: f64 },
    #[error("{context}: no convergence within {limit} steps")]
    NonConvergent { context: String, limit: usize },
    #[error("classification undetermined: {0}")]
    Undetermined(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("degree mismatch at level {level}: tower expects {expected}, map has {got}")]
    DegreeMismatch { level: usize, expected: u32, got: u32 },
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error("index {index} beyond the explicit sequence of length {len}")]
    BeyondHorizon { index: usize, len: usize },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("invalid component: {0}")]
    InvalidComponent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cannot parse {path}: {detail}")]
    Parse { path: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks strict membership in the open unit disc.
pub(crate) fn check_in_disc(z: Complex64) -> Result<()> {
    if z.norm_sqr() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisc(z))
    }
}

/// Checks that a real parameter is finite and strictly positive.
pub(crate) fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::BadParameter { what, value })
    }
}
