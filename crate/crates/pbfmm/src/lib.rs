//! Fast multipole solver for screened Coulomb (linearized Poisson–Boltzmann)
//! interactions in 3-D layered dielectric media.
//!
//! The potential of `N` point charges embedded in a stack of horizontal
//! dielectric slabs splits into a free-space Yukawa part plus up to four
//! *reaction* components per layer pair, each induced by the interfaces.
//! Every reaction component is re-expressed as a single-kernel interaction
//! with *equivalent polarization sources* mirrored across the governing
//! interface, which lets one FMM skeleton (multipole/local expansions,
//! M2M/M2L/L2L) handle all of them in `O(N)` total work.
//!
//! Module map:
//!
//! * [`special_fn`] — modified spherical Bessel, Legendre, spherical
//!   harmonics, Bessel `J`, Gaunt coefficients.
//! * [`medium`] — layered medium description and spectral reaction densities.
//! * [`sommerfeld`] — scaled Sommerfeld-type integral tables, recurrences,
//!   and assembly of the reaction translation integrals.
//! * [`expansion`] — free-space Yukawa ME/LE and translation operators.
//! * [`polarization`] — equivalent polarization sources and reaction
//!   ME/LE/M2L operators.
//! * [`fmm`] — adaptive octrees and the free-space + reaction FMM drivers.
//! * [`oracle`] — brute-force reference implementations for validation.
//! * [`config`] — run configuration, particle generation, error metrics, and
//!   report output for the CLI.

pub mod config;
pub mod expansion;
pub mod fmm;
pub mod medium;
pub mod oracle;
pub mod polarization;
pub mod sommerfeld;
pub mod special_fn;

use thiserror::Error;

/// Guide chapters double as doc-tests so the book's snippets cannot drift
/// out of sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/getting-started.md")]
    pub struct GettingStarted;
    #[doc = include_str!("../../../book/src/medium.md")]
    pub struct Medium;
    #[doc = include_str!("../../../book/src/free-space.md")]
    pub struct FreeSpace;
    #[doc = include_str!("../../../book/src/polarization.md")]
    pub struct Polarization;
    #[doc = include_str!("../../../book/src/sommerfeld.md")]
    pub struct Sommerfeld;
    #[doc = include_str!("../../../book/src/fmm.md")]
    pub struct Fmm;
    #[doc = include_str!("../../../book/src/validation.md")]
    pub struct Validation;
}

/// Library error type.
#[derive(Debug, Error)]
pub enum PbfmmError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("particle lies on an interface: z = {0}")]
    InterfaceCollision(f64),
    #[error("unsupported layer count: {0}")]
    UnsupportedLayerCount(usize),
    #[error("singular transmission system at lambda_rho = {0}")]
    SingularTransmissionSystem(f64),
    #[error("divergent Sommerfeld integral: decay exponent {0} <= 0")]
    DivergentIntegral(f64),
    #[error("quadrature tolerance not met: {0}")]
    ToleranceNotMet(String),
    #[error("recurrence stability violated: {0}")]
    StabilityViolation(String),
    #[error("Sommerfeld table does not cover requested index: {0}")]
    TableUnderflow(String),
    #[error("inadmissible reaction component {ab} for layers ({l}, {lp})")]
    InadmissibleComponent { ab: &'static str, l: usize, lp: usize },
    #[error("expansion center on the wrong side of the interface: {0}")]
    CenterSideViolation(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("reaction tree input mixes sides of the interface: {0}")]
    MixedSides(String),
    #[error("zero reference potential at particle {0}; relative error undefined")]
    ZeroReference(usize),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Library result type.
pub type Result<T> = std::result::Result<T, PbfmmError>;
