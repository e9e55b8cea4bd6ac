//! Numerical dynamics of entire transcendental functions of the form
//! `f(z) = ∫₀ᶻ P(t)·exp(Q(t)) dt + c` and `f(z) = P·e^Q + P̃·e^{Q̃}`
//! with polynomials `P`, `Q`.
//!
//! The crate provides:
//!
//! * log-polar complex arithmetic that survives iterated-exponential
//!   magnitudes ([`LogComplex`]),
//! * polynomial kernels including a simultaneous-iteration root finder
//!   ([`Polynomial`]),
//! * adaptive complex contour quadrature ([`quad`]),
//! * the function model itself: asymptotic values, critical points,
//!   sector geometry and two evaluation regimes ([`function`]),
//! * orbit iteration, escape/cycle classification and the recurrence
//!   verdict ([`orbit`]),
//! * Monte-Carlo density estimates for trapped/escaping sets, square
//!   coverings and growth schedules ([`measure`]),
//! * a numerical verification suite for the distortion toolbox
//!   ([`lemmas`]),
//! * deterministic escape/basin rendering to PPM/PNG ([`render`]).
//!
//! Every operation is a pure function of its inputs; batch work may run on
//! any number of threads without changing results. See the `examples/`
//! directory for one runnable program per capability, and the thin `etf`
//! binary for the command-line interface.

pub mod config;
pub mod function;
pub mod lemmas;
pub mod logcx;
pub mod measure;
pub mod orbit;
pub mod poly;
pub mod quad;
pub mod render;

pub use config::{parse_spec_json, preset, PresetError};
pub use function::{
    AsymptoticValueReport, FunctionError, FunctionModel, FunctionSpec, GMembership, ModelConfig,
    SectorGeometry, SectorTarget,
};
pub use logcx::{Complex64, LogComplex, NumericError};
pub use orbit::{
    classify_escape, recurrence_verdict, EscapeConfig, OrbitClassification, OrbitParams,
    OrbitRecord, RecurrenceVerdict, SingularReport, StopReason,
};
pub use poly::Polynomial;
