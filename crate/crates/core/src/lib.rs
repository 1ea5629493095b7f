//! Variable step-size LMS adaptation with dynamic adaptation-gain filters.
//!
//! The weight-update correction term of an LMS-family algorithm is passed
//! through a rational filter before being integrated into the weights.
//! When that filter is strictly positive real it reshapes the adaptation
//! gain across frequency without changing its average, which can speed up
//! the adaptation transient by an order of magnitude at a fixed step size.
//!
//! The crate provides:
//!
//! * [`adaptive`] — the adaptive FIR predictor, a-priori/a-posteriori error
//!   machinery, the LMS/NLMS/PLMS step-size rules and the filtered update
//!   recursion;
//! * [`design`] — strict-positive-realness criteria (closed form and
//!   frequency sweep), positive-realness of the integrator-cascaded
//!   operator, Bode data, admissibility contours, the zero-average
//!   log-gain check and the steady-state-gain rate predictor;
//! * [`analysis`] — linearized transient prediction and an averaged
//!   equivalent-feedback oracle;
//! * [`signal`] / [`plant`] — excitation generators, rational plant
//!   simulation and WAV ingestion;
//! * [`experiments`] — line-enhancer, filter-identification and synthetic
//!   noise-control scenarios with Monte Carlo averaging;
//! * [`metrics`] — time-indexed run metrics and CSV export.

pub mod adaptive;
pub mod analysis;
pub mod design;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod plant;
pub mod poly;
pub mod signal;

pub use adaptive::{AdaptiveFilterState, DagCoefficients, StepSizeRule, UpdateRecord};
pub use error::{Error, Result};
pub use metrics::MetricSeries;
pub use plant::PlantModel;
