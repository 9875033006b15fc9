//! Time-dependent mean photon number and quadrature variance of a degenerate
//! optical parametric oscillator pumped by a periodically modulated field.
//!
//! The formulas are evaluated as semi-infinite memory integrals
//! ([`observables`]) and cross-checked against the equivalent linear ODEs
//! integrated to their periodic attractor ([`oracle`]). [`sweep`] extracts
//! per-period variance minima and builds parameter scans.

pub mod fourier;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod quadrature;
pub mod sweep;

pub use model::{
    classify, drive_value, period_average, threshold, DimensionlessModel, DriveProfile, ModelError,
    ModelParams, PeriodicDrive, Regime, RegimeKind, TabulatedProfile,
};
pub use observables::{
    photon_number, variance, ExtraDamping, ObservableError, PhotonNumberSpec, PhotonProvider,
    Quantity, SourceMode, TimeTrace, VarianceSpec,
};
pub use quadrature::{integrate_semi_infinite, DecayEnvelope, QuadratureError, QuadratureResult};
