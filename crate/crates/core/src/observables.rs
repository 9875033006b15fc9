//! Mean photon number `n(s)` and quadrature variance `V(s)` on the periodic
//! attractor, evaluated as memory integrals over the past.
//!
//! With `A(s)` the periodic antiderivative of `F(s) - F̄`:
//!
//! ```text
//! 1/n(s) = 2ε ∫_{-∞}^0 exp(2(F̄-1)τ + 2[A(s+τ) - A(s)]) dτ
//! V(s)   =    ∫_{-∞}^0 exp(2(1+F̄+M̄)τ + 2[A(s+τ) - A(s)] + 2[A_M(s+τ) - A_M(s)]) S(s+τ) dτ
//! ```
//!
//! where `S = 1 + 2n` ([`SourceMode::Literal`]) or `S = 1`
//! ([`SourceMode::VacuumSource`]) and `M` is the optional extra damping.
//! For the harmonic drive `A(s) = (F1/Δ) sin(Δs + Φ)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::fourier::TrigInterpolant;
use crate::model::{
    DimensionlessModel, ModelError, PeriodicDrive, Regime, RegimeKind, TabulatedProfile,
};
use crate::quadrature::{self, integrate_semi_infinite, DecayEnvelope, QuadratureError};

/// Samples per period in the memoized photon-number table.
pub const PHOTON_TABLE_SIZE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error("drive is not above threshold (f̄/f_th = {}); the photon number is zero", .0.fbar_over_fth)]
    BelowThreshold(Regime),
    #[error("photon-number integral diverges at threshold (f̄/f_th = {0})")]
    DivergentIntegral(f64),
    #[error("quadrature failed: {0}")]
    NonConvergent(#[source] QuadratureError),
    #[error("mean damping 1 + F̄ + M̄ = {0} is not positive; the variance integral diverges")]
    NegativeDecay(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("extra damping period {damping} does not match the drive period {drive}")]
    PeriodMismatch { damping: f64, drive: f64 },
    #[error("invalid time grid: {0}")]
    InvalidGrid(&'static str),
}

impl From<QuadratureError> for ObservableError {
    fn from(e: QuadratureError) -> Self {
        ObservableError::NonConvergent(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SourceMode {
    /// `S = 1 + 2n`.
    #[default]
    Literal,
    /// `S = 1`.
    VacuumSource,
}

impl fmt::Display for SourceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceMode::Literal => "literal",
            SourceMode::VacuumSource => "vacuum",
        })
    }
}

impl FromStr for SourceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(SourceMode::Literal),
            "vacuum" => Ok(SourceMode::VacuumSource),
            other => Err(format!(
                "unknown source mode `{other}` (expected literal|vacuum)"
            )),
        }
    }
}

/// Extra damping rate `M(s)` added to the variance decay.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ExtraDamping {
    #[default]
    Zero,
    Constant(f64),
    Periodic(Arc<TabulatedProfile>),
}

impl ExtraDamping {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            ExtraDamping::Zero => 0.0,
            ExtraDamping::Constant(m) => *m,
            ExtraDamping::Periodic(p) => p.value(t),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ExtraDamping::Zero => 0.0,
            ExtraDamping::Constant(m) => *m,
            ExtraDamping::Periodic(p) => p.mean(),
        }
    }

    fn oscillation_integral(&self, t: f64) -> f64 {
        match self {
            ExtraDamping::Periodic(p) => p.oscillation_integral(t),
            _ => 0.0,
        }
    }

    fn oscillation_bound(&self) -> f64 {
        match self {
            ExtraDamping::Periodic(p) => p.oscillation_bound(),
            _ => 0.0,
        }
    }

    fn period(&self) -> Option<f64> {
        match self {
            ExtraDamping::Periodic(p) if p.deviation_bound() > 0.0 => Some(p.period()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberSpec {
    pub model: DimensionlessModel,
    pub regime: Regime,
    pub rel_tol: f64,
}

impl PhotonNumberSpec {
    pub fn new(model: DimensionlessModel) -> Self {
        let regime = model.regime();
        Self {
            model,
            regime,
            rel_tol: quadrature::DEFAULT_REL_TOL,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    fn require_above(&self) -> Result<(), ObservableError> {
        match self.regime.kind {
            RegimeKind::Above => Ok(()),
            RegimeKind::AtThreshold => Err(ObservableError::DivergentIntegral(
                self.regime.fbar_over_fth,
            )),
            RegimeKind::Below => Err(ObservableError::BelowThreshold(self.regime)),
        }
    }
}

/// `n(s)` from the memory integral. Only defined above threshold.
pub fn photon_number(spec: &PhotonNumberSpec, t: f64) -> Result<f64, ObservableError> {
    spec.require_above()?;
    let model = &spec.model;
    let eps = model.epsilon();
    if eps <= 0.0 {
        return Err(ModelError::NonPositive {
            name: "epsilon",
            value: eps,
        }
        .into());
    }
    let rate = 2.0 * (model.mean_drive() - 1.0);
    let a_t = model.oscillation_integral(t);
    let envelope = DecayEnvelope::new(rate, (4.0 * model.oscillation_bound()).exp())
        .with_oscillation(model.period());
    let integrand =
        |tau: f64| (rate * tau + 2.0 * (model.oscillation_integral(t + tau) - a_t)).exp();
    let result =
        integrate_semi_infinite(integrand, envelope, spec.rel_tol).map_err(|e| match e {
            QuadratureError::InvalidEnvelope { .. } => {
                ObservableError::DivergentIntegral(spec.regime.fbar_over_fth)
            }
            other => ObservableError::NonConvergent(other),
        })?;
    Ok(1.0 / (2.0 * eps * result.value))
}

/// Source of `n(s)` for the variance integrand.
pub trait PhotonProvider: Send + Sync {
    fn photon_number(&self, t: f64) -> f64;
    /// Upper bound on `n` over all times; only used to size truncation.
    fn upper_bound(&self) -> f64;
}

/// `n ≡ 0`, the below-threshold prescription.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoPhotons;

impl PhotonProvider for NoPhotons {
    fn photon_number(&self, _t: f64) -> f64 {
        0.0
    }

    fn upper_bound(&self) -> f64 {
        0.0
    }
}

/// Constant photon number.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPhotons(pub f64);

impl PhotonProvider for ConstantPhotons {
    fn photon_number(&self, _t: f64) -> f64 {
        self.0
    }

    fn upper_bound(&self) -> f64 {
        self.0
    }
}

/// `n(s)` tabulated once per period and trigonometrically interpolated.
#[derive(Debug, Clone)]
pub struct PhotonTable {
    interp: TrigInterpolant,
    max: f64,
}

impl PhotonTable {
    pub fn build(spec: &PhotonNumberSpec) -> Result<Self, ObservableError> {
        Self::build_with(spec, PHOTON_TABLE_SIZE)
    }

    pub fn build_with(spec: &PhotonNumberSpec, samples: usize) -> Result<Self, ObservableError> {
        spec.require_above()?;
        let period = spec.model.sampling_period();
        let values: Vec<f64> = if spec.model.is_stationary() {
            vec![photon_number(spec, 0.0)?]
        } else {
            (0..samples)
                .into_par_iter()
                .map(|j| photon_number(spec, j as f64 * period / samples as f64))
                .collect::<Result<_, _>>()?
        };
        let max = values.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            interp: TrigInterpolant::from_samples(&values, period),
            max,
        })
    }
}

impl PhotonProvider for PhotonTable {
    fn photon_number(&self, t: f64) -> f64 {
        self.interp.value(t)
    }

    fn upper_bound(&self) -> f64 {
        // Interpolant overshoot between nodes is far below this margin.
        1.01 * self.max
    }
}

/// Evaluates the photon-number integral at every call. Slow; meant for
/// checking the table.
#[derive(Debug, Clone)]
pub struct DirectPhotons {
    spec: PhotonNumberSpec,
    bound: f64,
}

impl DirectPhotons {
    pub fn new(spec: PhotonNumberSpec) -> Result<Self, ObservableError> {
        let period = spec.model.sampling_period();
        let mut max: f64 = 0.0;
        for j in 0..64 {
            max = max.max(photon_number(&spec, j as f64 * period / 64.0)?);
        }
        Ok(Self {
            spec,
            bound: 1.5 * max,
        })
    }
}

impl PhotonProvider for DirectPhotons {
    fn photon_number(&self, t: f64) -> f64 {
        photon_number(&self.spec, t).unwrap_or(f64::NAN)
    }

    fn upper_bound(&self) -> f64 {
        self.bound
    }
}

/// Photon provider matching the regime: zero below threshold, the memoized
/// table above. At threshold the integral diverges.
pub fn photon_provider(
    spec: &PhotonNumberSpec,
) -> Result<Box<dyn PhotonProvider>, ObservableError> {
    match spec.regime.kind {
        RegimeKind::Below => Ok(Box::new(NoPhotons)),
        _ => Ok(Box::new(PhotonTable::build(spec)?)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceSpec {
    pub model: DimensionlessModel,
    pub source_mode: SourceMode,
    pub extra_damping: ExtraDamping,
    pub rel_tol: f64,
}

impl VarianceSpec {
    pub fn new(model: DimensionlessModel) -> Self {
        Self {
            model,
            source_mode: SourceMode::Literal,
            extra_damping: ExtraDamping::Zero,
            rel_tol: quadrature::DEFAULT_REL_TOL,
        }
    }

    pub fn with_source_mode(mut self, mode: SourceMode) -> Self {
        self.source_mode = mode;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_extra_damping(mut self, damping: ExtraDamping) -> Result<Self, ObservableError> {
        if let (Some(drive), Some(m)) = (self.model.period(), damping.period()) {
            if ((drive - m) / drive).abs() > 1e-12 {
                return Err(ObservableError::PeriodMismatch { damping: m, drive });
            }
        }
        self.extra_damping = damping;
        Ok(self)
    }

    /// Period of the integrand's oscillating factors, if any.
    pub fn period(&self) -> Option<f64> {
        self.model.period().or_else(|| self.extra_damping.period())
    }

    /// `2(1 + F̄ + M̄)`.
    pub fn decay_rate(&self) -> f64 {
        2.0 * (1.0 + self.model.mean_drive() + self.extra_damping.mean())
    }

    pub fn photon_spec(&self) -> PhotonNumberSpec {
        PhotonNumberSpec::new(self.model.clone()).with_rel_tol(self.rel_tol)
    }
}

/// `V(s)` from the memory integral, with `n_of` supplying the photon number
/// inside the source term.
pub fn variance(
    spec: &VarianceSpec,
    n_of: &dyn PhotonProvider,
    t: f64,
) -> Result<f64, ObservableError> {
    let rate = spec.decay_rate();
    if rate <= 0.0 {
        return Err(ObservableError::NegativeDecay(rate / 2.0));
    }
    let model = &spec.model;
    let damping = &spec.extra_damping;
    let literal = spec.source_mode == SourceMode::Literal;
    let source_bound = if literal {
        1.0 + 2.0 * n_of.upper_bound()
    } else {
        1.0
    };
    let envelope = DecayEnvelope::new(
        rate,
        (4.0 * (model.oscillation_bound() + damping.oscillation_bound())).exp() * source_bound,
    )
    .with_oscillation(spec.period());

    let a_t = model.oscillation_integral(t);
    let am_t = damping.oscillation_integral(t);
    let integrand = |tau: f64| {
        let s = t + tau;
        let kernel = (rate * tau
            + 2.0 * (model.oscillation_integral(s) - a_t)
            + 2.0 * (damping.oscillation_integral(s) - am_t))
            .exp();
        if literal {
            kernel * (1.0 + 2.0 * n_of.photon_number(s))
        } else {
            kernel
        }
    };
    Ok(integrate_semi_infinite(integrand, envelope, spec.rel_tol)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    PhotonNumber,
    Variance,
}

/// Sampled `(t, value)` series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    times: Vec<f64>,
    values: Vec<f64>,
    quantity: Quantity,
}

impl TimeTrace {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        quantity: Quantity,
    ) -> Result<Self, ObservableError> {
        check_grid(&times)?;
        if values.len() != times.len() {
            return Err(ObservableError::InvalidGrid(
                "times and values differ in length",
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ObservableError::InvalidGrid(
                "values must be finite and non-negative",
            ));
        }
        Ok(Self {
            times,
            values,
            quantity,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Smallest sample and its time.
    pub fn min(&self) -> (f64, f64) {
        self.iter().fold((f64::NAN, f64::INFINITY), |acc, (t, v)| {
            if v < acc.1 {
                (t, v)
            } else {
                acc
            }
        })
    }
}

fn check_grid(times: &[f64]) -> Result<(), ObservableError> {
    if times.is_empty() {
        return Err(ObservableError::InvalidGrid("empty"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(ObservableError::InvalidGrid("non-finite time"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ObservableError::InvalidGrid(
            "times must be strictly increasing",
        ));
    }
    Ok(())
}

/// `n` over `grid`: zero below threshold, the memory integral above.
pub fn photon_trace(spec: &PhotonNumberSpec, grid: &[f64]) -> Result<TimeTrace, ObservableError> {
    check_grid(grid)?;
    let values = match spec.regime.kind {
        RegimeKind::Below => vec![0.0; grid.len()],
        _ => grid
            .par_iter()
            .map(|&t| photon_number(spec, t))
            .collect::<Result<_, _>>()?,
    };
    TimeTrace::new(grid.to_vec(), values, Quantity::PhotonNumber)
}

/// `V` over `grid`, with the photon number chosen by regime and memoized.
pub fn variance_trace(spec: &VarianceSpec, grid: &[f64]) -> Result<TimeTrace, ObservableError> {
    check_grid(grid)?;
    match spec.source_mode {
        SourceMode::VacuumSource => variance_trace_with(spec, &NoPhotons, grid),
        SourceMode::Literal => {
            let provider = photon_provider(&spec.photon_spec())?;
            variance_trace_with(spec, provider.as_ref(), grid)
        }
    }
}

pub fn variance_trace_with(
    spec: &VarianceSpec,
    n_of: &dyn PhotonProvider,
    grid: &[f64],
) -> Result<TimeTrace, ObservableError> {
    check_grid(grid)?;
    let values = grid
        .par_iter()
        .map(|&t| variance(spec, n_of, t))
        .collect::<Result<_, _>>()?;
    TimeTrace::new(grid.to_vec(), values, Quantity::Variance)
}

/// The same integrals written directly in physical units (time in `1/γ`
/// units not factored out). Used to check the reduction to dimensionless
/// form.
pub mod physical {
    use super::ObservableError;
    use crate::model::{classify, reduced_phase, DriveProfile, ModelParams, RegimeKind};
    use crate::quadrature::{integrate_semi_infinite, DecayEnvelope};

    fn sin_phase(drive: &DriveProfile, t: f64) -> f64 {
        if drive.is_stationary() {
            0.0
        } else {
            reduced_phase(drive.delta, drive.phi, t).sin()
        }
    }

    /// Mean photon number at physical time `t`.
    pub fn photon_number(
        params: &ModelParams,
        drive: &DriveProfile,
        t: f64,
        rel_tol: f64,
    ) -> Result<f64, ObservableError> {
        let regime = classify(params, drive);
        match regime.kind {
            RegimeKind::Above => {}
            RegimeKind::AtThreshold => {
                return Err(ObservableError::DivergentIntegral(regime.fbar_over_fth))
            }
            RegimeKind::Below => return Err(ObservableError::BelowThreshold(regime)),
        }
        let gamma = params.gamma();
        let fth = params.threshold();
        let rate = 2.0 * gamma * (drive.f0 / fth - 1.0);
        let depth = if drive.is_stationary() {
            0.0
        } else {
            2.0 * gamma * drive.f1 / (drive.delta * fth)
        };
        let s_t = sin_phase(drive, t);
        let envelope =
            DecayEnvelope::new(rate, (2.0 * depth).exp()).with_oscillation(drive.period());
        let integrand = |tau: f64| (rate * tau + depth * (sin_phase(drive, t + tau) - s_t)).exp();
        let integral = integrate_semi_infinite(integrand, envelope, rel_tol)?.value;
        Ok(1.0 / (2.0 * params.k() * params.k() / params.gamma_l() * integral))
    }

    /// Variance at physical time `t` with no extra damping. `n_at` gives the
    /// photon number at physical time and `n_bound` bounds it.
    pub fn variance(
        params: &ModelParams,
        drive: &DriveProfile,
        n_at: &dyn Fn(f64) -> f64,
        n_bound: f64,
        t: f64,
        rel_tol: f64,
    ) -> Result<f64, ObservableError> {
        let gamma = params.gamma();
        let coupling = params.k() / params.gamma_l();
        let rate = 2.0 * (gamma + drive.f0 * coupling);
        let depth = if drive.is_stationary() {
            0.0
        } else {
            2.0 * drive.f1 * coupling / drive.delta
        };
        let s_t = sin_phase(drive, t);
        let envelope =
            DecayEnvelope::new(rate, gamma * (2.0 * depth).exp() * (1.0 + 2.0 * n_bound))
                .with_oscillation(drive.period());
        let integrand = |tau: f64| {
            gamma
                * (rate * tau + depth * (sin_phase(drive, t + tau) - s_t)).exp()
                * (1.0 + 2.0 * n_at(t + tau))
        };
        Ok(integrate_semi_infinite(integrand, envelope, rel_tol)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn model(f0: f64, f1: f64, delta: f64, eps: f64) -> DimensionlessModel {
        DimensionlessModel::new(f0, f1, delta, 0.0, eps).unwrap()
    }

    #[test]
    fn stationary_photon_numbers() {
        let spec = PhotonNumberSpec::new(model(2.0, 0.0, 2.0, 1e-8));
        assert_relative_eq!(photon_number(&spec, 0.0).unwrap(), 1e8, max_relative = 1e-9);
        let spec = PhotonNumberSpec::new(model(1.5, 0.0, 0.0, 1e-4));
        assert_relative_eq!(
            photon_number(&spec, 3.7).unwrap(),
            5000.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn photon_number_regime_errors() {
        let below = PhotonNumberSpec::new(model(0.5, 0.2, 2.0, 1e-8));
        assert!(matches!(
            photon_number(&below, 0.0),
            Err(ObservableError::BelowThreshold(_))
        ));
        let at = PhotonNumberSpec::new(model(1.0, 0.0, 2.0, 1e-8));
        assert!(matches!(
            photon_number(&at, 0.0),
            Err(ObservableError::DivergentIntegral(_))
        ));
        assert!(matches!(
            photon_provider(&at),
            Err(ObservableError::DivergentIntegral(_))
        ));
        assert!(photon_provider(&below).unwrap().upper_bound() == 0.0);
    }

    #[test]
    fn vacuum_and_threshold_levels() {
        let v = variance(
            &VarianceSpec::new(model(0.0, 0.0, 0.0, 1e-8)),
            &NoPhotons,
            1.0,
        )
        .unwrap();
        assert!((v - 0.5).abs() < 1e-9);
        let v = variance(
            &VarianceSpec::new(model(1.0, 0.0, 0.0, 1e-8)),
            &NoPhotons,
            1.0,
        )
        .unwrap();
        assert!((v - 0.25).abs() < 1e-9);
    }

    #[test]
    fn constant_extra_damping_shifts_rate() {
        let spec = VarianceSpec::new(model(1.0, 0.0, 0.0, 0.0))
            .with_extra_damping(ExtraDamping::Constant(0.5))
            .unwrap();
        let v = variance(&spec, &NoPhotons, 0.0).unwrap();
        assert_relative_eq!(v, 1.0 / 5.0, max_relative = 1e-9);
        let spec = VarianceSpec::new(model(0.0, 0.0, 0.0, 0.0))
            .with_extra_damping(ExtraDamping::Constant(-1.0))
            .unwrap();
        assert!(matches!(
            variance(&spec, &NoPhotons, 0.0),
            Err(ObservableError::NegativeDecay(_))
        ));
    }

    #[test]
    fn negative_excursions_allowed_when_mean_damping_positive() {
        // F dips to -1, so 1 + min F = 0, but the mean damping is 3.
        let spec = VarianceSpec::new(model(2.0, 3.0, 2.0, 1e-8))
            .with_source_mode(SourceMode::VacuumSource);
        let v = variance(&spec, &NoPhotons, 0.4).unwrap();
        assert!(v > 0.0 && v.is_finite());
    }

    #[test]
    fn photon_table_matches_direct_evaluation() {
        let spec = PhotonNumberSpec::new(model(2.0, 3.0, 2.0, 1e-8));
        let table = PhotonTable::build(&spec).unwrap();
        for i in 0..13 {
            let t = 0.29 * i as f64 - 1.0;
            let direct = photon_number(&spec, t).unwrap();
            assert_relative_eq!(table.photon_number(t), direct, max_relative = 1e-9);
        }
        assert!(table.upper_bound() >= photon_number(&spec, 0.0).unwrap());
    }

    #[test]
    fn literal_equals_vacuum_without_photons() {
        let m = model(0.7, 0.5, 2.0, 1e-8);
        let lit = variance_trace(&VarianceSpec::new(m.clone()), &[0.0, 0.5, 1.0]).unwrap();
        let vac = variance_trace(
            &VarianceSpec::new(m).with_source_mode(SourceMode::VacuumSource),
            &[0.0, 0.5, 1.0],
        )
        .unwrap();
        assert_eq!(lit.values(), vac.values());
    }

    #[test]
    fn below_threshold_photon_trace_is_zero() {
        let spec = PhotonNumberSpec::new(model(0.5, 0.0, 2.0, 1e-8));
        let tr = photon_trace(&spec, &[0.0, 1.0, 2.0]).unwrap();
        assert!(tr.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn trace_validation() {
        assert!(TimeTrace::new(vec![], vec![], Quantity::Variance).is_err());
        assert!(TimeTrace::new(vec![0.0, 0.0], vec![1.0, 1.0], Quantity::Variance).is_err());
        assert!(TimeTrace::new(vec![0.0, 1.0], vec![1.0], Quantity::Variance).is_err());
        assert!(TimeTrace::new(vec![0.0], vec![-1.0], Quantity::Variance).is_err());
        let tr =
            TimeTrace::new(vec![0.0, 1.0, 2.0], vec![3.0, 1.0, 2.0], Quantity::Variance).unwrap();
        assert_eq!(tr.min(), (1.0, 1.0));
    }

    #[test]
    fn periodic_damping_must_share_drive_period() {
        let samples: Vec<f64> = (0..16).map(|j| 0.1 * (PI * j as f64 / 8.0).cos()).collect();
        let wrong = TabulatedProfile::new(&samples, 3.0).unwrap();
        let r = VarianceSpec::new(model(1.0, 1.0, 2.0, 0.0))
            .with_extra_damping(ExtraDamping::Periodic(Arc::new(wrong)));
        assert!(matches!(r, Err(ObservableError::PeriodMismatch { .. })));
        let right = TabulatedProfile::new(&samples, 2.0).unwrap();
        assert!(VarianceSpec::new(model(1.0, 1.0, 2.0, 0.0))
            .with_extra_damping(ExtraDamping::Periodic(Arc::new(right)))
            .is_ok());
    }

    #[test]
    fn source_mode_parsing() {
        assert_eq!(
            "literal".parse::<SourceMode>().unwrap(),
            SourceMode::Literal
        );
        assert_eq!(
            "vacuum".parse::<SourceMode>().unwrap(),
            SourceMode::VacuumSource
        );
        assert!("other".parse::<SourceMode>().is_err());
        assert_eq!(SourceMode::VacuumSource.to_string(), "vacuum");
    }
}
