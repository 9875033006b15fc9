//! Independent check of the memory integrals.
//!
//! Differentiating the integrals for `1/n` and `V` gives linear ODEs with
//! periodic coefficients,
//!
//! ```text
//! dg/ds = -2(F(s) - 1) g + 2ε          (g = 1/n)
//! dV/ds = -2(1 + F(s) + M(s)) V + S(s)
//! ```
//!
//! whose periodic attractors are exactly the integral expressions. This
//! module integrates them forward from arbitrary initial data with an
//! embedded Runge-Kutta scheme until consecutive periods agree. Nothing here
//! goes through the quadrature code.

mod dopri;

use std::sync::Arc;

use thiserror::Error;

use crate::model::DimensionlessModel;
use crate::observables::{
    ExtraDamping, ObservableError, PhotonProvider, Quantity, SourceMode, TimeTrace,
};
use dopri::{Rhs, Stepper};

pub const DEFAULT_SAMPLES: usize = 256;
pub const MAX_PERIODS: usize = 100_000;
pub const MIN_TOL: f64 = 1e-12;
pub const MAX_TOL: f64 = 1e-4;

const ABS_TOL: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("no periodic convergence after {periods} periods (residual {residual:e})")]
    NoConvergence { periods: usize, residual: f64 },
    #[error("solution overflowed near t = {t}")]
    Overflow { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("tolerance {0} outside [1e-12, 1e-4]")]
    InvalidTolerance(f64),
    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),
    #[error("at least {min} samples required, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("end time {t_end} must exceed start time {t0}")]
    InvalidWindow { t0: f64, t_end: f64 },
    #[error(transparent)]
    Trace(#[from] ObservableError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    /// `g = 1/n`.
    InversePhotonNumber,
    Variance,
    /// `[g, V]` integrated together.
    Coupled,
}

/// Initial-value problem `dy/ds = rhs(s, y)`, `y(t0) = y0`.
#[derive(Clone)]
pub struct OdeProblem<const N: usize> {
    rhs: Arc<Rhs<N>>,
    pub y0: [f64; N],
    pub t0: f64,
    pub description: Observable,
}

impl<const N: usize> std::fmt::Debug for OdeProblem<N> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OdeProblem")
            .field("y0", &self.y0)
            .field("t0", &self.t0)
            .field("description", &self.description)
            .finish_non_exhaustive()
    }
}

impl<const N: usize> OdeProblem<N> {
    pub fn new<F>(rhs: F, y0: [f64; N], t0: f64, description: Observable) -> Self
    where
        F: Fn(f64, &[f64; N]) -> [f64; N] + Send + Sync + 'static,
    {
        Self {
            rhs: Arc::new(rhs),
            y0,
            t0,
            description,
        }
    }

    pub fn with_initial(mut self, y0: [f64; N], t0: f64) -> Self {
        self.y0 = y0;
        self.t0 = t0;
        self
    }

    pub fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        (self.rhs)(t, y)
    }
}

/// `dg/ds = -2(F - 1) g + 2ε`.
pub fn photon_problem(model: &DimensionlessModel, g0: f64) -> OdeProblem<1> {
    let model = model.clone();
    let eps = model.epsilon();
    OdeProblem::new(
        move |t, y| [-2.0 * (model.drive_value(t) - 1.0) * y[0] + 2.0 * eps],
        [g0],
        0.0,
        Observable::InversePhotonNumber,
    )
}

/// `dV/ds = -2(1 + F + M) V + S` with the photon number taken from `n_of`.
pub fn variance_problem(
    model: &DimensionlessModel,
    damping: &ExtraDamping,
    source: SourceMode,
    n_of: Arc<dyn PhotonProvider>,
    v0: f64,
) -> OdeProblem<1> {
    let model = model.clone();
    let damping = damping.clone();
    OdeProblem::new(
        move |t, y| {
            let s = match source {
                SourceMode::Literal => 1.0 + 2.0 * n_of.photon_number(t),
                SourceMode::VacuumSource => 1.0,
            };
            [-2.0 * (1.0 + model.drive_value(t) + damping.value(t)) * y[0] + s]
        },
        [v0],
        0.0,
        Observable::Variance,
    )
}

/// `[g, V]` with the literal source `1 + 2/g` (or `1` in vacuum mode).
pub fn coupled_problem(
    model: &DimensionlessModel,
    damping: &ExtraDamping,
    source: SourceMode,
    g0: f64,
    v0: f64,
) -> OdeProblem<2> {
    let model = model.clone();
    let damping = damping.clone();
    let eps = model.epsilon();
    OdeProblem::new(
        move |t, y| {
            let f = model.drive_value(t);
            let s = match source {
                SourceMode::Literal => 1.0 + 2.0 / y[0],
                SourceMode::VacuumSource => 1.0,
            };
            [
                -2.0 * (f - 1.0) * y[0] + 2.0 * eps,
                -2.0 * (1.0 + f + damping.value(t)) * y[1] + s,
            ]
        },
        [g0, v0],
        0.0,
        Observable::Coupled,
    )
}

/// Converged attractor sampled over one period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSteadyState<const N: usize> {
    /// Time of the first sample; samples sit at `t_start + j T / len`.
    pub t_start: f64,
    pub period: f64,
    pub period_samples: Vec<[f64; N]>,
    /// Sup-norm change against the previous period, relative to the sup.
    pub residual: f64,
    pub periods_elapsed: usize,
    end_state: [f64; N],
}

impl<const N: usize> PeriodicSteadyState<N> {
    pub fn times(&self) -> Vec<f64> {
        let n = self.period_samples.len();
        (0..n)
            .map(|j| self.t_start + j as f64 * self.period / n as f64)
            .collect()
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.period_samples.iter().map(|y| y[i]).collect()
    }

    /// State at `t_start + period`, on the attractor.
    pub fn end_state(&self) -> [f64; N] {
        self.end_state
    }
}

fn relative_change<const N: usize>(current: &[[f64; N]], previous: &[[f64; N]]) -> f64 {
    let mut worst: f64 = 0.0;
    for c in 0..N {
        let sup = current.iter().map(|y| y[c].abs()).fold(0.0, f64::max);
        let diff = current
            .iter()
            .zip(previous)
            .map(|(a, b)| (a[c] - b[c]).abs())
            .fold(0.0, f64::max);
        let rel = if sup > 0.0 { diff / sup } else { diff };
        worst = worst.max(rel);
    }
    worst
}

fn check_tol(tol: f64) -> Result<(), OracleError> {
    if (MIN_TOL..=MAX_TOL).contains(&tol) {
        Ok(())
    } else {
        Err(OracleError::InvalidTolerance(tol))
    }
}

pub fn solve_to_periodic<const N: usize>(
    problem: &OdeProblem<N>,
    period: f64,
    tol: f64,
) -> Result<PeriodicSteadyState<N>, OracleError> {
    solve_to_periodic_with(problem, period, tol, DEFAULT_SAMPLES)
}

/// Integrates period by period until the phase-aligned samples of two
/// consecutive periods agree to `tol` relative to their sup.
pub fn solve_to_periodic_with<const N: usize>(
    problem: &OdeProblem<N>,
    period: f64,
    tol: f64,
    samples: usize,
) -> Result<PeriodicSteadyState<N>, OracleError> {
    check_tol(tol)?;
    if !(period > 0.0 && period.is_finite()) {
        return Err(OracleError::InvalidPeriod(period));
    }
    if samples < DEFAULT_SAMPLES {
        return Err(OracleError::TooFewSamples {
            min: DEFAULT_SAMPLES,
            got: samples,
        });
    }
    let dt = period / samples as f64;
    let mut stepper = Stepper::new(
        problem.rhs.as_ref(),
        problem.t0,
        problem.y0,
        dt,
        tol / 100.0,
        ABS_TOL,
    );
    let mut previous: Option<Vec<[f64; N]>> = None;
    let mut residual = f64::INFINITY;

    for m in 0..MAX_PERIODS {
        let start = problem.t0 + m as f64 * period;
        let mut current = Vec::with_capacity(samples);
        current.push(stepper.y);
        for j in 1..samples {
            stepper.advance_to(start + j as f64 * dt)?;
            current.push(stepper.y);
        }
        stepper.advance_to(problem.t0 + (m + 1) as f64 * period)?;

        if let Some(prev) = &previous {
            residual = relative_change(&current, prev);
            if residual < tol {
                return Ok(PeriodicSteadyState {
                    t_start: start,
                    period,
                    period_samples: current,
                    residual,
                    periods_elapsed: m + 1,
                    end_state: stepper.y,
                });
            }
        }
        previous = Some(current);
    }
    Err(OracleError::NoConvergence {
        periods: MAX_PERIODS,
        residual,
    })
}

/// Attractor values at arbitrary times, folded onto one period.
pub fn periodic_values_at<const N: usize>(
    problem: &OdeProblem<N>,
    period: f64,
    tol: f64,
    times: &[f64],
) -> Result<Vec<[f64; N]>, OracleError> {
    let steady = solve_to_periodic(problem, period, tol)?;
    let base = steady.t_start + period;
    let mut order: Vec<(usize, f64)> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| (i, (t - problem.t0).rem_euclid(period)))
        .collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut stepper = Stepper::new(
        problem.rhs.as_ref(),
        base,
        steady.end_state,
        period / DEFAULT_SAMPLES as f64,
        tol / 100.0,
        ABS_TOL,
    );
    let mut out = vec![[0.0; N]; times.len()];
    for (i, phase) in order {
        stepper.advance_to(base + phase)?;
        out[i] = stepper.y;
    }
    Ok(out)
}

/// States at `samples` uniform times from `t0` to `t_end`, endpoints included.
pub fn transient_states<const N: usize>(
    problem: &OdeProblem<N>,
    t_end: f64,
    samples: usize,
    tol: f64,
) -> Result<Vec<(f64, [f64; N])>, OracleError> {
    check_tol(tol)?;
    if t_end.is_nan() || t_end <= problem.t0 {
        return Err(OracleError::InvalidWindow {
            t0: problem.t0,
            t_end,
        });
    }
    if samples < 2 {
        return Err(OracleError::TooFewSamples {
            min: 2,
            got: samples,
        });
    }
    let dt = (t_end - problem.t0) / (samples - 1) as f64;
    let mut stepper = Stepper::new(
        problem.rhs.as_ref(),
        problem.t0,
        problem.y0,
        dt.min(0.01),
        tol / 100.0,
        ABS_TOL,
    );
    let mut out = Vec::with_capacity(samples);
    out.push((problem.t0, problem.y0));
    for i in 1..samples {
        let t = if i + 1 == samples {
            t_end
        } else {
            problem.t0 + i as f64 * dt
        };
        stepper.advance_to(t)?;
        out.push((t, stepper.y));
    }
    Ok(out)
}

/// Transient of a scalar problem as a trace. Inverse photon numbers are
/// reported as `n = 1/g`.
pub fn transient_trace(
    problem: &OdeProblem<1>,
    t_end: f64,
    samples: usize,
    tol: f64,
) -> Result<TimeTrace, OracleError> {
    let states = transient_states(problem, t_end, samples, tol)?;
    let (times, values, quantity) = match problem.description {
        Observable::InversePhotonNumber => (
            states.iter().map(|s| s.0).collect(),
            states.iter().map(|s| 1.0 / s.1[0]).collect(),
            Quantity::PhotonNumber,
        ),
        _ => (
            states.iter().map(|s| s.0).collect(),
            states.iter().map(|s| s.1[0]).collect(),
            Quantity::Variance,
        ),
    };
    Ok(TimeTrace::new(times, values, quantity)?)
}
