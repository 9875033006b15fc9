//! Per-period variance minima and the parameter scans built from them.
//!
//! A minimum over one period repeats at `t0 + 2πm/Δ` for every period `m`.
//! It is located by a uniform coarse scan of the phase followed by
//! golden-section refinement inside the best coarse cell. `V(s)` can have
//! several local minima per period under strong modulation, so the scan is
//! what picks the basin.

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{DimensionlessModel, ModelError, RegimeKind};
use crate::observables::{
    variance, ExtraDamping, NoPhotons, ObservableError, PhotonProvider, PhotonTable, SourceMode,
    VarianceSpec,
};
use crate::quadrature::DEFAULT_REL_TOL;

pub const COARSE_SAMPLES: usize = 1024;
/// Golden-section stopping width as a fraction of the period.
pub const PHASE_TOL: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0} grid is empty")]
    EmptyGrid(&'static str),
    #[error("modulation-frequency scans need a harmonic drive")]
    NotHarmonic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimaResult {
    pub v_min: f64,
    /// Phase of the minimum in `[0, T)`.
    pub t0: f64,
    pub achieved_at_samples: usize,
}

/// Minimum of `V` over one period.
pub fn find_minimum(
    spec: &VarianceSpec,
    n_of: &dyn PhotonProvider,
) -> Result<MinimaResult, ObservableError> {
    find_minimum_with(spec, n_of, COARSE_SAMPLES)
}

pub fn find_minimum_with(
    spec: &VarianceSpec,
    n_of: &dyn PhotonProvider,
    coarse: usize,
) -> Result<MinimaResult, ObservableError> {
    let Some(period) = spec.period() else {
        return Ok(MinimaResult {
            v_min: variance(spec, n_of, 0.0)?,
            t0: 0.0,
            achieved_at_samples: 1,
        });
    };
    let coarse = coarse.max(3);
    let dt = period / coarse as f64;
    let values: Vec<f64> = (0..coarse)
        .into_par_iter()
        .map(|j| variance(spec, n_of, j as f64 * dt))
        .collect::<Result<_, _>>()?;
    let (best, &coarse_min) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("coarse grid is non-empty");

    let centre = best as f64 * dt;
    let (t, v) = golden_section(
        |t| variance(spec, n_of, t),
        centre - dt,
        centre + dt,
        PHASE_TOL * period,
    )?;
    let (t, v) = if v <= coarse_min {
        (t, v)
    } else {
        (centre, coarse_min)
    };
    let mut t0 = t.rem_euclid(period);
    if t0 >= period {
        t0 = 0.0;
    }
    Ok(MinimaResult {
        v_min: v,
        t0,
        achieved_at_samples: coarse,
    })
}

fn golden_section<F, E>(f: F, mut a: f64, mut b: f64, width: f64) -> Result<(f64, f64), E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > width {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Photon provider for `spec`: zero in vacuum mode and below threshold,
/// tabulated above. At threshold the literal source diverges.
pub fn provider_for(spec: &VarianceSpec) -> Result<Box<dyn PhotonProvider>, ObservableError> {
    if spec.source_mode == SourceMode::VacuumSource {
        return Ok(Box::new(NoPhotons));
    }
    let photon = spec.photon_spec();
    match photon.regime.kind {
        RegimeKind::Below => Ok(Box::new(NoPhotons)),
        _ => Ok(Box::new(PhotonTable::build(&photon)?)),
    }
}

/// Minimum for `spec` with the regime-appropriate photon provider.
pub fn minimum_for(spec: &VarianceSpec) -> Result<MinimaResult, ObservableError> {
    let provider = provider_for(spec)?;
    find_minimum(spec, provider.as_ref())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaRow {
    pub fbar_over_fth: f64,
    pub f1_over_fbar: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub source_mode: SourceMode,
    /// `Err` marks a gap: the row could not be evaluated.
    pub outcome: Result<MinimaResult, ObservableError>,
}

impl MinimaRow {
    pub fn v_min(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|m| m.v_min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaTable {
    pub rows: Vec<MinimaRow>,
}

impl MinimaTable {
    pub fn get(&self, fbar_over_fth: f64, f1_over_fbar: f64) -> Option<&MinimaRow> {
        self.rows
            .iter()
            .find(|r| r.fbar_over_fth == fbar_over_fth && r.f1_over_fbar == f1_over_fbar)
    }
}

/// Parameters of a minima table over `(f̄/f_th, f1/f̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaRequest {
    pub fbar_grid: Vec<f64>,
    pub f1_levels: Vec<f64>,
    pub delta: f64,
    pub epsilon: f64,
    pub phi: f64,
    pub source_mode: SourceMode,
    pub extra_damping: ExtraDamping,
    pub rel_tol: f64,
}

impl Default for MinimaRequest {
    fn default() -> Self {
        Self {
            fbar_grid: default_fbar_grid(),
            f1_levels: vec![0.0, 0.75, 1.5],
            delta: 2.0,
            epsilon: 1e-8,
            phi: 0.0,
            source_mode: SourceMode::Literal,
            extra_damping: ExtraDamping::Zero,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

/// `f̄/f_th ∈ {0.5, 0.6, …, 1.5}` without the divergent point 1.
pub fn default_fbar_grid() -> Vec<f64> {
    (5..=15)
        .filter(|&i| i != 10)
        .map(|i| i as f64 / 10.0)
        .collect()
}

fn dedup_preserving(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

pub fn minima_table(request: &MinimaRequest) -> Result<MinimaTable, SweepError> {
    if request.fbar_grid.is_empty() {
        return Err(SweepError::EmptyGrid("f̄/f_th"));
    }
    if request.f1_levels.is_empty() {
        return Err(SweepError::EmptyGrid("f1/f̄"));
    }
    let fbars = dedup_preserving(&request.fbar_grid);
    let levels = dedup_preserving(&request.f1_levels);

    let mut specs = Vec::with_capacity(fbars.len() * levels.len());
    for &fbar in &fbars {
        for &level in &levels {
            let model = DimensionlessModel::new(
                fbar,
                level * fbar,
                request.delta,
                request.phi,
                request.epsilon,
            )?;
            let spec = VarianceSpec::new(model)
                .with_source_mode(request.source_mode)
                .with_rel_tol(request.rel_tol)
                .with_extra_damping(request.extra_damping.clone())?;
            specs.push((fbar, level, spec));
        }
    }

    let rows = specs
        .par_iter()
        .map(|(fbar, level, spec)| MinimaRow {
            fbar_over_fth: *fbar,
            f1_over_fbar: *level,
            delta: request.delta,
            epsilon: request.epsilon,
            source_mode: request.source_mode,
            outcome: minimum_for(spec),
        })
        .collect();
    Ok(MinimaTable { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub delta: f64,
    pub minimum: MinimaResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticScan {
    pub rows: Vec<ScanRow>,
    /// Minimum of the unmodulated drive at the same `F0`.
    pub stationary_v_min: f64,
}

impl AsymptoticScan {
    /// Row with the deepest minimum.
    pub fn deepest(&self) -> Option<&ScanRow> {
        self.rows
            .iter()
            .min_by(|a, b| a.minimum.v_min.total_cmp(&b.minimum.v_min))
    }

    /// `max Δ |v_min(Δ) - v_stationary|` over rows with `Δ ≥ delta_floor`.
    pub fn fast_modulation_constant(&self, delta_floor: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.delta >= delta_floor)
            .map(|r| r.delta * (r.minimum.v_min - self.stationary_v_min).abs())
            .reduce(f64::max)
    }
}

/// `v_min` as a function of the modulation frequency, everything else taken
/// from `base`.
pub fn asymptotic_scan(
    base: &VarianceSpec,
    delta_grid: &[f64],
) -> Result<AsymptoticScan, SweepError> {
    let harmonic = *base.model.harmonic().ok_or(SweepError::NotHarmonic)?;
    if delta_grid.is_empty() {
        return Err(SweepError::EmptyGrid("Delta"));
    }
    let stationary_model = DimensionlessModel::stationary(harmonic.f0, base.model.epsilon())?;
    let stationary = VarianceSpec {
        model: stationary_model,
        ..base.clone()
    };
    let stationary_v_min = minimum_for(&stationary)?.v_min;

    let rows = delta_grid
        .iter()
        .map(|&delta| {
            let spec = VarianceSpec {
                model: base.model.with_delta(delta)?,
                ..base.clone()
            };
            Ok(ScanRow {
                delta,
                minimum: minimum_for(&spec)?,
            })
        })
        .collect::<Result<_, SweepError>>()?;
    Ok(AsymptoticScan {
        rows,
        stationary_v_min,
    })
}

/// `n` points from `min` to `max`, evenly spaced in `log10`.
pub fn log_spaced(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![min],
        _ => {
            let (a, b) = (min.log10(), max.log10());
            (0..n)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
                .collect()
        }
    }
}
