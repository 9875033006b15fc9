use std::sync::Arc;

use pulsed_squeeze::observables::{
    photon_trace, variance_trace, NoPhotons, PhotonProvider, PhotonTable, TimeTrace, VarianceSpec,
};
use pulsed_squeeze::oracle::{
    coupled_problem, periodic_values_at, photon_problem, variance_problem,
};
use pulsed_squeeze::sweep::{
    asymptotic_scan, minima_table, MinimaRequest, MinimaTable, SweepError,
};
use pulsed_squeeze::{
    photon_number, variance, DimensionlessModel, ObservableError, PhotonNumberSpec, RegimeKind,
    SourceMode,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::dataset::{fmt_f64, Dataset};
use crate::error::{with_hint, CliError};

/// Local tolerance handed to the ODE oracle.
pub const ORACLE_TOL: f64 = 1e-10;
/// Largest residual `check` accepts.
pub const CHECK_LIMIT: f64 = 1e-6;
/// Phases per period compared by `check`.
pub const CHECK_PHASES: usize = 256;
/// Δ at and above which `scan-delta` fits the fast-modulation constant.
pub const FAST_DELTA_FLOOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Photon,
    Variance,
    Minima,
    ScanDelta,
    Check,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Photon => "photon",
            CommandKind::Variance => "variance",
            CommandKind::Minima => "minima",
            CommandKind::ScanDelta => "scan-delta",
            CommandKind::Check => "check",
        }
    }
}

/// A dataset plus the failure, if any, that should set the exit status once
/// the dataset has been written.
#[derive(Debug)]
pub struct Report {
    pub dataset: Dataset,
    pub failure: Option<CliError>,
}

impl From<Dataset> for Report {
    fn from(dataset: Dataset) -> Self {
        Report {
            dataset,
            failure: None,
        }
    }
}

pub fn execute(kind: CommandKind, config: &RunConfig) -> Result<Report, CliError> {
    match kind {
        CommandKind::Photon => cmd_photon(config).map(Into::into),
        CommandKind::Variance => cmd_variance(config).map(Into::into),
        CommandKind::Minima => cmd_minima(config).map(Into::into),
        CommandKind::ScanDelta => cmd_scan_delta(config).map(Into::into),
        CommandKind::Check => cmd_check(config),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn max_mean(residuals: &[f64]) -> (f64, f64) {
    let max = residuals.iter().copied().fold(0.0, f64::max);
    (
        max,
        residuals.iter().sum::<f64>() / residuals.len().max(1) as f64,
    )
}

/// Stationary guess `g = ε/(F̄ - 1)` for the inverse photon number.
fn g_guess(model: &DimensionlessModel) -> f64 {
    model.epsilon() / (model.mean_drive() - 1.0).max(1e-3)
}

fn photon_oracle(model: &DimensionlessModel, times: &[f64]) -> Result<Vec<f64>, CliError> {
    let g = periodic_values_at(
        &photon_problem(model, g_guess(model)),
        model.sampling_period(),
        ORACLE_TOL,
        times,
    )?;
    Ok(g.iter().map(|y| 1.0 / y[0]).collect())
}

/// Oracle variance: coupled `[g, V]` for the literal source above threshold,
/// the scalar variance ODE with `n = 0` otherwise.
fn variance_oracle(spec: &VarianceSpec, times: &[f64]) -> Result<Vec<f64>, CliError> {
    let model = &spec.model;
    let period = model.sampling_period();
    if spec.source_mode == SourceMode::Literal && model.regime().is_above() {
        let problem = coupled_problem(
            model,
            &spec.extra_damping,
            SourceMode::Literal,
            g_guess(model),
            0.0,
        );
        Ok(periodic_values_at(&problem, period, ORACLE_TOL, times)?
            .iter()
            .map(|y| y[1])
            .collect())
    } else {
        let problem = variance_problem(
            model,
            &spec.extra_damping,
            spec.source_mode,
            Arc::new(NoPhotons),
            0.0,
        );
        Ok(periodic_values_at(&problem, period, ORACLE_TOL, times)?
            .iter()
            .map(|y| y[0])
            .collect())
    }
}

fn regime_info(d: &mut Dataset, model: &DimensionlessModel) {
    let regime = model.regime();
    d.info("regime", regime.kind.to_string());
    d.info_f64("fbar_over_fth", regime.fbar_over_fth);
    if regime.kind == RegimeKind::Below {
        d.info(
            "note",
            "mean drive below threshold: n = 0 and both variance columns coincide",
        );
    }
}

fn trace_min(d: &mut Dataset, name: &str, trace: &TimeTrace) {
    let (t, v) = trace.min();
    d.info_f64(&format!("{name}_min"), v);
    d.info_f64(&format!("t_at_{name}_min"), t);
}

pub fn cmd_photon(c: &RunConfig) -> Result<Dataset, CliError> {
    let model = c.model()?;
    let spec = PhotonNumberSpec::new(model.clone()).with_rel_tol(c.rel_tol);
    let grid = c.time_grid();
    let trace = photon_trace(&spec, &grid).map_err(with_hint)?;

    let mut d = Dataset::new("photon", c.header(&[]));
    regime_info(&mut d, &model);
    d.numbers("t", grid.iter().copied())
        .numbers("n", trace.values().iter().copied());
    if c.oracle {
        let oracle = if spec.regime.is_above() {
            photon_oracle(&model, &grid)?
        } else {
            vec![0.0; grid.len()]
        };
        let res: Vec<f64> = trace
            .values()
            .iter()
            .zip(&oracle)
            .map(|(a, b)| rel(*a, *b))
            .collect();
        d.info("oracle_tol", fmt_f64(ORACLE_TOL))
            .info_f64("max_residual_n", max_mean(&res).0);
        d.numbers("n_oracle", oracle);
    }
    Ok(d)
}

pub fn cmd_variance(c: &RunConfig) -> Result<Dataset, CliError> {
    let model = c.model()?;
    let grid = c.time_grid();
    let literal = c.variance_spec(SourceMode::Literal)?;
    let vacuum = c.variance_spec(SourceMode::VacuumSource)?;
    let at_threshold = model.regime().kind == RegimeKind::AtThreshold;

    let mut d = Dataset::new("variance", c.header(&[]));
    regime_info(&mut d, &model);
    let v_vac = variance_trace(&vacuum, &grid).map_err(with_hint)?;
    let v_lit = if at_threshold {
        d.info(
            "note",
            "literal source diverges at threshold: V column left empty",
        );
        None
    } else {
        Some(variance_trace(&literal, &grid).map_err(with_hint)?)
    };
    if let Some(t) = &v_lit {
        trace_min(&mut d, "V", t);
    }
    trace_min(&mut d, "V_vacuum_source", &v_vac);

    d.numbers("t", grid.iter().copied());
    match &v_lit {
        Some(t) => d.numbers("V", t.values().iter().copied()),
        None => d.gappy("V", grid.iter().map(|_| None)),
    };
    d.numbers("V_vacuum_source", v_vac.values().iter().copied());

    if c.oracle {
        d.info("oracle_tol", fmt_f64(ORACLE_TOL));
        if let Some(t) = &v_lit {
            let oracle = variance_oracle(&literal, &grid)?;
            let res: Vec<f64> = t
                .values()
                .iter()
                .zip(&oracle)
                .map(|(a, b)| rel(*a, *b))
                .collect();
            d.info_f64("max_residual_V", max_mean(&res).0);
            d.numbers("V_oracle", oracle);
        }
        let oracle = variance_oracle(&vacuum, &grid)?;
        let res: Vec<f64> = v_vac
            .values()
            .iter()
            .zip(&oracle)
            .map(|(a, b)| rel(*a, *b))
            .collect();
        d.info_f64("max_residual_V_vacuum_source", max_mean(&res).0);
        d.numbers("V_vacuum_source_oracle", oracle);
    }
    Ok(d)
}

fn status(outcome: &Result<pulsed_squeeze::sweep::MinimaResult, ObservableError>) -> String {
    match outcome {
        Ok(_) => "ok",
        Err(ObservableError::BelowThreshold(_)) => "below-threshold",
        Err(ObservableError::DivergentIntegral(_)) => "divergent",
        Err(ObservableError::NonConvergent(_)) => "non-convergent",
        Err(ObservableError::NegativeDecay(_)) => "negative-decay",
        Err(_) => "error",
    }
    .to_string()
}

/// Oracle variance at each row's minimum location; gaps stay gaps.
fn minima_oracle(
    c: &RunConfig,
    table: &MinimaTable,
    mode: SourceMode,
) -> Result<Vec<Option<f64>>, CliError> {
    table
        .rows
        .par_iter()
        .map(|row| {
            let Ok(m) = &row.outcome else {
                return Ok(None);
            };
            let model = DimensionlessModel::new(
                row.fbar_over_fth,
                row.f1_over_fbar * row.fbar_over_fth,
                c.delta,
                c.phi,
                c.epsilon,
            )?;
            let spec = VarianceSpec::new(model)
                .with_source_mode(mode)
                .with_extra_damping(c.extra_damping())?;
            Ok(Some(variance_oracle(&spec, &[m.t0])?[0]))
        })
        .collect()
}

pub fn cmd_minima(c: &RunConfig) -> Result<Dataset, CliError> {
    let request = MinimaRequest {
        fbar_grid: c.fbar_grid.clone(),
        f1_levels: c.f1_levels.clone(),
        delta: c.delta,
        epsilon: c.epsilon,
        phi: c.phi,
        source_mode: c.source_mode,
        extra_damping: c.extra_damping(),
        rel_tol: c.rel_tol,
    };
    let primary = minima_table(&request)?;
    let vacuum = minima_table(&MinimaRequest {
        source_mode: SourceMode::VacuumSource,
        ..request
    })?;

    let mut d = Dataset::new("minima", c.header(&["fbar_grid", "f1_levels"]));
    let gaps = primary.rows.iter().filter(|r| r.outcome.is_err()).count();
    d.info("rows", primary.rows.len().to_string())
        .info("gaps", gaps.to_string());
    let rows = &primary.rows;
    d.numbers("fbar_over_fth", rows.iter().map(|r| r.fbar_over_fth))
        .numbers("f1_over_fbar", rows.iter().map(|r| r.f1_over_fbar))
        .gappy("v_min", rows.iter().map(|r| r.v_min()))
        .gappy(
            "t0",
            rows.iter().map(|r| r.outcome.as_ref().ok().map(|m| m.t0)),
        )
        .text("status", rows.iter().map(|r| status(&r.outcome)))
        .gappy("v_min_vacuum_source", vacuum.rows.iter().map(|r| r.v_min()))
        .gappy(
            "t0_vacuum_source",
            vacuum
                .rows
                .iter()
                .map(|r| r.outcome.as_ref().ok().map(|m| m.t0)),
        )
        .text(
            "status_vacuum_source",
            vacuum.rows.iter().map(|r| status(&r.outcome)),
        );

    if c.oracle {
        let mut worst = 0.0f64;
        for (name, table, mode) in [
            ("v_min_oracle", &primary, c.source_mode),
            (
                "v_min_vacuum_source_oracle",
                &vacuum,
                SourceMode::VacuumSource,
            ),
        ] {
            let oracle = minima_oracle(c, table, mode)?;
            for (row, o) in table.rows.iter().zip(&oracle) {
                if let (Some(v), Some(o)) = (row.v_min(), o) {
                    worst = worst.max(rel(v, *o));
                }
            }
            d.gappy(name, oracle);
        }
        d.info("oracle_tol", fmt_f64(ORACLE_TOL))
            .info_f64("max_residual", worst);
    }
    Ok(d)
}

pub fn cmd_scan_delta(c: &RunConfig) -> Result<Dataset, CliError> {
    let base = c.variance_spec(c.source_mode)?;
    let scan = asymptotic_scan(&base, &c.delta_grid).map_err(|e| match e {
        SweepError::Observable(o) => with_hint(o),
        other => other.into(),
    })?;
    let mut d = Dataset::new("scan-delta", c.header(&["delta_grid"]));
    d.info_f64("stationary_v_min", scan.stationary_v_min);
    if let Some(deep) = scan.deepest() {
        d.info_f64("deepest_Delta", deep.delta)
            .info_f64("deepest_v_min", deep.minimum.v_min);
    }
    if let Some(cst) = scan.fast_modulation_constant(FAST_DELTA_FLOOR) {
        d.info_f64("fast_modulation_C", cst)
            .info_f64("fast_modulation_floor", FAST_DELTA_FLOOR);
    }
    let rows = &scan.rows;
    d.numbers("Delta", rows.iter().map(|r| r.delta))
        .numbers("v_min", rows.iter().map(|r| r.minimum.v_min))
        .numbers("t0", rows.iter().map(|r| r.minimum.t0))
        .numbers(
            "deviation",
            rows.iter().map(|r| r.minimum.v_min - scan.stationary_v_min),
        );
    Ok(d)
}

fn summarize(d: &mut Dataset, name: &str, residuals: &[f64]) -> f64 {
    let (max, mean) = max_mean(residuals);
    d.info_f64(&format!("max_residual_{name}"), max)
        .info_f64(&format!("mean_residual_{name}"), mean);
    max
}

pub fn cmd_check(c: &RunConfig) -> Result<Report, CliError> {
    let model = c.model()?;
    let period = model.sampling_period();
    let times: Vec<f64> = (0..CHECK_PHASES)
        .map(|i| c.t_start + period * i as f64 / CHECK_PHASES as f64)
        .collect();
    let kind = model.regime().kind;
    let literal = c.variance_spec(SourceMode::Literal)?;
    let vacuum = c.variance_spec(SourceMode::VacuumSource)?;

    let mut d = Dataset::new("check", c.header(&[]));
    regime_info(&mut d, &model);
    d.info("oracle_tol", fmt_f64(ORACLE_TOL))
        .info_f64("limit", CHECK_LIMIT);
    d.numbers("t", times.iter().copied());

    let mut worst = 0.0f64;
    let mut worst_name = String::new();
    let mut track = |name: &str, max: f64| {
        if max > worst {
            worst = max;
            worst_name = name.to_string();
        }
    };

    // Photon number.
    let photons: Box<dyn PhotonProvider> = match kind {
        RegimeKind::Above => {
            let spec = PhotonNumberSpec::new(model.clone()).with_rel_tol(c.rel_tol);
            let n: Vec<f64> = times
                .par_iter()
                .map(|&t| photon_number(&spec, t))
                .collect::<Result<_, _>>()
                .map_err(with_hint)?;
            let oracle = photon_oracle(&model, &times)?;
            let res: Vec<f64> = n.iter().zip(&oracle).map(|(a, b)| rel(*a, *b)).collect();
            track("n", summarize(&mut d, "n", &res));
            d.numbers("n", n).numbers("n_oracle", oracle);
            Box::new(PhotonTable::build(&spec).map_err(with_hint)?)
        }
        RegimeKind::Below => {
            summarize(&mut d, "n", &[0.0]);
            d.numbers("n", times.iter().map(|_| 0.0))
                .numbers("n_oracle", times.iter().map(|_| 0.0));
            Box::new(NoPhotons)
        }
        RegimeKind::AtThreshold => {
            d.info(
                "note",
                "photon number and literal-source variance diverge at threshold; not checked",
            );
            d.gappy("n", times.iter().map(|_| None))
                .gappy("n_oracle", times.iter().map(|_| None));
            Box::new(NoPhotons)
        }
    };

    for (name, spec, provider) in [
        ("V", &literal, photons.as_ref()),
        (
            "V_vacuum_source",
            &vacuum,
            &NoPhotons as &dyn PhotonProvider,
        ),
    ] {
        if name == "V" && kind == RegimeKind::AtThreshold {
            d.gappy(name, times.iter().map(|_| None))
                .gappy(&format!("{name}_oracle"), times.iter().map(|_| None));
            continue;
        }
        let v: Vec<f64> = times
            .par_iter()
            .map(|&t| variance(spec, provider, t))
            .collect::<Result<_, _>>()
            .map_err(with_hint)?;
        let oracle = variance_oracle(spec, &times)?;
        let res: Vec<f64> = v.iter().zip(&oracle).map(|(a, b)| rel(*a, *b)).collect();
        track(name, summarize(&mut d, name, &res));
        d.numbers(name, v)
            .numbers(&format!("{name}_oracle"), oracle);
    }

    d.info_f64("max_residual", worst);
    let pass = worst <= CHECK_LIMIT;
    d.info("status", if pass { "pass" } else { "fail" });
    let failure = (!pass).then_some(CliError::CheckFailed {
        what: worst_name,
        residual: worst,
        limit: CHECK_LIMIT,
    });
    Ok(Report {
        dataset: d,
        failure,
    })
}
