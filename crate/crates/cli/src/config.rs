//! Run configuration: flat `key=value` files overlaid by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use pulsed_squeeze::observables::VarianceSpec;
use pulsed_squeeze::sweep::{default_fbar_grid, log_spaced};
use pulsed_squeeze::{DimensionlessModel, DriveProfile, ExtraDamping, ModelParams, SourceMode};

use crate::dataset::{fmt_f64, Format};
use crate::error::CliError;

pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_F0: f64 = 2.0;
pub const DEFAULT_DELTA: f64 = 2.0;
pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_SAMPLES: usize = 512;

const KEYS: &[&str] = &[
    "gamma",
    "gamma_l",
    "k",
    "epsilon",
    "f0",
    "f1",
    "delta",
    "phi",
    "F0",
    "F1",
    "Delta",
    "t_start",
    "t_end",
    "samples",
    "source_mode",
    "m0",
    "rel_tol",
    "format",
    "oracle",
    "fbar_grid",
    "f1_levels",
    "delta_grid",
];
const PHYSICAL: &[&str] = &["gamma", "gamma_l", "k"];
const PHYSICAL_DRIVE: &[&str] = &["f0", "f1", "delta"];
const REDUCED_DRIVE: &[&str] = &["F0", "F1", "Delta"];

/// Flags shared by every subcommand. Values are kept as text until
/// [`RunConfig::resolve`] so that file and flag inputs go through one parser.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Config file (`key=value` lines; dataset headers are accepted).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output path (default: stdout).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long = "gamma-l")]
    pub gamma_l: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    /// k²/(γ γ_L).
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub f0: Option<String>,
    #[arg(long)]
    pub f1: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub phi: Option<String>,
    /// Mean drive in units of the threshold.
    #[arg(long = "F0")]
    pub big_f0: Option<String>,
    #[arg(long = "F1")]
    pub big_f1: Option<String>,
    /// Modulation frequency in units of γ.
    #[arg(long = "Delta")]
    pub big_delta: Option<String>,
    #[arg(long = "t-start")]
    pub t_start: Option<String>,
    #[arg(long = "t-end")]
    pub t_end: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    /// literal | vacuum
    #[arg(long = "source-mode")]
    pub source_mode: Option<String>,
    /// Constant extra damping.
    #[arg(long)]
    pub m0: Option<String>,
    #[arg(long = "rel-tol")]
    pub rel_tol: Option<String>,
    /// csv | json
    #[arg(long)]
    pub format: Option<String>,
    /// Add ODE-oracle columns.
    #[arg(long)]
    pub oracle: bool,
    /// Comma-separated f̄/f_th values (minima).
    #[arg(long = "fbar-grid")]
    pub fbar_grid: Option<String>,
    /// Comma-separated f1/f̄ values (minima).
    #[arg(long = "f1-levels")]
    pub f1_levels: Option<String>,
    /// Comma-separated Δ values (scan-delta).
    #[arg(long = "delta-grid")]
    pub delta_grid: Option<String>,
}

impl Flags {
    fn entries(&self) -> BTreeMap<String, String> {
        let pairs: [(&str, &Option<String>); 21] = [
            ("gamma", &self.gamma),
            ("gamma_l", &self.gamma_l),
            ("k", &self.k),
            ("epsilon", &self.epsilon),
            ("f0", &self.f0),
            ("f1", &self.f1),
            ("delta", &self.delta),
            ("phi", &self.phi),
            ("F0", &self.big_f0),
            ("F1", &self.big_f1),
            ("Delta", &self.big_delta),
            ("t_start", &self.t_start),
            ("t_end", &self.t_end),
            ("samples", &self.samples),
            ("source_mode", &self.source_mode),
            ("m0", &self.m0),
            ("rel_tol", &self.rel_tol),
            ("format", &self.format),
            ("fbar_grid", &self.fbar_grid),
            ("f1_levels", &self.f1_levels),
            ("delta_grid", &self.delta_grid),
        ];
        let mut map: BTreeMap<String, String> = pairs
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.trim().to_string())))
            .collect();
        if self.oracle {
            map.insert("oracle".into(), "true".into());
        }
        map
    }
}

/// Parses flat `key=value` text. A leading `#` is stripped, lines without `=`
/// are skipped and `info.*` keys are ignored, so a dataset header can be fed
/// back as a config.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        return parse_json_meta(trimmed);
    }
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim().trim_start_matches('#').trim();
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        let key = key.trim().replace('-', "_");
        if key.starts_with("info.") {
            continue;
        }
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!(
                "line {}: unknown key '{key}'",
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_json_meta(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("json config: {e}")))?;
    let meta = value
        .get("meta")
        .and_then(|m| m.as_object())
        .ok_or_else(|| CliError::Config("json config needs a 'meta' object".into()))?;
    let mut map = BTreeMap::new();
    for (key, v) in meta {
        if key.starts_with("info.") {
            continue;
        }
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown key '{key}'")));
        }
        let text = match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        map.insert(key.clone(), text);
    }
    Ok(map)
}

/// File entries overlaid by flag entries. A flag from one parameter style
/// drops the file's entries of the competing style.
fn overlay(
    mut file: BTreeMap<String, String>,
    flags: BTreeMap<String, String>,
) -> BTreeMap<String, String> {
    let groups: [(&[&str], &[&str]); 2] =
        [(PHYSICAL, &["epsilon"]), (PHYSICAL_DRIVE, REDUCED_DRIVE)];
    for (a, b) in groups {
        for (mine, theirs) in [(a, b), (b, a)] {
            if mine.iter().any(|k| flags.contains_key(*k)) {
                for k in theirs {
                    file.remove(*k);
                }
            }
        }
    }
    file.extend(flags);
    file
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Set when the run was specified in physical units.
    pub physical: Option<ModelParams>,
    pub epsilon: f64,
    pub f0: f64,
    pub f1: f64,
    pub delta: f64,
    pub phi: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
    pub source_mode: SourceMode,
    pub m0: f64,
    pub rel_tol: f64,
    pub format: Format,
    pub oracle: bool,
    pub fbar_grid: Vec<f64>,
    pub f1_levels: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub out: Option<PathBuf>,
}

struct Values(BTreeMap<String, String>);

impl Values {
    fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.0
            .get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::Config(format!("{key}: '{v}' is not a finite number")))
            })
            .transpose()
    }

    fn required(&self, key: &str, why: &str) -> Result<f64, CliError> {
        self.f64(key)?
            .ok_or_else(|| CliError::Config(format!("{key} is required {why}")))
    }

    fn grid(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(text) = self.0.get(key) else {
            return Ok(None);
        };
        let values = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::Config(format!("{key}: '{s}' is not a finite number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err(CliError::Config(format!("{key} is empty")));
        }
        Ok(Some(values))
    }
}

/// Default Δ grid for `scan-delta`: 0.1 to 1000, five points per decade.
pub fn default_delta_grid() -> Vec<f64> {
    log_spaced(0.1, 1e3, 21)
}

impl RunConfig {
    /// Reads the optional config file and overlays `flags`.
    pub fn from_flags(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => parse_config_text(&read_config(path)?)?,
            None => BTreeMap::new(),
        };
        let mut config = Self::resolve(overlay(file, flags.entries()))?;
        config.out = flags.out.clone();
        Ok(config)
    }

    /// Validates a merged key map.
    pub fn resolve(map: BTreeMap<String, String>) -> Result<Self, CliError> {
        let v = Values(map);

        let physical = if PHYSICAL.iter().any(|k| v.has(k)) {
            if v.has("epsilon") {
                return Err(CliError::Config(
                    "give either gamma/gamma-l/k or epsilon, not both".into(),
                ));
            }
            let why = "with physical parameters";
            Some(ModelParams::new(
                v.required("gamma", why)?,
                v.required("gamma_l", why)?,
                v.required("k", why)?,
            )?)
        } else {
            None
        };
        let epsilon = match &physical {
            Some(p) => p.epsilon(),
            None => v.f64("epsilon")?.unwrap_or(DEFAULT_EPSILON),
        };

        let phi = v.f64("phi")?.unwrap_or(0.0);
        let (f0, f1, delta) = if PHYSICAL_DRIVE.iter().any(|k| v.has(k)) {
            if REDUCED_DRIVE.iter().any(|k| v.has(k)) {
                return Err(CliError::Config(
                    "give either f0/f1/delta or F0/F1/Delta, not both".into(),
                ));
            }
            let params = physical
                .as_ref()
                .ok_or_else(|| CliError::Config("f0/f1/delta need gamma, gamma-l and k".into()))?;
            let f0 = v.required("f0", "with f1/delta")?;
            let f1 = v.f64("f1")?.unwrap_or(0.0);
            let delta = v.f64("delta")?.unwrap_or(DEFAULT_DELTA * params.gamma());
            let model =
                DimensionlessModel::from_physical(params, &DriveProfile::new(f0, f1, delta, phi)?)?;
            let h = *model.harmonic().expect("physical drives are harmonic");
            (h.f0, h.f1, h.delta)
        } else {
            (
                v.f64("F0")?.unwrap_or(DEFAULT_F0),
                v.f64("F1")?.unwrap_or(0.0),
                v.f64("Delta")?.unwrap_or(DEFAULT_DELTA),
            )
        };

        let t_start = v.f64("t_start")?.unwrap_or(0.0);
        let t_end = v.f64("t_end")?.unwrap_or(DEFAULT_T_END);
        if t_end <= t_start {
            return Err(CliError::Config(format!(
                "t_end ({t_end}) must exceed t_start ({t_start})"
            )));
        }
        let samples = match v.0.get("samples") {
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("samples: '{s}' is not a count")))?,
            None => DEFAULT_SAMPLES,
        };
        if samples < 2 {
            return Err(CliError::Config(format!(
                "samples must be at least 2, got {samples}"
            )));
        }

        let source_mode = match v.0.get("source_mode") {
            Some(s) => s
                .parse()
                .map_err(|_| CliError::Config(format!("source_mode: '{s}' (literal|vacuum)")))?,
            None => SourceMode::Literal,
        };
        let format = match v.0.get("format") {
            Some(s) => s
                .parse()
                .map_err(|_| CliError::Config(format!("format: '{s}' (csv|json)")))?,
            None => Format::Csv,
        };
        let oracle = match v.0.get("oracle").map(String::as_str) {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return Err(CliError::Config(format!("oracle: '{other}' (true|false)"))),
        };
        let rel_tol = v
            .f64("rel_tol")?
            .unwrap_or(pulsed_squeeze::quadrature::DEFAULT_REL_TOL);
        if !(pulsed_squeeze::quadrature::MIN_REL_TOL..=pulsed_squeeze::quadrature::MAX_REL_TOL)
            .contains(&rel_tol)
        {
            return Err(CliError::Config(format!(
                "rel_tol {rel_tol:e} outside [1e-14, 1e-3]"
            )));
        }

        let config = Self {
            physical,
            epsilon,
            f0,
            f1,
            delta,
            phi,
            t_start,
            t_end,
            samples,
            source_mode,
            m0: v.f64("m0")?.unwrap_or(0.0),
            rel_tol,
            format,
            oracle,
            fbar_grid: v.grid("fbar_grid")?.unwrap_or_else(default_fbar_grid),
            f1_levels: v.grid("f1_levels")?.unwrap_or_else(|| vec![0.0, 0.75, 1.5]),
            delta_grid: v.grid("delta_grid")?.unwrap_or_else(default_delta_grid),
            out: None,
        };
        config.model()?;
        Ok(config)
    }

    pub fn model(&self) -> Result<DimensionlessModel, CliError> {
        Ok(DimensionlessModel::new(
            self.f0,
            self.f1,
            self.delta,
            self.phi,
            self.epsilon,
        )?)
    }

    pub fn extra_damping(&self) -> ExtraDamping {
        if self.m0 == 0.0 {
            ExtraDamping::Zero
        } else {
            ExtraDamping::Constant(self.m0)
        }
    }

    pub fn variance_spec(&self, mode: SourceMode) -> Result<VarianceSpec, CliError> {
        Ok(VarianceSpec::new(self.model()?)
            .with_source_mode(mode)
            .with_rel_tol(self.rel_tol)
            .with_extra_damping(self.extra_damping())?)
    }

    /// Uniform grid over the window, endpoints included.
    pub fn time_grid(&self) -> Vec<f64> {
        let n = self.samples - 1;
        (0..=n)
            .map(|i| self.t_start + (self.t_end - self.t_start) * i as f64 / n as f64)
            .collect()
    }

    /// Resolved parameters as re-readable `key=value` pairs.
    pub fn header(&self, grids: &[&str]) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| out.push((k.to_string(), v));
        if let Some(p) = &self.physical {
            put("info.gamma", fmt_f64(p.gamma()));
            put("info.gamma_l", fmt_f64(p.gamma_l()));
            put("info.k", fmt_f64(p.k()));
        }
        put("epsilon", fmt_f64(self.epsilon));
        put("F0", fmt_f64(self.f0));
        put("F1", fmt_f64(self.f1));
        put("Delta", fmt_f64(self.delta));
        put("phi", fmt_f64(self.phi));
        put("t_start", fmt_f64(self.t_start));
        put("t_end", fmt_f64(self.t_end));
        put("samples", self.samples.to_string());
        put("source_mode", self.source_mode.to_string());
        put("m0", fmt_f64(self.m0));
        put("rel_tol", fmt_f64(self.rel_tol));
        put("format", self.format.to_string());
        put("oracle", self.oracle.to_string());
        for &g in grids {
            let values = match g {
                "fbar_grid" => &self.fbar_grid,
                "f1_levels" => &self.f1_levels,
                "delta_grid" => &self.delta_grid,
                _ => continue,
            };
            put(
                g,
                values
                    .iter()
                    .map(|x| fmt_f64(*x))
                    .collect::<Vec<_>>()
                    .join(","),
            );
        }
        out
    }
}

fn read_config(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn defaults() {
        let c = RunConfig::resolve(BTreeMap::new()).unwrap();
        assert_eq!((c.epsilon, c.f0, c.f1, c.delta), (1e-8, 2.0, 0.0, 2.0));
        assert_eq!(c.samples, 512);
        assert_eq!(c.time_grid().len(), 512);
        assert_eq!(*c.time_grid().last().unwrap(), 10.0);
    }

    #[test]
    fn header_text_parses_back() {
        let text =
            "# pulsed-squeeze dataset\n# info.version=0.1.0\n# F0=1.5e0\n# samples=7\nt,n\n0,1\n";
        let m = parse_config_text(text).unwrap();
        assert_eq!(m, map(&[("F0", "1.5e0"), ("samples", "7")]));
        assert!(parse_config_text("Fo=1").is_err());
        assert_eq!(
            parse_config_text("t-end = 3").unwrap(),
            map(&[("t_end", "3")])
        );
    }

    #[test]
    fn flags_override_file_and_competing_style() {
        let file = map(&[("epsilon", "1e-6"), ("F0", "3"), ("samples", "9")]);
        let flags = map(&[
            ("gamma", "1"),
            ("gamma_l", "1"),
            ("k", "1e-3"),
            ("samples", "5"),
        ]);
        let c = RunConfig::resolve(overlay(file, flags)).unwrap();
        assert!((c.epsilon - 1e-6).abs() < 1e-20);
        assert_eq!(c.samples, 5);
        assert_eq!(c.f0, 3.0);
    }

    #[test]
    fn physical_drive_is_reduced() {
        let c = RunConfig::resolve(map(&[
            ("gamma", "2"),
            ("gamma_l", "1"),
            ("k", "2e-4"),
            ("f0", "2e4"),
            ("f1", "1e4"),
            ("delta", "4"),
        ]))
        .unwrap();
        // f_th = γγ_L/k = 1e4.
        assert!((c.f0 - 2.0).abs() < 1e-12 && (c.f1 - 1.0).abs() < 1e-12);
        assert!((c.delta - 2.0).abs() < 1e-12);
        assert!((c.epsilon - 2e-8).abs() < 1e-22);
    }

    #[test]
    fn invalid_inputs_name_the_parameter() {
        let cases = [
            (map(&[("epsilon", "1e-8"), ("k", "1")]), "epsilon"),
            (map(&[("f0", "2")]), "gamma"),
            (map(&[("samples", "1")]), "samples"),
            (map(&[("t_start", "3"), ("t_end", "1")]), "t_end"),
            (map(&[("source_mode", "both")]), "source_mode"),
            (map(&[("F1", "x")]), "F1"),
            (map(&[("gamma", "1"), ("gamma_l", "1")]), "k"),
        ];
        for (m, name) in cases {
            let e = RunConfig::resolve(m).unwrap_err();
            assert_eq!(e.exit_code(), 2);
            assert!(e.to_string().contains(name), "{e}");
        }
    }

    #[test]
    fn header_round_trip_is_exact() {
        let c = RunConfig::resolve(map(&[
            ("F0", "0.7"),
            ("F1", "0.1"),
            ("phi", "0.3"),
            ("fbar_grid", "0.5,0.6"),
        ]))
        .unwrap();
        let text: String = c
            .header(&["fbar_grid"])
            .iter()
            .map(|(k, v)| format!("# {k}={v}\n"))
            .collect();
        let back = RunConfig::resolve(parse_config_text(&text).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
