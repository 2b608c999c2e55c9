//! Run configuration files.
//!
//! Flat TOML: every key may be written dotted (`flow.alpha = 1.0`) or under a section
//! header (`[flow]` then `alpha = 1.0`). Keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `geometry` | `"conformal2d"` or `"warped"` | required |
//! | `grid.n` | grid points per direction | 64 |
//! | `flow.dim` | manifold dimension | 2 (conformal), 4 (warped) |
//! | `flow.alpha`, `flow.beta` | flow coefficients | 1.0, 0.0 |
//! | `flow.allow_degenerate` | skip the parabolicity check | false |
//! | `integrator.t_end` | final time | required |
//! | `integrator.cfl_safety` | step safety factor in (0, 1] | 0.2 |
//! | `integrator.record_every` | steps between rows | 1 |
//! | `integrator.max_steps` | step budget | 1000000 |
//! | `integrator.blowup_r_cap` | blow-up threshold on max abs R | 1e6 |
//! | `integrator.scheme` | `"rk4"` or `"euler"` | `"rk4"` |
//! | `integrator.dt_fixed` | optional step cap | none |
//! | `initial.kind` | `"flat"`, `"cosine"`, `"product"` or `"file"` | `"flat"` |
//! | `initial.amplitude`, `initial.mode` | cosine amplitude and wave number | 0.3, 1 |
//! | `initial.r0`, `initial.phi0` | sphere radius and axial factor (warped) | 1.0, 1.0 |
//! | `initial.path` | data file for `kind = "file"` | none |
//! | `output.csv`, `output.json` | file names inside the output directory | `run.csv`, `summary.json` |
//! | `output.svg` | write `R_min.svg`, `volume.svg`, `f_max.svg` | false |
//! | `monitors.enabled` | subset of `scalar_min`, `volume`, `pinching`, `decay` | all that apply |
//! | `monitors.c_disc` | tolerance constant in `c_disc (h^2 + dt)` | 1.0 |
//!
//! Cosine data is `u = A cos(m x1)` on the torus and `psi = r0 + A cos(m s)`, `phi = phi0`
//! for warped runs. A data file holds whitespace-separated numbers: `N*N` values of `u`
//! (row-major, `x1` along a row), or `N` lines of `phi psi`.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::flow::{IntegratorConfig, Scheme};
use crate::geometry::{ConformalTorusState, GeometryKind, GeometryState, WarpedProductState};
use crate::params::FlowParams;

/// A configuration problem, naming the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "invalid config: {}", self.reason)
        } else {
            write!(f, "invalid config key `{}`: {}", self.key, self.reason)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    geometry: Option<GeometryKind>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    flow: RawFlow,
    #[serde(default)]
    integrator: RawIntegrator,
    #[serde(default)]
    initial: RawInitial,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    monitors: RawMonitors,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<i64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlow {
    dim: Option<i64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    allow_degenerate: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrator {
    t_end: Option<f64>,
    cfl_safety: Option<f64>,
    record_every: Option<i64>,
    max_steps: Option<i64>,
    blowup_r_cap: Option<f64>,
    scheme: Option<Scheme>,
    dt_fixed: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: Option<String>,
    amplitude: Option<f64>,
    mode: Option<i64>,
    r0: Option<f64>,
    phi0: Option<f64>,
    path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    csv: Option<String>,
    json: Option<String>,
    svg: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonitors {
    enabled: Option<Vec<MonitorKind>>,
    c_disc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorKind {
    ScalarMin,
    Volume,
    Pinching,
    Decay,
}

impl MonitorKind {
    pub const ALL: [MonitorKind; 4] = [Self::ScalarMin, Self::Volume, Self::Pinching, Self::Decay];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Flat,
    Cosine {
        amplitude: f64,
        mode: u32,
        r0: f64,
        phi0: f64,
    },
    Product {
        r0: f64,
        phi0: f64,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputPaths {
    pub csv: String,
    pub json: String,
    pub svg: bool,
}

/// Validated contents of a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub geometry: GeometryKind,
    pub grid_n: usize,
    pub params: FlowParams,
    pub integrator: IntegratorConfig,
    pub initial: InitialData,
    pub outputs: OutputPaths,
    pub monitors: Vec<MonitorKind>,
    pub c_disc: f64,
}

fn positive_int(key: &str, v: Option<i64>, default: usize) -> Result<usize, ConfigError> {
    match v {
        None => Ok(default),
        Some(x) if x > 0 => Ok(x as usize),
        Some(x) => Err(ConfigError::new(key, format!("must be a positive integer, got {x}"))),
    }
}

fn plain_file_name(key: &str, name: Option<String>, default: &str) -> Result<String, ConfigError> {
    let name = name.unwrap_or_else(|| default.to_string());
    let p = Path::new(&name);
    if name.is_empty() || p.components().count() != 1 || p.is_absolute() {
        return Err(ConfigError::new(
            key,
            "must be a plain file name inside the output directory",
        ));
    }
    Ok(name)
}

impl RunConfig {
    /// Parses configuration text. Relative `initial.path` values are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>, allow_degenerate: bool) -> Result<Self, ConfigError> {
        let raw: RawFile = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let key = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field"))
                .unwrap_or("")
                .to_string();
            ConfigError::new(key, msg)
        })?;
        Self::from_raw(raw, base_dir, allow_degenerate)
    }

    pub fn load(path: &Path, allow_degenerate: bool) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent(), allow_degenerate)
    }

    fn from_raw(raw: RawFile, base_dir: Option<&Path>, allow_degenerate: bool) -> Result<Self, ConfigError> {
        let geometry = raw.geometry.ok_or_else(|| ConfigError::new("geometry", "missing"))?;
        let grid_n = positive_int("grid.n", raw.grid.n, 64)?;
        let default_dim = match geometry {
            GeometryKind::Conformal2d => 2,
            GeometryKind::Warped => 4,
        };
        let dim = positive_int("flow.dim", raw.flow.dim, default_dim)?;
        match geometry {
            GeometryKind::Conformal2d if dim != 2 => {
                return Err(ConfigError::new("flow.dim", "the conformal torus family has dim = 2"));
            }
            GeometryKind::Warped if !(3..=16).contains(&dim) => {
                return Err(ConfigError::new("flow.dim", "warped runs need 3 <= dim <= 16"));
            }
            _ => {}
        }
        let alpha = raw.flow.alpha.unwrap_or(1.0);
        let beta = raw.flow.beta.unwrap_or(0.0);
        let degenerate = allow_degenerate || raw.flow.allow_degenerate.unwrap_or(false);
        let params = if degenerate {
            FlowParams::degenerate(alpha, beta, dim)
        } else {
            FlowParams::new(alpha, beta, dim)
        }
        .map_err(|e| ConfigError::new("flow", e.to_string()))?;

        let t_end = raw
            .integrator
            .t_end
            .ok_or_else(|| ConfigError::new("integrator.t_end", "missing"))?;
        let defaults = IntegratorConfig::default();
        let integrator = IntegratorConfig {
            cfl_safety: raw.integrator.cfl_safety.unwrap_or(defaults.cfl_safety),
            t_end,
            max_steps: positive_int("integrator.max_steps", raw.integrator.max_steps, defaults.max_steps)?,
            blowup_r_cap: raw.integrator.blowup_r_cap.unwrap_or(defaults.blowup_r_cap),
            record_every: positive_int("integrator.record_every", raw.integrator.record_every, 1)?,
            scheme: raw.integrator.scheme.unwrap_or_default(),
            dt_fixed: raw.integrator.dt_fixed,
            parallel: false,
        };
        integrator.validate().map_err(|e| match e {
            crate::Error::InvalidParameter { name, reason } => ConfigError::new(format!("integrator.{name}"), reason),
            other => ConfigError::new("integrator", other.to_string()),
        })?;

        let ini = raw.initial;
        let r0 = ini.r0.unwrap_or(1.0);
        let phi0 = ini.phi0.unwrap_or(1.0);
        let initial = match ini.kind.as_deref().unwrap_or("flat") {
            "flat" => InitialData::Flat,
            "cosine" => {
                let mode = ini.mode.unwrap_or(1);
                if !(0..=i64::from(u32::MAX)).contains(&mode) {
                    return Err(ConfigError::new("initial.mode", "must be a non-negative integer"));
                }
                InitialData::Cosine {
                    amplitude: ini.amplitude.unwrap_or(0.3),
                    mode: mode as u32,
                    r0,
                    phi0,
                }
            }
            "product" => InitialData::Product { r0, phi0 },
            "file" => {
                let p = ini
                    .path
                    .ok_or_else(|| ConfigError::new("initial.path", "required for kind = \"file\""))?;
                let path = match base_dir {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p,
                };
                InitialData::File { path }
            }
            other => {
                return Err(ConfigError::new(
                    "initial.kind",
                    format!("unknown kind `{other}` (expected flat, cosine, product or file)"),
                ));
            }
        };
        if geometry == GeometryKind::Warped {
            if !(r0 > 0.0 && phi0 > 0.0) {
                return Err(ConfigError::new("initial", "r0 and phi0 must be positive"));
            }
            if initial == InitialData::Flat {
                return Err(ConfigError::new(
                    "initial.kind",
                    "no flat metric exists in the warped family",
                ));
            }
        } else if matches!(initial, InitialData::Product { .. }) {
            return Err(ConfigError::new(
                "initial.kind",
                "`product` data needs geometry = \"warped\"",
            ));
        }

        let outputs = OutputPaths {
            csv: plain_file_name("output.csv", raw.output.csv, "run.csv")?,
            json: plain_file_name("output.json", raw.output.json, "summary.json")?,
            svg: raw.output.svg.unwrap_or(false),
        };
        let monitors = match raw.monitors.enabled {
            Some(list) if dim < 3 && list.contains(&MonitorKind::Pinching) => {
                return Err(ConfigError::new(
                    "monitors.enabled",
                    "the pinching monitor needs dim >= 3",
                ));
            }
            Some(list) => list,
            None => MonitorKind::ALL
                .into_iter()
                .filter(|m| dim >= 3 || *m != MonitorKind::Pinching)
                .collect(),
        };
        let c_disc = raw.monitors.c_disc.unwrap_or(1.0);
        if !(c_disc > 0.0 && c_disc.is_finite()) {
            return Err(ConfigError::new("monitors.c_disc", "must be positive and finite"));
        }
        Ok(Self {
            geometry,
            grid_n,
            params,
            integrator,
            initial,
            outputs,
            monitors,
            c_disc,
        })
    }

    /// Builds the initial state described by the configuration.
    pub fn initial_state(&self) -> Result<GeometryState, ConfigError> {
        let n = self.grid_n;
        let wrap = |e: crate::Error| ConfigError::new("initial", e.to_string());
        let dim = self.params.dim;
        let state = match (&self.initial, self.geometry) {
            (InitialData::Flat, GeometryKind::Conformal2d) => {
                GeometryState::Conformal(ConformalTorusState::flat(n).map_err(wrap)?)
            }
            (InitialData::Cosine { amplitude, mode, .. }, GeometryKind::Conformal2d) => {
                let (a, m) = (*amplitude, f64::from(*mode));
                GeometryState::Conformal(ConformalTorusState::from_fn(n, |x, _| a * (m * x).cos()).map_err(wrap)?)
            }
            (
                InitialData::Cosine {
                    amplitude,
                    mode,
                    r0,
                    phi0,
                },
                GeometryKind::Warped,
            ) => {
                let (a, m, r0, phi0) = (*amplitude, f64::from(*mode), *r0, *phi0);
                GeometryState::Warped(
                    WarpedProductState::from_fn(n, dim, |_| phi0, |s| r0 + a * (m * s).cos()).map_err(wrap)?,
                )
            }
            (InitialData::Product { r0, phi0 }, GeometryKind::Warped) => {
                GeometryState::Warped(WarpedProductState::product(n, dim, *r0, *phi0).map_err(wrap)?)
            }
            (InitialData::File { path }, kind) => read_state_file(path, kind, dim, n)?,
            _ => return Err(ConfigError::new("initial.kind", "not available for this geometry")),
        };
        Ok(state)
    }
}

fn read_state_file(path: &Path, kind: GeometryKind, dim: usize, n_cfg: usize) -> Result<GeometryState, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("initial.path", format!("cannot read {}: {e}", path.display())))?;
    let values = text
        .split_whitespace()
        .map(|w| w.parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ConfigError::new("initial.path", format!("{}: {e}", path.display())))?;
    let wrap = |e: crate::Error| ConfigError::new("initial.path", e.to_string());
    match kind {
        GeometryKind::Conformal2d => {
            let n = (values.len() as f64).sqrt().round() as usize;
            if n * n != values.len() || n != n_cfg {
                return Err(ConfigError::new(
                    "initial.path",
                    format!(
                        "expected {} values for grid.n = {n_cfg}, found {}",
                        n_cfg * n_cfg,
                        values.len()
                    ),
                ));
            }
            Ok(GeometryState::Conformal(
                ConformalTorusState::new(values, n).map_err(wrap)?,
            ))
        }
        GeometryKind::Warped => {
            if values.len() != 2 * n_cfg {
                return Err(ConfigError::new(
                    "initial.path",
                    format!("expected {n_cfg} lines of `phi psi`, found {} values", values.len()),
                ));
            }
            let phi = values.iter().step_by(2).copied().collect();
            let psi = values.iter().skip(1).step_by(2).copied().collect();
            Ok(GeometryState::Warped(
                WarpedProductState::new(phi, psi, dim).map_err(wrap)?,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WARPED: &str = r#"
geometry = "warped"
grid.n = 32
flow.dim = 4
flow.alpha = 1.0
flow.beta = 0.0
integrator.t_end = 1.0
initial.kind = "product"
initial.r0 = 1.0
"#;

    #[test]
    fn dotted_and_sectioned_forms_agree() {
        let sectioned = "geometry = \"warped\"\n[grid]\nn = 32\n[flow]\ndim = 4\nalpha = 1.0\nbeta = 0.0\n\
                         [integrator]\nt_end = 1.0\n[initial]\nkind = \"product\"\nr0 = 1.0\n";
        assert_eq!(
            RunConfig::parse(WARPED, None, false).unwrap(),
            RunConfig::parse(sectioned, None, false).unwrap()
        );
    }

    #[test]
    fn defaults_are_filled() {
        let c = RunConfig::parse(WARPED, None, false).unwrap();
        assert_eq!(c.integrator.cfl_safety, 0.2);
        assert_eq!(c.outputs.csv, "run.csv");
        assert_eq!(c.monitors, MonitorKind::ALL.to_vec());
        let torus = RunConfig::parse("geometry = \"conformal2d\"\nintegrator.t_end = 1\n", None, false).unwrap();
        assert!(!torus.monitors.contains(&MonitorKind::Pinching));
        assert!(matches!(c.initial_state().unwrap(), GeometryState::Warped(_)));
    }

    #[test]
    fn unknown_key_is_named() {
        let e = RunConfig::parse("geometry = \"warped\"\nflow.gamma = 1\n", None, false).unwrap_err();
        assert_eq!(e.key, "gamma");
        assert!(e.to_string().contains("gamma"));
    }

    #[test]
    fn regime_violation_cites_condition() {
        let text = WARPED.replace("flow.beta = 0.0", "flow.beta = -0.3333333333333333");
        let e = RunConfig::parse(&text, None, false).unwrap_err();
        assert!(e.to_string().contains("beta > -alpha/(n-1)"), "{e}");
        assert!(RunConfig::parse(&text, None, true).is_ok());
    }

    #[test]
    fn bad_values_name_their_key() {
        let e = RunConfig::parse(&WARPED.replace("t_end = 1.0", "t_end = -1.0"), None, false).unwrap_err();
        assert_eq!(e.key, "integrator.t_end");
        let e = RunConfig::parse(&WARPED.replace("\"product\"", "\"blob\""), None, false).unwrap_err();
        assert_eq!(e.key, "initial.kind");
        let e = RunConfig::parse(
            "geometry = \"conformal2d\"\nflow.dim = 3\nintegrator.t_end = 1\n",
            None,
            false,
        )
        .unwrap_err();
        assert_eq!(e.key, "flow.dim");
    }

    #[test]
    fn state_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.txt");
        let vals: Vec<String> = (0..64).map(|i| format!("{}", 0.01 * i as f64)).collect();
        std::fs::write(&path, vals.join(" ")).unwrap();
        let text = "geometry = \"conformal2d\"\ngrid.n = 8\nintegrator.t_end = 1\ninitial.kind = \"file\"\ninitial.path = \"u.txt\"\n";
        let c = RunConfig::parse(text, Some(dir.path()), false).unwrap();
        let GeometryState::Conformal(s) = c.initial_state().unwrap() else {
            panic!()
        };
        assert_eq!(s.u[63], 0.63);
        let c = RunConfig::parse(&text.replace("grid.n = 8", "grid.n = 16"), Some(dir.path()), false).unwrap();
        assert_eq!(c.initial_state().unwrap_err().key, "initial.path");
    }
}
