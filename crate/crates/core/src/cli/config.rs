//! `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, section prefixes are plain
//! dotted keys (`solver.tolerance = 1e-10`). Lists are comma separated.
//! Relative paths resolve against the directory holding the config file.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::mesh::SimplicialSurface;
use crate::solver::{Boundary, Current, LinearSolver, Mode, SourceKind, SourceSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: cannot parse `{value}`: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("{0}")]
    Invalid(String),
}

/// Raw assignments, consumed key by key so leftovers can be reported.
#[derive(Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(ConfigError::Duplicate {
                    line: i + 1,
                    key: key.to_string(),
                });
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn get<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: Display,
    {
        self.take(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| ConfigError::Value {
                    key: key.to_string(),
                    reason: e.to_string(),
                    value: v,
                })
            })
            .transpose()
    }

    fn get_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: Display,
    {
        let Some(v) = self.take(key) else { return Ok(None) };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<T>().map_err(|e| ConfigError::Value {
                    key: key.to_string(),
                    value: s.to_string(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// Distinct `<prefix><name>.` sub-sections, e.g. region names.
    fn sections(&self, prefix: &str) -> Vec<String> {
        let names: BTreeSet<String> = self
            .entries
            .keys()
            .filter_map(|k| k.strip_prefix(prefix))
            .filter_map(|rest| rest.split_once('.').map(|(name, _)| name.to_string()))
            .collect();
        names.into_iter().collect()
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.entries.into_keys().next() {
            Some(k) => Err(ConfigError::Unknown(k)),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub name: String,
    pub faces: Vec<usize>,
    pub eps: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub sigma_m: Option<f64>,
}

/// Per-face media: uniform background values overridden region by region
/// (later regions win where they overlap).
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialSpec {
    pub eps: f64,
    pub mu: f64,
    pub sigma: f64,
    pub sigma_m: f64,
    pub regions: Vec<Region>,
}

impl MaterialSpec {
    /// `[eps, mu, sigma, sigma_m]` per face.
    pub fn face_values(&self, n_faces: usize) -> [Vec<f64>; 4] {
        let mut out = [
            vec![self.eps; n_faces],
            vec![self.mu; n_faces],
            vec![self.sigma; n_faces],
            vec![self.sigma_m; n_faces],
        ];
        for r in &self.regions {
            for (slot, value) in out.iter_mut().zip([r.eps, r.mu, r.sigma, r.sigma_m]) {
                if let Some(v) = value {
                    for &f in &r.faces {
                        slot[f] = v;
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Zero,
    /// Face field `amplitude · exp(−|x − center|²/width²)` at circumcenters.
    Gaussian {
        amplitude: f64,
        center: [f64; 3],
        width: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub cadence: usize,
    pub vtk: bool,
    pub csv: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilitySpec {
    /// Time steps as multiples of `min|*e| / c`.
    pub dt_factors: Vec<f64>,
    pub k_samples: usize,
    pub empirical_steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceSpec {
    pub meshes: Vec<PathBuf>,
    pub final_time: f64,
    pub dt_per_h: f64,
    pub temporal_dts: Vec<f64>,
    pub m: u32,
    pub n: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mesh_path: PathBuf,
    pub mode: Mode,
    pub dt: f64,
    pub steps: usize,
    pub materials: MaterialSpec,
    pub source: SourceSpec,
    pub initial: InitialCondition,
    /// Indices of the elements carrying E and H respectively.
    pub probes_e: Vec<usize>,
    pub probes_h: Vec<usize>,
    pub output: OutputSpec,
    pub solver: LinearSolver,
    pub boundary: Boundary,
    pub allow_non_well_centered: bool,
    /// Let negative star1 entries through to the stepper.
    pub allow_indefinite: bool,
    pub jm_sign: f64,
    pub stability: StabilitySpec,
    pub convergence: Option<ConvergenceSpec>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut kv = KeyValues::parse(text)?;
        let resolve = |p: String| base.join(p);

        let mesh_path = resolve(kv.take("mesh").ok_or(ConfigError::Missing("mesh"))?);
        let mode_text = kv.take("mode").unwrap_or_else(|| "te".into());
        let mode = parse_mode(&mode_text).map_err(|reason| ConfigError::Value {
            key: "mode".into(),
            value: mode_text.clone(),
            reason,
        })?;
        let dt: f64 = kv.get("dt")?.ok_or(ConfigError::Missing("dt"))?;
        let steps: usize = kv.get_or("steps", 0)?;

        let mut regions = Vec::new();
        for name in kv.sections("materials.region.") {
            let key = |field: &str| format!("materials.region.{name}.{field}");
            regions.push(Region {
                faces: kv.list(&key("faces"))?.unwrap_or_default(),
                eps: kv.get(&key("eps"))?,
                mu: kv.get(&key("mu"))?,
                sigma: kv.get(&key("sigma"))?,
                sigma_m: kv.get(&key("sigma_m"))?,
                name,
            });
        }
        let materials = MaterialSpec {
            eps: kv.get_or("materials.eps", 1.0)?,
            mu: kv.get_or("materials.mu", 1.0)?,
            sigma: kv.get_or("materials.sigma", 0.0)?,
            sigma_m: kv.get_or("materials.sigma_m", 0.0)?,
            regions,
        };

        let kind = match kv.take("source.kind").as_deref() {
            None | Some("none") => SourceKind::None,
            Some("gaussian") => SourceKind::GaussianPulse,
            Some(other) => {
                return Err(ConfigError::Value {
                    key: "source.kind".into(),
                    value: other.into(),
                    reason: "expected `none` or `gaussian`".into(),
                })
            }
        };
        let current = match kv.take("source.current").as_deref() {
            None | Some("magnetic") => Current::Magnetic,
            Some("electric") => Current::Electric,
            Some(other) => {
                return Err(ConfigError::Value {
                    key: "source.current".into(),
                    value: other.into(),
                    reason: "expected `electric` or `magnetic`".into(),
                })
            }
        };
        let source = SourceSpec {
            kind,
            current,
            amplitude: kv.get_or("source.amplitude", 1.0)?,
            t0: kv.get_or("source.t0", 0.0)?,
            width: kv.get_or("source.width", 1.0)?,
            support: kv.list("source.support")?.unwrap_or_default(),
        };

        let initial = match kv.take("initial.kind").as_deref() {
            None | Some("zero") => InitialCondition::Zero,
            Some("gaussian") => {
                let center: Vec<f64> = kv.list("initial.center")?.unwrap_or_else(|| vec![0.0; 3]);
                let center: [f64; 3] = center
                    .try_into()
                    .map_err(|_| invalid("initial.center needs three coordinates"))?;
                InitialCondition::Gaussian {
                    amplitude: kv.get_or("initial.amplitude", 1.0)?,
                    center,
                    width: kv.get_or("initial.width", 1.0)?,
                }
            }
            Some(other) => {
                return Err(ConfigError::Value {
                    key: "initial.kind".into(),
                    value: other.into(),
                    reason: "expected `zero` or `gaussian`".into(),
                })
            }
        };

        let probes_e = kv.list("probes.e")?.unwrap_or_default();
        let probes_h = kv.list("probes.h")?.unwrap_or_default();

        let formats: Vec<String> = kv.list("output.formats")?.unwrap_or_else(|| vec!["vtk".into(), "csv".into()]);
        for f in &formats {
            if f != "vtk" && f != "csv" {
                return Err(ConfigError::Value {
                    key: "output.formats".into(),
                    value: f.clone(),
                    reason: "expected `vtk` and/or `csv`".into(),
                });
            }
        }
        let output = OutputSpec {
            dir: resolve(kv.take("output.dir").unwrap_or_else(|| "output".into())),
            cadence: kv.get_or("output.cadence", 1)?,
            vtk: formats.iter().any(|f| f == "vtk"),
            csv: formats.iter().any(|f| f == "csv"),
        };

        let tolerance = kv.get_or("solver.tolerance", 1e-10)?;
        let max_iters = kv.get("solver.max_iters")?;
        let solver = match kv.take("solver.kind").as_deref() {
            None | Some("iterative") => LinearSolver::Iterative { tolerance, max_iters },
            Some("direct") => LinearSolver::Direct,
            Some(other) => {
                return Err(ConfigError::Value {
                    key: "solver.kind".into(),
                    value: other.into(),
                    reason: "expected `iterative` or `direct`".into(),
                })
            }
        };
        let boundary = match kv.take("boundary").as_deref() {
            None | Some("pec") => Boundary::Pec,
            Some("natural") => Boundary::Natural,
            Some(other) => {
                return Err(ConfigError::Value {
                    key: "boundary".into(),
                    value: other.into(),
                    reason: "expected `pec` or `natural`".into(),
                })
            }
        };

        let stability = StabilitySpec {
            dt_factors: kv.list("stability.dt_factors")?.unwrap_or_else(|| vec![1e-3, 1.0, 1e3]),
            k_samples: kv.get_or("stability.k_samples", 64)?,
            empirical_steps: kv.get_or("stability.empirical_steps", 200)?,
        };

        let convergence = match kv.list::<String>("convergence.meshes")? {
            None => None,
            Some(meshes) => Some(ConvergenceSpec {
                meshes: meshes.into_iter().map(resolve).collect(),
                final_time: kv.get_or("convergence.final_time", 0.5)?,
                dt_per_h: kv.get_or("convergence.dt_per_h", 0.25)?,
                temporal_dts: kv
                    .list("convergence.temporal_dts")?
                    .unwrap_or_else(|| vec![0.02, 0.01, 0.005]),
                m: kv.get_or("convergence.m", 1)?,
                n: kv.get_or("convergence.n", 1)?,
            }),
        };

        let config = Self {
            mesh_path,
            mode,
            dt,
            steps,
            materials,
            source,
            initial,
            probes_e,
            probes_h,
            output,
            solver,
            boundary,
            allow_non_well_centered: kv.get_or("allow_non_well_centered", false)?,
            allow_indefinite: kv.get_or("allow_indefinite", false)?,
            jm_sign: kv.get_or("jm_sign", 1.0)?,
            stability,
            convergence,
        };
        kv.finish()?;
        config.validate()?;
        Ok(config)
    }

    /// Mesh-independent checks.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("dt must be positive and finite, got {}", self.dt)));
        }
        if self.output.cadence == 0 {
            return Err(invalid("output.cadence must be at least 1"));
        }
        if self.jm_sign != 1.0 && self.jm_sign != -1.0 {
            return Err(invalid(format!("jm_sign must be 1 or -1, got {}", self.jm_sign)));
        }
        if let LinearSolver::Iterative { tolerance, max_iters } = self.solver {
            if !(tolerance > 0.0) {
                return Err(invalid("solver.tolerance must be positive"));
            }
            if max_iters == Some(0) {
                return Err(invalid("solver.max_iters must be at least 1"));
            }
        }
        if let InitialCondition::Gaussian { width, .. } = self.initial {
            if !(width > 0.0) {
                return Err(invalid("initial.width must be positive"));
            }
        }
        if self.stability.k_samples == 0 || self.stability.dt_factors.iter().any(|&f| !(f >= 0.0 && f.is_finite())) {
            return Err(invalid("stability needs k_samples >= 1 and finite non-negative dt_factors"));
        }
        Ok(())
    }

    /// Index checks against the loaded mesh.
    pub fn validate_against(&self, surface: &SimplicialSurface) -> Result<(), ConfigError> {
        let (ne, nf) = (surface.n_edges(), surface.n_faces());
        let (e_count, e_what, h_count, h_what) = match self.mode {
            Mode::Te => (ne, "edge", nf, "face"),
            Mode::Tm => (nf, "face", ne, "edge"),
        };
        let check = |indices: &[usize], count: usize, what: &str, key: &str| {
            match indices.iter().find(|&&i| i >= count) {
                Some(bad) => Err(invalid(format!(
                    "{key}: {what} index {bad} out of range (mesh has {count} {what}s)"
                ))),
                None => Ok(()),
            }
        };
        check(&self.probes_e, e_count, e_what, "probes.e")?;
        check(&self.probes_h, h_count, h_what, "probes.h")?;
        for r in &self.materials.regions {
            check(&r.faces, nf, "face", &format!("materials.region.{}.faces", r.name))?;
        }
        if self.source.kind != SourceKind::None {
            let (count, what) = if self.source.on_edges(self.mode) {
                (ne, "edge")
            } else {
                (nf, "face")
            };
            check(&self.source.support, count, what, "source.support")?;
        }
        Ok(())
    }
}
