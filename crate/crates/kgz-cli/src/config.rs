//! TOML run configuration: strict schema (unknown keys rejected), flag
//! overrides, and per-command accessors that turn sections into validated
//! domain objects with field-precise diagnostics.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use kgz::evolve::Scheme;
use kgz::modulation::FitOptions;
use kgz::soliton::{SolitonSpec, SystemParams};
use kgz::Grid;
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Eigenpairs reported per operator when no `[spectrum]` section is given.
const DEFAULT_SPECTRUM_COUNT: usize = 6;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: Option<SystemSection>,
    #[serde(default)]
    pub solitons: Vec<SolitonSection>,
    pub grid: Option<GridSection>,
    pub time: Option<TimeSection>,
    pub output: Option<OutputSection>,
    pub construction: Option<ConstructionSection>,
    pub spectrum: Option<SpectrumSection>,
    pub modulation: Option<ModulationSection>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonSection {
    pub omega: f64,
    pub c: f64,
    pub x0: f64,
    pub gamma0: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub length: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t0: f64,
    /// Target time; optional because `construct` derives its targets from
    /// `construction.tn_list`.
    pub t1: Option<f64>,
    pub dt: f64,
    pub scheme: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    #[serde(default = "default_stride")]
    pub stride: u64,
}

fn default_stride() -> u64 {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionSection {
    pub tn_list: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub count: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSection {
    pub tol: f64,
    pub max_iter: usize,
}

/// Command-line values that take precedence over the config document.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub n: Option<usize>,
    pub length: Option<f64>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub dt: Option<f64>,
    pub scheme: Option<String>,
    pub dir: Option<PathBuf>,
    pub stride: Option<u64>,
    pub count: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

/// Fully validated `[time]` section.
#[derive(Clone, Copy, Debug)]
pub struct TimeSpec {
    pub t0: f64,
    pub t1: Option<f64>,
    pub dt: f64,
    pub scheme: Scheme,
}

impl TimeSpec {
    pub fn require_t1(&self) -> Result<f64> {
        self.t1
            .ok_or_else(|| CliError::Config("time.t1: required for this command".into()))
    }

    /// Reject a step pointing away from the integration target.
    pub fn check_direction(&self, t1: f64) -> Result<()> {
        if t1 != self.t0 && (t1 - self.t0) * self.dt <= 0.0 {
            return Err(CliError::Config(format!(
                "time.dt: sign of {} does not match the direction {} -> {t1}",
                self.dt, self.t0
            )));
        }
        Ok(())
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Layer command-line overrides on top of the document. Overriding a
    /// field of a section the document omits is an error, except where the
    /// section can be constructed outright (`output`, `system`, `spectrum`,
    /// `modulation` have complete defaults).
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if o.alpha.is_some() || o.beta.is_some() {
            let section = self.system.get_or_insert(SystemSection {
                alpha: 1.0,
                beta: 0.0,
            });
            if let Some(v) = o.alpha {
                section.alpha = v;
            }
            if let Some(v) = o.beta {
                section.beta = v;
            }
        }
        if o.n.is_some() || o.length.is_some() {
            let section = require_section(&mut self.grid, "grid")?;
            if let Some(v) = o.n {
                section.n = v;
            }
            if let Some(v) = o.length {
                section.length = v;
            }
        }
        if o.t0.is_some() || o.t1.is_some() || o.dt.is_some() || o.scheme.is_some() {
            let section = require_section(&mut self.time, "time")?;
            if let Some(v) = o.t0 {
                section.t0 = v;
            }
            if let Some(v) = o.t1 {
                section.t1 = Some(v);
            }
            if let Some(v) = o.dt {
                section.dt = v;
            }
            if let Some(v) = &o.scheme {
                section.scheme = v.clone();
            }
        }
        if let Some(dir) = &o.dir {
            match &mut self.output {
                Some(section) => section.dir = dir.clone(),
                None => {
                    self.output = Some(OutputSection {
                        dir: dir.clone(),
                        stride: default_stride(),
                    })
                }
            }
        }
        if let Some(stride) = o.stride {
            require_section(&mut self.output, "output")?.stride = stride;
        }
        if let Some(count) = o.count {
            self.spectrum = Some(SpectrumSection { count });
        }
        if o.tol.is_some() || o.max_iter.is_some() {
            let defaults = FitOptions::default();
            let section = self.modulation.get_or_insert(ModulationSection {
                tol: defaults.tol,
                max_iter: defaults.max_iter,
            });
            if let Some(v) = o.tol {
                section.tol = v;
            }
            if let Some(v) = o.max_iter {
                section.max_iter = v;
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<SystemParams> {
        let params = match &self.system {
            Some(s) => SystemParams {
                alpha: s.alpha,
                beta: s.beta,
            },
            None => SystemParams::default(),
        };
        if !(params.alpha.is_finite() && params.beta.is_finite()) {
            return Err(CliError::Config(format!(
                "system: alpha and beta must be finite, got ({}, {})",
                params.alpha, params.beta
            )));
        }
        Ok(params)
    }

    /// All solitons, each checked against the admissibility cone.
    pub fn specs(&self) -> Result<Vec<SolitonSpec>> {
        let params = self.params()?;
        let mut specs = Vec::with_capacity(self.solitons.len());
        for (j, s) in self.solitons.iter().enumerate() {
            let spec = SolitonSpec::new(s.omega, s.c, s.x0, s.gamma0);
            spec.admissible(&params)
                .map_err(|e| CliError::Config(format!("solitons[{j}]: {e}")))?;
            specs.push(spec);
        }
        Ok(specs)
    }

    pub fn nonempty_specs(&self) -> Result<Vec<SolitonSpec>> {
        let specs = self.specs()?;
        if specs.is_empty() {
            return Err(CliError::Config(
                "solitons: at least one [[solitons]] entry required".into(),
            ));
        }
        Ok(specs)
    }

    pub fn build_grid(&self) -> Result<Grid> {
        let section = self
            .grid
            .as_ref()
            .ok_or_else(|| CliError::Config("grid: section required".into()))?;
        Grid::new(section.n, section.length)
            .map_err(|e| CliError::Config(format!("grid: {e}")))
    }

    pub fn time_spec(&self) -> Result<TimeSpec> {
        let section = self
            .time
            .as_ref()
            .ok_or_else(|| CliError::Config("time: section required".into()))?;
        if !section.t0.is_finite() {
            return Err(CliError::Config(format!(
                "time.t0: must be finite, got {}",
                section.t0
            )));
        }
        if let Some(t1) = section.t1 {
            if !t1.is_finite() {
                return Err(CliError::Config(format!("time.t1: must be finite, got {t1}")));
            }
        }
        if !section.dt.is_finite() || section.dt == 0.0 {
            return Err(CliError::Config(format!(
                "time.dt: must be finite and nonzero, got {}",
                section.dt
            )));
        }
        let scheme = Scheme::from_str(&section.scheme)
            .map_err(|e| CliError::Config(format!("time.scheme: {e}")))?;
        Ok(TimeSpec {
            t0: section.t0,
            t1: section.t1,
            dt: section.dt,
            scheme,
        })
    }

    pub fn output_spec(&self) -> Result<(PathBuf, u64)> {
        let section = self.output.as_ref().ok_or_else(|| {
            CliError::Config("output: section required (or pass --out)".into())
        })?;
        if section.stride == 0 {
            return Err(CliError::Config("output.stride: must be >= 1".into()));
        }
        Ok((section.dir.clone(), section.stride))
    }

    pub fn fit_options(&self) -> Result<FitOptions> {
        let mut opts = FitOptions::default();
        if let Some(section) = &self.modulation {
            if !(section.tol.is_finite() && section.tol > 0.0) {
                return Err(CliError::Config(format!(
                    "modulation.tol: must be positive, got {}",
                    section.tol
                )));
            }
            if section.max_iter == 0 {
                return Err(CliError::Config("modulation.max_iter: must be >= 1".into()));
            }
            opts.tol = section.tol;
            opts.max_iter = section.max_iter;
        }
        Ok(opts)
    }

    pub fn spectrum_count(&self) -> Result<usize> {
        match &self.spectrum {
            Some(section) if section.count == 0 => {
                Err(CliError::Config("spectrum.count: must be >= 1".into()))
            }
            Some(section) => Ok(section.count),
            None => Ok(DEFAULT_SPECTRUM_COUNT),
        }
    }

    pub fn tn_list(&self) -> Result<Vec<f64>> {
        let section = self
            .construction
            .as_ref()
            .ok_or_else(|| CliError::Config("construction: section required".into()))?;
        if section.tn_list.is_empty() {
            return Err(CliError::Config(
                "construction.tn_list: must not be empty".into(),
            ));
        }
        Ok(section.tn_list.clone())
    }
}

fn require_section<'a, T>(section: &'a mut Option<T>, name: &str) -> Result<&'a mut T> {
    section.as_mut().ok_or_else(|| {
        CliError::Config(format!(
            "cannot override [{name}] fields: the config has no [{name}] section"
        ))
    })
}
