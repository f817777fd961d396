//! Job configuration: a JSON document plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sphkern::{CoeffOptions, FitRange, Generator, Kernel, Route, Truncation, WeightMode};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Target tail mass for `"auto"` truncation.
    pub tail_tol: f64,
    /// Panel-doubling tolerance of the quadrature oracle.
    pub quad_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let c = CoeffOptions::default();
        Self {
            tail_tol: c.tail_target,
            quad_tol: c.quad.tol,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// The on-disk job description. Every key is optional here; what a command
/// needs is checked when the job is resolved.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub kernel: Option<Kernel>,
    pub dim: Option<usize>,
    pub truncation: Option<Truncation>,
    pub route: Option<Route>,
    pub tolerances: Option<Tolerances>,
    pub fit_range: Option<FitRange>,
    pub n_grid: Option<Vec<usize>>,
    pub generator: Option<Generator>,
    pub seed: Option<u64>,
    pub weights: Option<WeightMode>,
    /// Evaluation angles for `eval`.
    pub theta: Option<Vec<f64>>,
    /// Rule files for `cubature`: one gives its worst-case error, two their
    /// discrepancy.
    pub rules: Option<Vec<PathBuf>>,
    /// Coefficient table checked by `validate` in place of a fresh one.
    pub coefficients: Option<PathBuf>,
    pub output: Option<OutputSpec>,
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let mut cfg: JobConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        // relative file references are taken from the config's directory
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.rules.iter_mut().flatten().for_each(rebase);
        cfg.coefficients.iter_mut().for_each(rebase);
        Ok(cfg)
    }
}

/// Flags that override config keys.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub kernel: Option<String>,
    pub dim: Option<usize>,
    pub truncation: Option<Truncation>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub route: Option<Route>,
}

/// A validated job.
#[derive(Debug, Clone)]
pub struct Job {
    pub kernel: Kernel,
    pub dim: usize,
    pub truncation: Truncation,
    pub route: Route,
    pub coeff_opts: CoeffOptions,
    pub fit_range: Option<FitRange>,
    pub n_grid: Option<Vec<usize>>,
    pub generator: Generator,
    pub weights: WeightMode,
    pub theta: Option<Vec<f64>>,
    pub rules: Vec<PathBuf>,
    pub coefficients: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Job {
    pub fn resolve(cfg: JobConfig, ov: Overrides) -> Result<Self, CliError> {
        let kernel = match ov.kernel {
            Some(s) => parse_kernel(&s)?,
            None => cfg
                .kernel
                .ok_or_else(|| CliError::config("no kernel given (config key or --kernel)"))?,
        };
        kernel.validate().map_err(CliError::config)?;
        let dim = ov
            .dim
            .or(cfg.dim)
            .ok_or_else(|| CliError::config("no sphere dimension given (config key or --dim)"))?;
        if dim == 0 {
            return Err(CliError::config("dim must be at least 1"));
        }
        kernel.check_dimension(dim).map_err(CliError::config)?;

        let tol = cfg.tolerances.unwrap_or_default();
        for (name, v) in [("tail_tol", tol.tail_tol), ("quad_tol", tol.quad_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(CliError::config(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        let mut coeff_opts = CoeffOptions {
            tail_target: tol.tail_tol,
            ..Default::default()
        };
        coeff_opts.quad.tol = tol.quad_tol;

        if let Some(r) = cfg.fit_range {
            if r.lo < 1 || r.lo >= r.hi {
                return Err(CliError::config(format!(
                    "fit_range [{}, {}] needs 1 <= lo < hi",
                    r.lo, r.hi
                )));
            }
        }
        if let Some(g) = &cfg.n_grid {
            if g.is_empty() || g.contains(&0) {
                return Err(CliError::config("n_grid needs positive sizes"));
            }
        }
        if let Some(t) = &cfg.theta {
            if let Some(bad) = t
                .iter()
                .find(|t| !(0.0..=std::f64::consts::PI).contains(*t))
            {
                return Err(CliError::config(format!("theta = {bad} is outside [0, π]")));
            }
        }

        let seed = ov.seed.or(cfg.seed);
        let generator = match cfg.generator {
            Some(Generator::UniformRandom { seed: s }) => Generator::UniformRandom {
                seed: seed.unwrap_or(s),
            },
            Some(g) => g,
            None => Generator::UniformRandom {
                seed: seed.unwrap_or(0),
            },
        };
        if generator == Generator::Fibonacci && dim != 2 {
            return Err(CliError::config("the fibonacci generator needs dim = 2"));
        }

        let output = cfg.output.unwrap_or_default();
        Ok(Self {
            kernel,
            dim,
            truncation: ov.truncation.or(cfg.truncation).unwrap_or(Truncation::Auto),
            route: ov.route.or(cfg.route).unwrap_or(Route::Closed),
            coeff_opts,
            fit_range: cfg.fit_range,
            n_grid: cfg.n_grid,
            generator,
            weights: cfg.weights.unwrap_or(WeightMode::Optimal),
            theta: cfg.theta,
            rules: cfg.rules.unwrap_or_default(),
            coefficients: cfg.coefficients,
            out: ov.out.or(output.path),
            format: ov.format.or(output.format),
        })
    }

    /// Explicit format, else from the output extension, else `fallback`.
    pub fn format_or(&self, fallback: Format) -> Format {
        self.format
            .or_else(|| match self.out.as_ref()?.extension()?.to_str()? {
                "json" => Some(Format::Json),
                "csv" => Some(Format::Csv),
                _ => None,
            })
            .unwrap_or(fallback)
    }
}

/// `--kernel` accepts inline JSON or `family:key=value,…`; list values are
/// separated by `;`, e.g. `custom:cos_power=0.5;0.5`.
pub fn parse_kernel(s: &str) -> Result<Kernel, CliError> {
    let s = s.trim();
    let value = if s.starts_with('{') {
        serde_json::from_str(s).map_err(|e| CliError::config(format!("--kernel: {e}")))?
    } else {
        let (family, params) = s.split_once(':').unwrap_or((s, ""));
        let mut obj = Map::new();
        obj.insert("family".into(), Value::String(family.trim().into()));
        for kv in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                CliError::config(format!("--kernel: expected key=value, got {kv:?}"))
            })?;
            let num = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::config(format!("--kernel: bad number {x:?}")))
            };
            let v = if v.contains(';') {
                Value::from(v.split(';').map(num).collect::<Result<Vec<_>, _>>()?)
            } else if k.trim() == "cos_power" {
                Value::from(vec![num(v)?])
            } else {
                Value::from(num(v)?)
            };
            obj.insert(k.trim().into(), v);
        }
        Value::Object(obj)
    };
    serde_json::from_value(value).map_err(|e| CliError::config(format!("--kernel: {e}")))
}
