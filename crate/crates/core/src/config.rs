//! Experiment configuration: one JSON file names the surface chart, the
//! six generator curves, the sample to evaluate, the tolerances for every
//! verdict, and where the report goes.
//!
//! ```json
//! {
//!   "surface": "sphere:1",
//!   "generators": "cheeger-gromoll",
//!   "sample": {
//!     "base_points": [[1.0, 0.5], [0.4, 1.1]],
//!     "fiber_directions": [[1.0, 0.0], [0.3, -0.7]],
//!     "t_values": [0.0, 1.0, 4.0]
//!   },
//!   "tolerances": { "identity": 1e-7 },
//!   "outputs": { "format": "csv", "path": "report.csv" }
//! }
//! ```
//!
//! `surface` is a preset name (`flat`, `hyperbolic`, `sphere:<radius>`) or
//! an inline chart `{name, dim, components, mins, maxs}` whose components
//! are metric expressions in the chart coordinates. `generators` is a
//! preset name (`sasaki`, `cheeger-gromoll`) or an inline set of six
//! curves. Unknown fields and unknown tolerance names are rejected so a
//! typo cannot silently run with defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::chart::MetricChart;
use crate::error::{GnatError, Result};
use crate::expr::Expr;
use crate::generators::{self, GeneratorSet};

/// Default residual tolerance for structural identities.
pub const DEFAULT_TOL_IDENTITY: f64 = 1e-7;
/// Default tolerance for spectrum multiset comparisons.
pub const DEFAULT_TOL_SPECTRUM: f64 = 1e-6;
/// Default tolerance for the direction-independence spread.
pub const DEFAULT_TOL_OSSERMAN: f64 = 1e-5;

/// Inline chart description.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSurface {
    pub name: String,
    pub dim: usize,
    /// Upper triangle of the metric, row-major: `g11, g12, g22` for a
    /// surface.
    pub components: Vec<Expr>,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

/// Surface chart: preset name or inline expression table.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SurfaceSpec {
    Preset(String),
    Custom(CustomSurface),
}

/// Generator curves: preset name or the six curves spelled out.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSpec {
    Preset(String),
    Custom(Box<GeneratorSet>),
}

/// The evaluation sample: every command draws its points from here.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub base_points: Vec<Vec<f64>>,
    pub fiber_directions: Vec<Vec<f64>>,
    pub t_values: Vec<f64>,
}

/// Report destination; `--out` and `--format` override it.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Grid for the metric classification scan.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_classify_samples")]
    pub samples: usize,
}

fn default_t_max() -> f64 {
    generators::DEFAULT_T_MAX
}

fn default_classify_samples() -> usize {
    generators::DEFAULT_CLASSIFY_SAMPLES
}

impl Default for ClassifySpec {
    fn default() -> Self {
        ClassifySpec {
            t_max: default_t_max(),
            samples: default_classify_samples(),
        }
    }
}

/// Direction budget for the direction-independence scan.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OssermanSpec {
    #[serde(default = "default_directions")]
    pub directions: usize,
}

fn default_directions() -> usize {
    crate::osserman::DEFAULT_DIRECTIONS
}

impl Default for OssermanSpec {
    fn default() -> Self {
        OssermanSpec {
            directions: default_directions(),
        }
    }
}

/// The raw configuration file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub surface: SurfaceSpec,
    pub generators: GeneratorSpec,
    pub sample: SampleSpec,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub outputs: Option<OutputSpec>,
    #[serde(default)]
    pub classify: Option<ClassifySpec>,
    #[serde(default)]
    pub osserman: Option<OssermanSpec>,
}

/// Tolerances with defaults filled in; `map` is what reports echo.
#[derive(Clone, Debug)]
pub struct Tolerances {
    pub identity: f64,
    pub spectrum: f64,
    pub osserman: f64,
    pub map: BTreeMap<String, f64>,
}

/// A validated configuration with presets resolved and the sample put
/// into its deterministic report order (points lexicographic, t
/// ascending; directions keep their index order).
#[derive(Clone, Debug)]
pub struct ResolvedConfig {
    pub chart: MetricChart,
    pub generators: GeneratorSet,
    pub base_points: Vec<Vec<f64>>,
    pub fiber_directions: Vec<Vec<f64>>,
    pub t_values: Vec<f64>,
    pub tolerances: Tolerances,
    pub outputs: Option<OutputSpec>,
    pub classify: ClassifySpec,
    pub osserman: OssermanSpec,
}

impl ExperimentConfig {
    /// Parses a configuration file. Any failure here is a configuration
    /// error: the caller must not have produced output yet.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            GnatError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| GnatError::Config(format!("{}: {e}", path.display())))
    }

    /// Resolves presets and validates every invariant the commands rely
    /// on. Errors are configuration errors.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let chart = match &self.surface {
            SurfaceSpec::Preset(name) => MetricChart::from_preset(name)?,
            SurfaceSpec::Custom(c) => MetricChart::custom(
                &c.name,
                c.dim,
                c.components.clone(),
                c.mins.clone(),
                c.maxs.clone(),
            )?,
        };
        let generators = match &self.generators {
            GeneratorSpec::Preset(name) => GeneratorSet::from_preset(name)?,
            GeneratorSpec::Custom(set) => (**set).clone(),
        };

        let m = chart.dim();
        if self.sample.base_points.is_empty() {
            return Err(GnatError::Config("sample.base_points is empty".into()));
        }
        if self.sample.fiber_directions.is_empty() {
            return Err(GnatError::Config("sample.fiber_directions is empty".into()));
        }
        if self.sample.t_values.is_empty() {
            return Err(GnatError::Config("sample.t_values is empty".into()));
        }
        for (what, list) in [
            ("base point", &self.sample.base_points),
            ("fiber direction", &self.sample.fiber_directions),
        ] {
            for v in list.iter() {
                if v.len() != m {
                    return Err(GnatError::Config(format!(
                        "{what} {v:?} has {} coordinates, chart {} has dimension {m}",
                        v.len(),
                        chart.name()
                    )));
                }
                if v.iter().any(|c| !c.is_finite()) {
                    return Err(GnatError::Config(format!("{what} {v:?} is not finite")));
                }
            }
        }
        for d in &self.sample.fiber_directions {
            if d.iter().all(|c| *c == 0.0) {
                return Err(GnatError::Config(
                    "fiber_directions contains the zero vector".into(),
                ));
            }
        }
        for &t in &self.sample.t_values {
            if !t.is_finite() || t < 0.0 {
                return Err(GnatError::Config(format!(
                    "t value {t} is not a finite nonnegative number"
                )));
            }
        }

        let mut map = BTreeMap::new();
        map.insert("identity".to_string(), DEFAULT_TOL_IDENTITY);
        map.insert("spectrum".to_string(), DEFAULT_TOL_SPECTRUM);
        map.insert("osserman".to_string(), DEFAULT_TOL_OSSERMAN);
        for (k, v) in &self.tolerances {
            if !map.contains_key(k) {
                return Err(GnatError::Config(format!(
                    "unknown tolerance {k:?}; known: identity, spectrum, osserman"
                )));
            }
            if !(v.is_finite() && *v > 0.0) {
                return Err(GnatError::Config(format!(
                    "tolerance {k:?} must be a positive number, got {v}"
                )));
            }
            map.insert(k.clone(), *v);
        }
        let tolerances = Tolerances {
            identity: map["identity"],
            spectrum: map["spectrum"],
            osserman: map["osserman"],
            map,
        };

        let classify = self.classify.clone().unwrap_or_default();
        if !(classify.t_max > 0.0 && classify.t_max.is_finite()) {
            return Err(GnatError::Config(format!(
                "classify.t_max must be positive, got {}",
                classify.t_max
            )));
        }
        if classify.samples < 2 {
            return Err(GnatError::Config(
                "classify.samples must be at least 2".into(),
            ));
        }
        let osserman = self.osserman.clone().unwrap_or_default();
        if osserman.directions == 0 {
            return Err(GnatError::Config(
                "osserman.directions must be positive".into(),
            ));
        }

        let mut base_points = self.sample.base_points.clone();
        base_points.sort_by(|a, b| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.partial_cmp(y).expect("finite coordinates"))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for x in &base_points {
            if !chart.contains(x) {
                return Err(GnatError::Config(format!(
                    "base point {x:?} is outside the domain of chart {}",
                    chart.name()
                )));
            }
        }
        let mut t_values = self.sample.t_values.clone();
        t_values.sort_by(|a, b| a.partial_cmp(b).expect("finite t values"));

        Ok(ResolvedConfig {
            chart,
            generators,
            base_points,
            fiber_directions: self.sample.fiber_directions.clone(),
            t_values,
            tolerances,
            outputs: self.outputs.clone(),
            classify,
            osserman,
        })
    }
}
