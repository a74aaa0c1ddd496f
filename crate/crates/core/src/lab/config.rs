//! Strict experiment configuration.
//!
//! Every section and field has a default; unknown keys are rejected. The
//! document must declare `schema = 1`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::irregularity::{default_gamma_grid, DEFAULT_Q_RANGE};
use crate::simulate::{GaussianKind, GaussianModel, ProcessModel, StableModel, StableSpectral};

use super::prevalence::ShiftSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Phi,
    Irregularity,
    Average,
    Ode,
    Geometry,
    Prevalence,
    Moments,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Phi => "phi",
            ExperimentKind::Irregularity => "irregularity",
            ExperimentKind::Average => "average",
            ExperimentKind::Ode => "ode",
            ExperimentKind::Geometry => "geometry",
            ExperimentKind::Prevalence => "prevalence",
            ExperimentKind::Moments => "moments",
        }
    }
}

/// The driving process. Default: one-dimensional Brownian motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Gaussian {
        dim: usize,
        process: GaussianKind,
    },
    Stable {
        process: StableSpectral,
    },
    /// `w ≡ 0`.
    Zero {
        dim: usize,
    },
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Gaussian { dim: 1, process: GaussianKind::Brownian }
    }
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Gaussian { dim, .. } | ModelSpec::Zero { dim } => *dim,
            ModelSpec::Stable { process } => StableModel { spectral: process.clone() }.dim(),
        }
    }

    /// `None` for the zero model.
    pub fn process(&self) -> Option<ProcessModel> {
        match self {
            ModelSpec::Gaussian { dim, process } => {
                Some(ProcessModel::Gaussian(GaussianModel::new(*dim, process.clone())))
            }
            ModelSpec::Stable { process } => Some(ProcessModel::Stable(StableModel { spectral: process.clone() })),
            ModelSpec::Zero { .. } => None,
        }
    }
}

/// Time grid, interval family and frequency set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Steps; default 4096.
    pub n: usize,
    /// `T`; default 1.
    pub horizon: f64,
    /// Dyadic levels `L`; default 8.
    pub levels: usize,
    /// Smallest shell `q_min`; default 1.
    pub q_min: f64,
    /// Shells `q_j = q_min 2^{j/2}`, `j = 0..=J`; default `J = 18`.
    pub j_max: usize,
    /// Random unit directions added to the standard set; default 0.
    pub extra_directions: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n: 4096, horizon: 1.0, levels: 8, q_min: 1.0, j_max: 18, extra_directions: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSpec {
    /// Default `0.5, 0.55, .., 0.95`.
    pub gammas: Vec<f64>,
    /// Shell range of the fits; default `[8, 512]`.
    pub q_range: [f64; 2],
    /// Interpolation exponents checked against the best fit; default `[0.25, 0.5, 0.75]`.
    pub thetas: Vec<f64>,
}

impl Default for EstimatorSpec {
    fn default() -> Self {
        EstimatorSpec {
            gammas: default_gamma_grid(),
            q_range: [DEFAULT_Q_RANGE.0, DEFAULT_Q_RANGE.1],
            thetas: vec![0.25, 0.5, 0.75],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSpec {
    /// Sample count `M`; default 1.
    pub samples: usize,
    /// Root seed; default 0. Overridden by `--seed`.
    pub seed: u64,
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec { samples: 1, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatChoice {
    Csv,
    Json,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Default `out`.
    pub dir: PathBuf,
    /// Default `both`.
    pub format: FormatChoice,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("out"), format: FormatChoice::Both }
    }
}

/// A path file to analyse instead of simulating one.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSpec {
    /// CSV (`.csv`) or the binary path format (anything else).
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub xi: Vec<f64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Spectral,
    Grid,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AverageSpec {
    /// Half of a real drift: each term is completed with its conjugate at
    /// `-ξ`. Default: `cos(4x)` in the model dimension.
    pub terms: Vec<TermSpec>,
    /// Node indices; default `0` and `n`.
    pub s: Option<usize>,
    pub t: Option<usize>,
    /// Default `both`.
    pub route: Route,
    /// Odd vertex count of the density grid; default 65.
    pub grid_m: usize,
}

impl Default for AverageSpec {
    fn default() -> Self {
        AverageSpec { terms: Vec::new(), s: None, t: None, route: Route::Both, grid_m: 65 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeSpec {
    /// Regularity `α` of the random drift; default -0.5.
    pub alpha: f64,
    /// Modes in the half-spectrum of each component; default 12.
    pub half_modes: usize,
    /// Default the origin.
    pub x0: Vec<f64>,
    /// Scheme takes `2^level` steps; default `log2 n`.
    pub level: Option<usize>,
    /// Default `[1e-6, 1e-8]`.
    pub epsilons: Vec<f64>,
}

impl Default for OdeSpec {
    fn default() -> Self {
        OdeSpec { alpha: -0.5, half_modes: 12, x0: Vec::new(), level: None, epsilons: vec![1e-6, 1e-8] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySpec {
    /// Scales `ε`; default `2^{-6}, .., 2^{-10}`.
    pub eps: Vec<f64>,
    /// Hölder exponent `δ`; default 0.75.
    pub delta: f64,
    /// Hölder constant `M`; default 1.
    pub holder_constant: f64,
    /// Evenly spaced interior centers; default 8.
    pub centers: usize,
    /// Roughness exponent `θ`; default 0.5.
    pub theta: f64,
    /// Default `[1.5, 3]`.
    pub p: Vec<f64>,
    /// Default 4096.
    pub max_nodes: usize,
    /// Box-counting levels; default 8.
    pub box_levels: usize,
    /// Energy grid vertices for the Fourier-dimension companion; default 33.
    pub energy_bins: Option<usize>,
    /// Radii of the occupation window; default `2^{-2}, .., 2^{-8}`.
    pub radii: Vec<f64>,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        GeometrySpec {
            eps: (6..=10).map(|k| 0.5f64.powi(k)).collect(),
            delta: 0.75,
            holder_constant: 1.0,
            centers: 8,
            theta: 0.5,
            p: vec![1.5, 3.0],
            max_nodes: crate::geometry::DEFAULT_MAX_NODES,
            box_levels: 8,
            energy_bins: Some(33),
            radii: (2..=8).map(|k| 0.5f64.powi(k)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrevalenceSpec {
    /// Default: zero, a cubic polynomial and a 12-mode Weierstrass sum.
    pub shifts: Vec<ShiftSpec>,
    /// Slack below `(2H)^{-1}`; default 0.25.
    pub margin: f64,
}

impl Default for PrevalenceSpec {
    fn default() -> Self {
        PrevalenceSpec { shifts: ShiftSpec::library(), margin: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsSpec {
    /// `n_m`; default 1.
    pub order: u32,
    /// Default 0 and `T`.
    pub s: Option<f64>,
    pub t: Option<f64>,
}

impl Default for MomentsSpec {
    fn default() -> Self {
        MomentsSpec { order: 1, s: None, t: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub mc: McSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub input: InputSpec,
    #[serde(default)]
    pub average: AverageSpec,
    #[serde(default)]
    pub ode: OdeSpec,
    #[serde(default)]
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub prevalence: PrevalenceSpec,
    #[serde(default)]
    pub moments: MomentsSpec,
}

impl ExperimentConfig {
    /// Defaults for every section.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            schema: SCHEMA_VERSION,
            kind,
            model: ModelSpec::default(),
            grid: GridSpec::default(),
            estimator: EstimatorSpec::default(),
            mc: McSpec::default(),
            output: OutputSpec::default(),
            input: InputSpec::default(),
            average: AverageSpec::default(),
            ode: OdeSpec::default(),
            geometry: GeometrySpec::default(),
            prevalence: PrevalenceSpec::default(),
            moments: MomentsSpec::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Input(format!("config: {msg}")));
        if self.schema != SCHEMA_VERSION {
            return bad(format!("schema = {} is not supported (expected {SCHEMA_VERSION})", self.schema));
        }
        let g = &self.grid;
        if g.n < 8 || !(g.horizon > 0.0) || !g.horizon.is_finite() {
            return bad("grid needs n ≥ 8 and a positive finite horizon".into());
        }
        if !(g.q_min > 0.0) {
            return bad("grid.q_min must be positive".into());
        }
        let [lo, hi] = self.estimator.q_range;
        if !(lo > 0.0 && lo < hi) {
            return bad("estimator.q_range needs 0 < lo < hi".into());
        }
        if self.model.dim() == 0 || self.model.dim() > crate::path::MAX_DIM {
            return bad(format!("model dimension {} outside 1..=3", self.model.dim()));
        }
        if self.kind == ExperimentKind::Average && self.average.grid_m.is_multiple_of(2) {
            return bad("average.grid_m must be odd".into());
        }
        Ok(())
    }

    /// `schema = 1` TOML with every field spelled out.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form, independent of comments, layout
    /// and the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output.dir = PathBuf::new();
        let value = serde_json::to_value(&canonical).expect("config serializes");
        hex(&Sha256::digest(super::emit::json_string(&value).as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = ExperimentConfig::from_toml("schema = 1\nkind = \"phi\"\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::new(ExperimentKind::Phi));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ExperimentConfig::from_toml("schema = 1\nkind = \"phi\"\n[grid]\nnn = 4\n").unwrap_err().to_string();
        assert!(err.contains("nn"), "{err}");
        let err = ExperimentConfig::from_toml("schema = 1\nkind = \"phi\"\ncolour = 1\n").unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn schema_is_required() {
        assert!(ExperimentConfig::from_toml("kind = \"phi\"\n").is_err());
        assert!(ExperimentConfig::from_toml("schema = 2\nkind = \"phi\"\n").is_err());
    }

    #[test]
    fn model_sections_parse() {
        let text = "schema = 1\nkind = \"simulate\"\n[model]\nfamily = \"gaussian\"\ndim = 2\n\
                    [model.process]\ntype = \"fbm\"\nhurst = 0.3\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.model.process(), Some(ProcessModel::Gaussian(GaussianModel::fbm(2, 0.3))));
        let bad = "schema = 1\nkind = \"simulate\"\n[model]\nfamily = \"gaussian\"\ndim = 1\n\
                   [model.process]\ntype = \"fbm\"\nhurst = 0.3\nextra = 1\n";
        assert!(ExperimentConfig::from_toml(bad).is_err());
    }

    #[test]
    fn round_trip_and_hash() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Geometry);
        cfg.model = ModelSpec::Stable { process: StableSpectral::Axes { alphas: vec![1.5, 1.2] } };
        let text = cfg.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        cfg.mc.seed = 1;
        assert_ne!(back.hash(), cfg.hash());
    }
}
