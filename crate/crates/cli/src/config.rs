use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mmpoincare::discretizer::{MetricChoice, NetOrder};
use mmpoincare::poincare::{LocalPoincare, SmoothingSource};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sweep {
    experiments: Vec<ExperimentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net: Option<NetSettings>,
    pub analysis: AnalysisConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceConfig {
    Antenna { max_radius: i64 },
    Grid { dim: usize, max_radius: i64 },
    Tree { branching: usize, depth: usize },
    RandomGeometric { count: usize, radius: f64 },
    EdgeList { path: PathBuf },
    Horosphere { n: usize, a: f64, height: f64, extent: f64, count: usize },
    TubeSurface { tube_radius: f64, arm_extent: i64, spine_extent: i64, density: f64 },
    PointCloud { path: PathBuf, metric: MetricChoice<f64> },
}

impl SpaceConfig {
    pub fn is_cloud(&self) -> bool {
        matches!(
            self,
            SpaceConfig::Horosphere { .. } | SpaceConfig::TubeSurface { .. } | SpaceConfig::PointCloud { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSettings {
    pub epsilon: f64,
    /// `"index"` or `{"shuffled": seed}`; shuffled with the experiment seed
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<NetOrder>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Center {
    #[default]
    Origin,
    Vertex(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldConfig {
    /// The row index `n` on antenna-like spaces.
    AntennaHeight,
    Coordinate { axis: usize },
    /// Independent uniform values in `[-1, 1]`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoughTarget {
    /// The cloud against its own net graph, graph hops scaled by epsilon.
    #[default]
    Net,
    /// A tube surface against the antenna it surrounds, unit hops.
    Antenna,
}

fn default_r0() -> f64 {
    1.0
}

fn default_sigma_two() -> f64 {
    2.0
}

fn default_fields() -> usize {
    100
}

fn default_tolerance() -> f64 {
    0.25
}

fn default_iters() -> usize {
    2000
}

fn default_pairs() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AnalysisConfig {
    Growth {
        radii: Vec<f64>,
        fit_range: (f64, f64),
        #[serde(default)]
        center: Center,
        /// Accepted range of the fitted exponent; adds a pass/fail row.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_alpha: Option<(f64, f64)>,
    },
    PoincareRatio {
        sigma: f64,
        beta: f64,
        outer_factor: f64,
        #[serde(default = "default_r0")]
        r0: f64,
        radii: Vec<f64>,
        field: FieldConfig,
        #[serde(default)]
        center: Center,
    },
    OptimalConstant {
        radii: Vec<f64>,
        outer_factor: f64,
        #[serde(default = "default_sigma_two")]
        sigma: f64,
        #[serde(default = "default_iters")]
        search_iters: usize,
        #[serde(default)]
        center: Center,
    },
    VerifyTheorem {
        sigmas: Vec<f64>,
        radii: Vec<f64>,
        fit_range: (f64, f64),
        #[serde(default = "default_fields")]
        fields: usize,
        #[serde(default)]
        center: Center,
    },
    Divergence {
        sigma: f64,
        beta: f64,
        outer_factor: f64,
        alpha: f64,
        radii: Vec<f64>,
        field: FieldConfig,
        #[serde(default = "default_tolerance")]
        slope_tolerance: f64,
        #[serde(default)]
        center: Center,
    },
    Ledger {
        n: u32,
        kappa: f64,
        epsilon: f64,
        sigma: f64,
        beta: f64,
        r0: f64,
        r1: f64,
        v_prime: f64,
        outer_factor: f64,
        local_poincare: Option<LocalPoincare<f64>>,
        smoothing: SmoothingSource<f64>,
    },
    RoughIsometry {
        #[serde(default = "default_pairs")]
        pair_budget: usize,
        #[serde(default)]
        target: RoughTarget,
    },
}

impl AnalysisConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AnalysisConfig::Growth { .. } => "growth",
            AnalysisConfig::PoincareRatio { .. } => "poincare-ratio",
            AnalysisConfig::OptimalConstant { .. } => "optimal-constant",
            AnalysisConfig::VerifyTheorem { .. } => "verify-theorem",
            AnalysisConfig::Divergence { .. } => "divergence",
            AnalysisConfig::Ledger { .. } => "ledger",
            AnalysisConfig::RoughIsometry { .. } => "rough-isometry",
        }
    }

    fn radii(&self) -> Option<&[f64]> {
        match self {
            AnalysisConfig::Growth { radii, .. }
            | AnalysisConfig::PoincareRatio { radii, .. }
            | AnalysisConfig::OptimalConstant { radii, .. }
            | AnalysisConfig::VerifyTheorem { radii, .. }
            | AnalysisConfig::Divergence { radii, .. } => Some(radii),
            _ => None,
        }
    }
}

impl ExperimentConfig {
    /// Checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            bail!("experiment id must not be empty");
        }
        if let Some(radii) = self.analysis.radii() {
            if radii.is_empty() {
                bail!("{}: parameter error: radii list is empty", self.id);
            }
            if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                bail!("{}: parameter error: radii must be finite and nonnegative", self.id);
            }
        }
        if let AnalysisConfig::Ledger { local_poincare: None, .. } = &self.analysis {
            bail!("{}: configuration error: ledger needs a local_poincare plug-in", self.id);
        }
        if let AnalysisConfig::VerifyTheorem { sigmas, .. } = &self.analysis {
            if sigmas.is_empty() {
                bail!("{}: parameter error: sigmas list is empty", self.id);
            }
        }
        match (&self.space, &self.analysis) {
            (_, AnalysisConfig::Ledger { .. }) => {}
            (None, a) => bail!("{}: analysis '{}' needs a space", self.id, a.name()),
            (Some(s), _) if s.is_cloud() && self.net.is_none() => {
                bail!("{}: point-cloud spaces need a net configuration", self.id)
            }
            _ => {}
        }
        if let AnalysisConfig::RoughIsometry { target, .. } = &self.analysis {
            match (target, &self.space) {
                (RoughTarget::Antenna, Some(SpaceConfig::TubeSurface { .. })) => {}
                (RoughTarget::Antenna, _) => bail!("{}: the antenna target needs a tube-surface space", self.id),
                (RoughTarget::Net, Some(s)) if !s.is_cloud() => {
                    bail!("{}: rough-isometry needs a point-cloud space", self.id)
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// Reads, parses and validates a config file holding one experiment or
/// `{"experiments": [...]}`. Returns the experiments and the directory that
/// relative data paths are resolved against.
pub fn load(path: &Path) -> Result<(Vec<ExperimentConfig>, PathBuf)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))?;
    let is_sweep = value.get("experiments").is_some();
    let experiments = if is_sweep {
        serde_json::from_value::<Sweep>(value).map(|s| s.experiments)
    } else {
        serde_json::from_value::<ExperimentConfig>(value).map(|e| vec![e])
    }
    .with_context(|| format!("invalid config {}", path.display()))?;
    if experiments.is_empty() {
        bail!("config {} lists no experiments", path.display());
    }
    for e in &experiments {
        e.validate()?;
    }
    let mut ids: Vec<&str> = experiments.iter().map(|e| e.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        bail!("duplicate experiment id '{}'", w[0]);
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((experiments, base))
}
