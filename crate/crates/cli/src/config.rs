use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use gameseg_core::clustering::{KMeansParams, PcaTarget};
use gameseg_core::data::{
    CalendarFlag, FeatureName, FeatureSpec, Granularity, ResourceKind, SynthConfig,
};
use gameseg_core::glasso::GlassoOptions;
use gameseg_core::segmentation::{decile_edges, RankOrientation, SimilarityMethod};
use gameseg_core::stats::DEFAULT_ALPHA;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Failure, Stage};

/// Everything a run needs. Loaded from TOML, then overridden by flags; the
/// effective value is written to `config.toml` in the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seed for every randomized stage.
    pub seed: u64,
    /// Dataset CSV files, concatenated in order.
    pub input: Vec<PathBuf>,
    /// Generic numeric CSV for `glasso`; replaces the dataset when set.
    pub matrix: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    /// Features used for clustering.
    pub features: FeatureSpec,
    pub standardize: bool,
    pub synth: SynthConfig,
    pub glasso: GlassoConfig,
    pub clustering: ClusteringConfig,
    pub segmentation: SegmentationConfig,
    pub causality: CausalityConfig,
    pub ttest: TTestConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            input: Vec::new(),
            matrix: None,
            output_dir: None,
            features: FeatureSpec::behavior(),
            standardize: true,
            synth: SynthConfig::default(),
            glasso: GlassoConfig::default(),
            clustering: ClusteringConfig::default(),
            segmentation: SegmentationConfig::default(),
            causality: CausalityConfig::default(),
            ttest: TTestConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlassoConfig {
    pub features: FeatureSpec,
    /// Restrict to these players; empty means all.
    pub players: Vec<String>,
    pub options: GlassoOptions,
}

impl Default for GlassoConfig {
    fn default() -> Self {
        GlassoConfig {
            features: FeatureSpec::with_context(),
            players: Vec::new(),
            options: GlassoOptions::default(),
        }
    }
}

/// Cluster count: a fixed number or `"auto"` (elbow suggestion).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KChoice {
    #[default]
    Auto,
    Fixed(usize),
}

impl Serialize for KChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            KChoice::Auto => s.serialize_str("auto"),
            KChoice::Fixed(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for KChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(k) => Ok(KChoice::Fixed(k as usize)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for KChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(KChoice::Auto);
        }
        s.parse()
            .map(KChoice::Fixed)
            .map_err(|_| format!("expected a cluster count or \"auto\", got {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringConfig {
    pub k: KChoice,
    /// Largest k on the elbow curve.
    pub k_max: usize,
    pub pca: PcaTarget,
    pub kmeans: KMeansParams,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            k: KChoice::Fixed(3),
            k_max: 6,
            pca: PcaTarget::default(),
            kmeans: KMeansParams::default(),
        }
    }
}

/// How group correlation matrices are estimated for cluster labelling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationSource {
    /// Sample Pearson correlations.
    #[default]
    Pearson,
    /// Sample correlations restricted to the neighborhood-lasso edge set.
    Glasso,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    pub orientation: RankOrientation,
    pub bucket_edges: Vec<f64>,
    pub similarity: SimilarityMethod,
    pub correlation_source: CorrelationSource,
    /// Features whose correlation structure characterizes a group.
    pub correlation_features: FeatureSpec,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        let mut features: Vec<FeatureName> = ResourceKind::ALL.map(FeatureName::Status).into();
        features.extend([
            FeatureName::Humidity,
            FeatureName::Temperature,
            FeatureName::SolarRadiation,
            FeatureName::Flag(CalendarFlag::Morning),
            FeatureName::Flag(CalendarFlag::Afternoon),
            FeatureName::Flag(CalendarFlag::Evening),
        ]);
        SegmentationConfig {
            orientation: RankOrientation::default(),
            bucket_edges: decile_edges(),
            similarity: SimilarityMethod::default(),
            correlation_source: CorrelationSource::default(),
            correlation_features: FeatureSpec::new(features, Granularity::PerMinute),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CausalPair {
    pub cause: FeatureName,
    pub effect: FeatureName,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CausalityConfig {
    pub pairs: Vec<CausalPair>,
    pub lag: usize,
    pub alpha: f64,
    /// Test first differences instead of levels.
    pub difference: bool,
    /// When set, also report the BIC-preferred lag up to this order.
    pub bic_max_lag: Option<usize>,
}

impl Default for CausalityConfig {
    fn default() -> Self {
        use CalendarFlag::{Afternoon, Evening, Morning};
        use FeatureName::{Flag, Humidity, Status};
        use ResourceKind::{CeilingFan as Fan, CeilingLight, DeskLight};
        let pair = |cause, effect| CausalPair { cause, effect };
        CausalityConfig {
            pairs: vec![
                pair(Status(Fan), Status(CeilingLight)),
                pair(Humidity, Status(Fan)),
                pair(Status(DeskLight), Status(Fan)),
                pair(Status(CeilingLight), Status(DeskLight)),
                pair(Flag(Morning), Status(DeskLight)),
                pair(Flag(Afternoon), Status(Fan)),
                pair(Flag(Evening), Status(CeilingLight)),
            ],
            lag: 1,
            alpha: DEFAULT_ALPHA,
            difference: false,
            bic_max_lag: None,
        }
    }
}

/// Before/after comparison of daily usage minutes, split at a date.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TTestConfig {
    /// Days before this date form the "before" sample; disabled when unset.
    pub split_date: Option<NaiveDate>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| {
            CliError::new(
                Stage::Config,
                "read",
                Failure::Io {
                    path: path.to_path_buf(),
                    source,
                },
            )
        })?;
        toml::from_str(&text).map_err(|e| {
            CliError::new(
                Stage::Config,
                "parse",
                Failure::Config(format!("{}: {e}", path.display())),
            )
        })
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self)
            .map_err(|e| CliError::new(Stage::Config, "serialize", Failure::Config(e.to_string())))
    }

    /// Checks that do not need any data.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| {
            Err(CliError::new(
                Stage::Config,
                "validate",
                Failure::Config(msg),
            ))
        };
        if let KChoice::Fixed(0) = self.clustering.k {
            return bad("clustering.k must be at least 1".into());
        }
        if self.clustering.k_max < 3 {
            return bad("clustering.k_max must be at least 3".into());
        }
        if self.causality.lag == 0 {
            return bad("causality.lag must be at least 1".into());
        }
        if !(self.causality.alpha > 0.0 && self.causality.alpha < 1.0) {
            return bad(format!(
                "causality.alpha must lie in (0, 1), got {}",
                self.causality.alpha
            ));
        }
        if self.glasso.options.folds < 2 {
            return bad("glasso.options.folds must be at least 2".into());
        }
        Ok(())
    }
}
