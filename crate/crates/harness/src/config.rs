//! TOML run configuration.
//!
//! ```toml
//! [database]
//! synthetic_scenes = 5        # used when scenes_root is absent
//! seed = 7
//!
//! [transforms]
//! kinds = ["blur"]
//! blur = [0, 0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5]
//!
//! [[detectors]]
//! id = "harris"
//! kind = "harris"
//!
//! [evaluation]
//! epsilon = 4.0
//!
//! [output]
//! dir = "out"
//! jobs = 4
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use featbounds_core::detectors::{DogParams, HarrisParams, HarrisThreshold, KeypointFormat};
use featbounds_core::imaging::BlurMode;
use featbounds_core::mcnemar::{default_thresholds, validate_thresholds};
use featbounds_core::repeatability::DEFAULT_EPSILON;
use featbounds_core::{MatchCriterion, TransformKind, TransformSpec};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, HarnessError, Result};
use crate::layout::RESULTS_DIR;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub database: DatabaseConfig,
    pub transforms: TransformsConfig,
    pub detectors: Vec<DetectorConfig>,
    pub evaluation: EvaluationConfig,
    pub comparison: ComparisonConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatabaseConfig {
    /// Directory of reference images (PGM, PNG or JPEG); the file stem is the scene id.
    pub scenes_root: Option<PathBuf>,
    pub synthetic_scenes: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
}

impl Default for DatabaseConfig {
    fn default() -> Self {
        Self {
            scenes_root: None,
            synthetic_scenes: 5,
            width: 192,
            height: 144,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformsConfig {
    pub kinds: Vec<TransformKind>,
    pub blur_mode: BlurMode,
    pub jpeg: Option<Vec<f64>>,
    pub blur: Option<Vec<f64>>,
    pub brightness: Option<Vec<f64>>,
}

impl Default for TransformsConfig {
    fn default() -> Self {
        Self {
            kinds: TransformKind::ALL.to_vec(),
            blur_mode: BlurMode::default(),
            jpeg: None,
            blur: None,
            brightness: None,
        }
    }
}

impl TransformsConfig {
    pub fn spec(&self, kind: TransformKind) -> Result<TransformSpec> {
        let amounts = match kind {
            TransformKind::Jpeg => &self.jpeg,
            TransformKind::Blur => &self.blur,
            TransformKind::Brightness => &self.brightness,
        };
        match amounts {
            None => Ok(TransformSpec::default_for(kind)),
            Some(a) => TransformSpec::new(kind, a.clone()).map_err(invalid(format!("transforms.{kind}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Harris,
    Dog,
    External,
}

/// One `[[detectors]]` entry. Parameters left out take the detector defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub id: String,
    pub kind: DetectorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_i: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absolute_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nms_radius: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub octaves: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales_per_octave: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_ratio: Option<f64>,
    /// Root of an externally produced keypoint tree mirroring the output layout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// `oxford` or `csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Detector {
    Harris(HarrisParams),
    Dog(DogParams),
    External { dir: PathBuf, format: KeypointFormat },
}

impl DetectorConfig {
    pub fn builtin(id: &str, kind: DetectorKind) -> Self {
        Self {
            id: id.to_string(),
            kind,
            sigma_d: None,
            sigma_i: None,
            k: None,
            relative_threshold: None,
            absolute_threshold: None,
            nms_radius: None,
            octaves: None,
            scales_per_octave: None,
            contrast_threshold: None,
            edge_ratio: None,
            dir: None,
            format: None,
        }
    }

    pub fn external(id: &str, dir: impl Into<PathBuf>, format: KeypointFormat) -> Self {
        Self {
            dir: Some(dir.into()),
            format: Some(format.extension().to_string()),
            ..Self::builtin(id, DetectorKind::External)
        }
    }

    pub fn is_external(&self) -> bool {
        self.kind == DetectorKind::External
    }

    fn stray(&self, names: &[(&str, bool)]) -> Result<()> {
        match names.iter().find(|(_, set)| *set) {
            Some((name, _)) => Err(HarnessError::Validation(format!(
                "detector {:?}: `{name}` does not apply to kind {:?}",
                self.id, self.kind
            ))),
            None => Ok(()),
        }
    }

    /// Checks parameters and builds the runnable detector description.
    pub fn resolve(&self) -> Result<Detector> {
        let harris_keys = [
            ("sigma_d", self.sigma_d.is_some()),
            ("sigma_i", self.sigma_i.is_some()),
            ("k", self.k.is_some()),
            ("relative_threshold", self.relative_threshold.is_some()),
            ("absolute_threshold", self.absolute_threshold.is_some()),
            ("nms_radius", self.nms_radius.is_some()),
        ];
        let dog_keys = [
            ("octaves", self.octaves.is_some()),
            ("scales_per_octave", self.scales_per_octave.is_some()),
            ("contrast_threshold", self.contrast_threshold.is_some()),
            ("edge_ratio", self.edge_ratio.is_some()),
        ];
        let external_keys = [("dir", self.dir.is_some()), ("format", self.format.is_some())];
        let ctx = format!("detector {:?}", self.id);
        match self.kind {
            DetectorKind::Harris => {
                self.stray(&dog_keys)?;
                self.stray(&external_keys)?;
                let d = HarrisParams::default();
                let threshold = match (self.relative_threshold, self.absolute_threshold) {
                    (Some(_), Some(_)) => {
                        return Err(HarnessError::Validation(format!(
                            "{ctx}: relative_threshold and absolute_threshold are exclusive"
                        )))
                    }
                    (Some(r), None) => HarrisThreshold::Relative(r),
                    (None, Some(a)) => HarrisThreshold::Absolute(a),
                    (None, None) => d.threshold,
                };
                let p = HarrisParams {
                    sigma_d: self.sigma_d.unwrap_or(d.sigma_d),
                    sigma_i: self.sigma_i.unwrap_or(d.sigma_i),
                    k: self.k.unwrap_or(d.k),
                    threshold,
                    nms_radius: self.nms_radius.unwrap_or(d.nms_radius),
                };
                p.validate().map_err(invalid(&ctx))?;
                Ok(Detector::Harris(p))
            }
            DetectorKind::Dog => {
                self.stray(&harris_keys)?;
                self.stray(&external_keys)?;
                let d = DogParams::default();
                let p = DogParams {
                    octaves: self.octaves.unwrap_or(d.octaves),
                    scales_per_octave: self.scales_per_octave.unwrap_or(d.scales_per_octave),
                    contrast_threshold: self.contrast_threshold.unwrap_or(d.contrast_threshold),
                    edge_ratio: self.edge_ratio.unwrap_or(d.edge_ratio),
                };
                p.validate().map_err(invalid(&ctx))?;
                Ok(Detector::Dog(p))
            }
            DetectorKind::External => {
                self.stray(&harris_keys)?;
                self.stray(&dog_keys)?;
                let dir = self
                    .dir
                    .clone()
                    .ok_or_else(|| HarnessError::Validation(format!("{ctx}: external detectors need `dir`")))?;
                let format = self
                    .format
                    .as_deref()
                    .ok_or_else(|| HarnessError::Validation(format!("{ctx}: external detectors need `format`")))?
                    .parse::<KeypointFormat>()
                    .map_err(invalid(&ctx))?;
                Ok(Detector::External { dir, format })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub epsilon: f64,
    /// Maximum allowed scale ratio between matched points; off when absent.
    pub scale_gate: Option<f64>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            scale_gate: None,
        }
    }
}

impl EvaluationConfig {
    pub fn criterion(&self) -> Result<MatchCriterion<f64>> {
        let c = MatchCriterion::new(self.epsilon).map_err(invalid("evaluation"))?;
        match self.scale_gate {
            Some(g) => c.with_scale_gate(g).map_err(invalid("evaluation")),
            None => Ok(c),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConfig {
    pub thresholds: Vec<f64>,
    /// Ordered detector pairs; every pair in config order when absent.
    pub pairs: Option<Vec<[String; 2]>>,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        Self {
            thresholds: default_thresholds(),
            pairs: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Worker threads; all available processors when absent.
    pub jobs: Option<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("featbounds-out"),
            jobs: None,
        }
    }
}

/// Accepts ids usable as file name components.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id != RESULTS_DIR
        && !id.starts_with('.')
        && !id.contains("__")
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(invalid("config"))?;
        if cfg.detectors.is_empty() {
            cfg.detectors = Self::default_detectors();
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
        Self::from_toml_str(&text)
    }

    pub fn with_defaults() -> Self {
        Self {
            detectors: Self::default_detectors(),
            ..Self::default()
        }
    }

    fn default_detectors() -> Vec<DetectorConfig> {
        vec![
            DetectorConfig::builtin("harris", DetectorKind::Harris),
            DetectorConfig::builtin("dog", DetectorKind::Dog),
        ]
    }

    pub fn detector(&self, id: &str) -> Option<&DetectorConfig> {
        self.detectors.iter().find(|d| d.id == id)
    }

    /// Pairs to compare: configured ones, or every unordered pair in config order.
    pub fn pairs(&self) -> Vec<(String, String)> {
        match &self.comparison.pairs {
            Some(p) => p.iter().map(|[a, b]| (a.clone(), b.clone())).collect(),
            None => {
                let ids: Vec<&String> = self.detectors.iter().map(|d| &d.id).collect();
                let mut out = Vec::new();
                for i in 0..ids.len() {
                    for j in i + 1..ids.len() {
                        out.push((ids[i].clone(), ids[j].clone()));
                    }
                }
                out
            }
        }
    }

    /// Everything that shapes the artifacts; the output location and the
    /// worker count are left out so they cannot change the manifest.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("output");
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Validation(m));
        let db = &self.database;
        match &db.scenes_root {
            Some(root) if !root.is_dir() => return bad(format!("scenes root {} is not a directory", root.display())),
            Some(_) => {}
            None => {
                if db.synthetic_scenes == 0 {
                    return bad("database: synthetic_scenes must be at least 1".into());
                }
                if db.width < 32 || db.height < 32 {
                    return bad("database: synthetic scenes must be at least 32x32".into());
                }
            }
        }

        if self.transforms.kinds.is_empty() {
            return bad("transforms: no kinds selected".into());
        }
        let mut kinds = BTreeSet::new();
        for &k in &self.transforms.kinds {
            if !kinds.insert(k) {
                return bad(format!("transforms: {k} listed twice"));
            }
            self.transforms.spec(k)?;
        }

        if self.detectors.is_empty() {
            return bad("no detectors configured".into());
        }
        let mut ids = BTreeSet::new();
        for d in &self.detectors {
            if !valid_id(&d.id) {
                return bad(format!("detector id {:?} is not a usable name", d.id));
            }
            if !ids.insert(d.id.as_str()) {
                return bad(format!("detector id {:?} used twice", d.id));
            }
            if let Detector::External { dir, .. } = d.resolve()? {
                if !dir.is_dir() {
                    return bad(format!("detector {:?}: {} is not a directory", d.id, dir.display()));
                }
            }
        }

        self.evaluation.criterion()?;
        validate_thresholds(&self.comparison.thresholds).map_err(invalid("comparison.thresholds"))?;
        for (a, b) in self.pairs() {
            if a == b {
                return bad(format!("comparison pair compares {a:?} with itself"));
            }
            for id in [&a, &b] {
                if !ids.contains(id.as_str()) {
                    return bad(format!("comparison pair names unknown detector {id:?}"));
                }
            }
        }
        if self.output.jobs == Some(0) {
            return bad("output.jobs must be at least 1".into());
        }
        Ok(())
    }
}
