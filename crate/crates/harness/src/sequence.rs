use featbounds_core::imaging::{BlurMode, SceneSequence};
use featbounds_core::repeatability::{SceneGeometry, VariantGeometry};
use featbounds_core::{Dims, Homography, TransformKind};
use serde::{Deserialize, Serialize};

use crate::error::{rt, HarnessError, Result};
use crate::layout::image_name;

/// On-disk description of one scene's transformed sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub scene_id: String,
    pub transform: TransformKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blur_mode: Option<BlurMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codec: Option<String>,
    pub variants: Vec<VariantRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub amount: f64,
    pub effective_amount: f64,
    pub image: String,
    pub width: usize,
    pub height: usize,
    /// Row-major, maps reference coordinates into this variant.
    pub homography: [f64; 9],
}

impl SequenceRecord {
    pub fn from_sequence(seq: &SceneSequence, blur_mode: BlurMode) -> Self {
        Self {
            scene_id: seq.scene_id.clone(),
            transform: seq.kind,
            blur_mode: (seq.kind == TransformKind::Blur).then_some(blur_mode),
            codec: (seq.kind == TransformKind::Jpeg).then(|| featbounds_core::imaging::JPEG_CODEC_ID.to_string()),
            variants: seq
                .variants
                .iter()
                .map(|v| VariantRecord {
                    amount: v.amount,
                    effective_amount: v.effective_amount,
                    image: image_name(seq.kind, v.amount).to_string(),
                    width: v.image.width(),
                    height: v.image.height(),
                    homography: v.homography.entries(),
                })
                .collect(),
        }
    }

    pub fn parse(bytes: &[u8], context: &str) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(rt(context))
    }

    pub fn amounts(&self) -> Vec<f64> {
        self.variants.iter().map(|v| v.amount).collect()
    }

    pub fn geometry(&self) -> Result<SceneGeometry<f64>> {
        let variants = self
            .variants
            .iter()
            .map(|v| {
                let homography = Homography::new(v.homography)
                    .map_err(|e| HarnessError::Runtime(format!("{}/{}: {e}", self.scene_id, self.transform)))?;
                Ok(VariantGeometry {
                    amount: v.amount,
                    dims: Dims::new(v.width, v.height),
                    homography,
                })
            })
            .collect::<Result<_>>()?;
        Ok(SceneGeometry {
            scene_id: self.scene_id.clone(),
            variants,
        })
    }
}
