//! Relative artifact paths inside the output directory.
//!
//! ```text
//! <out>/<scene_id>/<transform>/sequence.json
//! <out>/<scene_id>/<transform>/<amount>/image.pgm | image.jpg
//! <out>/<scene_id>/<transform>/<amount>/keypoints.<detector>.csv
//! <out>/results/<transform>/<detector>/{matrix.csv, excluded.json, curves.csv, summary.json}
//! <out>/results/<transform>/compare/<a>__vs__<b>/{grid.csv, heatmap.pgm, heatmap.json}
//! <out>/results/{report.csv, comparisons.csv}
//! ```

use std::path::{Path, PathBuf};

use featbounds_core::detectors::KeypointFormat;
use featbounds_core::imaging::format_amount;
use featbounds_core::TransformKind;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";
pub const RESULTS_DIR: &str = "results";
pub const SEQUENCE_FILE: &str = "sequence.json";

pub fn variant_dir(scene_id: &str, kind: TransformKind, amount: f64) -> String {
    format!("{scene_id}/{kind}/{}", format_amount(amount))
}

/// JPEG variants keep the encoded stream; everything else is stored as PGM.
pub fn image_name(kind: TransformKind, amount: f64) -> &'static str {
    if kind == TransformKind::Jpeg && amount > 0.0 {
        "image.jpg"
    } else {
        "image.pgm"
    }
}

pub fn image_path(scene_id: &str, kind: TransformKind, amount: f64) -> String {
    format!("{}/{}", variant_dir(scene_id, kind, amount), image_name(kind, amount))
}

pub fn keypoints_name(detector_id: &str) -> String {
    format!("keypoints.{detector_id}.csv")
}

pub fn keypoints_path(scene_id: &str, kind: TransformKind, amount: f64, detector_id: &str) -> String {
    format!(
        "{}/{}",
        variant_dir(scene_id, kind, amount),
        keypoints_name(detector_id)
    )
}

pub fn sequence_path(scene_id: &str, kind: TransformKind) -> String {
    format!("{scene_id}/{kind}/{SEQUENCE_FILE}")
}

pub fn result_dir(kind: TransformKind, detector_id: &str) -> String {
    format!("{RESULTS_DIR}/{kind}/{detector_id}")
}

pub fn compare_dir(kind: TransformKind, a: &str, b: &str) -> String {
    format!("{RESULTS_DIR}/{kind}/compare/{a}__vs__{b}")
}

/// Where an external detector's output for one image is expected.
pub fn external_keypoints(
    root: &Path,
    scene_id: &str,
    kind: TransformKind,
    amount: f64,
    format: KeypointFormat,
) -> PathBuf {
    root.join(variant_dir(scene_id, kind, amount))
        .join(format!("keypoints.{}", format.extension()))
}
