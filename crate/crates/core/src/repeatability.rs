//! Repeatability of keypoints under a ground-truth homography, and the
//! scenes-by-amounts score matrix built from it.
//!
//! A reference point counts toward `n_ref` when its projection lands inside
//! the target image. It is repeated when a target point lies within
//! `epsilon` pixels of that projection; pairs are taken greedily in
//! ascending distance so that no point on either side is used twice.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::detectors::{ImageRef, Keypoint, KeypointSet};
use crate::geometry::{project_point, Dims, GeometryError, Homography};
use crate::imaging::{format_amount, SceneSequence, TransformKind};
use crate::scalar::Real;

pub const DEFAULT_EPSILON: f64 = 4.0;
pub const DEFAULT_SCALE_GATE: f64 = 1.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepeatabilityError {
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("scale gate ratio must be >= 1, got {0}")]
    InvalidScaleGate(f64),
    #[error("empty reference in common region")]
    EmptyReference,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("missing keypoint set for scene {} variant {}", .0.scene_id, .0.variant)]
    MissingKeypoints(ImageRef),
    #[error("scene {scene} has amounts differing from scene {first}")]
    AmountMismatch { scene: String, first: String },
    #[error("duplicate scene id {0}")]
    DuplicateScene(String),
    #[error("matrix shape error: {0}")]
    Shape(String),
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("matrix csv: {0}")]
    Csv(String),
}

/// Correspondence rule: location tolerance plus an optional scale gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchCriterion<T> {
    pub epsilon: T,
    /// When set, a pair also needs scale ratio in `[1/r, r]`.
    pub scale_gate: Option<T>,
}

impl<T: Real> MatchCriterion<T> {
    pub fn new(epsilon: T) -> Result<Self, RepeatabilityError> {
        if !(epsilon.is_finite() && epsilon > T::zero()) {
            return Err(RepeatabilityError::InvalidEpsilon(epsilon.to_f64_lossy()));
        }
        Ok(Self {
            epsilon,
            scale_gate: None,
        })
    }

    pub fn with_scale_gate(mut self, ratio: T) -> Result<Self, RepeatabilityError> {
        if !(ratio.is_finite() && ratio >= T::one()) {
            return Err(RepeatabilityError::InvalidScaleGate(ratio.to_f64_lossy()));
        }
        self.scale_gate = Some(ratio);
        Ok(self)
    }

    fn validate(&self) -> Result<(), RepeatabilityError> {
        Self::new(self.epsilon)?;
        if let Some(r) = self.scale_gate {
            Self::new(self.epsilon)?.with_scale_gate(r)?;
        }
        Ok(())
    }

    fn scales_compatible(&self, a: T, b: T) -> bool {
        match self.scale_gate {
            None => true,
            Some(r) => {
                let ratio = a / b;
                ratio >= T::one() / r && ratio <= r
            }
        }
    }
}

impl<T: Real> Default for MatchCriterion<T> {
    fn default() -> Self {
        Self {
            epsilon: T::c(DEFAULT_EPSILON),
            scale_gate: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchPair<T> {
    pub reference: usize,
    pub target: usize,
    pub distance: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult<T> {
    pub n_ref: usize,
    pub n_rep: usize,
    pub pairs: Vec<MatchPair<T>>,
    pub score: T,
}

/// Greedy one-to-one matching of `reference` (projected by `h`) onto `target`.
pub fn match_points<T: Real>(
    reference: &[Keypoint<T>],
    target: &[Keypoint<T>],
    h: &Homography<T>,
    target_dims: Dims,
    criterion: &MatchCriterion<T>,
) -> Result<MatchResult<T>, RepeatabilityError> {
    criterion.validate()?;
    let mut projected = Vec::with_capacity(reference.len());
    for (i, kp) in reference.iter().enumerate() {
        let q = project_point(h, kp.location())?;
        if target_dims.contains(q.x, q.y) {
            projected.push((i, q));
        }
    }
    let n_ref = projected.len();
    if n_ref == 0 {
        return Err(RepeatabilityError::EmptyReference);
    }

    let mut candidates = Vec::new();
    for &(i, q) in &projected {
        for (j, t) in target.iter().enumerate() {
            let d = q.distance(&t.location());
            if d <= criterion.epsilon && criterion.scales_compatible(reference[i].scale, t.scale) {
                candidates.push(MatchPair {
                    reference: i,
                    target: j,
                    distance: d,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.distance
            .total_cmp_real(&b.distance)
            .then(a.reference.cmp(&b.reference))
            .then(a.target.cmp(&b.target))
    });

    let mut ref_used = vec![false; reference.len()];
    let mut tgt_used = vec![false; target.len()];
    let mut pairs = Vec::new();
    for c in candidates {
        if !ref_used[c.reference] && !tgt_used[c.target] {
            ref_used[c.reference] = true;
            tgt_used[c.target] = true;
            pairs.push(c);
        }
    }
    let n_rep = pairs.len();
    Ok(MatchResult {
        n_ref,
        n_rep,
        pairs,
        score: T::c(n_rep as f64) / T::c(n_ref as f64),
    })
}

pub fn match_keypoints<T: Real>(
    reference: &KeypointSet<T>,
    target: &KeypointSet<T>,
    h: &Homography<T>,
    target_dims: Dims,
    criterion: &MatchCriterion<T>,
) -> Result<MatchResult<T>, RepeatabilityError> {
    match_points(&reference.points, &target.points, h, target_dims, criterion)
}

/// `n_rep / n_ref`.
pub fn repeatability<T: Real>(
    reference: &KeypointSet<T>,
    target: &KeypointSet<T>,
    h: &Homography<T>,
    target_dims: Dims,
    criterion: &MatchCriterion<T>,
) -> Result<T, RepeatabilityError> {
    match_keypoints(reference, target, h, target_dims, criterion).map(|m| m.score)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariantGeometry<T> {
    pub amount: f64,
    pub dims: Dims,
    /// Maps reference coordinates into this variant.
    pub homography: Homography<T>,
}

/// What the matrix builder needs to know about a scene besides keypoints.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneGeometry<T> {
    pub scene_id: String,
    /// Variant 0 is the reference itself.
    pub variants: Vec<VariantGeometry<T>>,
}

impl<T: Real> SceneGeometry<T> {
    pub fn from_sequence(seq: &SceneSequence) -> Self {
        Self {
            scene_id: seq.scene_id.clone(),
            variants: seq
                .variants
                .iter()
                .map(|v| VariantGeometry {
                    amount: v.amount,
                    dims: v.image.dims(),
                    homography: v.homography.cast(),
                })
                .collect(),
        }
    }

    pub fn amounts(&self) -> Vec<f64> {
        self.variants.iter().map(|v| v.amount).collect()
    }
}

/// Scenes x amounts repeatability scores for one detector and transform.
#[derive(Clone, Debug, PartialEq)]
pub struct RepeatabilityMatrix<T> {
    detector_id: String,
    kind: TransformKind,
    amounts: Vec<f64>,
    scene_ids: Vec<String>,
    scores: Vec<T>,
    excluded: Vec<String>,
}

impl<T: Real> RepeatabilityMatrix<T> {
    pub fn from_rows(
        detector_id: impl Into<String>,
        kind: TransformKind,
        amounts: Vec<f64>,
        scene_ids: Vec<String>,
        rows: Vec<Vec<T>>,
        excluded: Vec<String>,
    ) -> Result<Self, RepeatabilityError> {
        if rows.len() != scene_ids.len() {
            return Err(RepeatabilityError::Shape(format!(
                "{} rows for {} scenes",
                rows.len(),
                scene_ids.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for id in scene_ids.iter().chain(&excluded) {
            if !seen.insert(id.as_str()) {
                return Err(RepeatabilityError::DuplicateScene(id.clone()));
            }
        }
        let m = amounts.len();
        let mut scores = Vec::with_capacity(rows.len() * m);
        for (id, row) in scene_ids.iter().zip(rows) {
            if row.len() != m {
                return Err(RepeatabilityError::Shape(format!(
                    "scene {id} has {} scores for {m} amounts",
                    row.len()
                )));
            }
            for v in row {
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(RepeatabilityError::ScoreOutOfRange(v.to_f64_lossy()));
                }
                scores.push(v);
            }
        }
        Ok(Self {
            detector_id: detector_id.into(),
            kind,
            amounts,
            scene_ids,
            scores,
            excluded,
        })
    }

    pub fn detector_id(&self) -> &str {
        &self.detector_id
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn amounts(&self) -> &[f64] {
        &self.amounts
    }

    pub fn scene_ids(&self) -> &[String] {
        &self.scene_ids
    }

    /// Scenes dropped because their reference had no points in the common region.
    pub fn excluded(&self) -> &[String] {
        &self.excluded
    }

    pub fn n_scenes(&self) -> usize {
        self.scene_ids.len()
    }

    pub fn n_amounts(&self) -> usize {
        self.amounts.len()
    }

    pub fn get(&self, scene: usize, amount: usize) -> T {
        self.scores[scene * self.amounts.len() + amount]
    }

    pub fn row(&self, scene: usize) -> &[T] {
        let m = self.amounts.len();
        &self.scores[scene * m..(scene + 1) * m]
    }

    pub fn column(&self, amount: usize) -> Vec<T> {
        (0..self.n_scenes()).map(|i| self.get(i, amount)).collect()
    }

    /// Row index of a scene id.
    pub fn scene_index(&self, scene_id: &str) -> Option<usize> {
        self.scene_ids.iter().position(|s| s == scene_id)
    }

    /// Header `scene_id,<amount_0>,...`, one row per scene.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scene_id");
        for a in &self.amounts {
            out.push(',');
            out.push_str(&format_amount(*a));
        }
        out.push('\n');
        for (i, id) in self.scene_ids.iter().enumerate() {
            out.push_str(id);
            for v in self.row(i) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(
        text: &str,
        detector_id: impl Into<String>,
        kind: TransformKind,
        excluded: Vec<String>,
    ) -> Result<Self, RepeatabilityError> {
        let csv_err = |m: String| RepeatabilityError::Csv(m);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| csv_err("empty file".into()))?;
        let mut cols = header.split(',');
        if cols.next() != Some("scene_id") {
            return Err(csv_err("header must start with scene_id".into()));
        }
        let amounts = cols
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| csv_err(format!("bad amount {c:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for line in lines {
            let mut fields = line.split(',');
            let id = fields.next().unwrap_or_default().to_string();
            let row = fields
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .map(T::c)
                        .map_err(|_| csv_err(format!("bad score {f:?} for scene {id}")))
                })
                .collect::<Result<Vec<T>, _>>()?;
            ids.push(id);
            rows.push(row);
        }
        Self::from_rows(detector_id, kind, amounts, ids, rows, excluded)
    }
}

/// Keypoint sets keyed by (scene, variant).
pub type KeypointStore<T> = BTreeMap<ImageRef, KeypointSet<T>>;

/// Score every variant of every scene against that scene's variant 0.
///
/// Rows come out sorted by scene id whatever order the scenes were given in.
/// A scene whose reference has no points in some common region is excluded
/// and listed rather than scored.
pub fn build_matrix<T: Real>(
    scenes: &[SceneGeometry<T>],
    keypoints: &KeypointStore<T>,
    criterion: &MatchCriterion<T>,
    detector_id: &str,
    kind: TransformKind,
) -> Result<RepeatabilityMatrix<T>, RepeatabilityError> {
    criterion.validate()?;
    let first = scenes
        .first()
        .ok_or_else(|| RepeatabilityError::Shape("no scenes".into()))?;
    let amounts = first.amounts();
    for s in scenes {
        if s.amounts() != amounts {
            return Err(RepeatabilityError::AmountMismatch {
                scene: s.scene_id.clone(),
                first: first.scene_id.clone(),
            });
        }
    }
    if amounts.is_empty() {
        return Err(RepeatabilityError::Shape("no amounts".into()));
    }
    let mut seen = BTreeSet::new();
    for s in scenes {
        if !seen.insert(&s.scene_id) {
            return Err(RepeatabilityError::DuplicateScene(s.scene_id.clone()));
        }
    }

    let lookup = |scene: &str, variant: usize| {
        let key = ImageRef {
            scene_id: scene.to_string(),
            variant,
        };
        keypoints.get(&key).ok_or(RepeatabilityError::MissingKeypoints(key))
    };

    let mut rows: Vec<(String, Option<Vec<T>>)> = scenes
        .par_iter()
        .map(|scene| {
            let reference = lookup(&scene.scene_id, 0)?;
            let mut row = Vec::with_capacity(scene.variants.len());
            for (k, v) in scene.variants.iter().enumerate() {
                let target = lookup(&scene.scene_id, k)?;
                match match_keypoints(reference, target, &v.homography, v.dims, criterion) {
                    Ok(m) => row.push(m.score),
                    Err(RepeatabilityError::EmptyReference) => return Ok((scene.scene_id.clone(), None)),
                    Err(e) => return Err(e),
                }
            }
            Ok((scene.scene_id.clone(), Some(row)))
        })
        .collect::<Result<_, RepeatabilityError>>()?;
    rows.sort_by(|a, b| a.0.cmp(&b.0));

    let mut ids = Vec::new();
    let mut scores = Vec::new();
    let mut excluded = Vec::new();
    for (id, row) in rows {
        match row {
            Some(r) => {
                ids.push(id);
                scores.push(r);
            }
            None => excluded.push(id),
        }
    }
    RepeatabilityMatrix::from_rows(detector_id, kind, amounts, ids, scores, excluded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::Keypoint;
    use proptest::prelude::*;

    fn kps(pts: &[(f64, f64)]) -> Vec<Keypoint<f64>> {
        pts.iter()
            .map(|&(x, y)| Keypoint::new(x, y, 2.0, 0.0).unwrap())
            .collect()
    }

    fn set(scene: &str, variant: usize, pts: &[(f64, f64)]) -> KeypointSet<f64> {
        KeypointSet::new(
            ImageRef {
                scene_id: scene.into(),
                variant,
            },
            "det",
            kps(pts),
        )
    }

    const D: Dims = Dims {
        width: 100,
        height: 100,
    };

    fn eps4() -> MatchCriterion<f64> {
        MatchCriterion::new(4.0).unwrap()
    }

    #[test]
    fn identical_sets_score_one() {
        let r = kps(&[(1.0, 2.0), (50.0, 50.0), (80.5, 3.25)]);
        let m = match_points(&r, &r, &Homography::identity(), D, &eps4()).unwrap();
        assert_eq!(m.score, 1.0);
        assert_eq!(m.n_rep, 3);
        assert!(m.pairs.iter().all(|p| p.distance == 0.0 && p.reference == p.target));
    }

    #[test]
    fn four_versus_two() {
        let r = kps(&[(10.0, 10.0), (20.0, 20.0), (30.0, 30.0), (40.0, 40.0)]);
        let t = kps(&[(10.5, 10.0), (20.0, 21.0)]);
        let m = match_points(&r, &t, &Homography::identity(), D, &eps4()).unwrap();
        assert_eq!((m.n_ref, m.n_rep, m.score), (4, 2, 0.5));
    }

    #[test]
    fn empty_target_and_disjoint_sets() {
        let r = kps(&[(10.0, 10.0), (20.0, 20.0)]);
        let m = match_points(&r, &[], &Homography::identity(), D, &eps4()).unwrap();
        assert_eq!((m.n_rep, m.score), (0, 0.0));
        let far = kps(&[(90.0, 90.0), (70.0, 5.0)]);
        assert_eq!(
            match_points(&r, &far, &Homography::identity(), D, &eps4())
                .unwrap()
                .score,
            0.0
        );
    }

    #[test]
    fn empty_reference_is_an_error() {
        let id = Homography::identity();
        assert_eq!(
            match_points(&[], &kps(&[(1.0, 1.0)]), &id, D, &eps4()),
            Err(RepeatabilityError::EmptyReference)
        );
        // every reference point projects outside the target
        let shift = Homography::translation(200.0, 0.0);
        assert_eq!(
            match_points(&kps(&[(1.0, 1.0)]), &kps(&[(1.0, 1.0)]), &shift, D, &eps4()),
            Err(RepeatabilityError::EmptyReference)
        );
    }

    #[test]
    fn common_region_filters_reference() {
        let h = Homography::translation(-50.0, 0.0);
        let r = kps(&[(25.0, 10.0), (75.0, 10.0)]);
        let t = kps(&[(25.0, 10.0)]);
        let m = match_points(&r, &t, &h, D, &eps4()).unwrap();
        assert_eq!((m.n_ref, m.n_rep), (1, 1));
        assert_eq!(m.pairs[0].reference, 1);
    }

    #[test]
    fn bad_epsilon() {
        assert!(MatchCriterion::new(0.0f64).is_err());
        assert!(MatchCriterion::new(f64::NAN).is_err());
        let crit = MatchCriterion {
            epsilon: -1.0,
            scale_gate: None,
        };
        assert!(matches!(
            match_points(&kps(&[(1.0, 1.0)]), &[], &Homography::identity(), D, &crit),
            Err(RepeatabilityError::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn scale_gate() {
        let r = vec![Keypoint::new(10.0, 10.0, 2.0, 0.0).unwrap()];
        let t = vec![Keypoint::new(10.0, 10.0, 4.0, 0.0).unwrap()];
        let id = Homography::identity();
        assert_eq!(match_points(&r, &t, &id, D, &eps4()).unwrap().n_rep, 1);
        let gated = eps4().with_scale_gate(DEFAULT_SCALE_GATE).unwrap();
        assert_eq!(match_points(&r, &t, &id, D, &gated).unwrap().n_rep, 0);
        let t2 = vec![Keypoint::new(10.0, 10.0, 2.9, 0.0).unwrap()];
        assert_eq!(match_points(&r, &t2, &id, D, &gated).unwrap().n_rep, 1);
    }

    #[test]
    fn greedy_takes_closest_pair_first() {
        // ref 0 is 1px from target 0; ref 1 is 0.5px from target 0 and 3px from target 1
        let r = kps(&[(10.0, 10.0), (11.5, 10.0)]);
        let t = kps(&[(11.0, 10.0), (14.5, 10.0)]);
        let m = match_points(&r, &t, &Homography::identity(), D, &eps4()).unwrap();
        assert_eq!(m.pairs[0].reference, 1);
        assert_eq!(m.pairs[0].target, 0);
        assert_eq!(m.n_rep, 1);
    }

    fn two_scene_store(amounts: &[f64]) -> (Vec<SceneGeometry<f64>>, KeypointStore<f64>) {
        let mut scenes = vec![];
        let mut store = KeypointStore::new();
        for (s, pts) in [("b", vec![(10.0, 10.0), (30.0, 30.0)]), ("a", vec![(50.0, 50.0)])] {
            scenes.push(SceneGeometry {
                scene_id: s.into(),
                variants: amounts
                    .iter()
                    .map(|&a| VariantGeometry {
                        amount: a,
                        dims: D,
                        homography: Homography::identity(),
                    })
                    .collect(),
            });
            for k in 0..amounts.len() {
                let drop = k.min(pts.len());
                store.insert(
                    ImageRef {
                        scene_id: s.into(),
                        variant: k,
                    },
                    set(s, k, &pts[..pts.len() - drop]),
                );
            }
        }
        (scenes, store)
    }

    #[test]
    fn matrix_rows_sorted_and_first_column_one() {
        let (scenes, store) = two_scene_store(&[0.0, 1.0, 2.0]);
        let m = build_matrix(&scenes, &store, &eps4(), "det", TransformKind::Blur).unwrap();
        assert_eq!(m.scene_ids(), &["a".to_string(), "b".to_string()]);
        assert_eq!(m.column(0), vec![1.0, 1.0]);
        assert_eq!(m.row(1), &[1.0, 0.5, 0.0]);
        assert_eq!(m.row(0), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn matrix_excludes_empty_reference() {
        let amounts = [0.0, 1.0];
        let (mut scenes, mut store) = two_scene_store(&amounts);
        scenes.push(SceneGeometry {
            scene_id: "blank".into(),
            variants: scenes[0].variants.clone(),
        });
        for k in 0..2 {
            store.insert(
                ImageRef {
                    scene_id: "blank".into(),
                    variant: k,
                },
                set("blank", k, &[]),
            );
        }
        let m = build_matrix(&scenes, &store, &eps4(), "det", TransformKind::Blur).unwrap();
        assert_eq!(m.n_scenes(), 2);
        assert_eq!(m.excluded(), &["blank".to_string()]);
    }

    #[test]
    fn matrix_errors() {
        let (scenes, mut store) = two_scene_store(&[0.0, 1.0]);
        store.remove(&ImageRef {
            scene_id: "a".into(),
            variant: 1,
        });
        assert!(matches!(
            build_matrix(&scenes, &store, &eps4(), "det", TransformKind::Blur),
            Err(RepeatabilityError::MissingKeypoints(_))
        ));
        let (mut scenes, store) = two_scene_store(&[0.0, 1.0]);
        scenes[1].variants[1].amount = 2.0;
        assert!(matches!(
            build_matrix(&scenes, &store, &eps4(), "det", TransformKind::Blur),
            Err(RepeatabilityError::AmountMismatch { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let m = RepeatabilityMatrix::from_rows(
            "det",
            TransformKind::Blur,
            vec![0.0, 0.5, 4.5],
            vec!["s1".into(), "s2".into()],
            vec![vec![1.0, 0.3333333333333333, 0.1], vec![1.0, 0.0, 0.7]],
            vec!["s3".into()],
        )
        .unwrap();
        let csv = m.to_csv();
        assert!(csv.starts_with("scene_id,0,0.5,4.5\ns1,1,0.3333333333333333,0.1\n"));
        let back = RepeatabilityMatrix::from_csv(&csv, "det", TransformKind::Blur, vec!["s3".into()]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn matrix_validation() {
        let mk = |rows: Vec<Vec<f64>>| {
            RepeatabilityMatrix::from_rows("d", TransformKind::Jpeg, vec![0.0, 1.0], vec!["x".into()], rows, vec![])
        };
        assert!(mk(vec![vec![1.0, 1.5]]).is_err());
        assert!(mk(vec![vec![1.0]]).is_err());
        assert!(mk(vec![]).is_err());
        assert!(mk(vec![vec![1.0, 0.2]]).is_ok());
    }

    proptest! {
        #[test]
        fn score_monotone_in_epsilon(
            r in proptest::collection::vec((0.0f64..99.0, 0.0f64..99.0), 1..15),
            t in proptest::collection::vec((0.0f64..99.0, 0.0f64..99.0), 0..15),
            e1 in 0.1f64..20.0, e2 in 0.1f64..20.0,
        ) {
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let (r, t) = (kps(&r), kps(&t));
            let id = Homography::identity();
            let a = match_points(&r, &t, &id, D, &MatchCriterion::new(lo).unwrap()).unwrap();
            let b = match_points(&r, &t, &id, D, &MatchCriterion::new(hi).unwrap()).unwrap();
            prop_assert!(a.score <= b.score);
        }

        #[test]
        fn matching_is_one_to_one(
            r in proptest::collection::vec((0.0f64..30.0, 0.0f64..30.0), 1..20),
            t in proptest::collection::vec((0.0f64..30.0, 0.0f64..30.0), 0..20),
        ) {
            let m = match_points(&kps(&r), &kps(&t), &Homography::identity(), D, &eps4()).unwrap();
            let refs: BTreeSet<_> = m.pairs.iter().map(|p| p.reference).collect();
            let tgts: BTreeSet<_> = m.pairs.iter().map(|p| p.target).collect();
            prop_assert_eq!(refs.len(), m.n_rep);
            prop_assert_eq!(tgts.len(), m.n_rep);
            prop_assert!(m.n_rep <= m.n_ref);
            prop_assert!((0.0..=1.0).contains(&m.score));
            prop_assert_eq!(m.score == 1.0, m.n_rep == m.n_ref);
        }
    }
}
