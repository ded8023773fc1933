mod support;

use featbounds_core::bounds::BoundsCurves;
use featbounds_core::detectors::{detect_harris, HarrisParams};
use featbounds_core::imaging::synthesize_sequence;
use featbounds_core::mcnemar::{default_thresholds, z_grid};
use featbounds_core::repeatability::{build_matrix, KeypointStore, MatchCriterion, SceneGeometry};
use featbounds_core::{ImageRef, TransformKind, TransformSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::textured_image;

fn run(kind: TransformKind, params: &HarrisParams, id: &str) -> featbounds_core::RepeatabilityMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let spec = TransformSpec::default_for(kind);
    let mut scenes = Vec::new();
    let mut store = KeypointStore::new();
    for s in 0..4 {
        let scene_id = format!("scene{s}");
        let seq = synthesize_sequence(&textured_image(&mut rng, 96, 96), &spec, &scene_id).unwrap();
        for (k, v) in seq.variants.iter().enumerate() {
            let r = ImageRef {
                scene_id: scene_id.clone(),
                variant: k,
            };
            let mut set = detect_harris::<f64>(&v.image, params, r.clone()).unwrap();
            set.detector_id = id.to_string();
            store.insert(r, set);
        }
        scenes.push(SceneGeometry::from_sequence(&seq));
    }
    build_matrix(&scenes, &store, &MatchCriterion::default(), id, kind).unwrap()
}

#[test]
fn blur_pipeline_end_to_end() {
    let m = run(TransformKind::Blur, &HarrisParams::default(), "harris");
    assert_eq!((m.n_scenes(), m.n_amounts()), (4, 10));
    assert!(m.column(0).iter().all(|&v| v == 1.0));
    let c = BoundsCurves::from_matrix(&m).unwrap();
    assert!(c.median_curve[9] < c.median_curve[1]);
    assert!(c.guarantee_area + c.operating_area <= 1.0);
}

#[test]
fn comparison_of_two_configurations() {
    let a = run(TransformKind::Brightness, &HarrisParams::default(), "harris");
    let tight = HarrisParams {
        nms_radius: 2,
        ..Default::default()
    };
    let b = run(TransformKind::Brightness, &tight, "harris-nms2");
    let g = z_grid(&a, &b, &default_thresholds()).unwrap();
    assert_eq!((g.n_thresholds(), g.n_amounts()), (9, 14));
    // four scenes can never be reliable
    assert!(g.cells().iter().all(|c| !c.reliable && c.p.is_none()));
}
