//! Seeded textured reference images for runs without a scene database.

use featbounds_core::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn synthetic_scene_id(index: usize) -> String {
    format!("synth{index:03}")
}

/// Overlapping rectangles and discs on a shallow gradient, with light noise.
/// Scene `index` draws from its own stream of the seeded generator, so the
/// result does not depend on which other scenes are generated.
pub fn textured_scene(seed: u64, index: usize, width: usize, height: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let (w, h) = (width as f64, height as f64);
    let gx = rng.random_range(-40.0..40.0) / w;
    let gy = rng.random_range(-40.0..40.0) / h;
    let base = rng.random_range(90.0..160.0);
    let mut px: Vec<f64> = (0..width * height)
        .map(|i| base + gx * (i % width) as f64 + gy * (i / width) as f64)
        .collect();

    let shapes = (width * height / 700).max(12);
    for _ in 0..shapes {
        let value = rng.random_range(15.0..240.0);
        let cx = rng.random_range(0.0..w);
        let cy = rng.random_range(0.0..h);
        if rng.random_bool(0.5) {
            let hw = rng.random_range(3.0..w / 8.0);
            let hh = rng.random_range(3.0..h / 8.0);
            for y in (cy - hh).max(0.0) as usize..((cy + hh) as usize).min(height) {
                for x in (cx - hw).max(0.0) as usize..((cx + hw) as usize).min(width) {
                    px[y * width + x] = value;
                }
            }
        } else {
            let r = rng.random_range(3.0..w.min(h) / 8.0);
            for y in (cy - r).max(0.0) as usize..((cy + r) as usize + 1).min(height) {
                for x in (cx - r).max(0.0) as usize..((cx + r) as usize + 1).min(width) {
                    if (x as f64 - cx).hypot(y as f64 - cy) <= r {
                        px[y * width + x] = value;
                    }
                }
            }
        }
    }
    let pixels = px
        .into_iter()
        .map(|v| featbounds_core::round_to_u8(v + rng.random_range(-3.0..3.0)))
        .collect();
    Image::new(width, height, pixels).expect("synthetic dimensions are positive")
}
