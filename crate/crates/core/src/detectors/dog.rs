use crate::filter::Plane;
use crate::imaging::Image;
use crate::scalar::Real;

use super::{parabolic_offset, require_size, sort_by_strength, DetectorError, ImageRef, Keypoint, KeypointSet};

pub const DOG_MIN_SIZE: usize = 32;
const BASE_SIGMA: f64 = 1.6;
/// Blur assumed already present in the input image.
const INPUT_SIGMA: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DogParams {
    pub octaves: usize,
    pub scales_per_octave: usize,
    /// Minimum |DoG| with intensities scaled to [0, 1].
    pub contrast_threshold: f64,
    /// Maximum ratio of principal curvatures.
    pub edge_ratio: f64,
}

impl Default for DogParams {
    fn default() -> Self {
        Self {
            octaves: 3,
            scales_per_octave: 3,
            contrast_threshold: 0.03,
            edge_ratio: 10.0,
        }
    }
}

impl DogParams {
    pub fn validate(&self) -> Result<(), DetectorError> {
        let bad = |m: &str| Err(DetectorError::InvalidParams(m.to_string()));
        if self.octaves == 0 || self.scales_per_octave == 0 {
            return bad("octaves and scales_per_octave must be at least 1");
        }
        if !(self.contrast_threshold >= 0.0 && self.contrast_threshold.is_finite()) {
            return bad("contrast_threshold must be non-negative");
        }
        if !(self.edge_ratio > 1.0 && self.edge_ratio.is_finite()) {
            return bad("edge_ratio must exceed 1");
        }
        Ok(())
    }

    /// Sigma of Gaussian level `i`: `1.6 * 2^(i / s)`.
    pub fn level_sigma(&self, i: usize) -> f64 {
        BASE_SIGMA * 2f64.powf(i as f64 / self.scales_per_octave as f64)
    }
}

/// Difference-of-Gaussians stack at full resolution.
///
/// Octaves are not decimated, so detections are exactly covariant with
/// integer translations.
pub(crate) fn dog_stack<T: Real>(img: &Image, params: &DogParams) -> Vec<Plane<T>> {
    let n_gauss = params.octaves * params.scales_per_octave + 3;
    let mut gauss = Vec::with_capacity(n_gauss);
    let pre = (BASE_SIGMA * BASE_SIGMA - INPUT_SIGMA * INPUT_SIGMA).sqrt();
    gauss.push(img.to_plane::<T>().gaussian(pre));
    for i in 1..n_gauss {
        let (prev, cur) = (params.level_sigma(i - 1), params.level_sigma(i));
        let step = (cur * cur - prev * prev).sqrt();
        let next = gauss[i - 1].gaussian(step);
        gauss.push(next);
    }
    gauss
        .windows(2)
        .map(|g| {
            let data = g[1].data.iter().zip(&g[0].data).map(|(&a, &b)| a - b).collect();
            Plane::new(g[0].width, g[0].height, data)
        })
        .collect()
}

fn is_extremum<T: Real>(stack: &[Plane<T>], level: usize, x: usize, y: usize) -> bool {
    let v = stack[level].at(x, y);
    let positive = v > T::zero();
    for plane in &stack[level - 1..=level + 1] {
        for ny in y - 1..=y + 1 {
            for nx in x - 1..=x + 1 {
                if std::ptr::eq(plane, &stack[level]) && nx == x && ny == y {
                    continue;
                }
                let n = plane.at(nx, ny);
                if (positive && n >= v) || (!positive && n <= v) {
                    return false;
                }
            }
        }
    }
    true
}

/// Scale-space extrema of the DoG stack, contrast- and edge-filtered.
///
/// Keypoint scale is `1.6 * 2^(octave + level / scales_per_octave)`; output is
/// sorted by descending |response|.
pub fn detect_dog<T: Real>(
    img: &Image,
    params: &DogParams,
    image_ref: ImageRef,
) -> Result<KeypointSet<T>, DetectorError> {
    require_size(img.width(), img.height(), DOG_MIN_SIZE)?;
    params.validate()?;
    let stack = dog_stack::<T>(img, params);
    let (w, h) = (img.width(), img.height());
    let contrast = T::c(params.contrast_threshold);
    let r = params.edge_ratio;
    let edge_limit = T::c((r + 1.0) * (r + 1.0) / r);
    let two = T::c(2.0);
    let quarter = T::c(0.25);
    let mut points = Vec::new();
    for level in 1..stack.len() - 1 {
        let d = &stack[level];
        let scale = T::c(params.level_sigma(level));
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let v = d.at(x, y);
                if v.abs() <= contrast || !is_extremum(&stack, level, x, y) {
                    continue;
                }
                let dxx = d.at(x + 1, y) + d.at(x - 1, y) - two * v;
                let dyy = d.at(x, y + 1) + d.at(x, y - 1) - two * v;
                let dxy = (d.at(x + 1, y + 1) - d.at(x + 1, y - 1) - d.at(x - 1, y + 1) + d.at(x - 1, y - 1)) * quarter;
                let tr = dxx + dyy;
                let det = dxx * dyy - dxy * dxy;
                if det <= T::zero() || tr * tr / det >= edge_limit {
                    continue;
                }
                let ox = parabolic_offset(d.at(x - 1, y), v, d.at(x + 1, y));
                let oy = parabolic_offset(d.at(x, y - 1), v, d.at(x, y + 1));
                points.push(Keypoint::new(T::c(x as f64) + ox, T::c(y as f64) + oy, scale, v)?);
            }
        }
    }
    sort_by_strength(&mut points, |p| p.response.abs());
    Ok(KeypointSet::new(image_ref, "dog", points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iref() -> ImageRef {
        ImageRef {
            scene_id: "t".into(),
            variant: 0,
        }
    }

    fn blobs(n: usize, spec: &[(f64, f64, f64)]) -> Image {
        Image::from_fn(n, n, |x, y| {
            let v: f64 = spec
                .iter()
                .map(|&(cx, cy, s)| {
                    let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                    255.0 * (-r2 / (2.0 * s * s)).exp()
                })
                .sum();
            v.round().min(255.0) as u8
        })
        .unwrap()
    }

    /// Exhaustive scan over all 26-neighborhoods, no filtering shortcuts,
    /// returning (level, x, y) of contrast-passing strict extrema.
    fn scan_extrema(stack: &[Plane<f64>], contrast: f64) -> Vec<(usize, usize, usize)> {
        let mut out = vec![];
        for l in 1..stack.len() - 1 {
            let (w, h) = (stack[l].width, stack[l].height);
            for y in 1..h - 1 {
                for x in 1..w - 1 {
                    let v = stack[l].at(x, y);
                    if v.abs() <= contrast {
                        continue;
                    }
                    let (mut is_max, mut is_min) = (true, true);
                    for (ll, plane) in stack.iter().enumerate().take(l + 2).skip(l - 1) {
                        for yy in y - 1..=y + 1 {
                            for xx in x - 1..=x + 1 {
                                if (ll, xx, yy) != (l, x, y) {
                                    let n = plane.at(xx, yy);
                                    is_max &= n < v;
                                    is_min &= n > v;
                                }
                            }
                        }
                        if !is_max && !is_min {
                            break;
                        }
                    }
                    if is_max || is_min {
                        out.push((l, x, y));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn constant_image_is_empty() {
        let img = Image::filled(48, 48, 120).unwrap();
        assert!(detect_dog::<f64>(&img, &DogParams::default(), iref())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn single_blob() {
        let img = blobs(128, &[(64.0, 64.0, 4.0)]);
        let params = DogParams::default();
        let oracle = scan_extrema(&dog_stack::<f64>(&img, &params), params.contrast_threshold);
        assert_eq!(oracle.len(), 1, "{oracle:?}");
        let set = detect_dog::<f64>(&img, &params, iref()).unwrap();
        assert_eq!(set.len(), 1, "{:?}", set.points);
        let p = set.points[0];
        assert!((p.x - 64.0).hypot(p.y - 64.0) <= 3.0);
        assert!(p.response < 0.0, "bright blob is a DoG minimum");
    }

    #[test]
    fn two_blobs_order_by_scale() {
        let img = blobs(160, &[(45.0, 80.0, 3.0), (110.0, 80.0, 6.0)]);
        let set = detect_dog::<f64>(&img, &DogParams::default(), iref()).unwrap();
        assert_eq!(set.len(), 2, "{:?}", set.points);
        let small = set
            .points
            .iter()
            .find(|p| (p.x - 45.0).abs() < 3.0)
            .expect("small blob");
        let large = set
            .points
            .iter()
            .find(|p| (p.x - 110.0).abs() < 3.0)
            .expect("large blob");
        assert!(large.scale > small.scale);
    }

    #[test]
    fn scale_formula() {
        let p = DogParams::default();
        assert_eq!(p.level_sigma(0), 1.6);
        assert!((p.level_sigma(3) - 3.2).abs() < 1e-12);
        assert!((p.level_sigma(4) - 1.6 * 2f64.powf(1.0 + 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn precondition() {
        let img = Image::filled(31, 64, 0).unwrap();
        assert!(detect_dog::<f64>(&img, &DogParams::default(), iref()).is_err());
        let img = Image::filled(64, 64, 0).unwrap();
        let bad = DogParams {
            edge_ratio: 0.5,
            ..Default::default()
        };
        assert!(detect_dog::<f64>(&img, &bad, iref()).is_err());
    }
}
