use crate::filter::Plane;
use crate::imaging::Image;
use crate::scalar::Real;

use super::{parabolic_offset, require_size, sort_by_strength, DetectorError, ImageRef, Keypoint, KeypointSet};

pub const HARRIS_MIN_SIZE: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HarrisThreshold {
    /// Fraction of the largest response in the image.
    Relative(f64),
    /// Fixed response value (intensities scaled to [0, 1]).
    Absolute(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarrisParams {
    /// Derivative smoothing sigma.
    pub sigma_d: f64,
    /// Structure tensor integration sigma.
    pub sigma_i: f64,
    pub k: f64,
    pub threshold: HarrisThreshold,
    pub nms_radius: usize,
}

impl Default for HarrisParams {
    fn default() -> Self {
        Self {
            sigma_d: 1.0,
            sigma_i: 2.0,
            k: 0.06,
            threshold: HarrisThreshold::Relative(0.01),
            nms_radius: 5,
        }
    }
}

impl HarrisParams {
    pub fn validate(&self) -> Result<(), DetectorError> {
        let bad = |m: &str| Err(DetectorError::InvalidParams(m.to_string()));
        if !(self.sigma_d > 0.0 && self.sigma_d.is_finite()) {
            return bad("sigma_d must be positive");
        }
        if !(self.sigma_i > 0.0 && self.sigma_i.is_finite()) {
            return bad("sigma_i must be positive");
        }
        if !(self.k > 0.0 && self.k < 0.25) {
            return bad("k must lie in (0, 0.25)");
        }
        if self.nms_radius == 0 {
            return bad("nms_radius must be at least 1");
        }
        match self.threshold {
            HarrisThreshold::Relative(r) if !(0.0..=1.0).contains(&r) => bad("relative threshold must lie in [0, 1]"),
            HarrisThreshold::Absolute(a) if !a.is_finite() => bad("absolute threshold must be finite"),
            _ => Ok(()),
        }
    }
}

/// Harris response `det(M) - k trace(M)^2` over the smoothed structure tensor.
pub(crate) fn harris_response<T: Real>(img: &Image, params: &HarrisParams) -> Plane<T> {
    let smoothed = img.to_plane::<T>().gaussian(params.sigma_d);
    let (w, h) = (smoothed.width, smoothed.height);
    let half = T::c(0.5);
    let mut ixx = Plane::zeros(w, h);
    let mut iyy = Plane::zeros(w, h);
    let mut ixy = Plane::zeros(w, h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let gx = (smoothed.at_clamped(x + 1, y) - smoothed.at_clamped(x - 1, y)) * half;
            let gy = (smoothed.at_clamped(x, y + 1) - smoothed.at_clamped(x, y - 1)) * half;
            let i = y as usize * w + x as usize;
            ixx.data[i] = gx * gx;
            iyy.data[i] = gy * gy;
            ixy.data[i] = gx * gy;
        }
    }
    let (ixx, iyy, ixy) = (
        ixx.gaussian(params.sigma_i),
        iyy.gaussian(params.sigma_i),
        ixy.gaussian(params.sigma_i),
    );
    let k = T::c(params.k);
    let data = (0..w * h)
        .map(|i| {
            let (a, b, c) = (ixx.data[i], ixy.data[i], iyy.data[i]);
            let tr = a + c;
            a * c - b * b - k * tr * tr
        })
        .collect();
    Plane::new(w, h, data)
}

/// True when `(x, y)` wins its disc of radius `r`; equal values go to the
/// lexicographically first (y, x).
pub(crate) fn is_local_max<T: Real>(map: &Plane<T>, x: usize, y: usize, r: usize) -> bool {
    let v = map.at(x, y);
    let r = r as i64;
    let (x, y) = (x as i64, y as i64);
    for dy in -r..=r {
        let ny = y + dy;
        if ny < 0 || ny >= map.height as i64 {
            continue;
        }
        for dx in -r..=r {
            let nx = x + dx;
            if (dx == 0 && dy == 0) || nx < 0 || nx >= map.width as i64 || dx * dx + dy * dy > r * r {
                continue;
            }
            let n = map.at(nx as usize, ny as usize);
            if n > v || (n == v && (ny, nx) < (y, x)) {
                return false;
            }
        }
    }
    true
}

/// Harris corners with non-maximum suppression and sub-pixel peak refinement.
///
/// Scale is fixed at `2 sigma_i`; output is sorted by descending response.
pub fn detect_harris<T: Real>(
    img: &Image,
    params: &HarrisParams,
    image_ref: ImageRef,
) -> Result<KeypointSet<T>, DetectorError> {
    require_size(img.width(), img.height(), HARRIS_MIN_SIZE)?;
    params.validate()?;
    let response = harris_response::<T>(img, params);
    let max = response.data.iter().copied().fold(T::neg_infinity(), T::max);
    let threshold = match params.threshold {
        HarrisThreshold::Relative(r) => T::c(r) * max,
        HarrisThreshold::Absolute(a) => T::c(a),
    };
    let mut points = Vec::new();
    if max > T::zero() {
        let (w, h) = (response.width, response.height);
        let scale = T::c(2.0 * params.sigma_i);
        let max_x = T::c((w - 1) as f64);
        let max_y = T::c((h - 1) as f64);
        for y in 0..h {
            for x in 0..w {
                let v = response.at(x, y);
                if v <= threshold || v <= T::zero() || !is_local_max(&response, x, y, params.nms_radius) {
                    continue;
                }
                let (xi, yi) = (x as i64, y as i64);
                let ox = parabolic_offset(response.at_clamped(xi - 1, yi), v, response.at_clamped(xi + 1, yi));
                let oy = parabolic_offset(response.at_clamped(xi, yi - 1), v, response.at_clamped(xi, yi + 1));
                let px = (T::c(x as f64) + ox).max(T::zero()).min(max_x);
                let py = (T::c(y as f64) + oy).max(T::zero()).min(max_y);
                points.push(Keypoint::new(px, py, scale, v)?);
            }
        }
    }
    sort_by_strength(&mut points, |p| p.response);
    Ok(KeypointSet::new(image_ref, "harris", points))
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

    fn square() -> Image {
        Image::from_fn(64, 64, |x, y| {
            if (16..48).contains(&x) && (16..48).contains(&y) {
                255
            } else {
                0
            }
        })
        .unwrap()
    }

    /// Exhaustive scan: strict maxima of the response map inside the
    /// suppression disc, above the relative threshold.
    fn brute_force_maxima(map: &Plane<f64>, r: i64, rel: f64) -> Vec<(usize, usize)> {
        let max = map.data.iter().cloned().fold(f64::MIN, f64::max);
        let mut out = Vec::new();
        for y in 0..map.height {
            for x in 0..map.width {
                let v = map.at(x, y);
                if v <= rel * max {
                    continue;
                }
                let mut best = true;
                for yy in 0..map.height {
                    for xx in 0..map.width {
                        let (dx, dy) = (xx as i64 - x as i64, yy as i64 - y as i64);
                        if (dx, dy) != (0, 0) && dx * dx + dy * dy <= r * r {
                            let n = map.at(xx, yy);
                            if n > v || (n == v && (yy, xx) < (y, x)) {
                                best = false;
                            }
                        }
                    }
                }
                if best {
                    out.push((x, y));
                }
            }
        }
        out
    }

    #[test]
    fn constant_image_has_no_corners() {
        let img = Image::filled(32, 32, 90).unwrap();
        let set = detect_harris::<f64>(&img, &HarrisParams::default(), iref()).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn white_square_has_four_corners() {
        let img = square();
        let params = HarrisParams::default();
        let set = detect_harris::<f64>(&img, &params, iref()).unwrap();
        let oracle = brute_force_maxima(&harris_response::<f64>(&img, &params), 5, 0.01);
        assert_eq!(oracle.len(), 4);
        assert_eq!(set.len(), 4, "{:?}", set.points);
        for (cx, cy) in [(15.5, 15.5), (47.5, 15.5), (15.5, 47.5), (47.5, 47.5)] {
            assert!(
                set.points.iter().any(|p| (p.x - cx).hypot(p.y - cy) <= 2.0),
                "no keypoint near ({cx}, {cy})"
            );
        }
        assert!(set.points.iter().all(|p| p.scale == 4.0));
    }

    #[test]
    fn checkerboard_crossings() {
        let img = Image::from_fn(64, 64, |x, y| if (x / 8 + y / 8) % 2 == 0 { 255 } else { 0 }).unwrap();
        let params = HarrisParams::default();
        let set = detect_harris::<f64>(&img, &params, iref()).unwrap();
        let oracle = brute_force_maxima(&harris_response::<f64>(&img, &params), 5, 0.01);
        assert_eq!(oracle.len(), set.len());
        for gy in 1..8 {
            for gx in 1..8 {
                let (cx, cy) = (gx as f64 * 8.0 - 0.5, gy as f64 * 8.0 - 0.5);
                let near = set.points.iter().filter(|p| (p.x - cx).hypot(p.y - cy) <= 2.0).count();
                assert_eq!(near, 1, "crossing ({cx}, {cy})");
            }
        }
    }

    #[test]
    fn too_small_and_bad_params() {
        let img = Image::filled(15, 40, 0).unwrap();
        assert!(matches!(
            detect_harris::<f64>(&img, &HarrisParams::default(), iref()),
            Err(DetectorError::ImageTooSmall { .. })
        ));
        let img = square();
        let params = HarrisParams {
            k: 0.5,
            ..Default::default()
        };
        assert!(detect_harris::<f64>(&img, &params, iref()).is_err());
    }

    #[test]
    fn sorted_by_descending_response() {
        let img = Image::from_fn(64, 64, |x, y| ((x * 7 + y * 13) % 29 * 8) as u8).unwrap();
        let set = detect_harris::<f32>(&img, &HarrisParams::default(), iref()).unwrap();
        assert!(set.points.windows(2).all(|w| w[0].response >= w[1].response));
    }
}
