//! Keypoints, the built-in reference detectors and external keypoint files.
//!
//! The two built-in detectors exist so the whole pipeline runs without
//! third-party binaries. Anything else enters through [`formats`].

mod dog;
pub mod formats;
mod harris;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Dims, Point};
use crate::scalar::Real;

pub use dog::{detect_dog, DogParams};
pub use formats::{
    emit_csv, emit_oxford, ingest_keypoints, parse_csv, parse_oxford, KeypointFormat, KeypointFormatError,
};
pub use harris::{detect_harris, HarrisParams, HarrisThreshold};

#[derive(Debug, Error)]
pub enum DetectorError {
    #[error("image is {width}x{height}, detector needs at least {min}x{min}")]
    ImageTooSmall { width: usize, height: usize, min: usize },
    #[error("invalid detector parameter: {0}")]
    InvalidParams(String),
    #[error("keypoint scale must be finite and positive, got {0}")]
    InvalidScale(f64),
    #[error("ellipse ({a}, {b}, {c}) is not positive definite")]
    NotPositiveDefinite { a: f64, b: f64, c: f64 },
    #[error("non-finite keypoint value")]
    NonFinite,
    #[error("keypoint ({x}, {y}) outside {width}x{height} image")]
    OutOfBounds {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: KeypointFormatError,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Second-moment ellipse `a(x-u)^2 + 2b(x-u)(y-v) + c(y-v)^2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> Ellipse<T> {
    pub fn new(a: T, b: T, c: T) -> Result<Self, DetectorError> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(DetectorError::NonFinite);
        }
        if a <= T::zero() || c <= T::zero() || a * c - b * b <= T::zero() {
            return Err(DetectorError::NotPositiveDefinite {
                a: a.to_f64_lossy(),
                b: b.to_f64_lossy(),
                c: c.to_f64_lossy(),
            });
        }
        Ok(Self { a, b, c })
    }

    /// Radius of the circle with the same area: `(ac - b^2)^(-1/4)`.
    pub fn equivalent_radius(&self) -> T {
        let det = self.a * self.c - self.b * self.b;
        T::one() / det.sqrt().sqrt()
    }

    /// Circle of radius `r`.
    pub fn circle(r: T) -> Self {
        let a = T::one() / (r * r);
        Self { a, b: T::zero(), c: a }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Keypoint<T> {
    pub x: T,
    pub y: T,
    /// Radius of the equivalent circular region, pixels.
    pub scale: T,
    /// Detector-specific strength; only used for ordering.
    pub response: T,
    pub ellipse: Option<Ellipse<T>>,
}

impl<T: Real> Keypoint<T> {
    pub fn new(x: T, y: T, scale: T, response: T) -> Result<Self, DetectorError> {
        if !(x.is_finite() && y.is_finite() && response.is_finite()) {
            return Err(DetectorError::NonFinite);
        }
        if !(scale.is_finite() && scale > T::zero()) {
            return Err(DetectorError::InvalidScale(scale.to_f64_lossy()));
        }
        Ok(Self {
            x,
            y,
            scale,
            response,
            ellipse: None,
        })
    }

    /// Keypoint whose scale is derived from its ellipse.
    pub fn from_ellipse(x: T, y: T, ellipse: Ellipse<T>, response: T) -> Result<Self, DetectorError> {
        let mut kp = Self::new(x, y, ellipse.equivalent_radius(), response)?;
        kp.ellipse = Some(ellipse);
        Ok(kp)
    }

    pub fn location(&self) -> Point<T> {
        Point::new(self.x, self.y)
    }
}

/// Which image a keypoint set belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ImageRef {
    pub scene_id: String,
    pub variant: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeypointSet<T> {
    pub image_ref: ImageRef,
    pub detector_id: String,
    pub points: Vec<Keypoint<T>>,
}

impl<T: Real> KeypointSet<T> {
    pub fn new(image_ref: ImageRef, detector_id: impl Into<String>, points: Vec<Keypoint<T>>) -> Self {
        Self {
            image_ref,
            detector_id: detector_id.into(),
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every point must lie inside `dims`.
    pub fn check_bounds(&self, dims: Dims) -> Result<(), DetectorError> {
        match self.points.iter().find(|p| !dims.contains(p.x, p.y)) {
            None => Ok(()),
            Some(p) => Err(DetectorError::OutOfBounds {
                x: p.x.to_f64_lossy(),
                y: p.y.to_f64_lossy(),
                width: dims.width,
                height: dims.height,
            }),
        }
    }
}

/// Descending `key`, ties broken by (y, x) ascending.
pub(crate) fn sort_by_strength<T: Real>(points: &mut [Keypoint<T>], key: impl Fn(&Keypoint<T>) -> T) {
    points.sort_by(|p, q| {
        key(q)
            .total_cmp_real(&key(p))
            .then_with(|| p.y.total_cmp_real(&q.y))
            .then_with(|| p.x.total_cmp_real(&q.x))
    });
}

/// Vertex offset of a parabola through three samples, clamped to half a pixel.
pub(crate) fn parabolic_offset<T: Real>(left: T, center: T, right: T) -> T {
    let denom = left - T::c(2.0) * center + right;
    if denom == T::zero() || !denom.is_finite() {
        return T::zero();
    }
    let half = T::c(0.5);
    let off = half * (left - right) / denom;
    off.max(-half).min(half)
}

pub(crate) fn require_size(width: usize, height: usize, min: usize) -> Result<(), DetectorError> {
    if width < min || height < min {
        Err(DetectorError::ImageTooSmall { width, height, min })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_scale() {
        let e = Ellipse::new(0.01f64, 0.0, 0.01).unwrap();
        assert_eq!(e.equivalent_radius(), 10.0);
        let c = Ellipse::<f64>::circle(4.0);
        assert!((c.equivalent_radius() - 4.0).abs() < 1e-12);
        assert!(Ellipse::new(1.0f64, 2.0, 1.0).is_err());
        assert!(Ellipse::new(-1.0f64, 0.0, 1.0).is_err());
    }

    #[test]
    fn keypoint_validation() {
        assert!(Keypoint::new(1.0f32, 2.0, 0.0, 1.0).is_err());
        assert!(Keypoint::new(f64::NAN, 2.0, 1.0, 1.0).is_err());
        let kp = Keypoint::from_ellipse(3.0, 4.0, Ellipse::new(0.25f64, 0.0, 0.25).unwrap(), 0.0).unwrap();
        assert_eq!(kp.scale, 2.0);
    }

    #[test]
    fn ordering_is_deterministic() {
        let mk = |x, y, r| Keypoint::new(x, y, 1.0f64, r).unwrap();
        let mut pts = vec![
            mk(5.0, 1.0, 1.0),
            mk(2.0, 1.0, 1.0),
            mk(0.0, 0.0, 2.0),
            mk(9.0, 0.0, 1.0),
        ];
        sort_by_strength(&mut pts, |p| p.response);
        let order: Vec<(f64, f64)> = pts.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(order, vec![(0.0, 0.0), (9.0, 0.0), (2.0, 1.0), (5.0, 1.0)]);
    }

    #[test]
    fn bounds_check() {
        let set = KeypointSet::new(
            ImageRef {
                scene_id: "a".into(),
                variant: 0,
            },
            "t",
            vec![Keypoint::new(9.0f64, 0.0, 1.0, 0.0).unwrap()],
        );
        assert!(set.check_bounds(Dims::new(10, 10)).is_ok());
        assert!(set.check_bounds(Dims::new(9, 10)).is_err());
    }
}
