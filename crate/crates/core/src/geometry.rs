//! Homographies, point projection and common-region tests.
//!
//! Image coordinates: origin at the top-left pixel center, x grows to the
//! right and y grows downward. A pixel grid of `w x h` therefore covers
//! `[0, w - 1] x [0, h - 1]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

const DEGENERATE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("homography is singular (normalized |det| <= 1e-12)")]
    Singular,
    #[error("homography has non-finite entries")]
    NonFiniteMatrix,
    #[error("point ({0}, {1}) is not finite")]
    NonFinitePoint(f64, f64),
    #[error("point maps to infinity (|w| < 1e-12)")]
    AtInfinity,
    #[error("point ({0}, {1}) lies outside the reference image")]
    OutsideReference(f64, f64),
    #[error("malformed homography text: {0}")]
    Parse(String),
}

/// Image extent in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
}

impl Dims {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    /// True when `(x, y)` lies in `[0, w - 1] x [0, h - 1]`.
    pub fn contains<T: Real>(&self, x: T, y: T) -> bool {
        let max_x = T::c(self.width as f64 - 1.0);
        let max_y = T::c(self.height as f64 - 1.0);
        x >= T::zero() && y >= T::zero() && x <= max_x && y <= max_y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point<T>) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn check_finite(&self) -> Result<(), GeometryError> {
        if self.x.is_finite() && self.y.is_finite() {
            Ok(())
        } else {
            Err(GeometryError::NonFinitePoint(
                self.x.to_f64_lossy(),
                self.y.to_f64_lossy(),
            ))
        }
    }
}

/// Invertible 3x3 projective map, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography<T> {
    m: [T; 9],
}

impl<T: Real> Homography<T> {
    /// Build from 9 row-major entries, rejecting singular matrices.
    ///
    /// Singularity is judged after scaling the largest-magnitude entry to 1.
    pub fn new(entries: [T; 9]) -> Result<Self, GeometryError> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFiniteMatrix);
        }
        let h = Self { m: entries };
        let scale = entries
            .iter()
            .fold(T::zero(), |acc, v| if v.abs() > acc { v.abs() } else { acc });
        if scale == T::zero() {
            return Err(GeometryError::Singular);
        }
        let normalized = entries.map(|v| v / scale);
        if det3(&normalized).abs().to_f64_lossy() <= DEGENERATE_EPS {
            return Err(GeometryError::Singular);
        }
        Ok(h)
    }

    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            m: [o, z, z, z, o, z, z, z, o],
        }
    }

    pub fn translation(tx: T, ty: T) -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            m: [o, z, tx, z, o, ty, z, z, o],
        }
    }

    /// Same matrix in another scalar type.
    pub fn cast<U: Real>(&self) -> Homography<U> {
        Homography {
            m: self.m.map(|v| U::c(v.to_f64_lossy())),
        }
    }

    pub fn entries(&self) -> [T; 9] {
        self.m
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn det(&self) -> T {
        det3(&self.m)
    }

    /// Inverse via the adjugate.
    pub fn inverse(&self) -> Result<Self, GeometryError> {
        let m = &self.m;
        let det = self.det();
        if det == T::zero() {
            return Err(GeometryError::Singular);
        }
        let adj = [
            m[4] * m[8] - m[5] * m[7],
            m[2] * m[7] - m[1] * m[8],
            m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3] * m[8],
            m[0] * m[8] - m[2] * m[6],
            m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6],
            m[1] * m[6] - m[0] * m[7],
            m[0] * m[4] - m[1] * m[3],
        ];
        Self::new(adj.map(|v| v / det))
    }

    /// Parse the plain-text layout: three lines of three whitespace-separated numbers.
    pub fn parse_text(text: &str) -> Result<Self, GeometryError> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if rows.len() != 3 {
            return Err(GeometryError::Parse(format!("expected 3 rows, found {}", rows.len())));
        }
        let mut entries = [T::zero(); 9];
        for (r, row) in rows.iter().enumerate() {
            let vals: Vec<&str> = row.split_whitespace().collect();
            if vals.len() != 3 {
                return Err(GeometryError::Parse(format!("row {} has {} values", r + 1, vals.len())));
            }
            for (c, v) in vals.iter().enumerate() {
                let parsed: f64 = v
                    .parse()
                    .map_err(|_| GeometryError::Parse(format!("bad number {v:?}")))?;
                entries[r * 3 + c] = T::c(parsed);
            }
        }
        Self::new(entries)
    }

    pub fn to_text(&self) -> String {
        self.m
            .chunks(3)
            .map(|r| format!("{} {} {}\n", r[0], r[1], r[2]))
            .collect()
    }
}

fn det3<T: Real>(m: &[T; 9]) -> T {
    m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
}

/// Dehomogenized `h * (x, y, 1)`.
pub fn project_point<T: Real>(h: &Homography<T>, p: Point<T>) -> Result<Point<T>, GeometryError> {
    p.check_finite()?;
    let m = &h.m;
    let w = m[6] * p.x + m[7] * p.y + m[8];
    if w.abs().to_f64_lossy() < DEGENERATE_EPS {
        return Err(GeometryError::AtInfinity);
    }
    let x = (m[0] * p.x + m[1] * p.y + m[2]) / w;
    let y = (m[3] * p.x + m[4] * p.y + m[5]) / w;
    Ok(Point::new(x, y))
}

/// Whether reference point `p` projects inside the target image.
pub fn common_region_contains<T: Real>(
    h: &Homography<T>,
    ref_dims: Dims,
    target_dims: Dims,
    p: Point<T>,
) -> Result<bool, GeometryError> {
    p.check_finite()?;
    if !ref_dims.contains(p.x, p.y) {
        return Err(GeometryError::OutsideReference(p.x.to_f64_lossy(), p.y.to_f64_lossy()));
    }
    let q = project_point(h, p)?;
    Ok(target_dims.contains(q.x, q.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_projection_is_exact() {
        let h = Homography::<f64>::identity();
        let q = project_point(&h, Point::new(10.5, 20.25)).unwrap();
        assert_eq!(q, Point::new(10.5, 20.25));
    }

    #[test]
    fn scaling_projection() {
        let h = Homography::new([2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(project_point(&h, Point::new(5.0, 7.0)).unwrap(), Point::new(10.0, 14.0));
    }

    #[test]
    fn dehomogenization() {
        let h = Homography::new([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(project_point(&h, Point::new(8.0, 4.0)).unwrap(), Point::new(4.0, 2.0));
    }

    #[test]
    fn point_at_infinity_is_rejected() {
        // w = x - 5 vanishes at x = 5.
        let h = Homography::new([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -5.0]).unwrap();
        assert_eq!(project_point(&h, Point::new(5.0, 1.0)), Err(GeometryError::AtInfinity));
    }

    #[test]
    fn singular_and_non_finite_rejected() {
        assert_eq!(
            Homography::new([1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0]),
            Err(GeometryError::Singular)
        );
        assert_eq!(Homography::new([0.0f64; 9]), Err(GeometryError::Singular));
        let mut e = [0.0f64; 9];
        e[0] = f64::NAN;
        assert_eq!(Homography::new(e), Err(GeometryError::NonFiniteMatrix));
        assert!(project_point(&Homography::identity(), Point::new(f64::INFINITY, 0.0)).is_err());
    }

    #[test]
    fn common_region_cases() {
        let d = Dims::new(100, 80);
        let id = Homography::<f64>::identity();
        assert!(common_region_contains(&id, d, d, Point::new(50.0, 40.0)).unwrap());
        assert!(common_region_contains(&id, d, d, Point::new(99.0, 79.0)).unwrap());

        let off = Homography::translation(100.0, 0.0);
        for x in [0.0, 37.0, 99.0] {
            assert!(!common_region_contains(&off, d, d, Point::new(x, 10.0)).unwrap());
        }

        let half = Homography::translation(-50.0, 0.0);
        assert!(!common_region_contains(&half, d, d, Point::new(25.0, 10.0)).unwrap());
        assert!(common_region_contains(&half, d, d, Point::new(75.0, 10.0)).unwrap());

        assert!(matches!(
            common_region_contains(&id, d, d, Point::new(-1.0, 0.0)),
            Err(GeometryError::OutsideReference(..))
        ));
    }

    #[test]
    fn text_layout_round_trip() {
        let h = Homography::<f64>::parse_text("1 0 3.5\n0 1 -2\n0 0 1\n").unwrap();
        assert_eq!(h, Homography::translation(3.5, -2.0));
        assert_eq!(Homography::<f64>::parse_text(&h.to_text()).unwrap(), h);
        assert!(Homography::<f64>::parse_text("1 0 0\n0 1 0\n").is_err());
        assert!(Homography::<f64>::parse_text("1 0 0\n0 1 x\n0 0 1").is_err());
    }

    proptest! {
        #[test]
        fn inverse_round_trip(
            a in 0.5f64..2.0, b in -0.3f64..0.3, tx in -50.0f64..50.0,
            c in -0.3f64..0.3, d in 0.5f64..2.0, ty in -50.0f64..50.0,
            g in -1e-4f64..1e-4, hh in -1e-4f64..1e-4,
            x in 0.0f64..500.0, y in 0.0f64..500.0,
        ) {
            prop_assume!((a * d - b * c).abs() > 0.1);
            let h = Homography::new([a, b, tx, c, d, ty, g, hh, 1.0]).unwrap();
            let inv = h.inverse().unwrap();
            let p = Point::new(x, y);
            let q = project_point(&inv, project_point(&h, p).unwrap()).unwrap();
            prop_assert!(p.distance(&q) < 1e-9);
        }

        #[test]
        fn identity_contains_every_in_bounds_point(
            w in 1usize..300, h in 1usize..300, fx in 0.0f64..=1.0, fy in 0.0f64..=1.0,
        ) {
            let d = Dims::new(w, h);
            let p = Point::new(fx * (w - 1) as f64, fy * (h - 1) as f64);
            prop_assert!(common_region_contains(&Homography::identity(), d, d, p).unwrap());
        }
    }
}
