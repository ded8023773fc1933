//! Performance bounds and statistical comparison of local feature detectors.
//!
//! The crate turns detector output on controlled transformation sequences
//! into repeatability matrices, summarizes each matrix with max, median and
//! min curves (operating and guarantee regions), and compares two detectors
//! cell by cell with a threshold-swept McNemar test.
//!
//! - [`imaging`]: grayscale rasters, PGM/PNG/JPEG I/O, and the JPEG, blur and
//!   brightness sequence synthesizers.
//! - [`geometry`]: homographies and common-region tests.
//! - [`detectors`]: Harris and DoG reference detectors plus external
//!   keypoint files.
//! - [`repeatability`]: greedy correspondence matching and the score matrix.
//! - [`bounds`]: max/median/min curves and region areas.
//! - [`mcnemar`]: signed Z-score grids.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common choices.

pub mod bounds;
pub mod detectors;
mod filter;
pub mod geometry;
pub mod imaging;
pub mod mcnemar;
pub mod repeatability;
mod scalar;

pub use scalar::{round_to_u8, Real};

pub use bounds::{BoundsCurves, BoundsError};
pub use detectors::{DetectorError, ImageRef, Keypoint, KeypointSet};
pub use geometry::{Dims, GeometryError, Homography, Point};
pub use imaging::{Image, ImagingError, SceneSequence, TransformKind, TransformSpec};
pub use mcnemar::{McNemarCounts, McNemarError, ZScoreGrid};
pub use repeatability::{MatchCriterion, RepeatabilityError, RepeatabilityMatrix};

pub type Homography64 = Homography<f64>;
pub type Homography32 = Homography<f32>;
pub type Point64 = Point<f64>;
pub type Point32 = Point<f32>;
pub type Keypoint64 = Keypoint<f64>;
pub type Keypoint32 = Keypoint<f32>;
pub type KeypointSet64 = KeypointSet<f64>;
pub type KeypointSet32 = KeypointSet<f32>;
pub type RepeatabilityMatrix64 = RepeatabilityMatrix<f64>;
pub type RepeatabilityMatrix32 = RepeatabilityMatrix<f32>;
pub type BoundsCurves64 = BoundsCurves<f64>;
pub type BoundsCurves32 = BoundsCurves<f32>;
pub type ZScoreGrid64 = ZScoreGrid<f64>;
pub type ZScoreGrid32 = ZScoreGrid<f32>;
