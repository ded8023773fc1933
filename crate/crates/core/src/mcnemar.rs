//! Threshold-swept McNemar comparison of two detectors.
//!
//! Each scene is a paired case. At a given repeatability threshold a
//! detector succeeds on a scene when its score reaches the threshold. The
//! discordant counts give the continuity-corrected statistic
//! `(|n_sf - n_fs| - 1) / sqrt(n_sf + n_fs)`, and sweeping thresholds for
//! every transform amount yields a grid of signed Z values. Positive means
//! the first detector did better.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::imaging::{format_amount, TransformKind};
use crate::repeatability::RepeatabilityMatrix;
use crate::scalar::Real;

/// Minimum discordant count for a reliable statistic.
pub const RELIABLE_MIN_DISCORDANT: u64 = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McNemarError {
    #[error("transform kinds differ: {0} vs {1}")]
    KindMismatch(TransformKind, TransformKind),
    #[error("amount lists differ between the two matrices")]
    AmountMismatch,
    #[error("scene {0} is missing from one matrix and not excluded by it")]
    SceneMismatch(String),
    #[error("no scenes in common")]
    EmptyIntersection,
    #[error("thresholds must be strictly increasing within (0, 1)")]
    InvalidThresholds,
    #[error("score slices differ in length")]
    LengthMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
}

/// Success iff `score >= threshold`.
pub fn outcome<T: Real>(score: T, threshold: T) -> Outcome {
    if score >= threshold {
        Outcome::Success
    } else {
        Outcome::Failure
    }
}

/// Paired outcome counts: `n_sf` is "A succeeds, B fails".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct McNemarCounts {
    pub n_sf: u64,
    pub n_fs: u64,
    pub n_ss: u64,
    pub n_ff: u64,
}

impl McNemarCounts {
    pub fn total(&self) -> u64 {
        self.n_sf + self.n_fs + self.n_ss + self.n_ff
    }

    pub fn discordant(&self) -> u64 {
        self.n_sf + self.n_fs
    }

    /// Counts with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            n_sf: self.n_fs,
            n_fs: self.n_sf,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McNemarStatistic<T> {
    /// Clamped at 0; reported as 0 when undefined.
    pub magnitude: T,
    /// Sign of `n_sf - n_fs`.
    pub sign: i8,
    pub reliable: bool,
    /// False when there are no discordant cases.
    pub defined: bool,
}

impl<T: Real> McNemarStatistic<T> {
    pub fn signed(&self) -> T {
        match self.sign {
            s if s > 0 => self.magnitude,
            s if s < 0 => -self.magnitude,
            _ => T::zero(),
        }
    }
}

pub fn mcnemar_z<T: Real>(counts: &McNemarCounts) -> McNemarStatistic<T> {
    let discordant = counts.discordant();
    let sign = match counts.n_sf.cmp(&counts.n_fs) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
    };
    if discordant == 0 {
        return McNemarStatistic {
            magnitude: T::zero(),
            sign,
            reliable: false,
            defined: false,
        };
    }
    let diff = counts.n_sf.abs_diff(counts.n_fs);
    let numerator = diff.saturating_sub(1);
    McNemarStatistic {
        magnitude: T::c(numerator as f64) / T::c(discordant as f64).sqrt(),
        sign,
        reliable: discordant >= RELIABLE_MIN_DISCORDANT,
        defined: true,
    }
}

/// Two-tailed normal probability `2 (1 - Phi(z)) = erfc(z / sqrt 2)`.
pub fn z_to_p<T: Real>(z: T) -> T {
    let z = z.to_f64_lossy().max(0.0);
    T::c(libm::erfc(z / std::f64::consts::SQRT_2))
}

/// Default threshold sweep 0.1, 0.2, ..., 0.9.
pub fn default_thresholds<T: Real>() -> Vec<T> {
    (1..=9).map(|i| T::c(i as f64 / 10.0)).collect()
}

/// Outcome counts over paired scores at one threshold.
pub fn cell_counts<T: Real>(scores_a: &[T], scores_b: &[T], threshold: T) -> Result<McNemarCounts, McNemarError> {
    if scores_a.len() != scores_b.len() {
        return Err(McNemarError::LengthMismatch);
    }
    let mut c = McNemarCounts::default();
    for (&a, &b) in scores_a.iter().zip(scores_b) {
        match (outcome(a, threshold), outcome(b, threshold)) {
            (Outcome::Success, Outcome::Failure) => c.n_sf += 1,
            (Outcome::Failure, Outcome::Success) => c.n_fs += 1,
            (Outcome::Success, Outcome::Success) => c.n_ss += 1,
            (Outcome::Failure, Outcome::Failure) => c.n_ff += 1,
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCell<T> {
    pub counts: McNemarCounts,
    /// Signed statistic; 0 when undefined.
    pub z: T,
    pub reliable: bool,
    /// Present only for reliable cells.
    pub p: Option<T>,
}

/// Thresholds x amounts grid of signed McNemar statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct ZScoreGrid<T> {
    pub detector_a: String,
    pub detector_b: String,
    pub kind: TransformKind,
    pub thresholds: Vec<T>,
    pub amounts: Vec<f64>,
    /// Scenes that entered the comparison.
    pub scene_ids: Vec<String>,
    cells: Vec<GridCell<T>>,
}

impl<T: Real> ZScoreGrid<T> {
    pub fn n_thresholds(&self) -> usize {
        self.thresholds.len()
    }

    pub fn n_amounts(&self) -> usize {
        self.amounts.len()
    }

    pub fn cell(&self, threshold: usize, amount: usize) -> &GridCell<T> {
        &self.cells[threshold * self.amounts.len() + amount]
    }

    pub fn z(&self, threshold: usize, amount: usize) -> T {
        self.cell(threshold, amount).z
    }

    /// Row-major cells, thresholds outer.
    pub fn cells(&self) -> &[GridCell<T>] {
        &self.cells
    }

    /// Header `threshold,amount,z,reliable,p,n_sf,n_fs,n_ss,n_ff`; `p` is
    /// blank for unreliable cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,amount,z,reliable,p,n_sf,n_fs,n_ss,n_ff\n");
        for (i, t) in self.thresholds.iter().enumerate() {
            for (k, a) in self.amounts.iter().enumerate() {
                let c = self.cell(i, k);
                let p = c.p.map(|p| p.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{t},{},{},{},{p},{},{},{},{}",
                    format_amount(*a),
                    c.z,
                    c.reliable,
                    c.counts.n_sf,
                    c.counts.n_fs,
                    c.counts.n_ss,
                    c.counts.n_ff
                );
            }
        }
        out
    }
}

/// Non-empty, strictly increasing and inside `(0, 1)`.
pub fn validate_thresholds<T: Real>(thresholds: &[T]) -> Result<(), McNemarError> {
    let in_range = thresholds.iter().all(|&t| t > T::zero() && t < T::one());
    let increasing = thresholds.windows(2).all(|w| w[1] > w[0]);
    if thresholds.is_empty() || !in_range || !increasing {
        return Err(McNemarError::InvalidThresholds);
    }
    Ok(())
}

/// Scenes both matrices scored; a scene absent from one side must be in
/// that side's exclusion list.
fn common_scenes<T: Real>(a: &RepeatabilityMatrix<T>, b: &RepeatabilityMatrix<T>) -> Result<Vec<String>, McNemarError> {
    let ids_a: BTreeSet<&String> = a.scene_ids().iter().collect();
    let ids_b: BTreeSet<&String> = b.scene_ids().iter().collect();
    let excl_a: BTreeSet<&String> = a.excluded().iter().collect();
    let excl_b: BTreeSet<&String> = b.excluded().iter().collect();
    for id in ids_a.difference(&ids_b) {
        if !excl_b.contains(id) {
            return Err(McNemarError::SceneMismatch((*id).clone()));
        }
    }
    for id in ids_b.difference(&ids_a) {
        if !excl_a.contains(id) {
            return Err(McNemarError::SceneMismatch((*id).clone()));
        }
    }
    let common: Vec<String> = ids_a.intersection(&ids_b).map(|s| (*s).clone()).collect();
    if common.is_empty() {
        return Err(McNemarError::EmptyIntersection);
    }
    Ok(common)
}

pub fn z_grid<T: Real>(
    a: &RepeatabilityMatrix<T>,
    b: &RepeatabilityMatrix<T>,
    thresholds: &[T],
) -> Result<ZScoreGrid<T>, McNemarError> {
    if a.kind() != b.kind() {
        return Err(McNemarError::KindMismatch(a.kind(), b.kind()));
    }
    if a.amounts() != b.amounts() {
        return Err(McNemarError::AmountMismatch);
    }
    validate_thresholds(thresholds)?;
    let scenes = common_scenes(a, b)?;
    let rows_a: Vec<usize> = scenes.iter().filter_map(|s| a.scene_index(s)).collect();
    let rows_b: Vec<usize> = scenes.iter().filter_map(|s| b.scene_index(s)).collect();

    let m = a.n_amounts();
    let mut cells = Vec::with_capacity(thresholds.len() * m);
    for &t in thresholds {
        for k in 0..m {
            let col_a: Vec<T> = rows_a.iter().map(|&i| a.get(i, k)).collect();
            let col_b: Vec<T> = rows_b.iter().map(|&i| b.get(i, k)).collect();
            let counts = cell_counts(&col_a, &col_b, t)?;
            let stat = mcnemar_z::<T>(&counts);
            cells.push(GridCell {
                counts,
                z: stat.signed(),
                reliable: stat.reliable,
                p: stat.reliable.then(|| z_to_p(stat.magnitude)),
            });
        }
    }
    Ok(ZScoreGrid {
        detector_a: a.detector_id().to_string(),
        detector_b: b.detector_id().to_string(),
        kind: a.kind(),
        thresholds: thresholds.to_vec(),
        amounts: a.amounts().to_vec(),
        scene_ids: scenes,
        cells,
    })
}
