//! Max, min and median repeatability curves and the areas of the operating
//! region (between max and min) and guarantee region (under min).

use std::fmt::Write as _;

use thiserror::Error;

use crate::imaging::format_amount;
use crate::repeatability::RepeatabilityMatrix;
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("region areas need at least 2 amounts, got {0}")]
    TooFewAmounts(usize),
    #[error("curve lengths differ from the amount count")]
    LengthMismatch,
}

fn columns<T: Real>(matrix: &RepeatabilityMatrix<T>) -> Result<Vec<Vec<T>>, BoundsError> {
    if matrix.n_scenes() == 0 || matrix.n_amounts() == 0 {
        return Err(BoundsError::EmptyMatrix);
    }
    Ok((0..matrix.n_amounts()).map(|k| matrix.column(k)).collect())
}

pub fn max_curve<T: Real>(matrix: &RepeatabilityMatrix<T>) -> Result<Vec<T>, BoundsError> {
    Ok(columns(matrix)?
        .into_iter()
        .map(|c| c.into_iter().fold(T::neg_infinity(), T::max))
        .collect())
}

pub fn min_curve<T: Real>(matrix: &RepeatabilityMatrix<T>) -> Result<Vec<T>, BoundsError> {
    Ok(columns(matrix)?
        .into_iter()
        .map(|c| c.into_iter().fold(T::infinity(), T::min))
        .collect())
}

/// Median of a non-empty sample; even counts average the middle pair.
pub fn median<T: Real>(values: &mut [T]) -> T {
    assert!(!values.is_empty(), "median of empty sample");
    values.sort_by(|a, b| a.total_cmp_real(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / T::c(2.0)
    }
}

pub fn median_curve<T: Real>(matrix: &RepeatabilityMatrix<T>) -> Result<Vec<T>, BoundsError> {
    Ok(columns(matrix)?.into_iter().map(|mut c| median(&mut c)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsCurves<T> {
    pub amounts: Vec<f64>,
    pub max_curve: Vec<T>,
    pub min_curve: Vec<T>,
    pub median_curve: Vec<T>,
    pub operating_area: T,
    pub guarantee_area: T,
}

impl<T: Real> BoundsCurves<T> {
    /// All three curves plus both areas; needs at least two amounts.
    pub fn from_matrix(matrix: &RepeatabilityMatrix<T>) -> Result<Self, BoundsError> {
        let mut curves = Self {
            amounts: matrix.amounts().to_vec(),
            max_curve: max_curve(matrix)?,
            min_curve: min_curve(matrix)?,
            median_curve: median_curve(matrix)?,
            operating_area: T::zero(),
            guarantee_area: T::zero(),
        };
        let (op, gu) = region_areas(&curves)?;
        curves.operating_area = op;
        curves.guarantee_area = gu;
        Ok(curves)
    }

    /// Header `amount,max,median,min`, one row per amount.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("amount,max,median,min\n");
        for (k, a) in self.amounts.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                format_amount(*a),
                self.max_curve[k],
                self.median_curve[k],
                self.min_curve[k]
            );
        }
        out
    }
}

/// Trapezoid integral over amounts rescaled to `[0, 1]`.
fn normalized_trapezoid<T: Real>(amounts: &[f64], values: &[T]) -> T {
    let span = amounts[amounts.len() - 1] - amounts[0];
    let mut area = T::zero();
    for k in 1..amounts.len() {
        let width = T::c((amounts[k] - amounts[k - 1]) / span);
        area = area + width * (values[k] + values[k - 1]) / T::c(2.0);
    }
    area
}

/// `(operating_area, guarantee_area)` on a normalized amount axis.
pub fn region_areas<T: Real>(curves: &BoundsCurves<T>) -> Result<(T, T), BoundsError> {
    let m = curves.amounts.len();
    if m < 2 {
        return Err(BoundsError::TooFewAmounts(m));
    }
    if curves.max_curve.len() != m || curves.min_curve.len() != m {
        return Err(BoundsError::LengthMismatch);
    }
    let band: Vec<T> = curves
        .max_curve
        .iter()
        .zip(&curves.min_curve)
        .map(|(&hi, &lo)| hi - lo)
        .collect();
    Ok((
        normalized_trapezoid(&curves.amounts, &band),
        normalized_trapezoid(&curves.amounts, &curves.min_curve),
    ))
}
