//! Z-score grid rendered as an 8-bit grayscale image plus a JSON legend.
//!
//! One pixel per cell: rows are thresholds (ascending, top to bottom) and
//! columns are amounts (ascending, left to right). The signed z is clamped to
//! `[-5, 5]` and mapped with `round((z + 5) / 10 * 255)`, so -5 is black,
//! 0 is 128 and +5 is white. Unreliable cells are drawn at 128.

use featbounds_core::imaging::{encode_pgm, format_amount};
use featbounds_core::{round_to_u8, Image, ZScoreGrid};
use serde::Serialize;

pub const Z_CLAMP: f64 = 5.0;
pub const NEUTRAL: u8 = 128;
pub const MAPPING: &str = "pixel = round((clamp(z, -5, 5) + 5) / 10 * 255), half away from zero";

pub fn z_to_pixel(z: f64) -> u8 {
    let c = z.clamp(-Z_CLAMP, Z_CLAMP);
    round_to_u8((c + Z_CLAMP) / (2.0 * Z_CLAMP) * 255.0)
}

pub fn heatmap_image(grid: &ZScoreGrid<f64>) -> Image {
    Image::from_fn(grid.n_amounts(), grid.n_thresholds(), |x, y| {
        let cell = grid.cell(y, x);
        if cell.reliable {
            z_to_pixel(cell.z)
        } else {
            NEUTRAL
        }
    })
    .expect("grids have at least one threshold and one amount")
}

pub fn heatmap_pgm(grid: &ZScoreGrid<f64>) -> Vec<u8> {
    encode_pgm(&heatmap_image(grid))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnreliableCell {
    pub row: usize,
    pub column: usize,
    pub threshold: f64,
    pub amount: String,
    pub discordant: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeatmapLegend {
    pub transform: String,
    pub detector_a: String,
    pub detector_b: String,
    pub width: usize,
    pub height: usize,
    pub rows: Vec<f64>,
    pub columns: Vec<String>,
    pub z_clamp: [f64; 2],
    pub mapping: &'static str,
    pub neutral_value: u8,
    pub positive_means: String,
    pub scenes: usize,
    pub unreliable_cells: Vec<UnreliableCell>,
}

pub fn legend(grid: &ZScoreGrid<f64>) -> HeatmapLegend {
    let mut unreliable_cells = Vec::new();
    for (i, &t) in grid.thresholds.iter().enumerate() {
        for (k, &a) in grid.amounts.iter().enumerate() {
            let c = grid.cell(i, k);
            if !c.reliable {
                unreliable_cells.push(UnreliableCell {
                    row: i,
                    column: k,
                    threshold: t,
                    amount: format_amount(a),
                    discordant: c.counts.discordant(),
                });
            }
        }
    }
    HeatmapLegend {
        transform: grid.kind.to_string(),
        detector_a: grid.detector_a.clone(),
        detector_b: grid.detector_b.clone(),
        width: grid.n_amounts(),
        height: grid.n_thresholds(),
        rows: grid.thresholds.clone(),
        columns: grid.amounts.iter().map(|&a| format_amount(a)).collect(),
        z_clamp: [-Z_CLAMP, Z_CLAMP],
        mapping: MAPPING,
        neutral_value: NEUTRAL,
        positive_means: format!("{} succeeds more often than {}", grid.detector_a, grid.detector_b),
        scenes: grid.scene_ids.len(),
        unreliable_cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use featbounds_core::mcnemar::{default_thresholds, z_grid};
    use featbounds_core::{RepeatabilityMatrix, TransformKind};

    #[test]
    fn mapping_points() {
        assert_eq!(z_to_pixel(5.0), 255);
        assert_eq!(z_to_pixel(0.0), 128);
        assert_eq!(z_to_pixel(-2.5), 64);
        assert_eq!(z_to_pixel(-5.0), 0);
        assert_eq!(z_to_pixel(40.0), 255);
        assert_eq!(z_to_pixel(-40.0), 0);
        for i in -60..60 {
            assert!(z_to_pixel(i as f64 / 10.0) <= z_to_pixel((i + 1) as f64 / 10.0));
        }
    }

    fn constant(id: &str, n: usize, v: f64) -> RepeatabilityMatrix<f64> {
        let amounts = TransformKind::Jpeg.default_amounts();
        let m = amounts.len();
        RepeatabilityMatrix::from_rows(
            id,
            TransformKind::Jpeg,
            amounts,
            (0..n).map(|i| format!("s{i:02}")).collect(),
            vec![vec![v; m]; n],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn forty_scene_fixture_is_uniformly_positive() {
        let g = z_grid(&constant("a", 40, 1.0), &constant("b", 40, 0.0), &default_thresholds()).unwrap();
        let img = heatmap_image(&g);
        assert_eq!((img.width(), img.height()), (14, 9));
        // 39 / sqrt(40) = 6.166 clamps to +5
        assert!(img.pixels().iter().all(|&p| p == 255));
        assert!(legend(&g).unreliable_cells.is_empty());
    }

    #[test]
    fn identical_matrices_are_neutral() {
        let a = constant("a", 40, 0.5);
        let g = z_grid(&a, &constant("b", 40, 0.5), &default_thresholds()).unwrap();
        assert!(heatmap_image(&g).pixels().iter().all(|&p| p == NEUTRAL));
        assert_eq!(legend(&g).unreliable_cells.len(), 9 * 14);
    }

    #[test]
    fn pgm_layout() {
        let g = z_grid(&constant("a", 3, 1.0), &constant("b", 3, 0.0), &default_thresholds()).unwrap();
        let pgm = heatmap_pgm(&g);
        assert!(pgm.starts_with(b"P5\n14 9\n255\n"));
        assert_eq!(pgm.len(), b"P5\n14 9\n255\n".len() + 126);
    }
}
