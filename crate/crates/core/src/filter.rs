//! Separable Gaussian filtering on floating point buffers.
//!
//! Coordinates follow the crate-wide convention: origin at the top-left
//! pixel center, x to the right, y downward. Borders are replicated.

use crate::scalar::Real;

/// Sampled Gaussian of radius `ceil(4 sigma)`, normalized to unit sum.
///
/// `sigma` must be positive and finite.
pub fn gaussian_kernel<T: Real>(sigma: f64) -> Vec<T> {
    debug_assert!(sigma > 0.0 && sigma.is_finite());
    let radius = (4.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let raw: Vec<f64> = (-radius..=radius).map(|i| (-((i * i) as f64) / denom).exp()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| T::c(w / sum)).collect()
}

/// Dense single-channel float raster, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Real> Plane<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height, "plane size mismatch");
        Self { width, height, data }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![T::zero(); width * height])
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    /// Value with replicated borders for out-of-range coordinates.
    #[inline]
    pub fn at_clamped(&self, x: i64, y: i64) -> T {
        let xc = x.clamp(0, self.width as i64 - 1) as usize;
        let yc = y.clamp(0, self.height as i64 - 1) as usize;
        self.at(xc, yc)
    }

    /// Convolve rows then columns with the same 1-D kernel (odd length).
    pub fn convolve_separable(&self, kernel: &[T]) -> Plane<T> {
        let radius = (kernel.len() / 2) as i64;
        let (w, h) = (self.width as i64, self.height as i64);
        let mut tmp = vec![T::zero(); self.data.len()];
        for y in 0..h {
            let row = &self.data[(y * w) as usize..((y + 1) * w) as usize];
            for x in 0..w {
                let mut acc = T::zero();
                for (t, &k) in kernel.iter().enumerate() {
                    let sx = (x + t as i64 - radius).clamp(0, w - 1) as usize;
                    acc = acc + k * row[sx];
                }
                tmp[(y * w + x) as usize] = acc;
            }
        }
        let mut out = vec![T::zero(); self.data.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = T::zero();
                for (t, &k) in kernel.iter().enumerate() {
                    let sy = (y + t as i64 - radius).clamp(0, h - 1);
                    acc = acc + k * tmp[(sy * w + x) as usize];
                }
                out[(y * w + x) as usize] = acc;
            }
        }
        Plane::new(self.width, self.height, out)
    }

    /// Gaussian smoothing; `sigma <= 0` returns a copy.
    pub fn gaussian(&self, sigma: f64) -> Plane<T> {
        if sigma <= 0.0 {
            return self.clone();
        }
        self.convolve_separable(&gaussian_kernel::<T>(sigma))
    }
}
