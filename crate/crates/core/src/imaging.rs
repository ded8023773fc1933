//! Grayscale rasters, file I/O and the photometric transform sequences.

use std::fmt;
use std::io::Cursor;
use std::path::Path;
use std::str::FromStr;

use image::codecs::jpeg::JpegEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{gaussian_kernel, Plane};
use crate::geometry::{Dims, Homography};
use crate::scalar::round_to_u8;

/// Identifier of the JPEG codec build recorded in manifests.
pub const JPEG_CODEC_ID: &str = "image-rs 0.25 (jpeg encoder) + zune-jpeg 0.5 (decoder)";

pub const MAX_JPEG_RATIO: f64 = 98.0;
pub const MAX_BLUR_SIGMA: f64 = 8.0;
pub const MAX_BRIGHTNESS_DECREASE: f64 = 99.0;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported image format")]
    UnsupportedFormat,
    #[error("zero-dimension image")]
    ZeroDimension,
    #[error("pixel buffer has {got} values, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("malformed PGM: {0}")]
    MalformedPgm(String),
    #[error("decode failed: {0}")]
    Decode(String),
    #[error("encode failed: {0}")]
    Encode(String),
    #[error("ratio out of range: {0} (expected 0..=98)")]
    RatioOutOfRange(f64),
    #[error("sigma out of range: {0} (expected 0..=8)")]
    SigmaOutOfRange(f64),
    #[error("decrease out of range: {0} (expected 0..=99)")]
    DecreaseOutOfRange(f64),
    #[error("invalid transform amounts: {0}")]
    InvalidAmounts(String),
    #[error("unknown transform kind {0:?}")]
    UnknownKind(String),
}

/// 8-bit single-channel raster, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl fmt::Debug for Image {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Image({}x{})", self.width, self.height)
    }
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::ZeroDimension);
        }
        if pixels.len() != width * height {
            return Err(ImagingError::SizeMismatch {
                expected: width * height,
                got: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
    }

    /// Build by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self, ImagingError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImagingError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Float copy scaled to `[0, 1]`.
    pub fn to_plane<T: crate::Real>(&self) -> Plane<T> {
        let scale = T::c(1.0 / 255.0);
        Plane::new(
            self.width,
            self.height,
            self.pixels.iter().map(|&v| T::c(v as f64) * scale).collect(),
        )
    }

    fn map_pixels(&self, f: impl Fn(u8) -> u8) -> Image {
        Image {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// ITU-R BT.601 luma, rounded half away from zero.
pub fn bt601_luma(r: u8, g: u8, b: u8) -> u8 {
    round_to_u8(0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
}

/// Decode binary (P5) or ASCII (P2) PGM with maxval <= 255.
pub fn decode_pgm(bytes: &[u8]) -> Result<Image, ImagingError> {
    let bad = |m: &str| ImagingError::MalformedPgm(m.to_string());
    if bytes.len() < 2 || bytes[0] != b'P' || !(bytes[1] == b'5' || bytes[1] == b'2') {
        return Err(bad("missing P5/P2 magic"));
    }
    let binary = bytes[1] == b'5';
    let mut pos = 2;
    let mut header = [0usize; 3];
    for slot in header.iter_mut() {
        // whitespace and '#' comments
        loop {
            match bytes.get(pos) {
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|c| c.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        *slot = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("header value too large"))?;
    }
    let [width, height, maxval] = header;
    if width == 0 || height == 0 {
        return Err(ImagingError::ZeroDimension);
    }
    if maxval == 0 || maxval > 255 {
        return Err(bad("only maxval 1..=255 is supported"));
    }
    let n = width * height;
    let raw: Vec<u8> = if binary {
        // exactly one whitespace byte separates header and raster
        pos += 1;
        let data = bytes.get(pos..pos + n).ok_or_else(|| bad("truncated raster"))?;
        data.to_vec()
    } else {
        let text = std::str::from_utf8(&bytes[pos..]).map_err(|_| bad("non-ascii raster"))?;
        let vals: Result<Vec<u8>, _> = text.split_whitespace().take(n).map(u8::from_str).collect();
        let vals = vals.map_err(|_| bad("bad ascii sample"))?;
        if vals.len() != n {
            return Err(bad("truncated raster"));
        }
        vals
    };
    if raw.iter().any(|&v| v as usize > maxval) {
        return Err(bad("sample exceeds maxval"));
    }
    let pixels = if maxval == 255 {
        raw
    } else {
        raw.iter()
            .map(|&v| round_to_u8(v as f64 * 255.0 / maxval as f64))
            .collect()
    };
    Image::new(width, height, pixels)
}

/// Binary PGM (P5), maxval 255.
pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

/// Decode PGM, PNG or JPEG bytes into grayscale.
pub fn decode_image(bytes: &[u8]) -> Result<Image, ImagingError> {
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P2") {
        return decode_pgm(bytes);
    }
    let format = match image::guess_format(bytes) {
        Ok(f @ (ImageFormat::Png | ImageFormat::Jpeg)) => f,
        _ => return Err(ImagingError::UnsupportedFormat),
    };
    let dynamic =
        image::load_from_memory_with_format(bytes, format).map_err(|e| ImagingError::Decode(e.to_string()))?;
    from_dynamic(dynamic)
}

fn from_dynamic(dynamic: DynamicImage) -> Result<Image, ImagingError> {
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    if w == 0 || h == 0 {
        return Err(ImagingError::ZeroDimension);
    }
    if dynamic.color().has_color() {
        let rgb = dynamic.to_rgb8();
        let pixels = rgb.pixels().map(|p| bt601_luma(p[0], p[1], p[2])).collect();
        Image::new(w, h, pixels)
    } else {
        Image::new(w, h, dynamic.to_luma8().into_raw())
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Image, ImagingError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ImagingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_image(&bytes)
}

/// Baseline JPEG at the given quality (1..=100).
pub fn jpeg_encode(img: &Image, quality: u8) -> Result<Vec<u8>, ImagingError> {
    let mut buf = Cursor::new(Vec::new());
    JpegEncoder::new_with_quality(&mut buf, quality.clamp(1, 100))
        .write_image(&img.pixels, img.width as u32, img.height as u32, ExtendedColorType::L8)
        .map_err(|e| ImagingError::Encode(e.to_string()))?;
    Ok(buf.into_inner())
}

pub fn jpeg_decode(bytes: &[u8]) -> Result<Image, ImagingError> {
    let dynamic = image::load_from_memory_with_format(bytes, ImageFormat::Jpeg)
        .map_err(|e| ImagingError::Decode(e.to_string()))?;
    from_dynamic(dynamic)
}

/// Encoder quality for a compression ratio: `100 - ratio`.
pub fn jpeg_quality_for_ratio(ratio: f64) -> Result<u8, ImagingError> {
    if !(0.0..=MAX_JPEG_RATIO).contains(&ratio) {
        return Err(ImagingError::RatioOutOfRange(ratio));
    }
    Ok((100.0 - ratio).round() as u8)
}

/// Encode-decode round trip; returns the encoded stream for ratio > 0.
pub fn jpeg_transform_with_bytes(img: &Image, ratio: f64) -> Result<(Image, Option<Vec<u8>>), ImagingError> {
    let quality = jpeg_quality_for_ratio(ratio)?;
    if ratio == 0.0 {
        return Ok((img.clone(), None));
    }
    let bytes = jpeg_encode(img, quality)?;
    let decoded = jpeg_decode(&bytes)?;
    Ok((decoded, Some(bytes)))
}

pub fn jpeg_transform(img: &Image, ratio: f64) -> Result<Image, ImagingError> {
    jpeg_transform_with_bytes(img, ratio).map(|(i, _)| i)
}

/// Separable Gaussian blur with replicated borders, radius `ceil(4 sigma)`.
pub fn blur_transform(img: &Image, sigma: f64) -> Result<Image, ImagingError> {
    if !(0.0..=MAX_BLUR_SIGMA).contains(&sigma) {
        return Err(ImagingError::SigmaOutOfRange(sigma));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let plane = Plane::new(img.width, img.height, img.pixels.iter().map(|&v| v as f64).collect());
    let out = plane.convolve_separable(&gaussian_kernel::<f64>(sigma));
    Ok(Image {
        width: img.width,
        height: img.height,
        pixels: out.data.into_iter().map(round_to_u8).collect(),
    })
}

/// Uniform brightness decrease by `decrease` percent.
pub fn brightness_transform(img: &Image, decrease: f64) -> Result<Image, ImagingError> {
    if !(0.0..=MAX_BRIGHTNESS_DECREASE).contains(&decrease) {
        return Err(ImagingError::DecreaseOutOfRange(decrease));
    }
    if decrease == 0.0 {
        return Ok(img.clone());
    }
    // v * (100 - d) / 100 keeps 255 @ 90% at exactly 25.5; v * (1 - 0.9) does not.
    let keep = 100.0 - decrease;
    Ok(img.map_pixels(|v| round_to_u8(v as f64 * keep / 100.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Jpeg,
    Blur,
    Brightness,
}

impl TransformKind {
    pub const ALL: [TransformKind; 3] = [Self::Jpeg, Self::Blur, Self::Brightness];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Jpeg => "jpeg",
            Self::Blur => "blur",
            Self::Brightness => "brightness",
        }
    }

    pub fn max_amount(&self) -> f64 {
        match self {
            Self::Jpeg => MAX_JPEG_RATIO,
            Self::Blur => MAX_BLUR_SIGMA,
            Self::Brightness => MAX_BRIGHTNESS_DECREASE,
        }
    }

    /// Default amount ladder for each kind.
    pub fn default_amounts(&self) -> Vec<f64> {
        match self {
            Self::Jpeg => vec![
                0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 85.0, 90.0, 93.0, 95.0, 98.0,
            ],
            Self::Blur => (0..10).map(|i| i as f64 * 0.5).collect(),
            Self::Brightness => vec![
                0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0,
            ],
        }
    }

    pub fn apply(&self, img: &Image, amount: f64) -> Result<Image, ImagingError> {
        match self {
            Self::Jpeg => jpeg_transform(img, amount),
            Self::Blur => blur_transform(img, amount),
            Self::Brightness => brightness_transform(img, amount),
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransformKind {
    type Err = ImagingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jpeg" => Ok(Self::Jpeg),
            "blur" => Ok(Self::Blur),
            "brightness" => Ok(Self::Brightness),
            other => Err(ImagingError::UnknownKind(other.to_string())),
        }
    }
}

/// Canonical text form of an amount, used in paths and CSV headers.
pub fn format_amount(amount: f64) -> String {
    format!("{amount}")
}

/// A transform kind together with its ordered amount ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    kind: TransformKind,
    amounts: Vec<f64>,
}

impl TransformSpec {
    /// Amounts must start at 0, increase strictly and stay in the kind's range.
    pub fn new(kind: TransformKind, amounts: Vec<f64>) -> Result<Self, ImagingError> {
        let invalid = |m: String| Err(ImagingError::InvalidAmounts(m));
        if amounts.first() != Some(&0.0) {
            return invalid("first amount must be 0".into());
        }
        if let Some(w) = amounts
            .windows(2)
            .find(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return invalid(format!("amounts not strictly increasing at {}", w[1]));
        }
        let max = kind.max_amount();
        if let Some(a) = amounts.iter().find(|a| !a.is_finite() || **a > max) {
            return invalid(format!("{kind} amount {a} outside [0, {max}]"));
        }
        Ok(Self { kind, amounts })
    }

    pub fn default_for(kind: TransformKind) -> Self {
        Self {
            kind,
            amounts: kind.default_amounts(),
        }
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn amounts(&self) -> &[f64] {
        &self.amounts
    }
}

/// How blur variants are derived from one another.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlurMode {
    /// Each variant is the reference blurred once with its own sigma.
    #[default]
    FromOriginal,
    /// Each variant blurs the previous variant; the effective sigma is the
    /// root-sum-square of the ladder so far.
    Cumulative,
}

#[derive(Clone, Debug)]
pub struct Variant {
    pub amount: f64,
    /// Equal to `amount` except for cumulative blur.
    pub effective_amount: f64,
    pub image: Image,
    pub homography: Homography<f64>,
    /// Encoded stream for JPEG variants with ratio > 0.
    pub jpeg_bytes: Option<Vec<u8>>,
}

#[derive(Clone, Debug)]
pub struct SceneSequence {
    pub scene_id: String,
    pub kind: TransformKind,
    pub reference: Image,
    pub variants: Vec<Variant>,
}

impl SceneSequence {
    pub fn amounts(&self) -> Vec<f64> {
        self.variants.iter().map(|v| v.amount).collect()
    }
}

pub fn synthesize_sequence(
    reference: &Image,
    spec: &TransformSpec,
    scene_id: &str,
) -> Result<SceneSequence, ImagingError> {
    synthesize_sequence_with(reference, spec, scene_id, BlurMode::FromOriginal)
}

/// One variant per amount, all related to the reference by the identity.
pub fn synthesize_sequence_with(
    reference: &Image,
    spec: &TransformSpec,
    scene_id: &str,
    blur_mode: BlurMode,
) -> Result<SceneSequence, ImagingError> {
    let mut variants: Vec<Variant> = Vec::with_capacity(spec.amounts.len());
    let mut sum_sq = 0.0;
    for &amount in &spec.amounts {
        let (image, jpeg_bytes, effective_amount) = match (spec.kind, blur_mode) {
            (TransformKind::Jpeg, _) => {
                let (img, bytes) = jpeg_transform_with_bytes(reference, amount)?;
                (img, bytes, amount)
            }
            (TransformKind::Blur, BlurMode::Cumulative) => {
                let prev = variants.last().map_or(reference, |v| &v.image);
                sum_sq += amount * amount;
                (blur_transform(prev, amount)?, None, sum_sq.sqrt())
            }
            (kind, _) => (kind.apply(reference, amount)?, None, amount),
        };
        variants.push(Variant {
            amount,
            effective_amount,
            image,
            homography: Homography::identity(),
            jpeg_bytes,
        });
    }
    Ok(SceneSequence {
        scene_id: scene_id.to_string(),
        kind: spec.kind,
        reference: reference.clone(),
        variants,
    })
}

/// Peak signal-to-noise ratio in dB; infinite for identical images.
pub fn psnr(a: &Image, b: &Image) -> f64 {
    assert_eq!(a.dims(), b.dims(), "psnr needs equal dimensions");
    let mse: f64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum::<f64>()
        / a.pixels.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}
