//! Grayscale image container, seeded Gaussian noise, PSNR, box projection,
//! and binary PGM (P5) file I/O.
//!
//! Pixels are stored as `f64` in column-major order; noisy images are kept
//! unclipped so the box constraint stays part of the model rather than a
//! preprocessing step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("unsupported depth: maxval {0} (only 8-bit maxval 255 is supported)")]
    UnsupportedDepth(u32),
    #[error("truncated PGM payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("invalid box bounds: lo {0} > hi {1}")]
    InvalidBounds(f64, f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A grayscale image with `f64` pixels in column-major order.
///
/// Values are nominally in `[0, 255]` but noisy images may exceed the range.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGray {
    rows: usize,
    cols: usize,
    pixels: Vec<f64>,
}

impl ImageGray {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self, ImageError> {
        if pixels.len() != rows * cols {
            return Err(ImageError::DimensionMismatch(rows, cols, pixels.len(), 1));
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn constant(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            pixels: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Side length when the image is square; the 2-D gradient operator only
    /// accepts square images.
    pub fn n_side(&self) -> Option<usize> {
        self.is_square().then_some(self.rows)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels[c * self.rows + r]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.pixels[c * self.rows + r] = v;
    }

    /// Column-major vectorization (the storage itself).
    pub fn as_slice(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn from_pixels(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self, ImageError> {
        Self::new(rows, cols, pixels)
    }
}

/// Seeded white-noise description.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSpec {
    /// Standard deviation, in pixel units.
    pub eta: u32,
    pub seed: u64,
}

/// Seeded white-noise description with fractional standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianNoise {
    pub eta: f64,
    pub seed: u64,
}

impl GaussianNoise {
    pub fn new(eta: f64, seed: u64) -> Self {
        assert!(eta >= 0.0);
        Self { eta, seed }
    }
}

/// Adds i.i.d. `N(0, eta^2)` noise from a ChaCha8 generator seeded with
/// `seed`, sampling in column-major pixel order. The result is NOT clipped
/// to `[0, 255]`.
pub fn add_gaussian_noise(img: &ImageGray, spec: &GaussianNoise) -> ImageGray {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pixels = img
        .pixels
        .iter()
        .map(|&p| {
            let e: f64 = rng.sample(StandardNormal);
            p + spec.eta * e
        })
        .collect();
    ImageGray {
        rows: img.rows,
        cols: img.cols,
        pixels,
    }
}

/// Cap returned for (near-)identical images, in dB.
pub const PSNR_CAP: f64 = 99.0;

/// Peak signal-to-noise ratio in dB: `20 log10(255 / RMSE)` with
/// `RMSE = ‖x − x̃‖ / sqrt(#pixels)`. Identical images return the cap 99.0.
pub fn psnr(reference: &ImageGray, candidate: &ImageGray) -> Result<f64, ImageError> {
    if reference.rows != candidate.rows || reference.cols != candidate.cols {
        return Err(ImageError::DimensionMismatch(
            reference.rows,
            reference.cols,
            candidate.rows,
            candidate.cols,
        ));
    }
    let sq: f64 = reference
        .pixels
        .iter()
        .zip(&candidate.pixels)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if sq == 0.0 {
        return Ok(PSNR_CAP);
    }
    let rmse = (sq / reference.pixels.len() as f64).sqrt();
    Ok((20.0 * (255.0 / rmse).log10()).min(PSNR_CAP))
}

/// Componentwise clamp onto `[lo, hi]`.
pub fn project_box(x: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>, ImageError> {
    if lo > hi {
        return Err(ImageError::InvalidBounds(lo, hi));
    }
    Ok(x.iter().map(|v| v.clamp(lo, hi)).collect())
}

/// Reads a binary 8-bit PGM (P5, maxval 255). Non-square images are
/// accepted; pixels are converted to `f64` in `[0, 255]`.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<ImageGray, ImageError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    parse_pgm(&bytes)
}

pub fn parse_pgm(bytes: &[u8]) -> Result<ImageGray, ImageError> {
    let mut pos = 0;
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(ImageError::MalformedHeader("missing P5 magic".into()));
    }
    pos += 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        *field = next_header_token(bytes, &mut pos)?;
    }
    let (width, height, maxval) = (fields[0] as usize, fields[1] as usize, fields[2]);
    if maxval != 255 {
        return Err(ImageError::UnsupportedDepth(maxval));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::MalformedHeader("zero dimension".into()));
    }
    // Exactly one whitespace byte separates the header from the payload.
    pos += 1;
    let expected = width * height;
    let found = bytes.len().saturating_sub(pos);
    if found < expected {
        return Err(ImageError::TruncatedPayload { expected, found });
    }
    // File payload is row-major; storage is column-major.
    let raster = &bytes[pos..pos + expected];
    let mut pixels = vec![0.0; expected];
    for r in 0..height {
        for c in 0..width {
            pixels[c * height + r] = raster[r * width + c] as f64;
        }
    }
    ImageGray::new(height, width, pixels)
}

fn next_header_token(bytes: &[u8], pos: &mut usize) -> Result<u32, ImageError> {
    // Skip whitespace and '#' comment lines.
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(ImageError::MalformedHeader(
            "expected a decimal header field".into(),
        ));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ImageError::MalformedHeader("unparseable header field".into()))
}

/// Writes a binary 8-bit PGM; values are clamped to `[0, 255]` and rounded
/// to the nearest integer.
pub fn write_pgm(img: &ImageGray, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let mut f = std::fs::File::create(path)?;
    write!(f, "P5\n{} {}\n255\n", img.cols, img.rows)?;
    let mut raster = vec![0u8; img.rows * img.cols];
    for r in 0..img.rows {
        for c in 0..img.cols {
            raster[r * img.cols + c] = img.get(r, c).clamp(0.0, 255.0).round() as u8;
        }
    }
    f.write_all(&raster)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectorization_roundtrip() {
        let img = ImageGray::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(img.get(0, 0), 1.0);
        assert_eq!(img.get(1, 0), 2.0);
        assert_eq!(img.get(0, 1), 3.0);
        let pixels = img.clone().into_pixels();
        assert_eq!(ImageGray::from_pixels(2, 3, pixels).unwrap(), img);
    }

    #[test]
    fn noise_zero_eta_is_identity() {
        let img = ImageGray::constant(4, 4, 100.0);
        let z = add_gaussian_noise(&img, &GaussianNoise::new(0.0, 7));
        assert_eq!(z, img);
    }

    #[test]
    fn noise_is_deterministic() {
        let img = ImageGray::constant(8, 8, 50.0);
        let a = add_gaussian_noise(&img, &GaussianNoise::new(20.0, 123));
        let b = add_gaussian_noise(&img, &GaussianNoise::new(20.0, 123));
        assert_eq!(a, b);
        let c = add_gaussian_noise(&img, &GaussianNoise::new(20.0, 124));
        assert_ne!(a, c);
    }

    #[test]
    fn noise_statistics() {
        let n = 256;
        let img = ImageGray::constant(n, n, 0.0);
        let z = add_gaussian_noise(&img, &GaussianNoise::new(20.0, 1));
        let mean: f64 = z.as_slice().iter().sum::<f64>() / (n * n) as f64;
        let var: f64 =
            z.as_slice().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n * n) as f64;
        assert!(mean.abs() < 0.5, "sample mean {mean}");
        assert!((var.sqrt() - 20.0).abs() < 0.5, "sample std {}", var.sqrt());
    }

    #[test]
    fn psnr_examples() {
        let a = ImageGray::constant(4, 4, 10.0);
        assert_eq!(psnr(&a, &a).unwrap(), 99.0);
        let b = ImageGray::constant(4, 4, 265.0);
        assert!((psnr(&a, &b).unwrap() - 0.0).abs() < 1e-12);
        let c = ImageGray::constant(4, 4, 35.5);
        assert!((psnr(&a, &c).unwrap() - 20.0).abs() < 1e-12);
        let d = ImageGray::constant(4, 5, 10.0);
        assert!(psnr(&a, &d).is_err());
    }

    #[test]
    fn project_box_examples() {
        assert_eq!(
            project_box(&[-3.0, 100.0, 300.0], 0.0, 255.0).unwrap(),
            vec![0.0, 100.0, 255.0]
        );
        let x = vec![1.0, 2.0];
        assert_eq!(project_box(&x, 0.0, 255.0).unwrap(), x);
        let once = project_box(&[-5.0, 9.0], 0.0, 8.0).unwrap();
        assert_eq!(project_box(&once, 0.0, 8.0).unwrap(), once);
        assert!(project_box(&x, 1.0, 0.0).is_err());
    }

    #[test]
    fn pgm_roundtrip() {
        let dir = std::env::temp_dir().join("spf_denoise_pgm_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.pgm");
        let img = ImageGray::new(4, 4, (0..16).map(|i| (i * 16) as f64).collect()).unwrap();
        write_pgm(&img, &path).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn pgm_error_cases() {
        assert!(matches!(
            parse_pgm(b"P2\n2 2\n255\n"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_pgm(b"P5\n2 2\n65535\n\0\0\0\0"),
            Err(ImageError::UnsupportedDepth(65535))
        ));
        assert!(matches!(
            parse_pgm(b"P5\n2 2\n255\n\0\0"),
            Err(ImageError::TruncatedPayload { .. })
        ));
    }

    #[test]
    fn pgm_non_square_and_comments() {
        let data = b"P5\n# a comment\n3 2\n255\n\x01\x02\x03\x04\x05\x06";
        let img = parse_pgm(data).unwrap();
        assert_eq!((img.rows(), img.cols()), (2, 3));
        assert!(img.n_side().is_none());
        // row-major payload, column-major storage
        assert_eq!(img.get(0, 0), 1.0);
        assert_eq!(img.get(0, 2), 3.0);
        assert_eq!(img.get(1, 0), 4.0);
    }
}
