//! Binary PPM (P6, 8-bit) images as signals sensed by a Hadamard ensemble.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{invalid, Result, RprError};
use crate::objective::RprProblem;
use crate::operators::{HadamardEnsemble, MeasurementOperator};

/// Largest padded signal length accepted.
const MAX_SIGNAL_LEN: usize = 1 << 28;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PpmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Interleaved RGB samples in row-major pixel order.
    pub samples: Vec<u8>,
}

impl PpmImage {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let magic = next_token(bytes, &mut pos)?;
        if magic != b"P6" {
            return Err(RprError::Ppm(format!("expected magic P6, found {:?}", String::from_utf8_lossy(magic))));
        }
        let width = header_number(bytes, &mut pos, "width")?;
        let height = header_number(bytes, &mut pos, "height")?;
        let maxval = header_number(bytes, &mut pos, "maxval")?;
        if width == 0 || height == 0 {
            return Err(RprError::Ppm("zero image dimension".into()));
        }
        if !(1..=255).contains(&maxval) {
            return Err(RprError::Ppm(format!("only 8-bit images are supported, maxval {maxval}")));
        }
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(pos) {
            Some(c) if c.is_ascii_whitespace() => pos += 1,
            _ => return Err(RprError::Ppm("missing whitespace after maxval".into())),
        }
        let len = width
            .checked_mul(height)
            .and_then(|v| v.checked_mul(3))
            .ok_or_else(|| RprError::Ppm("image dimensions overflow".into()))?;
        let raster = bytes.get(pos..pos + len).ok_or_else(|| {
            RprError::Ppm(format!("raster truncated: need {len} bytes, have {}", bytes.len().saturating_sub(pos)))
        })?;
        Ok(Self { width, height, maxval: maxval as u16, samples: raster.to_vec() })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::parse(&bytes)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        out.extend_from_slice(&self.samples);
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::File::create(path)?.write_all(&self.to_bytes())?;
        Ok(())
    }
}

fn skip_space_and_comments(bytes: &[u8], pos: &mut usize) {
    while let Some(&c) = bytes.get(*pos) {
        if c.is_ascii_whitespace() {
            *pos += 1;
        } else if c == b'#' {
            while bytes.get(*pos).is_some_and(|&c| c != b'\n') {
                *pos += 1;
            }
        } else {
            break;
        }
    }
}

fn next_token<'b>(bytes: &'b [u8], pos: &mut usize) -> Result<&'b [u8]> {
    skip_space_and_comments(bytes, pos);
    let start = *pos;
    while bytes.get(*pos).is_some_and(|c| !c.is_ascii_whitespace() && *c != b'#') {
        *pos += 1;
    }
    if start == *pos {
        return Err(RprError::Ppm("unexpected end of header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .filter(|s| s.bytes().all(|c| c.is_ascii_digit()))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| RprError::Ppm(format!("bad {what} {:?}", String::from_utf8_lossy(tok))))
}

/// Samples scaled to `[0, 1]`, zero-padded to the next power of two.
pub fn image_to_signal(img: &PpmImage) -> Result<Vec<f64>> {
    let len = img.samples.len();
    let n = len.checked_next_power_of_two().filter(|&n| n <= MAX_SIGNAL_LEN).ok_or_else(|| {
        invalid(format!("image with {len} samples exceeds the maximum signal length {MAX_SIGNAL_LEN}"))
    })?;
    let scale = f64::from(img.maxval);
    let mut x: Vec<f64> = img.samples.iter().map(|&v| f64::from(v) / scale).collect();
    x.resize(n, 0.0);
    Ok(x)
}

/// Inverse of [`image_to_signal`] up to the global sign: the signal is flipped
/// when its image part sums to a negative value, then clamped and rounded.
pub fn signal_to_image(signal: &[f64], width: usize, height: usize, maxval: u16) -> Result<PpmImage> {
    let len = width * height * 3;
    if signal.len() < len {
        return Err(RprError::DimensionMismatch { expected: len, got: signal.len() });
    }
    let prefix = &signal[..len];
    let flip = if prefix.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let scale = f64::from(maxval);
    let samples = prefix.iter().map(|v| ((flip * v).clamp(0.0, 1.0) * scale).round() as u8).collect();
    Ok(PpmImage { width, height, maxval, samples })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImageSpec {
    pub path: PathBuf,
    pub blocks: usize,
    pub p_fail: f64,
    pub seed: u64,
}

impl ImageSpec {
    pub const DEFAULT_BLOCKS: usize = 6;
}

pub fn gen_hadamard_problem(spec: &ImageSpec) -> Result<RprProblem> {
    let img = PpmImage::read(&spec.path)?;
    hadamard_problem_from_image(&img, spec.blocks, spec.p_fail, spec.seed)
}

/// `x⋆` from the image, `A` a `blocks`-fold Hadamard ensemble, corrupted
/// measurements as for synthetic data. `L = 2` exactly for this ensemble.
pub fn hadamard_problem_from_image(img: &PpmImage, blocks: usize, p_fail: f64, seed: u64) -> Result<RprProblem> {
    let truth = image_to_signal(img)?;
    let op: MeasurementOperator = HadamardEnsemble::random(truth.len(), blocks, seed)?.into();
    let mut b: Vec<f64> = op.apply(&truth)?.into_iter().map(|v| v * v).collect();
    let corrupted = super::corrupt(&mut b, p_fail, seed)?;
    RprProblem::with_lipschitz(op, b, 2.0)?.with_truth(truth)?.with_corrupted(corrupted)
}
