//! Partitioned iterated function system codec.
//!
//! Ranges are the non-overlapping `N`×`N` tiles of the image, domains the
//! overlapping `2N`×`2N` blocks on a stride lattice. Each range is
//! approximated by `s · T(shrink(D)) + o` for the best domain `D`, square
//! isometry `T` and quantised contrast/offset pair `(s, o)`.

mod codefile;
mod decoder;
mod encoder;
mod fit;
mod quant;

pub use codefile::{read_code, write_code, CODE_MAGIC, CODE_VERSION};
pub use decoder::{decode, decode_trace, DEFAULT_INITIAL_GRAY};
pub use encoder::{encode, encode_with, Encoding};
pub use fit::{block_distortion, fit_contrast_offset};
pub use quant::{dequantize_o, dequantize_s, quantize_o, quantize_s, Quantizer, O_RANGE};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::isometry::Isometry;

/// Fixed-point scale used to store the contrast bound.
pub const S_MAX_SCALE: u32 = 10_000;

/// Codec parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Range block side `N`; domains are `2N`.
    pub range_size: usize,
    pub domain_stride: usize,
    /// Bound on `|s|`. Stored with four decimal places.
    pub s_max: f64,
    pub s_bits: u8,
    pub o_bits: u8,
    pub decode_iterations: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            range_size: 8,
            domain_stride: 8,
            s_max: 0.99,
            s_bits: 5,
            o_bits: 7,
            decode_iterations: 10,
        }
    }
}

impl EncoderConfig {
    /// Default configuration at a given range size (stride = range size).
    pub fn with_range_size(n: usize) -> Self {
        Self {
            range_size: n,
            domain_stride: n,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.range_size < 2 || !self.range_size.is_multiple_of(2) || self.range_size > 64 {
            return Err(Error::invalid(format!(
                "range size must be even and within 2..=64, got {}",
                self.range_size
            )));
        }
        if self.domain_stride == 0 || self.domain_stride > u16::MAX as usize {
            return Err(Error::invalid("domain stride must be within 1..=65535"));
        }
        if !(self.s_max > 0.0 && self.s_max <= 1.0) {
            return Err(Error::invalid(format!(
                "s_max must lie in (0, 1], got {}",
                self.s_max
            )));
        }
        if self.s_max_fixed() == 0 {
            return Err(Error::invalid("s_max rounds to zero at 1e-4 resolution"));
        }
        for (name, bits) in [("s_bits", self.s_bits), ("o_bits", self.o_bits)] {
            if !(1..=8).contains(&bits) {
                return Err(Error::invalid(format!(
                    "{name} must be within 1..=8, got {bits}"
                )));
            }
        }
        Ok(())
    }

    /// `s_max` in units of 1e-4, the form used for all exact arithmetic.
    pub fn s_max_fixed(&self) -> u32 {
        (self.s_max * f64::from(S_MAX_SCALE)).round() as u32
    }

    /// The bytes that define code compatibility (everything except the
    /// decoder iteration count).
    pub(crate) fn header_bytes(&self) -> [u8; 10] {
        let mut out = [0u8; 10];
        out[0..2].copy_from_slice(&(self.range_size as u16).to_le_bytes());
        out[2..4].copy_from_slice(&(self.domain_stride as u16).to_le_bytes());
        out[4..8].copy_from_slice(&self.s_max_fixed().to_le_bytes());
        out[8] = self.s_bits;
        out[9] = self.o_bits;
        out
    }

    pub(crate) fn from_header_bytes(b: &[u8; 10]) -> Result<Self> {
        let cfg = Self {
            range_size: u16::from_le_bytes([b[0], b[1]]) as usize,
            domain_stride: u16::from_le_bytes([b[2], b[3]]) as usize,
            s_max: f64::from(u32::from_le_bytes([b[4], b[5], b[6], b[7]])) / f64::from(S_MAX_SCALE),
            s_bits: b[8],
            o_bits: b[9],
            decode_iterations: Self::default().decode_iterations,
        };
        cfg.validate()
            .map_err(|e| Error::format("encoder config", e.to_string()))?;
        Ok(cfg)
    }

    /// Stable 64-bit digest of the code-defining parameters.
    pub fn fingerprint(&self) -> u64 {
        let digest = Sha256::digest(self.header_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
    }

    pub fn quantizer(&self) -> Quantizer {
        Quantizer::new(self)
    }
}

/// Transform parameters of one range block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FractalCodeEntry {
    pub domain_index: u32,
    pub isometry: Isometry,
    pub s_q: u8,
    pub o_q: u8,
}

/// The complete PIFS description of an image.
#[derive(Clone, Debug, PartialEq)]
pub struct FractalCode {
    config: EncoderConfig,
    image_w: usize,
    image_h: usize,
    grid_w: usize,
    grid_h: usize,
    entries: Vec<FractalCodeEntry>,
}

impl FractalCode {
    pub fn new(
        config: EncoderConfig,
        image_w: usize,
        image_h: usize,
        entries: Vec<FractalCodeEntry>,
    ) -> Result<Self> {
        config.validate()?;
        let n = config.range_size;
        if image_w == 0 || image_h == 0 || !image_w.is_multiple_of(n) || !image_h.is_multiple_of(n)
        {
            return Err(Error::invalid(format!(
                "{image_w}x{image_h} is not a multiple of range size {n}"
            )));
        }
        let (grid_w, grid_h) = (image_w / n, image_h / n);
        if entries.len() != grid_w * grid_h {
            return Err(Error::invalid(format!(
                "{} entries for a {grid_w}x{grid_h} range grid",
                entries.len()
            )));
        }
        let pool = crate::image::domain_origins(image_w, image_h, n, config.domain_stride)?.len();
        let q = config.quantizer();
        for (i, e) in entries.iter().enumerate() {
            if e.domain_index as usize >= pool
                || u32::from(e.s_q) >= q.s_levels()
                || u32::from(e.o_q) >= q.o_levels()
            {
                return Err(Error::invalid(format!(
                    "entry {i} is out of range (pool {pool}, {} s levels, {} o levels)",
                    q.s_levels(),
                    q.o_levels()
                )));
            }
        }
        Ok(Self {
            config,
            image_w,
            image_h,
            grid_w,
            grid_h,
            entries,
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn image_size(&self) -> (usize, usize) {
        (self.image_w, self.image_h)
    }

    pub fn grid_size(&self) -> (usize, usize) {
        (self.grid_w, self.grid_h)
    }

    pub fn entries(&self) -> &[FractalCodeEntry] {
        &self.entries
    }

    /// Number of domain blocks in the pool this code indexes into.
    pub fn domain_pool_size(&self) -> usize {
        crate::image::domain_origins(
            self.image_w,
            self.image_h,
            self.config.range_size,
            self.config.domain_stride,
        )
        .map(|v| v.len())
        .unwrap_or(0)
    }
}
