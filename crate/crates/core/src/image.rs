//! 8-bit grayscale rasters and the block geometry used by the codec.

use crate::error::{Error, Result};
use crate::isometry::Isometry;

/// Side length every image is normalised to before encoding.
pub const CANONICAL_SIZE: usize = 256;

/// Rounds half away from zero and clamps into the 8-bit range.
#[inline]
pub fn round_to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Row-major single-channel raster.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "pixel buffer has {} bytes, expected {}x{} = {}",
                pixels.len(),
                width,
                height,
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(width, height, pixels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Copies the `size`×`size` square at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, size: usize) -> Result<Block> {
        if size == 0 || row + size > self.height || col + size > self.width {
            return Err(Error::invalid(format!(
                "block {size}x{size} at ({row},{col}) does not fit a {}x{} image",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(size * size);
        for r in row..row + size {
            let start = r * self.width + col;
            data.extend_from_slice(&self.pixels[start..start + size]);
        }
        Ok(Block {
            origin: (row, col),
            size,
            data,
        })
    }

    /// Writes a block back at its origin.
    pub fn paste(&mut self, block: &Block) -> Result<()> {
        let (row, col) = block.origin;
        let n = block.size;
        if row + n > self.height || col + n > self.width {
            return Err(Error::invalid("block does not fit inside the image"));
        }
        for r in 0..n {
            let start = (row + r) * self.width + col;
            self.pixels[start..start + n].copy_from_slice(&block.data[r * n..(r + 1) * n]);
        }
        Ok(())
    }
}

/// A square tile of intensities together with where it came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    origin: (usize, usize),
    size: usize,
    data: Vec<u8>,
}

impl Block {
    /// A free-standing block with origin `(0, 0)`.
    pub fn new(size: usize, data: Vec<u8>) -> Result<Self> {
        Self::with_origin((0, 0), size, data)
    }

    pub fn with_origin(origin: (usize, usize), size: usize, data: Vec<u8>) -> Result<Self> {
        if size == 0 || data.len() != size * size {
            return Err(Error::invalid(format!(
                "block data has {} values, expected {size}x{size}",
                data.len()
            )));
        }
        Ok(Self { origin, size, data })
    }

    pub fn from_rows(rows: &[&[u8]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("block rows must form a square"));
        }
        Self::new(n, rows.concat())
    }

    #[inline]
    pub fn origin(&self) -> (usize, usize) {
        self.origin
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.size + col]
    }
}

/// Bilinear resampling with corner-aligned sample positions: destination
/// pixel `d` reads source coordinate `d * (src - 1) / (dst - 1)`.
pub fn resize(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("target dimensions must be positive"));
    }
    if width == img.width && height == img.height {
        return Ok(img.clone());
    }
    let xs = sample_positions(img.width, width);
    let ys = sample_positions(img.height, height);
    let mut pixels = Vec::with_capacity(width * height);
    for &(y0, y1, fy) in &ys {
        let row0 = &img.pixels[y0 * img.width..(y0 + 1) * img.width];
        let row1 = &img.pixels[y1 * img.width..(y1 + 1) * img.width];
        for &(x0, x1, fx) in &xs {
            let top = f64::from(row0[x0]) * (1.0 - fx) + f64::from(row0[x1]) * fx;
            let bottom = f64::from(row1[x0]) * (1.0 - fx) + f64::from(row1[x1]) * fx;
            pixels.push(round_to_u8(top * (1.0 - fy) + bottom * fy));
        }
    }
    GrayImage::new(width, height, pixels)
}

/// For each destination index: the two neighbouring source indices and the
/// weight of the second one.
fn sample_positions(src: usize, dst: usize) -> Vec<(usize, usize, f64)> {
    (0..dst)
        .map(|d| {
            if dst == 1 || src == 1 {
                return (0, 0, 0.0);
            }
            // Exact rational position d*(src-1)/(dst-1), split into integer
            // and fractional parts without floating error in the integer part.
            let num = d * (src - 1);
            let den = dst - 1;
            let i0 = num / den;
            let frac = (num % den) as f64 / den as f64;
            let i1 = (i0 + 1).min(src - 1);
            (i0, i1, frac)
        })
        .collect()
}

/// Normalises an image to the 256×256 working resolution.
pub fn resize_to_256(img: &GrayImage) -> GrayImage {
    resize(img, CANONICAL_SIZE, CANONICAL_SIZE).expect("positive target size")
}

/// Halves a block by averaging each 2×2 quad.
pub fn downsample_2x(b: &Block) -> Result<Block> {
    if !b.size.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "cannot halve a block of odd size {}",
            b.size
        )));
    }
    let half = b.size / 2;
    let mut data = vec![0u8; half * half];
    downsample_2x_into(&b.data, b.size, &mut data);
    Block::with_origin(b.origin, half, data)
}

/// Averages 2×2 quads of a `size`×`size` row-major slice (stride `size`).
pub(crate) fn downsample_2x_into(src: &[u8], size: usize, dst: &mut [u8]) {
    downsample_2x_strided(src, size, size, dst)
}

pub(crate) fn downsample_2x_strided(src: &[u8], stride: usize, size: usize, dst: &mut [u8]) {
    let half = size / 2;
    for r in 0..half {
        let a = &src[2 * r * stride..];
        let b = &src[(2 * r + 1) * stride..];
        for c in 0..half {
            let sum = u16::from(a[2 * c])
                + u16::from(a[2 * c + 1])
                + u16::from(b[2 * c])
                + u16::from(b[2 * c + 1]);
            // sum/4 rounded half away from zero; all values are non-negative.
            dst[r * half + c] = ((sum + 2) / 4) as u8;
        }
    }
}

/// Applies a square isometry to a block; the origin is kept.
pub fn apply_isometry(b: &Block, t: Isometry) -> Block {
    let mut data = vec![0u8; b.data.len()];
    t.apply_slice(&b.data, b.size, &mut data);
    Block {
        origin: b.origin,
        size: b.size,
        data,
    }
}

/// Non-overlapping `n`×`n` tiles in row-major order.
pub fn extract_range_blocks(img: &GrayImage, n: usize) -> Result<Vec<Block>> {
    if n == 0 || !img.width.is_multiple_of(n) || !img.height.is_multiple_of(n) {
        return Err(Error::invalid(format!(
            "{}x{} image cannot be tiled by {n}x{n} blocks",
            img.width, img.height
        )));
    }
    let mut out = Vec::with_capacity((img.width / n) * (img.height / n));
    for r in (0..img.height).step_by(n) {
        for c in (0..img.width).step_by(n) {
            out.push(img.block(r, c, n)?);
        }
    }
    Ok(out)
}

/// Origins of all `2n`×`2n` domain blocks on a `stride` lattice, row-major.
pub fn domain_origins(
    width: usize,
    height: usize,
    n: usize,
    stride: usize,
) -> Result<Vec<(usize, usize)>> {
    let side = 2 * n;
    if n == 0 || side > width.min(height) {
        return Err(Error::invalid(format!(
            "domain blocks of side {side} do not fit a {width}x{height} image"
        )));
    }
    if stride == 0 {
        return Err(Error::invalid("domain stride must be at least 1"));
    }
    let mut out = Vec::new();
    for r in (0..=height - side).step_by(stride) {
        for c in (0..=width - side).step_by(stride) {
            out.push((r, c));
        }
    }
    Ok(out)
}

/// Overlapping `2n`×`2n` blocks at every `stride` lattice point that fits.
pub fn extract_domain_blocks(img: &GrayImage, n: usize, stride: usize) -> Result<Vec<Block>> {
    domain_origins(img.width, img.height, n, stride)?
        .into_iter()
        .map(|(r, c)| img.block(r, c, 2 * n))
        .collect()
}
