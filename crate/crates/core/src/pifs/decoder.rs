use super::FractalCode;
use crate::error::{Error, Result};
use crate::image::{domain_origins, downsample_2x_strided, round_to_u8, GrayImage};
use crate::par::{map_indexed, Exec};

/// Intensity of the default starting image.
pub const DEFAULT_INITIAL_GRAY: u8 = 128;

/// Iterates the code's transform `iterations` times starting from `initial`
/// (flat gray when `None`) and returns the last iterate.
pub fn decode(
    code: &FractalCode,
    initial: Option<&GrayImage>,
    iterations: usize,
) -> Result<GrayImage> {
    let mut current = starting_image(code, initial)?;
    let origins = origins(code)?;
    for _ in 0..iterations {
        current = step(code, &origins, &current);
    }
    Ok(current)
}

/// Every iterate `1..=iterations`, in order.
pub fn decode_trace(
    code: &FractalCode,
    initial: Option<&GrayImage>,
    iterations: usize,
) -> Result<Vec<GrayImage>> {
    let mut current = starting_image(code, initial)?;
    let origins = origins(code)?;
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        current = step(code, &origins, &current);
        out.push(current.clone());
    }
    Ok(out)
}

fn starting_image(code: &FractalCode, initial: Option<&GrayImage>) -> Result<GrayImage> {
    let (w, h) = code.image_size();
    match initial {
        Some(img) if (img.width(), img.height()) != (w, h) => Err(Error::invalid(format!(
            "initial image is {}x{}, code expects {w}x{h}",
            img.width(),
            img.height()
        ))),
        Some(img) => Ok(img.clone()),
        None => GrayImage::filled(w, h, DEFAULT_INITIAL_GRAY),
    }
}

fn origins(code: &FractalCode) -> Result<Vec<(usize, usize)>> {
    let (w, h) = code.image_size();
    let cfg = code.config();
    domain_origins(w, h, cfg.range_size, cfg.domain_stride)
}

/// One application of the transform. Reads only `prev`, so every tile sees
/// the same previous iterate regardless of evaluation order.
fn step(code: &FractalCode, origins: &[(usize, usize)], prev: &GrayImage) -> GrayImage {
    let n = code.config().range_size;
    let q = code.config().quantizer();
    let (w, h) = code.image_size();
    let (gw, _) = code.grid_size();
    let tiles = map_indexed(Exec::default(), code.entries().len(), |i| {
        let e = code.entries()[i];
        let (r, c) = origins[e.domain_index as usize];
        let mut shrunk = vec![0u8; n * n];
        downsample_2x_strided(&prev.pixels()[r * w + c..], w, 2 * n, &mut shrunk);
        let mut moved = vec![0u8; n * n];
        e.isometry.apply_slice(&shrunk, n, &mut moved);
        let s = q.dequantize_s(e.s_q);
        let o = q.dequantize_o(e.o_q);
        moved
            .into_iter()
            .map(|v| round_to_u8(s * f64::from(v) + o))
            .collect::<Vec<u8>>()
    });
    let mut pixels = vec![0u8; w * h];
    for (i, tile) in tiles.iter().enumerate() {
        let (row, col) = ((i / gw) * n, (i % gw) * n);
        for r in 0..n {
            let start = (row + r) * w + col;
            pixels[start..start + n].copy_from_slice(&tile[r * n..(r + 1) * n]);
        }
    }
    GrayImage::new(w, h, pixels).expect("dimensions come from a valid code")
}
