//! Binary PGM (`P5`, maxval 255) reading and writing.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::GrayImage;

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;
    let magic = header_token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(Error::format("PGM", "expected P5 magic"));
    }
    let width = header_number(bytes, &mut pos, "width")?;
    let height = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(Error::format(
            "PGM",
            format!("only maxval 255 is supported, got {maxval}"),
        ));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format("PGM", "missing whitespace after maxval")),
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| Error::format("PGM", "dimensions overflow"))?;
    let raster = bytes
        .get(pos..pos + len)
        .ok_or_else(|| Error::format("PGM", format!("raster truncated, expected {len} bytes")))?;
    GrayImage::new(width, height, raster.to_vec()).map_err(|e| Error::format("PGM", e.to_string()))
}

fn skip_space_and_comments(bytes: &[u8], pos: &mut usize) {
    while let Some(&b) = bytes.get(*pos) {
        if b.is_ascii_whitespace() {
            *pos += 1;
        } else if b == b'#' {
            while let Some(&b) = bytes.get(*pos) {
                *pos += 1;
                if b == b'\n' || b == b'\r' {
                    break;
                }
            }
        } else {
            break;
        }
    }
}

fn header_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    skip_space_and_comments(bytes, pos);
    let start = *pos;
    while bytes
        .get(*pos)
        .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
    {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::format("PGM", "truncated header"));
    }
    Ok(&bytes[start..*pos])
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = header_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format("PGM", format!("bad {what} field")))
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn write_pgm_to<W: Write>(img: &GrayImage, mut w: W) -> io::Result<()> {
    w.write_all(&encode_pgm(img))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    fs::read(path)
        .map_err(Error::from)
        .and_then(|b| decode_pgm(&b))
        .map_err(|e| e.at_path(path))
}

pub fn write_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|e| Error::from(e).at_path(path))
}
