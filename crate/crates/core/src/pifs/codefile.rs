//! Binary serialisation of [`FractalCode`].
//!
//! Layout (little-endian):
//!
//! | bytes | field                                   |
//! |-------|-----------------------------------------|
//! | 4     | magic `HPIF`                            |
//! | 1     | version (1)                             |
//! | 2     | range size `N`                          |
//! | 2     | domain stride                           |
//! | 4     | `s_max` × 10000                         |
//! | 1     | contrast bits                           |
//! | 1     | offset bits                             |
//! | 4 × 4 | image width, image height, grid w, grid h |
//! | 7 × k | entries: domain index (u32), isometry, s level, o level |

use std::io::{Read, Write};

use super::{EncoderConfig, FractalCode, FractalCodeEntry};
use crate::error::{Error, Result};
use crate::isometry::Isometry;

pub const CODE_MAGIC: &[u8; 4] = b"HPIF";
pub const CODE_VERSION: u8 = 1;

const ENTRY_BYTES: usize = 7;

impl FractalCode {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(31 + ENTRY_BYTES * self.entries().len());
        out.extend_from_slice(CODE_MAGIC);
        out.push(CODE_VERSION);
        out.extend_from_slice(&self.config().header_bytes());
        let (w, h) = self.image_size();
        let (gw, gh) = self.grid_size();
        for v in [w, h, gw, gh] {
            out.extend_from_slice(&(v as u32).to_le_bytes());
        }
        for e in self.entries() {
            out.extend_from_slice(&e.domain_index.to_le_bytes());
            out.extend_from_slice(&[e.isometry.id(), e.s_q, e.o_q]);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |why: String| Error::format("fractal code", why);
        if bytes.len() < 5 || &bytes[..4] != CODE_MAGIC {
            return Err(bad("missing HPIF magic".into()));
        }
        if bytes[4] != CODE_VERSION {
            return Err(bad(format!("unsupported version {}", bytes[4])));
        }
        let header = bytes
            .get(5..31)
            .ok_or_else(|| bad("truncated header".into()))?;
        let config = EncoderConfig::from_header_bytes(header[..10].try_into().expect("10 bytes"))?;
        let word = |i: usize| {
            u32::from_le_bytes(header[10 + 4 * i..14 + 4 * i].try_into().expect("4 bytes")) as usize
        };
        let (w, h, gw, gh) = (word(0), word(1), word(2), word(3));
        let n = config.range_size;
        if gw.checked_mul(n) != Some(w) || gh.checked_mul(n) != Some(h) {
            return Err(bad(format!(
                "grid {gw}x{gh} inconsistent with {w}x{h} image and range size {n}"
            )));
        }
        let count = gw
            .checked_mul(gh)
            .ok_or_else(|| bad("grid too large".into()))?;
        let body = &bytes[31..];
        if body.len() != count * ENTRY_BYTES {
            return Err(bad(format!(
                "expected {} entry bytes, found {}",
                count * ENTRY_BYTES,
                body.len()
            )));
        }
        let entries = body
            .chunks_exact(ENTRY_BYTES)
            .map(|c| {
                Ok(FractalCodeEntry {
                    domain_index: u32::from_le_bytes([c[0], c[1], c[2], c[3]]),
                    isometry: Isometry::from_id(c[4])?,
                    s_q: c[5],
                    o_q: c[6],
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| bad(e.to_string()))?;
        FractalCode::new(config, w, h, entries).map_err(|e| bad(e.to_string()))
    }
}

pub fn write_code<W: Write>(code: &FractalCode, mut w: W) -> Result<()> {
    w.write_all(&code.to_bytes())?;
    Ok(())
}

pub fn read_code<R: Read>(mut r: R) -> Result<FractalCode> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    FractalCode::from_bytes(&bytes)
}
