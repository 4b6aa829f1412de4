//! Head pose estimation by fractal image coding.
//!
//! A masked face image is resized to 256×256 and encoded with a
//! partitioned iterated function system ([`pifs`]). The per-block transform
//! parameters are flattened into a fixed-length symbol vector ([`codevec`])
//! and the pose of the nearest labelled vector in a reference gallery
//! ([`gallery`]), measured by Hamming distance, is the estimate. [`eval`]
//! computes per-axis mean absolute errors, cumulative error curves and
//! error-by-angle histograms under leave-one-subject-out or random-split
//! protocols.
//!
//! ```
//! use fracpose::{encode, decode, EncoderConfig, GrayImage};
//!
//! let img = GrayImage::from_fn(32, 32, |r, c| (r * 4 + c * 2) as u8).unwrap();
//! let cfg = EncoderConfig::with_range_size(4);
//! let code = encode(&img, &cfg).unwrap();
//! let approx = decode(&code, None, 10).unwrap();
//! assert_eq!(approx.width(), 32);
//! ```

pub mod codevec;
pub mod error;
pub mod eval;
pub mod gallery;
pub mod image;
pub mod isometry;
pub mod manifest;
pub mod par;
pub mod pgm;
pub mod pifs;
pub mod pose;
pub mod synth;

pub use codevec::{hamming, vectorize, CodeVector, HammingMode};
pub use error::{Error, Result};
pub use eval::{EvalReport, MaeRow, Prediction, Protocol, ProtocolReport};
pub use gallery::{build_gallery, query, Gallery, GalleryEntry, Match};
pub use image::{Block, GrayImage};
pub use isometry::Isometry;
pub use manifest::{split_leave_one_subject_out, split_random, Manifest, ManifestRow};
pub use par::Exec;
pub use pifs::{decode, encode, EncoderConfig, FractalCode, FractalCodeEntry};
pub use pose::{Axis, PoseLabel};

/// Peak signal-to-noise ratio in dB between two equally sized images.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::invalid("PSNR needs images of equal size"));
    }
    let se: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum();
    if se == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = se as f64 / a.pixels().len() as f64;
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}
