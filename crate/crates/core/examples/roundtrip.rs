//! Encodes a PGM, decodes it and reports PSNR and timings.
//!
//! `cargo run --release -p fracpose-core --example roundtrip -- image.pgm`

use std::time::Instant;

use fracpose::pifs::{decode, encode_with};
use fracpose::{pgm, psnr, EncoderConfig, Exec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .ok_or("usage: roundtrip IMAGE.pgm")?;
    let img = pgm::read_pgm(&path)?;
    let cfg = EncoderConfig::default();
    let t = Instant::now();
    let enc = encode_with(&img, &cfg, Exec::default())?;
    let secs = t.elapsed().as_secs_f64();
    println!(
        "pool {} domains, mean block distortion {:.1}, encode {:.2}s",
        enc.pool_size,
        enc.mean_distortion(),
        secs
    );
    for it in [1, 2, 5, 10, 15] {
        let out = decode(&enc.code, None, it)?;
        println!("iterations {it:2}: PSNR {:.2} dB", psnr(&img, &out)?);
    }
    Ok(())
}
