//! Synthetic pose benchmark: renders a textured card on a pose grid,
//! holds out a random 20% and reports the errors.
//!
//! `cargo run --release -p fracpose-core --example pose_benchmark -- [COUNT] [SEED]`

use std::time::Instant;

use fracpose::eval::{evaluate_encoded, Protocol};
use fracpose::gallery::GalleryEntry;
use fracpose::synth::{pose_grid, render_pose, sample_poses, RenderSettings};
use fracpose::{gallery, EncoderConfig, Exec, HammingMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(406);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    let grid = pose_grid(30, 30, 20, 5);
    let poses = if count >= grid.len() {
        grid
    } else {
        sample_poses(&grid, count, seed)
    };
    let cfg = EncoderConfig::default();
    let settings = RenderSettings::default();
    let t = Instant::now();
    let encoded = poses
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let img = render_pose(p, &settings);
            Ok(GalleryEntry {
                vector: gallery::image_vector(&img, &cfg)?,
                label: *p,
                source_id: format!("{i}"),
                subject_id: None,
            })
        })
        .collect::<fracpose::Result<Vec<_>>>()?;
    eprintln!(
        "encoded {} images in {:.1}s",
        encoded.len(),
        t.elapsed().as_secs_f64()
    );
    for mode in [HammingMode::Symbol, HammingMode::Bit] {
        let report = evaluate_encoded(
            &encoded,
            &cfg,
            Protocol::RandomSplit {
                fraction: 0.8,
                seed: 7,
            },
            mode,
            Exec::default(),
        )?;
        println!("{mode:?}\n{}", report.to_text());
    }
    Ok(())
}
