//! Synthetic pose data: a textured, elliptically masked planar card seen by
//! a pinhole camera under arbitrary pitch/yaw/roll.
//!
//! Everything outside the card is black, mimicking a masked face crop.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{round_to_u8, GrayImage};
use crate::manifest::{Manifest, ManifestRow};
use crate::pgm::write_pgm;
use crate::pose::PoseLabel;

/// Camera and card geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderSettings {
    pub size: usize,
    /// Focal length in pixels.
    pub focal: f64,
    /// Camera-to-card distance in card half-heights.
    pub distance: f64,
    /// Card half-width and half-height.
    pub half_width: f64,
    pub half_height: f64,
    /// Supersampling factor per axis.
    pub supersample: usize,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            size: 256,
            focal: 420.0,
            distance: 4.0,
            half_width: 0.8,
            half_height: 1.0,
            supersample: 2,
        }
    }
}

/// Intensity of the card at texture coordinates `(u, v)` in `[-1, 1]²`,
/// or `None` outside the elliptical mask.
pub fn card_texture(u: f64, v: f64) -> Option<f64> {
    if u * u + v * v > 1.0 {
        return None;
    }
    let blob = |cu: f64, cv: f64, su: f64, sv: f64, amp: f64| {
        let (du, dv) = ((u - cu) / su, (v - cv) / sv);
        amp * (-0.5 * (du * du + dv * dv)).exp()
    };
    // Vertical shading gradient, a few "features" and a fine texture.
    let mut t = 150.0 + 35.0 * v - 15.0 * u;
    t += blob(-0.38, -0.30, 0.13, 0.08, -90.0);
    t += blob(0.38, -0.30, 0.13, 0.08, -90.0);
    t += blob(0.0, 0.05, 0.07, 0.22, 45.0);
    t += blob(0.0, 0.50, 0.28, 0.07, -70.0);
    t += blob(-0.45, -0.55, 0.25, 0.05, -50.0);
    t += blob(0.45, -0.55, 0.25, 0.05, -50.0);
    t += 12.0 * (9.0 * u + 2.0 * v).sin() * (7.0 * v - 1.5 * u).cos();
    // Soft fall-off towards the rim.
    let r2 = u * u + v * v;
    t *= 1.0 - 0.35 * r2 * r2;
    Some(t.clamp(1.0, 255.0))
}

type Mat3 = [[f64; 3]; 3];

fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Rotation `Rz(roll) · Rx(pitch) · Ry(yaw)` in camera coordinates
/// (x right, y down, z forward). Angles in degrees.
pub fn rotation(pose: &PoseLabel) -> [[f64; 3]; 3] {
    let (p, y, r) = (
        pose.pitch.to_radians(),
        pose.yaw.to_radians(),
        pose.roll.to_radians(),
    );
    let rx = [
        [1.0, 0.0, 0.0],
        [0.0, p.cos(), -p.sin()],
        [0.0, p.sin(), p.cos()],
    ];
    let ry = [
        [y.cos(), 0.0, y.sin()],
        [0.0, 1.0, 0.0],
        [-y.sin(), 0.0, y.cos()],
    ];
    let rz = [
        [r.cos(), -r.sin(), 0.0],
        [r.sin(), r.cos(), 0.0],
        [0.0, 0.0, 1.0],
    ];
    mul(&rz, &mul(&rx, &ry))
}

/// Renders the card at `pose`.
pub fn render_pose(pose: &PoseLabel, settings: &RenderSettings) -> GrayImage {
    let rot = rotation(pose);
    let col = |j: usize| [rot[0][j], rot[1][j], rot[2][j]];
    let (eu, ev, normal) = (col(0), col(1), col(2));
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let centre = [0.0, 0.0, settings.distance];
    let plane_d = dot(normal, centre);
    let ss = settings.supersample.max(1);
    let half = settings.size as f64 / 2.0;

    let mut pixels = Vec::with_capacity(settings.size * settings.size);
    for py in 0..settings.size {
        for px in 0..settings.size {
            let mut acc = 0.0;
            for sy in 0..ss {
                for sx in 0..ss {
                    let x = px as f64 + (sx as f64 + 0.5) / ss as f64 - half;
                    let y = py as f64 + (sy as f64 + 0.5) / ss as f64 - half;
                    let ray = [x / settings.focal, y / settings.focal, 1.0];
                    let denom = dot(normal, ray);
                    if denom.abs() < 1e-12 {
                        continue;
                    }
                    let t = plane_d / denom;
                    if t <= 0.0 {
                        continue;
                    }
                    let hit = [
                        ray[0] * t - centre[0],
                        ray[1] * t - centre[1],
                        ray[2] * t - centre[2],
                    ];
                    let u = dot(eu, hit) / settings.half_width;
                    let v = dot(ev, hit) / settings.half_height;
                    acc += card_texture(u, v).unwrap_or(0.0);
                }
            }
            pixels.push(round_to_u8(acc / (ss * ss) as f64));
        }
    }
    GrayImage::new(settings.size, settings.size, pixels).expect("square render")
}

/// Cartesian grid over pitch, yaw and roll: `-max..=max` in `step` degrees
/// on each axis. Pitch varies slowest.
pub fn pose_grid(pitch_max: i32, yaw_max: i32, roll_max: i32, step: i32) -> Vec<PoseLabel> {
    let axis = |max: i32| {
        (-max..=max)
            .step_by(step as usize)
            .map(f64::from)
            .collect::<Vec<_>>()
    };
    let mut out = Vec::new();
    for &pitch in &axis(pitch_max) {
        for &yaw in &axis(yaw_max) {
            for &roll in &axis(roll_max) {
                out.push(PoseLabel { pitch, yaw, roll });
            }
        }
    }
    out
}

/// `count` distinct poses drawn from `grid` with a seeded shuffle, returned
/// in grid order.
pub fn sample_poses(grid: &[PoseLabel], count: usize, seed: u64) -> Vec<PoseLabel> {
    let mut idx: Vec<usize> = (0..grid.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut picked: Vec<usize> = idx.into_iter().take(count).collect();
    picked.sort_unstable();
    picked.into_iter().map(|i| grid[i]).collect()
}

/// Renders every pose into `dir` as PGM and writes `dir/manifest.csv`.
/// Subject ids are assigned round-robin over `subjects` labels when given.
pub fn write_dataset(
    dir: &Path,
    poses: &[PoseLabel],
    settings: &RenderSettings,
    subjects: Option<usize>,
) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| Error::from(e).at_path(dir))?;
    let mut rows = Vec::with_capacity(poses.len());
    for (i, pose) in poses.iter().enumerate() {
        let name = format!(
            "pose_{i:04}_p{:+03}_y{:+03}_r{:+03}.pgm",
            pose.pitch as i32, pose.yaw as i32, pose.roll as i32
        );
        write_pgm(&render_pose(pose, settings), dir.join(&name))?;
        rows.push(ManifestRow {
            path: name,
            pose: *pose,
            subject: subjects.map(|k| format!("s{}", i % k.max(1))),
        });
    }
    let manifest = Manifest::new(rows, dir)?;
    manifest.save(dir.join("manifest.csv"))?;
    Ok(manifest)
}
