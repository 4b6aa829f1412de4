//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

#[path = "../../core/tests/common/oracle.rs"]
#[allow(dead_code)]
mod oracle;

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fracpose::codevec::distance;
use fracpose::eval::{run_protocol, Protocol};
use fracpose::gallery::{build_gallery, query};
use fracpose::image::apply_isometry;
use fracpose::pifs::{decode_trace, encode_with};
use fracpose::synth::{pose_grid, sample_poses, write_dataset, RenderSettings};
use fracpose::{
    decode, pgm, psnr, Block, CodeVector, EncoderConfig, Exec, FractalCode, FractalCodeEntry,
    Gallery, GalleryEntry, GrayImage, HammingMode, Isometry, MaeRow, PoseLabel,
};
use oracle::{oracle_encode, oracle_iso_target, OracleParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() <= limit_s, || {
        format!(
            "{what} took {:.2}s, limit {limit_s}s",
            elapsed.as_secs_f64()
        )
    })
}

fn random_block(rng: &mut ChaCha8Rng, n: usize) -> Block {
    Block::new(n, (0..n * n).map(|_| rng.gen()).collect()).unwrap()
}

fn ac1_isometry_group() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for s in Isometry::ALL {
        for t in Isometry::ALL {
            let st = s.then(t);
            for n in [2, 3, 4, 7] {
                for r in 0..n {
                    for c in 0..n {
                        let (r1, c1) = oracle_iso_target(s.id(), r, c, n);
                        let want = oracle_iso_target(t.id(), r1, c1, n);
                        ensure(st.map(r, c, n) == want, || {
                            format!("{s:?} then {t:?} at n={n}")
                        })?;
                    }
                }
            }
            let b = random_block(&mut rng, 8);
            let two = apply_isometry(&apply_isometry(&b, s), t);
            ensure(two.data() == apply_isometry(&b, st).data(), || {
                format!("{s:?} then {t:?} on pixels")
            })?;
        }
        let b = random_block(&mut rng, 5);
        let back = apply_isometry(&apply_isometry(&b, s), s.inverse());
        ensure(back.data() == b.data(), || format!("{s:?} inverse"))?;
    }
    let b = random_block(&mut rng, 6);
    let mut x = b.clone();
    for _ in 0..4 {
        x = apply_isometry(&x, Isometry::Rot90);
    }
    ensure(x.data() == b.data(), || "four quarter turns".into())?;
    let twice = apply_isometry(&apply_isometry(&b, Isometry::Rot90), Isometry::Rot90);
    ensure(
        twice.data() == apply_isometry(&b, Isometry::Rot180).data(),
        || "Rot90 twice".into(),
    )?;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=16);
        let b = random_block(&mut rng, n);
        let t = Isometry::ALL[rng.gen_range(0..8)];
        let mut a = b.data().to_vec();
        let mut o = apply_isometry(&b, t).data().to_vec();
        a.sort_unstable();
        o.sort_unstable();
        ensure(a == o, || format!("multiset changed by {t:?} at n={n}"))?;
    }
    within(start.elapsed(), 1.0, "isometry suite")?;
    Ok(format!(
        "64 pairs, 1000 blocks, {:.3}s",
        start.elapsed().as_secs_f64()
    ))
}

fn ac2_oracle() -> Outcome {
    let start = Instant::now();
    let cfg = EncoderConfig::with_range_size(4);
    let p = OracleParams {
        n: 4,
        stride: 4,
        s_max_e4: 9900,
        s_bits: 5,
        o_bits: 7,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..50 {
        let img = GrayImage::from_fn(16, 16, |_, _| rng.gen()).unwrap();
        let want = oracle_encode(img.pixels(), 16, 16, &p);
        let got = encode_with(&img, &cfg, Exec::default()).map_err(|e| e.to_string())?;
        for (i, (e, ((d, iso, s, o), _))) in got.code.entries().iter().zip(&want).enumerate() {
            ensure(
                (e.domain_index, e.isometry.id(), e.s_q, e.o_q) == (*d, *iso, *s, *o),
                || format!("image {k} range {i}: {e:?} vs oracle {:?}", (d, iso, s, o)),
            )?;
        }
    }
    within(start.elapsed(), 30.0, "oracle comparison")?;
    Ok(format!(
        "50 images entry-identical, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn max_gap(a: &GrayImage, b: &GrayImage) -> u8 {
    a.pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&p, &q)| p.abs_diff(q))
        .max()
        .unwrap()
}

fn ac3_contractivity() -> Outcome {
    let cfg = EncoderConfig {
        s_max: 0.99,
        ..EncoderConfig::with_range_size(4)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let black = GrayImage::filled(64, 64, 0).unwrap();
    let white = GrayImage::filled(64, 64, 255).unwrap();
    let mut worst = 0;
    for k in 0..10 {
        // Half noise, half smooth random fields (which push |s| higher).
        let img = if k % 2 == 0 {
            GrayImage::from_fn(64, 64, |_, _| rng.gen()).unwrap()
        } else {
            let (a, b, f, g): (f64, f64, f64, f64) = (
                rng.gen(),
                rng.gen(),
                rng.gen_range(0.05..0.3),
                rng.gen_range(0.05..0.3),
            );
            GrayImage::from_fn(64, 64, |r, c| {
                (128.0
                    + 60.0 * (f * r as f64 + 6.0 * a).sin()
                    + 60.0 * (g * c as f64 + 6.0 * b).cos()) as u8
            })
            .unwrap()
        };
        let code = encode_with(&img, &cfg, Exec::default())
            .map_err(|e| e.to_string())?
            .code;
        let ta = decode_trace(&code, Some(&black), 15).map_err(|e| e.to_string())?;
        let tb = decode_trace(&code, Some(&white), 15).map_err(|e| e.to_string())?;
        let gaps: Vec<u8> = ta.iter().zip(&tb).map(|(x, y)| max_gap(x, y)).collect();
        ensure(gaps.windows(2).all(|w| w[1] <= w[0]), || {
            format!("code {k}: gaps not monotone {gaps:?}")
        })?;
        let last = *gaps.last().unwrap();
        ensure(last <= 2, || {
            format!("code {k}: final gap {last}, trace {gaps:?}")
        })?;
        worst = worst.max(last);
    }
    Ok(format!("10 codes, worst final gap {worst}"))
}

fn camera_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/camera_256.pgm")
}

fn ac4_reconstruction() -> Outcome {
    let img = pgm::read_pgm(camera_path()).map_err(|e| e.to_string())?;
    let cfg = EncoderConfig::default();
    let start = Instant::now();
    let enc = encode_with(&img, &cfg, Exec::default()).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let out = decode(&enc.code, None, 10).map_err(|e| e.to_string())?;
    let db = psnr(&img, &out).map_err(|e| e.to_string())?;
    ensure(db >= 25.0, || format!("PSNR {db:.2} dB below 25"))?;
    within(took, 60.0, "encode")?;
    Ok(format!(
        "PSNR {db:.2} dB, encode {:.2}s",
        took.as_secs_f64()
    ))
}

fn ac5_hamming() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for mode in [HammingMode::Symbol, HammingMode::Bit] {
        for _ in 0..10_000 {
            let len = rng.gen_range(1..64);
            let alphabet = rng.gen_range(2..40u32);
            let mut v =
                || CodeVector::new((0..len).map(|_| rng.gen_range(0..alphabet)).collect(), 9);
            let (a, b, c) = (v(), v(), v());
            let d = |x: &CodeVector, y: &CodeVector| distance(x, y, mode).unwrap();
            ensure(d(&a, &a) == 0, || "d(v,v) != 0".into())?;
            ensure(d(&a, &b) == d(&b, &a), || "asymmetric".into())?;
            ensure(d(&a, &c) <= d(&a, &b) + d(&b, &c), || {
                "triangle violated".into()
            })?;
        }
    }
    Ok("10000 triples in symbol and bit mode".into())
}

fn ac6_self_match() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let poses = sample_poses(&pose_grid(30, 30, 20, 5), 50, 6);
    let manifest = write_dataset(dir.path(), &poses, &RenderSettings::default(), None)
        .map_err(|e| e.to_string())?;
    let cfg = EncoderConfig::default();
    let gallery = build_gallery(&manifest, &cfg).map_err(|e| e.to_string())?;
    for row in &manifest.rows {
        let img = pgm::read_pgm(manifest.resolve(row)).map_err(|e| e.to_string())?;
        let m = query(&gallery, &img).map_err(|e| e.to_string())?;
        ensure(m.distance == 0 && m.label == row.pose, || {
            format!("{}: got {:?} at distance {}", row.path, m.label, m.distance)
        })?;
    }
    Ok("50 of 50 matched themselves at distance 0".into())
}

fn ac7_benchmark() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let poses = sample_poses(&pose_grid(30, 30, 20, 5), 406, 7);
    let manifest = write_dataset(dir.path(), &poses, &RenderSettings::default(), None)
        .map_err(|e| e.to_string())?;
    let report = run_protocol(
        &manifest,
        &EncoderConfig::default(),
        Protocol::RandomSplit {
            fraction: 0.8,
            seed: 7,
        },
        HammingMode::Symbol,
        Exec::default(),
    )
    .map_err(|e| e.to_string())?;
    let m = report.overall.mae;
    let gallery = manifest.len() - report.overall.count;
    ensure(m.overall <= 7.5, || {
        format!("overall MAE {:.2} > 7.5", m.overall)
    })?;
    ensure(m.roll < m.yaw && m.roll < m.pitch, || {
        format!("roll {:.2} not the smallest ({m:?})", m.roll)
    })?;
    within(start.elapsed(), 900.0, "benchmark")?;
    Ok(format!(
        "gallery {gallery}, test {}: yaw {:.2} pitch {:.2} roll {:.2} overall {:.2}, {:.0}s",
        report.overall.count,
        m.yaw,
        m.pitch,
        m.roll,
        m.overall,
        start.elapsed().as_secs_f64()
    ))
}

fn ac8_report_arithmetic() -> Outcome {
    let row = MaeRow::from_axes(4.05, 6.23, 3.30);
    let mean = (4.05 + 6.23 + 3.30) / 3.0;
    ensure((row.overall - mean).abs() <= 0.01, || {
        format!("{} vs {mean}", row.overall)
    })?;
    ensure((row.overall - 4.52).abs() <= 0.01, || {
        format!("{:.4} vs printed 4.52", row.overall)
    })?;

    // Per-subject rows and the mean row of a leave-one-subject-out run.
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let poses = sample_poses(&pose_grid(20, 20, 10, 10), 30, 8);
    let manifest = write_dataset(dir.path(), &poses, &RenderSettings::default(), Some(3))
        .map_err(|e| e.to_string())?;
    let cfg = EncoderConfig::default();
    let report = run_protocol(
        &manifest,
        &cfg,
        Protocol::LeaveOneSubjectOut,
        HammingMode::Symbol,
        Exec::default(),
    )
    .map_err(|e| e.to_string())?;
    let mut rows: Vec<MaeRow> = report.subsets.iter().map(|s| s.report.mae).collect();
    rows.push(report.mean.ok_or("no mean row")?);
    rows.push(report.overall.mae);
    for r in &rows {
        let m = (r.yaw + r.pitch + r.roll) / 3.0;
        ensure((r.overall - m).abs() <= 0.01, || {
            format!("row {r:?}: overall differs from axis mean")
        })?;
    }
    let json: serde_json::Value =
        serde_json::from_str(&report.to_json()).map_err(|e| e.to_string())?;
    let mean = &json["mean"];
    let f = |k: &str| mean[k].as_f64().unwrap_or(f64::NAN);
    ensure(
        (f("overall") - (f("yaw") + f("pitch") + f("roll")) / 3.0).abs() <= 0.01,
        || "JSON mean row".into(),
    )?;
    Ok(format!(
        "mean(4.05, 6.23, 3.30) = {:.4} (printed 4.52); {} report rows consistent",
        row.overall,
        rows.len()
    ))
}

fn ac9_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for k in 0..100 {
        let n = 2 * rng.gen_range(1..=8);
        let cfg = EncoderConfig {
            range_size: n,
            domain_stride: rng.gen_range(1..=2 * n),
            s_max: f64::from(rng.gen_range(1..=10_000u32)) / 10_000.0,
            s_bits: rng.gen_range(1..=8),
            o_bits: rng.gen_range(1..=8),
            decode_iterations: 10,
        };
        let (gw, gh) = (rng.gen_range(2..6), rng.gen_range(2..6));
        let (w, h) = (gw * n, gh * n);
        let pool = ((w - 2 * n) / cfg.domain_stride + 1) * ((h - 2 * n) / cfg.domain_stride + 1);
        let entries: Vec<FractalCodeEntry> = (0..gw * gh)
            .map(|_| FractalCodeEntry {
                domain_index: rng.gen_range(0..pool as u32),
                isometry: Isometry::ALL[rng.gen_range(0..8)],
                s_q: rng.gen_range(0..1u32 << cfg.s_bits) as u8,
                o_q: rng.gen_range(0..1u32 << cfg.o_bits) as u8,
            })
            .collect();
        let code = FractalCode::new(cfg, w, h, entries).map_err(|e| e.to_string())?;
        let bytes = code.to_bytes();
        let back = FractalCode::from_bytes(&bytes).map_err(|e| e.to_string())?;
        ensure(back.to_bytes() == bytes, || {
            format!("code {k} not byte-identical")
        })?;

        let len = rng.gen_range(0..40);
        let gallery_entries: Vec<GalleryEntry> = (0..rng.gen_range(0..6))
            .map(|i| GalleryEntry {
                vector: CodeVector::new((0..len).map(|_| rng.gen()).collect(), cfg.fingerprint()),
                label: PoseLabel::new(
                    rng.gen_range(-90.0..90.0),
                    rng.gen_range(-180.0..180.0),
                    rng.gen_range(-45.0..45.0),
                )
                .unwrap(),
                source_id: format!("dir/img_{k}_{i}.pgm"),
                subject_id: if rng.gen() {
                    Some(format!("subj{}", rng.gen_range(0..9)))
                } else {
                    None
                },
            })
            .collect();
        let g = Gallery::new(cfg, gallery_entries).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("g{k}.bin"));
        g.save(&path).map_err(|e| e.to_string())?;
        let g2 = Gallery::load(&path).map_err(|e| e.to_string())?;
        ensure(g2.to_bytes() == g.to_bytes(), || {
            format!("gallery {k} not byte-identical")
        })?;

        let img = GrayImage::from_fn(rng.gen_range(1..70), rng.gen_range(1..70), |_, _| rng.gen())
            .unwrap();
        let path = dir.path().join(format!("i{k}.pgm"));
        pgm::write_pgm(&img, &path).map_err(|e| e.to_string())?;
        let img2 = pgm::read_pgm(&path).map_err(|e| e.to_string())?;
        ensure(
            pgm::encode_pgm(&img2) == std::fs::read(&path).unwrap(),
            || format!("PGM {k} not byte-identical"),
        )?;
    }
    Ok("100 codes, galleries and PGMs byte-identical".into())
}

fn run_cli(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fracpose"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let code = out.status.code().unwrap_or(-1);
    if code == 2 {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok((code, out.stdout))
}

fn ac10_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("data");
    let poses = sample_poses(&pose_grid(30, 30, 20, 10), 24, 10);
    write_dataset(&data, &poses, &RenderSettings::default(), Some(4)).map_err(|e| e.to_string())?;
    let camera = camera_path();
    let manifest = data.join("manifest.csv");
    let mut runs = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("t{threads}"));
        std::fs::create_dir_all(&out).unwrap();
        let code = out.join("camera.hpif");
        run_cli(&[
            "--threads",
            threads,
            "encode",
            camera.to_str().unwrap(),
            code.to_str().unwrap(),
        ])?;
        let mut files = vec![std::fs::read(&code).map_err(|e| e.to_string())?];
        for protocol in ["loo", "random"] {
            let rep = out.join(protocol);
            let (_, stdout) = run_cli(&[
                "--threads",
                threads,
                "evaluate",
                manifest.to_str().unwrap(),
                "--protocol",
                protocol,
                "--format",
                "json",
                "--out",
                rep.to_str().unwrap(),
            ])?;
            files.push(stdout);
            for name in [
                "report.json",
                "report.txt",
                "mae.csv",
                "curves.csv",
                "error_by_angle.csv",
                "predictions.csv",
            ] {
                files.push(std::fs::read(rep.join(name)).map_err(|e| e.to_string())?);
            }
        }
        runs.push(files);
    }
    ensure(runs[0] == runs[1], || {
        "outputs differ between --threads 1 and --threads 8".into()
    })?;
    Ok(format!("{} artefacts byte-identical", runs[0].len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("AC1 isometry group", ac1_isometry_group),
        ("AC2 encoder oracle equivalence", ac2_oracle),
        ("AC3 contractivity", ac3_contractivity),
        ("AC4 reconstruction", ac4_reconstruction),
        ("AC5 Hamming metric axioms", ac5_hamming),
        ("AC6 gallery self-match", ac6_self_match),
        ("AC7 synthetic pose benchmark", ac7_benchmark),
        ("AC8 report arithmetic", ac8_report_arithmetic),
        ("AC9 file-format round-trips", ac9_round_trips),
        ("AC10 determinism under parallelism", ac10_determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let result = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
