mod common;

use common::oracle::{oracle_encode, oracle_error_scale, oracle_iso_target, OracleParams};
use fracpose::pifs::{dequantize_o, dequantize_s, encode_with};
use fracpose::{EncoderConfig, Exec, GrayImage, Isometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(cfg: &EncoderConfig) -> OracleParams {
    OracleParams {
        n: cfg.range_size,
        stride: cfg.domain_stride,
        s_max_e4: (cfg.s_max * 10_000.0).round() as i64,
        s_bits: u32::from(cfg.s_bits),
        o_bits: u32::from(cfg.o_bits),
    }
}

fn check_against_oracle(img: &GrayImage, cfg: &EncoderConfig) {
    let p = params(cfg);
    let expected = oracle_encode(img.pixels(), img.width(), img.height(), &p);
    let scale = oracle_error_scale(&p);
    for exec in [Exec::Sequential, Exec::Parallel] {
        let enc = encode_with(img, cfg, exec).unwrap();
        assert_eq!(enc.code.entries().len(), expected.len());
        for (i, (got, ((d, iso, s, o), err))) in
            enc.code.entries().iter().zip(&expected).enumerate()
        {
            assert_eq!(
                (got.domain_index, got.isometry.id(), got.s_q, got.o_q),
                (*d, *iso, *s, *o),
                "range {i} under {cfg:?}"
            );
            let want = *err as f64 / scale;
            assert!((enc.distortions[i] - want).abs() <= 1e-6 * want.max(1.0));
        }
    }
}

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.gen()).unwrap()
}

#[test]
fn oracle_isometry_matches_stated_examples() {
    // [[1,2],[3,4]] turned clockwise is [[3,1],[4,2]].
    let src = [1, 2, 3, 4];
    let mut dst = [0; 4];
    for r in 0..2 {
        for c in 0..2 {
            let (r2, c2) = oracle_iso_target(1, r, c, 2);
            dst[r2 * 2 + c2] = src[r * 2 + c];
        }
    }
    assert_eq!(dst, [3, 1, 4, 2]);
    for t in Isometry::ALL {
        for n in [2, 3, 5] {
            for r in 0..n {
                for c in 0..n {
                    assert_eq!(
                        t.map(r, c, n),
                        oracle_iso_target(t.id(), r, c, n),
                        "{t:?} n={n}"
                    );
                }
            }
        }
    }
}

#[test]
fn random_images_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = EncoderConfig::with_range_size(4);
    for _ in 0..12 {
        check_against_oracle(&random_image(&mut rng, 16, 16), &cfg);
    }
}

#[test]
fn other_configurations_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let configs = [
        EncoderConfig {
            domain_stride: 2,
            s_bits: 3,
            o_bits: 4,
            ..EncoderConfig::with_range_size(4)
        },
        EncoderConfig {
            s_max: 0.75,
            s_bits: 4,
            o_bits: 6,
            ..EncoderConfig::with_range_size(2)
        },
        EncoderConfig {
            domain_stride: 3,
            s_max: 0.5,
            s_bits: 2,
            o_bits: 8,
            ..EncoderConfig::with_range_size(4)
        },
        EncoderConfig {
            s_max: 1.0,
            s_bits: 1,
            o_bits: 1,
            ..EncoderConfig::with_range_size(4)
        },
    ];
    for cfg in &configs {
        for _ in 0..3 {
            check_against_oracle(&random_image(&mut rng, 16, 12), cfg);
        }
    }
}

#[test]
fn structured_images_match_oracle() {
    let cfg = EncoderConfig::with_range_size(4);
    let images = [
        GrayImage::filled(16, 16, 0).unwrap(),
        GrayImage::filled(16, 16, 255).unwrap(),
        GrayImage::filled(16, 16, 77).unwrap(),
        GrayImage::from_fn(16, 16, |r, c| ((r + c) % 2 * 255) as u8).unwrap(),
        GrayImage::from_fn(16, 16, |r, c| (r * 16 + c) as u8).unwrap(),
        GrayImage::from_fn(16, 16, |r, _| if r < 8 { 0 } else { 200 }).unwrap(),
    ];
    for img in &images {
        check_against_oracle(img, &cfg);
    }
}

#[test]
fn constant_image_uses_first_domain_untransformed() {
    let img = GrayImage::filled(32, 32, 90).unwrap();
    let enc = encode_with(&img, &EncoderConfig::with_range_size(4), Exec::default()).unwrap();
    let first = enc.code.entries()[0];
    assert_eq!(first.domain_index, 0);
    assert_eq!(first.isometry, Isometry::Identity);
    assert!(enc.code.entries().iter().all(|e| *e == first));
}

#[test]
fn planted_self_similarity_is_recovered() {
    // Top half random; each bottom-half range is 0.5 * (transformed
    // contracted top-half domain) + 8.
    let (w, h, n, stride) = (32, 32, 4, 8);
    let cfg = EncoderConfig {
        domain_stride: stride,
        ..EncoderConfig::with_range_size(n)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut px: Vec<u8> = (0..w * h)
        .map(|i| if i < w * h / 2 { rng.gen() } else { 0 })
        .collect();
    let per_row = (w - 2 * n) / stride + 1;
    let mut planted = Vec::new();
    for br in h / n / 2..h / n {
        for bc in 0..w / n {
            let (dr, dc) = (rng.gen_range(0..2), rng.gen_range(0..per_row));
            let iso = rng.gen_range(0..8u8);
            for r in 0..n {
                for c in 0..n {
                    let (r0, c0) = (dr * stride + 2 * r, dc * stride + 2 * c);
                    let sum: u32 = [(0, 0), (0, 1), (1, 0), (1, 1)]
                        .iter()
                        .map(|&(a, b)| u32::from(px[(r0 + a) * w + c0 + b]))
                        .sum();
                    let v = (f64::from(sum) / 4.0).round();
                    let (r2, c2) = oracle_iso_target(iso, r, c, n);
                    px[(br * n + r2) * w + bc * n + c2] = (0.5 * v + 8.0).round() as u8;
                }
            }
            planted.push(((br, bc), (dr * per_row + dc) as u32, iso));
        }
    }
    let img = GrayImage::new(w, h, px).unwrap();
    let enc = encode_with(&img, &cfg, Exec::default()).unwrap();

    // Nearest levels to s = 0.5 and o = 8, plus half a grey level of
    // rounding, bound the per-pixel error of the planted candidate.
    let ds = (0..32u8)
        .map(|l| (dequantize_s(l, &cfg) - 0.5).abs())
        .fold(f64::MAX, f64::min);
    let dq = (0..128u8)
        .map(|l| (dequantize_o(l, &cfg) - 8.0).abs())
        .fold(f64::MAX, f64::min);
    let bound = (n * n) as f64 * (ds * 255.0 + dq + 0.5).powi(2);
    let gw = w / n;
    for ((br, bc), domain, iso) in planted {
        let i = br * gw + bc;
        let e = enc.code.entries()[i];
        assert!(
            enc.distortions[i] <= bound,
            "range {i}: {} > {bound}",
            enc.distortions[i]
        );
        assert_eq!(
            (e.domain_index, e.isometry.id()),
            (domain, iso),
            "range {i}"
        );
    }
}
