use std::collections::HashSet;

use super::{EncoderConfig, FractalCode, FractalCodeEntry, Quantizer};
use crate::error::{Error, Result};
use crate::image::{domain_origins, downsample_2x_strided, GrayImage};
use crate::isometry::Isometry;
use crate::par::{map_indexed, Exec};

/// Encoder output: the code plus the squared error each range block was
/// scored with.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub code: FractalCode,
    pub distortions: Vec<f64>,
    pub pool_size: usize,
}

impl Encoding {
    /// Mean per-block squared error.
    pub fn mean_distortion(&self) -> f64 {
        self.distortions.iter().sum::<f64>() / self.distortions.len() as f64
    }
}

pub fn encode(img: &GrayImage, cfg: &EncoderConfig) -> Result<FractalCode> {
    encode_with(img, cfg, Exec::default()).map(|e| e.code)
}

/// Exhaustive PIFS encoding.
///
/// Every range block is compared against every contracted domain under all
/// eight isometries and every quantised contrast level, with the offset
/// level that is optimal for that contrast. The winner minimises the squared
/// error evaluated with the dequantised parameters; ties go to the
/// lexicographically smallest `(domain, isometry, s level, o level)`.
/// Distortions are compared exactly in integer arithmetic, so the result is
/// independent of `exec`.
pub fn encode_with(img: &GrayImage, cfg: &EncoderConfig, exec: Exec) -> Result<Encoding> {
    cfg.validate()?;
    let n = cfg.range_size;
    let (w, h) = (img.width(), img.height());
    if w % n != 0 || h % n != 0 {
        return Err(Error::invalid(format!(
            "{w}x{h} image is not a multiple of range size {n}"
        )));
    }
    let pool = DomainPool::build(img, cfg)?;
    let search = Search::new(cfg, &pool);
    let (gw, gh) = (w / n, h / n);

    let results = map_indexed(exec, gw * gh, |i| {
        let (row, col) = ((i / gw) * n, (i % gw) * n);
        let mut range = Vec::with_capacity(n * n);
        for r in row..row + n {
            range.extend(
                img.pixels()[r * w + col..r * w + col + n]
                    .iter()
                    .map(|&p| u16::from(p)),
            );
        }
        search.best_match(&range)
    });

    let (entries, distortions) = results.into_iter().unzip();
    let code = FractalCode::new(*cfg, w, h, entries)?;
    Ok(Encoding {
        code,
        distortions,
        pool_size: pool.len,
    })
}

/// Contracted (2× downsampled) domain blocks with their pixel sums.
struct DomainPool {
    len: usize,
    /// Indices of domains whose contracted content differs from every
    /// earlier domain. A repeat scores exactly like its first occurrence and
    /// loses the index tie-break, so only these need searching.
    distinct: Vec<usize>,
    area: usize,
    pixels: Vec<u16>,
    sum: Vec<i64>,
    sum_sq: Vec<i64>,
}

impl DomainPool {
    fn build(img: &GrayImage, cfg: &EncoderConfig) -> Result<Self> {
        let n = cfg.range_size;
        let origins = domain_origins(img.width(), img.height(), n, cfg.domain_stride)?;
        let area = n * n;
        let mut pixels = Vec::with_capacity(origins.len() * area);
        let mut sum = Vec::with_capacity(origins.len());
        let mut sum_sq = Vec::with_capacity(origins.len());
        let mut buf = vec![0u8; area];
        for &(r, c) in &origins {
            let start = r * img.width() + c;
            downsample_2x_strided(&img.pixels()[start..], img.width(), 2 * n, &mut buf);
            pixels.extend(buf.iter().map(|&p| u16::from(p)));
            sum.push(buf.iter().map(|&p| i64::from(p)).sum());
            sum_sq.push(buf.iter().map(|&p| i64::from(p) * i64::from(p)).sum());
        }
        let mut seen = HashSet::new();
        let distinct = (0..origins.len())
            .filter(|&i| seen.insert(&pixels[i * area..(i + 1) * area]))
            .collect();
        Ok(Self {
            len: origins.len(),
            distinct,
            area,
            pixels,
            sum,
            sum_sq,
        })
    }

    #[inline]
    fn block(&self, i: usize) -> &[u16] {
        &self.pixels[i * self.area..(i + 1) * self.area]
    }
}

/// Candidate ordering key: distortion first, then the tie-break tuple.
type Key = (i128, u32, u8, u8, u8);

struct Search<'a> {
    pool: &'a DomainPool,
    n: usize,
    q: Quantizer,
    s_max: f64,
    /// `ds`, `do`: contrast and offset denominators; `k = ds * do`.
    ds: i128,
    dq: i128,
    k: i128,
    k_sq_f: f64,
    s_num: Vec<i128>,
    s_val: Vec<f64>,
    o_num: Vec<i128>,
    o_val: Vec<f64>,
    /// `o_num² · ds² · area`, the offset-only term of the scaled error.
    o_term: Vec<i128>,
}

impl<'a> Search<'a> {
    fn new(cfg: &EncoderConfig, pool: &'a DomainPool) -> Self {
        let q = cfg.quantizer();
        let ds = i128::from(q.s_denominator());
        let dq = i128::from(q.o_denominator());
        let k = ds * dq;
        let area = pool.area as i128;
        let s_num: Vec<i128> = (0..q.s_levels())
            .map(|l| i128::from(q.s_numerator(l)))
            .collect();
        let s_val = (0..q.s_levels()).map(|l| q.dequantize_s(l as u8)).collect();
        let o_num: Vec<i128> = (0..q.o_levels())
            .map(|l| i128::from(q.o_numerator(l)))
            .collect();
        let o_val = (0..q.o_levels()).map(|l| q.dequantize_o(l as u8)).collect();
        let o_term = o_num.iter().map(|&b| b * b * ds * ds * area).collect();
        Self {
            pool,
            n: cfg.range_size,
            q,
            s_max: f64::from(cfg.s_max_fixed()) / f64::from(super::S_MAX_SCALE),
            ds,
            dq,
            k,
            k_sq_f: (k as f64) * (k as f64),
            s_num,
            s_val,
            o_num,
            o_val,
            o_term,
        }
    }

    fn best_match(&self, range: &[u16]) -> (FractalCodeEntry, f64) {
        let n = self.n;
        let area = range.len();
        let area_f = area as f64;
        let sr: i64 = range.iter().map(|&p| i64::from(p)).sum();
        let srr: i64 = range.iter().map(|&p| i64::from(p) * i64::from(p)).sum();
        let (sr_f, srr_f) = (sr as f64, srr as f64);
        let crr = srr_f - sr_f * sr_f / area_f;

        // Correlating T(D) with R equals correlating D with T⁻¹(R).
        let mut ranges = vec![0u16; 8 * area];
        for t in Isometry::ALL {
            let dst = &mut ranges[t.id() as usize * area..(t.id() as usize + 1) * area];
            t.inverse().apply_slice(range, n, dst);
        }

        // An isometry that leaves the range unchanged relative to an earlier
        // one yields identical candidates that always lose the tie-break.
        let distinct: Vec<Isometry> = Isometry::ALL
            .into_iter()
            .filter(|t| {
                let i = t.id() as usize;
                (0..i).all(|j| ranges[j * area..(j + 1) * area] != ranges[i * area..(i + 1) * area])
            })
            .collect();

        let base = self.k * self.k * i128::from(srr);
        let sr_term = 2 * self.k * self.ds * i128::from(sr);
        let mut best: Key = (i128::MAX, u32::MAX, u8::MAX, u8::MAX, u8::MAX);
        let mut best_f = f64::INFINITY;
        // Slack for rounding in the floating-point bounds; far above their
        // error for any 8-bit block.
        let tol = 1e-7 * area_f * 65025.0;

        for &d in &self.pool.distinct {
            let dom = self.pool.block(d);
            let sd = self.pool.sum[d];
            let sdd = self.pool.sum_sq[d];
            let (sd_f, sdd_f) = (sd as f64, sdd as f64);
            let flat = (area as i64) * sdd == sd * sd;
            let cdd = sdd_f - sd_f * sd_f / area_f;
            for &t in &distinct {
                let rt = &ranges[t.id() as usize * area..(t.id() as usize + 1) * area];
                let srd: u32 = rt
                    .iter()
                    .zip(dom)
                    .map(|(&a, &b)| u32::from(a) * u32::from(b))
                    .sum();
                let srd_f = f64::from(srd);
                let crd = srd_f - sr_f * sd_f / area_f;
                // Error with a free offset, as a function of s.
                let quad = |s: f64| crr - 2.0 * s * crd + s * s * cdd;

                let (s_free, lower) = if flat {
                    (0.0, crr)
                } else {
                    let s_free = crd / cdd;
                    (s_free, quad(s_free.clamp(-self.s_max, self.s_max)))
                };
                if lower > best_f + tol {
                    continue;
                }

                let ctx = Candidate {
                    domain: d as u32,
                    iso: t.id(),
                    sd: i128::from(sd),
                    sdd: i128::from(sdd),
                    srd: i128::from(srd),
                    sd_f,
                    sr_f,
                    crr,
                    crd,
                    cdd,
                    base,
                    sr_term,
                };
                // A black domain ignores contrast: only the lowest level can
                // win.
                let levels = if flat && sd == 0 {
                    1
                } else {
                    self.q.s_levels() as i64
                };
                let pivot = self.q.s_level_position(s_free);
                let start = if levels == 1 {
                    0
                } else {
                    (pivot.round() as i64).clamp(0, levels - 1)
                };

                // Walk outwards from the level nearest the free optimum. Once a
                // level lies beyond the optimum its bound only grows, so the
                // walk may stop there.
                let mut l = start;
                while l >= 0 {
                    let bound = quad(self.s_val[l as usize]);
                    if bound <= best_f + tol {
                        self.try_level(&ctx, l as usize, &mut best, &mut best_f, tol);
                    } else if (l as f64) <= pivot {
                        break;
                    }
                    l -= 1;
                }
                let mut l = start + 1;
                while l < levels {
                    let bound = quad(self.s_val[l as usize]);
                    if bound <= best_f + tol {
                        self.try_level(&ctx, l as usize, &mut best, &mut best_f, tol);
                    } else if (l as f64) >= pivot {
                        break;
                    }
                    l += 1;
                }
            }
        }

        let entry = FractalCodeEntry {
            domain_index: best.1,
            isometry: Isometry::from_id(best.2).expect("valid id"),
            s_q: best.3,
            o_q: best.4,
        };
        (entry, best_f)
    }

    #[inline]
    fn try_level(&self, c: &Candidate, level: usize, best: &mut Key, best_f: &mut f64, tol: f64) {
        let s = self.s_val[level];
        let area = self.pool.area as f64;
        let centre = (c.sr_f - s * c.sd_f) / area;
        let pos = self.q.o_level_position(centre).floor();
        let top = i64::from(self.q.o_levels()) - 1;
        let lo = (pos as i64).clamp(0, top) as usize;
        let hi = (pos as i64 + 1).clamp(0, top) as usize;

        // Cheap screen: error = quad(s) + area * (o - centre)^2 exactly, so a
        // level whose better offset is clearly worse than the incumbent can
        // be skipped without the integer evaluation.
        let quad = c.crr - 2.0 * s * c.crd + s * s * c.cdd;
        let gap = |b: usize| {
            let o = self.o_val[b];
            area * (o - centre) * (o - centre)
        };
        if quad + gap(lo).min(gap(hi)) > *best_f + tol {
            return;
        }

        let a = self.s_num[level];
        // Scaled error: base + a_term + b * b_coef + o_term[b].
        let a_term = a * a * self.dq * self.dq * c.sdd - 2 * self.k * a * self.dq * c.srd;
        let b_coef = 2 * a * self.dq * self.ds * c.sd - c.sr_term;
        for b in [lo, hi] {
            let err = c.base + a_term + self.o_num[b] * b_coef + self.o_term[b];
            let key: Key = (err, c.domain, c.iso, level as u8, b as u8);
            if key < *best {
                *best = key;
                *best_f = err as f64 / self.k_sq_f;
            }
        }
    }
}

struct Candidate {
    domain: u32,
    iso: u8,
    sd: i128,
    sdd: i128,
    srd: i128,
    sd_f: f64,
    sr_f: f64,
    crr: f64,
    crd: f64,
    cdd: f64,
    base: i128,
    sr_term: i128,
}
