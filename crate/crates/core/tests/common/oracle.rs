//! Brute-force reference encoder used to check the optimised one.
//!
//! Shares no code with the library: contraction, isometries, quantiser
//! levels and the error sum are all re-derived here from their
//! definitions, and every (domain, isometry, s level, o level) tuple is
//! scored exactly in integers.

/// Reference parameters for one range block: (domain, isometry id, s_q, o_q).
pub type OracleEntry = (u32, u8, u8, u8);

pub struct OracleParams {
    pub n: usize,
    pub stride: usize,
    /// Contrast bound in units of 1e-4.
    pub s_max_e4: i64,
    pub s_bits: u32,
    pub o_bits: u32,
}

/// Where pixel (r, c) of an n×n block lands under isometry `id`.
///
/// Works on doubled, centred coordinates x = 2c - (n-1), y = 2r - (n-1)
/// (y grows downward) so every symmetry of the square is an integer
/// matrix.
pub fn oracle_iso_target(id: u8, r: usize, c: usize, n: usize) -> (usize, usize) {
    let m = n as i64 - 1;
    let x = 2 * c as i64 - m;
    let y = 2 * r as i64 - m;
    let (x2, y2) = match id {
        0 => (x, y),
        1 => (-y, x), // quarter turn clockwise on screen
        2 => (-x, -y),
        3 => (y, -x),
        4 => (-x, y),  // mirror left-right
        5 => (x, -y),  // mirror top-bottom
        6 => (y, x),   // transpose
        7 => (-y, -x), // anti-transpose
        _ => unreachable!(),
    };
    (((y2 + m) / 2) as usize, ((x2 + m) / 2) as usize)
}

fn contract(img: &[u8], w: usize, r0: usize, c0: usize, n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n * n];
    for r in 0..n {
        for c in 0..n {
            let p = |dr: usize, dc: usize| f64::from(img[(r0 + 2 * r + dr) * w + c0 + 2 * c + dc]);
            let avg = (p(0, 0) + p(0, 1) + p(1, 0) + p(1, 1)) / 4.0;
            out[r * n + c] = avg.round() as i64;
        }
    }
    out
}

fn transform(block: &[i64], id: u8, n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n * n];
    for r in 0..n {
        for c in 0..n {
            let (r2, c2) = oracle_iso_target(id, r, c, n);
            out[r2 * n + c2] = block[r * n + c];
        }
    }
    out
}

/// Scaled squared error of every range block against its best tuple, plus
/// the tuples themselves, in row-major range order.
pub fn oracle_encode(img: &[u8], w: usize, h: usize, p: &OracleParams) -> Vec<(OracleEntry, i128)> {
    let n = p.n;
    let ms = 1i64 << p.s_bits;
    let mo = 1i64 << p.o_bits;
    // Midrise reconstruction levels as exact fractions.
    let s_den = 10_000 * ms;
    let o_den = mo;
    let s_nums: Vec<i64> = (0..ms).map(|l| p.s_max_e4 * (2 * l + 1 - ms)).collect();
    let o_nums: Vec<i64> = (0..mo).map(|l| 255 * (2 * l + 1 - mo)).collect();
    let k = s_den * o_den;

    let mut pool: Vec<Vec<Vec<i64>>> = Vec::new();
    let mut r0 = 0;
    while r0 + 2 * n <= h {
        let mut c0 = 0;
        while c0 + 2 * n <= w {
            let d = contract(img, w, r0, c0, n);
            pool.push((0..8u8).map(|id| transform(&d, id, n)).collect());
            c0 += p.stride;
        }
        r0 += p.stride;
    }

    let mut out = Vec::new();
    for br in 0..h / n {
        for bc in 0..w / n {
            let range: Vec<i64> = (0..n * n)
                .map(|i| i64::from(img[(br * n + i / n) * w + bc * n + i % n]))
                .collect();
            let mut best: Option<(i128, OracleEntry)> = None;
            for (di, isos) in pool.iter().enumerate() {
                for (id, dom) in isos.iter().enumerate() {
                    for (sq, &sn) in s_nums.iter().enumerate() {
                        for (oq, &on) in o_nums.iter().enumerate() {
                            let mut err: i128 = 0;
                            for (&rv, &dv) in range.iter().zip(dom) {
                                // (R - s D - o) scaled by s_den * o_den.
                                let e = k * rv - sn * o_den * dv - on * s_den;
                                err += i128::from(e) * i128::from(e);
                            }
                            if best.is_none_or(|(b, _)| err < b) {
                                best = Some((err, (di as u32, id as u8, sq as u8, oq as u8)));
                            }
                        }
                    }
                }
            }
            let (err, entry) = best.expect("empty domain pool");
            out.push((entry, err));
        }
    }
    out
}

/// Scale factor between oracle error units and squared intensity.
pub fn oracle_error_scale(p: &OracleParams) -> f64 {
    let k = 10_000.0 * f64::from(1u32 << p.s_bits) * f64::from(1u32 << p.o_bits);
    k * k
}
