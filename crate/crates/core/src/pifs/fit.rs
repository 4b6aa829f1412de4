use crate::error::{Error, Result};
use crate::image::Block;

fn check_sizes(a: &Block, b: &Block) -> Result<()> {
    if a.size() != b.size() {
        return Err(Error::invalid(format!(
            "block sizes differ: {} vs {}",
            a.size(),
            b.size()
        )));
    }
    Ok(())
}

/// Least-squares contrast and offset mapping `domain` onto `range`.
///
/// `s` is clamped to `[-s_max, s_max]` (zero for a flat domain) and `o` is
/// refitted for the clamped `s`.
pub fn fit_contrast_offset(range: &Block, domain: &Block, s_max: f64) -> Result<(f64, f64)> {
    check_sizes(range, domain)?;
    let n = range.data().len() as f64;
    let (mut sr, mut sd, mut sdd, mut srd) = (0.0, 0.0, 0.0, 0.0);
    for (&r, &d) in range.data().iter().zip(domain.data()) {
        let (r, d) = (f64::from(r), f64::from(d));
        sr += r;
        sd += d;
        sdd += d * d;
        srd += r * d;
    }
    let var = sdd - sd * sd / n;
    let s = if var > 0.0 {
        let cov = srd - sr * sd / n;
        (cov / var).clamp(-s_max, s_max)
    } else {
        0.0
    };
    let o = (sr - s * sd) / n;
    Ok((s, o))
}

/// Squared L2 error between `range` and `s · domain + o`.
pub fn block_distortion(range: &Block, domain: &Block, s: f64, o: f64) -> Result<f64> {
    check_sizes(range, domain)?;
    Ok(range
        .data()
        .iter()
        .zip(domain.data())
        .map(|(&r, &d)| {
            let e = f64::from(r) - (s * f64::from(d) + o);
            e * e
        })
        .sum())
}
