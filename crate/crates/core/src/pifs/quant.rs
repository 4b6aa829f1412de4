use super::{EncoderConfig, S_MAX_SCALE};

/// Offsets are quantised over `[-O_RANGE, O_RANGE]`.
pub const O_RANGE: f64 = 255.0;

/// Uniform midrise quantisers for contrast and offset.
///
/// Every reconstruction level is an exact rational: contrast level `L`
/// is `s_numerator(L) / s_denominator()` and likewise for offsets. The
/// encoder scores candidates with these integers so distortion comparisons
/// are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Quantizer {
    s_max_fixed: u32,
    s_bits: u8,
    o_bits: u8,
}

impl Quantizer {
    pub fn new(cfg: &EncoderConfig) -> Self {
        Self {
            s_max_fixed: cfg.s_max_fixed(),
            s_bits: cfg.s_bits,
            o_bits: cfg.o_bits,
        }
    }

    #[inline]
    pub fn s_levels(&self) -> u32 {
        1 << self.s_bits
    }

    #[inline]
    pub fn o_levels(&self) -> u32 {
        1 << self.o_bits
    }

    fn s_max(&self) -> f64 {
        f64::from(self.s_max_fixed) / f64::from(S_MAX_SCALE)
    }

    #[inline]
    pub fn s_denominator(&self) -> i64 {
        i64::from(S_MAX_SCALE) * i64::from(self.s_levels())
    }

    #[inline]
    pub fn s_numerator(&self, level: u32) -> i64 {
        i64::from(self.s_max_fixed) * (2 * i64::from(level) + 1 - i64::from(self.s_levels()))
    }

    #[inline]
    pub fn o_denominator(&self) -> i64 {
        i64::from(self.o_levels())
    }

    #[inline]
    pub fn o_numerator(&self, level: u32) -> i64 {
        O_RANGE as i64 * (2 * i64::from(level) + 1 - i64::from(self.o_levels()))
    }

    pub fn quantize_s(&self, s: f64) -> u8 {
        let m = self.s_max();
        uniform_level(s, -m, m, self.s_levels())
    }

    pub fn dequantize_s(&self, level: u8) -> f64 {
        self.s_numerator(u32::from(level)) as f64 / self.s_denominator() as f64
    }

    pub fn quantize_o(&self, o: f64) -> u8 {
        uniform_level(o, -O_RANGE, O_RANGE, self.o_levels())
    }

    pub fn dequantize_o(&self, level: u8) -> f64 {
        self.o_numerator(u32::from(level)) as f64 / self.o_denominator() as f64
    }

    /// Offset level index (fractional) whose midpoint equals `o`.
    #[inline]
    pub(crate) fn o_level_position(&self, o: f64) -> f64 {
        (o + O_RANGE) * f64::from(self.o_levels()) / (2.0 * O_RANGE) - 0.5
    }

    /// Contrast level index (fractional) whose midpoint equals `s`.
    #[inline]
    pub(crate) fn s_level_position(&self, s: f64) -> f64 {
        let m = self.s_max();
        (s + m) * f64::from(self.s_levels()) / (2.0 * m) - 0.5
    }
}

fn uniform_level(v: f64, lo: f64, hi: f64, levels: u32) -> u8 {
    let step = (hi - lo) / f64::from(levels);
    let idx = ((v.clamp(lo, hi) - lo) / step).floor();
    // NaN casts to 0.
    (idx as u32).min(levels - 1) as u8
}

pub fn quantize_s(s: f64, cfg: &EncoderConfig) -> u8 {
    cfg.quantizer().quantize_s(s)
}

pub fn dequantize_s(level: u8, cfg: &EncoderConfig) -> f64 {
    cfg.quantizer().dequantize_s(level)
}

pub fn quantize_o(o: f64, cfg: &EncoderConfig) -> u8 {
    cfg.quantizer().quantize_o(o)
}

pub fn dequantize_o(level: u8, cfg: &EncoderConfig) -> f64 {
    cfg.quantizer().dequantize_o(level)
}
