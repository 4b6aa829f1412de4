//! Fixed-length symbol vectors derived from fractal codes, and the Hamming
//! distance between them.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pifs::FractalCode;

/// Symbols contributed by each range block: domain index, isometry id,
/// contrast level, offset level.
pub const SYMBOLS_PER_BLOCK: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodeVector {
    symbols: Vec<u32>,
    fingerprint: u64,
}

impl CodeVector {
    pub fn new(symbols: Vec<u32>, fingerprint: u64) -> Self {
        Self {
            symbols,
            fingerprint,
        }
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Flattens a code into `(domain, isometry, s, o)` quadruples in row-major
/// block order.
pub fn vectorize(code: &FractalCode) -> CodeVector {
    let mut symbols = Vec::with_capacity(SYMBOLS_PER_BLOCK * code.entries().len());
    for e in code.entries() {
        symbols.extend([
            e.domain_index,
            u32::from(e.isometry.id()),
            u32::from(e.s_q),
            u32::from(e.o_q),
        ]);
    }
    CodeVector::new(symbols, code.config().fingerprint())
}

/// How two code vectors are compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HammingMode {
    /// Count of differing symbols.
    #[default]
    Symbol,
    /// Count of differing bits across the 32-bit symbol words.
    Bit,
}

impl FromStr for HammingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symbol" => Ok(HammingMode::Symbol),
            "bit" => Ok(HammingMode::Bit),
            other => Err(Error::invalid(format!(
                "unknown hamming mode {other:?} (expected symbol or bit)"
            ))),
        }
    }
}

fn check_comparable(a: &CodeVector, b: &CodeVector) -> Result<()> {
    if a.fingerprint != b.fingerprint {
        return Err(Error::IncomparableCodes(format!(
            "encoder fingerprints differ ({:016x} vs {:016x})",
            a.fingerprint, b.fingerprint
        )));
    }
    if a.len() != b.len() {
        return Err(Error::IncomparableCodes(format!(
            "lengths differ ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Number of positions holding different symbols.
pub fn hamming(a: &CodeVector, b: &CodeVector) -> Result<usize> {
    distance(a, b, HammingMode::Symbol)
}

pub fn distance(a: &CodeVector, b: &CodeVector, mode: HammingMode) -> Result<usize> {
    check_comparable(a, b)?;
    Ok(raw_distance(&a.symbols, &b.symbols, mode))
}

#[inline]
pub(crate) fn raw_distance(a: &[u32], b: &[u32], mode: HammingMode) -> usize {
    match mode {
        HammingMode::Symbol => a.iter().zip(b).filter(|(x, y)| x != y).count(),
        HammingMode::Bit => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x ^ y).count_ones() as usize)
            .sum(),
    }
}
