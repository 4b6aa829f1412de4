//! The eight symmetries of the square (the dihedral group D4) acting on
//! square pixel blocks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the eight square isometries.
///
/// Rotations are clockwise: `Rot90` sends pixel `(r, c)` to `(c, n - 1 - r)`.
/// The discriminant is the stable on-disk id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Isometry {
    Identity = 0,
    Rot90 = 1,
    Rot180 = 2,
    Rot270 = 3,
    /// Mirror about the vertical centre axis (left/right swap).
    FlipH = 4,
    /// Mirror about the horizontal centre axis (top/bottom swap).
    FlipV = 5,
    /// Transpose.
    FlipMainDiag = 6,
    FlipAntiDiag = 7,
}

impl Isometry {
    pub const ALL: [Isometry; 8] = [
        Isometry::Identity,
        Isometry::Rot90,
        Isometry::Rot180,
        Isometry::Rot270,
        Isometry::FlipH,
        Isometry::FlipV,
        Isometry::FlipMainDiag,
        Isometry::FlipAntiDiag,
    ];

    #[inline]
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Result<Self> {
        Self::ALL
            .get(id as usize)
            .copied()
            .ok_or_else(|| Error::invalid(format!("isometry id {id} out of range 0..8")))
    }

    /// Destination of source pixel `(r, c)` in an `n`×`n` block.
    #[inline]
    pub fn map(self, r: usize, c: usize, n: usize) -> (usize, usize) {
        let m = n - 1;
        match self {
            Isometry::Identity => (r, c),
            Isometry::Rot90 => (c, m - r),
            Isometry::Rot180 => (m - r, m - c),
            Isometry::Rot270 => (m - c, r),
            Isometry::FlipH => (r, m - c),
            Isometry::FlipV => (m - r, c),
            Isometry::FlipMainDiag => (c, r),
            Isometry::FlipAntiDiag => (m - c, m - r),
        }
    }

    /// The isometry equivalent to applying `self` first and then `next`.
    pub fn then(self, next: Isometry) -> Isometry {
        // A 3×3 probe has distinct images for all eight elements.
        Self::ALL
            .into_iter()
            .find(|t| {
                (0..3).all(|r| {
                    (0..3).all(|c| {
                        let (r1, c1) = self.map(r, c, 3);
                        next.map(r1, c1, 3) == t.map(r, c, 3)
                    })
                })
            })
            .expect("D4 is closed under composition")
    }

    pub fn inverse(self) -> Isometry {
        match self {
            Isometry::Rot90 => Isometry::Rot270,
            Isometry::Rot270 => Isometry::Rot90,
            other => other,
        }
    }

    /// Writes the transformed `n`×`n` row-major block `src` into `dst`.
    pub fn apply_slice<T: Copy>(self, src: &[T], n: usize, dst: &mut [T]) {
        debug_assert_eq!(src.len(), n * n);
        debug_assert_eq!(dst.len(), n * n);
        if self == Isometry::Identity {
            dst.copy_from_slice(src);
            return;
        }
        for r in 0..n {
            for c in 0..n {
                let (r2, c2) = self.map(r, c, n);
                dst[r2 * n + c2] = src[r * n + c];
            }
        }
    }
}

impl fmt::Display for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
