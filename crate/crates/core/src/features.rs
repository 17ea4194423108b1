//! Feature configurations: which attribute tests are purchased.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Widest configuration representable; keeps `1 << width` within a `u64`.
pub const MAX_WIDTH: usize = 63;

/// A subset of the `width` attributes of a dataset, stored as a bitmask.
///
/// Bit `j` stands for attribute `j` (zero-based), so the numeric order of
/// the mask is the canonical lattice order. The textual form lists attribute
/// 1 leftmost: `"1001"` includes the first and fourth of four attributes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureConfiguration {
    bits: u64,
    width: u8,
}

impl FeatureConfiguration {
    pub fn new(bits: u64, width: usize) -> Result<Self> {
        if width > MAX_WIDTH {
            return Err(Error::WidthMismatch {
                expected: MAX_WIDTH,
                found: width,
            });
        }
        if width < 64 && bits >> width != 0 {
            return Err(Error::WidthMismatch {
                expected: width,
                found: 64 - bits.leading_zeros() as usize,
            });
        }
        Ok(Self {
            bits,
            width: width as u8,
        })
    }

    pub fn full(width: usize) -> Self {
        assert!(width <= MAX_WIDTH, "configuration width {width} too large");
        Self {
            bits: (1u64 << width) - 1,
            width: width as u8,
        }
    }

    pub fn empty(width: usize) -> Self {
        assert!(width <= MAX_WIDTH, "configuration width {width} too large");
        Self {
            bits: 0,
            width: width as u8,
        }
    }

    pub fn from_indices(indices: &[usize], width: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &j in indices {
            if j >= width {
                return Err(Error::WidthMismatch {
                    expected: width,
                    found: j + 1,
                });
            }
            bits |= 1 << j;
        }
        Self::new(bits, width)
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn width(self) -> usize {
        self.width as usize
    }

    #[inline]
    pub fn contains(self, j: usize) -> bool {
        j < self.width() && self.bits >> j & 1 == 1
    }

    #[inline]
    pub fn popcount(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.bits & !other.bits == 0
    }

    /// The configuration with attribute `j` dropped.
    pub fn without(self, j: usize) -> Self {
        Self {
            bits: self.bits & !(1u64 << j),
            width: self.width,
        }
    }

    /// Included attribute indices, ascending.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.width()).filter(move |&j| bits >> j & 1 == 1)
    }

    /// Every configuration over `width` attributes in ascending mask order.
    pub fn lattice(width: usize) -> impl Iterator<Item = Self> {
        assert!(width <= MAX_WIDTH, "configuration width {width} too large");
        (0..1u64 << width).map(move |bits| Self {
            bits,
            width: width as u8,
        })
    }

    pub fn to_bit_string(self) -> String {
        (0..self.width())
            .map(|j| if self.contains(j) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Debug for FeatureConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cfg({})", self.to_bit_string())
    }
}

impl fmt::Display for FeatureConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

impl FromStr for FeatureConfiguration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bits = 0u64;
        for (j, ch) in s.chars().enumerate() {
            match ch {
                '1' => bits |= 1 << j.min(63),
                '0' => {}
                _ => return Err(Error::Schema(format!("configuration {s:?} is not a bit string"))),
            }
        }
        Self::new(bits, s.chars().count())
    }
}

impl Serialize for FeatureConfiguration {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_bit_string())
    }
}

impl<'de> Deserialize<'de> for FeatureConfiguration {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
