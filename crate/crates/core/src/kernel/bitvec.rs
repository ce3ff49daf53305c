use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernel::Rat;

/// Widest bit vector the toolkit handles.
pub const MAX_WIDTH: usize = 64;

/// Fixed-width bit string, most significant (leftmost) bit first.
///
/// Bits are packed into a `u64`; bit `0` is the leftmost character of the
/// printed form. For equal widths the lexicographic order coincides with the
/// numeric order of [`BitVec::value`], which is what makes exhaustive
/// enumeration in counting order also lexicographic.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVec {
    width: u8,
    value: u64,
}

impl BitVec {
    /// `value` is truncated to the low `width` bits.
    pub fn new(width: usize, value: u64) -> Result<BitVec> {
        if width > MAX_WIDTH {
            return Err(Error::Invalid(format!(
                "bit width {width} exceeds the maximum of {MAX_WIDTH}"
            )));
        }
        Ok(BitVec {
            width: width as u8,
            value: value & mask(width),
        })
    }

    pub fn zeros(width: usize) -> BitVec {
        BitVec::new(width, 0).expect("width within range")
    }

    pub fn from_bits(bits: &[bool]) -> Result<BitVec> {
        let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        BitVec::new(bits.len(), value)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    /// Bits read as an unsigned integer, leftmost bit most significant.
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.width(), "bit index {index} out of range");
        (self.value >> (self.width() - 1 - index)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.width()).map(move |k| self.get(k))
    }

    pub fn concat(&self, other: &BitVec) -> Result<BitVec> {
        let width = self.width() + other.width();
        if width > MAX_WIDTH {
            return Err(Error::Invalid(format!(
                "concatenated width {width} exceeds {MAX_WIDTH}"
            )));
        }
        let shifted = if other.width() == 64 {
            0
        } else {
            self.value << other.width()
        };
        BitVec::new(width, shifted | other.value)
    }

    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        assert!(start + len <= self.width(), "slice out of range");
        let shift = self.width() - start - len;
        BitVec::new(len, self.value >> shift).expect("width within range")
    }

    /// One coordinate per bit, each 0 or 1.
    pub fn to_rats(&self) -> Vec<Rat> {
        self.iter()
            .map(|b| if b { Rat::ONE } else { Rat::ZERO })
            .collect()
    }

    /// One byte (0 or 1) per bit; the layout micro programs read and write.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<BitVec> {
        if bytes.iter().any(|&b| b > 1) {
            return None;
        }
        let bits: Vec<bool> = bytes.iter().map(|&b| b == 1).collect();
        BitVec::from_bits(&bits).ok()
    }

    /// All `2^width` vectors in lexicographic order.
    pub fn enumerate(width: usize) -> impl Iterator<Item = BitVec> {
        assert!(width < 64, "cannot enumerate width {width}");
        (0..(1u64 << width)).map(move |v| BitVec::new(width, v).expect("width within range"))
    }
}

fn mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl Ord for BitVec {
    fn cmp(&self, other: &Self) -> Ordering {
        let common = self.width().min(other.width());
        let a = if common == 0 { 0 } else { self.slice(0, common).value };
        let b = if common == 0 { 0 } else { other.slice(0, common).value };
        a.cmp(&b).then(self.width.cmp(&other.width))
    }
}

impl PartialOrd for BitVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromStr for BitVec {
    type Err = Error;

    /// A string of `0`/`1` characters; `-` denotes the empty vector.
    fn from_str(s: &str) -> Result<Self> {
        if s == "-" {
            return Ok(BitVec::zeros(0));
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Invalid(format!("invalid bit string `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        BitVec::from_bits(&bits)
    }
}
