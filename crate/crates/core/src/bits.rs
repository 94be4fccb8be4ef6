//! Fixed-length bit strings with lexicographic order.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;

/// A bit string.  `Ord` is lexicographic with `0 < 1`, which on strings of
/// equal length coincides with the order of the binary numbers they spell.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    /// Big-endian, fixed-width encoding of `value`; panics if it does not fit.
    pub fn from_u64(value: u64, width: usize) -> Self {
        assert!(
            width >= 64 || value < (1u64 << width),
            "value {value} does not fit in {width} bits"
        );
        let mut bits = Vec::with_capacity(width);
        for i in (0..width).rev() {
            bits.push((value >> i) & 1 == 1);
        }
        BitString(bits)
    }

    pub fn from_biguint(value: &BigUint, width: usize) -> Self {
        assert!(value.bits() as usize <= width, "value does not fit");
        let mut bits = Vec::with_capacity(width);
        for i in (0..width).rev() {
            bits.push(value.bit(i as u64));
        }
        BitString(bits)
    }

    pub fn zeros(width: usize) -> Self {
        BitString(vec![false; width])
    }

    pub fn ones(width: usize) -> Self {
        BitString(vec![true; width])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    pub fn extend(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat(parts: &[BitString]) -> Self {
        let mut out = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
        for p in parts {
            out.extend_from_slice(&p.0);
        }
        BitString(out)
    }

    pub fn slice(&self, start: usize, len: usize) -> BitString {
        BitString(self.0[start..start + len].to_vec())
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut v = BigUint::zero();
        for &b in &self.0 {
            v <<= 1u32;
            if b {
                v += 1u32;
            }
        }
        v
    }

    /// Value as `u64`; panics for strings longer than 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len() <= 64);
        let mut v = 0u64;
        for &b in &self.0 {
            v = (v << 1) | b as u64;
        }
        v
    }

    pub fn is_all_zero(&self) -> bool {
        self.0.iter().all(|&b| !b)
    }

    /// Predecessor in lexicographic order among strings of the same length,
    /// i.e. binary decrement.  `None` for the all-zero string.
    pub fn pred(&self) -> Option<BitString> {
        if self.is_all_zero() {
            return None;
        }
        let mut bits = self.0.clone();
        for b in bits.iter_mut().rev() {
            if *b {
                *b = false;
                break;
            }
            *b = true;
        }
        Some(BitString(bits))
    }

    /// Successor in lexicographic order; `None` for the all-one string.
    pub fn succ(&self) -> Option<BitString> {
        if self.0.iter().all(|&b| b) {
            return None;
        }
        let mut bits = self.0.clone();
        for b in bits.iter_mut().rev() {
            if !*b {
                *b = true;
                break;
            }
            *b = false;
        }
        Some(BitString(bits))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

// Debug delegates to Display so test failures print "0101", not a vec of bools.
impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseBitStringError;

impl fmt::Display for ParseBitStringError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bit strings may only contain '0' and '1'")
    }
}

impl std::error::Error for ParseBitStringError {}

impl FromStr for BitString {
    type Err = ParseBitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ParseBitStringError),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn order_is_binary_value_order_on_fixed_length() {
        let mut strings: Vec<BitString> = (0..16u64).map(|v| BitString::from_u64(v, 4)).collect();
        let mut sorted = strings.clone();
        sorted.sort();
        strings.sort_by_key(|b| b.to_u64());
        assert_eq!(strings, sorted);
    }

    #[test]
    fn pred_succ() {
        assert_eq!(bs("0100").pred(), Some(bs("0011")));
        assert_eq!(bs("0000").pred(), None);
        assert_eq!(bs("0011").succ(), Some(bs("0100")));
        assert_eq!(bs("1111").succ(), None);
    }

    #[test]
    fn round_trips() {
        for v in 0..64u64 {
            let b = BitString::from_u64(v, 6);
            assert_eq!(b.to_u64(), v);
            assert_eq!(b.to_biguint(), BigUint::from(v));
            assert_eq!(b.to_string().parse::<BitString>().unwrap(), b);
        }
    }
}
