//! Bit strings and the small integer helpers shared by every module.

use bitvec::prelude::*;
use rand::{Rng, RngExt};

/// An owned bit string. Payloads, operands and cloud files are all `Bits`.
pub type Bits = BitVec<u8, Lsb0>;

/// Borrowed view into a [`Bits`].
pub type BitsRef = BitSlice<u8, Lsb0>;

/// Encodes the low `width` bits of `value`, least significant bit first.
pub fn bits_from_u64(value: u64, width: usize) -> Bits {
    let mut out = Bits::with_capacity(width);
    for k in 0..width {
        out.push(k < 64 && (value >> k) & 1 == 1);
    }
    out
}

/// Decodes a little-endian lane of at most 64 bits.
pub fn u64_from_bits(bits: &BitsRef) -> u64 {
    debug_assert!(bits.len() <= 64);
    bits.iter()
        .by_vals()
        .enumerate()
        .fold(0u64, |acc, (k, b)| if b { acc | (1 << k) } else { acc })
}

pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Bits {
    (0..len).map(|_| rng.random::<bool>()).collect()
}

/// `⌈log₂ x⌉`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// `⌈log₂ n⌉` clamped below at 1, used wherever a round bound carries a
/// logarithmic factor that must not vanish for `n = 1`.
pub fn log_factor(n: usize) -> u64 {
    u64::from(ceil_log2(n as u64)).max(1)
}

pub fn ceil_div(a: u64, b: u64) -> u64 {
    assert!(b > 0, "division by zero bandwidth");
    a.div_ceil(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lane_roundtrip() {
        for w in [1usize, 3, 7, 13, 64] {
            let max = if w == 64 { u64::MAX } else { (1 << w) - 1 };
            for v in [0, 1, max / 3, max] {
                assert_eq!(u64_from_bits(&bits_from_u64(v, w)), v);
            }
        }
    }

    #[test]
    fn log_helpers() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(16), 4);
        assert_eq!(ceil_log2(17), 5);
        assert_eq!(log_factor(1), 1);
        assert_eq!(log_factor(32), 5);
        assert_eq!(ceil_div(10, 4), 3);
    }
}
