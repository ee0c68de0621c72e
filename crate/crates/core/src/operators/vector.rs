use serde_json::Value;

use super::{check_width, CombiningOperator};
use crate::bits::{bits_from_u64, ceil_log2, u64_from_bits, Bits, BitsRef};
use crate::error::{Error, Result};

/// Coordinate-wise addition in `(Z_M)^m`. Each coordinate is a
/// little-endian lane of `⌈log₂ M⌉` bits, which is also the grain.
#[derive(Clone, Debug)]
pub struct VectorAdd {
    m: usize,
    modulus: u64,
    lane: usize,
}

impl VectorAdd {
    pub fn new(m: usize, modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::Unsupported(format!("modulus {modulus} < 2")));
        }
        if m == 0 {
            return Err(Error::Unsupported("vector length 0".into()));
        }
        Ok(VectorAdd {
            m,
            modulus,
            lane: ceil_log2(modulus) as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn lane_bits(&self) -> usize {
        self.lane
    }

    pub fn encode(&self, coords: &[u64]) -> Result<Bits> {
        check_width(self.m, coords.len())?;
        let mut out = Bits::with_capacity(self.m * self.lane);
        for &c in coords {
            if c >= self.modulus {
                return Err(Error::Unsupported(format!(
                    "coordinate {c} is not below the modulus {}",
                    self.modulus
                )));
            }
            out.extend_from_bitslice(&bits_from_u64(c, self.lane));
        }
        Ok(out)
    }

    pub fn decode(&self, bits: &BitsRef) -> Vec<u64> {
        bits.chunks(self.lane).map(u64_from_bits).collect()
    }

    fn add_lane(&self, a: &BitsRef, b: &BitsRef) -> Bits {
        let m = u128::from(self.modulus);
        let x = u128::from(u64_from_bits(a)) % m;
        let y = u128::from(u64_from_bits(b)) % m;
        bits_from_u64(((x + y) % m) as u64, self.lane)
    }
}

impl CombiningOperator for VectorAdd {
    fn name(&self) -> &'static str {
        "vector_add"
    }

    fn bit_width(&self) -> usize {
        self.m * self.lane
    }

    fn commutative(&self) -> bool {
        true
    }

    fn apply(&self, a: &BitsRef, b: &BitsRef) -> Result<Bits> {
        check_width(self.bit_width(), a.len())?;
        check_width(self.bit_width(), b.len())?;
        let mut out = Bits::with_capacity(self.bit_width());
        for (x, y) in a.chunks(self.lane).zip(b.chunks(self.lane)) {
            out.extend_from_bitslice(&self.add_lane(x, y));
        }
        Ok(out)
    }

    fn unit(&self) -> Bits {
        Bits::repeat(false, self.bit_width())
    }

    fn grain_size(&self) -> Option<usize> {
        Some(self.lane)
    }

    fn apply_grain(&self, _k: usize, a: &BitsRef, b: &BitsRef) -> Result<Bits> {
        check_width(self.lane, a.len())?;
        check_width(self.lane, b.len())?;
        Ok(self.add_lane(a, b))
    }

    fn parse_value(&self, v: &Value) -> Result<Bits> {
        let coords: Vec<u64> = serde_json::from_value(v.clone())?;
        self.encode(&coords)
    }

    fn render(&self, bits: &BitsRef) -> Value {
        Value::from(self.decode(bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sum() {
        let op = VectorAdd::new(2, 10).unwrap();
        let a = op.encode(&[1, 2]).unwrap();
        let b = op.encode(&[3, 4]).unwrap();
        assert_eq!(op.decode(&op.apply(&a, &b).unwrap()), vec![4, 6]);
        assert_eq!(op.decode(&op.apply(&a, &op.unit()).unwrap()), vec![1, 2]);
        let wrap = op.encode(&[9, 9]).unwrap();
        assert_eq!(op.decode(&op.apply(&wrap, &wrap).unwrap()), vec![8, 8]);
    }

    #[test]
    fn coordinates_must_be_reduced() {
        let op = VectorAdd::new(1, 10).unwrap();
        assert!(op.encode(&[10]).is_err());
        assert!(VectorAdd::new(1, 1).is_err());
    }
}
