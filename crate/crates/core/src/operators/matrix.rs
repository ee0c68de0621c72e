use serde_json::Value;

use super::{check_width, CombiningOperator};
use crate::bits::{bits_from_u64, ceil_log2, u64_from_bits, Bits, BitsRef};
use crate::error::{Error, Result};

/// `d × d` matrix product over `Z_p`, row-major, one `⌈log₂ p⌉`-bit lane per
/// entry. Non-commutative and holistic.
#[derive(Clone, Debug)]
pub struct MatMul {
    d: usize,
    p: u64,
    lane: usize,
}

impl MatMul {
    pub fn new(d: usize, p: u64) -> Result<Self> {
        if d == 0 || p < 2 {
            return Err(Error::Unsupported(format!("matmul needs d >= 1 and p >= 2, got d={d} p={p}")));
        }
        Ok(MatMul {
            d,
            p,
            lane: (ceil_log2(p) as usize).max(1),
        })
    }

    pub fn encode(&self, entries: &[u64]) -> Result<Bits> {
        check_width(self.d * self.d, entries.len())?;
        let mut out = Bits::with_capacity(self.bit_width());
        for &e in entries {
            out.extend_from_bitslice(&bits_from_u64(e % self.p, self.lane));
        }
        Ok(out)
    }

    pub fn decode(&self, bits: &BitsRef) -> Vec<u64> {
        bits.chunks(self.lane).map(|c| u64_from_bits(c) % self.p).collect()
    }
}

impl CombiningOperator for MatMul {
    fn name(&self) -> &'static str {
        "matmul"
    }

    fn bit_width(&self) -> usize {
        self.d * self.d * self.lane
    }

    fn commutative(&self) -> bool {
        false
    }

    fn apply(&self, a: &BitsRef, b: &BitsRef) -> Result<Bits> {
        check_width(self.bit_width(), a.len())?;
        check_width(self.bit_width(), b.len())?;
        let (x, y, d, p) = (self.decode(a), self.decode(b), self.d, u128::from(self.p));
        let mut out = vec![0u64; d * d];
        for i in 0..d {
            for j in 0..d {
                let acc = (0..d).fold(0u128, |acc, k| {
                    (acc + u128::from(x[i * d + k]) * u128::from(y[k * d + j])) % p
                });
                out[i * d + j] = acc as u64;
            }
        }
        self.encode(&out)
    }

    fn unit(&self) -> Bits {
        let d = self.d;
        let id: Vec<u64> = (0..d * d).map(|k| u64::from(k / d == k % d)).collect();
        self.encode(&id).expect("identity has d*d entries")
    }

    fn parse_value(&self, v: &Value) -> Result<Bits> {
        let flat: Vec<u64> = match serde_json::from_value::<Vec<Vec<u64>>>(v.clone()) {
            Ok(rows) => rows.concat(),
            Err(_) => serde_json::from_value(v.clone())?,
        };
        self.encode(&flat)
    }

    fn render(&self, bits: &BitsRef) -> Value {
        let flat = self.decode(bits);
        Value::from(flat.chunks(self.d).map(|r| r.to_vec()).collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn two_by_two_over_z2() {
        let op = MatMul::new(2, 2).unwrap();
        assert_eq!(op.bit_width(), 4);
        let a = op.parse_value(&json!([[1, 1], [0, 1]])).unwrap();
        let b = op.parse_value(&json!([[1, 0], [1, 1]])).unwrap();
        assert_eq!(op.render(&op.apply(&a, &b).unwrap()), json!([[0, 1], [1, 1]]));
        assert_eq!(op.render(&op.apply(&b, &a).unwrap()), json!([[1, 1], [1, 0]]));
    }

    #[test]
    fn identity_is_unit() {
        let op = MatMul::new(3, 7).unwrap();
        let a = op.encode(&[1, 2, 3, 4, 5, 6, 0, 1, 2]).unwrap();
        assert_eq!(op.apply(&op.unit(), &a).unwrap(), a);
        assert_eq!(op.apply(&a, &op.unit()).unwrap(), a);
    }
}
