use serde_json::Value;

use super::{check_width, CombiningOperator};
use crate::bits::{Bits, BitsRef};
use crate::error::{Error, Result};

/// Bitwise OR of `s`-bit strings; every bit is its own grain.
#[derive(Clone, Debug)]
pub struct BitwiseOr {
    s: usize,
}

impl BitwiseOr {
    pub fn new(s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::Unsupported("bitwise_or needs s >= 1".into()));
        }
        Ok(BitwiseOr { s })
    }
}

impl CombiningOperator for BitwiseOr {
    fn name(&self) -> &'static str {
        "bitwise_or"
    }

    fn bit_width(&self) -> usize {
        self.s
    }

    fn commutative(&self) -> bool {
        true
    }

    fn apply(&self, a: &BitsRef, b: &BitsRef) -> Result<Bits> {
        check_width(self.s, a.len())?;
        check_width(self.s, b.len())?;
        let mut out = a.to_bitvec();
        out |= b;
        Ok(out)
    }

    fn unit(&self) -> Bits {
        Bits::repeat(false, self.s)
    }

    fn grain_size(&self) -> Option<usize> {
        Some(1)
    }

    fn apply_grain(&self, _k: usize, a: &BitsRef, b: &BitsRef) -> Result<Bits> {
        check_width(1, a.len())?;
        check_width(1, b.len())?;
        Ok(Bits::repeat(a[0] | b[0], 1))
    }

    /// Operands are strings of `0`/`1`, bit 0 first.
    fn parse_value(&self, v: &Value) -> Result<Bits> {
        let text = v
            .as_str()
            .ok_or_else(|| Error::Unsupported("bitwise_or operands are 0/1 strings".into()))?;
        let bits = text
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Unsupported(format!("bad bit character {c:?}"))),
            })
            .collect::<Result<Bits>>()?;
        check_width(self.s, bits.len())?;
        Ok(bits)
    }

    fn render(&self, bits: &BitsRef) -> Value {
        Value::from(bits.iter().map(|b| if *b { '1' } else { '0' }).collect::<String>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn or_of_strings() {
        let op = BitwiseOr::new(4).unwrap();
        let a = op.parse_value(&json!("1000")).unwrap();
        let b = op.parse_value(&json!("0010")).unwrap();
        assert_eq!(op.render(&op.apply(&a, &b).unwrap()), json!("1010"));
        assert!(op.parse_value(&json!("10")).is_err());
    }
}
