use std::collections::BTreeMap;

use serde_json::Value;

use super::{check_width, CombiningOperator};
use crate::bits::{bits_from_u64, ceil_log2, u64_from_bits, Bits, BitsRef};
use crate::error::{Error, Result};

/// Union of tagged-hash sets that keeps the smallest owner per hash.
///
/// A set is encoded as `m` records of `H + ⌈log₂ n⌉` bits, sorted by hash and
/// padded with records whose hash is all ones. That hash value is reserved.
#[derive(Clone, Debug)]
pub struct DedupUnion {
    hash_bits: usize,
    owner_bits: usize,
    n: usize,
    capacity: usize,
}

pub type Ownership = BTreeMap<u64, usize>;

impl DedupUnion {
    pub fn new(hash_bits: usize, n: usize, capacity: usize) -> Result<Self> {
        if !(1..=63).contains(&hash_bits) || n == 0 || capacity == 0 {
            return Err(Error::Unsupported(format!(
                "dedup_union needs 1 <= H <= 63, n >= 1, m >= 1 (got H={hash_bits}, n={n}, m={capacity})"
            )));
        }
        Ok(DedupUnion {
            hash_bits,
            owner_bits: ceil_log2(n as u64) as usize,
            n,
            capacity,
        })
    }

    fn record_bits(&self) -> usize {
        self.hash_bits + self.owner_bits
    }

    /// The reserved padding hash.
    pub fn sentinel(&self) -> u64 {
        (1u64 << self.hash_bits) - 1
    }

    pub fn encode(&self, set: &Ownership) -> Result<Bits> {
        if set.len() > self.capacity {
            return Err(Error::Unsupported(format!(
                "{} unique hashes exceed the capacity m = {}",
                set.len(),
                self.capacity
            )));
        }
        let mut out = Bits::with_capacity(self.bit_width());
        for (&h, &owner) in set {
            if h >= self.sentinel() {
                return Err(Error::Unsupported(format!("hash {h} does not fit below the sentinel")));
            }
            if owner >= self.n {
                return Err(Error::Unsupported(format!("owner {owner} >= n = {}", self.n)));
            }
            out.extend_from_bitslice(&bits_from_u64(h, self.hash_bits));
            out.extend_from_bitslice(&bits_from_u64(owner as u64, self.owner_bits));
        }
        for _ in set.len()..self.capacity {
            out.extend_from_bitslice(&bits_from_u64(self.sentinel(), self.hash_bits));
            out.extend_from_bitslice(&bits_from_u64(0, self.owner_bits));
        }
        Ok(out)
    }

    pub fn decode(&self, bits: &BitsRef) -> Result<Ownership> {
        check_width(self.bit_width(), bits.len())?;
        let mut set = Ownership::new();
        let mut last = None;
        let mut padding = false;
        for rec in bits.chunks(self.record_bits()) {
            let h = u64_from_bits(&rec[..self.hash_bits]);
            let owner = u64_from_bits(&rec[self.hash_bits..]) as usize;
            if h == self.sentinel() {
                padding = true;
                continue;
            }
            if padding || last.is_some_and(|l| l >= h) || owner >= self.n {
                return Err(Error::Unsupported("malformed tagged-hash encoding".into()));
            }
            last = Some(h);
            set.insert(h, owner);
        }
        Ok(set)
    }

    pub fn union(a: &Ownership, b: &Ownership) -> Ownership {
        let mut out = a.clone();
        for (&h, &o) in b {
            out.entry(h).and_modify(|x| *x = (*x).min(o)).or_insert(o);
        }
        out
    }
}

impl CombiningOperator for DedupUnion {
    fn name(&self) -> &'static str {
        "dedup_union"
    }

    fn bit_width(&self) -> usize {
        self.capacity * self.record_bits()
    }

    fn commutative(&self) -> bool {
        true
    }

    fn apply(&self, a: &BitsRef, b: &BitsRef) -> Result<Bits> {
        self.encode(&Self::union(&self.decode(a)?, &self.decode(b)?))
    }

    fn unit(&self) -> Bits {
        self.encode(&Ownership::new()).expect("empty set fits")
    }

    /// Operands are objects mapping decimal hash strings to owners.
    fn parse_value(&self, v: &Value) -> Result<Bits> {
        let raw: BTreeMap<String, usize> = serde_json::from_value(v.clone())?;
        let mut set = Ownership::new();
        for (k, o) in raw {
            let h = k
                .parse::<u64>()
                .map_err(|_| Error::Unsupported(format!("bad hash key {k:?}")))?;
            set.insert(h, o);
        }
        self.encode(&set)
    }

    fn render(&self, bits: &BitsRef) -> Value {
        match self.decode(bits) {
            Ok(set) => Value::Object(
                set.into_iter()
                    .map(|(h, o)| (h.to_string(), Value::from(o)))
                    .collect(),
            ),
            Err(e) => Value::from(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_minimal_owner() {
        let op = DedupUnion::new(8, 4, 4).unwrap();
        assert_eq!(op.bit_width(), 4 * (8 + 2));
        let a = op.encode(&Ownership::from([(7, 1)])).unwrap();
        let b = op.encode(&Ownership::from([(7, 2), (9, 2)])).unwrap();
        let r = op.decode(&op.apply(&a, &b).unwrap()).unwrap();
        assert_eq!(r, Ownership::from([(7, 1), (9, 2)]));
        assert_eq!(op.apply(&a, &op.unit()).unwrap(), a);
        assert_eq!(op.apply(&b, &b).unwrap(), b);
    }

    #[test]
    fn overflow_and_malformed_are_errors() {
        let op = DedupUnion::new(8, 3, 1).unwrap();
        assert!(op.encode(&Ownership::from([(1, 0), (2, 0)])).is_err());
        assert!(op.encode(&Ownership::from([(255, 0)])).is_err());
        let mut bad = op.encode(&Ownership::from([(3, 0)])).unwrap();
        bad.set(8, true);
        bad.set(9, true);
        assert!(op.decode(&bad).is_err());
    }
}
