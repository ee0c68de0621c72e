//! Associative combining operators `⊗` with a unit `1̃`.
//!
//! Operands are fixed-width bit strings. The unit never has to travel: a
//! party holding `1̃` is represented by [`Operand::Unit`], which costs zero
//! bits on every link.

mod bitwise;
mod dedup;
pub mod laws;
mod matrix;
mod vector;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use bitwise::BitwiseOr;
pub use dedup::{DedupUnion, Ownership};
pub use matrix::MatMul;
pub use vector::VectorAdd;

use crate::bits::{Bits, BitsRef};
use crate::error::{Error, Result};

pub trait CombiningOperator: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Operand and result width `s` in bits.
    fn bit_width(&self) -> usize;

    fn commutative(&self) -> bool;

    fn apply(&self, a: &BitsRef, b: &BitsRef) -> Result<Bits>;

    /// Explicit encoding of `1̃`, used only where a unit must be
    /// materialised locally.
    fn unit(&self) -> Bits;

    /// Uniform grain size `g` for modular operators. The last grain may be
    /// shorter when `g` does not divide the width.
    fn grain_size(&self) -> Option<usize> {
        None
    }

    /// Combines grain `k` of two operands. Only called when
    /// [`grain_size`](Self::grain_size) is `Some`.
    fn apply_grain(&self, _k: usize, _a: &BitsRef, _b: &BitsRef) -> Result<Bits> {
        Err(Error::Unsupported(format!("{} is not modular", self.name())))
    }

    /// Parses a JSON operand into its encoding.
    fn parse_value(&self, v: &Value) -> Result<Bits>;

    fn render(&self, bits: &BitsRef) -> Value;
}

pub type Operator = Arc<dyn CombiningOperator>;

/// Number of grains, zero for holistic operators.
pub fn grain_count(op: &dyn CombiningOperator) -> usize {
    op.grain_size()
        .map(|g| op.bit_width().div_ceil(g))
        .unwrap_or(0)
}

/// Bit range of grain `k`.
pub fn grain_range(op: &dyn CombiningOperator, k: usize) -> std::ops::Range<usize> {
    let g = op.grain_size().expect("modular operator");
    let start = k * g;
    start..(start + g).min(op.bit_width())
}

pub(crate) fn check_width(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::WidthMismatch { expected, got })
    }
}

/// A value that is either the unit or an explicit encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Unit,
    Value(Bits),
}

impl Operand {
    pub fn combine(op: &dyn CombiningOperator, a: &Operand, b: &Operand) -> Result<Operand> {
        Ok(match (a, b) {
            (Operand::Unit, x) | (x, Operand::Unit) => x.clone(),
            (Operand::Value(x), Operand::Value(y)) => Operand::Value(op.apply(x, y)?),
        })
    }

    pub fn into_bits(self, op: &dyn CombiningOperator) -> Bits {
        match self {
            Operand::Unit => op.unit(),
            Operand::Value(b) => b,
        }
    }
}

/// Left-to-right fold `S_0 ⊗ ... ⊗ S_{n-1}`: the reference every combining
/// algorithm is checked against.
pub fn fold(op: &dyn CombiningOperator, inputs: &[Bits]) -> Result<Bits> {
    let mut acc = op.unit();
    for x in inputs {
        acc = op.apply(&acc, x)?;
    }
    Ok(acc)
}

/// Scenario-level operator descriptor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", deny_unknown_fields)]
pub enum OperatorSpec {
    #[serde(rename = "vector_add")]
    VectorAdd {
        m: usize,
        #[serde(rename = "M")]
        modulus: u64,
    },
    #[serde(rename = "matmul")]
    MatMul { d: usize, p: u64 },
    #[serde(rename = "bitwise_or")]
    BitwiseOr { s: usize },
    #[serde(rename = "dedup_union")]
    DedupUnion {
        #[serde(rename = "H")]
        hash_bits: usize,
        n: usize,
        m: usize,
    },
}

impl OperatorSpec {
    pub fn build(&self) -> Result<Operator> {
        Ok(match *self {
            OperatorSpec::VectorAdd { m, modulus } => Arc::new(VectorAdd::new(m, modulus)?),
            OperatorSpec::MatMul { d, p } => Arc::new(MatMul::new(d, p)?),
            OperatorSpec::BitwiseOr { s } => Arc::new(BitwiseOr::new(s)?),
            OperatorSpec::DedupUnion { hash_bits, n, m } => {
                Arc::new(DedupUnion::new(hash_bits, n, m)?)
            }
        })
    }
}

/// Wraps an operator and perturbs every result, breaking associativity and
/// the unit laws. Used to check that the law checks catch a bad operator.
#[derive(Debug)]
pub struct Faulty(pub Operator);

impl CombiningOperator for Faulty {
    fn name(&self) -> &'static str {
        "faulty"
    }

    fn bit_width(&self) -> usize {
        self.0.bit_width()
    }

    fn commutative(&self) -> bool {
        self.0.commutative()
    }

    fn apply(&self, a: &BitsRef, b: &BitsRef) -> Result<Bits> {
        let mut out = self.0.apply(a, b)?;
        if let Some(mut bit) = out.first_mut() {
            let v = !*bit;
            bit.set(v);
        }
        Ok(out)
    }

    fn unit(&self) -> Bits {
        self.0.unit()
    }

    fn parse_value(&self, v: &Value) -> Result<Bits> {
        self.0.parse_value(v)
    }

    fn render(&self, bits: &BitsRef) -> Value {
        self.0.render(bits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_roundtrip() {
        let spec: OperatorSpec = serde_json::from_str(r#"{"op":"vector_add","m":2,"M":10}"#).unwrap();
        assert_eq!(spec, OperatorSpec::VectorAdd { m: 2, modulus: 10 });
        let back = serde_json::to_string(&spec).unwrap();
        assert_eq!(back, r#"{"op":"vector_add","m":2,"M":10}"#);
        assert!(serde_json::from_str::<OperatorSpec>(r#"{"op":"vector_add","m":2,"M":10,"q":1}"#).is_err());
    }

    #[test]
    fn unit_operands_cost_nothing() {
        let op = VectorAdd::new(2, 10).unwrap();
        let x = op.parse_value(&serde_json::json!([3, 4])).unwrap();
        let r = Operand::combine(&op, &Operand::Unit, &Operand::Value(x.clone())).unwrap();
        assert_eq!(r, Operand::Value(x));
        assert_eq!(
            Operand::combine(&op, &Operand::Unit, &Operand::Unit).unwrap(),
            Operand::Unit
        );
    }

    #[test]
    fn fold_of_fl_vectors() {
        let op = VectorAdd::new(2, 100).unwrap();
        let xs: Vec<Bits> = [[10, 20], [30, 40], [5, 5]]
            .iter()
            .map(|v| op.parse_value(&serde_json::json!(v)).unwrap())
            .collect();
        assert_eq!(op.render(&fold(&op, &xs).unwrap()), serde_json::json!([45, 65]));
    }
}
