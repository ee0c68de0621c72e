//! Randomised checks of the algebraic laws an operator claims.

use rand::Rng;

use super::{grain_count, grain_range, CombiningOperator};
use crate::bits::{Bits, BitsRef};
use crate::error::{Error, Result};

/// Draws a random valid operand: the result of combining a random bit string
/// with the unit, so operators with structured encodings normalise it.
pub type Sampler<'a> = dyn FnMut(&mut dyn rand::Rng) -> Bits + 'a;

fn fail(op: &dyn CombiningOperator, law: &str, a: &BitsRef) -> Error {
    Error::LawViolation(format!("{law} fails for {} at a = {a}", op.name()))
}

pub fn check_associativity<R: Rng>(
    op: &dyn CombiningOperator,
    sample: &mut Sampler,
    rng: &mut R,
    cases: usize,
) -> Result<()> {
    for _ in 0..cases {
        let (a, b, c) = (sample(rng), sample(rng), sample(rng));
        let left = op.apply(&op.apply(&a, &b)?, &c)?;
        let right = op.apply(&a, &op.apply(&b, &c)?)?;
        if left != right {
            return Err(fail(op, "associativity", &a));
        }
    }
    Ok(())
}

pub fn check_unit<R: Rng>(
    op: &dyn CombiningOperator,
    sample: &mut Sampler,
    rng: &mut R,
    cases: usize,
) -> Result<()> {
    let u = op.unit();
    for _ in 0..cases {
        let a = sample(rng);
        if op.apply(&u, &a)? != a || op.apply(&a, &u)? != a {
            return Err(fail(op, "unit law", &a));
        }
    }
    Ok(())
}

/// Passes trivially for operators that do not claim commutativity.
pub fn check_commutativity<R: Rng>(
    op: &dyn CombiningOperator,
    sample: &mut Sampler,
    rng: &mut R,
    cases: usize,
) -> Result<()> {
    if !op.commutative() {
        return Ok(());
    }
    for _ in 0..cases {
        let (a, b) = (sample(rng), sample(rng));
        if op.apply(&a, &b)? != op.apply(&b, &a)? {
            return Err(fail(op, "commutativity", &a));
        }
    }
    Ok(())
}

/// Full application must equal the concatenation of grain applications.
pub fn check_grains<R: Rng>(
    op: &dyn CombiningOperator,
    sample: &mut Sampler,
    rng: &mut R,
    cases: usize,
) -> Result<()> {
    if op.grain_size().is_none() {
        return Ok(());
    }
    for _ in 0..cases {
        let (a, b) = (sample(rng), sample(rng));
        let whole = op.apply(&a, &b)?;
        let mut glued = Bits::new();
        for k in 0..grain_count(op) {
            let r = grain_range(op, k);
            glued.extend_from_bitslice(&op.apply_grain(k, &a[r.clone()], &b[r])?);
        }
        if glued != whole {
            return Err(fail(op, "grain decomposition", &a));
        }
    }
    Ok(())
}

/// Runs every law check.
pub fn check_all<R: Rng>(
    op: &dyn CombiningOperator,
    sample: &mut Sampler,
    rng: &mut R,
    cases: usize,
) -> Result<()> {
    check_associativity(op, sample, rng, cases)?;
    check_unit(op, sample, rng, cases)?;
    check_commutativity(op, sample, rng, cases)?;
    check_grains(op, sample, rng, cases)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::sync::Arc;

    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::bits::random_bits;
    use crate::operators::{BitwiseOr, DedupUnion, Faulty, MatMul, VectorAdd};

    fn run(op: &dyn CombiningOperator, sample: &mut Sampler) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        check_all(op, sample, &mut rng, 10_000)
    }

    #[test]
    fn vector_add_laws() {
        let op = VectorAdd::new(3, 5).unwrap();
        run(&op, &mut |r: &mut dyn Rng| {
            let v: Vec<u64> = (0..3).map(|_| r.random_range(0..5)).collect();
            op.encode(&v).unwrap()
        })
        .unwrap();
    }

    #[test]
    fn matmul_laws() {
        let op = MatMul::new(2, 3).unwrap();
        run(&op, &mut |r: &mut dyn Rng| {
            let v: Vec<u64> = (0..4).map(|_| r.random_range(0..3)).collect();
            op.encode(&v).unwrap()
        })
        .unwrap();
    }

    #[test]
    fn matmul_is_not_commutative() {
        let op = MatMul::new(2, 2).unwrap();
        let a = op.encode(&[1, 1, 0, 1]).unwrap();
        let b = op.encode(&[1, 0, 1, 1]).unwrap();
        assert_ne!(op.apply(&a, &b).unwrap(), op.apply(&b, &a).unwrap());
    }

    #[test]
    fn bitwise_laws() {
        let op = BitwiseOr::new(6).unwrap();
        run(&op, &mut |r: &mut dyn Rng| random_bits(r, 6)).unwrap();
    }

    #[test]
    fn dedup_laws() {
        let op = DedupUnion::new(4, 4, 6).unwrap();
        run(&op, &mut |r: &mut dyn Rng| {
            let k = r.random_range(0..4);
            let set: BTreeMap<u64, usize> =
                (0..k).map(|_| (r.random_range(0..6), r.random_range(0..4))).collect();
            op.encode(&set).unwrap()
        })
        .unwrap();
    }

    #[test]
    fn faulty_operator_is_caught() {
        let inner = Arc::new(VectorAdd::new(2, 16).unwrap());
        let op = Faulty(inner.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = check_associativity(
            &op,
            &mut |r: &mut dyn Rng| {
                let v: Vec<u64> = (0..2).map(|_| r.random_range(0..16)).collect();
                inner.encode(&v).unwrap()
            },
            &mut rng,
            1000,
        )
        .unwrap_err();
        assert!(err.to_string().contains("associativity"));
    }
}
