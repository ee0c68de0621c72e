//! Algorithms for wheels: a ring of processing nodes around one cloud.
//!
//! Everything is organised around cloud intervals, the shortest stretch of
//! ring from a node whose combined cloud bandwidth can move a file of `s`
//! bits quickly. A minimum cover of the ring by such intervals decides who
//! cooperates with whom.

mod circle_cover;
mod holistic;
mod intervals;
mod layout;
mod modular;
mod write;

pub use circle_cover::{linearize, loads, min_circle_cover, segments, Arc, IntervalCover};
pub use holistic::{ccomb_wheel_holistic, Holistic, WheelCombRun};
pub use intervals::{best_interval, cloud_interval, cloud_intervals, wheel_bounds, CloudInterval, Direction, WheelBounds};
pub use layout::Layout;
pub use modular::{ccomb_wheel_modular, Modular};
pub use write::{cr_wheel, cw_wheel, cw_wheel_schedule};

use crate::bits::{log_factor, Bits};
use crate::error::Result;
use crate::model::WheelView;
use crate::simulator::RoundMetrics;

/// Broadcast on a wheel; the generic cast already reads along optimal flows.
pub fn ccast_wheel(view: &WheelView, payload: Bits) -> Result<(Vec<Bits>, RoundMetrics)> {
    crate::generic_comb::ccast_generic(view.graph(), payload)
}

/// `Zmax · max(1, ⌈log₂ n⌉)`.
pub fn holistic_bound(view: &WheelView, s: u64) -> u64 {
    wheel_bounds(view, s).zmax * log_factor(view.n())
}

/// `Zmax + max(1, ⌈log₂ n⌉)`.
pub fn modular_bound(view: &WheelView, s: u64) -> u64 {
    wheel_bounds(view, s).zmax + log_factor(view.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;
    use crate::model::{build_uniform_wheel, build_wheel};
    use crate::operators::{fold, MatMul, Operator, VectorAdd};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc as Shared;

    fn inputs(op: &Operator, n: usize, seed: u64) -> Vec<Bits> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| random_bits(&mut rng, op.bit_width())).collect()
    }

    #[test]
    fn holistic_matmul_is_ordered() {
        let view = build_uniform_wheel(12, 4, 16).unwrap();
        let op: Operator = Shared::new(MatMul::new(2, 8).unwrap());
        let x = inputs(&op, 12, 1);
        let want = fold(op.as_ref(), &x).unwrap();
        let (got, m) = ccomb_wheel_holistic(&view, op.clone(), x).unwrap();
        assert_eq!(got, want);
        assert!(u64::from(m.rounds_elapsed) <= 4 * holistic_bound(&view, op.bit_width() as u64));
    }

    #[test]
    fn modular_sum_beats_holistic() {
        let view = build_uniform_wheel(16, 16, 64).unwrap();
        let op: Operator = Shared::new(VectorAdd::new(16, 256).unwrap());
        let x = inputs(&op, 16, 2);
        let want = fold(op.as_ref(), &x).unwrap();
        let (a, ma) = ccomb_wheel_holistic(&view, op.clone(), x.clone()).unwrap();
        let (b, mb) = ccomb_wheel_modular(&view, op.clone(), x).unwrap();
        assert_eq!(a, want);
        assert_eq!(b, want);
        assert!(mb.rounds_elapsed <= ma.rounds_elapsed, "{} > {}", mb.rounds_elapsed, ma.rounds_elapsed);
    }

    #[test]
    fn uneven_wheel() {
        let view = build_wheel(&[8, 64, 8, 16, 32, 8, 8, 8], &[8, 16, 8, 64, 8, 8, 32, 16]).unwrap();
        let op: Operator = Shared::new(VectorAdd::new(8, 256).unwrap());
        let x = inputs(&op, 8, 3);
        let want = fold(op.as_ref(), &x).unwrap();
        assert_eq!(ccomb_wheel_holistic(&view, op.clone(), x.clone()).unwrap().0, want);
        assert_eq!(ccomb_wheel_modular(&view, op, x).unwrap().0, want);
    }

    #[test]
    fn modular_needs_grains() {
        let view = build_uniform_wheel(4, 4, 4).unwrap();
        let op: Operator = Shared::new(MatMul::new(2, 2).unwrap());
        let x = inputs(&op, 4, 4);
        assert!(ccomb_wheel_modular(&view, op, x).is_err());
    }

    #[test]
    fn cast_reaches_everyone() {
        let view = build_uniform_wheel(6, 2, 8).unwrap();
        let x = random_bits(&mut ChaCha8Rng::seed_from_u64(9), 24);
        let (out, _) = ccast_wheel(&view, x.clone()).unwrap();
        assert!(out.iter().all(|y| *y == x));
    }
}
