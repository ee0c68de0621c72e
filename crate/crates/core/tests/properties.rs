use std::sync::Arc;

use cwc::bits::random_bits;
use cwc::fatlinks::{ccomb_fat, cw_fat};
use cwc::flowcore::{max_flow_over_time, quickest_flow};
use cwc::generic_comb::ccomb_generic;
use cwc::model::{build_path_with_cloud, build_uniform_wheel, build_wheel, FatLinksView, NodeId};
use cwc::operators::{fold, MatMul, Operator, VectorAdd};
use cwc::wheel::{ccomb_wheel_modular, loads, Layout};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn inputs(op: &Operator, n: usize, seed: u64) -> Vec<cwc::bits::Bits> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    // Normalise through the unit so structured encodings are valid elements.
    (0..n).map(|_| op.apply(&op.unit(), &random_bits(&mut r, op.bit_width())).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matmul_is_associative(seed in any::<u64>(), d in 1usize..4, p in 2u64..6) {
        let op: Operator = Arc::new(MatMul::new(d, p).unwrap());
        let x = inputs(&op, 3, seed);
        let left = op.apply(&op.apply(&x[0], &x[1]).unwrap(), &x[2]).unwrap();
        let right = op.apply(&x[0], &op.apply(&x[1], &x[2]).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn flow_over_time_is_monotone(n in 1usize..5, x in 1u64..5, local in 1u64..5, t in 1u32..12) {
        let g = build_path_with_cloud(n, x, local);
        let src = NodeId::Proc(n - 1);
        let a = max_flow_over_time(&g, src, NodeId::Cloud(0), t).value();
        let b = max_flow_over_time(&g, src, NodeId::Cloud(0), t + 1).value();
        prop_assert!(a <= b);
    }

    #[test]
    fn quickest_flow_ships_exactly(n in 1usize..5, x in 1u64..5, s in 1u64..40) {
        let g = build_path_with_cloud(n, x, 4);
        let (t, flow) = quickest_flow(&g, NodeId::Proc(0), NodeId::Cloud(0), s).unwrap();
        prop_assert_eq!(flow.value(), s);
        prop_assert!(max_flow_over_time(&g, NodeId::Proc(0), NodeId::Cloud(0), t - 1).value() < s);
    }

    #[test]
    fn circle_cover_load_is_one_or_two(
        cloud in proptest::collection::vec(1u64..64, 3..14),
        seed in any::<u64>(),
        s in 8u64..512,
    ) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let ring: Vec<u64> = cloud.iter().map(|_| 1 + rand::RngExt::random_range(&mut r, 0..128u64)).collect();
        let view = build_wheel(&cloud, &ring).unwrap();
        let layout = Layout::new(&view, s).unwrap();
        let max = loads(cloud.len(), &layout.cover.arcs).into_iter().max().unwrap();
        prop_assert!((1..=2).contains(&max));
    }

    #[test]
    fn generic_combine_matches_fold(n in 1usize..7, seed in any::<u64>()) {
        let g = build_path_with_cloud(n, 2, 4);
        let op: Operator = Arc::new(MatMul::new(2, 3).unwrap());
        let x = inputs(&op, n, seed);
        prop_assert_eq!(ccomb_generic(&g, op.clone(), x.clone()).unwrap().0, fold(op.as_ref(), &x).unwrap());
    }

    #[test]
    fn fat_combine_matches_fold(n in 1usize..12, bc in 1u64..8, seed in any::<u64>()) {
        let view = FatLinksView::new(build_path_with_cloud(n, bc, 64), 32).unwrap();
        let op: Operator = Arc::new(VectorAdd::new(4, 256).unwrap());
        let x = inputs(&op, n, seed);
        prop_assert_eq!(ccomb_fat(&view, op.clone(), x.clone()).unwrap().0, fold(op.as_ref(), &x).unwrap());
    }

    #[test]
    fn modular_wheel_matches_fold(n in 3usize..12, seed in any::<u64>()) {
        let view = build_uniform_wheel(n, 8, 32).unwrap();
        let op: Operator = Arc::new(VectorAdd::new(8, 256).unwrap());
        let x = inputs(&op, n, seed);
        prop_assert_eq!(ccomb_wheel_modular(&view, op.clone(), x.clone()).unwrap().0, fold(op.as_ref(), &x).unwrap());
    }

    #[test]
    fn replay_is_deterministic(n in 1usize..10, seed in any::<u64>()) {
        let view = FatLinksView::new(build_path_with_cloud(n, 2, 64), 64).unwrap();
        let x = random_bits(&mut ChaCha8Rng::seed_from_u64(seed), 64);
        prop_assert_eq!(cw_fat(&view, 0, &x).unwrap(), cw_fat(&view, 0, &x).unwrap());
    }
}
