//! Algorithms for `s`-fat-links networks, where any local link carries a
//! whole file per round and the cloud links are the bottleneck.

mod cast;
mod cluster;
mod combine;
mod cover;

pub use cast::{ccast_fat, ccast_fat_program, FatCast};
pub use cluster::{
    cloud_cluster, cloud_clusters, cr_fat, cr_fat_schedule, cw_fat, cw_fat_schedule, zmax, CloudCluster, DATA_FILE,
};
pub use combine::{ccomb_fat, fat_comb_bound, fat_cover, FatComb, FatCombRun};
pub use cover::{default_kappa, sparse_cover, Cluster, Cover};
pub use crate::pipeline::assign_ranges;
pub(crate) use cluster::check_copy;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;
    use crate::model::{build_path_with_cloud, build_uniform_wheel, FatLinksView};
    use crate::operators::{fold, Operator, VectorAdd};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn run(view: &FatLinksView, seed: u64) -> (u64, u64) {
        let op: Operator = Arc::new(VectorAdd::new(view.s() as usize / 8, 256).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<_> = (0..view.n()).map(|_| random_bits(&mut rng, op.bit_width())).collect();
        let want = fold(op.as_ref(), &xs).unwrap();
        let (got, m) = ccomb_fat(view, op, xs).unwrap();
        assert_eq!(got, want);
        (u64::from(m.rounds_elapsed), fat_comb_bound(view))
    }

    #[test]
    fn path_sum() {
        let v = FatLinksView::new(build_path_with_cloud(16, 1, 256), 256).unwrap();
        let (r, b) = run(&v, 1);
        assert!(r <= 8 * b, "{r} > 8 * {b}");
    }

    #[test]
    fn single_node() {
        let v = FatLinksView::new(build_path_with_cloud(1, 4, 1), 16).unwrap();
        let (r, _) = run(&v, 2);
        assert_eq!(r, 4);
    }

    #[test]
    fn ring_sum_and_cast() {
        let w = build_uniform_wheel(12, 4, 64).unwrap();
        let v = FatLinksView::new(w.graph().clone(), 64).unwrap();
        run(&v, 3);
        let x = random_bits(&mut ChaCha8Rng::seed_from_u64(4), 64);
        let (out, _) = ccast_fat(&v, &x).unwrap();
        assert!(out.iter().all(|y| *y == x));
    }
}
