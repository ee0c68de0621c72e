use std::collections::BTreeMap;
use std::hash::Hasher;
use std::sync::Arc;

use fnv::FnvHasher;

use crate::bits::ceil_log2;
use crate::error::{Error, Result};
use crate::fatlinks::{ccast_fat, ccomb_fat};
use crate::model::FatLinksView;
use crate::operators::{DedupUnion, Operator, Ownership};
use crate::simulator::RoundMetrics;

/// Files held by each node, given by their hashes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DedupConfig {
    pub hash_bits: usize,
    /// Most unique files the system may hold.
    pub capacity: usize,
    pub files: BTreeMap<usize, Vec<u64>>,
}

impl DedupConfig {
    /// `m · (H + ⌈log₂ n⌉)`.
    pub fn width(&self, n: usize) -> u64 {
        (self.capacity * (self.hash_bits + ceil_log2(n as u64) as usize)) as u64
    }
}

/// FNV-1a of the file contents, reduced below the reserved padding hash.
pub fn file_hash(bytes: &[u8], hash_bits: usize) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish() % ((1u64 << hash_bits) - 1)
}

/// What every node learned, plus the cost of the two phases.
#[derive(Clone, Debug)]
pub struct DedupOutcome {
    pub ownership: Ownership,
    /// The map as decoded at each node after the cast.
    pub per_node: Vec<Ownership>,
    pub combine: RoundMetrics,
    pub cast: RoundMetrics,
}

impl DedupOutcome {
    pub fn rounds(&self) -> u32 {
        self.combine.rounds_elapsed + self.cast.rounds_elapsed
    }
}

/// Combines the tagged-hash sets in the cloud, keeping the smallest holder
/// of every hash, then casts the map back to every node.
pub fn dedup(view: &FatLinksView, cfg: &DedupConfig) -> Result<DedupOutcome> {
    let n = view.n();
    if let Some(&i) = cfg.files.keys().find(|&&i| i >= n) {
        return Err(Error::Unsupported(format!("files listed for p{i}, but n = {n}")));
    }
    let op = DedupUnion::new(cfg.hash_bits, n, cfg.capacity)?;
    let inputs = (0..n)
        .map(|i| {
            let own: Ownership = cfg.files.get(&i).into_iter().flatten().map(|&h| (h, i)).collect();
            op.encode(&own)
        })
        .collect::<Result<Vec<_>>>()?;
    // Overflow shows up only once sets merge; check it upfront.
    let all: Ownership = cfg.files.iter().flat_map(|(&i, hs)| hs.iter().map(move |&h| (h, i))).collect();
    op.encode(&all)?;

    let shared: Operator = Arc::new(op.clone());
    let (bits, combine) = ccomb_fat(view, shared, inputs)?;
    let ownership = op.decode(&bits)?;
    let (copies, cast) = ccast_fat(view, &bits)?;
    let per_node = copies.iter().map(|b| op.decode(b)).collect::<Result<Vec<_>>>()?;
    Ok(DedupOutcome {
        ownership,
        per_node,
        combine,
        cast,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_path_with_cloud;

    fn view(n: usize) -> FatLinksView {
        FatLinksView::new(build_path_with_cloud(n, 4, 64), 64).unwrap()
    }

    fn cfg(files: &[(usize, &[u64])]) -> DedupConfig {
        DedupConfig {
            hash_bits: 8,
            capacity: 4,
            files: files.iter().map(|&(i, h)| (i, h.to_vec())).collect(),
        }
    }

    #[test]
    fn smaller_id_wins() {
        let out = dedup(&view(3), &cfg(&[(1, &[10]), (2, &[10, 11])])).unwrap();
        assert_eq!(out.ownership, Ownership::from([(10, 1), (11, 2)]));
        assert!(out.per_node.iter().all(|o| *o == out.ownership));
    }

    #[test]
    fn everyone_holds_the_same_file() {
        let out = dedup(&view(4), &cfg(&[(3, &[7]), (1, &[7]), (2, &[7])])).unwrap();
        assert_eq!(out.ownership, Ownership::from([(7, 1)]));
    }

    #[test]
    fn capacity_overflow() {
        assert!(dedup(&view(2), &cfg(&[(0, &[1, 2, 3]), (1, &[4, 5])])).is_err());
    }

    #[test]
    fn hash_avoids_sentinel() {
        for b in 0..=255u8 {
            assert!(file_hash(&[b], 4) < 15);
        }
    }
}
