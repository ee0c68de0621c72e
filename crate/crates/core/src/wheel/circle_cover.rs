use serde::Serialize;

use crate::error::{Error, Result};

/// A clockwise arc of the ring: `len` nodes starting at `start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Arc {
    pub start: usize,
    pub len: usize,
}

impl Arc {
    pub fn contains(&self, n: usize, v: usize) -> bool {
        (v + n - self.start) % n < self.len
    }

    pub fn nodes(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |j| (self.start + j) % n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntervalCover {
    pub arcs: Vec<Arc>,
    pub loads: Vec<usize>,
}

impl IntervalCover {
    pub fn load(&self) -> usize {
        self.loads.iter().copied().max().unwrap_or(0)
    }
}

/// Per-node number of covering arcs.
pub fn loads(n: usize, arcs: &[Arc]) -> Vec<usize> {
    let mut l = vec![0; n];
    for a in arcs {
        for v in a.nodes(n) {
            l[v] += 1;
        }
    }
    l
}

/// Greedy cover of the ring once `first` is chosen: repeatedly take the arc
/// starting inside the covered stretch that reaches farthest.
fn greedy_from(n: usize, arcs: &[Arc], first: Arc) -> Option<Vec<Arc>> {
    let pos = |v: usize| (v + n - first.start) % n;
    let mut chosen = vec![first];
    let mut covered = first.len;
    while covered < n {
        let best = arcs
            .iter()
            .filter(|a| pos(a.start) <= covered)
            .max_by_key(|a| (pos(a.start) + a.len, std::cmp::Reverse(**a)))?;
        let reach = pos(best.start) + best.len;
        if reach <= covered {
            return None;
        }
        covered = reach;
        chosen.push(*best);
    }
    Some(chosen)
}

/// A minimum-cardinality subfamily of `arcs` covering all `n` nodes.
///
/// Every arc is tried as the first one and the rest is chosen greedily; the
/// smallest result wins, earliest first arc on ties.
pub fn min_circle_cover(n: usize, arcs: &[Arc]) -> Result<IntervalCover> {
    let mut arcs: Vec<Arc> = arcs.iter().filter(|a| a.len > 0).map(|a| Arc { start: a.start % n, len: a.len.min(n) }).collect();
    arcs.sort();
    arcs.dedup();
    if loads(n, &arcs).contains(&0) {
        return Err(Error::InvalidGraph("intervals do not cover the ring".into()));
    }
    let best = arcs
        .iter()
        .filter_map(|&a| greedy_from(n, &arcs, a))
        .min_by_key(|c| c.len())
        .ok_or_else(|| Error::InvalidGraph("no circle cover found".into()))?;
    let mut best = best;
    best.sort();
    Ok(IntervalCover {
        loads: loads(n, &best),
        arcs: best,
    })
}

/// Cuts arcs at the ring seam between `n - 1` and `0`, so every piece is a
/// plain index range `[first, last]`. Pieces are sorted by first node.
pub fn linearize(n: usize, arcs: &[Arc]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in arcs {
        let last = a.start + a.len - 1;
        if last >= n {
            out.push((a.start, n - 1));
            out.push((0, last - n));
        } else {
            out.push((a.start, last));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// The part of each piece not covered by an earlier one: node ranges that
/// partition `0..n`, one per piece, possibly empty (`None`).
pub fn segments(pieces: &[(usize, usize)]) -> Vec<Option<(usize, usize)>> {
    let mut next = 0;
    pieces
        .iter()
        .map(|&(a, b)| {
            let lo = a.max(next);
            if lo > b {
                None
            } else {
                next = b + 1;
                Some((lo, b))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(start: usize, len: usize) -> Arc {
        Arc { start, len }
    }

    /// Smallest covering subfamily by exhaustive search.
    fn brute(n: usize, arcs: &[Arc]) -> usize {
        (1u32..1 << arcs.len())
            .filter(|mask| {
                let pick: Vec<Arc> = (0..arcs.len()).filter(|k| mask >> k & 1 == 1).map(|k| arcs[k]).collect();
                !loads(n, &pick).contains(&0)
            })
            .map(u32::count_ones)
            .min()
            .unwrap() as usize
    }

    #[test]
    fn six_node_example() {
        let arcs = [arc(0, 3), arc(1, 3), arc(2, 4), arc(4, 3)];
        let c = min_circle_cover(6, &arcs).unwrap();
        assert_eq!(c.arcs.len(), brute(6, &arcs));
        assert!(c.load() <= 2);
    }

    #[test]
    fn singletons_and_full_ring() {
        let single: Vec<Arc> = (0..5).map(|i| arc(i, 1)).collect();
        let c = min_circle_cover(5, &single).unwrap();
        assert_eq!((c.arcs.len(), c.load()), (5, 1));
        let c = min_circle_cover(5, &[arc(2, 5), arc(0, 1)]).unwrap();
        assert_eq!(c.arcs, vec![arc(2, 5)]);
    }

    #[test]
    fn gap_rejected() {
        assert!(min_circle_cover(4, &[arc(0, 2), arc(1, 2)]).is_err());
    }

    #[test]
    fn seam_split() {
        let pieces = linearize(6, &[arc(4, 4), arc(1, 3)]);
        assert_eq!(pieces, vec![(0, 1), (1, 3), (4, 5)]);
        assert_eq!(segments(&pieces), vec![Some((0, 1)), Some((2, 3)), Some((4, 5))]);
        assert_eq!(segments(&[(0, 5), (3, 5)]), vec![Some((0, 5)), None]);
    }
}
