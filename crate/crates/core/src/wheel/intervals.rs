use serde::Serialize;

use crate::bits::ceil_div;
use crate::model::WheelView;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Clockwise,
    Counterclockwise,
}

/// The cloud interval of a node in one direction: the nodes reached before
/// either the interval's cloud bandwidth suffices for `s` bits or the next
/// ring link becomes narrower than that bandwidth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CloudInterval {
    pub start: usize,
    pub direction: Direction,
    pub kc: usize,
    pub kl: usize,
    pub k: usize,
    /// Members from `start` outward.
    pub nodes: Vec<usize>,
    /// `bc(I)`.
    pub bandwidth: u64,
    /// Narrowest ring link inside the interval; `None` for a single node.
    pub phi: Option<u64>,
    /// `Z = |I| + ⌈s/φ⌉ + ⌈s/bc(I)⌉`.
    pub timespan: u64,
}

impl CloudInterval {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The interval as a clockwise arc `(first node, length)`.
    pub fn arc(&self, n: usize) -> (usize, usize) {
        match self.direction {
            Direction::Clockwise => (self.start, self.len()),
            Direction::Counterclockwise => ((self.start + n + 1 - self.len()) % n, self.len()),
        }
    }
}

fn ceil_over(s: u64, w: Option<u64>) -> u64 {
    w.map_or(0, |w| ceil_div(s, w))
}

/// Node `j` steps from `i`, and the ring link from step `j` to `j + 1`.
fn walk(view: &WheelView, i: usize, dir: Direction) -> (impl Fn(usize) -> usize + '_, impl Fn(usize) -> u64 + '_) {
    let n = view.n();
    let node = move |j: usize| match dir {
        Direction::Clockwise => (i + j) % n,
        Direction::Counterclockwise => (i + n - j % n) % n,
    };
    let link = move |j: usize| match dir {
        Direction::Clockwise => view.ring((i + j) % n),
        Direction::Counterclockwise => view.ring((i + 2 * n - j % n - 1) % n),
    };
    (node, link)
}

pub fn cloud_interval(view: &WheelView, s: u64, i: usize, dir: Direction) -> CloudInterval {
    let n = view.n();
    let (node, link) = walk(view, i, dir);
    let prefix: Vec<u64> = (0..n)
        .scan(0u64, |acc, j| {
            *acc += view.bc(node(j));
            Some(*acc)
        })
        .collect();
    let kc = (0..n).find(|&k| (k as u64 + 1) * prefix[k] >= s).unwrap_or(n);
    let kl = (0..n).find(|&k| link(k) < prefix[k]).unwrap_or(n);
    let k = kc.min(kl);
    let size = (k + 1).min(n);
    let nodes: Vec<usize> = (0..size).map(&node).collect();
    let phi = (0..size - 1).map(&link).min();
    let bandwidth = prefix[size - 1];
    CloudInterval {
        start: i,
        direction: dir,
        kc,
        kl,
        k,
        timespan: size as u64 + ceil_over(s, phi) + ceil_div(s, bandwidth),
        nodes,
        bandwidth,
        phi,
    }
}

/// Clockwise and counterclockwise intervals of every node.
pub fn cloud_intervals(view: &WheelView, s: u64) -> Vec<(CloudInterval, CloudInterval)> {
    (0..view.n())
        .map(|i| {
            (
                cloud_interval(view, s, i, Direction::Clockwise),
                cloud_interval(view, s, i, Direction::Counterclockwise),
            )
        })
        .collect()
}

/// The interval a write from `i` uses: the direction with the smaller
/// timespan, clockwise on ties.
pub fn best_interval(view: &WheelView, s: u64, i: usize) -> CloudInterval {
    let cw = cloud_interval(view, s, i, Direction::Clockwise);
    let ccw = cloud_interval(view, s, i, Direction::Counterclockwise);
    if ccw.timespan < cw.timespan {
        ccw
    } else {
        cw
    }
}

/// The worst interval parameters over all clockwise intervals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WheelBounds {
    /// Node with the longest interval.
    pub j_max: usize,
    /// Node whose interval has the least cloud bandwidth.
    pub j_c: usize,
    /// Node whose interval has the narrowest ring link.
    pub j_l: usize,
    pub zmax: u64,
}

pub fn wheel_bounds(view: &WheelView, s: u64) -> WheelBounds {
    let all: Vec<CloudInterval> = (0..view.n())
        .map(|i| cloud_interval(view, s, i, Direction::Clockwise))
        .collect();
    let j_max = (0..all.len()).max_by_key(|&i| (all[i].len(), std::cmp::Reverse(i))).unwrap();
    let j_c = (0..all.len()).min_by_key(|&i| (all[i].bandwidth, i)).unwrap();
    // `None` (a single node) is the widest possible.
    let j_l = (0..all.len())
        .min_by_key(|&i| (all[i].phi.is_none(), all[i].phi, i))
        .unwrap();
    WheelBounds {
        j_max,
        j_c,
        j_l,
        zmax: all[j_max].len() as u64 + ceil_over(s, all[j_l].phi) + ceil_div(s, all[j_c].bandwidth),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_uniform_wheel, build_wheel};

    #[test]
    fn uniform_spot_point() {
        let w = build_uniform_wheel(16, 16, 64).unwrap();
        let c = cloud_interval(&w, 256, 0, Direction::Clockwise);
        assert_eq!((c.kc, c.kl, c.k), (3, 4, 3));
        assert_eq!(c.nodes, vec![0, 1, 2, 3]);
        assert_eq!(c.timespan, 12);
        assert_eq!(wheel_bounds(&w, 256).zmax, 12);
    }

    #[test]
    fn narrow_ring_isolates_nodes() {
        let w = build_uniform_wheel(8, 16, 8).unwrap();
        let c = cloud_interval(&w, 256, 3, Direction::Counterclockwise);
        assert_eq!((c.kl, c.len(), c.phi), (0, 1, None));
        assert_eq!(c.timespan, 1 + 16);
        assert_eq!(wheel_bounds(&w, 256).zmax, 17);
    }

    #[test]
    fn rich_node_is_singleton() {
        let w = build_wheel(&[300, 1, 1, 1], &[4, 4, 4, 4]).unwrap();
        let c = cloud_interval(&w, 256, 0, Direction::Clockwise);
        assert_eq!((c.kc, c.len()), (0, 1));
        assert_eq!(c.timespan, 2);
    }

    #[test]
    fn counterclockwise_walks_backwards() {
        let w = build_wheel(&[1, 1, 1, 1, 1], &[1, 2, 3, 4, 5]).unwrap();
        let c = cloud_interval(&w, 4, 1, Direction::Counterclockwise);
        assert_eq!(c.nodes, vec![1, 0]);
        assert_eq!(c.arc(5), (0, 2));
        // The link between 1 and 0 is ring(0).
        assert_eq!(c.phi, Some(1));
    }

    #[test]
    fn predicates_are_minimal() {
        let w = build_wheel(&[3, 1, 4, 1, 5, 9, 2, 6], &[5, 3, 5, 8, 9, 7, 9, 3]).unwrap();
        for (a, b) in cloud_intervals(&w, 40) {
            for c in [a, b] {
                let (node, link) = walk(&w, c.start, c.direction);
                let pre = |k: usize| (0..=k).map(|j| w.bc(node(j))).sum::<u64>();
                if c.kc >= 1 && c.kc < 8 {
                    assert!((c.kc as u64) * pre(c.kc - 1) < 40);
                }
                if c.kl >= 1 && c.kl < 8 {
                    assert!(link(c.kl - 1) >= pre(c.kl - 1));
                }
            }
        }
    }
}
