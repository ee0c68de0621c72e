//! Dinic's algorithm on an explicit arc list. Arcs are scanned in insertion
//! order, so results are deterministic.

use std::collections::VecDeque;

pub const INF: u64 = u64::MAX / 4;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    cap: u64,
}

#[derive(Clone, Debug)]
pub struct MaxFlow {
    adj: Vec<Vec<usize>>,
    arcs: Vec<Arc>,
    original: Vec<u64>,
}

impl MaxFlow {
    pub fn new(n: usize) -> Self {
        MaxFlow {
            adj: vec![Vec::new(); n],
            arcs: Vec::new(),
            original: Vec::new(),
        }
    }

    /// Adds `u -> v` with capacity `cap` and returns its id.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: u64) -> usize {
        let id = self.arcs.len();
        self.adj[u].push(id);
        self.arcs.push(Arc { to: v, cap });
        self.adj[v].push(id + 1);
        self.arcs.push(Arc { to: u, cap: 0 });
        self.original.push(cap);
        self.original.push(0);
        id
    }

    /// Flow currently routed on arc `id`.
    pub fn flow(&self, id: usize) -> u64 {
        self.original[id] - self.arcs[id].cap
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<u32>> {
        let mut level = vec![u32::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &id in &self.adj[u] {
                let a = &self.arcs[id];
                if a.cap > 0 && level[a.to] == u32::MAX {
                    level[a.to] = level[u] + 1;
                    queue.push_back(a.to);
                }
            }
        }
        (level[t] != u32::MAX).then_some(level)
    }

    fn augment(&mut self, u: usize, t: usize, pushed: u64, level: &[u32], next: &mut [usize]) -> u64 {
        if u == t {
            return pushed;
        }
        while next[u] < self.adj[u].len() {
            let id = self.adj[u][next[u]];
            let (to, cap) = (self.arcs[id].to, self.arcs[id].cap);
            if cap > 0 && level[to] == level[u] + 1 {
                let got = self.augment(to, t, pushed.min(cap), level, next);
                if got > 0 {
                    self.arcs[id].cap -= got;
                    self.arcs[id ^ 1].cap += got;
                    return got;
                }
            }
            next[u] += 1;
        }
        0
    }

    /// Maximum `s`-`t` flow value.
    pub fn run(&mut self, s: usize, t: usize) -> u64 {
        let mut total = 0;
        while let Some(level) = self.levels(s, t) {
            let mut next = vec![0; self.adj.len()];
            loop {
                let got = self.augment(s, t, INF, &level, &mut next);
                if got == 0 {
                    break;
                }
                total += got;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diamond() {
        let mut g = MaxFlow::new(4);
        let a = g.add_arc(0, 1, 3);
        g.add_arc(0, 2, 2);
        g.add_arc(1, 2, 5);
        g.add_arc(1, 3, 2);
        g.add_arc(2, 3, 3);
        assert_eq!(g.run(0, 3), 5);
        assert_eq!(g.flow(a), 3);
    }

    #[test]
    fn disconnected_is_zero() {
        let mut g = MaxFlow::new(3);
        g.add_arc(0, 1, 4);
        assert_eq!(g.run(0, 2), 0);
    }
}
