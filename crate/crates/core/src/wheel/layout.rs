use std::collections::BTreeSet;

use serde::Serialize;

use super::circle_cover::{linearize, min_circle_cover, segments, Arc, IntervalCover};
use super::intervals::cloud_intervals;
use crate::error::Result;
use crate::model::WheelView;
use crate::pipeline::Group;

/// How combining is laid out on a wheel: a minimum cover by cloud intervals,
/// cut at the seam so that node order matches operand order, and the
/// segment of inputs each piece is responsible for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Layout {
    pub cover: IntervalCover,
    /// Cover arcs as index ranges `[first, last]`, sorted.
    pub pieces: Vec<(usize, usize)>,
    /// Inputs handled by each piece; overlaps go to the earlier piece.
    pub segments: Vec<Option<(usize, usize)>>,
    /// Pieces with a non-empty segment, in order; these are the leaves of
    /// the computation tree.
    pub leaves: Vec<usize>,
}

impl Layout {
    pub fn new(view: &WheelView, s: u64) -> Result<Self> {
        let n = view.n();
        let arcs: Vec<Arc> = cloud_intervals(view, s)
            .into_iter()
            .flat_map(|(a, b)| [a.arc(n), b.arc(n)])
            .map(|(start, len)| Arc { start, len })
            .collect();
        let cover = min_circle_cover(n, &arcs)?;
        let pieces = linearize(n, &cover.arcs);
        let segments = segments(&pieces);
        let leaves = (0..pieces.len()).filter(|&p| segments[p].is_some()).collect();
        Ok(Layout {
            cover,
            pieces,
            segments,
            leaves,
        })
    }

    pub fn members(&self, piece: usize) -> BTreeSet<usize> {
        let (a, b) = self.pieces[piece];
        (a..=b).collect()
    }

    /// Pieces as groups led by their last node.
    pub fn groups(&self) -> Vec<Group> {
        (0..self.pieces.len())
            .map(|p| Group {
                members: self.members(p),
                leader: self.pieces[p].1,
            })
            .collect()
    }
}
