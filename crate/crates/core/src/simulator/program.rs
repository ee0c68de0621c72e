use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use crate::bits::Bits;
use crate::error::Result;
use crate::flowcore::{Op, Schedule};

/// An operand of a local combine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Unit,
    File(String),
}

impl Source {
    pub fn file(name: impl Into<String>) -> Self {
        Source::File(name.into())
    }
}

/// Local computation as a function of whole input files.
pub type LocalFn = Arc<dyn Fn(&[Bits]) -> Result<Bits> + Send + Sync>;

/// Something a node does in a round. Local actions run before the round's
/// communication and see everything delivered up to the start of the round.
#[derive(Clone)]
pub enum Action {
    Op(Op),
    /// `out = left ⊗ right` with the engine's operator, optionally only on
    /// the grain range `grains`.
    Combine {
        node: usize,
        left: Source,
        right: Source,
        out: String,
        grains: Option<Range<usize>>,
    },
    /// Arbitrary local computation.
    Local {
        node: usize,
        inputs: Vec<String>,
        out: String,
        label: &'static str,
        f: LocalFn,
    },
}

impl Action {
    /// The processing node performing the action.
    pub fn actor(&self) -> usize {
        match self {
            Action::Op(op) => op.actor(),
            Action::Combine { node, .. } | Action::Local { node, .. } => *node,
        }
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Op(op) => write!(f, "{op:?}"),
            Action::Combine {
                node,
                left,
                right,
                out,
                grains,
            } => write!(f, "Combine(p{node}: {out} = {left:?} * {right:?}, {grains:?})"),
            Action::Local { node, out, label, .. } => write!(f, "Local(p{node}: {out} = {label})"),
        }
    }
}

impl From<Op> for Action {
    fn from(op: Op) -> Self {
        Action::Op(op)
    }
}

/// Actions per round; `rounds[r - 1]` holds round `r`.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub rounds: Vec<Vec<Action>>,
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    pub fn push(&mut self, round: u32, action: impl Into<Action>) {
        assert!(round >= 1, "rounds start at 1");
        if self.rounds.len() < round as usize {
            self.rounds.resize(round as usize, Vec::new());
        }
        self.rounds[round as usize - 1].push(action.into());
    }

    /// Last round with an action.
    pub fn horizon(&self) -> u32 {
        self.rounds
            .iter()
            .rposition(|r| !r.is_empty())
            .map_or(0, |k| k as u32 + 1)
    }

    /// Rounds until the last transfer lands.
    pub fn completion(&self) -> u32 {
        let h = self.horizon();
        if h == 0 {
            return 0;
        }
        let lands_later = self.rounds[h as usize - 1]
            .iter()
            .any(|a| matches!(a, Action::Op(Op::Send { .. } | Op::Read { .. })));
        h + u32::from(lands_later)
    }

    /// Adds every action of `other`, shifted by `offset` rounds.
    pub fn merge_at(&mut self, offset: u32, other: &Program) {
        for (k, actions) in other.rounds.iter().enumerate() {
            for a in actions {
                self.push(offset + k as u32 + 1, a.clone());
            }
        }
    }

    /// Appends `other` so that its first round follows this program's
    /// completion, and returns the offset used.
    pub fn then(&mut self, other: &Program) -> u32 {
        let offset = self.sequel_offset();
        self.merge_at(offset, other);
        offset
    }

    /// Offset at which a following phase may start: its first round sees
    /// everything this program delivered.
    pub fn sequel_offset(&self) -> u32 {
        self.horizon()
    }

    pub fn schedule_at(&mut self, offset: u32, schedule: &Schedule) {
        for (r, op) in schedule.ops() {
            self.push(offset + r, op.clone());
        }
    }

    pub fn actions(&self) -> impl Iterator<Item = (u32, &Action)> {
        self.rounds
            .iter()
            .enumerate()
            .flat_map(|(k, a)| a.iter().map(move |x| (k as u32 + 1, x)))
    }
}

impl From<&Schedule> for Program {
    fn from(s: &Schedule) -> Self {
        let mut p = Program::new();
        p.schedule_at(0, s);
        p
    }
}
