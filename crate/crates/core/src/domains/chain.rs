use std::sync::Arc;

use crate::bamdp::{ActionId, DiscreteBelief, FiniteMdp, MdpBuilder, RewardBounds, StateId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainStart {
    /// Position `x`, equidistant from both ends.
    Middle,
    /// Position 1, next to the left end.
    SecondFromLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainEnd {
    Left,
    Right,
}

/// Chain of positions `0..=2x` with the reward at one unknown end.
///
/// Interior positions have `LEFT` and `RIGHT`. Each end is entered either in
/// its rewarding variant, whose only action `COLLECT` pays 1 and ends the
/// episode, or in its empty variant, whose only action leads back inward.
/// Arriving at an end therefore reveals which world is true.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainDomain {
    pub x: usize,
    pub start: ChainStart,
}

impl ChainDomain {
    pub const LEFT: ActionId = ActionId(0);
    pub const RIGHT: ActionId = ActionId(1);
    pub const COLLECT: ActionId = ActionId(2);

    pub fn new(x: usize, start: ChainStart) -> Result<Self> {
        if x == 0 {
            return Err(Error::InvalidInput(
                "chain half-length must be at least 1".into(),
            ));
        }
        Ok(Self { x, start })
    }

    pub fn n_states(&self) -> usize {
        2 * self.x + 4
    }

    fn interior(&self, pos: usize) -> usize {
        pos - 1
    }

    pub fn treasure(&self, end: ChainEnd) -> StateId {
        StateId(match end {
            ChainEnd::Left => 2 * self.x - 1,
            ChainEnd::Right => 2 * self.x + 1,
        })
    }

    pub fn empty(&self, end: ChainEnd) -> StateId {
        StateId(match end {
            ChainEnd::Left => 2 * self.x,
            ChainEnd::Right => 2 * self.x + 2,
        })
    }

    pub fn done(&self) -> StateId {
        StateId(2 * self.x + 3)
    }

    /// Position along the chain, `None` for the absorbing state.
    pub fn position(&self, s: StateId) -> Option<usize> {
        let x = self.x;
        match s.0 {
            i if i < 2 * x - 1 => Some(i + 1),
            i if i == 2 * x - 1 || i == 2 * x => Some(0),
            i if i == 2 * x + 1 || i == 2 * x + 2 => Some(2 * x),
            _ => None,
        }
    }

    pub fn is_end(&self, s: StateId) -> bool {
        matches!(self.position(s), Some(p) if p == 0 || p == 2 * self.x)
    }

    /// State entered at position `pos` in world `end`.
    pub fn state_at(&self, pos: usize, end: ChainEnd) -> StateId {
        match pos {
            0 if end == ChainEnd::Left => self.treasure(ChainEnd::Left),
            0 => self.empty(ChainEnd::Left),
            p if p == 2 * self.x && end == ChainEnd::Right => self.treasure(ChainEnd::Right),
            p if p == 2 * self.x => self.empty(ChainEnd::Right),
            p => StateId(self.interior(p)),
        }
    }

    pub fn start_state(&self) -> StateId {
        let pos = match self.start {
            ChainStart::Middle => self.x,
            ChainStart::SecondFromLeft => 1,
        };
        StateId(self.interior(pos))
    }

    pub fn bounds(&self) -> RewardBounds {
        RewardBounds { min: 0.0, max: 1.0 }
    }

    pub fn world(&self, end: ChainEnd) -> FiniteMdp {
        let x = self.x;
        let mut b = MdpBuilder::new(self.n_states());
        for pos in 1..2 * x {
            let s = self.interior(pos);
            b = b
                .deterministic(s, Self::LEFT.0, self.state_at(pos - 1, end).0, 0.0)
                .deterministic(s, Self::RIGHT.0, self.state_at(pos + 1, end).0, 0.0);
        }
        let done = self.done().0;
        b.deterministic(self.treasure(ChainEnd::Left).0, Self::COLLECT.0, done, 1.0)
            .deterministic(self.treasure(ChainEnd::Right).0, Self::COLLECT.0, done, 1.0)
            .deterministic(
                self.empty(ChainEnd::Left).0,
                Self::RIGHT.0,
                self.state_at(1, end).0,
                0.0,
            )
            .deterministic(
                self.empty(ChainEnd::Right).0,
                Self::LEFT.0,
                self.state_at(2 * x - 1, end).0,
                0.0,
            )
            .build()
            .expect("chain construction is well formed")
    }

    /// Equal prior mass on both ends, left world first.
    pub fn prior(&self) -> DiscreteBelief {
        DiscreteBelief::uniform(vec![
            Arc::new(self.world(ChainEnd::Left)),
            Arc::new(self.world(ChainEnd::Right)),
        ])
        .expect("two worlds")
    }
}
