use std::sync::Arc;

use rand::Rng;

use super::MdpPosterior;
use crate::bamdp::{ActionId, FiniteMdp, MdpBuilder, RewardBounds, StateId};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// One-step gamble between a risky `A1` and a safe `A2`, optionally repeated
/// around a cycle of `n + 1` independent instances.
///
/// In case 1 (probability `p`) `A1` pays `c1 < 0`; in case 2 it pays 1. `A2`
/// always pays 0. With `n = 0` the episode ends after the single decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffDomain {
    pub p: f64,
    pub c1: f64,
    pub n: usize,
}

impl PayoffDomain {
    pub const A1: ActionId = ActionId(0);
    pub const A2: ActionId = ActionId(1);

    pub fn new(p: f64, c1: f64, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!("p = {p} outside [0,1]")));
        }
        if !(c1 < 0.0 && c1.is_finite()) {
            return Err(Error::InvalidInput(format!("c1 = {c1} must be negative")));
        }
        Ok(Self { p, c1, n })
    }

    /// Number of decision states.
    pub fn instances(&self) -> usize {
        self.n + 1
    }

    pub fn n_states(&self) -> usize {
        if self.n == 0 {
            2
        } else {
            self.n + 1
        }
    }

    pub fn start_state(&self) -> StateId {
        StateId(0)
    }

    pub fn bounds(&self) -> RewardBounds {
        RewardBounds {
            min: self.c1,
            max: 1.0,
        }
    }

    fn next(&self, s: usize) -> usize {
        if self.n == 0 {
            1
        } else {
            (s + 1) % (self.n + 1)
        }
    }

    /// World with `cases[i] == true` meaning instance `i` is case 1.
    pub fn world(&self, cases: &[bool]) -> Result<FiniteMdp> {
        if cases.len() != self.instances() {
            return Err(Error::InvalidInput(format!(
                "{} cases for {} instances",
                cases.len(),
                self.instances()
            )));
        }
        let mut b = MdpBuilder::new(self.n_states());
        for (s, &bad) in cases.iter().enumerate() {
            let r = if bad { self.c1 } else { 1.0 };
            b = b
                .deterministic(s, Self::A1.0, self.next(s), r)
                .deterministic(s, Self::A2.0, self.next(s), 0.0);
        }
        b.build()
    }

    pub fn sample_cases<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        (0..self.instances())
            .map(|_| rng.gen::<f64>() < self.p)
            .collect()
    }

    pub fn prior(&self) -> PayoffPosterior {
        PayoffPosterior {
            domain: *self,
            known: vec![None; self.instances()],
        }
    }
}

/// Independent per-instance posterior; an `A1` reward reveals the case.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffPosterior {
    domain: PayoffDomain,
    known: Vec<Option<bool>>,
}

impl PayoffPosterior {
    pub fn known(&self) -> &[Option<bool>] {
        &self.known
    }
}

impl MdpPosterior for PayoffPosterior {
    fn sample(&self, rng: &mut SimRng) -> Arc<FiniteMdp> {
        let cases: Vec<bool> = self
            .known
            .iter()
            .map(|k| k.unwrap_or_else(|| rng.gen::<f64>() < self.domain.p))
            .collect();
        Arc::new(self.domain.world(&cases).expect("layout matches"))
    }

    fn observe(&mut self, s: StateId, a: ActionId, _next: StateId, reward: f64) -> Result<()> {
        if a != PayoffDomain::A1 || s.0 >= self.known.len() {
            return Ok(());
        }
        let bad = if reward == self.domain.c1 {
            true
        } else if reward == 1.0 {
            false
        } else {
            return Err(Error::ImpossibleObservation);
        };
        match self.known[s.0] {
            Some(k) if k != bad => Err(Error::ImpossibleObservation),
            _ => {
                self.known[s.0] = Some(bad);
                Ok(())
            }
        }
    }
}
