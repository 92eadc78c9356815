use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::bamdp::{ActionId, BetaBernoulliModel};
use crate::error::{Error, Result};
use crate::planners::{SimStep, Simulator};
use crate::rng::SimRng;

/// Multi-armed Bernoulli bandit with independent Beta priors, used to check
/// tree search against exact Bayes-adaptive values.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliBandit {
    /// `(successes, failures)` observed per arm.
    pub counts: Vec<(u32, u32)>,
    pub prior_a: f64,
    pub prior_b: f64,
}

impl BernoulliBandit {
    pub fn uniform(arms: usize) -> Result<Self> {
        if arms == 0 {
            return Err(Error::InvalidInput("bandit needs at least one arm".into()));
        }
        Ok(Self {
            counts: vec![(0, 0); arms],
            prior_a: 1.0,
            prior_b: 1.0,
        })
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    /// The matching exact model.
    pub fn exact_model(&self) -> BetaBernoulliModel {
        BetaBernoulliModel {
            arms: self.arms(),
            prior_a: self.prior_a,
            prior_b: self.prior_b,
        }
    }

    /// Success probabilities drawn from the current posterior.
    pub fn sample_world<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        self.counts
            .iter()
            .map(|&(s, f)| {
                Beta::new(self.prior_a + s as f64, self.prior_b + f as f64)
                    .map(|b| b.sample(rng))
                    .map_err(|e| Error::InvalidInput(format!("beta posterior: {e}")))
            })
            .collect()
    }
}

/// Stateless simulator: the history is carried by the search tree.
#[derive(Debug, Clone, Copy)]
pub struct BernoulliSim {
    pub arms: usize,
}

impl Simulator for BernoulliSim {
    type State = ();
    type World = Vec<f64>;

    fn actions(&self, _: &(), out: &mut Vec<ActionId>) {
        out.extend((0..self.arms).map(ActionId));
    }

    fn step(
        &self,
        world: &mut Vec<f64>,
        _: &(),
        a: ActionId,
        rng: &mut SimRng,
    ) -> Result<SimStep<()>> {
        let p = *world
            .get(a.0)
            .ok_or_else(|| Error::Contract(format!("no arm {}", a.0)))?;
        let hit = rng.gen::<f64>() < p;
        Ok(SimStep {
            next: (),
            reward: hit as u8 as f64,
            obs: hit as u128,
        })
    }

    fn rmax(&self) -> f64 {
        1.0
    }
}
