use std::sync::Arc;

use rand::Rng;

use super::{ActionId, FiniteMdp, StateId};
use crate::error::{Error, Result};

/// Posterior over a finite set of fully specified worlds.
#[derive(Debug, Clone)]
pub struct DiscreteBelief {
    support: Vec<Arc<FiniteMdp>>,
    weights: Vec<f64>,
}

impl DiscreteBelief {
    pub fn new(support: Vec<Arc<FiniteMdp>>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "belief needs matching non-empty support ({}) and weights ({})",
                support.len(),
                weights.len()
            )));
        }
        let weights = normalize(&weights)?;
        Ok(Self { support, weights })
    }

    pub fn uniform(support: Vec<Arc<FiniteMdp>>) -> Result<Self> {
        let n = support.len();
        Self::new(support, vec![1.0; n])
    }

    /// Point mass on a single world.
    pub fn degenerate(mdp: Arc<FiniteMdp>) -> Self {
        Self {
            support: vec![mdp],
            weights: vec![1.0],
        }
    }

    pub fn support(&self) -> &[Arc<FiniteMdp>] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.support.clone(), weights)
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        // rounding: fall back to the last positive weight
        self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Arc<FiniteMdp> {
        Arc::clone(&self.support[self.sample_index(rng)])
    }

    /// Likelihood of `(s, a) -> (s', r)` under each support world.
    pub fn likelihoods(&self, s: StateId, a: ActionId, next: StateId, reward: f64) -> Vec<f64> {
        self.support
            .iter()
            .map(|m| m.likelihood(s, a, next, reward))
            .collect()
    }

    /// Bayes update after observing one transition.
    pub fn observe(&self, s: StateId, a: ActionId, next: StateId, reward: f64) -> Result<Self> {
        belief_update(self, &self.likelihoods(s, a, next, reward))
    }
}

fn normalize(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidInput(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ImpossibleObservation);
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// `posterior[i] ∝ prior[i] * likelihoods[i]`.
pub fn belief_update(prior: &DiscreteBelief, likelihoods: &[f64]) -> Result<DiscreteBelief> {
    if likelihoods.len() != prior.len() {
        return Err(Error::InvalidInput(format!(
            "{} likelihoods for a support of {}",
            likelihoods.len(),
            prior.len()
        )));
    }
    if likelihoods.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::InvalidInput(
            "likelihoods must be finite and nonnegative".into(),
        ));
    }
    let joint: Vec<f64> = prior
        .weights
        .iter()
        .zip(likelihoods)
        .map(|(w, l)| w * l)
        .collect();
    let weights = normalize(&joint)?;
    Ok(DiscreteBelief {
        support: prior.support.clone(),
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bamdp::MdpBuilder;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pair() -> DiscreteBelief {
        let m = Arc::new(MdpBuilder::new(1).build().unwrap());
        DiscreteBelief::uniform(vec![m.clone(), m]).unwrap()
    }

    #[test]
    fn deterministic_exclusion() {
        let b = belief_update(&pair(), &[1.0, 0.0]).unwrap();
        assert_eq!(b.weights(), &[1.0, 0.0]);
    }

    #[test]
    fn uninformative_likelihood() {
        let b = belief_update(&pair(), &[1.0, 1.0]).unwrap();
        assert_eq!(b.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn hand_bayes_rule() {
        let b = belief_update(&pair(), &[0.5, 0.25]).unwrap();
        assert_abs_diff_eq!(b.weights()[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.weights()[1], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn all_zero_is_impossible() {
        assert!(matches!(
            belief_update(&pair(), &[0.0, 0.0]),
            Err(Error::ImpossibleObservation)
        ));
    }

    proptest! {
        #[test]
        fn rescaling_invariance(
            l0 in 0.0f64..5.0,
            l1 in 0.01f64..5.0,
            scale in 0.001f64..1000.0,
        ) {
            let a = belief_update(&pair(), &[l0, l1]).unwrap();
            let b = belief_update(&pair(), &[l0 * scale, l1 * scale]).unwrap();
            prop_assert!((a.weights()[0] - b.weights()[0]).abs() < 1e-12);
            let total: f64 = b.weights().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
