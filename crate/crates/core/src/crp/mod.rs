//! Dirichlet-process mixture over categorical subtask vectors: collapsed
//! Gibbs inference, concentration updates, forward sampling of future
//! subtasks and a memoised pool of posterior snapshots.

mod alpha;
mod exact;
mod io;
mod pool;
mod sample;
mod state;

pub use alpha::{mixing_odds, sample_alpha};
pub use exact::{
    exact_partition_posterior, gibbs_partition_frequencies, partition_key, total_variation,
    PartitionDist, MAX_EXACT,
};
pub use io::{read_snapshot, write_snapshot, SNAPSHOT_VERSION};
pub use pool::{PoolConfig, PooledSampler, SamplePool};
pub use sample::{forward_sample, DynamicsSample, RealizedSubtask};
pub use state::{gibbs_sweep, ClusterTable, CrpPosterior, CrpPosteriorState, PosteriorSnapshot};

use crate::error::{Error, Result};

/// Marker for an outcome dimension that has not been revealed.
pub const UNOBSERVED: u8 = u8::MAX;

/// Treatment of the concentration parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode {
    Fixed(f64),
    /// Gamma(shape, rate) hyperprior, resampled once per sweep.
    Hyper {
        shape: f64,
        rate: f64,
    },
}

impl AlphaMode {
    pub fn default_hyper() -> Self {
        AlphaMode::Hyper {
            shape: 0.5,
            rate: 0.5,
        }
    }

    /// Starting value of the chain: the fixed value or the prior mean.
    pub fn initial(&self) -> f64 {
        match *self {
            AlphaMode::Fixed(a) => a,
            AlphaMode::Hyper { shape, rate } => shape / rate,
        }
    }
}

/// Shape of the subtask vectors: `n_context` always-observed dimensions
/// followed by outcome dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    arities: Vec<usize>,
    offsets: Vec<usize>,
    n_context: usize,
    beta: f64,
    alpha: AlphaMode,
}

impl ModelSpec {
    pub fn new(arities: Vec<usize>, n_context: usize, beta: f64, alpha: AlphaMode) -> Result<Self> {
        if arities.is_empty() || n_context > arities.len() {
            return Err(Error::InvalidInput(format!(
                "{n_context} context dims of {} total",
                arities.len()
            )));
        }
        if let Some(d) = arities.iter().find(|&&d| d < 2 || d >= UNOBSERVED as usize) {
            return Err(Error::InvalidInput(format!(
                "category count {d} outside [2, 254]"
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta {beta} must be positive")));
        }
        match alpha {
            AlphaMode::Fixed(a) if !(a > 0.0 && a.is_finite()) => {
                return Err(Error::InvalidInput(format!("alpha {a} must be positive")))
            }
            AlphaMode::Hyper { shape, rate } if !(shape > 0.0 && rate > 0.0) => {
                return Err(Error::InvalidInput(format!(
                    "hyperprior Gamma({shape}, {rate}) needs positive parameters"
                )))
            }
            _ => {}
        }
        let mut offsets = Vec::with_capacity(arities.len() + 1);
        let mut acc = 0;
        for &d in &arities {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        Ok(Self {
            arities,
            offsets,
            n_context,
            beta,
            alpha,
        })
    }

    /// `n_context` dims of `context_arity` categories and `n_outcome` of `outcome_arity`.
    pub fn uniform(
        n_context: usize,
        context_arity: usize,
        n_outcome: usize,
        outcome_arity: usize,
        alpha: AlphaMode,
    ) -> Result<Self> {
        let mut arities = vec![context_arity; n_context];
        arities.extend(std::iter::repeat_n(outcome_arity, n_outcome));
        Self::new(arities, n_context, 1.0, alpha)
    }

    pub fn n_dims(&self) -> usize {
        self.arities.len()
    }

    pub fn n_context(&self) -> usize {
        self.n_context
    }

    pub fn n_outcomes(&self) -> usize {
        self.arities.len() - self.n_context
    }

    pub fn arity(&self, dim: usize) -> usize {
        self.arities[dim]
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    /// Start of dimension `dim` in a flattened count table.
    pub fn offset(&self, dim: usize) -> usize {
        self.offsets[dim]
    }

    /// Length of a flattened count table.
    pub fn table_len(&self) -> usize {
        self.offsets[self.arities.len()]
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha_mode(&self) -> AlphaMode {
        self.alpha
    }

    pub fn with_alpha(&self, alpha: AlphaMode) -> Result<Self> {
        Self::new(self.arities.clone(), self.n_context, self.beta, alpha)
    }

    fn bits(d: usize) -> u32 {
        usize::BITS - (d - 1).leading_zeros()
    }

    /// Bits needed to pack one context vector.
    pub fn context_bits(&self) -> u32 {
        self.arities[..self.n_context]
            .iter()
            .map(|&d| Self::bits(d))
            .sum()
    }

    /// Packs a context vector into an integer key. Requires `context_bits() <= 128`.
    pub fn pack_context(&self, ctx: impl IntoIterator<Item = u8>) -> u128 {
        let mut key = 0u128;
        for (i, v) in ctx.into_iter().take(self.n_context).enumerate() {
            key = (key << Self::bits(self.arities[i])) | v as u128;
        }
        key
    }
}

/// One subtask as seen by the agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubtaskObservation {
    values: Vec<u8>,
}

impl SubtaskObservation {
    pub fn new(spec: &ModelSpec, values: &[Option<u8>]) -> Result<Self> {
        if values.len() != spec.n_dims() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} dims",
                values.len(),
                spec.n_dims()
            )));
        }
        let mut out = Vec::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            match *v {
                None if i < spec.n_context() => {
                    return Err(Error::InvalidInput(format!(
                        "context dim {i} is unobserved"
                    )))
                }
                None => out.push(UNOBSERVED),
                Some(x) if (x as usize) < spec.arity(i) => out.push(x),
                Some(x) => {
                    return Err(Error::InvalidInput(format!(
                        "value {x} outside [0, {}) in dim {i}",
                        spec.arity(i)
                    )))
                }
            }
        }
        Ok(Self { values: out })
    }

    /// Context observed, every outcome unobserved.
    pub fn from_context(spec: &ModelSpec, context: &[u8]) -> Result<Self> {
        let mut v: Vec<Option<u8>> = context.iter().map(|&c| Some(c)).collect();
        v.resize(spec.n_dims(), None);
        Self::new(spec, &v)
    }

    /// All dimensions observed.
    pub fn full(spec: &ModelSpec, values: &[u8]) -> Result<Self> {
        let v: Vec<Option<u8>> = values.iter().map(|&c| Some(c)).collect();
        Self::new(spec, &v)
    }

    pub fn get(&self, dim: usize) -> Option<u8> {
        match self.values[dim] {
            UNOBSERVED => None,
            v => Some(v),
        }
    }

    pub fn raw(&self) -> &[u8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn set(&mut self, dim: usize, v: u8) {
        self.values[dim] = v;
    }

    pub fn observed(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != UNOBSERVED)
            .map(|(i, &v)| (i, v))
    }
}

/// Seating probabilities of the next customer: one entry per existing
/// cluster followed by the new-cluster entry.
pub fn crp_assign_probs(sizes: &[usize], alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!(
            "alpha {alpha} must be positive"
        )));
    }
    let total = sizes.iter().sum::<usize>() as f64 + alpha;
    let mut p: Vec<f64> = sizes.iter().map(|&n| n as f64 / total).collect();
    p.push(alpha / total);
    Ok(p)
}

/// Dirichlet-categorical predictive `(c_v + beta/D) / (n + beta)` where
/// `counts` is one dimension's table and `observed` its number of observations.
pub fn predictive_prob(counts: &[u32], observed: u32, v: usize, beta: f64) -> f64 {
    let d = counts.len() as f64;
    (counts[v] as f64 + beta / d) / (observed as f64 + beta)
}
