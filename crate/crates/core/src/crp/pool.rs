use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;

use super::{CrpPosterior, DynamicsSample, PosteriorSnapshot};
use crate::error::{Error, Result};
use crate::planners::WorldSampler;
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolConfig {
    pub pool_size: usize,
    pub sweeps_between_refresh: usize,
    /// Simulations between refreshes.
    pub refresh_period: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        Self {
            pool_size: 50,
            sweeps_between_refresh: 2,
            refresh_period: 100,
        }
    }
}

impl PoolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pool_size == 0 || self.refresh_period == 0 {
            return Err(Error::InvalidInput(format!(
                "pool size {} and refresh period {} must be positive",
                self.pool_size, self.refresh_period
            )));
        }
        Ok(())
    }
}

/// Fixed-size FIFO of posterior snapshots.
#[derive(Debug, Clone)]
pub struct SamplePool {
    entries: VecDeque<(u64, Arc<PosteriorSnapshot>)>,
    next_id: u64,
}

impl SamplePool {
    /// Takes `pool_size` snapshots of the (already burnt-in) chain,
    /// `sweeps_between_refresh` sweeps apart.
    pub fn fill(post: &mut CrpPosterior, config: &PoolConfig, rng: &mut impl Rng) -> Result<Self> {
        config.validate()?;
        let mut pool = Self {
            entries: VecDeque::with_capacity(config.pool_size),
            next_id: 0,
        };
        for i in 0..config.pool_size {
            if i > 0 {
                post.sweeps(config.sweeps_between_refresh, rng)?;
            }
            pool.push(post.snapshot());
        }
        Ok(pool)
    }

    fn push(&mut self, snap: Arc<PosteriorSnapshot>) {
        self.entries.push_back((self.next_id, snap));
        self.next_id += 1;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Identifiers of the pooled snapshots, oldest first.
    pub fn ids(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn snapshots(&self) -> impl Iterator<Item = &Arc<PosteriorSnapshot>> {
        self.entries.iter().map(|e| &e.1)
    }

    /// A fresh dynamics sample built on a uniformly chosen snapshot.
    pub fn get(&self, rng: &mut impl Rng) -> DynamicsSample {
        let i = rng.gen_range(0..self.entries.len());
        DynamicsSample::new(Arc::clone(&self.entries[i].1))
    }

    /// Advances the chain and replaces the oldest snapshot.
    pub fn refresh(
        &mut self,
        post: &mut CrpPosterior,
        config: &PoolConfig,
        rng: &mut impl Rng,
    ) -> Result<()> {
        post.sweeps(config.sweeps_between_refresh, rng)?;
        self.entries.pop_front();
        self.push(post.snapshot());
        Ok(())
    }
}

/// World sampler for tree search: pooled snapshots, refreshed on schedule.
pub struct PooledSampler<'a> {
    post: &'a mut CrpPosterior,
    inference: &'a mut SimRng,
    pool: SamplePool,
    config: PoolConfig,
    draws: usize,
}

impl<'a> PooledSampler<'a> {
    pub fn new(
        post: &'a mut CrpPosterior,
        config: PoolConfig,
        inference: &'a mut SimRng,
    ) -> Result<Self> {
        let pool = SamplePool::fill(post, &config, inference)?;
        Ok(Self {
            post,
            inference,
            pool,
            config,
            draws: 0,
        })
    }

    pub fn pool(&self) -> &SamplePool {
        &self.pool
    }

    pub fn draws(&self) -> usize {
        self.draws
    }
}

impl WorldSampler<DynamicsSample> for PooledSampler<'_> {
    fn draw(&mut self, rng: &mut SimRng) -> Result<DynamicsSample> {
        if self.draws > 0 && self.draws.is_multiple_of(self.config.refresh_period) {
            self.pool.refresh(self.post, &self.config, self.inference)?;
        }
        self.draws += 1;
        Ok(self.pool.get(rng))
    }
}
