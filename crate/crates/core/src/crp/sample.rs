use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;

use super::{PosteriorSnapshot, UNOBSERVED};
use crate::error::{Error, Result};

/// A realized subtask of a dynamics sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizedSubtask {
    pub cluster: u32,
    pub values: Vec<u8>,
}

/// One posterior draw of the full subtask sequence, realized lazily.
///
/// Rows below `snapshot.data().len()` are the subtasks seen so far; higher
/// rows are future subtasks. Unobserved values and future rows are drawn on
/// first access from the predictive of their cluster, which is then updated
/// inside this sample only.
#[derive(Debug, Clone)]
pub struct DynamicsSample {
    snap: Arc<PosteriorSnapshot>,
    sizes: Vec<u32>,
    total: u32,
    delta: Vec<Option<Box<[u32]>>>,
    past: HashMap<(u32, u16), u8>,
    future_z: Vec<u32>,
    future_vals: Vec<u8>,
}

impl DynamicsSample {
    pub fn new(snap: Arc<PosteriorSnapshot>) -> Self {
        let sizes: Vec<u32> = snap.clusters.iter().map(|c| c.size).collect();
        let total = sizes.iter().sum();
        Self {
            delta: vec![None; sizes.len()],
            sizes,
            total,
            past: HashMap::new(),
            future_z: Vec::new(),
            future_vals: Vec::new(),
            snap,
        }
    }

    pub fn snapshot(&self) -> &Arc<PosteriorSnapshot> {
        &self.snap
    }

    /// Number of subtasks conditioned on.
    pub fn observed_rows(&self) -> usize {
        self.snap.data.len()
    }

    /// Future rows realized so far.
    pub fn realized_future(&self) -> usize {
        self.future_z.len()
    }

    fn extend_to(&mut self, j: usize, rng: &mut (impl Rng + ?Sized)) {
        let n = self.snap.spec.n_dims();
        while self.future_z.len() <= j {
            let mut u = rng.gen::<f64>() * (self.total as f64 + self.snap.alpha);
            let mut k = self.sizes.len();
            for (i, &s) in self.sizes.iter().enumerate() {
                u -= s as f64;
                if u < 0.0 {
                    k = i;
                    break;
                }
            }
            if k == self.sizes.len() {
                self.sizes.push(0);
                self.delta.push(None);
            }
            self.sizes[k] += 1;
            self.total += 1;
            self.future_z.push(k as u32);
            self.future_vals.extend(std::iter::repeat_n(UNOBSERVED, n));
        }
    }

    /// Cluster of `row`.
    pub fn cluster_of(&mut self, row: usize, rng: &mut (impl Rng + ?Sized)) -> u32 {
        let t = self.snap.data.len();
        if row < t {
            return self.snap.assign[row];
        }
        self.extend_to(row - t, rng);
        self.future_z[row - t]
    }

    fn draw(&mut self, k: u32, dim: usize, rng: &mut (impl Rng + ?Sized)) -> u8 {
        let spec = &self.snap.spec;
        let (off, d, beta) = (spec.offset(dim), spec.arity(dim), spec.beta());
        let tl = spec.table_len();
        let n_dims = spec.n_dims();
        let k = k as usize;
        let base = self.snap.clusters.get(k);
        let delta = self.delta[k].get_or_insert_with(|| vec![0u32; tl + n_dims].into_boxed_slice());
        let observed = base.map_or(0, |c| c.observed[dim]) + delta[tl + dim];
        let mut u = rng.gen::<f64>() * (observed as f64 + beta);
        let mut v = d - 1;
        for x in 0..d {
            let c = base.map_or(0, |c| c.counts[off + x]) + delta[off + x];
            u -= c as f64 + beta / d as f64;
            if u < 0.0 {
                v = x;
                break;
            }
        }
        delta[off + v] += 1;
        delta[tl + dim] += 1;
        v as u8
    }

    /// Value of `dim` in `row`: observed data, a previously realized value, or a fresh draw.
    pub fn value(&mut self, row: usize, dim: usize, rng: &mut (impl Rng + ?Sized)) -> u8 {
        let t = self.snap.data.len();
        if row < t {
            let v = self.snap.data[row].raw()[dim];
            if v != UNOBSERVED {
                return v;
            }
            if let Some(&v) = self.past.get(&(row as u32, dim as u16)) {
                return v;
            }
            let v = self.draw(self.snap.assign[row], dim, rng);
            self.past.insert((row as u32, dim as u16), v);
            return v;
        }
        let j = row - t;
        self.extend_to(j, rng);
        let idx = j * self.snap.spec.n_dims() + dim;
        if self.future_vals[idx] == UNOBSERVED {
            let k = self.future_z[j];
            self.future_vals[idx] = self.draw(k, dim, rng);
        }
        self.future_vals[idx]
    }

    /// Every value of `row`, realizing whatever is missing.
    pub fn realize(&mut self, row: usize, rng: &mut (impl Rng + ?Sized)) -> RealizedSubtask {
        let cluster = self.cluster_of(row, rng);
        let values = (0..self.snap.spec.n_dims())
            .map(|d| self.value(row, d, rng))
            .collect();
        RealizedSubtask { cluster, values }
    }

    /// Packed context of `row`.
    pub fn context_key(&mut self, row: usize, rng: &mut (impl Rng + ?Sized)) -> u128 {
        let c = self.snap.spec.n_context();
        let ctx: Vec<u8> = (0..c).map(|d| self.value(row, d, rng)).collect();
        self.snap.spec.pack_context(ctx)
    }
}

/// Realizes `count` consecutive rows starting at `from` in a fresh sample.
pub fn forward_sample(
    snap: Arc<PosteriorSnapshot>,
    from: usize,
    count: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Vec<RealizedSubtask>> {
    let end = from
        .checked_add(count)
        .ok_or_else(|| Error::InvalidInput("row range overflows".into()))?;
    let mut s = DynamicsSample::new(snap);
    Ok((from..end).map(|r| s.realize(r, rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crp::{AlphaMode, CrpPosterior, ModelSpec, SubtaskObservation};
    use crate::rng::SimRng;
    use rand::SeedableRng;

    fn posterior(alpha: f64, rows: &[[u8; 3]]) -> CrpPosterior {
        let spec = Arc::new(ModelSpec::uniform(1, 5, 2, 5, AlphaMode::Fixed(alpha)).unwrap());
        let mut post = CrpPosterior::new(spec.clone());
        let mut rng = SimRng::seed_from_u64(0);
        for r in rows {
            post.push(SubtaskObservation::full(&spec, r).unwrap(), &mut rng)
                .unwrap();
        }
        post
    }

    #[test]
    fn tiny_alpha_joins_the_only_cluster() {
        let post = posterior(1e-12, &[[1, 2, 3]]);
        let mut rng = SimRng::seed_from_u64(1);
        let rows = forward_sample(post.snapshot(), 1, 200, &mut rng).unwrap();
        assert!(rows.iter().all(|r| r.cluster == 0));
    }

    #[test]
    fn huge_alpha_draws_from_the_base_measure() {
        let post = posterior(1e12, &[[1, 2, 3]]);
        let mut rng = SimRng::seed_from_u64(1);
        let rows = forward_sample(post.snapshot(), 1, 20_000, &mut rng).unwrap();
        let mut seen = std::collections::HashSet::new();
        let mut hist = [0usize; 5];
        for r in &rows {
            assert!(seen.insert(r.cluster));
            hist[r.values[1] as usize] += 1;
        }
        for h in hist {
            assert!((h as f64 / 20_000.0 - 0.2).abs() < 0.015, "{hist:?}");
        }
    }

    #[test]
    fn realized_rows_are_immutable() {
        let post = posterior(1.0, &[[0, 0, 0], [1, 1, 1]]);
        let mut s = DynamicsSample::new(post.snapshot());
        let mut rng = SimRng::seed_from_u64(4);
        let a = s.realize(5, &mut rng);
        let _ = s.realize(9, &mut rng);
        assert_eq!(s.realize(5, &mut rng), a);
        assert_eq!(s.realize(0, &mut rng).values, vec![0, 0, 0]);
    }

    #[test]
    fn hidden_past_values_are_filled_once() {
        let spec = Arc::new(ModelSpec::uniform(1, 5, 2, 5, AlphaMode::Fixed(1.0)).unwrap());
        let mut post = CrpPosterior::new(spec.clone());
        let mut rng = SimRng::seed_from_u64(0);
        post.push(
            SubtaskObservation::from_context(&spec, &[3]).unwrap(),
            &mut rng,
        )
        .unwrap();
        let mut s = DynamicsSample::new(post.snapshot());
        let v = s.value(0, 2, &mut rng);
        for _ in 0..10 {
            assert_eq!(s.value(0, 2, &mut rng), v);
        }
    }
}
