use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::function::gamma::ln_gamma;

use super::{sample_alpha, AlphaMode, ModelSpec, SubtaskObservation, UNOBSERVED};
use crate::error::{Error, Result};
const CHUNK: usize = 16;

/// Split-merge proposals made after each systematic scan.
pub const SPLIT_MERGE_MOVES: usize = 3;

/// Sufficient statistics of one cluster, flattened over dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterTable {
    pub size: u32,
    /// `counts[offset(i) + v]`: members with value `v` in dim `i`.
    pub counts: Vec<u32>,
    /// `observed[i]`: members whose dim `i` is observed.
    pub observed: Vec<u32>,
}

impl ClusterTable {
    pub fn empty(spec: &ModelSpec) -> Self {
        Self {
            size: 0,
            counts: vec![0; spec.table_len()],
            observed: vec![0; spec.n_dims()],
        }
    }

    fn add(&mut self, spec: &ModelSpec, obs: &SubtaskObservation) {
        self.size += 1;
        for (i, v) in obs.observed() {
            self.counts[spec.offset(i) + v as usize] += 1;
            self.observed[i] += 1;
        }
    }

    fn remove(&mut self, spec: &ModelSpec, obs: &SubtaskObservation) {
        self.size -= 1;
        for (i, v) in obs.observed() {
            self.counts[spec.offset(i) + v as usize] -= 1;
            self.observed[i] -= 1;
        }
    }

    /// Predictive probability of value `v` in dim `dim`.
    pub fn predictive(&self, spec: &ModelSpec, dim: usize, v: u8) -> f64 {
        let d = spec.arity(dim) as f64;
        (self.counts[spec.offset(dim) + v as usize] as f64 + spec.beta() / d)
            / (self.observed[dim] as f64 + spec.beta())
    }

    /// Log of the joint predictive of the observed dims of `obs`.
    pub fn log_predictive(&self, spec: &ModelSpec, obs: &SubtaskObservation) -> f64 {
        let beta = spec.beta();
        let mut lw = 0.0;
        let mut prod = 1.0;
        let mut k = 0;
        for (i, &v) in obs.raw().iter().enumerate() {
            if v == UNOBSERVED {
                continue;
            }
            let d = spec.arity(i) as f64;
            prod *= (self.counts[spec.offset(i) + v as usize] as f64 + beta / d)
                / (self.observed[i] as f64 + beta);
            k += 1;
            if k == CHUNK {
                lw += prod.ln();
                prod = 1.0;
                k = 0;
            }
        }
        lw + prod.ln()
    }

    /// Log marginal likelihood of the members, with the parameters integrated out.
    pub fn log_marginal(&self, spec: &ModelSpec) -> f64 {
        let beta = spec.beta();
        let mut total = 0.0;
        for dim in 0..spec.n_dims() {
            let m = self.observed[dim];
            if m == 0 {
                continue;
            }
            let d = spec.arity(dim);
            let a = beta / d as f64;
            total += ln_gamma(beta) - ln_gamma(m as f64 + beta);
            let off = spec.offset(dim);
            total += self.counts[off..off + d]
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| ln_gamma(c as f64 + a) - ln_gamma(a))
                .sum::<f64>();
        }
        total
    }

    fn merged(&self, other: &ClusterTable) -> ClusterTable {
        ClusterTable {
            size: self.size + other.size,
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(a, b)| a + b)
                .collect(),
            observed: self
                .observed
                .iter()
                .zip(&other.observed)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Log predictive of `obs` under an empty cluster.
fn log_base(spec: &ModelSpec, obs: &SubtaskObservation) -> f64 {
    obs.observed()
        .map(|(i, _)| -(spec.arity(i) as f64).ln())
        .sum()
}

/// Draws an index with probability proportional to `exp(logw[i])`.
pub(crate) fn sample_log_weights<R: Rng + ?Sized>(logw: &mut [f64], rng: &mut R) -> usize {
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for w in logw.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in logw.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    logw.len() - 1
}

/// Cluster assignments and count tables of the collapsed sampler. Clusters
/// are kept dense: an emptied cluster is removed immediately.
#[derive(Debug, Clone, PartialEq)]
pub struct CrpPosteriorState {
    assign: Vec<usize>,
    clusters: Vec<ClusterTable>,
    alpha: f64,
}

impl CrpPosteriorState {
    pub fn empty(alpha: f64) -> Self {
        Self {
            assign: Vec::new(),
            clusters: Vec::new(),
            alpha,
        }
    }

    /// Tables rebuilt from an arbitrary labelling of `data`.
    pub fn from_assignments(
        spec: &ModelSpec,
        data: &[SubtaskObservation],
        labels: &[usize],
        alpha: f64,
    ) -> Result<Self> {
        if labels.len() != data.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} subtasks",
                labels.len(),
                data.len()
            )));
        }
        let canon = super::partition_key(labels);
        let k = canon.iter().copied().max().map_or(0, |m| m + 1);
        let mut clusters = vec![ClusterTable::empty(spec); k];
        for (row, &c) in canon.iter().enumerate() {
            clusters[c].add(spec, &data[row]);
        }
        Ok(Self {
            assign: canon,
            clusters,
            alpha,
        })
    }

    /// Keeps the labels as given; they must cover `0..K` with no empty cluster.
    pub fn from_dense_labels(
        spec: &ModelSpec,
        data: &[SubtaskObservation],
        labels: &[usize],
        alpha: f64,
    ) -> Result<Self> {
        if labels.len() != data.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} subtasks",
                labels.len(),
                data.len()
            )));
        }
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut clusters = vec![ClusterTable::empty(spec); k];
        for (row, &c) in labels.iter().enumerate() {
            clusters[c].add(spec, &data[row]);
        }
        if clusters.iter().any(|c| c.size == 0) {
            return Err(Error::InvalidInput("cluster labels are not dense".into()));
        }
        Ok(Self {
            assign: labels.to_vec(),
            clusters,
            alpha,
        })
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assign
    }

    pub fn clusters(&self) -> &[ClusterTable] {
        &self.clusters
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.size as usize).collect()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
    }

    /// Errors unless the tables equal a from-scratch rebuild.
    pub fn check(&self, spec: &ModelSpec, data: &[SubtaskObservation]) -> Result<()> {
        if self.assign.len() != data.len() {
            return Err(Error::Invariant(format!(
                "{} assignments for {} subtasks",
                self.assign.len(),
                data.len()
            )));
        }
        if self.assign.iter().any(|&k| k >= self.clusters.len()) {
            return Err(Error::Invariant("assignment to a missing cluster".into()));
        }
        let mut fresh = vec![ClusterTable::empty(spec); self.clusters.len()];
        for (row, &k) in self.assign.iter().enumerate() {
            fresh[k].add(spec, &data[row]);
        }
        if fresh != self.clusters {
            return Err(Error::Invariant(
                "count tables disagree with assignments".into(),
            ));
        }
        if self.clusters.iter().any(|c| c.size == 0) {
            return Err(Error::Invariant("empty cluster retained".into()));
        }
        Ok(())
    }

    fn drop_cluster(&mut self, k: usize) {
        let last = self.clusters.len() - 1;
        self.clusters.swap_remove(k);
        if k != last {
            for a in self.assign.iter_mut().filter(|a| **a == last) {
                *a = k;
            }
        }
    }

    fn detach(&mut self, spec: &ModelSpec, row: usize, obs: &SubtaskObservation) {
        let k = self.assign[row];
        self.clusters[k].remove(spec, obs);
        self.assign[row] = usize::MAX;
        if self.clusters[k].size == 0 {
            self.drop_cluster(k);
        }
    }

    /// Samples a cluster for a detached row from its full conditional.
    fn seat<R: Rng + ?Sized>(
        &mut self,
        spec: &ModelSpec,
        row: usize,
        obs: &SubtaskObservation,
        logw: &mut Vec<f64>,
        rng: &mut R,
    ) {
        logw.clear();
        for c in &self.clusters {
            logw.push((c.size as f64).ln() + c.log_predictive(spec, obs));
        }
        logw.push(self.alpha.ln() + log_base(spec, obs));
        let k = sample_log_weights(logw, rng);
        if k == self.clusters.len() {
            self.clusters.push(ClusterTable::empty(spec));
        }
        self.clusters[k].add(spec, obs);
        self.assign[row] = k;
    }

    fn sweep_assignments<R: Rng + ?Sized>(
        &mut self,
        spec: &ModelSpec,
        data: &[SubtaskObservation],
        rng: &mut R,
    ) {
        let mut logw = Vec::with_capacity(self.clusters.len() + 1);
        for (row, obs) in data.iter().enumerate() {
            self.detach(spec, row, obs);
            self.seat(spec, row, obs, &mut logw, rng);
        }
    }

    /// Sequentially allocated split-merge Metropolis-Hastings move.
    fn split_merge<R: Rng + ?Sized>(
        &mut self,
        spec: &ModelSpec,
        data: &[SubtaskObservation],
        rng: &mut R,
    ) {
        let n = data.len();
        if n < 2 {
            return;
        }
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (ci, cj) = (self.assign[i], self.assign[j]);
        let split = ci == cj;
        let mut rest: Vec<usize> = (0..n)
            .filter(|&r| r != i && r != j && (self.assign[r] == ci || self.assign[r] == cj))
            .collect();
        rest.shuffle(rng);
        let mut a = ClusterTable::empty(spec);
        let mut b = ClusterTable::empty(spec);
        a.add(spec, &data[i]);
        b.add(spec, &data[j]);
        let mut to_b = Vec::new();
        let mut log_q = 0.0;
        for &r in &rest {
            let wa = (a.size as f64).ln() + a.log_predictive(spec, &data[r]);
            let wb = (b.size as f64).ln() + b.log_predictive(spec, &data[r]);
            let m = wa.max(wb);
            let log_z = m + ((wa - m).exp() + (wb - m).exp()).ln();
            let side_b = if split {
                rng.gen::<f64>() < (wb - log_z).exp()
            } else {
                self.assign[r] == cj
            };
            if side_b {
                log_q += wb - log_z;
                b.add(spec, &data[r]);
                to_b.push(r);
            } else {
                log_q += wa - log_z;
                a.add(spec, &data[r]);
            }
        }
        let whole = if split {
            self.clusters[ci].clone()
        } else {
            self.clusters[ci].merged(&self.clusters[cj])
        };
        let log_split = self.alpha.ln() + ln_gamma(a.size as f64) + ln_gamma(b.size as f64)
            - ln_gamma(whole.size as f64)
            + a.log_marginal(spec)
            + b.log_marginal(spec)
            - whole.log_marginal(spec);
        let log_accept = if split {
            log_split - log_q
        } else {
            log_q - log_split
        };
        if !(rng.gen::<f64>().ln() < log_accept) {
            return;
        }
        if split {
            let k = self.clusters.len();
            self.clusters[ci] = a;
            self.clusters.push(b);
            self.assign[j] = k;
            for r in to_b {
                self.assign[r] = k;
            }
        } else {
            for r in self.assign.iter_mut().filter(|r| **r == cj) {
                *r = ci;
            }
            self.clusters[ci] = whole;
            self.drop_cluster(cj);
        }
    }
}

/// One systematic-scan sweep over all subtasks, then split-merge proposals,
/// then a concentration update when the spec places a hyperprior on it.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: &mut CrpPosteriorState,
    data: &[SubtaskObservation],
    spec: &ModelSpec,
    rng: &mut R,
) -> Result<()> {
    if state.assign.len() != data.len() || state.assign.iter().any(|&k| k >= state.clusters.len()) {
        return Err(Error::Invariant(format!(
            "state with {} assignments does not match {} subtasks",
            state.assign.len(),
            data.len()
        )));
    }
    state.sweep_assignments(spec, data, rng);
    for _ in 0..SPLIT_MERGE_MOVES {
        state.split_merge(spec, data, rng);
    }
    if let AlphaMode::Hyper { shape, rate } = spec.alpha_mode() {
        if !data.is_empty() {
            state.alpha = sample_alpha(
                state.alpha,
                state.n_clusters(),
                data.len(),
                shape,
                rate,
                rng,
            )?;
        }
    }
    Ok(())
}

/// Frozen copy of the chain used to generate dynamics samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSnapshot {
    pub(crate) spec: Arc<ModelSpec>,
    pub(crate) data: Arc<Vec<SubtaskObservation>>,
    pub(crate) assign: Vec<u32>,
    pub(crate) clusters: Vec<ClusterTable>,
    pub(crate) alpha: f64,
}

impl PosteriorSnapshot {
    pub fn new(
        spec: Arc<ModelSpec>,
        data: Arc<Vec<SubtaskObservation>>,
        state: &CrpPosteriorState,
    ) -> Self {
        Self {
            spec,
            data,
            assign: state.assign.iter().map(|&k| k as u32).collect(),
            clusters: state.clusters.clone(),
            alpha: state.alpha,
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn data(&self) -> &[SubtaskObservation] {
        &self.data
    }

    pub fn assignments(&self) -> &[u32] {
        &self.assign
    }

    pub fn clusters(&self) -> &[ClusterTable] {
        &self.clusters
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Conditional cluster distribution of `row` given every other row: each
    /// existing cluster with `row` removed, then a fresh one, with weights
    /// summing to one.
    pub fn row_mixture(&self, row: usize) -> Vec<(f64, ClusterTable)> {
        let obs = &self.data[row];
        let own = self.assign[row] as usize;
        let mut parts: Vec<ClusterTable> = Vec::with_capacity(self.clusters.len() + 1);
        for (k, c) in self.clusters.iter().enumerate() {
            let mut c = c.clone();
            if k == own {
                c.remove(&self.spec, obs);
            }
            parts.push(c);
        }
        parts.retain(|c| c.size > 0);
        let mut logw: Vec<f64> = parts
            .iter()
            .map(|c| (c.size as f64).ln() + c.log_predictive(&self.spec, obs))
            .collect();
        logw.push(self.alpha.ln() + log_base(&self.spec, obs));
        parts.push(ClusterTable::empty(&self.spec));
        let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).zip(parts).collect()
    }
}

/// A Gibbs chain together with the data it conditions on.
#[derive(Debug, Clone)]
pub struct CrpPosterior {
    spec: Arc<ModelSpec>,
    data: Arc<Vec<SubtaskObservation>>,
    state: CrpPosteriorState,
    sweeps: u64,
}

impl CrpPosterior {
    pub fn new(spec: Arc<ModelSpec>) -> Self {
        let alpha = spec.alpha_mode().initial();
        Self {
            spec,
            data: Arc::new(Vec::new()),
            state: CrpPosteriorState::empty(alpha),
            sweeps: 0,
        }
    }

    pub fn spec(&self) -> &Arc<ModelSpec> {
        &self.spec
    }

    pub fn data(&self) -> &[SubtaskObservation] {
        &self.data
    }

    pub fn state(&self) -> &CrpPosteriorState {
        &self.state
    }

    pub fn rows(&self) -> usize {
        self.data.len()
    }

    pub fn sweeps_done(&self) -> u64 {
        self.sweeps
    }

    pub fn alpha(&self) -> f64 {
        self.state.alpha
    }

    pub fn n_clusters(&self) -> usize {
        self.state.n_clusters()
    }

    /// Appends a subtask, seating it from its conditional given the rest.
    pub fn push<R: Rng + ?Sized>(&mut self, obs: SubtaskObservation, rng: &mut R) -> Result<usize> {
        if obs.len() != self.spec.n_dims() {
            return Err(Error::InvalidInput(format!(
                "subtask with {} dims, model has {}",
                obs.len(),
                self.spec.n_dims()
            )));
        }
        let row = self.data.len();
        self.state.assign.push(usize::MAX);
        let mut logw = Vec::new();
        self.state.seat(&self.spec, row, &obs, &mut logw, rng);
        Arc::make_mut(&mut self.data).push(obs);
        Ok(row)
    }

    /// Records a newly revealed outcome value.
    pub fn reveal(&mut self, row: usize, dim: usize, value: u8) -> Result<()> {
        let spec = &self.spec;
        if row >= self.data.len() || dim < spec.n_context() || dim >= spec.n_dims() {
            return Err(Error::InvalidInput(format!(
                "no outcome slot ({row}, {dim})"
            )));
        }
        if value as usize >= spec.arity(dim) {
            return Err(Error::InvalidInput(format!(
                "value {value} out of range in dim {dim}"
            )));
        }
        if self.data[row].get(dim).is_some() {
            return Err(Error::Contract(format!(
                "outcome ({row}, {dim}) already observed"
            )));
        }
        Arc::make_mut(&mut self.data)[row].set(dim, value);
        let c = &mut self.state.clusters[self.state.assign[row]];
        c.counts[spec.offset(dim) + value as usize] += 1;
        c.observed[dim] += 1;
        Ok(())
    }

    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        gibbs_sweep(&mut self.state, &self.data, &self.spec, rng)?;
        self.sweeps += 1;
        Ok(())
    }

    pub fn sweeps<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<()> {
        for _ in 0..n {
            self.sweep(rng)?;
        }
        Ok(())
    }

    pub fn check(&self) -> Result<()> {
        self.state.check(&self.spec, &self.data)
    }

    pub fn snapshot(&self) -> Arc<PosteriorSnapshot> {
        Arc::new(PosteriorSnapshot::new(
            Arc::clone(&self.spec),
            Arc::clone(&self.data),
            &self.state,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crp::AlphaMode;
    use crate::rng::SimRng;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn spec(alpha: f64) -> Arc<ModelSpec> {
        Arc::new(ModelSpec::uniform(2, 3, 2, 2, AlphaMode::Fixed(alpha)).unwrap())
    }

    #[test]
    fn single_subtask_is_a_singleton() {
        let s = spec(1.0);
        let mut post = CrpPosterior::new(s.clone());
        let mut rng = SimRng::seed_from_u64(0);
        post.push(
            SubtaskObservation::full(&s, &[0, 1, 1, 0]).unwrap(),
            &mut rng,
        )
        .unwrap();
        for _ in 0..10 {
            post.sweep(&mut rng).unwrap();
            assert_eq!(post.n_clusters(), 1);
            assert_eq!(post.state().sizes(), vec![1]);
        }
    }

    #[test]
    fn identical_pair_coclusters_at_tiny_alpha() {
        let s = spec(1e-6);
        let mut rng = SimRng::seed_from_u64(5);
        let obs = SubtaskObservation::full(&s, &[2, 1, 0, 1]).unwrap();
        let trials = 2000;
        let mut together = 0;
        for _ in 0..trials {
            let data = vec![obs.clone(), obs.clone()];
            let mut st = CrpPosteriorState::from_assignments(&s, &data, &[0, 1], 1e-6).unwrap();
            gibbs_sweep(&mut st, &data, &s, &mut rng).unwrap();
            together += (st.n_clusters() == 1) as usize;
        }
        assert!(together as f64 / trials as f64 >= 0.99);
    }

    #[test]
    fn split_merge_alone_targets_the_exact_posterior() {
        let s = spec(1.5);
        let rows = [
            [0u8, 1, 0, 1],
            [0, 1, 1, 1],
            [2, 0, 0, 0],
            [1, 1, 0, 1],
            [2, 0, 1, 0],
        ];
        let data: Vec<_> = rows
            .iter()
            .map(|r| SubtaskObservation::full(&s, r).unwrap())
            .collect();
        let exact = super::super::exact_partition_posterior(&data, &s, 1.5).unwrap();
        let mut st = CrpPosteriorState::from_assignments(&s, &data, &[0; 5], 1.5).unwrap();
        let mut rng = SimRng::seed_from_u64(9);
        let n = 200_000;
        let mut freq = super::super::PartitionDist::new();
        for _ in 0..n {
            st.split_merge(&s, &data, &mut rng);
            *freq
                .entry(super::super::partition_key(&st.assign))
                .or_insert(0.0) += 1.0 / n as f64;
        }
        st.check(&s, &data).unwrap();
        assert!(super::super::total_variation(&exact, &freq) < 0.02);
    }

    #[test]
    fn inconsistent_state_is_rejected() {
        let s = spec(1.0);
        let data = vec![SubtaskObservation::full(&s, &[0, 0, 0, 0]).unwrap()];
        let mut st = CrpPosteriorState::empty(1.0);
        let mut rng = SimRng::seed_from_u64(0);
        assert!(matches!(
            gibbs_sweep(&mut st, &data, &s, &mut rng),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn reveal_rejects_double_observation() {
        let s = spec(1.0);
        let mut post = CrpPosterior::new(s.clone());
        let mut rng = SimRng::seed_from_u64(0);
        let row = post
            .push(
                SubtaskObservation::from_context(&s, &[1, 2]).unwrap(),
                &mut rng,
            )
            .unwrap();
        post.reveal(row, 3, 1).unwrap();
        assert!(post.reveal(row, 3, 0).is_err());
        assert!(post.reveal(row, 0, 0).is_err());
        post.check().unwrap();
    }

    #[test]
    fn log_weights_survive_many_dims() {
        let mut rng = SimRng::seed_from_u64(0);
        let w = vec![-2000.0, -2001.0, f64::NEG_INFINITY];
        let mut hits = 0;
        for _ in 0..2000 {
            let mut x = w.clone();
            hits += (sample_log_weights(&mut x, &mut rng) == 0) as usize;
        }
        assert!((1300..1600).contains(&hits), "{hits}");
    }

    proptest! {
        #[test]
        fn tables_stay_consistent(
            rows in prop::collection::vec(
                (0u8..3, 0u8..3, prop::option::of(0u8..2), prop::option::of(0u8..2)), 1..25),
            reveals in prop::collection::vec((0usize..25, 0usize..2, 0u8..2), 0..10),
            seed in 0u64..1000,
            hyper in any::<bool>(),
        ) {
            let mode = if hyper { AlphaMode::default_hyper() } else { AlphaMode::Fixed(0.7) };
            let s = Arc::new(ModelSpec::uniform(2, 3, 2, 2, mode).unwrap());
            let mut rng = SimRng::seed_from_u64(seed);
            let mut post = CrpPosterior::new(s.clone());
            for &(a, b, c, d) in &rows {
                post.push(SubtaskObservation::new(&s, &[Some(a), Some(b), c, d]).unwrap(), &mut rng).unwrap();
                post.check().unwrap();
            }
            for (i, &(row, dim, v)) in reveals.iter().enumerate() {
                let row = row % rows.len();
                if post.data()[row].get(2 + dim).is_none() {
                    post.reveal(row, 2 + dim, v).unwrap();
                }
                if i % 2 == 0 {
                    post.sweep(&mut rng).unwrap();
                }
                post.check().unwrap();
            }
            post.sweeps(3, &mut rng).unwrap();
            post.check().unwrap();
            prop_assert!(post.alpha() > 0.0);
        }
    }
}
