use std::collections::BTreeMap;

use std::sync::Arc;

use rand::Rng;
use statrs::function::gamma::ln_gamma;

use super::{AlphaMode, CrpPosterior, ModelSpec, SubtaskObservation};
use crate::error::{Error, Result};

/// Largest dataset the enumeration accepts (Bell(8) = 4140 partitions).
pub const MAX_EXACT: usize = 8;

/// Distribution over set partitions keyed by canonical labelling.
pub type PartitionDist = BTreeMap<Vec<usize>, f64>;

/// Relabels clusters in order of first appearance.
pub fn partition_key(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    labels
        .iter()
        .map(|&l| match map.iter().find(|m| m.0 == l) {
            Some(m) => m.1,
            None => {
                map.push((l, map.len()));
                map.len() - 1
            }
        })
        .collect()
}

pub fn total_variation(p: &PartitionDist, q: &PartitionDist) -> f64 {
    let mut keys: Vec<&Vec<usize>> = p.keys().chain(q.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

fn for_each_rgs(n: usize, f: &mut impl FnMut(&[usize])) {
    fn go(a: &mut Vec<usize>, n: usize, max: usize, f: &mut impl FnMut(&[usize])) {
        if a.len() == n {
            f(a);
            return;
        }
        for v in 0..=max + 1 {
            a.push(v);
            go(a, n, max.max(v), f);
            a.pop();
        }
    }
    if n == 0 {
        f(&[]);
        return;
    }
    let mut a = vec![0];
    go(&mut a, n, 0, f);
}

fn log_marginal(spec: &ModelSpec, members: &[&SubtaskObservation]) -> f64 {
    let beta = spec.beta();
    let mut total = 0.0;
    for dim in 0..spec.n_dims() {
        let d = spec.arity(dim);
        let mut counts = vec![0usize; d];
        let mut m = 0;
        for obs in members {
            if let Some(v) = obs.get(dim) {
                counts[v as usize] += 1;
                m += 1;
            }
        }
        if m == 0 {
            continue;
        }
        let a = beta / d as f64;
        total += ln_gamma(beta) - ln_gamma(m as f64 + beta);
        total += counts
            .iter()
            .map(|&c| ln_gamma(c as f64 + a) - ln_gamma(a))
            .sum::<f64>();
    }
    total
}

/// Exact posterior over partitions of `data` under concentration `alpha`.
pub fn exact_partition_posterior(
    data: &[SubtaskObservation],
    spec: &ModelSpec,
    alpha: f64,
) -> Result<PartitionDist> {
    if data.len() > MAX_EXACT {
        return Err(Error::Capacity {
            what: "subtasks in exact partition enumeration",
            limit: MAX_EXACT,
        });
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!(
            "alpha {alpha} must be positive"
        )));
    }
    let n = data.len();
    let mut logs: Vec<(Vec<usize>, f64)> = Vec::new();
    for_each_rgs(n, &mut |a| {
        let k = a.iter().copied().max().map_or(0, |m| m + 1);
        let mut lp = ln_gamma(alpha) - ln_gamma(alpha + n as f64) + k as f64 * alpha.ln();
        for c in 0..k {
            let members: Vec<&SubtaskObservation> =
                (0..n).filter(|&i| a[i] == c).map(|i| &data[i]).collect();
            lp += ln_gamma(members.len() as f64) + log_marginal(spec, &members);
        }
        logs.push((a.to_vec(), lp));
    });
    let max = logs.iter().map(|l| l.1).fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.iter().map(|l| (l.1 - max).exp()).sum();
    Ok(logs
        .into_iter()
        .map(|(k, lp)| (k, (lp - max).exp() / z))
        .collect())
}

/// Empirical partition distribution of the collapsed Gibbs chain over
/// `sweeps` sweeps at fixed `alpha`, after `burn_in` discarded sweeps.
pub fn gibbs_partition_frequencies<R: Rng + ?Sized>(
    data: &[SubtaskObservation],
    spec: &ModelSpec,
    alpha: f64,
    burn_in: usize,
    sweeps: usize,
    rng: &mut R,
) -> Result<PartitionDist> {
    if sweeps == 0 {
        return Err(Error::InvalidInput("need at least one sweep".into()));
    }
    let mut post = CrpPosterior::new(Arc::new(spec.with_alpha(AlphaMode::Fixed(alpha))?));
    for obs in data {
        post.push(obs.clone(), rng)?;
    }
    post.sweeps(burn_in, rng)?;
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for _ in 0..sweeps {
        post.sweep(rng)?;
        *counts
            .entry(partition_key(post.state().assignments()))
            .or_insert(0) += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / sweeps as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crp::AlphaMode;
    use approx::assert_abs_diff_eq;

    fn spec() -> ModelSpec {
        ModelSpec::uniform(1, 3, 2, 2, AlphaMode::Fixed(1.0)).unwrap()
    }

    #[test]
    fn bell_numbers() {
        for (n, bell) in [(1, 1), (3, 5), (5, 52), (8, 4140)] {
            let mut c = 0;
            for_each_rgs(n, &mut |_| c += 1);
            assert_eq!(c, bell);
        }
    }

    #[test]
    fn one_subtask_is_certain() {
        let s = spec();
        let d = vec![SubtaskObservation::full(&s, &[0, 1, 0]).unwrap()];
        let p = exact_partition_posterior(&d, &s, 1.0).unwrap();
        assert_eq!(p.len(), 1);
        assert_abs_diff_eq!(p[&vec![0]], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn uninformative_data_gives_the_crp_prior() {
        let s = ModelSpec::uniform(0, 2, 2, 2, AlphaMode::Fixed(1.0)).unwrap();
        let blank = SubtaskObservation::new(&s, &[None, None]).unwrap();
        let d = vec![blank.clone(), blank.clone(), blank];
        let p = exact_partition_posterior(&d, &s, 1.0).unwrap();
        assert_abs_diff_eq!(p[&vec![0, 0, 0]], 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[&vec![0, 1, 2]], 1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn too_many_subtasks() {
        let s = spec();
        let d = vec![SubtaskObservation::full(&s, &[0, 1, 0]).unwrap(); 9];
        assert!(matches!(
            exact_partition_posterior(&d, &s, 1.0),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn permuting_data_relabels_only() {
        let s = spec();
        let rows = [[0u8, 1, 0], [0, 1, 1], [2, 0, 0], [1, 1, 0]];
        let d: Vec<_> = rows
            .iter()
            .map(|r| SubtaskObservation::full(&s, r).unwrap())
            .collect();
        let perm = [2usize, 0, 3, 1];
        let dp: Vec<_> = perm.iter().map(|&i| d[i].clone()).collect();
        let p = exact_partition_posterior(&d, &s, 0.8).unwrap();
        let q = exact_partition_posterior(&dp, &s, 0.8).unwrap();
        for (key, prob) in &q {
            let mut orig = vec![0; 4];
            for (j, &i) in perm.iter().enumerate() {
                orig[i] = key[j];
            }
            assert_abs_diff_eq!(p[&partition_key(&orig)], *prob, epsilon = 1e-12);
        }
    }

    #[test]
    fn canonical_labels() {
        assert_eq!(partition_key(&[7, 7, 3, 7, 1]), vec![0, 0, 1, 0, 2]);
    }
}
