use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::run::RunRecord;
use super::stats::mean_stderr;

/// Per-replicate totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run_id: usize,
    pub steps: usize,
    pub discounted_return: f64,
    /// Subtasks left without any eat or pull.
    pub skipped: usize,
    /// Subtasks entered.
    pub subtasks: usize,
}

/// Aggregates over replicates, folded in run-id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub runs: Vec<RunMetrics>,
    pub mean_return: f64,
    pub stderr_return: f64,
    pub mean_skipped: f64,
    pub stderr_skipped: f64,
    /// Per step: fraction of replicates that engaged when they could,
    /// `None` when no replicate could.
    pub exploitation: Vec<Option<f64>>,
    /// Per step: mean discounted return so far; a finished replicate keeps
    /// its final value.
    pub cumulative_return: Vec<f64>,
    /// First two actions of each engageable subtask, as `"a"` or `"a-b"`.
    pub action_pairs: BTreeMap<String, usize>,
}

fn run_metrics(
    run_id: usize,
    recs: &[&RunRecord],
    pairs: &mut BTreeMap<String, usize>,
) -> RunMetrics {
    let mut skipped = 0;
    let mut subtasks = 0;
    let mut i = 0;
    while i < recs.len() {
        let mut j = i + 1;
        while j < recs.len() && recs[j].tau == recs[i].tau {
            j += 1;
        }
        if recs[i].legal_eat {
            subtasks += 1;
            if recs[i].action == 0 {
                skipped += 1;
            }
            let key = match recs.get(i + 1).filter(|_| j - i > 1) {
                Some(second) => format!("{}-{}", recs[i].action, second.action),
                None => recs[i].action.to_string(),
            };
            *pairs.entry(key).or_insert(0) += 1;
        }
        i = j;
    }
    RunMetrics {
        run_id,
        steps: recs.len(),
        discounted_return: recs.last().map_or(0.0, |r| r.discounted_return),
        skipped,
        subtasks,
    }
}

/// Recomputes every metric from the records alone.
pub fn aggregate(records: &[RunRecord]) -> MetricsSummary {
    let mut by_run: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_run.entry(r.run_id).or_default().push(r);
    }
    for recs in by_run.values_mut() {
        recs.sort_by_key(|r| r.step);
    }
    let horizon = by_run.values().map(|r| r.len()).max().unwrap_or(0);
    let mut pairs = BTreeMap::new();
    let runs: Vec<RunMetrics> = by_run
        .iter()
        .map(|(&id, recs)| run_metrics(id, recs, &mut pairs))
        .collect();
    let n = by_run.len().max(1) as f64;
    let mut engaged = vec![(0usize, 0usize); horizon];
    let mut cumulative = vec![0.0; horizon];
    for recs in by_run.values() {
        for (t, c) in cumulative.iter_mut().enumerate() {
            *c += recs
                .get(t)
                .or(recs.last())
                .map_or(0.0, |r| r.discounted_return);
        }
        for (t, r) in recs.iter().enumerate() {
            if r.legal_eat {
                engaged[t].1 += 1;
                if r.action != 0 {
                    engaged[t].0 += 1;
                }
            }
        }
    }
    cumulative.iter_mut().for_each(|c| *c /= n);
    let returns: Vec<f64> = runs.iter().map(|r| r.discounted_return).collect();
    let skips: Vec<f64> = runs.iter().map(|r| r.skipped as f64).collect();
    let (mean_return, stderr_return) = mean_stderr(&returns);
    let (mean_skipped, stderr_skipped) = mean_stderr(&skips);
    MetricsSummary {
        runs,
        mean_return,
        stderr_return,
        mean_skipped,
        stderr_skipped,
        exploitation: engaged
            .into_iter()
            .map(|(e, n)| (n > 0).then(|| e as f64 / n as f64))
            .collect(),
        cumulative_return: cumulative,
        action_pairs: pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(
        run_id: usize,
        step: usize,
        tau: usize,
        action: usize,
        reward: f64,
        ret: f64,
    ) -> RunRecord {
        RunRecord {
            run_id,
            step,
            tau,
            action,
            reward,
            discounted_return: ret,
            legal_eat: true,
            cluster_count: 1,
            alpha: 1.0,
        }
    }

    #[test]
    fn zero_rewards() {
        let s = aggregate(&[rec(0, 0, 0, 0, 0.0, 0.0), rec(0, 1, 1, 0, 0.0, 0.0)]);
        assert_eq!((s.mean_return, s.stderr_return), (0.0, 0.0));
        assert_eq!(s.runs[0].skipped, 2);
    }

    #[test]
    fn two_runs_mean_and_stderr() {
        let s = aggregate(&[rec(0, 0, 0, 1, 1.0, 1.0), rec(1, 0, 0, 1, 3.0, 3.0)]);
        assert_eq!(s.mean_return, 2.0);
        assert!((s.stderr_return - 1.0).abs() < 1e-15);
    }

    #[test]
    fn engaged_subtasks_are_not_skipped() {
        let mut recs = vec![
            rec(0, 0, 0, 2, 5.0, 5.0),
            rec(0, 1, 0, 0, 0.0, 5.0),
            rec(0, 2, 1, 1, -1.0, 4.0),
        ];
        recs[1].legal_eat = true;
        let s = aggregate(&recs);
        assert_eq!(s.runs[0].skipped, 0);
        assert_eq!(s.runs[0].subtasks, 2);
        assert_eq!(s.action_pairs.get("2-0"), Some(&1));
        assert_eq!(s.action_pairs.get("1"), Some(&1));
    }

    #[test]
    fn curves_carry_forward() {
        let s = aggregate(&[
            rec(0, 0, 0, 1, 1.0, 1.0),
            rec(1, 0, 0, 0, 0.0, 0.0),
            rec(1, 1, 1, 1, 2.0, 1.8),
        ]);
        assert_eq!(s.cumulative_return, vec![0.5, (1.0 + 1.8) / 2.0]);
        assert_eq!(s.exploitation, vec![Some(0.5), Some(1.0)]);
    }
}
