use rand::Rng;

use super::argmax_random;
use crate::bamdp::ActionId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Always leaves the current subtask immediately.
    ExitOnly,
    /// Takes the action with the highest posterior-mean immediate reward.
    MeanGreedy,
}

/// `candidates` pairs each legal action with its posterior-mean reward; the
/// exit action should be among them with value zero.
pub fn baseline_action<R: Rng + ?Sized>(
    kind: BaselineKind,
    exit: ActionId,
    candidates: &[(ActionId, f64)],
    rng: &mut R,
) -> ActionId {
    match kind {
        BaselineKind::ExitOnly => exit,
        BaselineKind::MeanGreedy => {
            let values: Vec<f64> = candidates.iter().map(|c| c.1).collect();
            argmax_random(&values, rng).map_or(exit, |i| candidates[i].0)
        }
    }
}
