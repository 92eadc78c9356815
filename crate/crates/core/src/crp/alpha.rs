use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use crate::error::{Error, Result};

/// Odds `pi / (1 - pi)` of the higher-shape Gamma component, given
/// `rate_eta = rate - ln(eta)`.
pub fn mixing_odds(shape: f64, k: usize, t: usize, rate_eta: f64) -> f64 {
    (shape + k as f64 - 1.0) / (t as f64 * rate_eta)
}

/// One auxiliary-variable update of the concentration under a
/// Gamma(shape, rate) prior, given `k` clusters among `t` subtasks.
pub fn sample_alpha<R: Rng + ?Sized>(
    current: f64,
    k: usize,
    t: usize,
    shape: f64,
    rate: f64,
    rng: &mut R,
) -> Result<f64> {
    if t == 0 || k == 0 || k > t {
        return Err(Error::InvalidInput(format!(
            "{k} clusters among {t} subtasks"
        )));
    }
    let bad = |e: &dyn std::fmt::Display| Error::InvalidInput(format!("alpha update: {e}"));
    let eta: f64 = Beta::new(current + 1.0, t as f64)
        .map_err(|e| bad(&e))?
        .sample(rng);
    let rate_eta = rate - eta.max(f64::MIN_POSITIVE).ln();
    let odds = mixing_odds(shape, k, t, rate_eta);
    let pi = odds / (1.0 + odds);
    let a = if rng.gen::<f64>() < pi {
        shape + k as f64
    } else {
        shape + k as f64 - 1.0
    };
    let draw: f64 = Gamma::new(a, 1.0 / rate_eta)
        .map_err(|e| bad(&e))?
        .sample(rng);
    Ok(draw.max(f64::MIN_POSITIVE))
}
