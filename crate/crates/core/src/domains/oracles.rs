/// Expected steps for posterior sampling on the middle-start chain to reach
/// either end: the absorption time `x^2` of a symmetric walk.
pub fn oracle_example1_ts_steps(x: usize) -> f64 {
    (x * x) as f64
}

/// Expected actions until the reward is collected: the walk, a full
/// traversal when the first end reached is empty, and the collecting action.
pub fn ts_steps_to_reward(x: usize) -> f64 {
    (x * x + x + 1) as f64
}

/// `(V*, V_commit)` for the chain started next to the left end, as the
/// published closed forms.
pub fn oracle_example2_values(x: usize, gamma: f64) -> (f64, f64) {
    let g = |k: i64| gamma.powi(k as i32);
    let x = x as i64;
    let v_star = 0.5 * (gamma + g(2 * x + 1));
    let v_commit = 0.25 * (gamma + g(2 * x - 2) * (1.0 + g(3)) + g(4 * x - 1));
    (v_star, v_commit)
}

/// Value of committing to one posterior sample until an end is reached,
/// summed over the four (sampled end, true end) cases of the chain model.
pub fn example2_commit_value_enumerated(x: usize, gamma: f64) -> f64 {
    let g = |k: usize| gamma.powi(k as i32);
    0.25 * (g(1) + g(2 * x + 1) + g(2 * x - 1) + g(4 * x - 1))
}

/// `(V_TS, z(K))` for the one-step gamble: `z(K) = (1 - p^K)(p c1 + 1 - p)`.
pub fn oracle_example3(p: f64, c1: f64, k: u32) -> (f64, f64) {
    let z = |k: u32| (1.0 - p.powi(k as i32)) * (p * c1 + (1.0 - p));
    (z(1), z(k))
}

/// Published upper bound on the value of optimistic multi-sample planning
/// over the cycle of `n` gambles.
pub fn oracle_example4_boss_bound(p: f64, c1: f64, k: u32, n: usize, gamma: f64) -> f64 {
    let (_, z) = oracle_example3(p, c1, k);
    z * (1.0 - gamma.powi(n as i32)) / (1.0 - gamma)
        + gamma.powi(n as i32 + 1) * (1.0 - p) / (1.0 - gamma)
}
