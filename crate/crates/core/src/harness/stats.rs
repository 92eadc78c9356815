use statrs::distribution::{ContinuousCDF, StudentsT};

/// Sample mean and standard error (sample standard deviation over `sqrt(n)`).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// One-sided paired t-test of `mean(a - b) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTest {
    pub n: usize,
    pub mean_diff: f64,
    pub stderr: f64,
    pub t: f64,
    pub p_value: f64,
}

pub fn paired_t_test(a: &[f64], b: &[f64]) -> PairedTest {
    assert_eq!(a.len(), b.len(), "paired samples");
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (mean_diff, stderr) = mean_stderr(&d);
    let n = d.len();
    let (t, p_value) = if n < 2 {
        (0.0, 1.0)
    } else if stderr == 0.0 {
        let p = if mean_diff > 0.0 { 0.0 } else { 1.0 };
        (mean_diff.signum() * f64::INFINITY, p)
    } else {
        let t = mean_diff / stderr;
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("df >= 1");
        (t, 1.0 - dist.cdf(t))
    };
    PairedTest {
        n,
        mean_diff,
        stderr,
        t,
        p_value,
    }
}
