//! Moment and tail-curve estimators over recorded step counts.
//!
//! An algorithm runs in smoothed polynomial time when `E[t^ε] = O(n·N·φ)`
//! for some ε > 0, equivalently when `Pr[t ≥ T] ≤ (p(n)/T^ε)·N·φ` for a
//! polynomial p.  The estimators below compute both sides empirically.  The
//! O(·) hides a constant, so the moment estimator reports a ratio rather
//! than a verdict; the tail curve carries an explicit bound column, clipped
//! at 1.  Markov's inequality applied to the *sample* is an exact statement
//! and is checked as an internal consistency invariant.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// `t^eps` in double precision, stable for arbitrarily large `t`.
fn pow_eps(t: &BigUint, eps: f64) -> f64 {
    if t.bits() <= 53 {
        return t.to_f64().unwrap().powf(eps);
    }
    let shift = t.bits() - 53;
    let top = (t >> shift).to_f64().unwrap();
    ((top.log2() + shift as f64) * eps).exp2()
}

#[derive(Debug, Clone)]
pub struct MomentEstimate {
    pub epsilon: f64,
    /// Sample mean of t^ε.
    pub mean_pow: f64,
    /// Standard error of that mean.
    pub stderr: f64,
    /// n · N · φ.
    pub bound: f64,
    /// mean_pow / bound; the quantity whose trend across n is inspected.
    pub ratio: f64,
}

/// Sample mean of `t^ε` next to the `n·N·φ` budget.  Returns `None` on an
/// empty record set.
pub fn moment_estimate(steps: &[BigUint], epsilon: f64, bound: f64) -> Option<MomentEstimate> {
    if steps.is_empty() {
        return None;
    }
    let k = steps.len() as f64;
    let powers: Vec<f64> = steps.iter().map(|t| pow_eps(t, epsilon)).collect();
    let mean = powers.iter().sum::<f64>() / k;
    let var = powers.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / k;
    Some(MomentEstimate {
        epsilon,
        mean_pow: mean,
        stderr: (var / k).sqrt(),
        bound,
        ratio: mean / bound,
    })
}

#[derive(Debug, Clone)]
pub struct TailCurveRow {
    pub threshold: BigUint,
    /// Empirical Pr[t ≥ T].
    pub p_emp: f64,
    /// min(1, p(n)·N·φ / T^ε).
    pub bound: f64,
}

/// Tail curve on a log-spaced grid from 1 to twice the maximum observed
/// step count.  `poly_scale` is `p(n)·N·φ`.
pub fn tail_curve(
    steps: &[BigUint],
    epsilon: f64,
    poly_scale: f64,
    grid_points: usize,
) -> Vec<TailCurveRow> {
    if steps.is_empty() || grid_points == 0 {
        return Vec::new();
    }
    let max = steps.iter().max().unwrap().clone();
    let top = (max.to_f64().unwrap_or(f64::MAX) * 2.0).max(2.0);
    let log_top = top.log2();
    let mut grid: Vec<BigUint> = (0..grid_points)
        .map(|j| {
            let x = (j as f64 / (grid_points - 1).max(1) as f64) * log_top;
            BigUint::from(x.exp2().round().max(1.0) as u64)
        })
        .collect();
    grid.dedup();
    grid.iter()
        .map(|t| {
            let hits = steps.iter().filter(|s| *s >= t).count();
            let p_emp = hits as f64 / steps.len() as f64;
            let bound = (poly_scale / pow_eps(t, epsilon)).min(1.0);
            TailCurveRow { threshold: t.clone(), p_emp, bound }
        })
        .collect()
}

/// Markov consistency: for every threshold, the empirical tail mass is at
/// most the sample mean of `t^ε` over `T^ε`.  On the sample itself this is
/// an identity-level inequality; any violation indicates an estimator bug.
pub fn markov_consistent(steps: &[BigUint], epsilon: f64) -> bool {
    let Some(est) = moment_estimate(steps, epsilon, 1.0) else {
        return true;
    };
    let slack = 3.0 * est.stderr + 1e-9;
    let mut thresholds: Vec<&BigUint> = steps.iter().collect();
    thresholds.sort();
    thresholds.dedup();
    thresholds.into_iter().all(|t| {
        let p_emp = steps.iter().filter(|s| *s >= t).count() as f64 / steps.len() as f64;
        p_emp <= (est.mean_pow + slack) / pow_eps(t, epsilon)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn constant_steps_have_unit_mean_for_any_epsilon() {
        let steps = vec![b(1); 50];
        for eps in [0.25, 0.5, 1.0, 2.0] {
            let est = moment_estimate(&steps, eps, 10.0).unwrap();
            assert!((est.mean_pow - 1.0).abs() < 1e-12);
            assert_eq!(est.stderr, 0.0);
        }
    }

    #[test]
    fn two_point_mean_is_the_average() {
        let mut steps = vec![b(1); 500];
        steps.extend(vec![b(1 << 12); 500]);
        let est = moment_estimate(&steps, 1.0, 1.0).unwrap();
        assert!((est.mean_pow - (1.0 + 4096.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn empty_records_are_refused() {
        assert!(moment_estimate(&[], 0.5, 1.0).is_none());
    }

    #[test]
    fn tail_curve_endpoints() {
        let steps: Vec<BigUint> = (1..=100u64).map(b).collect();
        let rows = tail_curve(&steps, 0.5, 1e6, 24);
        let first = &rows[0];
        assert_eq!(first.threshold, b(1));
        assert_eq!(first.p_emp, 1.0);
        assert_eq!(first.bound, 1.0);
        let last = rows.last().unwrap();
        assert!(last.threshold > b(100));
        assert_eq!(last.p_emp, 0.0);
    }

    #[test]
    fn markov_holds_on_arbitrary_samples() {
        let steps: Vec<BigUint> = (0..300u64).map(|i| b((i * i) % 7919 + 1)).collect();
        for eps in [0.3, 0.5, 1.0] {
            assert!(markov_consistent(&steps, eps));
        }
    }

    #[test]
    fn pow_eps_handles_huge_counts() {
        let t = BigUint::from(1u32) << 200u32;
        let x = pow_eps(&t, 0.5);
        assert!((x.log2() - 100.0).abs() < 1e-6);
    }
}
