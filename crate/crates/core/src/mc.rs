//! Seeded Monte Carlo estimation over a [`FadingScenario`].
//!
//! Samples are split into fixed-size blocks. Block `b` is always drawn from
//! stream `b` of the run seed and block results are merged in block order,
//! so estimates are bit-identical for any worker count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::{sample_channel, ChannelStream, FadingScenario};
use crate::rates::ChannelPoint;

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const MIN_SAMPLES: u64 = 100;
/// Minimum number of samples that must satisfy a conditioning event.
pub const MIN_CONDITIONED: u64 = 100;
/// Minimum probability of a conditioning event.
pub const MIN_CONDITION_PROBABILITY: f64 = 1e-4;

/// Draws per random stream; block `i` uses stream `(seed, i)`.
pub const BLOCK_LEN: u64 = 1 << 13;

/// Sample count, seed and worker count for one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McBudget {
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McBudget {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::Domain {
                name: "n_samples",
                value: self.n_samples as f64,
                bound: "[100, inf)",
            });
        }
        if self.workers == 0 {
            return Err(Error::Domain {
                name: "workers",
                value: 0.0,
                bound: "[1, inf)",
            });
        }
        Ok(())
    }
}

impl Default for McBudget {
    fn default() -> Self {
        Self::new(DEFAULT_SAMPLES, 0)
    }
}

/// A Monte Carlo estimate with its standard error and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl MetricEstimate {
    /// An exact value carrying the provenance of the run that produced it.
    pub fn exact(value: f64, budget: &McBudget) -> Self {
        Self {
            value,
            std_error: 0.0,
            n_samples: budget.n_samples,
            seed: budget.seed,
        }
    }

    /// `a * self + b`, with the standard error scaled by `|a|`.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        Self {
            value: a * self.value + b,
            std_error: a.abs() * self.std_error,
            ..*self
        }
    }

    /// True when three standard errors exceed `rel` of the magnitude.
    pub fn is_imprecise(&self, rel: f64) -> bool {
        3.0 * self.std_error > rel * self.value.abs()
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64 / n as f64);
        self.count = n;
    }
}

/// Runs `step` over every sample, one accumulator per block, and returns the
/// accumulators in block order.
fn run_blocks<T, I, S>(
    scenario: &FadingScenario,
    budget: &McBudget,
    init: I,
    step: S,
) -> Result<Vec<T>>
where
    T: Send,
    I: Fn() -> T + Sync,
    S: Fn(&mut T, &ChannelPoint) -> Result<()> + Sync,
{
    budget.validate()?;
    let n_blocks = budget.n_samples.div_ceil(BLOCK_LEN);
    let run_block = |block: u64| -> Result<T> {
        let mut stream = ChannelStream::new(budget.seed, block);
        let start = block * BLOCK_LEN;
        let end = (start + BLOCK_LEN).min(budget.n_samples);
        let mut acc = init();
        for _ in start..end {
            let ch = sample_channel(scenario, &mut stream);
            step(&mut acc, &ch)?;
        }
        Ok(acc)
    };

    let workers = (budget.workers as u64).min(n_blocks).max(1);
    let results: Vec<Result<T>> = if workers == 1 {
        (0..n_blocks).map(run_block).collect()
    } else {
        let mut per_worker: Vec<Vec<(u64, Result<T>)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let run_block = &run_block;
                    scope.spawn(move || {
                        (w..n_blocks)
                            .step_by(workers as usize)
                            .map(|b| (b, run_block(b)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("Monte Carlo worker panicked"))
                .collect()
        });
        let mut ordered: Vec<(u64, Result<T>)> = per_worker.drain(..).flatten().collect();
        ordered.sort_by_key(|(b, _)| *b);
        ordered.into_iter().map(|(_, r)| r).collect()
    };
    results.into_iter().collect()
}

/// Sample mean of `f` over the fading distribution.
pub fn estimate_mean<F>(
    f: F,
    scenario: &FadingScenario,
    budget: &McBudget,
) -> Result<MetricEstimate>
where
    F: Fn(&ChannelPoint) -> f64 + Sync,
{
    let blocks = run_blocks(scenario, budget, Moments::default, |acc, ch| {
        let value = f(ch);
        if !value.is_finite() {
            return Err(Error::NonFinite { point: *ch, value });
        }
        acc.push(value);
        Ok(())
    })?;
    let mut total = Moments::default();
    for b in &blocks {
        total.merge(b);
    }
    let n = total.count as f64;
    let variance = if total.count > 1 {
        (total.m2 / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(MetricEstimate {
        value: total.mean,
        std_error: (variance / n).sqrt(),
        n_samples: budget.n_samples,
        seed: budget.seed,
    })
}

fn bernoulli(hits: u64, trials: u64, budget: &McBudget) -> MetricEstimate {
    let p = hits as f64 / trials as f64;
    MetricEstimate {
        value: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        n_samples: budget.n_samples,
        seed: budget.seed,
    }
}

/// Probability of `event` with the binomial standard error.
pub fn estimate_probability<E>(
    event: E,
    scenario: &FadingScenario,
    budget: &McBudget,
) -> Result<MetricEstimate>
where
    E: Fn(&ChannelPoint) -> bool + Sync,
{
    let blocks = run_blocks(
        scenario,
        budget,
        || 0u64,
        |hits, ch| {
            *hits += u64::from(event(ch));
            Ok(())
        },
    )?;
    Ok(bernoulli(blocks.iter().sum(), budget.n_samples, budget))
}

/// `P(event | condition)` by counting over the samples that satisfy `condition`.
///
/// `n_samples` on the result is the total draw count; the standard error is
/// binomial on the conditioned subsample.
pub fn estimate_conditional<E, C>(
    event: E,
    condition: C,
    scenario: &FadingScenario,
    budget: &McBudget,
) -> Result<MetricEstimate>
where
    E: Fn(&ChannelPoint) -> bool + Sync,
    C: Fn(&ChannelPoint) -> bool + Sync,
{
    let blocks = run_blocks(
        scenario,
        budget,
        || (0u64, 0u64),
        |(hits, cond), ch| {
            if condition(ch) {
                *cond += 1;
                *hits += u64::from(event(ch));
            }
            Ok(())
        },
    )?;
    let (hits, cond) = blocks
        .iter()
        .fold((0, 0), |(h, c), (bh, bc)| (h + bh, c + bc));
    let p_cond = cond as f64 / budget.n_samples as f64;
    if cond < MIN_CONDITIONED || p_cond < MIN_CONDITION_PROBABILITY {
        return Err(Error::InsufficientConditioning {
            hits: cond,
            n_samples: budget.n_samples,
            required: MIN_CONDITIONED,
            min_probability: MIN_CONDITION_PROBABILITY,
        });
    }
    Ok(bernoulli(hits, cond, budget))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_scenario(rho_b: f64, rho_e: f64) -> FadingScenario {
        FadingScenario::rayleigh(rho_b, rho_e, 1, 1).unwrap()
    }

    #[test]
    fn constant_has_zero_error() {
        let s = exp_scenario(1.0, 1.0);
        let e = estimate_mean(|_| 0.375, &s, &McBudget::new(50_000, 3)).unwrap();
        assert_eq!(e.value, 0.375);
        assert_eq!(e.std_error, 0.0);
        assert_eq!((e.n_samples, e.seed), (50_000, 3));
    }

    #[test]
    fn exponential_tail_indicator() {
        let (rho, mu) = (4.0, 3.0);
        let s = exp_scenario(rho, 1.0);
        let budget = McBudget::new(400_000, 1);
        let e = estimate_mean(|c| f64::from(u8::from(c.gamma_b() > mu)), &s, &budget).unwrap();
        let exact = (-mu / rho).exp();
        assert!(
            (e.value - exact).abs() < 3.0 * e.std_error,
            "{e:?} vs {exact}"
        );
        let p = estimate_probability(|c| c.gamma_b() > mu, &s, &budget).unwrap();
        assert!((p.value - e.value).abs() < 1e-12);
    }

    #[test]
    fn trivial_probabilities() {
        let s = exp_scenario(2.0, 2.0);
        let b = McBudget::new(10_000, 9);
        assert_eq!(estimate_probability(|_| true, &s, &b).unwrap().value, 1.0);
        assert_eq!(
            estimate_probability(|c| c.gamma_b() > 0.0, &s, &b)
                .unwrap()
                .value,
            1.0
        );
        let sym = estimate_probability(
            |c| c.gamma_b() > c.gamma_e(),
            &s,
            &McBudget::new(200_000, 9),
        )
        .unwrap();
        assert!((sym.value - 0.5).abs() < 3.0 * sym.std_error);
    }

    #[test]
    fn conditional_cases() {
        let (rho, mu) = (2.0, 1.5);
        let s = exp_scenario(rho, 2.0);
        let b = McBudget::new(400_000, 21);
        let sup =
            estimate_conditional(|c| c.gamma_b() > 0.5 * mu, |c| c.gamma_b() > mu, &s, &b).unwrap();
        assert_eq!(sup.value, 1.0);

        let memoryless =
            estimate_conditional(|c| c.gamma_b() > 2.0 * mu, |c| c.gamma_b() > mu, &s, &b).unwrap();
        let exact = (-mu / rho).exp();
        assert!((memoryless.value - exact).abs() < 3.0 * memoryless.std_error);

        let indep =
            estimate_conditional(|c| c.gamma_e() > 1.0, |c| c.gamma_b() > mu, &s, &b).unwrap();
        let uncond = (-1.0f64 / 2.0).exp();
        assert!((indep.value - uncond).abs() < 3.0 * indep.std_error);
    }

    #[test]
    fn rare_condition_is_rejected() {
        let s = exp_scenario(1.0, 1.0);
        let err = estimate_conditional(
            |_| true,
            |c| c.gamma_b() > 12.0,
            &s,
            &McBudget::new(10_000, 1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InsufficientConditioning { .. }));
    }

    #[test]
    fn non_finite_integrand_reports_point() {
        let s = FadingScenario::point_mass(2.0, 1.0).unwrap();
        let err = estimate_mean(
            |c| c.gamma_e().ln() / (c.gamma_b() - 2.0),
            &s,
            &McBudget::new(100, 0),
        )
        .unwrap_err();
        match err {
            Error::NonFinite { point, .. } => assert_eq!(point.gamma_b(), 2.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn budget_is_validated() {
        let s = exp_scenario(1.0, 1.0);
        assert!(estimate_mean(|_| 1.0, &s, &McBudget::new(99, 0)).is_err());
        assert!(estimate_mean(|_| 1.0, &s, &McBudget::new(1000, 0).with_workers(0)).is_err());
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let s = FadingScenario::rayleigh(3.0, 1.0, 2, 2).unwrap();
        let f = |c: &ChannelPoint| (1.0 + c.gamma_b()).ln() - (1.0 + c.gamma_e()).ln();
        let base = estimate_mean(f, &s, &McBudget::new(100_003, 77)).unwrap();
        for w in [2, 3, 8] {
            let e = estimate_mean(f, &s, &McBudget::new(100_003, 77).with_workers(w)).unwrap();
            assert_eq!(e.value.to_bits(), base.value.to_bits());
            assert_eq!(e.std_error.to_bits(), base.std_error.to_bits());
        }
    }

    #[test]
    fn std_error_scales_with_root_n() {
        let s = exp_scenario(1.0, 1.0);
        for seed in 0..4 {
            let small = estimate_mean(|c| c.gamma_b(), &s, &McBudget::new(50_000, seed)).unwrap();
            let big = estimate_mean(|c| c.gamma_b(), &s, &McBudget::new(200_000, seed)).unwrap();
            let ratio = small.std_error / big.std_error;
            assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
        }
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - whole.mean).abs() < 1e-14);
        assert!((a.m2 - whole.m2).abs() < 1e-10);
    }
}
