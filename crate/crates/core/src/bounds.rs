//! Finite-sample tail bounds.
//!
//! Three tools cover every statistical statement in the pipeline:
//! a variant Chernoff interval that converts an observed count into bounds
//! on its expectation, a Chernoff tail for threshold-crossing probabilities,
//! and a Serfling-style deviation bound for random sampling without
//! replacement.

use crate::scalar::Real;

/// Failure probabilities of the two bound families: `eps1` for each Chernoff
/// application, `eps2` for the sampling-without-replacement step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceParams<F: Real> {
    pub eps1: F,
    pub eps2: F,
}

impl<F: Real> ConfidenceParams<F> {
    pub fn new(eps1: F, eps2: F) -> Self {
        assert!(
            eps1 > F::zero() && eps1 < F::one(),
            "eps1 must lie in (0,1), got {eps1}"
        );
        assert!(
            eps2 > F::zero() && eps2 < F::one(),
            "eps2 must lie in (0,1), got {eps2}"
        );
        ConfidenceParams { eps1, eps2 }
    }
}

fn beta_of<F: Real>(eps1: F) -> F {
    assert!(
        eps1 > F::zero() && eps1 < F::one(),
        "failure probability must lie in (0,1), got {eps1}"
    );
    eps1.recip().ln()
}

/// Upper bound on the expectation behind an observed count `a`:
/// `a + β + sqrt(2βa + β²)` with `β = ln(1/eps1)`.
pub fn chernoff_upper<F: Real>(a: F, eps1: F) -> F {
    assert!(a >= F::zero(), "observed count must be nonnegative, got {a}");
    let beta = beta_of(eps1);
    a + beta + (F::two() * beta * a + beta * beta).sqrt()
}

/// Lower bound on the expectation behind an observed count `a`:
/// `a − β/2 − sqrt(2βa + β²/4)`, clamped at zero.
pub fn chernoff_lower<F: Real>(a: F, eps1: F) -> F {
    assert!(a >= F::zero(), "observed count must be nonnegative, got {a}");
    let beta = beta_of(eps1);
    let raw = a - beta * F::half() - (F::two() * beta * a + beta * beta / F::of(4.0)).sqrt();
    raw.max(F::zero())
}

/// Probability that `trials` Bernoulli events with per-trial rate
/// `expected_rate` produce an empirical rate at or below `threshold`:
/// `exp[−(E−T)²·n / (2E)]`.
///
/// A threshold at or above the expected rate gives no protection; the
/// configuration is insecure and the probability saturates at 1.
pub fn chernoff_tail<F: Real>(expected_rate: F, threshold: F, trials: F) -> F {
    assert!(trials >= F::zero(), "trial count must be nonnegative");
    assert!(threshold >= F::zero() && expected_rate <= F::one());
    if threshold >= expected_rate || trials == F::zero() || expected_rate <= F::zero() {
        return F::one();
    }
    let gap = expected_rate - threshold;
    (-(gap * gap) * trials / (F::two() * expected_rate)).exp()
}

/// Deviation bound for random sampling without replacement: with probability
/// at least `1 − eps2`, the rate on the unsampled portion of a population of
/// size `population` exceeds the rate observed on a sample of size `sample`
/// by less than the returned `γ`:
///
/// `γ = sqrt( ln(1/eps2) · n(k+1) / (2k²(n−k)) )`.
pub fn sampling_deviation<F: Real>(population: F, sample: F, eps2: F) -> F {
    assert!(
        sample > F::zero() && sample < population,
        "sample must satisfy 0 < sample < population, got {sample} of {population}"
    );
    let ln_term = beta_of(eps2);
    let n = population;
    let k = sample;
    (ln_term * n * (k + F::one()) / (F::two() * k * k * (n - k))).sqrt()
}

/// Upper bound on the untested-portion rate implied by the observed sample
/// rate at confidence `1 − eps2`.
pub fn untested_rate_bound<F: Real>(
    observed_rate: F,
    population: F,
    sample: F,
    eps2: F,
) -> F {
    observed_rate + sampling_deviation(population, sample, eps2)
}

/// Inversion of [`sampling_deviation`]: the failure probability at which the
/// untested-portion rate exceeds the sampled rate by `gap` or more.
pub fn sampling_tail<F: Real>(gap: F, population: F, sample: F) -> F {
    assert!(sample > F::zero() && sample < population);
    if gap <= F::zero() {
        return F::one();
    }
    let n = population;
    let k = sample;
    let exponent = gap * gap * F::two() * k * k * (n - k) / (n * (k + F::one()));
    (-exponent).exp().min(F::one())
}

/// Chernoff interval machinery with an application tally.
///
/// Every starred (expectation-bounded) quantity in the estimation chain goes
/// through one of these calls, so the tally at the end of a full evaluation
/// is exactly the multiplier of `eps1` in the total security budget.
#[derive(Debug, Clone)]
pub struct ChernoffBounder<F: Real> {
    eps1: F,
    applications: u32,
}

impl<F: Real> ChernoffBounder<F> {
    pub fn new(eps1: F) -> Self {
        assert!(eps1 > F::zero() && eps1 < F::one());
        ChernoffBounder {
            eps1,
            applications: 0,
        }
    }

    pub fn eps1(&self) -> F {
        self.eps1
    }

    pub fn applications(&self) -> u32 {
        self.applications
    }

    /// Upper bound on the expectation of observed count `a`.
    pub fn upper(&mut self, a: F) -> F {
        self.applications += 1;
        chernoff_upper(a, self.eps1)
    }

    /// Lower bound on the expectation of observed count `a`.
    pub fn lower(&mut self, a: F) -> F {
        self.applications += 1;
        chernoff_lower(a, self.eps1)
    }

    /// Lower bound on a realized count given a bound on its expectation.
    /// Same fluctuation scale as [`Self::lower`], applied in the opposite
    /// direction (expectation → observation).
    pub fn realized_lower(&mut self, expectation: F) -> F {
        self.applications += 1;
        chernoff_lower(expectation, self.eps1)
    }
}
