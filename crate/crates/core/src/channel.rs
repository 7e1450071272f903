//! Fiber-channel and threshold-detector model.
//!
//! Per basis there are two threshold detectors, one per eigenstate. A pulse
//! of intensity λ arrives as a Poisson photon number thinned by the system
//! transmittance; each surviving photon projects onto a detector by the
//! Born rule. Dark counts fire either detector independently, double clicks
//! resolve by a fair coin, and basis misalignment flips the decoded logic
//! bit of a conclusive event with probability `e_mis`.
//!
//! `expected_stats` evaluates the per-pulse click/conclusive/error rates in
//! closed form by exhaustive enumeration over (sent state, assigned set,
//! measurement basis, detector events); `sample_detection` draws one pulse
//! for the Monte Carlo engine from the same distribution.

use num_rational::Ratio;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{
    born_probability, classify_outcome, sets_containing, Axis, IntensityLabel, LogicBit,
    MeasurementOutcome, QubitState, Sign,
};
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("parameter {name} = {value} outside its valid range")]
    OutOfRange { name: &'static str, value: f64 },
}

/// Physical channel and detector parameters, symmetric across recipients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams<F: Real> {
    pub distance_km: F,
    pub alpha_db_per_km: F,
    pub eta_det: F,
    pub p_dark: F,
    pub e_mis: F,
}

impl<F: Real> ChannelParams<F> {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |name: &'static str, value: F| ChannelError::OutOfRange {
            name,
            value: value.to_f64().unwrap_or(f64::NAN),
        };
        if !(self.distance_km >= F::zero()) {
            return Err(bad("distance_km", self.distance_km));
        }
        if !(self.alpha_db_per_km >= F::zero()) {
            return Err(bad("alpha_db_per_km", self.alpha_db_per_km));
        }
        if !(self.eta_det > F::zero() && self.eta_det <= F::one()) {
            return Err(bad("eta_det", self.eta_det));
        }
        if !(self.p_dark >= F::zero() && self.p_dark < F::one()) {
            return Err(bad("p_dark", self.p_dark));
        }
        if !(self.e_mis >= F::zero() && self.e_mis < F::half()) {
            return Err(bad("e_mis", self.e_mis));
        }
        Ok(())
    }

    /// System transmittance: detector efficiency times fiber attenuation.
    pub fn eta_sys(&self) -> F {
        let exponent = -self.alpha_db_per_km * self.distance_km / F::of(10.0);
        self.eta_det * F::of(10.0).powf(exponent)
    }
}

/// Per-pulse probability that at least one detector fires:
/// `D_λ = 1 − (1−p_dark)² · exp(−λ·η_sys)`.
pub fn click_probability<F: Real>(lambda: F, ch: &ChannelParams<F>) -> F {
    let no_dark = F::one() - ch.p_dark;
    F::one() - no_dark * no_dark * (-lambda * ch.eta_sys()).exp()
}

/// Per-pulse rates for one intensity: click, conclusive and conclusive-error
/// probabilities, averaged over Alice's uniform state/set choice and the
/// receiver's uniform basis choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseRates<F: Real> {
    pub click: F,
    pub conclusive: F,
    pub conclusive_error: F,
}

/// Exhaustive enumeration of the detector model for intensity `lambda`.
pub fn pulse_rates<F: Real>(lambda: F, ch: &ChannelParams<F>) -> PulseRates<F> {
    let eta = ch.eta_sys();
    let mean = lambda * eta;
    let no_dark = F::one() - ch.p_dark;

    let mut click = F::zero();
    let mut conclusive = F::zero();
    let mut error = F::zero();

    let state_w = F::of(1.0 / 6.0);
    let set_w = F::of(0.25);
    let basis_w = F::of(1.0 / 3.0);

    for sent in QubitState::ALL {
        for set in sets_containing(sent) {
            let encoded = set.bit_of(sent).expect("sent state is a member");
            for basis in Axis::ALL {
                let w = state_w * set_w * basis_w;
                let plus = QubitState::new(basis, Sign::Plus);
                let minus = QubitState::new(basis, Sign::Minus);
                // Exact Born weights (0, 1/2 or 1) for the photon stream.
                let q_plus = ratio_to_scalar::<F>(born_probability(sent, plus));
                let q_minus = F::one() - q_plus;

                // Detector fires on photons or darks, independently.
                let fire_plus = F::one() - no_dark * (-mean * q_plus).exp();
                let fire_minus = F::one() - no_dark * (-mean * q_minus).exp();

                let p_no_click = (F::one() - fire_plus) * (F::one() - fire_minus);
                click += w * (F::one() - p_no_click);

                let both = fire_plus * fire_minus;
                let out_plus = fire_plus * (F::one() - fire_minus) + both * F::half();
                let out_minus = fire_minus * (F::one() - fire_plus) + both * F::half();

                for (outcome, p_out) in [(plus, out_plus), (minus, out_minus)] {
                    let bit = classify_outcome(&set, outcome);
                    if bit.is_conclusive() {
                        conclusive += w * p_out;
                        // Misalignment flips the decoded bit of a conclusive
                        // event with probability e_mis.
                        let wrong = if bit == encoded { ch.e_mis } else { F::one() - ch.e_mis };
                        error += w * p_out * wrong;
                    }
                }
            }
        }
    }

    PulseRates {
        click,
        conclusive,
        conclusive_error: error,
    }
}

fn ratio_to_scalar<F: Real>(r: Ratio<u32>) -> F {
    F::of(f64::from(*r.numer()) / f64::from(*r.denom()))
}

/// Expected counts for one intensity at a given pulse budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityStats<F: Real> {
    /// Pulses sent with this intensity: N · p_λ.
    pub pulses: F,
    /// Expected clicks n_λ.
    pub clicks: F,
    /// Expected conclusive results n^c_λ.
    pub conclusive: F,
    /// Expected conclusive errors m^c_λ.
    pub conclusive_errors: F,
}

/// Expected detection statistics per intensity for one recipient. Channels
/// are symmetric, so one value serves every recipient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats<F: Real> {
    pub mu: IntensityStats<F>,
    pub nu: IntensityStats<F>,
    pub vacuum: IntensityStats<F>,
}

impl<F: Real> ChannelStats<F> {
    pub fn of(&self, label: IntensityLabel) -> &IntensityStats<F> {
        match label {
            IntensityLabel::Mu => &self.mu,
            IntensityLabel::Nu => &self.nu,
            IntensityLabel::Vacuum => &self.vacuum,
        }
    }
}

/// Source configuration: the two decoy intensities and the emission
/// probabilities of μ, ν and vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams<F: Real> {
    pub mu: F,
    pub nu: F,
    pub p_mu: F,
    pub p_nu: F,
}

impl<F: Real> SourceParams<F> {
    pub fn p_vacuum(&self) -> F {
        F::one() - self.p_mu - self.p_nu
    }

    pub fn intensity_value(&self, label: IntensityLabel) -> F {
        match label {
            IntensityLabel::Mu => self.mu,
            IntensityLabel::Nu => self.nu,
            IntensityLabel::Vacuum => F::zero(),
        }
    }

    pub fn probability(&self, label: IntensityLabel) -> F {
        match label {
            IntensityLabel::Mu => self.p_mu,
            IntensityLabel::Nu => self.p_nu,
            IntensityLabel::Vacuum => self.p_vacuum(),
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |name: &'static str, value: F| ChannelError::OutOfRange {
            name,
            value: value.to_f64().unwrap_or(f64::NAN),
        };
        if !(self.mu > self.nu) {
            return Err(bad("mu", self.mu));
        }
        if !(self.nu > F::zero()) {
            return Err(bad("nu", self.nu));
        }
        if !(self.p_mu > F::zero() && self.p_nu > F::zero()) {
            return Err(bad("p_mu", self.p_mu));
        }
        if !(self.p_vacuum() > F::zero()) {
            return Err(bad("p_vacuum", self.p_vacuum()));
        }
        Ok(())
    }
}

/// Closed-form expected statistics for a pulse budget of `pulses` per
/// recipient sequence.
pub fn expected_stats<F: Real>(
    pulses: F,
    source: &SourceParams<F>,
    ch: &ChannelParams<F>,
) -> ChannelStats<F> {
    let one = |label: IntensityLabel| {
        let lambda = source.intensity_value(label);
        let p = source.probability(label);
        let rates = pulse_rates(lambda, ch);
        let n_pulses = pulses * p;
        IntensityStats {
            pulses: n_pulses,
            clicks: n_pulses * rates.click,
            conclusive: n_pulses * rates.conclusive,
            conclusive_errors: n_pulses * rates.conclusive_error,
        }
    };
    ChannelStats {
        mu: one(IntensityLabel::Mu),
        nu: one(IntensityLabel::Nu),
        vacuum: one(IntensityLabel::Vacuum),
    }
}

/// Draw one detection: Poisson photon number, per-photon loss, Born-rule
/// projection, dark counts, double-click coin. Returns the observed
/// eigenstate of the measured basis, or no click.
///
/// Misalignment is not applied here; it acts on the decoded logic bit of
/// conclusive events (see [`flip_for_misalignment`]).
pub fn sample_detection<R: Rng + ?Sized>(
    sent: QubitState,
    lambda: f64,
    basis: Axis,
    ch: &ChannelParams<f64>,
    rng: &mut R,
) -> MeasurementOutcome {
    let plus = QubitState::new(basis, Sign::Plus);
    let q_plus = {
        let r = born_probability(sent, plus);
        f64::from(*r.numer()) / f64::from(*r.denom())
    };

    let photons = if lambda > 0.0 {
        Poisson::new(lambda).expect("positive intensity").sample(rng) as u64
    } else {
        0
    };

    let mut hit_plus = false;
    let mut hit_minus = false;
    for _ in 0..photons {
        if rng.gen::<f64>() < ch.eta_sys() {
            if rng.gen::<f64>() < q_plus {
                hit_plus = true;
            } else {
                hit_minus = true;
            }
        }
    }
    let fire_plus = hit_plus || rng.gen::<f64>() < ch.p_dark;
    let fire_minus = hit_minus || rng.gen::<f64>() < ch.p_dark;

    match (fire_plus, fire_minus) {
        (false, false) => MeasurementOutcome::no_click(),
        (true, false) => MeasurementOutcome::click(plus),
        (false, true) => MeasurementOutcome::click(plus.antipode()),
        (true, true) => {
            let s = if rng.gen::<bool>() { plus } else { plus.antipode() };
            MeasurementOutcome::click(s)
        }
    }
}

/// Apply misalignment to a decoded logic bit: conclusive bits flip with
/// probability `e_mis`, inconclusive results are unaffected.
pub fn flip_for_misalignment<R: Rng + ?Sized>(
    bit: LogicBit,
    e_mis: f64,
    rng: &mut R,
) -> LogicBit {
    if bit.is_conclusive() && rng.gen::<f64>() < e_mis {
        bit.flipped()
    } else {
        bit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn channel(e_mis: f64, p_dark: f64) -> ChannelParams<f64> {
        ChannelParams {
            distance_km: 100.0,
            alpha_db_per_km: 0.16,
            eta_det: 0.93,
            p_dark,
            e_mis,
        }
    }

    #[test]
    fn eta_sys_combines_detector_and_fiber() {
        let ch = channel(0.0, 0.0);
        let expect = 0.93 * 10f64.powf(-0.16 * 100.0 / 10.0);
        assert!((ch.eta_sys() - expect).abs() < 1e-15);
    }

    #[test]
    fn click_probability_vacuum_limits() {
        let ch = channel(0.0, 0.0);
        assert_eq!(click_probability(0.0, &ch), 0.0);
        let ch = channel(0.0, 1e-7);
        let d0 = click_probability(0.0, &ch);
        assert!((d0 - (1.0 - (1.0 - 1e-7f64).powi(2))).abs() < 1e-18);
    }

    #[test]
    fn click_probability_monotone() {
        let ch = channel(0.0, 1e-7);
        let mut prev = 0.0;
        for i in 1..=10 {
            let d = click_probability(0.1 * f64::from(i), &ch);
            assert!(d > prev);
            prev = d;
        }
        // Monotone in p_dark and in eta (via distance).
        assert!(click_probability(0.5, &channel(0.0, 1e-3)) > click_probability(0.5, &channel(0.0, 1e-7)));
        let near = ChannelParams { distance_km: 10.0, ..channel(0.0, 1e-7) };
        assert!(click_probability(0.5, &near) > click_probability(0.5, &channel(0.0, 1e-7)));
    }

    #[test]
    fn noiseless_conclusive_fraction_is_exactly_one_sixth() {
        let ch = channel(0.0, 0.0);
        for lambda in [0.05, 0.3, 0.7, 2.0] {
            let r = pulse_rates(lambda, &ch);
            assert!(
                (r.conclusive / r.click - 1.0 / 6.0).abs() < 1e-15,
                "λ={lambda}: fraction {}",
                r.conclusive / r.click
            );
            assert_eq!(r.conclusive_error, 0.0);
        }
    }

    #[test]
    fn misalignment_error_rate_matches_flip_model() {
        // With bit flips on conclusive events and no darks, the conclusive
        // error fraction equals e_mis exactly.
        let ch = channel(0.005, 0.0);
        let r = pulse_rates(0.4, &ch);
        assert!((r.conclusive_error / r.conclusive - 0.005).abs() < 1e-15);
    }

    #[test]
    fn dark_only_pulses_are_conclusive_one_third_and_wrong_half() {
        let ch = channel(0.0, 1e-4);
        let r = pulse_rates(0.0, &ch);
        // A dark click lands on a uniformly random eigenstate; 2 of 6 are
        // conclusive for any set, and those decode to the wrong bit half
        // the time.
        assert!((r.conclusive / r.click - 1.0 / 3.0).abs() < 1e-6);
        assert!((r.conclusive_error / r.conclusive - 0.5).abs() < 1e-6);
    }

    #[test]
    fn stats_respect_count_ordering() {
        let ch = channel(0.005, 1e-7);
        let source = SourceParams { mu: 0.5, nu: 0.1, p_mu: 0.5, p_nu: 0.3 };
        let stats = expected_stats(1e9, &source, &ch);
        for label in IntensityLabel::ALL {
            let s = stats.of(label);
            assert!(s.conclusive_errors <= s.conclusive);
            assert!(s.conclusive <= s.clicks);
            assert!(s.clicks <= s.pulses);
        }
        assert!((stats.mu.pulses - 5e8).abs() < 1.0);
    }

    #[test]
    fn source_validation() {
        assert!(SourceParams { mu: 0.5, nu: 0.1, p_mu: 0.5, p_nu: 0.3 }.validate().is_ok());
        assert!(SourceParams { mu: 0.1, nu: 0.5, p_mu: 0.5, p_nu: 0.3 }.validate().is_err());
        assert!(SourceParams { mu: 0.5, nu: 0.1, p_mu: 0.7, p_nu: 0.3 }.validate().is_err());
    }

    #[test]
    fn sample_detection_degenerate_cases() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let ch = ChannelParams { distance_km: 0.0, eta_det: 1.0, ..channel(0.0, 0.0) };
        let sent = QubitState::new(Axis::X, Sign::Plus);
        // Vacuum and no darks never click.
        for _ in 0..100 {
            let out = sample_detection(sent, 0.0, Axis::X, &ch, &mut rng);
            assert!(!out.clicked);
        }
        // Huge intensity, unit efficiency, matching basis: always the sent state.
        for _ in 0..100 {
            let out = sample_detection(sent, 50.0, Axis::X, &ch, &mut rng);
            assert_eq!(out.state, Some(sent));
        }
    }
}
