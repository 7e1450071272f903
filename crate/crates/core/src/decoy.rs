//! Two-intensity decoy-state estimation of single-photon and k-photon
//! counts, k = M−1.
//!
//! Observed counts enter through the variant Chernoff interval first (the
//! starred quantities), then the linear decoy combinations bound the
//! single-photon contributions, and the per-recipient single-photon
//! fractions multiply into the k-photon bounds. The bit error rate of the
//! k-photon component is the ratio of the error upper bound to the
//! conclusive lower bound.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::ChernoffBounder;
use crate::channel::{ChannelStats, SourceParams};
use crate::protocol::IntensityLabel;
use crate::scalar::Real;

/// Number of participants. The protocol is defined for three, four and
/// five parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartyCount {
    Three,
    Four,
    Five,
}

impl PartyCount {
    pub fn from_u8(m: u8) -> Option<PartyCount> {
        match m {
            3 => Some(PartyCount::Three),
            4 => Some(PartyCount::Four),
            5 => Some(PartyCount::Five),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            PartyCount::Three => 3,
            PartyCount::Four => 4,
            PartyCount::Five => 5,
        }
    }

    /// Photon-number component that counts as secure: k = M−1.
    pub fn k(self) -> u8 {
        self.as_u8() - 1
    }

    /// Multiplier of eps1 in the total security budget.
    pub fn chernoff_coefficient(self) -> u32 {
        match self {
            PartyCount::Three => 11,
            PartyCount::Four => 17,
            PartyCount::Five => 23,
        }
    }

    /// Recipients other than the estimation reference (Charlie) whose
    /// single-photon fractions enter the k-photon products.
    pub fn omega(self) -> &'static [RecipientId] {
        match self {
            PartyCount::Three => &[RecipientId::Bob],
            PartyCount::Four => &[RecipientId::Bob, RecipientId::David],
            PartyCount::Five => &[RecipientId::Bob, RecipientId::David, RecipientId::Emery],
        }
    }

    /// All recipients, authenticator first.
    pub fn recipients(self) -> &'static [RecipientId] {
        match self {
            PartyCount::Three => &[RecipientId::Bob, RecipientId::Charlie],
            PartyCount::Four => &[RecipientId::Bob, RecipientId::Charlie, RecipientId::David],
            PartyCount::Five => &[
                RecipientId::Bob,
                RecipientId::Charlie,
                RecipientId::David,
                RecipientId::Emery,
            ],
        }
    }

    /// Verifiers: every recipient except the authenticator.
    pub fn verifiers(self) -> &'static [RecipientId] {
        &self.recipients()[1..]
    }
}

/// Recipient identity. Bob authenticates; Charlie, David and Emery verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RecipientId {
    Bob,
    Charlie,
    David,
    Emery,
}

impl RecipientId {
    pub fn name(self) -> &'static str {
        match self {
            RecipientId::Bob => "bob",
            RecipientId::Charlie => "charlie",
            RecipientId::David => "david",
            RecipientId::Emery => "emery",
        }
    }
}

/// Observed counts for one recipient and one intensity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntensityCounts<F: Real> {
    pub clicks: F,
    pub conclusive: F,
    pub conclusive_errors: F,
}

/// Observed counts for one recipient across the three intensities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RecipientCounts<F: Real> {
    pub mu: IntensityCounts<F>,
    pub nu: IntensityCounts<F>,
    pub vacuum: IntensityCounts<F>,
}

impl<F: Real> RecipientCounts<F> {
    pub fn of(&self, label: IntensityLabel) -> &IntensityCounts<F> {
        match label {
            IntensityLabel::Mu => &self.mu,
            IntensityLabel::Nu => &self.nu,
            IntensityLabel::Vacuum => &self.vacuum,
        }
    }

    pub fn of_mut(&mut self, label: IntensityLabel) -> &mut IntensityCounts<F> {
        match label {
            IntensityLabel::Mu => &mut self.mu,
            IntensityLabel::Nu => &mut self.nu,
            IntensityLabel::Vacuum => &mut self.vacuum,
        }
    }

    pub fn from_stats(stats: &ChannelStats<F>) -> Self {
        let conv = |label: IntensityLabel| {
            let s = stats.of(label);
            IntensityCounts {
                clicks: s.clicks,
                conclusive: s.conclusive,
                conclusive_errors: s.conclusive_errors,
            }
        };
        RecipientCounts {
            mu: conv(IntensityLabel::Mu),
            nu: conv(IntensityLabel::Nu),
            vacuum: conv(IntensityLabel::Vacuum),
        }
    }
}

/// Everything the estimators consume: per-recipient observed counts plus
/// the source configuration they were produced under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoyInputs<F: Real> {
    pub m: PartyCount,
    pub source: SourceParams<F>,
    pub bob: RecipientCounts<F>,
    pub charlie: RecipientCounts<F>,
    pub david: Option<RecipientCounts<F>>,
    pub emery: Option<RecipientCounts<F>>,
}

impl<F: Real> DecoyInputs<F> {
    /// Symmetric inputs where every recipient observed the same expected
    /// counts; the analytic pipeline uses this.
    pub fn symmetric(m: PartyCount, source: SourceParams<F>, counts: RecipientCounts<F>) -> Self {
        DecoyInputs {
            m,
            source,
            bob: counts,
            charlie: counts,
            david: matches!(m, PartyCount::Four | PartyCount::Five).then_some(counts),
            emery: matches!(m, PartyCount::Five).then_some(counts),
        }
    }

    pub fn recipient(&self, id: RecipientId) -> &RecipientCounts<F> {
        match id {
            RecipientId::Bob => &self.bob,
            RecipientId::Charlie => &self.charlie,
            RecipientId::David => self.david.as_ref().expect("David requires M >= 4"),
            RecipientId::Emery => self.emery.as_ref().expect("Emery requires M = 5"),
        }
    }

    pub fn recipient_mut(&mut self, id: RecipientId) -> &mut RecipientCounts<F> {
        match id {
            RecipientId::Bob => &mut self.bob,
            RecipientId::Charlie => &mut self.charlie,
            RecipientId::David => self.david.as_mut().expect("David requires M >= 4"),
            RecipientId::Emery => self.emery.as_mut().expect("Emery requires M = 5"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DecoyError {
    #[error("decoy intensities must satisfy mu > nu > 0 (mu = {mu}, nu = {nu})")]
    InvalidIntensityOrdering { mu: f64, nu: f64 },
    #[error("insufficient statistics: {quantity} bound is not positive")]
    InsufficientStatistics { quantity: &'static str },
}

fn check_ordering<F: Real>(source: &SourceParams<F>) -> Result<(), DecoyError> {
    if source.mu <= source.nu || source.nu <= F::zero() {
        return Err(DecoyError::InvalidIntensityOrdering {
            mu: source.mu.to_f64().unwrap_or(f64::NAN),
            nu: source.nu.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Chernoff-bounded expectations of one recipient's counts — the starred
/// symbols feeding the linear estimators. Each field is one application of
/// the bound, so building this struct advances the eps1 tally by five (and
/// by four for the conclusive family, which needs no lower ν or upper μ
/// click bounds).
#[derive(Debug, Clone, Copy)]
struct StarredClicks<F: Real> {
    mu_upper: F,
    mu_lower: F,
    nu_upper: F,
    nu_lower: F,
    vacuum_lower: F,
}

impl<F: Real> StarredClicks<F> {
    fn of(counts: &RecipientCounts<F>, bounder: &mut ChernoffBounder<F>) -> Self {
        StarredClicks {
            mu_upper: bounder.upper(counts.mu.clicks),
            mu_lower: bounder.lower(counts.mu.clicks),
            nu_upper: bounder.upper(counts.nu.clicks),
            nu_lower: bounder.lower(counts.nu.clicks),
            vacuum_lower: bounder.lower(counts.vacuum.clicks),
        }
    }
}

/// Lower bound on conclusive single-photon events in the reference
/// recipient's μ string, from the conclusive-count decoy combination.
pub fn s1_conclusive_lower<F: Real>(
    inputs: &DecoyInputs<F>,
    bounder: &mut ChernoffBounder<F>,
) -> Result<F, DecoyError> {
    check_ordering(&inputs.source)?;
    let c = &inputs.charlie;
    let nu_lower = bounder.lower(c.nu.conclusive);
    let mu_upper = bounder.upper(c.mu.conclusive);
    let vac_lower = bounder.lower(c.vacuum.conclusive);
    Ok(s1_lower_combination(&inputs.source, nu_lower, mu_upper, vac_lower))
}

/// The shared linear combination behind the single-photon lower bounds:
/// `(p_μ e^{−μ} / (ν(μ−ν))) · (μ² e^{ν} x_ν/p_ν − ν² e^{μ} x_μ/p_μ + (ν²−μ²) x_0/p_0)`,
/// clamped at zero.
fn s1_lower_combination<F: Real>(source: &SourceParams<F>, x_nu: F, x_mu: F, x_vac: F) -> F {
    let mu = source.mu;
    let nu = source.nu;
    let prefactor = source.p_mu * (-mu).exp() / (nu * (mu - nu));
    let term = mu * mu * nu.exp() * x_nu / source.p_nu - nu * nu * mu.exp() * x_mu / source.p_mu
        + (nu * nu - mu * mu) * x_vac / source.p_vacuum();
    (prefactor * term).max(F::zero())
}

/// Upper-bound combination for single-photon events:
/// `(p_μ μ e^{−μ}/ν) (e^{ν} x_ν/p_ν − x_0/p_0)`, clamped at zero.
fn s1_upper_combination<F: Real>(source: &SourceParams<F>, x_nu: F, x_vac: F) -> F {
    let prefactor = source.p_mu * source.mu * (-source.mu).exp() / source.nu;
    let term = source.nu.exp() * x_nu / source.p_nu - x_vac / source.p_vacuum();
    (prefactor * term).max(F::zero())
}

/// Lower and upper bounds on single-photon click events in one recipient's
/// μ string.
pub fn s1_total_bounds<F: Real>(
    source: &SourceParams<F>,
    stars: (F, F, F, F),
) -> (F, F) {
    let (nu_lower, nu_upper, mu_upper, vacuum_lower) = stars;
    let lower = s1_lower_combination(source, nu_lower, mu_upper, vacuum_lower);
    let upper = s1_upper_combination(source, nu_upper, vacuum_lower);
    (lower, upper)
}

/// Upper bound on single-photon error events among the reference
/// recipient's conclusive μ results: vacuum conclusive events err half the
/// time, hence the halved subtraction.
fn t1_conclusive_upper<F: Real>(
    inputs: &DecoyInputs<F>,
    bounder: &mut ChernoffBounder<F>,
) -> F {
    let c = &inputs.charlie;
    let err_nu_upper = bounder.upper(c.nu.conclusive_errors);
    let vac_conclusive_lower = bounder.lower(c.vacuum.conclusive);
    let source = &inputs.source;
    let prefactor = source.p_mu * source.mu * (-source.mu).exp() / source.nu;
    let term = source.nu.exp() * err_nu_upper / source.p_nu
        - vac_conclusive_lower / (F::two() * source.p_vacuum());
    (prefactor * term).max(F::zero())
}

/// k-photon estimates for the reference recipient: conclusive-count lower
/// bound, error-count upper bound and the implied bit error rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KPhotonEstimate<F: Real> {
    /// Lower bound on events where every recipient's pulse was
    /// single-photon and the reference recipient was conclusive.
    pub s_ck_conclusive: F,
    /// Upper bound on the error subset of those events.
    pub t_ck_error: F,
    /// Bit error rate of the k-photon component.
    pub e_b: F,
    /// Per-recipient single-photon fraction bounds used in the products,
    /// recorded for the pipeline's count conversions.
    pub fraction_lower_product: F,
}

/// Full estimation chain, Chernoff-starred throughout. On symmetric honest
/// statistics the bounds bracket the true Poisson-mixture counts.
pub fn k_photon_estimate<F: Real>(
    inputs: &DecoyInputs<F>,
    bounder: &mut ChernoffBounder<F>,
) -> Result<KPhotonEstimate<F>, DecoyError> {
    check_ordering(&inputs.source)?;

    let s1c_lower = s1_conclusive_lower(inputs, bounder)?;
    let t1c_upper = t1_conclusive_upper(inputs, bounder);

    let mut s_ck = s1c_lower;
    let mut t_ck = t1c_upper;
    let mut fraction_lower_product = F::one();
    for &q in inputs.m.omega() {
        let counts = inputs.recipient(q);
        let stars = StarredClicks::of(counts, bounder);
        let (s1_lower, s1_upper) = s1_total_bounds(
            &inputs.source,
            (stars.nu_lower, stars.nu_upper, stars.mu_upper, stars.vacuum_lower),
        );
        if stars.mu_upper <= F::zero() || stars.mu_lower <= F::zero() {
            return Err(DecoyError::InsufficientStatistics { quantity: "mu clicks" });
        }
        let frac_lower = s1_lower / stars.mu_upper;
        let frac_upper = s1_upper / stars.mu_lower;
        fraction_lower_product *= frac_lower;
        s_ck *= frac_lower;
        t_ck *= frac_upper;
    }

    if s_ck <= F::zero() {
        return Err(DecoyError::InsufficientStatistics {
            quantity: "k-photon conclusive count",
        });
    }
    let e_b = (t_ck / s_ck).min(F::one());
    Ok(KPhotonEstimate {
        s_ck_conclusive: s_ck,
        t_ck_error: t_ck,
        e_b,
        fraction_lower_product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn source() -> SourceParams<f64> {
        SourceParams { mu: 0.5, nu: 0.1, p_mu: 0.5, p_nu: 0.3 }
    }

    fn zero_inputs(m: PartyCount) -> DecoyInputs<f64> {
        DecoyInputs::symmetric(m, source(), RecipientCounts::default())
    }

    #[test]
    fn party_count_constants() {
        assert_eq!(PartyCount::Three.k(), 2);
        assert_eq!(PartyCount::Five.k(), 4);
        assert_eq!(PartyCount::Three.chernoff_coefficient(), 11);
        assert_eq!(PartyCount::Four.chernoff_coefficient(), 17);
        assert_eq!(PartyCount::Five.chernoff_coefficient(), 23);
        assert_eq!(PartyCount::Four.omega(), &[RecipientId::Bob, RecipientId::David]);
        assert_eq!(PartyCount::Five.verifiers().len(), 3);
        assert_eq!(PartyCount::from_u8(6), None);
    }

    #[test]
    fn zero_counts_give_zero_bounds() {
        let mut bounder = ChernoffBounder::new(1e-10);
        let s = s1_conclusive_lower(&zero_inputs(PartyCount::Three), &mut bounder).unwrap();
        assert_eq!(s, 0.0);
        let (lo, up) = s1_total_bounds(&source(), (0.0, chernoff_upper_of_zero(), 0.0, 0.0));
        assert_eq!(lo, 0.0);
        assert!(up >= 0.0);
    }

    fn chernoff_upper_of_zero() -> f64 {
        crate::bounds::chernoff_upper(0.0, 1e-10)
    }

    #[test]
    fn zero_statistics_are_insufficient() {
        let mut bounder = ChernoffBounder::new(1e-10);
        let err = k_photon_estimate(&zero_inputs(PartyCount::Three), &mut bounder).unwrap_err();
        assert!(matches!(err, DecoyError::InsufficientStatistics { .. }));
    }

    #[test]
    fn invalid_ordering_rejected() {
        let mut inputs = zero_inputs(PartyCount::Three);
        inputs.source.nu = 0.7;
        let mut bounder = ChernoffBounder::new(1e-10);
        assert!(matches!(
            s1_conclusive_lower(&inputs, &mut bounder),
            Err(DecoyError::InvalidIntensityOrdering { .. })
        ));
    }

    /// The four-party expansion is the literal two-factor product.
    #[test]
    fn four_party_product_matches_manual_expansion() {
        let counts = RecipientCounts {
            mu: IntensityCounts { clicks: 2.0e6, conclusive: 3.3e5, conclusive_errors: 1.7e3 },
            nu: IntensityCounts { clicks: 1.2e5, conclusive: 2.0e4, conclusive_errors: 1.0e2 },
            vacuum: IntensityCounts { clicks: 40.0, conclusive: 13.0, conclusive_errors: 6.0 },
        };
        let inputs = DecoyInputs::symmetric(PartyCount::Four, source(), counts);
        let eps1 = 1e-10;

        let mut bounder = ChernoffBounder::new(eps1);
        let est = k_photon_estimate(&inputs, &mut bounder).unwrap();

        // Manual: s_C1 lower times the Bob and David single-photon fractions.
        let mut manual = ChernoffBounder::new(eps1);
        let s1c = s1_conclusive_lower(&inputs, &mut manual).unwrap();
        let mut frac = 1.0;
        for _ in 0..2 {
            let nu_lo = crate::bounds::chernoff_lower(counts.nu.clicks, eps1);
            let mu_up = crate::bounds::chernoff_upper(counts.mu.clicks, eps1);
            let vac_lo = crate::bounds::chernoff_lower(counts.vacuum.clicks, eps1);
            let (s1_lo, _) = s1_total_bounds(&source(), (nu_lo, 0.0, mu_up, vac_lo));
            frac *= s1_lo / mu_up;
        }
        assert!((est.s_ck_conclusive - s1c * frac).abs() / (s1c * frac) < 1e-12);
    }

    #[test]
    fn application_tally_matches_party_count() {
        let counts = RecipientCounts {
            mu: IntensityCounts { clicks: 2.0e6, conclusive: 3.3e5, conclusive_errors: 1.7e3 },
            nu: IntensityCounts { clicks: 1.2e5, conclusive: 2.0e4, conclusive_errors: 1.0e2 },
            vacuum: IntensityCounts { clicks: 40.0, conclusive: 13.0, conclusive_errors: 6.0 },
        };
        for m in [PartyCount::Three, PartyCount::Four, PartyCount::Five] {
            let inputs = DecoyInputs::symmetric(m, source(), counts);
            let mut bounder = ChernoffBounder::new(1e-10);
            k_photon_estimate(&inputs, &mut bounder).unwrap();
            let omega = m.omega().len() as u32;
            assert_eq!(bounder.applications(), 5 + 5 * omega);
        }
    }
}
