//! Domain types for the six-state non-orthogonal encoding and the pure
//! functions of the protocol layer: the 12-set catalog, the conclusive/
//! inconclusive classification rule and the post-matching permutation.
//!
//! The six states are the Pauli eigenstates `|±x⟩, |±y⟩, |±z⟩`. They are
//! arranged into 12 two-state sets; within a set the two states lie on
//! different Bloch axes, the first member encodes logic bit 0 and the
//! second logic bit 1. A measurement outcome that is orthogonal to one
//! member identifies the other member as the state that was sent.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bloch axis of a Pauli eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// Sign of a Pauli eigenstate along its axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// One of the six signal states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitState {
    pub axis: Axis,
    pub sign: Sign,
}

impl QubitState {
    pub const fn new(axis: Axis, sign: Sign) -> Self {
        QubitState { axis, sign }
    }

    /// All six states in a fixed order: +x, −x, +y, −y, +z, −z.
    pub const ALL: [QubitState; 6] = [
        QubitState::new(Axis::X, Sign::Plus),
        QubitState::new(Axis::X, Sign::Minus),
        QubitState::new(Axis::Y, Sign::Plus),
        QubitState::new(Axis::Y, Sign::Minus),
        QubitState::new(Axis::Z, Sign::Plus),
        QubitState::new(Axis::Z, Sign::Minus),
    ];

    /// The orthogonal state on the same axis.
    pub fn antipode(self) -> QubitState {
        QubitState::new(self.axis, self.sign.flipped())
    }

    /// Hilbert-space orthogonality; on the Bloch sphere this is antipodality.
    pub fn is_orthogonal_to(self, other: QubitState) -> bool {
        self.axis == other.axis && self.sign != other.sign
    }
}

/// Born-rule probability of observing `outcome` when `sent` is measured in
/// the basis of `outcome`'s axis. Exact by construction: 1, 0 or 1/2.
pub fn born_probability(sent: QubitState, outcome: QubitState) -> Ratio<u32> {
    if sent.axis == outcome.axis {
        if sent.sign == outcome.sign {
            Ratio::new(1, 1)
        } else {
            Ratio::new(0, 1)
        }
    } else {
        Ratio::new(1, 2)
    }
}

/// A two-state encoding set; `first` carries logic bit 0, `second` bit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncodingSet {
    pub first: QubitState,
    pub second: QubitState,
}

impl EncodingSet {
    pub fn contains(&self, state: QubitState) -> bool {
        self.first == state || self.second == state
    }

    /// The logic bit the set assigns to `sent`, if `sent` is a member.
    pub fn bit_of(&self, sent: QubitState) -> Option<LogicBit> {
        if sent == self.first {
            Some(LogicBit::Zero)
        } else if sent == self.second {
            Some(LogicBit::One)
        } else {
            None
        }
    }
}

const fn set(a1: Axis, s1: Sign, a2: Axis, s2: Sign) -> EncodingSet {
    EncodingSet {
        first: QubitState::new(a1, s1),
        second: QubitState::new(a2, s2),
    }
}

/// The full 12-set catalog in a fixed order: the axis pairs (X,Y), (Y,Z),
/// (Z,X), each over the four sign choices of (first, second).
pub const CATALOG: [EncodingSet; 12] = [
    set(Axis::X, Sign::Plus, Axis::Y, Sign::Plus),
    set(Axis::X, Sign::Plus, Axis::Y, Sign::Minus),
    set(Axis::X, Sign::Minus, Axis::Y, Sign::Plus),
    set(Axis::X, Sign::Minus, Axis::Y, Sign::Minus),
    set(Axis::Y, Sign::Plus, Axis::Z, Sign::Plus),
    set(Axis::Y, Sign::Plus, Axis::Z, Sign::Minus),
    set(Axis::Y, Sign::Minus, Axis::Z, Sign::Plus),
    set(Axis::Y, Sign::Minus, Axis::Z, Sign::Minus),
    set(Axis::Z, Sign::Plus, Axis::X, Sign::Plus),
    set(Axis::Z, Sign::Plus, Axis::X, Sign::Minus),
    set(Axis::Z, Sign::Minus, Axis::X, Sign::Plus),
    set(Axis::Z, Sign::Minus, Axis::X, Sign::Minus),
];

/// The four catalog sets containing `state`, in catalog order.
pub fn sets_containing(state: QubitState) -> [EncodingSet; 4] {
    let mut found = [CATALOG[0]; 4];
    let mut n = 0;
    for s in CATALOG {
        if s.contains(state) {
            found[n] = s;
            n += 1;
        }
    }
    debug_assert_eq!(n, 4, "every state appears in exactly four sets");
    found
}

/// Result of decoding one measurement against the announced set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LogicBit {
    Zero,
    One,
    /// '⊥' — the outcome identifies neither member.
    Inconclusive,
}

impl LogicBit {
    pub fn is_conclusive(self) -> bool {
        !matches!(self, LogicBit::Inconclusive)
    }

    pub fn flipped(self) -> LogicBit {
        match self {
            LogicBit::Zero => LogicBit::One,
            LogicBit::One => LogicBit::Zero,
            LogicBit::Inconclusive => LogicBit::Inconclusive,
        }
    }
}

/// Decode a measurement outcome against the announced set.
///
/// The outcome being orthogonal to one member rules that member out, so the
/// other member was sent: orthogonal to `second` decodes as bit 0 (the
/// `first` member), orthogonal to `first` decodes as bit 1.
pub fn classify_outcome(set: &EncodingSet, outcome: QubitState) -> LogicBit {
    if outcome.is_orthogonal_to(set.first) {
        LogicBit::One
    } else if outcome.is_orthogonal_to(set.second) {
        LogicBit::Zero
    } else {
        LogicBit::Inconclusive
    }
}

/// Participant role. Exactly one signer and one authenticator exist; the
/// remaining M−2 participants are verifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Signer,
    Authenticator,
    Verifier,
}

/// Pulse intensity label of the decoy-state source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IntensityLabel {
    Mu,
    Nu,
    Vacuum,
}

impl IntensityLabel {
    pub const ALL: [IntensityLabel; 3] =
        [IntensityLabel::Mu, IntensityLabel::Nu, IntensityLabel::Vacuum];
}

/// Outcome of one detection gate: either no click, or a click collapsed to
/// a definite eigenstate of the measured basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub clicked: bool,
    pub state: Option<QubitState>,
}

impl MeasurementOutcome {
    pub fn no_click() -> Self {
        MeasurementOutcome {
            clicked: false,
            state: None,
        }
    }

    pub fn click(state: QubitState) -> Self {
        MeasurementOutcome {
            clicked: true,
            state: Some(state),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PostMatchError {
    #[error("length mismatch: reference order has {reference} entries, target has {target}")]
    LengthMismatch { reference: usize, target: usize },
    #[error("reference order is not a permutation of 0..{len}")]
    NotAPermutation { len: usize },
}

/// Reorder `target` so element `i` of the result is `target[reference_order[i]]`.
///
/// Applying the same permutation to the sender's copy and the receiver's
/// copy of a sequence preserves their pairing, which is what makes the
/// post-matching step sound.
pub fn post_match<T: Clone>(
    reference_order: &[usize],
    target: &[T],
) -> Result<Vec<T>, PostMatchError> {
    if reference_order.len() != target.len() {
        return Err(PostMatchError::LengthMismatch {
            reference: reference_order.len(),
            target: target.len(),
        });
    }
    let mut seen = vec![false; target.len()];
    for &idx in reference_order {
        if idx >= target.len() || seen[idx] {
            return Err(PostMatchError::NotAPermutation { len: target.len() });
        }
        seen[idx] = true;
    }
    Ok(reference_order.iter().map(|&i| target[i].clone()).collect())
}
