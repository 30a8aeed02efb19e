//! Closed-form count claims for the two map families, encoded verbatim as
//! total functions of (p, l, coefficient class). A claim is either an exact
//! value or an interval; which counting convention it should be compared
//! against is deliberately left open here and resolved by the conformance
//! layer, which tests every convention and reports the matches and the
//! mismatches alike.

use crate::dynamics::Family;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PredictError {
    #[error("the (p-1)^l claims require p >= 5, got {0}")]
    PrimeTooSmall(u64),
    #[error("fixed-point claims cover only l = 1, got l = {0}")]
    UnsupportedFamily(u32),
    #[error("coefficient classes need p >= 3, got {0}")]
    PrimeTooSmallForClass(u64),
}

/// Residue class of the coefficient c mod p that selects a claim branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CoeffClass {
    Zero,
    PlusOne,
    MinusOne,
    Other,
}

impl CoeffClass {
    pub fn label(&self) -> &'static str {
        match self {
            CoeffClass::Zero => "zero",
            CoeffClass::PlusOne => "plus-one",
            CoeffClass::MinusOne => "minus-one",
            CoeffClass::Other => "other",
        }
    }
}

/// Classifies c by its nonnegative residue mod p. For p >= 3 the four classes
/// are disjoint.
pub fn classify_coeff(p: u64, c: i64) -> Result<CoeffClass, PredictError> {
    if p < 3 {
        return Err(PredictError::PrimeTooSmallForClass(p));
    }
    let r = c.rem_euclid(p as i64) as u64;
    Ok(if r == 0 {
        CoeffClass::Zero
    } else if r == 1 {
        CoeffClass::PlusOne
    } else if r == p - 1 {
        CoeffClass::MinusOne
    } else {
        CoeffClass::Other
    })
}

/// The shape of a claimed count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CountClaim {
    Exact(u64),
    /// Inclusive bounds; arises only on the prime-power tower branch.
    Interval(u64, u64),
}

/// Identifies which statement a prediction comes from: the base case, the
/// l = 1 case, or the general tower, per family, plus the fixed-point counts
/// quoted from earlier work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClaimSource {
    PrimePowerBaseCase,
    PrimePowerDegreeP,
    PrimePowerTower,
    PMinusOneBaseCase,
    PMinusOneDegree,
    PMinusOneTower,
    FixedPrimePower,
    FixedPMinusOne,
}

impl ClaimSource {
    pub fn label(&self) -> &'static str {
        match self {
            ClaimSource::PrimePowerBaseCase => "pp-base",
            ClaimSource::PrimePowerDegreeP => "pp-degree-p",
            ClaimSource::PrimePowerTower => "pp-tower",
            ClaimSource::PMinusOneBaseCase => "pm-base",
            ClaimSource::PMinusOneDegree => "pm-degree",
            ClaimSource::PMinusOneTower => "pm-tower",
            ClaimSource::FixedPrimePower => "fix-pp",
            ClaimSource::FixedPMinusOne => "fix-pm",
        }
    }
}

/// A claimed count together with its provenance. `convention_note` records
/// that the underlying arguments count roots of the second iterate minus the
/// identity, without fixing a domain, which is exactly the ambiguity the
/// conformance matrix documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PredictedCount {
    pub kind: CountClaim,
    pub source: ClaimSource,
    pub convention_note: &'static str,
}

const NOTE_2PERIODIC: &str =
    "claim counts roots of map(map(z)) - z with fixed points excluded; domain unstated";
const NOTE_FIXED: &str = "claim counts roots of map(z) - z; domain unstated";

impl PredictedCount {
    fn exact(k: u64, source: ClaimSource, note: &'static str) -> Self {
        Self {
            kind: CountClaim::Exact(k),
            source,
            convention_note: note,
        }
    }

    /// Render as a short stable token: `3` or `[2..5]`.
    pub fn render(&self) -> String {
        match self.kind {
            CountClaim::Exact(k) => k.to_string(),
            CountClaim::Interval(lo, hi) => format!("[{lo}..{hi}]"),
        }
    }
}

/// Claimed 2-periodic count for z^(p^l) + c over the residue field: p when
/// l is 1 or p and the coefficient is divisible; between 2 and l for other
/// towers; zero for nondivisible coefficients.
pub fn predict_prime_power(p: u64, ell: u32, cls: CoeffClass) -> PredictedCount {
    debug_assert!(p >= 3 && ell >= 1);
    let special_ell = ell as u64 == 1 || ell as u64 == p;
    let source = if (p, ell) == (3, 1) {
        ClaimSource::PrimePowerBaseCase
    } else if ell == 1 {
        ClaimSource::PrimePowerDegreeP
    } else {
        ClaimSource::PrimePowerTower
    };
    match (cls, special_ell) {
        (CoeffClass::Zero, true) => PredictedCount::exact(p, source, NOTE_2PERIODIC),
        (CoeffClass::Zero, false) => PredictedCount {
            kind: CountClaim::Interval(2, ell as u64),
            source,
            convention_note: NOTE_2PERIODIC,
        },
        _ => PredictedCount::exact(0, source, NOTE_2PERIODIC),
    }
}

/// Claimed 2-periodic count for z^((p-1)^l) + c over the residue field:
/// 2 / 1 / 0 as the coefficient is divisible / congruent to +-1 / anything
/// else. Requires p >= 5.
pub fn predict_p_minus_one(
    p: u64,
    ell: u32,
    cls: CoeffClass,
) -> Result<PredictedCount, PredictError> {
    if p < 5 {
        return Err(PredictError::PrimeTooSmall(p));
    }
    debug_assert!(ell >= 1);
    let source = if (p, ell) == (5, 1) {
        ClaimSource::PMinusOneBaseCase
    } else if ell == 1 {
        ClaimSource::PMinusOneDegree
    } else {
        ClaimSource::PMinusOneTower
    };
    Ok(match cls {
        CoeffClass::Zero => PredictedCount::exact(2, source, NOTE_2PERIODIC),
        CoeffClass::PlusOne | CoeffClass::MinusOne => {
            PredictedCount::exact(1, source, NOTE_2PERIODIC)
        }
        CoeffClass::Other => PredictedCount::exact(0, source, NOTE_2PERIODIC),
    })
}

/// Claimed fixed-point counts quoted from the earlier degree-(p) and
/// degree-(p-1) results; stated for l = 1 only.
pub fn predict_fixed(
    family: Family,
    ell: u32,
    p: u64,
    cls: CoeffClass,
) -> Result<PredictedCount, PredictError> {
    if ell != 1 {
        return Err(PredictError::UnsupportedFamily(ell));
    }
    match family {
        Family::PrimePower => Ok(match cls {
            CoeffClass::Zero => PredictedCount::exact(p, ClaimSource::FixedPrimePower, NOTE_FIXED),
            _ => PredictedCount::exact(0, ClaimSource::FixedPrimePower, NOTE_FIXED),
        }),
        Family::PMinusOnePower => {
            if p < 5 {
                return Err(PredictError::PrimeTooSmall(p));
            }
            Ok(match cls {
                CoeffClass::Zero => {
                    PredictedCount::exact(2, ClaimSource::FixedPMinusOne, NOTE_FIXED)
                }
                CoeffClass::PlusOne | CoeffClass::MinusOne => {
                    PredictedCount::exact(1, ClaimSource::FixedPMinusOne, NOTE_FIXED)
                }
                CoeffClass::Other => {
                    PredictedCount::exact(0, ClaimSource::FixedPMinusOne, NOTE_FIXED)
                }
            })
        }
        Family::RawExponent => Err(PredictError::UnsupportedFamily(ell)),
    }
}
