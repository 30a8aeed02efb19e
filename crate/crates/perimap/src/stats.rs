//! Finite-cutoff estimators for the averaging and density statements, and the
//! conformance matrix that joins the closed-form claims to the census oracle.
//!
//! Every estimate is an exact rational (integer numerator and denominator);
//! nothing is rounded until rendering. Sweeps are embarrassingly parallel over
//! their cells and results are merged in a fixed order, so a run with any
//! worker count is bit-identical to the single-threaded one.

use crate::dynamics::{CensusEngine, CensusResult, DynError, Family, Limits, MapSpec};
use crate::ffield::{make_field, FieldError};
use crate::predictors::{
    classify_coeff, predict_fixed, predict_p_minus_one, predict_prime_power, CoeffClass,
    CountClaim, PredictedCount,
};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("no (p, c) pair matches the sweep specification")]
    EmptySelection,
    #[error("cutoff {cutoff} is below the prime floor {floor}")]
    CutoffBelowFloor { cutoff: u64, floor: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Dynamics(#[from] DynError),
}

/// The six counting conventions a census produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Convention {
    FixedFull,
    Div2Full,
    Exact2Full,
    FixedSub,
    Div2Sub,
    Exact2Sub,
}

pub const ALL_CONVENTIONS: [Convention; 6] = [
    Convention::FixedFull,
    Convention::Div2Full,
    Convention::Exact2Full,
    Convention::FixedSub,
    Convention::Div2Sub,
    Convention::Exact2Sub,
];

impl Convention {
    pub fn label(&self) -> &'static str {
        match self {
            Convention::FixedFull => "fixed_full",
            Convention::Div2Full => "div2_full",
            Convention::Exact2Full => "exact2_full",
            Convention::FixedSub => "fixed_sub",
            Convention::Div2Sub => "div2_sub",
            Convention::Exact2Sub => "exact2_sub",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ALL_CONVENTIONS.iter().copied().find(|c| c.label() == s)
    }

    pub fn extract(&self, r: &CensusResult) -> u64 {
        match self {
            Convention::FixedFull => r.fixed_full,
            Convention::Div2Full => r.div2_full,
            Convention::Exact2Full => r.exact2_full,
            Convention::FixedSub => r.fixed_sub,
            Convention::Div2Sub => r.div2_sub,
            Convention::Exact2Sub => r.exact2_sub,
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Smallest prime a family's statements admit.
pub fn prime_floor(family: Family) -> u64 {
    match family {
        Family::PrimePower => 3,
        _ => 5,
    }
}

/// Parameters of one averaging sweep: which family member, which census
/// convention to average, the cutoff bounding both p and c, and an optional
/// coefficient-class filter (`None` means all classes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSpec {
    pub family: Family,
    pub ell: u32,
    pub convention: Convention,
    pub cutoff: u64,
    pub coeff_filter: Option<CoeffClass>,
}

impl SweepSpec {
    pub fn prime_floor(&self) -> u64 {
        prime_floor(self.family)
    }
}

/// An exact rational mean over the qualifying (p, c) pairs at one cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AvgEstimate {
    pub numerator: u64,
    pub denominator: u64,
    pub cutoff: u64,
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl AvgEstimate {
    /// Numerator and denominator in lowest terms.
    pub fn reduced(&self) -> (u64, u64) {
        let g = gcd_u64(self.numerator, self.denominator).max(1);
        (self.numerator / g, self.denominator / g)
    }

    pub fn as_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// A hit ratio at one cutoff, with the defining condition spelled out so the
/// normalization is auditable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityEstimate {
    pub hits: u64,
    pub total: u64,
    pub cutoff: u64,
    pub condition: String,
}

impl DensityEstimate {
    pub fn as_f64(&self) -> f64 {
        self.hits as f64 / self.total as f64
    }

    /// Exact comparison of two ratios without rounding.
    pub fn ratio_less_than(&self, other: &DensityEstimate) -> bool {
        (self.hits as u128) * (other.total as u128) < (other.hits as u128) * (self.total as u128)
    }
}

/// Sieve of Eratosthenes; primes in ascending order.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for k in 2..=n {
        if !composite[k] {
            primes.push(k as u64);
            let mut m = k * k;
            while m <= n {
                composite[m] = true;
                m += k;
            }
        }
    }
    primes
}

/// Averages the chosen convention's census count on F_{p^n} over all pairs
/// (p, c) with prime_floor <= p <= cutoff and 1 <= c <= cutoff whose
/// coefficient class passes the filter. Divisibility conditions on integer
/// coefficients are ordinary divisibility, since an inert prime stays prime
/// upstairs; the extension degree enters only through the census field.
pub fn avg_estimate(
    spec: &SweepSpec,
    n: usize,
    limits: &Limits,
) -> Result<AvgEstimate, StatsError> {
    let floor = spec.prime_floor();
    if spec.cutoff < floor {
        return Err(StatsError::CutoffBelowFloor {
            cutoff: spec.cutoff,
            floor,
        });
    }
    let mut numerator = 0u64;
    let mut denominator = 0u64;
    for p in primes_up_to(spec.cutoff) {
        if p < floor {
            continue;
        }
        let coeffs: Vec<i64> = (1..=spec.cutoff as i64)
            .filter(|&c| match spec.coeff_filter {
                None => true,
                Some(want) => classify_coeff(p, c).map(|got| got == want).unwrap_or(false),
            })
            .collect();
        if coeffs.is_empty() {
            continue;
        }
        let ctx = make_field(p, n)?;
        let engine = CensusEngine::new(&ctx, limits)?;
        for c in coeffs {
            let m = map_for(spec.family, p, spec.ell, c)?;
            let count = spec.convention.extract(&engine.census(&m)?);
            numerator += count;
            denominator += 1;
        }
    }
    if denominator == 0 {
        return Err(StatsError::EmptySelection);
    }
    Ok(AvgEstimate {
        numerator,
        denominator,
        cutoff: spec.cutoff,
    })
}

fn map_for(family: Family, p: u64, ell: u32, c: i64) -> Result<MapSpec, DynError> {
    match family {
        Family::PrimePower => MapSpec::prime_power(p, ell, c),
        Family::PMinusOnePower => MapSpec::p_minus_one_power(p, ell, c),
        Family::RawExponent => Err(DynError::InvalidMap(
            "sweeps cover the two structured families only".into(),
        )),
    }
}

/// An average together with the same sweep at half the cutoff. A finite-cutoff
/// estimator cannot return infinity, so unbounded branches are flagged instead:
/// `diverging` is set when value(C) >= factor * value(C/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DivergenceReport {
    pub at_cutoff: AvgEstimate,
    pub at_half_cutoff: AvgEstimate,
    pub diverging: bool,
}

/// Runs the sweep at the cutoff and at half the cutoff and compares growth
/// against a rational factor `factor_num / factor_den`, exactly.
pub fn divergence_check(
    spec: &SweepSpec,
    n: usize,
    limits: &Limits,
    factor_num: u64,
    factor_den: u64,
) -> Result<DivergenceReport, StatsError> {
    let at_cutoff = avg_estimate(spec, n, limits)?;
    let half = SweepSpec {
        cutoff: spec.cutoff / 2,
        ..*spec
    };
    let at_half_cutoff = avg_estimate(&half, n, limits)?;
    // num/den >= (fn/fd) * (hn/hd)  <=>  num * den_h * fd >= hn * den * fn
    let lhs = at_cutoff.numerator as u128 * at_half_cutoff.denominator as u128 * factor_den as u128;
    let rhs = at_half_cutoff.numerator as u128 * at_cutoff.denominator as u128 * factor_num as u128;
    Ok(DivergenceReport {
        at_cutoff,
        at_half_cutoff,
        // an identically zero average never diverges
        diverging: at_cutoff.numerator > 0 && lhs >= rhs,
    })
}

/// Density predicates, each defined by the congruence condition the
/// corresponding statement reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityPredicate {
    /// count-equals-p branch of the prime-power family: p | c
    NEqualsP,
    /// interval branch of the prime-power family: p | c
    NInInterval,
    /// k = 2: p | c; k = 1: p | (c - 1) or p | (c + 1); for the (p-1) family
    MEquals(u64),
    /// vanishing branch: the complement of the family's nonzero branches
    CountZero,
}

impl DensityPredicate {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "n-equals-p" => Some(Self::NEqualsP),
            "n-in-interval" => Some(Self::NInInterval),
            "m-equals-1" => Some(Self::MEquals(1)),
            "m-equals-2" => Some(Self::MEquals(2)),
            "count-zero" => Some(Self::CountZero),
            _ => None,
        }
    }
}

/// Counts c in [1, cutoff] with c = r (mod p).
fn residue_count(cutoff: u64, p: u64, r: u64) -> u64 {
    debug_assert!(r < p);
    if r == 0 {
        cutoff / p
    } else if r > cutoff {
        0
    } else {
        (cutoff - r) / p + 1
    }
}

/// Exact hit ratio of a predicate over the (p, c) grid with
/// prime_floor <= p <= cutoff and 1 <= c <= cutoff; purely arithmetic, no
/// censuses are run.
pub fn density_estimate(
    spec: &SweepSpec,
    predicate: DensityPredicate,
) -> Result<DensityEstimate, StatsError> {
    let floor = match predicate {
        DensityPredicate::MEquals(_) => 5,
        _ => spec.prime_floor(),
    };
    if spec.cutoff < floor {
        return Err(StatsError::CutoffBelowFloor {
            cutoff: spec.cutoff,
            floor,
        });
    }
    let cutoff = spec.cutoff;
    let primes: Vec<u64> = primes_up_to(cutoff)
        .into_iter()
        .filter(|&p| p >= floor)
        .collect();
    let total = primes.len() as u64 * cutoff;
    if total == 0 {
        return Err(StatsError::EmptySelection);
    }
    let mut hits = 0u64;
    for &p in &primes {
        let divisible = residue_count(cutoff, p, 0);
        let plus_minus_one = residue_count(cutoff, p, 1) + residue_count(cutoff, p, p - 1);
        hits += match predicate {
            DensityPredicate::NEqualsP | DensityPredicate::NInInterval => divisible,
            DensityPredicate::MEquals(2) => divisible,
            DensityPredicate::MEquals(_) => plus_minus_one,
            DensityPredicate::CountZero => match spec.family {
                Family::PMinusOnePower => cutoff - divisible - plus_minus_one,
                _ => cutoff - divisible,
            },
        };
    }
    let condition = match predicate {
        DensityPredicate::NEqualsP => "count = p (p divides c)".to_string(),
        DensityPredicate::NInInterval => "count in [2, l] (p divides c)".to_string(),
        DensityPredicate::MEquals(2) => "count = 2 (p divides c)".to_string(),
        DensityPredicate::MEquals(k) => format!("count = {k} (p divides c-1 or c+1)"),
        DensityPredicate::CountZero => "count = 0 (complementary class)".to_string(),
    };
    Ok(DensityEstimate {
        hits,
        total,
        cutoff,
        condition,
    })
}

/// Outcome of one predicted-vs-observed comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Match,
    Mismatch,
    IntervalHit,
    IntervalMiss,
}

impl Verdict {
    /// The verdict is a pure function of the claim and the observation, so a
    /// recorded cell can always be re-derived from its own fields.
    pub fn judge(predicted: &PredictedCount, observed: u64) -> Self {
        match predicted.kind {
            CountClaim::Exact(k) if observed == k => Verdict::Match,
            CountClaim::Exact(_) => Verdict::Mismatch,
            CountClaim::Interval(lo, hi) if lo <= observed && observed <= hi => {
                Verdict::IntervalHit
            }
            CountClaim::Interval(..) => Verdict::IntervalMiss,
        }
    }

    pub fn is_match(&self) -> bool {
        matches!(self, Verdict::Match | Verdict::IntervalHit)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::Mismatch => "mismatch",
            Verdict::IntervalHit => "interval-hit",
            Verdict::IntervalMiss => "interval-miss",
        }
    }
}

/// One comparison between a claim branch and the oracle, for one parameter
/// cell under one counting convention. Mismatches are findings, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConformanceCell {
    pub family: Family,
    pub p: u64,
    pub ell: u32,
    pub n: usize,
    pub c: i64,
    pub branch: String,
    pub convention: Convention,
    pub predicted: PredictedCount,
    pub observed: u64,
    pub verdict: Verdict,
}

fn branch_label(family: Family, cls: CoeffClass, fixed: bool, special_ell: bool) -> String {
    let fam = family.label();
    let cls = cls.label();
    if fixed {
        format!("{fam}-fix/{cls}")
    } else if family == Family::PrimePower && cls == "zero" {
        if special_ell {
            format!("{fam}/zero-special-ell")
        } else {
            format!("{fam}/zero-general-ell")
        }
    } else {
        format!("{fam}/{cls}")
    }
}

/// One (family, p, n) group of conformance work; cells within a group share a
/// census engine.
#[derive(Debug, Clone, Copy)]
struct Group {
    family: Family,
    p: u64,
    n: usize,
}

fn conformance_group(
    group: Group,
    ell_set: &[u32],
    c_values: Option<&[i64]>,
    limits: &Limits,
) -> Result<Vec<ConformanceCell>, StatsError> {
    let Group { family, p, n } = group;
    let ctx = make_field(p, n)?;
    let engine = CensusEngine::new(&ctx, limits)?;
    let default_cs: Vec<i64>;
    let cs: &[i64] = match c_values {
        Some(cs) => cs,
        None => {
            default_cs = (0..p as i64).collect();
            &default_cs
        }
    };
    let mut out = Vec::new();
    for &ell in ell_set {
        for &c in cs {
            let m = map_for(family, p, ell, c)?;
            let census = engine.census(&m)?;
            let cls = classify_coeff(p, c).expect("p >= 3 in every group");
            let predicted = match family {
                Family::PrimePower => predict_prime_power(p, ell, cls),
                Family::PMinusOnePower => {
                    predict_p_minus_one(p, ell, cls).expect("group primes respect the floor")
                }
                Family::RawExponent => unreachable!("groups cover structured families"),
            };
            let special_ell = ell as u64 == 1 || ell as u64 == p;
            let branch = branch_label(family, cls, false, special_ell);
            for conv in ALL_CONVENTIONS {
                let observed = conv.extract(&census);
                out.push(ConformanceCell {
                    family,
                    p,
                    ell,
                    n,
                    c,
                    branch: branch.clone(),
                    convention: conv,
                    predicted,
                    observed,
                    verdict: Verdict::judge(&predicted, observed),
                });
            }
            // the quoted fixed-point counts apply to l = 1 only, and only
            // under the two fixed conventions
            if ell == 1 {
                let predicted =
                    predict_fixed(family, 1, p, cls).expect("group primes respect the floor");
                let branch = branch_label(family, cls, true, special_ell);
                for conv in [Convention::FixedFull, Convention::FixedSub] {
                    let observed = conv.extract(&census);
                    out.push(ConformanceCell {
                        family,
                        p,
                        ell,
                        n,
                        c,
                        branch: branch.clone(),
                        convention: conv,
                        predicted,
                        observed,
                        verdict: Verdict::judge(&predicted, observed),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Joins claims and oracle counts over the full parameter grid. `c_values` of
/// `None` sweeps c over [0, p) in every cell. Output order is fixed
/// regardless of `threads`.
pub fn conformance_matrix(
    p_set: &[u64],
    ell_set: &[u32],
    n_set: &[usize],
    c_values: Option<&[i64]>,
    limits: &Limits,
    threads: usize,
) -> Result<Vec<ConformanceCell>, StatsError> {
    let mut groups = Vec::new();
    for family in [Family::PrimePower, Family::PMinusOnePower] {
        for &p in p_set {
            if p < prime_floor(family) {
                continue;
            }
            for &n in n_set {
                groups.push(Group { family, p, n });
            }
        }
    }
    let group_results = run_groups(&groups, ell_set, c_values, limits, threads)?;
    let mut cells: Vec<ConformanceCell> = group_results.into_iter().flatten().collect();
    cells.sort_by(|a, b| {
        (a.family, a.p, a.ell, a.n, a.c, &a.branch, a.convention).cmp(&(
            b.family,
            b.p,
            b.ell,
            b.n,
            b.c,
            &b.branch,
            b.convention,
        ))
    });
    Ok(cells)
}

fn run_groups(
    groups: &[Group],
    ell_set: &[u32],
    c_values: Option<&[i64]>,
    limits: &Limits,
    threads: usize,
) -> Result<Vec<Vec<ConformanceCell>>, StatsError> {
    let threads = threads.max(1).min(groups.len().max(1));
    if threads == 1 {
        return groups
            .iter()
            .map(|&g| conformance_group(g, ell_set, c_values, limits))
            .collect();
    }
    let chunk_size = groups.len().div_ceil(threads);
    let chunk_results: Vec<Result<Vec<Vec<ConformanceCell>>, StatsError>> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = groups
                .chunks(chunk_size)
                .map(|chunk| {
                    scope.spawn(move || {
                        chunk
                            .iter()
                            .map(|&g| conformance_group(g, ell_set, c_values, limits))
                            .collect()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        });
    let mut out = Vec::with_capacity(groups.len());
    for chunk in chunk_results {
        out.extend(chunk?);
    }
    Ok(out)
}

/// Per-(branch, convention) match rates over a set of cells, in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryRow {
    pub branch: String,
    pub convention: Convention,
    pub cells: u64,
    pub matches: u64,
}

impl SummaryRow {
    pub fn rate(&self) -> f64 {
        self.matches as f64 / self.cells as f64
    }
}

pub fn summarize(cells: &[ConformanceCell]) -> Vec<SummaryRow> {
    use std::collections::BTreeMap;
    let mut acc: BTreeMap<(String, Convention), (u64, u64)> = BTreeMap::new();
    for cell in cells {
        let slot = acc
            .entry((cell.branch.clone(), cell.convention))
            .or_insert((0, 0));
        slot.0 += 1;
        slot.1 += cell.verdict.is_match() as u64;
    }
    acc.into_iter()
        .map(|((branch, convention), (cells, matches))| SummaryRow {
            branch,
            convention,
            cells,
            matches,
        })
        .collect()
}
