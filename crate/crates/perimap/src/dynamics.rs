//! Iteration of the map z -> z^d + c on F_{p^n}: exhaustive censuses of fixed
//! and 2-periodic points under every counting convention, full functional
//! graph decomposition, and an independent root count through polynomial gcds.
//!
//! The census enumerates all q elements. To keep that cheap the
//! [`CensusEngine`] builds a discrete-log table once per field: powers become
//! index arithmetic and adding the constant c touches only the lowest base-p
//! digit of an element's code, so the per-element cost is O(1) after an O(q)
//! setup.

use crate::ffield::{ExpSpec, FieldCtx, FieldElem};
use crate::fppoly;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DynError {
    #[error("map has p = {map_p} but the field has p = {ctx_p}")]
    ContextMismatch { map_p: u64, ctx_p: u64 },
    #[error("field order {q} exceeds the enumeration limit {limit}")]
    EnumerationLimitExceeded { q: u64, limit: u64 },
    #[error("iterate polynomial degree {degree} exceeds the limit {limit}")]
    DegreeLimitExceeded { degree: u64, limit: u64 },
    #[error("{0}")]
    InvalidMap(String),
}

/// Resource bounds for exhaustive computations. Exceeding either is an error,
/// never silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest field order a census may enumerate.
    pub max_q: u64,
    /// Largest degree [`count_roots_gcd`] may build for an iterate polynomial.
    pub max_poly_degree: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_q: 10_000_000,
            max_poly_degree: 4096,
        }
    }
}

/// Which family the degree comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Family {
    /// z^(p^l) + c, p >= 3
    PrimePower,
    /// z^((p-1)^l) + c, p >= 5
    PMinusOnePower,
    /// z^d + c with an explicit degree
    RawExponent,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::PrimePower => "pl",
            Family::PMinusOnePower => "pm1l",
            Family::RawExponent => "raw",
        }
    }
}

/// One member of a map family: z -> z^d + c over residues mod p, where d is
/// p^ell, (p-1)^ell, or an explicit exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapSpec {
    pub family: Family,
    pub p: u64,
    pub ell: u32,
    d_raw: u64,
    pub c: i64,
}

impl MapSpec {
    pub fn prime_power(p: u64, ell: u32, c: i64) -> Result<Self, DynError> {
        if p < 3 {
            return Err(DynError::InvalidMap(format!(
                "the p^l family requires p >= 3, got {p}"
            )));
        }
        if ell < 1 {
            return Err(DynError::InvalidMap("l must be at least 1".into()));
        }
        Ok(Self {
            family: Family::PrimePower,
            p,
            ell,
            d_raw: 0,
            c,
        })
    }

    pub fn p_minus_one_power(p: u64, ell: u32, c: i64) -> Result<Self, DynError> {
        if p < 5 {
            return Err(DynError::InvalidMap(format!(
                "the (p-1)^l family requires p >= 5, got {p}"
            )));
        }
        if ell < 1 {
            return Err(DynError::InvalidMap("l must be at least 1".into()));
        }
        Ok(Self {
            family: Family::PMinusOnePower,
            p,
            ell,
            d_raw: 0,
            c,
        })
    }

    pub fn raw(p: u64, d: u64, c: i64) -> Result<Self, DynError> {
        if d < 2 {
            return Err(DynError::InvalidMap(format!(
                "effective degree must be at least 2, got {d}"
            )));
        }
        Ok(Self {
            family: Family::RawExponent,
            p,
            ell: 1,
            d_raw: d,
            c,
        })
    }

    /// The exponent d in factored radix^power form.
    pub fn degree_spec(&self) -> ExpSpec {
        match self.family {
            Family::PrimePower => ExpSpec::new(self.p, self.ell),
            Family::PMinusOnePower => ExpSpec::new(self.p - 1, self.ell),
            Family::RawExponent => ExpSpec::new(self.d_raw, 1),
        }
    }

    /// The exponent d as an integer, when it fits a machine word.
    pub fn degree_int(&self) -> Option<u64> {
        let ExpSpec { radix, power } = self.degree_spec();
        radix.checked_pow(power)
    }

    fn check_ctx(&self, ctx: &FieldCtx) -> Result<(), DynError> {
        if self.p != ctx.p() {
            return Err(DynError::ContextMismatch {
                map_p: self.p,
                ctx_p: ctx.p(),
            });
        }
        Ok(())
    }
}

/// All six census counts for one (field, map) pair: each of the three
/// predicates (fixed / period dividing 2 / exact period 2) over the full
/// field and restricted to the prime subfield.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CensusResult {
    pub q: u64,
    pub fixed_full: u64,
    pub div2_full: u64,
    pub exact2_full: u64,
    pub fixed_sub: u64,
    pub div2_sub: u64,
    pub exact2_sub: u64,
}

/// Exact-period histogram of the full functional graph. Strictly preperiodic
/// points are tallied separately (period marker 0) so the totals always sum
/// to q.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitCensus {
    pub cycle_length_histogram: BTreeMap<u64, u64>,
    pub tail_point_count: u64,
}

impl OrbitCensus {
    pub fn periodic_point_count(&self) -> u64 {
        self.cycle_length_histogram.values().sum()
    }
}

/// Evaluates z^d + c in the given field, with the exponent reduced mod q - 1
/// rather than expanded.
pub fn eval_map(ctx: &FieldCtx, m: &MapSpec, z: &FieldElem) -> Result<FieldElem, DynError> {
    m.check_ctx(ctx)?;
    let zd = ctx.pow_reduced(z, m.degree_spec());
    Ok(ctx.add(&zd, &ctx.from_int(m.c)))
}

/// Per-field enumeration tables, reusable across maps on the same field.
///
/// `elt_of_log[i]` is the code of g^i for a fixed generator g; `log_of[code]`
/// inverts it. A map application then costs two array lookups and one digit
/// adjustment, and the whole successor table for one map is built in O(q).
pub struct CensusEngine<'a> {
    ctx: &'a FieldCtx,
    elt_of_log: Vec<u32>,
    log_of: Vec<u32>,
}

impl<'a> CensusEngine<'a> {
    pub fn new(ctx: &'a FieldCtx, limits: &Limits) -> Result<Self, DynError> {
        let q = ctx.q();
        // hard cap regardless of configuration: codes live in u32 and the
        // log-index product i * e must stay inside u64
        let limit = limits.max_q.min((1 << 31) - 1);
        if q > limit {
            return Err(DynError::EnumerationLimitExceeded { q, limit });
        }
        let group = q - 1;
        let prime_factors = distinct_prime_factors(group);
        // smallest generator in encoding order; deterministic
        let generator = (1..q)
            .map(|k| ctx.decode(k))
            .find(|z| {
                prime_factors
                    .iter()
                    .all(|&r| ctx.pow(z, group / r) != ctx.one())
            })
            .expect("the multiplicative group of a finite field is cyclic");
        let mut elt_of_log = Vec::with_capacity(group.max(1) as usize);
        let mut log_of = vec![u32::MAX; q as usize];
        let mut acc = ctx.one();
        for i in 0..group.max(1) {
            let code = ctx.encode(&acc) as u32;
            elt_of_log.push(code);
            log_of[code as usize] = i as u32;
            acc = ctx.mul(&acc, &generator);
        }
        debug_assert_eq!(acc, ctx.one());
        Ok(Self {
            ctx,
            elt_of_log,
            log_of,
        })
    }

    pub fn ctx(&self) -> &FieldCtx {
        self.ctx
    }

    /// code of (decode(code))^e + c for nonneg reduced exponent e in [1, q-1]
    fn step(&self, code: u32, e: u64, c_res: u64) -> u32 {
        let p = self.ctx.p();
        let group = (self.ctx.q() - 1).max(1);
        let powered = if code == 0 {
            0
        } else {
            let i = self.log_of[code as usize] as u64;
            self.elt_of_log[(i * e % group) as usize]
        };
        // add the constant: only the lowest base-p digit moves
        let low = powered as u64 % p;
        (powered as u64 - low + (low + c_res) % p) as u32
    }

    /// The successor table: entry k holds code(map(decode(k))).
    pub fn successor_table(&self, m: &MapSpec) -> Result<Vec<u32>, DynError> {
        m.check_ctx(self.ctx)?;
        let q = self.ctx.q();
        let e = self.ctx.reduce_exponent(m.degree_spec());
        let c_res = m.c.rem_euclid(self.ctx.p() as i64) as u64;
        Ok((0..q as u32).map(|k| self.step(k, e, c_res)).collect())
    }

    /// Exhaustive tally of all six counting conventions.
    pub fn census(&self, m: &MapSpec) -> Result<CensusResult, DynError> {
        let succ = self.successor_table(m)?;
        let p = self.ctx.p();
        let mut out = CensusResult {
            q: self.ctx.q(),
            fixed_full: 0,
            div2_full: 0,
            exact2_full: 0,
            fixed_sub: 0,
            div2_sub: 0,
            exact2_sub: 0,
        };
        for (k, &w) in succ.iter().enumerate() {
            let k = k as u32;
            let fixed = w == k;
            let div2 = succ[w as usize] == k;
            let sub = (k as u64) < p;
            out.fixed_full += fixed as u64;
            out.div2_full += div2 as u64;
            out.exact2_full += (div2 && !fixed) as u64;
            if sub {
                out.fixed_sub += fixed as u64;
                out.div2_sub += div2 as u64;
                out.exact2_sub += (div2 && !fixed) as u64;
            }
        }
        Ok(out)
    }

    /// Full functional-graph decomposition: every point is classified by its
    /// exact period, or counted as a tail point if strictly preperiodic.
    pub fn orbit_census(&self, m: &MapSpec) -> Result<OrbitCensus, DynError> {
        let succ = self.successor_table(m)?;
        let q = succ.len();

        const UNVISITED: u8 = 0;
        const ON_PATH: u8 = 1;
        const DONE: u8 = 2;
        let mut state = vec![UNVISITED; q];
        let mut period = vec![0u32; q];
        let mut path: Vec<u32> = Vec::new();
        let mut cycle: Vec<u32> = Vec::new();

        for start in 0..q as u32 {
            if state[start as usize] != UNVISITED {
                continue;
            }
            path.clear();
            let mut v = start;
            while state[v as usize] == UNVISITED {
                state[v as usize] = ON_PATH;
                path.push(v);
                v = succ[v as usize];
            }
            if state[v as usize] == ON_PATH {
                // closed a new cycle ending at v; pop its members off the path
                cycle.clear();
                loop {
                    let u = path.pop().expect("cycle closure lies on the path");
                    cycle.push(u);
                    if u == v {
                        break;
                    }
                }
                let len = cycle.len() as u32;
                for &u in &cycle {
                    state[u as usize] = DONE;
                    period[u as usize] = len;
                }
            }
            // whatever remains on the path feeds into a settled component
            while let Some(u) = path.pop() {
                state[u as usize] = DONE;
                // period stays 0: strictly preperiodic
            }
        }

        let mut histogram = BTreeMap::new();
        let mut tail = 0u64;
        for &m in &period {
            if m == 0 {
                tail += 1;
            } else {
                *histogram.entry(m as u64).or_insert(0) += 1;
            }
        }
        Ok(OrbitCensus {
            cycle_length_histogram: histogram,
            tail_point_count: tail,
        })
    }
}

/// One-shot census; builds the field tables and discards them.
pub fn census(ctx: &FieldCtx, m: &MapSpec, limits: &Limits) -> Result<CensusResult, DynError> {
    CensusEngine::new(ctx, limits)?.census(m)
}

/// One-shot functional-graph decomposition.
pub fn orbit_census(ctx: &FieldCtx, m: &MapSpec, limits: &Limits) -> Result<OrbitCensus, DynError> {
    CensusEngine::new(ctx, limits)?.orbit_census(m)
}

/// Which iterate polynomial to take roots of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootTarget {
    /// map(map(x)) - x; its distinct-root count equals `div2_full`
    Phi2MinusId,
    /// map(x) - x; its distinct-root count equals `fixed_full`
    PhiMinusId,
}

fn distinct_prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1 + (d & 1);
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Binomial row C(d, 0..=d) mod p by the Pascal recurrence, so no factorial
/// ever overflows.
fn pascal_row(d: u64, p: u64) -> Vec<u64> {
    let d = d as usize;
    let mut row = vec![0u64; d + 1];
    row[0] = 1;
    for i in 1..=d {
        for j in (1..=i).rev() {
            row[j] = (row[j] + row[j - 1]) % p;
        }
    }
    row
}

/// The iterate polynomial over F_p for the chosen target, built by binomial
/// expansion of (x^d + c)^d with c reduced mod p.
fn iterate_polynomial(
    m: &MapSpec,
    which: RootTarget,
    limits: &Limits,
) -> Result<Vec<u64>, DynError> {
    let p = m.p;
    let c = m.c.rem_euclid(p as i64) as u64;
    let d = m.degree_int().ok_or(DynError::DegreeLimitExceeded {
        degree: u64::MAX,
        limit: limits.max_poly_degree,
    })?;
    let deg = match which {
        RootTarget::PhiMinusId => d,
        RootTarget::Phi2MinusId => d.checked_mul(d).ok_or(DynError::DegreeLimitExceeded {
            degree: u64::MAX,
            limit: limits.max_poly_degree,
        })?,
    };
    if deg > limits.max_poly_degree {
        return Err(DynError::DegreeLimitExceeded {
            degree: deg,
            limit: limits.max_poly_degree,
        });
    }
    let mut f = vec![0u64; deg as usize + 1];
    match which {
        RootTarget::PhiMinusId => {
            // x^d + c - x
            f[d as usize] = 1;
            f[0] = c;
            f[1] = (f[1] + p - 1) % p;
        }
        RootTarget::Phi2MinusId => {
            // (x^d + c)^d + c - x = sum_i C(d,i) c^(d-i) x^(d i) + c - x
            let row = pascal_row(d, p);
            let mut c_pow = 1u64; // c^j
            for j in 0..=d {
                let i = d - j;
                let coeff = row[i as usize] * c_pow % p;
                let pos = (d * i) as usize;
                f[pos] = (f[pos] + coeff) % p;
                c_pow = c_pow * c % p;
            }
            f[0] = (f[0] + c) % p;
            f[1] = (f[1] + p - 1) % p;
        }
    }
    fppoly::trim(&mut f);
    Ok(f)
}

/// Counts the distinct roots in F_{p^n} of the chosen iterate polynomial as
/// deg gcd(x^(p^n) - x mod f, f), entirely in polynomial arithmetic over F_p.
///
/// This is an algebraic route independent of the element-by-element census:
/// `Phi2MinusId` must reproduce `div2_full` and `PhiMinusId` must reproduce
/// `fixed_full`.
pub fn count_roots_gcd(
    ctx: &FieldCtx,
    m: &MapSpec,
    which: RootTarget,
    limits: &Limits,
) -> Result<u64, DynError> {
    m.check_ctx(ctx)?;
    let f = iterate_polynomial(m, which, limits)?;
    Ok(distinct_roots_in_extension(ctx.p(), &f, ctx.q()))
}

/// deg gcd(x^q - x mod f, f) for a nonzero f over F_p.
fn distinct_roots_in_extension(p: u64, f: &[u64], q: u64) -> u64 {
    let fdeg = fppoly::degree(f).expect("iterate polynomial is nonzero");
    if fdeg == 0 {
        return 0;
    }
    let xq = fppoly::pow_x_mod(q, f, p);
    let h = fppoly::sub(&xq, &fppoly::monomial(1), p);
    let g = fppoly::gcd(&h, f, p);
    fppoly::degree(&g).unwrap_or(0) as u64
}

/// True when f has at least one root in F_{p^n}.
pub fn has_root_in_extension(
    p: u64,
    f: &[u64],
    n: usize,
    limits: &Limits,
) -> Result<bool, DynError> {
    let deg =
        fppoly::degree(f).ok_or_else(|| DynError::InvalidMap("zero polynomial".into()))? as u64;
    if deg > limits.max_poly_degree {
        return Err(DynError::DegreeLimitExceeded {
            degree: deg,
            limit: limits.max_poly_degree,
        });
    }
    let q = p
        .checked_pow(n as u32)
        .ok_or(DynError::EnumerationLimitExceeded {
            q: u64::MAX,
            limit: limits.max_q,
        })?;
    Ok(distinct_roots_in_extension(p, f, q) >= 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::make_field;

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn map_spec_validation() {
        assert!(MapSpec::prime_power(2, 1, 0).is_err());
        assert!(MapSpec::p_minus_one_power(3, 1, 0).is_err());
        assert!(MapSpec::raw(5, 1, 0).is_err());
        assert!(MapSpec::prime_power(3, 1, -7).is_ok());
    }

    #[test]
    fn eval_map_examples() {
        let f5 = make_field(5, 1).unwrap();
        let m = MapSpec::p_minus_one_power(5, 1, 1).unwrap();
        assert_eq!(eval_map(&f5, &m, &f5.from_int(2)).unwrap(), f5.from_int(2));
        let m = MapSpec::p_minus_one_power(5, 1, 4).unwrap();
        assert_eq!(eval_map(&f5, &m, &f5.from_int(1)).unwrap(), f5.zero());

        let f9 = make_field(3, 2).unwrap();
        let frob = MapSpec::prime_power(3, 1, 0).unwrap();
        for z in 0..3 {
            let z = f9.from_int(z);
            assert_eq!(eval_map(&f9, &frob, &z).unwrap(), z);
        }
    }

    #[test]
    fn eval_map_rejects_context_mismatch() {
        let f5 = make_field(5, 1).unwrap();
        let m = MapSpec::prime_power(3, 1, 0).unwrap();
        assert_eq!(
            eval_map(&f5, &m, &f5.zero()).unwrap_err(),
            DynError::ContextMismatch { map_p: 3, ctx_p: 5 }
        );
    }

    #[test]
    fn census_frobenius_on_f9() {
        let f9 = make_field(3, 2).unwrap();
        let m = MapSpec::prime_power(3, 1, 0).unwrap();
        let r = census(&f9, &m, &lim()).unwrap();
        assert_eq!(
            r,
            CensusResult {
                q: 9,
                fixed_full: 3,
                div2_full: 9,
                exact2_full: 6,
                fixed_sub: 3,
                div2_sub: 3,
                exact2_sub: 0,
            }
        );
    }

    #[test]
    fn census_two_cycle_on_f5() {
        let f5 = make_field(5, 1).unwrap();
        let m = MapSpec::p_minus_one_power(5, 1, 4).unwrap();
        let r = census(&f5, &m, &lim()).unwrap();
        assert_eq!((r.fixed_full, r.div2_full, r.exact2_full), (0, 2, 2));
        let m = MapSpec::p_minus_one_power(5, 1, 0).unwrap();
        let r = census(&f5, &m, &lim()).unwrap();
        assert_eq!((r.fixed_full, r.div2_full, r.exact2_full), (2, 2, 0));
    }

    #[test]
    fn orbit_census_examples() {
        let f5 = make_field(5, 1).unwrap();
        let m = MapSpec::p_minus_one_power(5, 1, 1).unwrap();
        let o = orbit_census(&f5, &m, &lim()).unwrap();
        assert_eq!(o.cycle_length_histogram, BTreeMap::from([(1, 1)]));
        assert_eq!(o.tail_point_count, 4);

        let f9 = make_field(3, 2).unwrap();
        let frob = MapSpec::prime_power(3, 1, 0).unwrap();
        let o = orbit_census(&f9, &frob, &lim()).unwrap();
        assert_eq!(o.cycle_length_histogram, BTreeMap::from([(1, 3), (2, 6)]));
        assert_eq!(o.tail_point_count, 0);

        // z^9 = z identically on F_9
        let ident = MapSpec::prime_power(3, 2, 0).unwrap();
        let o = orbit_census(&f9, &ident, &lim()).unwrap();
        assert_eq!(o.cycle_length_histogram, BTreeMap::from([(1, 9)]));
        assert_eq!(o.tail_point_count, 0);
    }

    #[test]
    fn orbit_census_respects_enumeration_limit() {
        let f27 = make_field(3, 3).unwrap();
        let m = MapSpec::prime_power(3, 1, 1).unwrap();
        let tight = Limits {
            max_q: 10,
            ..Limits::default()
        };
        assert_eq!(
            orbit_census(&f27, &m, &tight).unwrap_err(),
            DynError::EnumerationLimitExceeded { q: 27, limit: 10 }
        );
    }

    #[test]
    fn gcd_root_count_examples() {
        let f9 = make_field(3, 2).unwrap();
        let m = MapSpec::prime_power(3, 1, 0).unwrap();
        assert_eq!(
            count_roots_gcd(&f9, &m, RootTarget::Phi2MinusId, &lim()).unwrap(),
            9
        );
        let f5 = make_field(5, 1).unwrap();
        let m = MapSpec::p_minus_one_power(5, 1, 0).unwrap();
        assert_eq!(
            count_roots_gcd(&f5, &m, RootTarget::Phi2MinusId, &lim()).unwrap(),
            2
        );
        let m = MapSpec::p_minus_one_power(5, 1, 2).unwrap();
        assert_eq!(
            count_roots_gcd(&f5, &m, RootTarget::PhiMinusId, &lim()).unwrap(),
            1
        );
    }

    #[test]
    fn gcd_root_count_respects_degree_limit() {
        let f5 = make_field(5, 1).unwrap();
        let m = MapSpec::raw(5, 100, 1).unwrap();
        let tight = Limits {
            max_poly_degree: 512,
            ..Limits::default()
        };
        assert_eq!(
            count_roots_gcd(&f5, &m, RootTarget::Phi2MinusId, &tight).unwrap_err(),
            DynError::DegreeLimitExceeded {
                degree: 10_000,
                limit: 512
            }
        );
    }

    #[test]
    fn root_existence_examples() {
        let l = lim();
        assert!(has_root_in_extension(3, &[1, 0, 1], 2, &l).unwrap());
        assert!(!has_root_in_extension(3, &[1, 0, 1], 3, &l).unwrap());
        assert!(has_root_in_extension(5, &[2, 1], 1, &l).unwrap());
    }

    #[test]
    fn pascal_row_matches_small_binomials() {
        assert_eq!(pascal_row(4, 7), vec![1, 4, 6, 4, 1]);
        assert_eq!(pascal_row(5, 5), vec![1, 0, 0, 0, 0, 1]);
    }
}
