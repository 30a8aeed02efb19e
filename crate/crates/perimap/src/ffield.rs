//! Arithmetic in F_p and its extensions F_{p^n}, plus the irreducibility and
//! inertness checks that justify modeling a residue ring O_K/pO_K as F_{p^n}.
//!
//! A [`FieldCtx`] pins down one concrete field: the prime p, the extension
//! degree n, and a monic irreducible modulus chosen deterministically, so two
//! runs (or two machines) always compute in the same presentation. Elements
//! are fixed-length coefficient vectors in canonical reduced form; equality is
//! plain componentwise equality with nothing deferred.

use crate::fppoly;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("p must be prime, got {0}")]
    NonPrime(u64),
    #[error("field order {p}^{n} does not fit in 64 bits")]
    Overflow { p: u64, n: usize },
    #[error("cannot invert zero")]
    ZeroInverse,
    #[error("polynomial must be monic")]
    NotMonic,
    #[error("defining polynomial must have degree at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("coefficient vector does not describe an element of this field")]
    BadElement,
}

/// Deterministic primality check by trial division (6k±1 wheel).
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p.is_multiple_of(2) || p.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d * d <= p {
        if p.is_multiple_of(d) || p.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// An element of F_{p^n}: `coeffs[i]` is the coefficient of the generator's
/// i-th power, with every entry already reduced into `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FieldElem {
    coeffs: Vec<u64>,
}

impl FieldElem {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// True when the element lies in the prime subfield F_p, i.e. its
    /// representation is a constant polynomial.
    pub fn is_prime_subfield(&self) -> bool {
        self.coeffs.iter().skip(1).all(|&c| c == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

/// An exponent of the form radix^power, kept factored so it never has to be
/// expanded into an arbitrary-precision integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpSpec {
    pub radix: u64,
    pub power: u32,
}

impl ExpSpec {
    pub fn new(radix: u64, power: u32) -> Self {
        debug_assert!(radix >= 1);
        Self { radix, power }
    }
}

/// A polynomial with integer coefficients, constant term first. Holds the
/// defining polynomials of number fields handed to [`inert_check`];
/// coefficients are bounded by i128, which covers any defining polynomial a
/// command line can carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<i128>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<i128>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    /// Coefficientwise reduction mod p, constant term first.
    pub fn reduce_mod(&self, p: u64) -> Vec<u64> {
        let mut out: Vec<u64> = self
            .coeffs
            .iter()
            .map(|&c| c.rem_euclid(p as i128) as u64)
            .collect();
        fppoly::trim(&mut out);
        out
    }
}

/// One concrete model of F_{p^n}: prime, degree, and the reduction modulus.
///
/// Immutable after construction and freely shareable across threads; every
/// operation is a pure function of its inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldCtx {
    p: u64,
    n: usize,
    modulus: Vec<u64>,
    q: u64,
}

/// Builds the field F_{p^n} with a deterministic modulus: the monic
/// irreducible degree-n polynomial whose coefficient tuple (c_0, ..., c_{n-1})
/// is smallest, ordering tuples by the integer c_0 + c_1 p + ... + c_{n-1}
/// p^{n-1}. The search is exhaustive, so runs agree across platforms without
/// any table of precomputed polynomials.
pub fn make_field(p: u64, n: usize) -> Result<FieldCtx, FieldError> {
    // coefficient arithmetic accumulates products of residues in a u64, so
    // p itself must stay below 2^32; q only has to fit the word
    if p >= 1 << 32 {
        return Err(FieldError::Overflow { p, n });
    }
    if !is_prime(p) {
        return Err(FieldError::NonPrime(p));
    }
    if n < 1 {
        return Err(FieldError::DegreeTooSmall(n));
    }
    let q = p
        .checked_pow(n as u32)
        .filter(|&q| q < u64::MAX)
        .ok_or(FieldError::Overflow { p, n })?;
    let mut candidate = vec![0u64; n + 1];
    candidate[n] = 1;
    for k in 0..q {
        let mut rest = k;
        for slot in candidate.iter_mut().take(n) {
            *slot = rest % p;
            rest /= p;
        }
        if is_irreducible(p, &candidate)? {
            return Ok(FieldCtx {
                p,
                n,
                modulus: candidate,
                q,
            });
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}

impl FieldCtx {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// The reduction modulus, constant term first, length n + 1, leading 1.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem {
            coeffs: vec![0; self.n],
        }
    }

    pub fn one(&self) -> FieldElem {
        self.from_int(1)
    }

    /// Embeds a rational integer via Z -> F_p -> F_{p^n}.
    pub fn from_int(&self, c: i64) -> FieldElem {
        let mut coeffs = vec![0; self.n];
        coeffs[0] = c.rem_euclid(self.p as i64) as u64;
        FieldElem { coeffs }
    }

    /// Validates an explicit coefficient vector as a canonical element.
    pub fn element(&self, coeffs: Vec<u64>) -> Result<FieldElem, FieldError> {
        if coeffs.len() != self.n || coeffs.iter().any(|&c| c >= self.p) {
            return Err(FieldError::BadElement);
        }
        Ok(FieldElem { coeffs })
    }

    /// Encodes an element as the integer c_0 + c_1 p + ... + c_{n-1} p^{n-1};
    /// the prime-subfield elements are exactly the codes below p.
    pub fn encode(&self, a: &FieldElem) -> u64 {
        let mut k = 0u64;
        for &c in a.coeffs.iter().rev() {
            k = k * self.p + c;
        }
        k
    }

    pub fn decode(&self, mut k: u64) -> FieldElem {
        debug_assert!(k < self.q);
        let mut coeffs = vec![0; self.n];
        for slot in coeffs.iter_mut() {
            *slot = k % self.p;
            k /= self.p;
        }
        FieldElem { coeffs }
    }

    /// All q elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.q).map(|k| self.decode(k))
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        debug_assert_eq!(a.coeffs.len(), self.n);
        debug_assert_eq!(b.coeffs.len(), self.n);
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| (x + y) % self.p)
            .collect();
        FieldElem { coeffs }
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| (x + self.p - y) % self.p)
            .collect();
        FieldElem { coeffs }
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        let coeffs = a.coeffs.iter().map(|&x| (self.p - x) % self.p).collect();
        FieldElem { coeffs }
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let mut prod = vec![0u64; 2 * self.n - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        // reduce by the monic modulus: x^n = -(m_0 + ... + m_{n-1} x^{n-1})
        for i in (self.n..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..self.n {
                let m = self.modulus[j];
                if m != 0 {
                    prod[i - self.n + j] =
                        (prod[i - self.n + j] + (self.p - m) * c % self.p) % self.p;
                }
            }
        }
        prod.truncate(self.n);
        FieldElem { coeffs: prod }
    }

    /// The unique multiplicative inverse of a nonzero element.
    pub fn inv(&self, a: &FieldElem) -> Result<FieldElem, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// a^e by square-and-multiply with the exponent taken literally.
    pub fn pow(&self, a: &FieldElem, e: u64) -> FieldElem {
        let mut acc = self.one();
        if e == 0 {
            return acc;
        }
        let mut bit = 63 - e.leading_zeros();
        loop {
            acc = self.mul(&acc, &acc);
            if (e >> bit) & 1 == 1 {
                acc = self.mul(&acc, a);
            }
            if bit == 0 {
                break;
            }
            bit -= 1;
        }
        acc
    }

    /// a^(radix^power) without ever forming radix^power.
    ///
    /// For nonzero bases the exponent reduces mod q - 1 (Lagrange); a reduced
    /// exponent of 0 is replaced by q - 1 since a^(q-1) = 1. Zero bases map to
    /// zero because radix^power >= 1.
    pub fn pow_reduced(&self, a: &FieldElem, exp: ExpSpec) -> FieldElem {
        if a.is_zero() {
            return self.zero();
        }
        let e = self.reduce_exponent(exp);
        self.pow(a, e)
    }

    /// radix^power reduced into [1, q-1].
    pub fn reduce_exponent(&self, exp: ExpSpec) -> u64 {
        let group = self.q - 1;
        if group == 0 {
            return 1;
        }
        let e = fppoly::mod_pow(exp.radix, exp.power as u64, group);
        if e == 0 {
            group
        } else {
            e
        }
    }
}

/// Irreducibility over F_p by the distinct-degree criterion: f of degree d is
/// irreducible iff x^(p^d) = x mod f and gcd(x^(p^(d/r)) - x, f) = 1 for every
/// prime r dividing d. The Frobenius powers are computed by repeated squaring
/// modulo f, one p-power step at a time, so no exponent is ever materialized.
pub fn is_irreducible(p: u64, f: &[u64]) -> Result<bool, FieldError> {
    let d = match fppoly::degree(f) {
        Some(d) if d >= 1 => d,
        _ => return Err(FieldError::NotMonic),
    };
    if f[d] != 1 {
        return Err(FieldError::NotMonic);
    }
    if d == 1 {
        return Ok(true);
    }
    // frob[i] = x^(p^(i+1)) mod f
    let x = fppoly::monomial(1);
    let mut frob = Vec::with_capacity(d);
    let mut t = x.clone();
    for _ in 0..d {
        t = fppoly::pow_mod(&t, p, f, p);
        frob.push(t.clone());
    }
    if frob[d - 1] != x {
        return Ok(false);
    }
    let mut m = d;
    let mut r = 2;
    while r * r <= m {
        if m % r == 0 {
            let g = fppoly::gcd(&fppoly::sub(&frob[d / r - 1], &x, p), f, p);
            if fppoly::degree(&g) != Some(0) {
                return Ok(false);
            }
            while m % r == 0 {
                m /= r;
            }
        }
        r += 1;
    }
    if m > 1 {
        let g = fppoly::gcd(&fppoly::sub(&frob[d / m - 1], &x, p), f, p);
        if fppoly::degree(&g) != Some(0) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Inertness {
    Inert,
    NotInert,
}

/// Verdict of [`inert_check`]. Irreducibility of the defining polynomial
/// mod p certifies inertness only when p does not divide the index
/// \[O_K : Z\[theta\]\]; when the reduction has a repeated factor (discriminant
/// zero mod p) that certification can fail, so the verdict carries a warning
/// instead of silently asserting either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InertReport {
    pub verdict: Inertness,
    pub index_warning: bool,
}

/// Tests whether the prime p is inert in the field defined by the monic
/// polynomial h (assumed irreducible over Q), by reducing h mod p and testing
/// irreducibility over F_p.
pub fn inert_check(h: &IntPoly, p: u64) -> Result<InertReport, FieldError> {
    if !h.is_monic() {
        return Err(FieldError::NotMonic);
    }
    if h.degree() < 2 {
        return Err(FieldError::DegreeTooSmall(h.degree()));
    }
    if !is_prime(p) {
        return Err(FieldError::NonPrime(p));
    }
    let hp = h.reduce_mod(p);
    // monic h keeps its degree under reduction
    debug_assert_eq!(fppoly::degree(&hp), Some(h.degree()));
    let verdict = if is_irreducible(p, &hp)? {
        Inertness::Inert
    } else {
        Inertness::NotInert
    };
    // disc(h mod p) = 0 exactly when h mod p shares a factor with its derivative
    let deriv = fppoly::derivative(&hp, p);
    let g = fppoly::gcd(&hp, &deriv, p);
    let index_warning = fppoly::degree(&g) != Some(0);
    Ok(InertReport {
        verdict,
        index_warning,
    })
}
