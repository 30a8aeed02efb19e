//! Dense univariate polynomial arithmetic over the prime field F_p.
//!
//! Coefficients are stored constant term first and kept in `[0, p)`. The zero
//! polynomial is the empty vector; every other polynomial has a nonzero
//! leading coefficient. All functions take the prime `p` explicitly, so the
//! module has no state of its own.

/// Drops trailing zero coefficients in place.
pub(crate) fn trim(f: &mut Vec<u64>) {
    while f.last() == Some(&0) {
        f.pop();
    }
}

/// Degree of `f`, or `None` for the zero polynomial.
pub(crate) fn degree(f: &[u64]) -> Option<usize> {
    if f.is_empty() {
        None
    } else {
        Some(f.len() - 1)
    }
}

pub(crate) fn is_zero(f: &[u64]) -> bool {
    f.is_empty()
}

/// The monomial x^k.
pub(crate) fn monomial(k: usize) -> Vec<u64> {
    let mut f = vec![0; k + 1];
    f[k] = 1;
    f
}

// widening products: the modulus may be any u64 (group orders q - 1 get close
// to the word size long before p does)
pub(crate) fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mul = |a: u64, b: u64| (a as u128 * b as u128 % m as u128) as u64;
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo the prime `p`, by Fermat's little theorem.
pub(crate) fn mod_inv(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    mod_pow(a, p - 2, p)
}

pub(crate) fn sub(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; f.len().max(g.len())];
    for (i, slot) in out.iter_mut().enumerate() {
        let a = f.get(i).copied().unwrap_or(0);
        let b = g.get(i).copied().unwrap_or(0);
        *slot = (a + p - b) % p;
    }
    trim(&mut out);
    out
}

pub(crate) fn mul(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    if is_zero(f) || is_zero(g) {
        return Vec::new();
    }
    let mut out = vec![0u64; f.len() + g.len() - 1];
    for (i, &a) in f.iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (j, &b) in g.iter().enumerate() {
            out[i + j] = (out[i + j] + a * b) % p;
        }
    }
    trim(&mut out);
    out
}

/// Remainder of `f` divided by the nonzero polynomial `g`.
pub(crate) fn rem(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let gdeg = degree(g).expect("division by the zero polynomial");
    let glead_inv = mod_inv(g[gdeg], p);
    let mut r: Vec<u64> = f.to_vec();
    trim(&mut r);
    while let Some(rdeg) = degree(&r) {
        if rdeg < gdeg {
            break;
        }
        let scale = r[rdeg] * glead_inv % p;
        let shift = rdeg - gdeg;
        for (j, &gj) in g.iter().enumerate() {
            if gj != 0 {
                r[shift + j] = (r[shift + j] + p - scale * gj % p) % p;
            }
        }
        trim(&mut r);
    }
    r
}

/// Rescales a nonzero polynomial so the leading coefficient is 1.
pub(crate) fn make_monic(f: &mut [u64], p: u64) {
    if let Some(d) = degree(f) {
        let inv = mod_inv(f[d], p);
        if inv != 1 {
            for c in f.iter_mut() {
                *c = *c * inv % p;
            }
        }
    }
}

/// Monic gcd of `f` and `g`; returns the zero polynomial only if both are zero.
pub(crate) fn gcd(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let mut a = f.to_vec();
    let mut b = g.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !is_zero(&b) {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    make_monic(&mut a, p);
    a
}

pub(crate) fn derivative(f: &[u64], p: u64) -> Vec<u64> {
    if f.len() <= 1 {
        return Vec::new();
    }
    let mut out: Vec<u64> = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| (i as u64 % p) * c % p)
        .collect();
    trim(&mut out);
    out
}

/// x^e mod f, for monic `f` of degree >= 1.
///
/// Exponents below deg(f) need no reduction and are returned as plain
/// monomials; larger exponents go through square-and-multiply with every
/// intermediate reduced mod f, so the working degree never exceeds deg(f).
pub(crate) fn pow_x_mod(e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let fdeg = degree(f).expect("modulus must be nonzero") as u64;
    debug_assert!(fdeg >= 1);
    if e < fdeg {
        return monomial(e as usize);
    }
    let mut acc = vec![1u64];
    let mut bit = 63 - e.leading_zeros();
    loop {
        acc = rem(&mul(&acc, &acc, p), f, p);
        if (e >> bit) & 1 == 1 {
            // multiply by x: shift up one degree, then reduce
            acc.insert(0, 0);
            acc = rem(&acc, f, p);
        }
        if bit == 0 {
            break;
        }
        bit -= 1;
    }
    acc
}

/// Raises `g` to the p-th power modulo `f` (one Frobenius step).
pub(crate) fn pow_mod(g: &[u64], e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    if e == 0 {
        return acc;
    }
    let base = rem(g, f, p);
    if is_zero(&base) {
        return Vec::new();
    }
    let mut bit = 63 - e.leading_zeros();
    loop {
        acc = rem(&mul(&acc, &acc, p), f, p);
        if (e >> bit) & 1 == 1 {
            acc = rem(&mul(&acc, &base, p), f, p);
        }
        if bit == 0 {
            break;
        }
        bit -= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rem_reduces_square_by_modulus() {
        // x^2 mod (x^2 + 1) = -1 = 2 over F_3
        let f = vec![0, 0, 1];
        let m = vec![1, 0, 1];
        assert_eq!(rem(&f, &m, 3), vec![2]);
    }

    #[test]
    fn gcd_of_multiple_is_the_factor() {
        // gcd(x^2 - 1, x - 1) = x - 1 over F_5
        let a = vec![4, 0, 1];
        let b = vec![4, 1];
        assert_eq!(gcd(&a, &b, 5), vec![4, 1]);
    }

    #[test]
    fn gcd_with_zero_is_monic_other() {
        let f = vec![0, 2]; // 2x over F_5
        assert_eq!(gcd(&f, &[], 5), vec![0, 1]);
        assert_eq!(gcd(&[], &[], 5), Vec::<u64>::new());
    }

    #[test]
    fn pow_x_mod_small_exponent_is_monomial() {
        let f = vec![1, 0, 0, 0, 1]; // x^4 + 1 over F_3
        assert_eq!(pow_x_mod(2, &f, 3), monomial(2));
    }

    #[test]
    fn pow_x_mod_matches_repeated_multiplication() {
        let f = vec![1, 2, 0, 1]; // x^3 + 2x + 1 over F_5
        let mut acc = vec![1u64];
        for e in 0..200u64 {
            assert_eq!(pow_x_mod(e, &f, 5), acc, "exponent {e}");
            acc.insert(0, 0);
            acc = rem(&acc, &f, 5);
        }
    }

    #[test]
    fn derivative_drops_char_multiples() {
        // d/dx (x^3 + x + 1) = 3x^2 + 1 = 1 over F_3
        let f = vec![1, 1, 0, 1];
        assert_eq!(derivative(&f, 3), vec![1]);
    }

    mod properties {
        use super::super::*;
        use proptest::prelude::*;

        fn poly(p: u64, max_deg: usize) -> impl Strategy<Value = Vec<u64>> {
            prop::collection::vec(0..p, 0..=max_deg + 1).prop_map(|mut v| {
                trim(&mut v);
                v
            })
        }

        fn prime() -> impl Strategy<Value = u64> {
            prop::sample::select(vec![2u64, 3, 5, 7, 13])
        }

        proptest! {
            #[test]
            fn rem_is_a_true_remainder((p, f, g) in prime().prop_flat_map(|p| {
                (Just(p), poly(p, 12), poly(p, 6))
            })) {
                prop_assume!(!is_zero(&g));
                let r = rem(&f, &g, p);
                // degree drops below the divisor
                prop_assert!(degree(&r).is_none_or(|d| d < degree(&g).unwrap()));
                // and f - r is a multiple of g
                let diff = sub(&f, &r, p);
                prop_assert!(is_zero(&rem(&diff, &g, p)));
            }

            #[test]
            fn gcd_divides_both_and_common_factors_survive((p, f, g, h) in
                prime().prop_flat_map(|p| {
                    (Just(p), poly(p, 6), poly(p, 6), poly(p, 4))
                }))
            {
                let d = gcd(&f, &g, p);
                if !is_zero(&d) {
                    if !is_zero(&f) {
                        prop_assert!(is_zero(&rem(&f, &d, p)));
                    }
                    if !is_zero(&g) {
                        prop_assert!(is_zero(&rem(&g, &d, p)));
                    }
                }
                // deg gcd(f h, g h) = deg h + deg gcd(f, g)
                prop_assume!(!is_zero(&f) && !is_zero(&g) && !is_zero(&h));
                let lifted = gcd(&mul(&f, &h, p), &mul(&g, &h, p), p);
                prop_assert_eq!(
                    degree(&lifted).unwrap(),
                    degree(&h).unwrap() + degree(&d).unwrap()
                );
            }

            #[test]
            fn mul_commutes_and_distributes((p, f, g, h) in prime().prop_flat_map(|p| {
                (Just(p), poly(p, 8), poly(p, 8), poly(p, 8))
            })) {
                prop_assert_eq!(mul(&f, &g, p), mul(&g, &f, p));
                let lhs = mul(&f, &sub(&g, &h, p), p);
                let rhs = sub(&mul(&f, &g, p), &mul(&f, &h, p), p);
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
