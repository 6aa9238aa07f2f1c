//! Small-integer utilities shared across the exact layers: prime sieves,
//! modular square roots, desk-scale factorization, and continued-fraction
//! recognition of rationals from high-precision floats.
//!
//! Everything here is deliberately elementary.  The toolkit targets inputs
//! whose bad primes and class-group data are small (|D| <= 10^6, conductors up
//! to ~10^7), so trial division and O(p) loops are the honest choice; nothing
//! below is asymptotically clever and nothing needs to be.

use rug::{Float, Integer, Rational};

/// Primes up to `n` inclusive, by the classical sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            out.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    out
}

/// Smallest-prime-factor table for 0..=n; `spf[m] == m` exactly when m is prime.
/// Entries 0 and 1 are set to 0 and 1 and should not be consulted.
pub fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf: Vec<u32> = (0..=n as u32).collect();
    let mut p = 2usize;
    while p * p <= n {
        if spf[p] == p as u32 {
            let mut m = p * p;
            while m <= n {
                if spf[m] == m as u32 {
                    spf[m] = p as u32;
                }
                m += p;
            }
        }
        p += 1;
    }
    spf
}

/// x * y mod m without overflow.
#[inline]
pub fn mul_mod(x: u64, y: u64, m: u64) -> u64 {
    ((x as u128 * y as u128) % m as u128) as u64
}

/// x + y mod m without overflow (inputs already reduced).
#[inline]
pub fn add_mod(x: u64, y: u64, m: u64) -> u64 {
    ((x as u128 + y as u128) % m as u128) as u64
}

/// x - y mod m (inputs already reduced).
#[inline]
pub fn sub_mod(x: u64, y: u64, m: u64) -> u64 {
    if x >= y {
        x - y
    } else {
        x + (m - y)
    }
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The smallest prime strictly greater than n.
pub fn next_prime(n: u64) -> u64 {
    let mut m = Integer::from(n);
    m.next_prime_mut();
    m.to_u64().expect("next prime fits in u64")
}

/// x^e mod m by binary exponentiation.
pub fn pow_mod(mut x: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    x %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, x, m);
        }
        x = mul_mod(x, x, m);
        e >>= 1;
    }
    acc
}

/// Inverse of x modulo the odd prime p (x not divisible by p).
pub fn inv_mod(x: u64, p: u64) -> u64 {
    pow_mod(x % p, p - 2, p)
}

/// A square root of `a` modulo the prime `p`, if one exists.
///
/// Tonelli--Shanks; for p = 2 or p | a the answer is immediate, for
/// p = 3 mod 4 the exponent shortcut applies, and the general loop handles
/// p = 1 mod 4.  Returns the root r with 0 <= r < p (not normalized further;
/// callers that need the deterministic representative fold r -> min(r, p-r)).
pub fn sqrt_mod(a: i64, p: u64) -> Option<u64> {
    let a = a.rem_euclid(p as i64) as u64;
    if p == 2 {
        return Some(a % 2);
    }
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    // Write p - 1 = q * 2^s with q odd.
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    // Any quadratic non-residue serves as the seed.
    let mut z = 2u64;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1u64 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Factor `n` (|n| >= 1) by trial division, returning (prime, exponent) pairs
/// in increasing order of prime.  Desk-scale: intended for |n| with prime
/// factors below ~10^7; panics if an unfactored cofactor above the trial bound
/// squared survives, which cannot happen for inputs within the toolkit's
/// documented ranges.
pub fn factor(n: &Integer) -> Vec<(Integer, u32)> {
    let mut m = n.clone().abs();
    assert!(m != 0, "factor(0) is undefined");
    let mut out: Vec<(Integer, u32)> = Vec::new();
    let mut p = Integer::from(2);
    while m != 1 {
        let (q, r) = m.clone().div_rem(p.clone());
        if r == 0 {
            let mut e = 0u32;
            while m.is_divisible(&p) {
                m /= &p;
                e += 1;
            }
            out.push((p.clone(), e));
        } else if &q < &p {
            // remaining cofactor is prime
            out.push((m.clone(), 1));
            break;
        }
        p += 1u32;
        if p == 3 {
            continue;
        }
        if p.is_even() {
            p += 1u32;
        }
    }
    out
}

/// True if n (> 0) is squarefree.
pub fn is_squarefree(n: u64) -> bool {
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// The squarefree part s of n != 0, with n = s * t^2 and sign(s) = sign(n).
pub fn squarefree_part(n: i64) -> i64 {
    let mut m = n.unsigned_abs();
    let mut s = 1i64;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if e % 2 == 1 {
                s *= p as i64;
            }
        }
        p += 1;
    }
    s *= m as i64;
    if n < 0 {
        -s
    } else {
        s
    }
}

/// Nearest integer to a high-precision float.
pub fn round_to_integer(x: &Float) -> Integer {
    let half = Float::with_val(x.prec(), 0.5);
    let shifted = if x.is_sign_negative() {
        Float::with_val(x.prec(), x - &half)
    } else {
        Float::with_val(x.prec(), x + &half)
    };
    shifted.trunc().to_integer().expect("finite float expected")
}

/// Recognize `x` as a rational p/q with |q| <= max_den and |x - p/q| < tol,
/// via the continued-fraction expansion of x (best rational approximation).
///
/// The expansion runs on the exact dyadic value of x, so the procedure is
/// deterministic in the bits of x.  Returns None when no convergent with
/// denominator within the bound lands inside the tolerance.
pub fn recognize_rational(x: &Float, max_den: &Integer, tol: &Float) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let exact = Rational::from(x.to_rational()?);
    // Continued-fraction convergents p_k/q_k of `exact`.
    let (mut p0, mut q0) = (Integer::from(1), Integer::from(0));
    let (mut p1, mut q1) = (exact.clone().floor().into_numer_denom().0, Integer::from(1));
    let mut rem = exact.clone() - Rational::from(&p1);
    loop {
        let cand = Rational::from((p1.clone(), q1.clone()));
        let diff = Float::with_val(x.prec(), &cand) - x;
        if diff.abs() < *tol {
            return Some(cand);
        }
        if rem == 0 {
            return None;
        }
        let inv = rem.clone().recip();
        let a = inv.clone().floor().into_numer_denom().0;
        rem = inv - Rational::from(&a);
        let p2 = Integer::from(&a * &p1) + &p0;
        let q2 = Integer::from(&a * &q1) + &q0;
        if &q2 > max_den {
            return None;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
}

/// Kronecker symbol (a/n) on machine integers, delegating to GMP.
pub fn kronecker(a: i64, n: i64) -> i32 {
    Integer::from(a).kronecker(&Integer::from(n))
}
