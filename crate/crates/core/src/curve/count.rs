//! Point counts of reduced Weierstrass curves over prime fields.
//!
//! For an integral model E and a prime p of good reduction the count is taken
//! on the completed-square form: with z = 2y + a1 x + a3,
//!
//! ```text
//!   z^2 = 4x^3 + b2 x^2 + 2 b4 x + b6,
//! ```
//!
//! so for odd p
//!
//! ```text
//!   #E~(F_p) = p + 1 + sum_x chi(4x^3 + b2 x^2 + 2 b4 x + b6)
//! ```
//!
//! with chi the quadratic character of F_p (chi(0) = 0), evaluated with a
//! table of squares.  At p = 2 the four affine pairs are checked directly on
//! the long form.  The trace of Frobenius a_p = p + 1 - #E~(F_p) then feeds
//! the L-series machinery; the Hasse bound a_p^2 <= 4p is asserted on every
//! count in debug builds.

use rug::ops::RemRounding;
use rug::{Integer, Rational};

use crate::curve::CurveQ;
use crate::{Error, Result};

fn red_u64(x: &Rational, p: u64) -> u64 {
    debug_assert!(x.is_integer());
    Integer::from(x.numer().rem_euc(&Integer::from(p)))
        .to_u64()
        .unwrap()
}

/// The number of points of the reduction of an integral model at a good prime.
pub fn count_points(e: &CurveQ, p: u64) -> Result<u64> {
    if !e.is_integral() {
        return Err(Error::NotIntegral(
            "point counts need an integral model".into(),
        ));
    }
    if p < 2 || p > 50_000_000 {
        return Err(Error::BadInput(format!("unsupported prime {}", p)));
    }
    let pz = Integer::from(p);
    if e.disc().numer().is_divisible(&pz) {
        return Err(Error::BadInput(format!("bad reduction at {}", p)));
    }

    if p == 2 {
        let a = [
            red_u64(e.a1(), 2),
            red_u64(e.a2(), 2),
            red_u64(e.a3(), 2),
            red_u64(e.a4(), 2),
            red_u64(e.a6(), 2),
        ];
        let mut n = 1u64; // infinity
        for x in 0..2u64 {
            for y in 0..2u64 {
                let lhs = (y * y + a[0] * x * y + a[2] * y) % 2;
                let rhs = (x * x * x + a[1] * x * x + a[3] * x + a[4]) % 2;
                if lhs == rhs {
                    n += 1;
                }
            }
        }
        return Ok(n);
    }

    // chi via a table of squares
    let mut is_sq = vec![false; p as usize];
    for t in 0..p {
        is_sq[((t as u128 * t as u128) % p as u128) as usize] = true;
    }
    let b2 = red_u64(&e.b2(), p);
    let b4 = red_u64(&e.b4(), p);
    let b6 = red_u64(&e.b6(), p);
    let pw = p as u128;
    let (c3, c2, c1, c0) = (4u128, b2 as u128, (2 * b4 as u128) % pw, b6 as u128);
    let mut sum = 0i64;
    for x in 0..pw {
        let g = (((c3 * x + c2) % pw * x + c1) % pw * x + c0) % pw;
        if g == 0 {
            continue;
        }
        sum += if is_sq[g as usize] { 1 } else { -1 };
    }
    let n = (p as i64 + 1 + sum) as u64;
    // Hasse bound
    debug_assert!(
        (n as i64 - (p as i64 + 1)).pow(2) <= 4 * p as i64,
        "Hasse bound violated at {}",
        p
    );
    Ok(n)
}

/// a_p = p + 1 - #E~(F_p) at a good prime.
pub fn trace_of_frobenius(e: &CurveQ, p: u64) -> Result<i64> {
    Ok(p as i64 + 1 - count_points(e, p)? as i64)
}

/// The number of *nonsingular* points of the reduction mod p, infinity
/// included.  At a bad prime this sees only the smooth locus, so
/// p - #E~_ns(F_p) recovers the local coefficient: +1 split multiplicative,
/// -1 nonsplit, 0 additive.
pub fn count_nonsingular(e: &CurveQ, p: u64) -> Result<u64> {
    if !e.is_integral() {
        return Err(Error::NotIntegral(
            "point counts need an integral model".into(),
        ));
    }
    if p < 2 || p > 100_000 {
        return Err(Error::BadInput(format!(
            "bad-fibre counts are scan-based; prime {} out of range",
            p
        )));
    }
    let a = [
        red_u64(e.a1(), p),
        red_u64(e.a2(), p),
        red_u64(e.a3(), p),
        red_u64(e.a4(), p),
        red_u64(e.a6(), p),
    ];
    let pw = p as u128;
    let mut n = 1u64; // infinity is always smooth
    for x in 0..pw {
        for y in 0..pw {
            let f = (y * y + a[0] as u128 * x % pw * y + a[2] as u128 * y + 3 * pw * pw
                - (((x + a[1] as u128) % pw * x + a[3] as u128) % pw * x + a[4] as u128))
                % pw;
            if f != 0 {
                continue;
            }
            let fy = (2 * y + a[0] as u128 * x + a[2] as u128) % pw;
            let fx = (a[0] as u128 * y + 3 * pw * pw
                - ((3 * x + 2 * a[1] as u128) % pw * x + a[3] as u128))
                % pw;
            if fy != 0 || fx != 0 {
                n += 1;
            }
        }
    }
    Ok(n)
}

use crate::curve::fq::Fq;
use crate::curve::tate::{KPlace, TatePlace};
use crate::curve::CurveK;

/// The number of points of the reduction of an integral K-model at a good
/// place, over the residue field F_q (q = p or p^2).
pub fn count_points_k(e: &CurveK, place: &KPlace) -> Result<u64> {
    if !e.is_integral() {
        return Err(Error::NotIntegral(
            "point counts need an integral model".into(),
        ));
    }
    if place.val(e.disc()) != 0 {
        return Err(Error::BadInput(format!(
            "bad reduction at {}",
            place.label()
        )));
    }
    let f: &Fq = place.fq();
    let q = f.q();
    if q > 1 << 21 {
        return Err(Error::BadInput(format!("residue field F_{} too large", q)));
    }
    let a: Vec<_> = e.coeffs().iter().map(|c| place.reduce(c)).collect();
    let mut n = 1u64;
    if place.residue_char() == 2 {
        for x in f.elements() {
            for y in f.elements() {
                let lhs = f.add(f.mul(y, y), f.mul(y, f.add(f.mul(a[0], x), a[2])));
                let rhs = f.add(
                    f.mul(f.mul(x, x), f.add(x, a[1])),
                    f.add(f.mul(a[3], x), a[4]),
                );
                if lhs == rhs {
                    n += 1;
                }
            }
        }
        return Ok(n);
    }
    // odd characteristic: complete the square; #fibre(x) = 1 + chi(d(x))
    // with d = (a1 x + a3)^2 + 4(x^3 + a2 x^2 + a4 x + a6)
    let exp = ((q - 1) / 2) as u128;
    for x in f.elements() {
        let lin = f.add(f.mul(a[0], x), a[2]);
        let cubic = f.add(
            f.mul(f.mul(x, x), f.add(x, a[1])),
            f.add(f.mul(a[3], x), a[4]),
        );
        let d = f.add(f.mul(lin, lin), f.mul(f.from_u64(4), cubic));
        if f.is_zero(d) {
            n += 1;
        } else if f.pow(d, exp) == f.one() {
            n += 2;
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_on_cm_curve() {
        // y^2 = x^3 - x: a_5 = -2 (5 = 1 mod 4 splits) and a_7 = 0
        // (supersingular at 7 = 3 mod 4)
        let e = CurveQ::from_ints([0, 0, 0, -1, 0]).unwrap();
        assert_eq!(count_points(&e, 5).unwrap(), 8);
        assert_eq!(count_points(&e, 7).unwrap(), 8);
        assert_eq!(trace_of_frobenius(&e, 13).unwrap(), 6, "13 = (3+2i)(3-2i), a = 2 Re(pi~) = 6");
    }

    #[test]
    fn count_at_two_by_scanning() {
        // y^2 + y = x^3 - x^2 - 10x - 20 has good reduction at 2 with a_2 = -2
        let e = CurveQ::from_ints([0, -1, 1, -10, -20]).unwrap();
        assert_eq!(count_points(&e, 2).unwrap(), 5);
        assert_eq!(trace_of_frobenius(&e, 2).unwrap(), -2);
    }

    #[test]
    fn rejects_bad_primes() {
        let e = CurveQ::from_ints([0, 0, 0, -1, 0]).unwrap();
        assert!(count_points(&e, 2).is_err(), "additive reduction at 2");
    }

    #[test]
    fn hasse_bound_along_small_primes() {
        let e = CurveQ::from_ints([0, 0, 1, -1, 0]).unwrap();
        for p in crate::arith::primes_up_to(200) {
            if e.disc().numer().is_divisible(&Integer::from(p)) {
                continue;
            }
            let a = trace_of_frobenius(&e, p).unwrap();
            assert!(a * a <= 4 * p as i64);
        }
    }

    #[test]
    fn smooth_locus_at_bad_primes() {
        // y^2 + y = x^3 - x^2 - 10x - 20 is split multiplicative at 11
        // (local coefficient +1), so the smooth locus has 11 - 1 points.
        let e = CurveQ::from_ints([0, -1, 1, -10, -20]).unwrap();
        assert_eq!(count_nonsingular(&e, 11).unwrap(), 10);

        // y^2 = x^3 - x is additive at 2: only the cusp is singular and the
        // local coefficient is 0, so the count is exactly p.
        let e = CurveQ::from_ints([0, 0, 0, -1, 0]).unwrap();
        assert_eq!(count_nonsingular(&e, 2).unwrap(), 2);

        // y^2 = x^3 + x^2 + p (disc -16p(4 + 27p)) reduces mod p to a node
        // with rational slopes +-1: split multiplicative, count = p - 1.
        for p in [3i64, 5, 7, 13] {
            let e = CurveQ::from_ints([0, 1, 0, 0, p]).unwrap();
            assert_eq!(count_nonsingular(&e, p as u64).unwrap(), p as u64 - 1);
        }
        // y^2 = x^3 - x^2 - 3 has a node mod 3 with slopes +-sqrt(-1), which
        // are not in F_3: nonsplit, count = p + 1.
        let e = CurveQ::from_ints([0, -1, 0, 0, -3]).unwrap();
        assert_eq!(count_nonsingular(&e, 3).unwrap(), 4);
    }

    #[test]
    fn agreement_with_full_count_at_good_primes() {
        let e = CurveQ::from_ints([0, 0, 1, -1, 0]).unwrap();
        for p in [3u64, 5, 7, 13, 101] {
            assert_eq!(
                count_nonsingular(&e, p).unwrap(),
                count_points(&e, p).unwrap()
            );
        }
    }

    #[test]
    fn residue_field_counts_over_gaussian_field() {
        use crate::qfield::QuadField;

        let k = QuadField::new(-4).unwrap();
        // y^2 = x^3 - x base-changed to Q(i)
        let e = CurveQ::from_ints([0, 0, 0, -1, 0])
            .unwrap()
            .base_change(k)
            .unwrap();

        // split prime above 5: residue field F_5, count as over Q
        let p5 = k.prime_above(5);
        let place = KPlace::new(&k, &p5).unwrap();
        assert_eq!(count_points_k(&e, &place).unwrap(), 8);

        // inert prime 3: residue field F_9; a_3 = 0 over Q so the count is
        // (3 + 1)^2 - 2*3 - ... = 9 + 1 - (a_3^2 - 2*3) = 16
        let p3 = k.prime_above(3);
        let place = KPlace::new(&k, &p3).unwrap();
        assert_eq!(count_points_k(&e, &place).unwrap(), 16);

        // inert prime 7 likewise: 49 + 1 - (0 - 14) = 64
        let p7 = k.prime_above(7);
        let place = KPlace::new(&k, &p7).unwrap();
        assert_eq!(count_points_k(&e, &place).unwrap(), 64);

        // the ramified prime (1 + i) is bad for this model
        let p2 = k.prime_above(2);
        let place = KPlace::new(&k, &p2).unwrap();
        assert!(count_points_k(&e, &place).is_err());
    }

    #[test]
    fn residue_field_count_in_even_characteristic() {
        use crate::qfield::QuadField;

        // 2 is inert in Q(sqrt(-3)); y^2 + y = x^3 has good reduction there
        // and is supersingular at 2 with a_2 = 0 over Q, so over F_4 the
        // count is 4 + 1 - (0 - 2*2) = 9.
        let k = QuadField::new(-3).unwrap();
        let e = CurveQ::from_ints([0, 0, 1, 0, 0])
            .unwrap()
            .base_change(k)
            .unwrap();
        let p2 = k.prime_above(2);
        let place = KPlace::new(&k, &p2).unwrap();
        assert_eq!(count_points_k(&e, &place).unwrap(), 9);
    }
}
