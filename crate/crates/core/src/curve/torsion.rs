//! Rational torsion subgroups by the integrality theorem of Lutz and Nagell.
//!
//! Any model is first brought to minimal form, then mapped to the scaled
//! short form
//!
//! ```text
//!   Y^2 = X^3 - 27 c4 X - 54 c6,     X = 36x + 3b2,  Y = 108(2y + a1 x + a3),
//! ```
//!
//! whose discriminant is 6^12 Delta.  A torsion point has integral X, Y
//! there, with Y = 0 or Y^2 dividing the discriminant, so the candidate
//! Y-values run over divisors of the square part.  For each Y the integer
//! roots of X^3 - 27 c4 X - 54 c6 - Y^2 are found by exact bisection on the
//! monotone segments of the cubic (no floating point), and every surviving
//! point is certified by computing its order directly.
//!
//! Candidates are cut down early by the reduction maps: for two good odd
//! primes p the torsion injects into E~(F_p), so the order divides
//! gcd(#E~(F_p1), #E~(F_p2)).  The subgroup structure Z/n1 x Z/n2 (n2 | n1)
//! is read off the number of 2-torsion points.

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::arith;
use crate::curve::count::{count_points, count_points_k};
use crate::curve::tate::{minimal_model_q, KPlace, TatePlace, Transform};
use crate::curve::{CurveK, CurveQ, ExactField, Point, Rationals};
use crate::hp;
use crate::qfield::{FracIdeal, QElem, QuadField, SplitType};
use crate::{Error, Result};

/// The torsion subgroup of a curve over its field of definition.
#[derive(Clone, Debug)]
pub struct TorsionInfo<F: ExactField = Rationals> {
    pub order: u64,
    /// cyclic invariants (n1, n2) with n2 | n1 and |T| = n1 n2
    pub structure: (u64, u64),
    /// every torsion point, in the coordinates of the input model
    pub points: Vec<Point<F>>,
}

fn cubic_at(a: &Integer, b: &Integer, x: &Integer) -> Integer {
    let x2 = Integer::from(x * x);
    Integer::from(&x2 * x) + Integer::from(a * x) + b
}

fn bisect_root(
    a: &Integer,
    b: &Integer,
    mut lo: Integer,
    mut hi: Integer,
    increasing: bool,
) -> Option<Integer> {
    let flo = cubic_at(a, b, &lo);
    if flo == 0 {
        return Some(lo);
    }
    let fhi = cubic_at(a, b, &hi);
    if fhi == 0 {
        return Some(hi);
    }
    // a root can only be bracketed by a sign change
    if (flo > 0) == (fhi > 0) {
        return None;
    }
    while Integer::from(&hi - &lo) > 1 {
        let mid = Integer::from(&lo + &hi) >> 1;
        let fm = cubic_at(a, b, &mid);
        if fm == 0 {
            return Some(mid);
        }
        if (fm < 0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    None
}

/// Integer roots of X^3 + a X + b.
fn integer_roots_depressed(a: &Integer, b: &Integer) -> Vec<Integer> {
    let m = Integer::from(1) + Integer::from(a.abs_ref()) + Integer::from(b.abs_ref());
    let mut roots = Vec::new();
    let mut push = |r: Option<Integer>| {
        if let Some(r) = r {
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
    };
    if *a >= 0 {
        // strictly increasing on all of Z
        push(bisect_root(a, b, -m.clone(), m, true));
    } else {
        // critical points at +-sqrt(-a/3): increasing, decreasing, increasing
        let fs = (-(Integer::from(a)) / 3u32).sqrt();
        let lo_end = Integer::from(-&fs) - 1u32;
        let hi_start = Integer::from(&fs) + 1u32;
        push(bisect_root(a, b, -m.clone(), lo_end, true));
        push(bisect_root(a, b, Integer::from(-&fs), fs, false));
        push(bisect_root(a, b, hi_start, m, true));
    }
    roots
}

/// Divisors d >= 1 with d^2 dividing n.
fn square_divisors(n: &Integer) -> Vec<Integer> {
    let mut divs = vec![Integer::from(1)];
    for (p, e) in arith::factor(&Integer::from(n.abs_ref())) {
        let half = e / 2;
        if half == 0 {
            continue;
        }
        let mut next = Vec::with_capacity(divs.len() * (half as usize + 1));
        for d in &divs {
            let mut q = d.clone();
            next.push(q.clone());
            for _ in 0..half {
                q = Integer::from(&q * &p);
                next.push(q.clone());
            }
        }
        divs = next;
    }
    divs
}

/// Compute the torsion subgroup of E(Q).
pub fn torsion_q(e: &CurveQ) -> Result<TorsionInfo> {
    let f = Rationals;
    let (em, tr_min) = minimal_model_q(e)?;

    // map the minimal model to Y^2 = X^3 - 27 c4 X - 54 c6
    let b2 = em.b2();
    let r = Rational::from(-&b2) / 12u32;
    let t_short = Transform {
        u: Rational::from((1, 6)),
        r: r.clone(),
        s: Rational::from(-em.a1()) / 2u32,
        t: -(em.a3().clone() + em.a1().clone() * r) / 2u32,
    };
    let short = em.transform(&t_short.u, &t_short.r, &t_short.s, &t_short.t)?;
    debug_assert_eq!(*short.a4(), Rational::from(-27) * em.c4());
    debug_assert_eq!(*short.a6(), Rational::from(-54) * em.c6());
    let a_short = short.a4().numer().clone();
    let b_short = short.a6().numer().clone();
    // net transform from the input model to the short model
    let tr = Transform::compose(&f, &tr_min, &t_short);

    // reduction bound from two good odd primes
    let mut bound = 0u64;
    let mut p = 3u64;
    let mut used = 0;
    while used < 2 {
        if !em.disc().numer().is_divisible(&Integer::from(p)) {
            let n = count_points(&em, p)?;
            bound = if bound == 0 { n } else { arith::gcd_u64(bound, n) };
            used += 1;
        }
        p = arith::next_prime(p);
    }

    let mut points: Vec<Point<Rationals>> = vec![Point::Infinity];
    if bound > 1 {
        let delta_short = Integer::from(6u32).pow(12) * em.disc().numer();
        let mut ys = square_divisors(&delta_short);
        ys.insert(0, Integer::from(0));
        for y in ys {
            let shifted = Integer::from(&b_short) - Integer::from(&y * &y);
            for x in integer_roots_depressed(&a_short, &shifted) {
                for sy in if y == 0 {
                    vec![Integer::from(0)]
                } else {
                    vec![y.clone(), Integer::from(-&y)]
                } {
                    let (px, py) = tr.pull_point(&f, &Rational::from(&x), &Rational::from(sy));
                    let cand = Point::Affine(px, py);
                    if !e.contains(&cand) || points.contains(&cand) {
                        continue;
                    }
                    match e.point_order(&cand, 16) {
                        Some(ord) if bound % ord == 0 => points.push(cand),
                        _ => {}
                    }
                }
            }
        }
    }

    let order = points.len() as u64;
    debug_assert!(bound % order == 0, "torsion injects into good reductions");
    // structure from the 2-torsion count
    let two_torsion = points
        .iter()
        .filter(|pt| matches!(e.mul_point(2, pt), Point::Infinity))
        .count();
    let structure = match two_torsion {
        4 => (order / 2, 2),
        _ => (order, 1),
    };
    debug_assert_eq!(structure.0 * structure.1, order);
    // the set must be closed under addition
    debug_assert!(points
        .iter()
        .all(|q| points.contains(&e.add_points(&points[points.len() / 2], q))));
    Ok(TorsionInfo {
        order,
        structure,
        points,
    })
}

// ---- torsion over an imaginary quadratic field ----------------------------
//
// Lutz-Nagell integrality is replaced by division polynomials.  On the short
// model Y^2 = C(X) = X^3 + AX + B (A = -27 c4, B = -54 c6, X = 36x + 3 b2)
// write psi_d = h_d for odd d and psi_d = 2Y h_d for even d; then h_d is a
// polynomial in X alone whose roots are exactly the X-coordinates of the
// points of order dividing d, 2-torsion excluded.  With 16 C^2 = (2Y)^4 the
// doubling recurrences close on the h_d:
//
// ```text
//   h_{2m}   = h_m (h_{m+2} h_{m-1}^2 - h_{m-2} h_{m+1}^2),
//   h_{2m+1} = 16 C^2 h_{m+2} h_m^3 - h_{m-1} h_{m+1}^3      (m even),
//   h_{2m+1} = h_{m+2} h_m^3 - 16 C^2 h_{m-1} h_{m+1}^3      (m odd).
// ```
//
// Candidate X-values are complex roots of h_d recognized as elements of K
// with modest denominator; each candidate is completed to a point by an exact
// square root in K and certified by computing its order.  Torsion of a curve
// over a quadratic field has exponent at most 18, so the h_d are only ever
// needed up to d = 18.

type KPoly = Vec<QElem>;

fn kp_trim(mut a: KPoly) -> KPoly {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn kp_mul(k: &QuadField, a: &[QElem], b: &[QElem]) -> KPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![k.zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            out[i + j] = out[i + j].add(&ai.mul(bj));
        }
    }
    out
}

fn kp_sub(k: &QuadField, a: &[QElem], b: &[QElem]) -> KPoly {
    let n = a.len().max(b.len());
    let mut out = vec![k.zero(); n];
    for (i, c) in a.iter().enumerate() {
        out[i] = c.clone();
    }
    for (i, c) in b.iter().enumerate() {
        out[i] = out[i].sub(c);
    }
    kp_trim(out)
}

fn kp_scale(a: &[QElem], c: &QElem) -> KPoly {
    a.iter().map(|x| x.mul(c)).collect()
}

/// h_0 .. h_18 for Y^2 = X^3 + aX + b.
fn division_h(k: &QuadField, a: &QElem, b: &QElem) -> Vec<KPoly> {
    let z = k.zero();
    let one = k.one();
    let c = vec![b.clone(), a.clone(), z.clone(), one.clone()];
    let c2_16 = kp_scale(&kp_mul(k, &c, &c), &k.from_int(16));
    let a2 = a.mul(a);
    let a3 = a2.mul(a);
    let b2 = b.mul(b);

    let mut h: Vec<KPoly> = Vec::with_capacity(19);
    h.push(Vec::new()); // h_0 = 0
    h.push(vec![one.clone()]);
    h.push(vec![one.clone()]);
    h.push(vec![
        a2.neg(),
        b.mul_rational(&Rational::from(12)),
        a.mul_rational(&Rational::from(6)),
        z.clone(),
        k.from_int(3),
    ]);
    h.push(kp_scale(
        &[
            b2.mul_rational(&Rational::from(-8)).sub(&a3),
            a.mul(b).mul_rational(&Rational::from(-4)),
            a2.mul_rational(&Rational::from(-5)),
            b.mul_rational(&Rational::from(20)),
            a.mul_rational(&Rational::from(5)),
            z.clone(),
            one.clone(),
        ],
        &k.from_int(2),
    ));
    for n in 5..=18usize {
        let m = n / 2;
        let cube = |p: &[QElem]| kp_mul(k, &kp_mul(k, p, p), p);
        let poly = if n % 2 == 1 {
            let t1 = kp_mul(k, &h[m + 2], &cube(&h[m]));
            let t2 = kp_mul(k, &h[m - 1], &cube(&h[m + 1]));
            if m % 2 == 0 {
                kp_sub(k, &kp_mul(k, &c2_16, &t1), &t2)
            } else {
                kp_sub(k, &t1, &kp_mul(k, &c2_16, &t2))
            }
        } else {
            let s1 = kp_mul(k, &h[m + 2], &kp_mul(k, &h[m - 1], &h[m - 1]));
            let s2 = kp_mul(k, &h[m - 2], &kp_mul(k, &h[m + 1], &h[m + 1]));
            kp_mul(k, &h[m], &kp_sub(k, &s1, &s2))
        };
        debug_assert_eq!(
            poly.len().saturating_sub(1),
            if n % 2 == 1 { (n * n - 1) / 2 } else { (n * n - 4) / 2 },
            "degree of h_{}",
            n
        );
        h.push(poly);
    }
    h
}

/// Elements of K among the roots of a polynomial with coefficients in K,
/// found numerically and certified by exact evaluation.
fn exact_roots_in_k(k: &QuadField, poly: &[QElem], max_den: &Integer) -> Vec<QElem> {
    let prec = 256;
    let poly = kp_trim(poly.to_vec());
    if poly.len() < 2 {
        return Vec::new();
    }
    let coeffs: Vec<_> = poly.iter().map(|c| c.embed(prec)).collect();
    let tol = hp::recognition_tol(prec);
    let mut out: Vec<QElem> = Vec::new();
    for z in hp::complex_roots(&coeffs) {
        let Ok(x) = hp::recognize_k_element(k, &z, max_den, &tol) else {
            continue;
        };
        if out.contains(&x) {
            continue;
        }
        // certify: exact evaluation by Horner
        let mut val = k.zero();
        for c in poly.iter().rev() {
            val = val.mul(&x).add(c);
        }
        if val.is_zero() {
            out.push(x);
        }
    }
    out
}

/// Compute the torsion subgroup of E(K) for an integral model over an
/// imaginary quadratic field.
pub fn torsion_k(e: &CurveK) -> Result<TorsionInfo<QuadField>> {
    let k = e.field().clone();
    if !e.is_integral() {
        return Err(Error::NotIntegral(
            "torsion over K starts from an integral model".into(),
        ));
    }

    // order bound: torsion injects into the smooth reduction at every good
    // unramified place; gcd the counts over several of them
    let mut bound = 0u64;
    let mut used = 0;
    let mut p = 3u64;
    while used < 10 && p < 500 {
        let prime = match k.split_type(p) {
            SplitType::Split => k.prime_above(p),
            SplitType::Inert => FracIdeal::principal(&k.from_int(p as i64)),
            SplitType::Ramified => {
                p = arith::next_prime(p);
                continue;
            }
        };
        let place = KPlace::new(&k, &prime)?;
        if place.val(e.disc()) != 0 {
            p = arith::next_prime(p);
            continue;
        }
        let n = count_points_k(e, &place)?;
        bound = if bound == 0 { n } else { arith::gcd_u64(bound, n) };
        used += 1;
        if bound == 1 {
            break;
        }
        p = arith::next_prime(p);
    }

    let mut points: Vec<Point<QuadField>> = vec![Point::Infinity];
    if bound > 1 {
        let max_den = Integer::from(10_000);
        let a_short = e.c4().mul_rational(&Rational::from(-27));
        let b_short = e.c6().mul_rational(&Rational::from(-54));

        // candidate X-values on the short model
        let mut xs: Vec<QElem> = Vec::new();
        let mut add_xs = |mut v: Vec<QElem>| {
            for x in v.drain(..) {
                if !xs.contains(&x) {
                    xs.push(x);
                }
            }
        };
        if bound % 2 == 0 {
            let c = vec![b_short.clone(), a_short.clone(), k.zero(), k.one()];
            add_xs(exact_roots_in_k(&k, &c, &max_den));
        }
        let needs_h = (3..=18).any(|d| bound % d == 0);
        if needs_h {
            let hs = division_h(&k, &a_short, &b_short);
            for d in 3..=18usize {
                if bound % d as u64 == 0 {
                    add_xs(exact_roots_in_k(&k, &hs[d], &max_den));
                }
            }
        }

        // complete each X to points of the original model
        let b2 = e.b2();
        for xs_val in xs {
            let x = xs_val
                .sub(&b2.mul_rational(&Rational::from(3)))
                .mul_rational(&Rational::from((1, 36)));
            // y^2 + (a1 x + a3) y = x^3 + a2 x^2 + a4 x + a6
            let lin = e.a1().mul(&x).add(e.a3());
            let x2 = x.mul(&x);
            let rhs = x2
                .mul(&x)
                .add(&e.a2().mul(&x2))
                .add(&e.a4().mul(&x))
                .add(e.a6());
            let disc_y = lin.mul(&lin).add(&rhs.mul_rational(&Rational::from(4)));
            let Some(root) = disc_y.sqrt() else {
                continue;
            };
            let half = Rational::from((1, 2));
            let mut ys = vec![lin.neg().add(&root).mul_rational(&half)];
            if !root.is_zero() {
                ys.push(lin.neg().sub(&root).mul_rational(&half));
            }
            for y in ys {
                let cand = Point::Affine(x.clone(), y);
                debug_assert!(e.contains(&cand));
                if points.contains(&cand) {
                    continue;
                }
                match e.point_order(&cand, 25) {
                    Some(ord) if bound % ord == 0 => points.push(cand),
                    _ => {}
                }
            }
        }
    }

    let order = points.len() as u64;
    if order != bound {
        return Err(Error::TorsionUndetermined {
            lower: order,
            upper: bound,
        });
    }
    let exponent = points
        .iter()
        .map(|pt| e.point_order(pt, 25).expect("certified order"))
        .max()
        .unwrap_or(1);
    let structure = (exponent, order / exponent);
    debug_assert!(structure.0 % structure.1 == 0);
    Ok(TorsionInfo {
        order,
        structure,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has_affine(t: &TorsionInfo, x: i64, y: i64) -> bool {
        t.points
            .iter()
            .any(|p| *p == Point::Affine(Rational::from(x), Rational::from(y)))
    }

    #[test]
    fn five_torsion() {
        let e = CurveQ::from_ints([0, -1, 1, -10, -20]).unwrap();
        let t = torsion_q(&e).unwrap();
        assert_eq!(t.order, 5);
        assert_eq!(t.structure, (5, 1));
        assert!(has_affine(&t, 5, 5));
        assert!(has_affine(&t, 16, -61));
    }

    #[test]
    fn full_two_torsion() {
        let e = CurveQ::from_ints([0, 0, 0, -1, 0]).unwrap();
        let t = torsion_q(&e).unwrap();
        assert_eq!(t.order, 4);
        assert_eq!(t.structure, (2, 2));
        for (x, y) in [(0, 0), (1, 0), (-1, 0)] {
            assert!(has_affine(&t, x, y));
        }
    }

    #[test]
    fn trivial_torsion() {
        let e = CurveQ::from_ints([0, 0, 1, -1, 0]).unwrap();
        let t = torsion_q(&e).unwrap();
        assert_eq!(t.order, 1);
        assert_eq!(t.structure, (1, 1));
        assert_eq!(t.points, vec![Point::Infinity]);
    }

    #[test]
    fn cyclic_four_and_three() {
        let e = CurveQ::from_ints([0, 0, 0, 4, 0]).unwrap();
        let t = torsion_q(&e).unwrap();
        assert_eq!((t.order, t.structure), (4, (4, 1)));
        assert!(has_affine(&t, 2, 4));

        let e = CurveQ::from_ints([0, 0, 1, 0, 0]).unwrap();
        let t = torsion_q(&e).unwrap();
        assert_eq!((t.order, t.structure), (3, (3, 1)));
        assert!(has_affine(&t, 0, 0));
    }

    #[test]
    fn cyclic_six() {
        let e = CurveQ::from_ints([0, 1, 0, 4, 4]).unwrap();
        let t = torsion_q(&e).unwrap();
        assert_eq!((t.order, t.structure), (6, (6, 1)));
        assert!(has_affine(&t, 0, 2));
        assert!(has_affine(&t, 4, -10));
    }

    #[test]
    fn non_minimal_model_points_in_input_coordinates() {
        // u = 2 rescaling of y^2 = x^3 - x: torsion points scale by (4, 8)
        let e = CurveQ::from_ints([0, 0, 0, -16, 0]).unwrap();
        let t = torsion_q(&e).unwrap();
        assert_eq!(t.structure, (2, 2));
        assert!(has_affine(&t, 0, 0));
        assert!(has_affine(&t, 4, 0));
        assert!(has_affine(&t, -4, 0));
    }

    #[test]
    fn order_divides_good_counts() {
        for a in [
            [0i64, -1, 1, -10, -20],
            [0, 0, 0, -1, 0],
            [0, 1, 0, 4, 4],
            [0, 0, 1, 0, 0],
        ] {
            let e = CurveQ::from_ints(a).unwrap();
            let t = torsion_q(&e).unwrap();
            for p in [5u64, 7, 11, 13] {
                if e.disc().numer().is_divisible(&Integer::from(p)) {
                    continue;
                }
                assert_eq!(
                    count_points(&e, p).unwrap() % t.order,
                    0,
                    "torsion injects at {}",
                    p
                );
            }
        }
    }

    #[test]
    fn gaussian_torsion_of_the_lemniscatic_curve() {
        // y^2 = x^3 - x gains the order-4 points (+-i, +-(1 - i)) over Q(i)
        let k = QuadField::new(-4).unwrap();
        let e = CurveQ::from_ints([0, 0, 0, -1, 0])
            .unwrap()
            .base_change(k)
            .unwrap();
        let t = torsion_k(&e).unwrap();
        assert_eq!(t.order, 8);
        assert_eq!(t.structure, (4, 2));
        // i = 2 + w and 1 - i = -1 - w on the basis {1, w}
        let i = k.elem(Rational::from(2), Rational::from(1));
        let pt = Point::Affine(i.clone(), k.elem(Rational::from(-1), Rational::from(-1)));
        assert!(t.points.contains(&pt));
        assert_eq!(e.point_order(&pt, 10), Some(4));
        assert!(t.points.contains(&Point::Affine(k.zero(), k.zero())));
        assert!(t
            .points
            .contains(&Point::Affine(i.neg(), k.elem(Rational::from(3), Rational::from(1)))));
        // closure under addition
        for a in &t.points {
            for b in &t.points {
                assert!(t.points.contains(&e.add_points(a, b)));
            }
        }
    }

    #[test]
    fn eisenstein_torsion_of_a_mordell_curve() {
        // y^2 = x^3 + 1 has full 2-torsion and a 6-cycle over Q(zeta_3)
        let k = QuadField::new(-3).unwrap();
        let e = CurveQ::from_ints([0, 0, 0, 0, 1])
            .unwrap()
            .base_change(k)
            .unwrap();
        let t = torsion_k(&e).unwrap();
        assert_eq!(t.order, 12);
        assert_eq!(t.structure, (6, 2));
        // zeta_6 = 2 + w is a cube root of -1, giving new 2-torsion
        let z6 = k.elem(Rational::from(2), Rational::from(1));
        assert!(t.points.contains(&Point::Affine(z6, k.zero())));
        assert!(t.points.contains(&Point::Affine(k.zero(), k.one())));
        assert!(t.points.contains(&Point::Affine(k.from_int(2), k.from_int(-3))));
    }

    #[test]
    fn rational_torsion_that_does_not_grow() {
        let k = QuadField::new(-4).unwrap();
        let e = CurveQ::from_ints([0, -1, 1, -10, -20])
            .unwrap()
            .base_change(k)
            .unwrap();
        let t = torsion_k(&e).unwrap();
        assert_eq!((t.order, t.structure), (5, (5, 1)));
        assert!(t
            .points
            .contains(&Point::Affine(k.from_int(5), k.from_int(5))));
    }

    #[test]
    fn torsion_k_requires_an_integral_model() {
        let k = QuadField::new(-4).unwrap();
        let e = CurveQ::from_ints([0, 0, 0, -1, 0])
            .unwrap()
            .base_change(k)
            .unwrap()
            .transform(&k.from_int(2), &k.zero(), &k.zero(), &k.zero())
            .unwrap();
        assert!(matches!(torsion_k(&e), Err(Error::NotIntegral(_))));
    }
}
