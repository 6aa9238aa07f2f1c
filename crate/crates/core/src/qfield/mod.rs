//! Exact arithmetic in imaginary quadratic fields K = Q(sqrt(D)).
//!
//! A field is identified by its fundamental discriminant D < 0.  Elements are
//! stored on the integral basis {1, w} with
//!
//! ```text
//! w = (D + sqrt(D)) / 2,
//! ```
//!
//! so that w has trace D and norm (D^2 - D)/4; for every fundamental D the
//! ring of integers is O_K = Z + Z*w, and "integral" means integer coordinates.
//! The complex embedding is fixed once and for all by sqrt(D) = i*sqrt(|D|)
//! (positive imaginary part); conjugation is w -> D - w.
//!
//! Submodules add fractional ideals in Hermite normal form ([`ideal`]) and
//! class groups with their character theory via reduced binary quadratic forms
//! ([`class_group`]).

mod class_group;
mod ideal;

pub use class_group::{class_group, ClassChar, ClassGroup, QuadForm};
pub use ideal::FracIdeal;

use crate::{Error, Result};
use rug::{Complex, Float, Integer, Rational};
use std::fmt;

/// Discriminants beyond this size are refused: the class-group enumeration and
/// the O(p) local routines are designed for desk-scale inputs only.
pub const MAX_ABS_DISC: i64 = 1_000_000;

/// An imaginary quadratic field of fundamental discriminant `d < 0`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct QuadField {
    d: i64,
}

/// How a rational prime decomposes in O_K.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SplitType {
    Split,
    Inert,
    Ramified,
}

impl QuadField {
    /// The field of fundamental discriminant `d`.
    ///
    /// `d` must be negative, congruent to 0 or 1 mod 4, fundamental
    /// (d squarefree if d = 1 mod 4; d/4 squarefree and = 2 or 3 mod 4 if
    /// d = 0 mod 4), and |d| <= 10^6.
    pub fn new(d: i64) -> Result<Self> {
        if d >= 0 {
            return Err(Error::NotFundamental(d));
        }
        if -d > MAX_ABS_DISC {
            return Err(Error::DiscTooLarge(d));
        }
        let fundamental = match d.rem_euclid(4) {
            1 => crate::arith::is_squarefree((-d) as u64),
            0 => {
                let m = d / 4;
                let mr = m.rem_euclid(4);
                (mr == 2 || mr == 3) && crate::arith::is_squarefree((-m) as u64)
            }
            _ => false,
        };
        if !fundamental {
            return Err(Error::NotFundamental(d));
        }
        Ok(QuadField { d })
    }

    pub fn disc(&self) -> i64 {
        self.d
    }

    /// Trace of w, namely D.
    pub fn omega_trace(&self) -> Integer {
        Integer::from(self.d)
    }

    /// Norm of w, namely (D^2 - D)/4.
    pub fn omega_norm(&self) -> Integer {
        let d = Integer::from(self.d);
        (d.clone() * &d - d) / 4u32
    }

    pub fn elem(&self, a: Rational, b: Rational) -> QElem {
        QElem { d: self.d, a, b }
    }

    pub fn from_int(&self, n: i64) -> QElem {
        self.elem(Rational::from(n), Rational::new())
    }

    pub fn from_rational(&self, q: Rational) -> QElem {
        self.elem(q, Rational::new())
    }

    pub fn zero(&self) -> QElem {
        self.from_int(0)
    }

    pub fn one(&self) -> QElem {
        self.from_int(1)
    }

    /// sqrt(|D|) at the given precision.
    pub fn sqrt_abs_disc(&self, prec: u32) -> Float {
        Float::with_val(prec, -self.d).sqrt()
    }

    /// The complex embedding of w: (D + i*sqrt(|D|)) / 2.
    pub fn omega_embedded(&self, prec: u32) -> Complex {
        let re = Float::with_val(prec, self.d) / 2u32;
        let im = self.sqrt_abs_disc(prec) / 2u32;
        Complex::with_val(prec, (re, im))
    }

    /// Number of roots of unity in O_K: 6 for D = -3, 4 for D = -4, else 2.
    pub fn unit_count(&self) -> u32 {
        match self.d {
            -3 => 6,
            -4 => 4,
            _ => 2,
        }
    }

    /// The roots of unity of O_K as explicit elements.
    pub fn units(&self) -> Vec<QElem> {
        let mut us = vec![self.one(), self.from_int(-1)];
        match self.d {
            -4 => {
                // i = w + 2 since w = -2 + i
                let i = self.elem(Rational::from(2), Rational::from(1));
                us.push(i.clone());
                us.push(i.neg());
            }
            -3 => {
                // zeta_6 = (1 + sqrt(-3))/2 = w + 2, zeta_3 = w + 1
                let z6 = self.elem(Rational::from(2), Rational::from(1));
                let z3 = self.elem(Rational::from(1), Rational::from(1));
                us.push(z6.clone());
                us.push(z6.neg());
                us.push(z3.clone());
                us.push(z3.neg());
            }
            _ => {}
        }
        us
    }

    /// Decomposition type of the rational prime p, by the Kronecker symbol (D/p).
    pub fn split_type(&self, p: u64) -> SplitType {
        match Integer::from(self.d).kronecker(&Integer::from(p)) {
            1 => SplitType::Split,
            -1 => SplitType::Inert,
            _ => SplitType::Ramified,
        }
    }

    /// A distinguished prime ideal of O_K above p.
    ///
    /// For split and ramified p the ideal is (p, w - r) where r is the
    /// distinguished root of the minimal polynomial x^2 - D x + (D^2-D)/4 of w
    /// modulo p.  For odd p the root is r = (D + s) / 2 mod p where s is the
    /// square root of D mod p normalized by 0 <= s <= p/2 (the deterministic
    /// representative; conjugate_prime gives the other factor).  For p = 2 the
    /// smaller root in {0, 1} is taken.  Inert p yields the principal ideal (p).
    pub fn prime_above(&self, p: u64) -> FracIdeal {
        match self.split_type(p) {
            SplitType::Inert => FracIdeal::principal(&self.from_int(p as i64)),
            _ => {
                let r = self.distinguished_omega_root(p);
                FracIdeal::prime_from_root(*self, p, r)
            }
        }
    }

    /// The distinguished root of minpoly(w) mod p (see `prime_above`).
    fn distinguished_omega_root(&self, p: u64) -> u64 {
        if p == 2 {
            // minpoly mod 2: x^2 - Dx + (D^2-D)/4; try x = 0 then x = 1.
            let n = self.omega_norm();
            if n.is_even() {
                return 0; // x = 0 is a root iff 2 | N(w)
            }
            return 1; // otherwise (split or ramified at 2) x = 1 is the root
        }
        let s0 = crate::arith::sqrt_mod(self.d, p).expect("split or ramified prime expected");
        let s = s0.min(p - s0);
        let half = crate::arith::inv_mod(2, p);
        let d_mod = (self.d).rem_euclid(p as i64) as u64;
        crate::arith::mul_mod((d_mod + s) % p, half, p)
    }
}

/// An element a + b*w of K, with rational coordinates on the basis {1, w}.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QElem {
    d: i64,
    a: Rational,
    b: Rational,
}

impl QElem {
    pub fn field(&self) -> QuadField {
        QuadField { d: self.d }
    }

    /// Coordinate on 1.
    pub fn coord_a(&self) -> &Rational {
        &self.a
    }

    /// Coordinate on w.
    pub fn coord_b(&self) -> &Rational {
        &self.b
    }

    fn check(&self, other: &QElem) {
        assert_eq!(
            self.d, other.d,
            "elements of different quadratic fields cannot be combined"
        );
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    pub fn is_rational(&self) -> bool {
        self.b == 0
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.a.clone())
    }

    pub fn add(&self, o: &QElem) -> QElem {
        self.check(o);
        QElem {
            d: self.d,
            a: Rational::from(&self.a + &o.a),
            b: Rational::from(&self.b + &o.b),
        }
    }

    pub fn sub(&self, o: &QElem) -> QElem {
        self.check(o);
        QElem {
            d: self.d,
            a: Rational::from(&self.a - &o.a),
            b: Rational::from(&self.b - &o.b),
        }
    }

    pub fn neg(&self) -> QElem {
        QElem {
            d: self.d,
            a: -self.a.clone(),
            b: -self.b.clone(),
        }
    }

    /// Product, using w^2 = D*w - N(w).
    pub fn mul(&self, o: &QElem) -> QElem {
        self.check(o);
        let f = self.field();
        let nw = Rational::from(f.omega_norm());
        let tw = Rational::from(f.omega_trace());
        let ac = Rational::from(&self.a * &o.a);
        let be = Rational::from(&self.b * &o.b);
        let cross = Rational::from(&self.a * &o.b) + Rational::from(&self.b * &o.a);
        QElem {
            d: self.d,
            a: ac - Rational::from(&be * &nw),
            b: cross + be * tw,
        }
    }

    pub fn mul_rational(&self, q: &Rational) -> QElem {
        QElem {
            d: self.d,
            a: Rational::from(&self.a * q),
            b: Rational::from(&self.b * q),
        }
    }

    /// Galois conjugate: w -> D - w, so a + b*w -> (a + b*D) - b*w.
    pub fn conj(&self) -> QElem {
        QElem {
            d: self.d,
            a: Rational::from(&self.a) + Rational::from(&self.b) * Rational::from(self.d),
            b: -self.b.clone(),
        }
    }

    /// Field norm N(a + b*w) = a^2 + a*b*D + b^2*(D^2-D)/4 (always >= 0 here).
    pub fn norm(&self) -> Rational {
        let f = self.field();
        let a2 = Rational::from(&self.a * &self.a);
        let b2 = Rational::from(&self.b * &self.b);
        let ab = Rational::from(&self.a * &self.b);
        a2 + ab * Rational::from(f.omega_trace()) + b2 * Rational::from(f.omega_norm())
    }

    pub fn trace(&self) -> Rational {
        Rational::from(&self.a) * 2u32 + Rational::from(&self.b) * Rational::from(self.d)
    }

    pub fn inv(&self) -> QElem {
        assert!(!self.is_zero(), "inverse of zero");
        let n = self.norm();
        self.conj().mul_rational(&n.recip())
    }

    pub fn div(&self, o: &QElem) -> QElem {
        self.mul(&o.inv())
    }

    pub fn pow(&self, e: u32) -> QElem {
        let mut acc = self.field().one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Image under the fixed complex embedding.
    pub fn embed(&self, prec: u32) -> Complex {
        let w = self.field().omega_embedded(prec);
        let a = Float::with_val(prec, &self.a);
        let b = Float::with_val(prec, &self.b);
        Complex::with_val(prec, (&a, &Float::new(prec))) + w * b
    }

    /// Exact square root in K, when one exists.  Writing xi = a + b*w and
    /// xi^2 = u + v*w gives u = a^2 - N(w) b^2 and v = b(2a + tr(w) b); for
    /// v != 0, s = b^2 solves D s^2 - (2 tr(w) v + 4u) s + v^2 = 0, so xi is
    /// found by testing whether a root of that quadratic is a rational
    /// square.  Of the pair {xi, -xi} the one with positive leading
    /// coordinate is returned.
    pub fn sqrt(&self) -> Option<QElem> {
        fn rat_sqrt(q: &Rational) -> Option<Rational> {
            if *q < 0 {
                return None;
            }
            if !q.numer().is_perfect_square() || !q.denom().is_perfect_square() {
                return None;
            }
            Some(Rational::from((
                q.numer().clone().sqrt(),
                q.denom().clone().sqrt(),
            )))
        }
        let f = self.field();
        let tw = Rational::from(f.omega_trace());
        let check = |cand: QElem| -> Option<QElem> {
            (cand.mul(&cand) == *self).then(|| {
                if cand.a < 0 || (cand.a == 0 && cand.b < 0) {
                    cand.neg()
                } else {
                    cand
                }
            })
        };
        let (u, v) = (&self.a, &self.b);
        if *v == 0 {
            if let Some(a) = rat_sqrt(u) {
                return check(f.elem(a, Rational::new()));
            }
            // root of a negative rational: a = -tr(w) b / 2, b^2 = 4u/D
            let s = Rational::from(u * 4u32) / Rational::from(f.disc());
            if let Some(b) = rat_sqrt(&s) {
                let a = -Rational::from(&b * &tw) / 2u32;
                return check(f.elem(a, b));
            }
            return None;
        }
        let dq = Rational::from(f.disc());
        let lin = Rational::from(v * 2u32) * tw.clone() + Rational::from(u * 4u32);
        let disc_q = Rational::from(&lin * &lin) - Rational::from(v * v) * dq.clone() * 4u32;
        let w = rat_sqrt(&disc_q)?;
        for sgn in [1i64, -1] {
            let s = (lin.clone() + w.clone() * Rational::from(sgn)) / (dq.clone() * 2u32);
            if s <= 0 {
                continue;
            }
            if let Some(b) = rat_sqrt(&s) {
                let a = (Rational::from(v) - s.clone() * tw.clone()) / (b.clone() * 2u32);
                if let Some(r) = check(f.elem(a, b)) {
                    return Some(r);
                }
            }
        }
        None
    }
}

impl fmt::Display for QElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b == 0 {
            write!(f, "{}", self.a)
        } else if self.a == 0 {
            write!(f, "{}*w", self.b)
        } else {
            write!(f, "{} + {}*w", self.a, self.b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fundamental_discriminants() {
        for d in [-3i64, -4, -7, -8, -11, -15, -19, -20, -23, -43, -84, -163] {
            assert!(QuadField::new(d).is_ok(), "d = {d}");
        }
        for d in [-1i64, -5, -9, -12, -16, -25, -27, -28, 5, 0] {
            assert!(QuadField::new(d).is_err(), "d = {d}");
        }
    }

    #[test]
    fn omega_satisfies_minimal_polynomial() {
        for d in [-4i64, -7, -20, -23] {
            let k = QuadField::new(d).unwrap();
            let w = k.elem(Rational::new(), Rational::from(1));
            // w^2 - D*w + N(w) = 0
            let lhs = w
                .mul(&w)
                .sub(&w.mul_rational(&Rational::from(d)))
                .add(&k.from_rational(Rational::from(k.omega_norm())));
            assert!(lhs.is_zero());
            assert_eq!(w.trace(), Rational::from(d));
            assert_eq!(w.norm(), Rational::from(k.omega_norm()));
        }
    }

    #[test]
    fn norms_in_gaussian_field() {
        let k = QuadField::new(-4).unwrap();
        // 1 + i = 3 + w since w = -2 + i
        let one_plus_i = k.elem(Rational::from(3), Rational::from(1));
        assert_eq!(one_plus_i.norm(), Rational::from(2));
        let prod = one_plus_i.mul(&one_plus_i.conj());
        assert_eq!(prod, k.from_int(2));
        assert_eq!(one_plus_i.mul(&one_plus_i.inv()), k.one());
    }

    #[test]
    fn embedding_consistent_with_norm() {
        let prec = 96;
        let k = QuadField::new(-7).unwrap();
        let x = k.elem(Rational::from((3, 2)), Rational::from((-5, 4)));
        let z = x.embed(prec);
        let n2 = Float::with_val(prec, z.norm_ref()); // |z|^2
        let exact = Float::with_val(prec, &x.norm());
        let diff = (n2 - exact).abs();
        assert!(diff < Float::with_val(prec, 1e-20));
    }

    #[test]
    fn split_types_gaussian() {
        let k = QuadField::new(-4).unwrap();
        assert_eq!(k.split_type(5), SplitType::Split);
        assert_eq!(k.split_type(13), SplitType::Split);
        assert_eq!(k.split_type(3), SplitType::Inert);
        assert_eq!(k.split_type(7), SplitType::Inert);
        assert_eq!(k.split_type(2), SplitType::Ramified);
    }

    #[test]
    fn units_are_units() {
        for d in [-3i64, -4, -7] {
            let k = QuadField::new(d).unwrap();
            let us = k.units();
            assert_eq!(us.len() as u32, k.unit_count());
            for u in &us {
                assert_eq!(u.norm(), Rational::from(1), "d={d} u={u}");
            }
            // distinct
            for i in 0..us.len() {
                for j in 0..i {
                    assert_ne!(us[i], us[j]);
                }
            }
        }
    }

    #[test]
    fn exact_square_roots() {
        let k = QuadField::new(-4).unwrap();
        // sqrt(-1) = i = 2 + w since w = -2 + i
        let i = k.from_int(-1).sqrt().unwrap();
        assert_eq!(i, k.elem(Rational::from(2), Rational::from(1)));
        assert_eq!(k.from_int(-4).sqrt().unwrap(), i.mul_rational(&Rational::from(2)));
        assert_eq!(k.from_int(9).sqrt().unwrap(), k.from_int(3));
        assert!(k.from_int(2).sqrt().is_none());
        assert!(k.from_int(5).sqrt().is_none());
        assert!(k.from_int(-3).sqrt().is_none());

        let k3 = QuadField::new(-3).unwrap();
        // sqrt(-3) = 3 + 2w since w = (-3 + sqrt(-3))/2
        let r = k3.from_int(-3).sqrt().unwrap();
        assert_eq!(r, k3.elem(Rational::from(3), Rational::from(2)));

        // round trips, including elements with v != 0 and denominators
        for (d, a, b) in [
            (-4i64, (3i64, 1u32), (2i64, 1u32)),
            (-4, (-5, 2), (7, 3)),
            (-3, (1, 1), (1, 1)),
            (-7, (2, 5), (-3, 4)),
            (-8, (0, 1), (3, 2)),
        ] {
            let kk = QuadField::new(d).unwrap();
            let xi = kk.elem(Rational::from(a), Rational::from(b));
            let sq = xi.mul(&xi);
            let back = sq.sqrt().expect("square must have a root");
            assert!(back == xi || back == xi.neg(), "d={d}");
        }

        // a norm that is a square without the element being one
        let k7 = QuadField::new(-7).unwrap();
        let x = k7.elem(Rational::from(1), Rational::from(2)); // norm 43
        assert_eq!(x.mul(&x).sqrt().unwrap(), x);
        assert!(x.sqrt().is_none());
    }
}
