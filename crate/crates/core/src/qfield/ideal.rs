//! Fractional ideals of O_K in Hermite normal form.
//!
//! A nonzero fractional ideal is stored as (1/den) * J where den is the least
//! positive integer with den*I integral and J is the integral ideal with
//! Z-basis {a, b + c*w} written as the upper-triangular matrix
//!
//! ```text
//! [ a  b ]
//! [ 0  c ],      0 <= b < a,   c | a,   c | b,   a*c | N(b + c*w).
//! ```
//!
//! The triple (a, b, c) is the unique Hermite normal form of the lattice J, so
//! ideal equality is literal equality of (den, a, b, c): there is exactly one
//! representation per ideal and all arithmetic canonicalizes on the way out.
//! The norm is a*c/den^2; multiplication runs on Z-module generators (products
//! of the two bases already span the product ideal, because the span of
//! {u_i v_j} is w-stable whenever the factors are ideals).

use super::{QElem, QuadField};
use crate::{Error, Result};
use rug::ops::RemRounding;
use rug::{Integer, Rational};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FracIdeal {
    field: QuadField,
    den: Integer,
    a: Integer,
    b: Integer,
    c: Integer,
}

impl FracIdeal {
    pub fn field(&self) -> QuadField {
        self.field
    }

    /// The HNF triple (a, b, c) of the integral part den * I.
    pub fn hnf(&self) -> (Integer, Integer, Integer) {
        (self.a.clone(), self.b.clone(), self.c.clone())
    }

    /// The denominator: least positive d with d * I integral.
    pub fn denominator(&self) -> Integer {
        self.den.clone()
    }

    pub fn is_integral(&self) -> bool {
        self.den == 1
    }

    /// N(I) = a*c / den^2.
    pub fn norm(&self) -> Rational {
        Rational::from((
            Integer::from(&self.a * &self.c),
            Integer::from(&self.den * &self.den),
        ))
    }

    /// The unit ideal O_K.
    pub fn one(field: QuadField) -> FracIdeal {
        FracIdeal {
            field,
            den: Integer::from(1),
            a: Integer::from(1),
            b: Integer::from(0),
            c: Integer::from(1),
        }
    }

    /// The principal ideal (x), x != 0.
    pub fn principal(x: &QElem) -> FracIdeal {
        assert!(!x.is_zero(), "zero ideal is not representable");
        Self::from_generators(x.field(), &[x.clone()]).expect("principal ideal")
    }

    /// The prime (p, w - r) where r is a root of minpoly(w) mod p.
    pub(super) fn prime_from_root(field: QuadField, p: u64, r: u64) -> FracIdeal {
        let p = Integer::from(p);
        let b = Integer::from(p.clone() - Integer::from(r)).rem_euc(p.clone());
        let id = FracIdeal {
            field,
            den: Integer::from(1),
            a: p,
            b,
            c: Integer::from(1),
        };
        id.debug_validate();
        id
    }

    /// The fractional ideal generated by the given elements (not all zero).
    pub fn from_generators(field: QuadField, gens: &[QElem]) -> Result<FracIdeal> {
        let mut lcm = Integer::from(1);
        for g in gens {
            if g.field() != field {
                return Err(Error::MixedFields(field.disc(), g.field().disc()));
            }
            lcm.lcm_mut(g.coord_a().denom());
            lcm.lcm_mut(g.coord_b().denom());
        }
        let tw = field.omega_trace();
        let nw = field.omega_norm();
        let mut rows: Vec<(Integer, Integer)> = Vec::new();
        for g in gens {
            if g.is_zero() {
                continue;
            }
            let x = Integer::from(g.coord_a().numer() * &lcm) / g.coord_a().denom();
            let y = Integer::from(g.coord_b().numer() * &lcm) / g.coord_b().denom();
            // the generator itself and its w-multiple:
            // w * (x + y*w) = -y*N(w) + (x + y*tr(w)) * w
            rows.push((x.clone(), y.clone()));
            rows.push((
                Integer::from(-&y) * &nw,
                x + Integer::from(&y * &tw),
            ));
        }
        if rows.is_empty() {
            return Err(Error::BadInput("zero ideal".into()));
        }
        let (a, b, c) = hnf_two_columns(rows);
        Ok(FracIdeal {
            field,
            den: lcm,
            a,
            b,
            c,
        }
        .canonicalized())
    }

    /// Rebuild an ideal from serialized data: I = (num/den) * (Z a + Z (b + c w)).
    pub fn from_scaled_hnf(
        field: QuadField,
        scale: Rational,
        a: Integer,
        b: Integer,
        c: Integer,
    ) -> Result<FracIdeal> {
        if scale <= 0 || a <= 0 || c <= 0 {
            return Err(Error::BadInput("ideal scale and hnf entries must be positive".into()));
        }
        let sa = field.elem(Rational::from(&a) * &scale, Rational::new());
        let sb = field.elem(Rational::from(&b) * &scale, Rational::from(&c) * &scale);
        FracIdeal::from_generators(field, &[sa, sb])
    }

    /// Serialize as `{"scale": "p/q", "hnf": [a, b, c]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let scale = Rational::from((Integer::from(1), self.den.clone()));
        serde_json::json!({
            "scale": scale.to_string(),
            "hnf": [self.a.to_string(), self.b.to_string(), self.c.to_string()],
        })
    }

    pub fn from_json(field: QuadField, v: &serde_json::Value) -> Result<FracIdeal> {
        let bad = || Error::BadInput(format!("malformed ideal JSON: {}", v));
        let scale: Rational = v["scale"]
            .as_str()
            .ok_or_else(bad)?
            .parse()
            .map_err(|_| bad())?;
        let hnf = v["hnf"].as_array().ok_or_else(bad)?;
        if hnf.len() != 3 {
            return Err(bad());
        }
        let mut parts = Vec::with_capacity(3);
        for e in hnf {
            let n: Integer = match (e.as_str(), e.as_i64()) {
                (Some(s), _) => s.parse().map_err(|_| bad())?,
                (None, Some(n)) => Integer::from(n),
                _ => return Err(bad()),
            };
            parts.push(n);
        }
        let c = parts.pop().unwrap();
        let b = parts.pop().unwrap();
        let a = parts.pop().unwrap();
        FracIdeal::from_scaled_hnf(field, scale, a, b, c)
    }

    fn canonicalized(mut self) -> FracIdeal {
        let mut g = Integer::from(self.a.gcd_ref(&self.b));
        g.gcd_mut(&self.c);
        g.gcd_mut(&self.den);
        if g > 1 {
            self.a /= &g;
            self.b /= &g;
            self.c /= &g;
            self.den /= &g;
        }
        self.debug_validate();
        self
    }

    fn debug_validate(&self) {
        debug_assert!(self.a > 0 && self.c > 0 && self.den > 0);
        debug_assert!(self.b >= 0 && self.b < self.a);
        debug_assert!(self.a.is_divisible(&self.c) && self.b.is_divisible(&self.c));
        // a*c | N(b + c*w) -- the w-closure condition
        let f = self.field;
        let n = Integer::from(&self.b * &self.b)
            + Integer::from(&self.b * &self.c) * f.omega_trace()
            + Integer::from(&self.c * &self.c) * f.omega_norm();
        debug_assert!(n.is_divisible(&Integer::from(&self.a * &self.c)));
    }

    /// Z-basis of the integral part den * I, as elements of O_K.
    pub fn integral_basis(&self) -> (QElem, QElem) {
        let f = self.field;
        (
            f.elem(Rational::from(&self.a), Rational::new()),
            f.elem(Rational::from(&self.b), Rational::from(&self.c)),
        )
    }

    pub fn mul(&self, other: &FracIdeal) -> Result<FracIdeal> {
        if self.field != other.field {
            return Err(Error::MixedFields(self.field.disc(), other.field.disc()));
        }
        let (u1, u2) = self.integral_basis();
        let (v1, v2) = other.integral_basis();
        let gens = [u1.mul(&v1), u1.mul(&v2), u2.mul(&v1), u2.mul(&v2)];
        let mut id = FracIdeal::from_generators(self.field, &gens)?;
        id.den *= Integer::from(&self.den * &other.den);
        Ok(id.canonicalized())
    }

    pub fn mul_rational(&self, q: &Rational) -> FracIdeal {
        assert!(*q != 0, "scaling an ideal by zero");
        let mut id = self.clone();
        let num = Integer::from(q.numer().clone().abs());
        id.a *= &num;
        id.b *= &num;
        id.c *= &num;
        id.den *= q.denom();
        id.canonicalized()
    }

    /// Galois conjugate ideal.
    pub fn conj(&self) -> FracIdeal {
        let f = self.field;
        let (u1, u2) = self.integral_basis();
        let mut id = FracIdeal::from_generators(f, &[u1.conj(), u2.conj()]).expect("conjugate");
        id.den *= &self.den;
        id.canonicalized()
    }

    /// I^-1 = conj(I) / N(I).
    pub fn inv(&self) -> FracIdeal {
        let n = self.norm();
        self.conj().mul_rational(&n.recip())
    }

    pub fn pow(&self, e: i32) -> Result<FracIdeal> {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut acc = FracIdeal::one(self.field);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// Membership test.
    pub fn contains(&self, x: &QElem) -> bool {
        if x.field() != self.field {
            return false;
        }
        if x.is_zero() {
            return true;
        }
        // den * x must lie in the integral part J.
        let u = Rational::from(x.coord_a()) * Rational::from(&self.den);
        let v = Rational::from(x.coord_b()) * Rational::from(&self.den);
        if !u.is_integer() || !v.is_integer() {
            return false;
        }
        let u = Rational::from(u).into_numer_denom().0;
        let v = Rational::from(v).into_numer_denom().0;
        if !v.is_divisible(&self.c) {
            return false;
        }
        let beta = Integer::from(&v / &self.c);
        let rest = u - beta * &self.b;
        rest.is_divisible(&self.a)
    }

    /// Whether I = (q) for a rational q, and if so the positive generator.
    pub fn rational_generator(&self) -> Option<Rational> {
        (self.b == 0 && self.a == self.c)
            .then(|| Rational::from((self.a.clone(), self.den.clone())))
    }

    /// A generator, when the ideal is principal and the shortest lattice vector
    /// realizes the norm.  For class-number-one fields this always succeeds;
    /// in general a None simply means "no generator found by reduction", which
    /// for fundamental discriminants is equivalent to "not principal".
    ///
    /// Lagrange--Gauss reduction on the rank-2 lattice den*I with the norm form
    /// as the metric: the shortest vector of a principal ideal (g) is g times a
    /// unit, and its norm equals N(I).
    pub fn principal_generator(&self) -> Option<QElem> {
        let (mut v1, mut v2) = self.integral_basis();
        let norm_int = |x: &QElem| -> Integer { x.norm().into_numer_denom().0 };
        if norm_int(&v2) < norm_int(&v1) {
            std::mem::swap(&mut v1, &mut v2);
        }
        loop {
            // bilinear form B(u,v) = (N(u+v) - N(u) - N(v)) / 2
            let n1 = norm_int(&v1);
            let b12 = (norm_int(&v1.add(&v2)) - &n1 - norm_int(&v2)) / Integer::from(2);
            // nearest integer to B/N1
            let mu = Rational::from((b12, n1.clone())).round();
            let mu_i = mu.into_numer_denom().0;
            v2 = v2.sub(&v1.mul_rational(&Rational::from(&mu_i)));
            if norm_int(&v2) >= norm_int(&v1) {
                break;
            }
            std::mem::swap(&mut v1, &mut v2);
        }
        let shortest = v1;
        let n_ideal = Integer::from(&self.a * &self.c);
        if norm_int(&shortest) == n_ideal {
            Some(shortest.mul_rational(&Rational::from((
                Integer::from(1),
                self.den.clone(),
            ))))
        } else {
            None
        }
    }

    /// Valuation of the ideal at the prime ideal `prime`.
    ///
    /// For integral J the count of `prime`-divisions that stay integral is
    /// exactly v(J), since J * P^-1 is integral iff J lies in P.  A general
    /// I = (1/den) * J then has v(I) = v(J) - v((den)).
    pub fn valuation_at(&self, prime: &FracIdeal) -> i64 {
        let pinv = prime.inv();
        let count = |start: FracIdeal| -> i64 {
            let mut j = start;
            let mut k = 0i64;
            loop {
                let next = j.mul(&pinv).expect("same field");
                if next.is_integral() {
                    j = next;
                    k += 1;
                } else {
                    return k;
                }
            }
        };
        let numerator_part = FracIdeal {
            field: self.field,
            den: Integer::from(1),
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
        };
        let mut v = count(numerator_part);
        if self.den != 1 {
            v -= count(FracIdeal::principal(
                &self.field.from_rational(Rational::from(&self.den)),
            ));
        }
        v
    }
}

/// Hermite normal form of the Z-module spanned by rows (x_i, y_i) representing
/// x_i + y_i * w.  Returns (a, b, c) with basis {a, b + c*w}; the module must
/// have full rank 2.
fn hnf_two_columns(mut rows: Vec<(Integer, Integer)>) -> (Integer, Integer, Integer) {
    // Reduce the w-column to a single row by iterated Bezout combinations.
    let mut comb: Option<(Integer, Integer)> = None; // row with y = gcd so far
    let mut xs: Vec<Integer> = Vec::new(); // rows with y = 0
    for (x, y) in rows.drain(..) {
        if y == 0 {
            xs.push(x);
            continue;
        }
        match comb.take() {
            None => comb = Some((x, y)),
            Some((cx, cy)) => {
                let (g, s, t) = cy.clone().extended_gcd(y.clone(), Integer::new());
                // g = s*cy + t*y
                let nx = Integer::from(&s * &cx) + Integer::from(&t * &x);
                // eliminate: the two rows reduce to (nx, g) and a y=0 leftover
                let q1 = Integer::from(&cy / &g);
                let q2 = Integer::from(&y / &g);
                // leftover = q2 * (cx, cy) - q1 * (x, y), whose y-part vanishes
                let leftover = Integer::from(&q2 * &cx) - Integer::from(&q1 * &x);
                xs.push(leftover);
                comb = Some((nx, g));
            }
        }
    }
    let (bx, c) = comb.expect("rank-2 module expected (w-column is zero)");
    let mut a = Integer::new();
    for x in xs {
        a.gcd_mut(&x);
    }
    assert!(a != 0, "rank-2 module expected (1-column is zero)");
    let c = c.abs();
    let b = bx.rem_euc(a.clone());
    (a, b, c)
}

impl fmt::Display for FracIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "[{}, {} + {}*w]", self.a, self.b, self.c)
        } else {
            write!(f, "(1/{})*[{}, {} + {}*w]", self.den, self.a, self.b, self.c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::QuadField;

    fn k20() -> QuadField {
        QuadField::new(-20).unwrap() // Q(sqrt(-5)), class number 2
    }

    #[test]
    fn unit_ideal_and_principal() {
        let k = QuadField::new(-4).unwrap();
        let one = FracIdeal::one(k);
        assert_eq!(one.norm(), Rational::from(1));
        let two = FracIdeal::principal(&k.from_int(2));
        assert_eq!(two.norm(), Rational::from(4));
        assert_eq!(two.hnf(), (Integer::from(2), Integer::from(0), Integer::from(2)));
        assert!(two.contains(&k.from_int(4)));
        assert!(!two.contains(&k.from_int(3)));
    }

    #[test]
    fn nonprincipal_square_is_two() {
        // (2, 1 + sqrt(-5))^2 = (2) in Q(sqrt(-5)): the classic non-principal
        // ideal whose square is principal.  sqrt(-5) = w + 10 on our basis.
        let k = k20();
        let g1 = k.from_int(2);
        let g2 = k.elem(Rational::from(11), Rational::from(1)); // 1 + sqrt(-5)
        let p2 = FracIdeal::from_generators(k, &[g1, g2]).unwrap();
        assert_eq!(p2.norm(), Rational::from(2));
        let sq = p2.mul(&p2).unwrap();
        assert_eq!(sq, FracIdeal::principal(&k.from_int(2)));
        // and the ideal itself is not principal
        assert!(p2.principal_generator().is_none());
    }

    #[test]
    fn inverse_multiplies_to_one() {
        let k = k20();
        let g2 = k.elem(Rational::from(11), Rational::from(1));
        let p2 = FracIdeal::from_generators(k, &[k.from_int(2), g2]).unwrap();
        let prod = p2.mul(&p2.inv()).unwrap();
        assert_eq!(prod, FracIdeal::one(k));
        // norm multiplicativity
        assert_eq!(p2.inv().norm(), Rational::from((1, 2)));
    }

    #[test]
    fn prime_above_splits_correctly() {
        let k = QuadField::new(-4).unwrap();
        let p5 = k.prime_above(5);
        assert_eq!(p5.norm(), Rational::from(5));
        let p5c = p5.conj();
        let prod = p5.mul(&p5c).unwrap();
        assert_eq!(prod, FracIdeal::principal(&k.from_int(5)));
        assert_ne!(p5, p5c);
        // ramified
        let p2 = k.prime_above(2);
        assert_eq!(p2.norm(), Rational::from(2));
        assert_eq!(p2.mul(&p2).unwrap(), FracIdeal::principal(&k.from_int(2)));
        // inert
        let p3 = k.prime_above(3);
        assert_eq!(p3.norm(), Rational::from(9));
    }

    #[test]
    fn principal_generator_in_gaussian_field() {
        let k = QuadField::new(-4).unwrap();
        let p5 = k.prime_above(5);
        let g = p5.principal_generator().expect("h(-4) = 1");
        assert_eq!(g.norm(), Rational::from(5));
        assert!(p5.contains(&g));
        assert_eq!(FracIdeal::principal(&g), p5);
    }

    #[test]
    fn denominators_canonicalize() {
        let k = QuadField::new(-7).unwrap();
        let x = k.elem(Rational::from((3, 2)), Rational::from((1, 6)));
        let i = FracIdeal::principal(&x);
        assert_eq!(i.norm(), x.norm());
        let j = i.mul_rational(&Rational::from(6));
        assert!(j.is_integral());
        let back = j.mul_rational(&Rational::from((1, 6)));
        assert_eq!(back, i);
    }

    #[test]
    fn valuations() {
        let k = QuadField::new(-4).unwrap();
        let p2 = k.prime_above(2);
        let x = FracIdeal::principal(&k.from_int(8)); // (2)^3 = p2^6
        assert_eq!(x.valuation_at(&p2), 6);
        let y = FracIdeal::principal(&k.from_rational(Rational::from((1, 2))));
        assert_eq!(y.valuation_at(&p2), -2);
        let p5 = k.prime_above(5);
        assert_eq!(x.valuation_at(&p5), 0);
        let z = FracIdeal::principal(&k.elem(Rational::from(3), Rational::from(1))); // 1+i
        assert_eq!(z.valuation_at(&p2), 1);
    }

    #[test]
    fn scaled_hnf_roundtrip() {
        let k = k20();
        let g2 = k.elem(Rational::from(11), Rational::from(1));
        let p2 = FracIdeal::from_generators(k, &[k.from_int(2), g2]).unwrap();
        let scaled = p2.mul_rational(&Rational::from((3, 7)));
        let (a, b, c) = scaled.hnf();
        let back = FracIdeal::from_scaled_hnf(
            k,
            Rational::from((Integer::from(1), scaled.denominator())),
            a,
            b,
            c,
        )
        .unwrap();
        assert_eq!(back, scaled);
    }
}
