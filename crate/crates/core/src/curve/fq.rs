//! Small finite fields F_p and F_{p^2} for residue computations.
//!
//! Tate's algorithm and naive point counting only ever see residue fields of
//! degree <= 2 over the prime field (places of Q and of an imaginary quadratic
//! field), so the representation is a pair a + b*t with t a root of a fixed
//! monic quadratic t^2 + c1 t + c0 irreducible mod p, and b = 0 identically in
//! the prime-field case.  Root finding for the degree <= 3 polynomials that
//! Tate's algorithm produces is by closed form (quadratic formula, Frobenius
//! square/cube roots) with a brute scan fallback for tiny fields.

use crate::arith;

/// Element a + b*t of F_q, with b = 0 for prime fields.
pub type FqEl = (u64, u64);

/// A finite field of degree 1 or 2 over F_p.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Fq {
    p: u64,
    /// modulus t^2 + c1 t + c0 of the quadratic extension, if any
    ext: Option<(u64, u64)>,
}

impl Fq {
    pub fn prime(p: u64) -> Fq {
        Fq { p, ext: None }
    }

    /// F_{p^2} = F_p[t]/(t^2 + c1 t + c0); the modulus must be irreducible.
    pub fn quadratic(p: u64, c1: u64, c0: u64) -> Fq {
        // a reducible monic quadratic over F_p has a root in F_p
        debug_assert!(
            Fq::prime(p)
                .poly_roots(&[(c0 % p, 0), (c1 % p, 0), (1, 0)])
                .is_empty(),
            "reducible modulus for F_p^2"
        );
        Fq {
            p,
            ext: Some((c1 % p, c0 % p)),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        match self.ext {
            None => self.p,
            Some(_) => self.p * self.p,
        }
    }

    pub fn zero(&self) -> FqEl {
        (0, 0)
    }
    pub fn one(&self) -> FqEl {
        (1 % self.p, 0)
    }
    pub fn from_u64(&self, n: u64) -> FqEl {
        (n % self.p, 0)
    }
    pub fn from_i64(&self, n: i64) -> FqEl {
        (n.rem_euclid(self.p as i64) as u64, 0)
    }
    pub fn is_zero(&self, a: FqEl) -> bool {
        a == (0, 0)
    }

    pub fn add(&self, a: FqEl, b: FqEl) -> FqEl {
        (
            arith::add_mod(a.0, b.0, self.p),
            arith::add_mod(a.1, b.1, self.p),
        )
    }

    pub fn sub(&self, a: FqEl, b: FqEl) -> FqEl {
        self.add(a, self.neg(b))
    }

    pub fn neg(&self, a: FqEl) -> FqEl {
        (
            if a.0 == 0 { 0 } else { self.p - a.0 },
            if a.1 == 0 { 0 } else { self.p - a.1 },
        )
    }

    pub fn mul(&self, a: FqEl, b: FqEl) -> FqEl {
        let p = self.p;
        match self.ext {
            None => (arith::mul_mod(a.0, b.0, p), 0),
            Some((c1, c0)) => {
                // (a0 + a1 t)(b0 + b1 t), t^2 = -c1 t - c0
                let ac = arith::mul_mod(a.0, b.0, p);
                let bd = arith::mul_mod(a.1, b.1, p);
                let cross = arith::add_mod(
                    arith::mul_mod(a.0, b.1, p),
                    arith::mul_mod(a.1, b.0, p),
                    p,
                );
                let re = arith::sub_mod(ac, arith::mul_mod(bd, c0, p), p);
                let im = arith::sub_mod(cross, arith::mul_mod(bd, c1, p), p);
                (re, im)
            }
        }
    }

    pub fn pow(&self, a: FqEl, mut e: u128) -> FqEl {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FqEl) -> FqEl {
        assert!(!self.is_zero(a), "inverse of zero in F_q");
        self.pow(a, (self.q() - 2) as u128)
    }

    pub fn div(&self, a: FqEl, b: FqEl) -> FqEl {
        self.mul(a, self.inv(b))
    }

    /// All field elements, in a fixed order.
    pub fn elements(&self) -> impl Iterator<Item = FqEl> + '_ {
        let hi = if self.ext.is_some() { self.p } else { 1 };
        (0..hi).flat_map(move |b| (0..self.p).map(move |a| (a, b)))
    }

    /// Evaluate a polynomial given low-first coefficients.
    pub fn poly_eval(&self, coeffs: &[FqEl], x: FqEl) -> FqEl {
        let mut acc = self.zero();
        for c in coeffs.iter().rev() {
            acc = self.add(self.mul(acc, x), *c);
        }
        acc
    }

    /// Distinct roots in F_q of a polynomial of any small degree.
    ///
    /// Uses a full scan, so only suitable for q up to the desk bound.
    pub fn poly_roots(&self, coeffs: &[FqEl]) -> Vec<FqEl> {
        assert!(self.q() <= 1 << 21, "residue field too large for root scan");
        self.elements()
            .filter(|&x| self.is_zero(self.poly_eval(coeffs, x)))
            .collect()
    }

    /// Square root in F_q, if one exists.
    pub fn sqrt(&self, a: FqEl) -> Option<FqEl> {
        if self.is_zero(a) {
            return Some(a);
        }
        let q = self.q() as u128;
        if self.p == 2 {
            // Frobenius inverse: x -> x^(q/2)
            return Some(self.pow(a, q / 2));
        }
        if self.pow(a, (q - 1) / 2) != self.one() {
            return None;
        }
        if q % 4 == 3 {
            return Some(self.pow(a, (q + 1) / 4));
        }
        // Tonelli--Shanks in F_q
        let mut m = q - 1;
        let mut s = 0u32;
        while m % 2 == 0 {
            m /= 2;
            s += 1;
        }
        let nonresidue = self
            .elements()
            .find(|&z| !self.is_zero(z) && self.pow(z, (q - 1) / 2) != self.one())
            .expect("non-residue exists");
        let mut c = self.pow(nonresidue, m);
        let mut t = self.pow(a, m);
        let mut r = self.pow(a, (m + 1) / 2);
        let mut e = s;
        while t != self.one() {
            let mut t2 = t;
            let mut i = 0u32;
            while t2 != self.one() {
                t2 = self.mul(t2, t2);
                i += 1;
            }
            let b = self.pow(c, 1u128 << (e - i - 1));
            r = self.mul(r, b);
            c = self.mul(b, b);
            t = self.mul(t, c);
            e = i;
        }
        Some(r)
    }

    /// Cube root of a in characteristic 3 (always unique there).
    pub fn cbrt_char3(&self, a: FqEl) -> FqEl {
        assert_eq!(self.p, 3);
        // x -> x^3 is the Frobenius; invert by x -> x^(q/3)
        self.pow(a, (self.q() / 3) as u128)
    }
}

/// Root structure of a quadratic a X^2 + b X + c over F_q.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QuadraticType {
    DoubleRoot(FqEl),
    /// two distinct roots in F_q
    Split(FqEl, FqEl),
    /// distinct roots, conjugate over F_q
    NonSplit,
}

impl Fq {
    pub fn quadratic_type(&self, a: FqEl, b: FqEl, c: FqEl) -> QuadraticType {
        assert!(!self.is_zero(a), "leading coefficient must be nonzero");
        if self.p == 2 {
            // tiny field: classify by scan
            let coeffs = [c, b, a];
            let roots = self.poly_roots(&coeffs);
            return match roots.len() {
                0 => QuadraticType::NonSplit,
                1 => {
                    // single root found: double iff b = 0 (derivative = b)
                    if self.is_zero(b) {
                        QuadraticType::DoubleRoot(roots[0])
                    } else {
                        // separable with one rational root cannot happen for a quadratic
                        unreachable!("separable quadratic with exactly one root")
                    }
                }
                _ => QuadraticType::Split(roots[0], roots[1]),
            };
        }
        let disc = self.sub(self.mul(b, b), self.mul(self.from_u64(4), self.mul(a, c)));
        let two_a = self.mul(self.from_u64(2), a);
        if self.is_zero(disc) {
            return QuadraticType::DoubleRoot(self.div(self.neg(b), two_a));
        }
        match self.sqrt(disc) {
            None => QuadraticType::NonSplit,
            Some(s) => QuadraticType::Split(
                self.div(self.sub(s, b), two_a),
                self.div(self.sub(self.neg(s), b), two_a),
            ),
        }
    }

    /// Root structure of the monic cubic X^3 + a X^2 + b X + c needed by the
    /// additive-reduction step: (#distinct roots in F_q, classification).
    pub fn cubic_type(&self, a: FqEl, b: FqEl, c: FqEl) -> CubicType {
        let coeffs = [c, b, a, self.one()];
        // derivative 3X^2 + 2aX + b
        let deriv = [b, self.mul(self.from_u64(2), a), self.from_u64(3)];
        let g = self.poly_gcd(&coeffs, &deriv);
        match g.len() {
            1 => {
                // separable: count roots in F_q
                let n = self.count_roots_deg3(coeffs);
                CubicType::Separable(n)
            }
            2 => {
                // gcd = X - alpha (monic): double root alpha
                let alpha = self.neg(g[0]);
                CubicType::DoubleRoot(alpha)
            }
            3 => {
                // gcd = (X - alpha)^2.  In characteristic 2 this degree
                // occurs for double and triple roots alike (both make the
                // derivative a perfect square), so decide by the actual
                // multiplicity: the third root is beta = -a - 2 alpha.
                let alpha = if self.p == 2 {
                    // (X - alpha)^2 = X^2 + alpha^2 in char 2
                    self.sqrt(g[0]).expect("char-2 square")
                } else {
                    self.div(self.neg(g[1]), self.from_u64(2))
                };
                let beta = self.neg(self.add(a, self.mul(self.from_u64(2), alpha)));
                if beta == alpha {
                    CubicType::TripleRoot(alpha)
                } else {
                    CubicType::DoubleRoot(alpha)
                }
            }
            _ => {
                // derivative vanished identically: char 3 with X^3 + bX + c,
                // inseparable triple root only when b = 0
                debug_assert_eq!(self.p, 3);
                if self.is_zero(b) {
                    CubicType::TripleRoot(self.cbrt_char3(self.neg(c)))
                } else {
                    // X^3 + bX + c is separable in char 3 when b != 0
                    CubicType::Separable(self.count_roots_deg3(coeffs))
                }
            }
        }
    }

    /// Number of distinct roots in F_q of a squarefree cubic, via
    /// deg gcd(X^q - X, f) computed with a polynomial power ladder.
    fn count_roots_deg3(&self, f: [FqEl; 4]) -> u32 {
        // X^q mod f
        let xq = self.powmod_x(self.q() as u128, &f);
        // X^q - X
        let mut g = xq;
        while g.len() < 2 {
            g.push(self.zero());
        }
        g[1] = self.sub(g[1], self.one());
        let gcd = self.poly_gcd(&f, &g);
        (gcd.len() - 1) as u32
    }

    /// X^e modulo the monic polynomial m (low-first coefficients).
    fn powmod_x(&self, e: u128, m: &[FqEl]) -> Vec<FqEl> {
        let x = vec![self.zero(), self.one()];
        let mut base = self.poly_mod(x, m);
        let mut acc = vec![self.one()];
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.poly_mod(self.poly_mul(&acc, &base), m);
            }
            base = self.poly_mod(self.poly_mul(&base, &base), m);
            e >>= 1;
        }
        acc
    }

    fn poly_mul(&self, a: &[FqEl], b: &[FqEl]) -> Vec<FqEl> {
        let mut out = vec![self.zero(); a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        out
    }

    fn poly_mod(&self, mut a: Vec<FqEl>, m: &[FqEl]) -> Vec<FqEl> {
        let dm = m.len() - 1;
        let lead_inv = self.inv(m[dm]);
        while a.len() > dm {
            let top = a.len() - 1;
            let coef = self.mul(a[top], lead_inv);
            if !self.is_zero(coef) {
                for j in 0..=dm {
                    let s = self.mul(coef, m[j]);
                    a[top - dm + j] = self.sub(a[top - dm + j], s);
                }
            }
            a.pop();
        }
        if a.is_empty() {
            // remainder modulo a nonzero constant
            a.push(self.zero());
        }
        self.trim(a)
    }

    fn trim(&self, mut a: Vec<FqEl>) -> Vec<FqEl> {
        while a.len() > 1 && self.is_zero(*a.last().unwrap()) {
            a.pop();
        }
        a
    }

    /// Monic gcd of two polynomials (low-first coefficients).
    pub fn poly_gcd(&self, a: &[FqEl], b: &[FqEl]) -> Vec<FqEl> {
        let mut a = self.trim(a.to_vec());
        let mut b = self.trim(b.to_vec());
        loop {
            if b.len() == 1 && self.is_zero(b[0]) {
                // normalize monic
                let d = a.len() - 1;
                let li = self.inv(a[d]);
                return a.iter().map(|&c| self.mul(c, li)).collect();
            }
            let r = self.poly_mod(a, &b);
            a = b;
            b = r;
        }
    }
}

/// Root structure of a monic cubic over F_q.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CubicType {
    /// squarefree, with the given number of roots in F_q (0, 1, or 3)
    Separable(u32),
    DoubleRoot(FqEl),
    TripleRoot(FqEl),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let f = Fq::prime(13);
        let a = f.from_u64(7);
        let b = f.from_u64(11);
        assert_eq!(f.mul(a, b), f.from_u64(77 % 13));
        assert_eq!(f.mul(a, f.inv(a)), f.one());
        assert_eq!(f.pow(a, 12), f.one(), "Fermat");
        assert_eq!(f.sub(a, a), f.zero());
    }

    #[test]
    fn quadratic_extension_arithmetic() {
        // F_9 = F_3[t]/(t^2 + 1)
        let f = Fq::quadratic(3, 0, 1);
        assert_eq!(f.q(), 9);
        let t = (0u64, 1u64);
        assert_eq!(f.mul(t, t), f.neg(f.one()), "t^2 = -1");
        // multiplicative order of the group is 8
        for x in f.elements().filter(|&x| !f.is_zero(x)) {
            assert_eq!(f.pow(x, 8), f.one());
        }
        // inverse round-trip
        for x in f.elements().filter(|&x| !f.is_zero(x)) {
            assert_eq!(f.mul(x, f.inv(x)), f.one());
        }
    }

    #[test]
    fn sqrt_in_prime_and_quadratic_fields() {
        let f = Fq::prime(41); // 41 = 1 mod 8 exercises Tonelli--Shanks
        for a in 0..41u64 {
            let sq = f.mul((a, 0), (a, 0));
            let r = f.sqrt(sq).expect("square has a root");
            assert_eq!(f.mul(r, r), sq);
        }
        assert!(f.sqrt((3, 0)).is_none(), "3 is not a QR mod 41");

        let f9 = Fq::quadratic(3, 0, 1);
        let mut squares = 0;
        for x in f9.elements() {
            if let Some(r) = f9.sqrt(x) {
                assert_eq!(f9.mul(r, r), x);
                squares += 1;
            }
        }
        assert_eq!(squares, 5, "(q+1)/2 squares incl. zero in F_9");

        // char 2: every element a square
        let f4 = Fq::quadratic(2, 1, 1);
        for x in f4.elements() {
            let r = f4.sqrt(x).unwrap();
            assert_eq!(f4.mul(r, r), x);
        }
    }

    #[test]
    fn quadratic_classification() {
        let f = Fq::prime(7);
        // X^2 - 1 splits
        match f.quadratic_type(f.one(), f.zero(), f.from_i64(-1)) {
            QuadraticType::Split(a, b) => {
                assert_ne!(a, b);
                assert!(f.is_zero(f.sub(f.mul(a, a), f.one())));
            }
            other => panic!("expected split, got {:?}", other),
        }
        // X^2 - 3 is nonsplit mod 7 (3 is not a QR mod 7)
        assert_eq!(
            f.quadratic_type(f.one(), f.zero(), f.from_i64(-3)),
            QuadraticType::NonSplit
        );
        // (X - 2)^2
        assert_eq!(
            f.quadratic_type(f.one(), f.from_i64(-4), f.from_i64(4)),
            QuadraticType::DoubleRoot(f.from_u64(2))
        );
    }

    #[test]
    fn cubic_classification() {
        let f = Fq::prime(5);
        // X^3 - X = X(X-1)(X+1): separable with 3 roots
        assert_eq!(
            f.cubic_type(f.zero(), f.from_i64(-1), f.zero()),
            CubicType::Separable(3)
        );
        // X^3 - 2: 2 is not a cube mod 5? cubes mod 5 are {0,1,3,2,4} (x^3 is a bijection since gcd(3,4)=1)
        assert_eq!(
            f.cubic_type(f.zero(), f.zero(), f.from_i64(-2)),
            CubicType::Separable(1)
        );
        // (X-1)^2 (X-2) = X^3 - 4X^2 + 5X - 2
        assert_eq!(
            f.cubic_type(f.from_i64(-4), f.from_i64(5), f.from_i64(-2)),
            CubicType::DoubleRoot(f.one())
        );
        // (X-1)^3 = X^3 - 3X^2 + 3X - 1
        assert_eq!(
            f.cubic_type(f.from_i64(-3), f.from_i64(3), f.from_i64(-1)),
            CubicType::TripleRoot(f.one())
        );
        // char 3 inseparable: X^3 - 1 = (X-1)^3
        let f3 = Fq::prime(3);
        assert_eq!(
            f3.cubic_type(f3.zero(), f3.zero(), f3.from_i64(-1)),
            CubicType::TripleRoot(f3.one())
        );
        // char 3 separable with nonzero linear term: X^3 - X has 3 roots
        assert_eq!(
            f3.cubic_type(f3.zero(), f3.from_i64(-1), f3.zero()),
            CubicType::Separable(3)
        );
        // count roots over F_9 too
        let f9 = Fq::quadratic(3, 0, 1);
        // X^3 - X splits over F_3 < F_9 with roots 0, 1, 2
        assert_eq!(
            f9.cubic_type(f9.zero(), f9.from_i64(-1), f9.zero()),
            CubicType::Separable(3)
        );
        // X^2 + 1 = (X - t)(X + t) splits in F_9: check via quadratic_type
        match f9.quadratic_type(f9.one(), f9.zero(), f9.one()) {
            QuadraticType::Split(a, b) => assert_eq!(f9.add(a, b), f9.zero()),
            other => panic!("expected split over F_9, got {:?}", other),
        }
    }
}
