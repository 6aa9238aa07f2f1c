//! Complex multiplication: recognizing CM curves over the rationals and
//! attaching the Hecke character of the CM field.
//!
//! A rational elliptic curve has complex multiplication exactly when its
//! j-invariant is one of thirteen integers, the j-invariants of the orders of
//! class number one.  The table is not hard-coded: it is produced at first use
//! by evaluating the modular function
//!
//! ```text
//!   j(tau) = 1728 E4(tau)^3 / (E4(tau)^3 - E6(tau)^2)
//! ```
//!
//! at the thirteen CM points tau_D and rounding, so a wrong constant cannot
//! survive the residual check.
//!
//! For a curve with CM by the maximal order O_K the associated Hecke
//! character psi assigns to a prime ideal p of good reduction the Frobenius
//! lift: the unique pi in O_K with
//!
//! ```text
//!   pi pibar = N(p),    pi + pibar = a_p,    pi in p,
//! ```
//!
//! where a_p = p + 1 - #E~(F_p).  (Both trace-a_p roots of X^2 - a_p X + p lie
//! in O_K; membership in the chosen prime picks one of the conjugate pair, and
//! that choice is what ties psi to the curve rather than to its twist.)  At
//! inert primes the curve is supersingular, a_p = 0, and psi((p)) = -p enters
//! only through the second Euler factor; values at the handful of ramified
//! primes dividing the conductor of psi never appear in any sum.
//!
//! The conductor ideal f of psi is reconstructed from the conductor N of the
//! curve through N = |D| * N(f), distributing the prime factorization of
//! N/|D| over prime ideals in the unique conjugation-stable way.  Two
//! expansions are provided: the integer coefficients a_n of L(E/Q, s), built
//! from point counts and the recursion a_{p^{k+1}} = a_p a_{p^k} - p
//! a_{p^{k-1}}, and the ideal-indexed coefficients
//!
//! ```text
//!   b_n = sum over ideals a with N(a) = n, (a, f) = 1 of psibar(a),
//! ```
//!
//! assembled multiplicatively from geometric series over prime ideals.  For a
//! curve defined over Q the two agree, which the tests use as a cross-check of
//! the entire psi pipeline against the counting pipeline.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::arith;
use crate::curve::count::{count_nonsingular, trace_of_frobenius};
use crate::curve::tate::{conductor_q, minimal_model_q};
use crate::curve::CurveQ;
use crate::hp;
use crate::qfield::{FracIdeal, QElem, QuadField, SplitType};
use crate::{Error, Result};

/// Discriminants of the thirteen imaginary quadratic orders of class number
/// one.  The first nine are maximal; the last four have conductors 2, 2, 3, 2
/// inside the fields of discriminant -3, -4, -3, -7.
const CM_ORDER_DISCS: [i64; 13] = [
    -3, -4, -7, -8, -11, -19, -43, -67, -163, -12, -16, -27, -28,
];
const CM_MAXIMAL: usize = 9;

/// Result of CM detection: the order discriminant and the matched j-invariant.
#[derive(Clone, Debug)]
pub struct CMData {
    pub disc: i64,
    pub j_matched: Integer,
    pub maximal: bool,
}

/// The table (D, j(tau_D), maximal?), computed on first use at 320 bits.
pub fn cm_j_table() -> &'static [(i64, Integer, bool)] {
    static TABLE: OnceLock<Vec<(i64, Integer, bool)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let prec = 320;
        CM_ORDER_DISCS
            .iter()
            .enumerate()
            .map(|(idx, &d)| {
                // tau_D = sqrt(D)/2 for even D, (-1 + sqrt(D))/2 for odd D
                let im = Float::with_val(prec, Integer::from(-d)).sqrt() / 2u32;
                let re = if d % 2 == 0 {
                    Float::new(prec)
                } else {
                    Float::with_val(prec, -0.5)
                };
                let tau = Complex::with_val(prec, (re, im));
                let j = hp::j_from_tau(&tau);
                let jr = arith::round_to_integer(j.real());
                let resid = Float::with_val(prec, j.real() - &jr).abs();
                assert!(
                    resid < Float::with_val(prec, 1e-30),
                    "j(tau_{}) is not within 1e-30 of an integer",
                    d
                );
                assert!(
                    Float::with_val(prec, j.imag().abs_ref()) < Float::with_val(prec, 1e-30),
                    "j(tau_{}) has a nonreal residue",
                    d
                );
                (d, jr, idx < CM_MAXIMAL)
            })
            .collect()
    })
}

/// Recognize complex multiplication from the j-invariant.  Absence of CM is a
/// normal result, not an error.
pub fn detect_cm(e: &CurveQ) -> Option<CMData> {
    let j = e.j();
    if !j.is_integer() {
        return None;
    }
    let ji = j.numer();
    cm_j_table()
        .iter()
        .find(|(_, jv, _)| jv == ji)
        .map(|(d, jv, maximal)| CMData {
            disc: *d,
            j_matched: jv.clone(),
            maximal: *maximal,
        })
}

/// The Hecke character psi of K attached to a CM curve over Q, realized
/// through its values on prime ideals.  Conjugate values realize psibar.
pub struct HeckeChar {
    field: QuadField,
    curve: CurveQ,
    conductor: FracIdeal,
    level: Integer,
    cache: Mutex<HashMap<u64, QElem>>,
}

impl HeckeChar {
    /// Attach psi to a curve with CM by a maximal order.  The curve is
    /// replaced by its global minimal model internally.
    pub fn new(e: &CurveQ) -> Result<HeckeChar> {
        let cm = detect_cm(e).ok_or(Error::NoCm)?;
        if !cm.maximal {
            return Err(Error::NonMaximalOrder(cm.disc));
        }
        let field = QuadField::new(cm.disc)?;
        let (curve, _) = minimal_model_q(e)?;
        let level = conductor_q(&curve)?;

        // N = |D| * N(f); spread N/|D| over prime ideals conjugation-stably
        let abs_d = Integer::from(-cm.disc);
        let (m, rem) = level.clone().div_rem(abs_d);
        if rem != 0 {
            return Err(Error::Degenerate(format!(
                "conductor {} of a CM({}) curve is not divisible by |D|",
                level, cm.disc
            )));
        }
        let mut f = FracIdeal::one(field);
        for (p, ex) in arith::factor(&m) {
            let pu = p.to_u64().ok_or_else(|| {
                Error::BadInput("conductor has a prime factor beyond 64 bits".into())
            })?;
            match field.split_type(pu) {
                SplitType::Ramified => {
                    f = f.mul(&field.prime_above(pu).pow(ex as i32)?)?;
                }
                SplitType::Split | SplitType::Inert => {
                    if ex % 2 != 0 {
                        return Err(Error::Degenerate(format!(
                            "conductor exponent of psi at the unramified prime {} is odd",
                            pu
                        )));
                    }
                    let half = Rational::from(p).pow(ex as i32 / 2);
                    f = f.mul_rational(&half);
                }
            }
        }
        Ok(HeckeChar {
            field,
            curve,
            conductor: f,
            level,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    /// The global minimal model the character was computed from.
    pub fn curve(&self) -> &CurveQ {
        &self.curve
    }

    /// The conductor ideal f of psi, with N = |D| * N(f).
    pub fn conductor(&self) -> &FracIdeal {
        &self.conductor
    }

    /// The conductor N of the curve over Q.
    pub fn level(&self) -> &Integer {
        &self.level
    }

    /// psi on a degree-one prime of good reduction: the Frobenius lift lying
    /// in the given prime.  Inert and bad primes are rejected.
    pub fn psi_at_prime(&self, prime: &FracIdeal) -> Result<QElem> {
        if !prime.is_integral() {
            return Err(Error::BadInput("psi takes integral prime ideals".into()));
        }
        let nrm = prime.norm();
        debug_assert!(nrm.is_integer());
        let n_int = nrm.numer().clone();
        if n_int.is_perfect_square() {
            let root = n_int.clone().sqrt();
            if let Some(p) = root.to_u64() {
                if self.field.split_type(p) == SplitType::Inert {
                    return Err(Error::BadInput(format!(
                        "{} is inert in K: psi((p)) = -p enters only through \
                         the prime-square Euler factor",
                        p
                    )));
                }
            }
        }
        let p = n_int
            .to_u64()
            .ok_or_else(|| Error::BadInput("prime norm beyond 64 bits".into()))?;
        if self.level.is_divisible(&Integer::from(p)) {
            return Err(Error::BadInput(format!(
                "bad reduction at {}: psi is not determined by counting there",
                p
            )));
        }
        let pi = self.canonical_pi(p)?;
        if FracIdeal::principal(&pi).valuation_at(prime) >= 1 {
            return Ok(pi);
        }
        let pib = pi.conj();
        if FracIdeal::principal(&pib).valuation_at(prime) >= 1 {
            return Ok(pib);
        }
        Err(Error::BadInput(format!("not a prime ideal above {}", p)))
    }

    /// The cached value at the distinguished prime `prime_above(p)`.
    fn canonical_pi(&self, p: u64) -> Result<QElem> {
        if let Some(pi) = self.cache.lock().unwrap().get(&p) {
            return Ok(pi.clone());
        }
        let a = trace_of_frobenius(&self.curve, p)?;
        let d = self.field.disc();
        let num = 4 * p as i64 - a * a;
        if num < 0 || num % (-d) != 0 {
            return Err(Error::Degenerate(format!(
                "a_{} = {} is not a trace from the order of discriminant {}",
                p, a, d
            )));
        }
        let t2 = num / (-d);
        let t = (t2 as f64).sqrt().round() as i64;
        if t * t != t2 {
            return Err(Error::Degenerate(format!(
                "4p - a_p^2 = |D| t^2 has no integer solution at p = {}",
                p
            )));
        }
        let p_can = self.field.prime_above(p);
        for tt in [t, -t] {
            // (a + t sqrt(D))/2 = (a - t D)/2 + t omega
            let cand = self
                .field
                .elem(Rational::from((a - tt * d, 2)), Rational::from(tt));
            if FracIdeal::principal(&cand).valuation_at(&p_can) >= 1 {
                debug_assert_eq!(cand.norm(), Rational::from(p));
                debug_assert_eq!(cand.trace(), Rational::from(a));
                self.cache.lock().unwrap().insert(p, cand.clone());
                return Ok(cand);
            }
        }
        Err(Error::Degenerate(format!(
            "no trace-{} element of norm {} lies in the chosen prime",
            a, p
        )))
    }

    /// a_p at a prime of bad reduction: p minus the number of nonsingular
    /// points, i.e. +1 / -1 / 0 for split / nonsplit / additive reduction.
    fn bad_ap(&self, p: u64) -> Result<i64> {
        if p <= 3163 {
            return Ok(p as i64 - count_nonsingular(&self.curve, p)? as i64);
        }
        // Large bad primes: additive (integral j) gives 0; multiplicative is
        // split iff -c6 is a square in F_p.
        let j = self.curve.j();
        if !j.denom().is_divisible(&Integer::from(p)) {
            return Ok(0);
        }
        let mc6 = Integer::from(-self.curve.c6().numer().clone());
        Ok(mc6.kronecker(&Integer::from(p)) as i64)
    }

    /// Dirichlet coefficients a_1..a_X of L(E/Q, s) = L(psibar, s).
    pub fn dirichlet_coeffs(&self, x: usize) -> Result<Vec<i64>> {
        if x > 10_000_000 {
            return Err(Error::BadInput("coefficient range capped at 10^7".into()));
        }
        let mut a = vec![0i64; x + 1];
        if x == 0 {
            return Ok(a);
        }
        a[1] = 1;
        let primes = arith::primes_up_to(x as u64);
        let traces: Vec<(u64, i64, bool)> = primes
            .par_iter()
            .map(|&p| -> Result<(u64, i64, bool)> {
                if self.level.is_divisible(&Integer::from(p)) {
                    Ok((p, self.bad_ap(p)?, true))
                } else {
                    Ok((p, trace_of_frobenius(&self.curve, p)?, false))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let info: HashMap<u64, (i64, bool)> =
            traces.into_iter().map(|(p, t, b)| (p, (t, b))).collect();

        let spf = arith::smallest_prime_factors(x);
        for n in 2..=x {
            let p = spf[n] as usize;
            let mut m = n;
            let mut pe = 1usize;
            while m % p == 0 {
                m /= p;
                pe *= p;
            }
            if m > 1 {
                a[n] = a[pe] * a[m];
                continue;
            }
            let (apv, bad) = info[&(p as u64)];
            a[n] = if n == p {
                apv
            } else if bad {
                apv * a[n / p]
            } else {
                apv * a[n / p] - p as i64 * a[n / (p * p)]
            };
        }
        Ok(a)
    }

    /// Ideal-indexed coefficients b_n = sum over norm-n ideals prime to f of
    /// psibar, as exact elements of K.
    pub fn k_coeffs(&self, x: usize) -> Result<Vec<QElem>> {
        if x > 10_000_000 {
            return Err(Error::BadInput("coefficient range capped at 10^7".into()));
        }
        let k = self.field;
        let mut b: Vec<QElem> = vec![k.zero(); x + 1];
        if x == 0 {
            return Ok(b);
        }
        b[1] = k.one();
        let primes = arith::primes_up_to(x as u64);
        let locals: Vec<(u64, Vec<QElem>)> = primes
            .par_iter()
            .map(|&p| -> Result<(u64, Vec<QElem>)> {
                let mut kmax = 0usize;
                let mut q = p;
                while q <= x as u64 / p {
                    q *= p;
                    kmax += 1;
                }
                kmax += 1; // p^1 always fits

                // prime ideals above p away from f, as (norm degree, psibar)
                let mut gens: Vec<(usize, QElem)> = Vec::new();
                match k.split_type(p) {
                    SplitType::Split => {
                        let p1 = k.prime_above(p);
                        let p2 = p1.conj();
                        for pr in [p1, p2] {
                            if self.conductor.valuation_at(&pr) == 0 {
                                gens.push((1, self.psi_at_prime(&pr)?.conj()));
                            }
                        }
                    }
                    SplitType::Inert => {
                        let pp = FracIdeal::principal(&k.from_int(p as i64));
                        if self.conductor.valuation_at(&pp) == 0 {
                            gens.push((2, k.from_int(-(p as i64))));
                        }
                    }
                    SplitType::Ramified => {
                        let pr = k.prime_above(p);
                        if self.conductor.valuation_at(&pr) == 0 {
                            gens.push((1, self.psi_at_prime(&pr)?.conj()));
                        }
                    }
                }

                // local factor: product of geometric series in degree f
                let mut loc = vec![k.zero(); kmax + 1];
                loc[0] = k.one();
                for (deg, v) in gens {
                    let mut next = vec![k.zero(); kmax + 1];
                    for i in 0..=kmax {
                        if loc[i].is_zero() {
                            continue;
                        }
                        let mut pw = k.one();
                        let mut j = i;
                        loop {
                            next[j] = next[j].add(&loc[i].mul(&pw));
                            j += deg;
                            if j > kmax {
                                break;
                            }
                            pw = pw.mul(&v);
                        }
                    }
                    loc = next;
                }
                Ok((p, loc))
            })
            .collect::<Result<Vec<_>>>()?;
        let map: HashMap<u64, Vec<QElem>> = locals.into_iter().collect();

        let spf = arith::smallest_prime_factors(x);
        for n in 2..=x {
            let p = spf[n] as usize;
            let mut m = n;
            let mut pe = 1usize;
            let mut e = 0usize;
            while m % p == 0 {
                m /= p;
                pe *= p;
                e += 1;
            }
            b[n] = if m > 1 {
                b[pe].mul(&b[m])
            } else {
                map[&(p as u64)][e].clone()
            };
        }
        Ok(b)
    }
}
