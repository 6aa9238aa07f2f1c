//! Tate's algorithm: Kodaira types, conductor exponents, Tamagawa numbers,
//! and minimal Weierstrass models, over Q and over imaginary quadratic fields
//! of class number one.
//!
//! The algorithm examines an integral model at a finite place v with residue
//! field k and uniformizer pi.  After translating the singular point of the
//! reduction to (0,0) it reads off the fibre type from valuations of the
//! b-invariants and from root structures of small polynomials over k:
//!
//! ```text
//!   v(Delta) = 0            I0      good reduction
//!   v(b2) = 0               In      n = v(Delta), split/nonsplit by
//!                                   T^2 + a1 T - a2 over k
//!   v(a6) < 2               II
//!   v(b8) < 3               III
//!   v(b6) < 3               IV      c from T^2 + a3/pi T - a6/pi^2
//!   cubic separable         I0*     c = 1 + #roots in k
//!   cubic double root       In*     a subprocedure of alternating
//!                                   quadratics, c in {2, 4}
//!   cubic triple root       IV*, III*, II*, or non-minimal
//! ```
//!
//! The conductor exponent follows Ogg's formula f = v(Delta) - m + 1 where m
//! is the number of components of the special fibre; for p >= 5 this is the
//! tame value (0, 1 or 2), and wild contributions at p = 2, 3 come out of the
//! same bookkeeping.  Reaching the final step means the model was not minimal
//! at v: all a_i are divisible by pi^i, the substitution (x, y) ->
//! (pi^2 x, pi^3 y) divides Delta by pi^12, and the algorithm restarts.
//!
//! Places are abstracted by [`TatePlace`]: a residue field, a valuation, a
//! reduction map and lifts.  Over K = Q(sqrt(D)) the residue field of a prime
//! above p is F_p for split or ramified p (omega maps to a root of its
//! minimal polynomial mod p) and F_{p^2} for inert p.  Running the very same
//! step sequence at a ramified prime above 2 is what produces the fibre types
//! like I2* with conductor exponent 6 that appear for CM curves over Q(i).
//!
//! The component-group orders c are reported together with their O_K-order
//! ideals where the classification applies: for a CM curve the order ideal of
//! the component group at a finite place is (1), (2), or the ramified prime
//! above 2 or 3.  A Tamagawa number outside {1, 2, 3, 4}, or c = 2, 3 at a
//! field where the needed prime is not ramified, falls outside that table and
//! is reported with no ideal refinement.

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::arith;
use crate::curve::fq::{CubicType, Fq, FqEl, QuadraticType};
use crate::curve::{Curve, CurveK, CurveQ, ExactField, Rationals};
use crate::qfield::{FracIdeal, QElem, QuadField, SplitType};
use crate::{Error, Result};

/// Sentinel valuation for zero (larger than any valuation met in practice).
pub const INF_VAL: i64 = i64::MAX / 4;

/// Kodaira classification of the special fibre at a finite place.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Kodaira {
    I0,
    /// multiplicative reduction with an n-gon fibre, n >= 1
    In(u32),
    II,
    III,
    IV,
    I0Star,
    InStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl Kodaira {
    pub fn is_good(&self) -> bool {
        matches!(self, Kodaira::I0)
    }

    pub fn is_multiplicative(&self) -> bool {
        matches!(self, Kodaira::In(_))
    }

    pub fn is_additive(&self) -> bool {
        !self.is_good() && !self.is_multiplicative()
    }
}

impl std::fmt::Display for Kodaira {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Kodaira::I0 => write!(f, "I0"),
            Kodaira::In(n) => write!(f, "I{}", n),
            Kodaira::II => write!(f, "II"),
            Kodaira::III => write!(f, "III"),
            Kodaira::IV => write!(f, "IV"),
            Kodaira::I0Star => write!(f, "I0*"),
            Kodaira::InStar(n) => write!(f, "I{}*", n),
            Kodaira::IVStar => write!(f, "IV*"),
            Kodaira::IIIStar => write!(f, "III*"),
            Kodaira::IIStar => write!(f, "II*"),
        }
    }
}

/// A finite place: a rational prime, or a prime ideal of a quadratic field.
#[derive(Clone, Debug, PartialEq)]
pub enum Place {
    Q(u64),
    K(FracIdeal),
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Q(p) => write!(f, "{}", p),
            Place::K(id) => write!(f, "{}", id),
        }
    }
}

/// Local reduction data of a curve at one finite place.
#[derive(Clone, Debug)]
pub struct LocalData {
    pub place: Place,
    pub kodaira: Kodaira,
    /// conductor exponent
    pub f: u32,
    /// Tamagawa number (order of the component group of k-points)
    pub c: u64,
    /// order ideal of the component group as an O_K-module, when the
    /// Tamagawa number matches the CM classification
    pub c_ideal: Option<FracIdeal>,
}

impl LocalData {
    pub fn to_json(&self) -> serde_json::Value {
        let p = match &self.place {
            Place::Q(p) => serde_json::json!(p),
            Place::K(id) => id.to_json(),
        };
        serde_json::json!({
            "p": p,
            "kodaira": self.kodaira.to_string(),
            "f": self.f,
            "c": self.c,
            "c_ideal": self.c_ideal.as_ref().map(|i| i.to_json()),
        })
    }
}

/// A change of Weierstrass coordinates x = u^2 x' + r, y = u^3 y' + s u^2 x' + t.
#[derive(Clone, Debug, PartialEq)]
pub struct Transform<F: ExactField> {
    pub u: F::El,
    pub r: F::El,
    pub s: F::El,
    pub t: F::El,
}

impl<F: ExactField> Transform<F> {
    pub fn identity(f: &F) -> Self {
        Transform {
            u: f.one(),
            r: f.zero(),
            s: f.zero(),
            t: f.zero(),
        }
    }

    pub fn is_identity(&self, f: &F) -> bool {
        self.u == f.one() && f.is_zero(&self.r) && f.is_zero(&self.s) && f.is_zero(&self.t)
    }

    /// The transform given by applying `a` and then `b`.
    pub fn compose(f: &F, a: &Self, b: &Self) -> Self {
        let u1sq = f.mul(&a.u, &a.u);
        let u1cb = f.mul(&u1sq, &a.u);
        Transform {
            u: f.mul(&a.u, &b.u),
            r: f.add(&a.r, &f.mul(&u1sq, &b.r)),
            s: f.add(&a.s, &f.mul(&a.u, &b.s)),
            t: f.add(
                &a.t,
                &f.add(&f.mul(&u1sq, &f.mul(&a.s, &b.r)), &f.mul(&u1cb, &b.t)),
            ),
        }
    }

    /// Map a point of the source model to the transformed model:
    /// x' = (x - r)/u^2, y' = (y - s(x - r) - t)/u^3.
    pub fn push_point(&self, f: &F, x: &F::El, y: &F::El) -> (F::El, F::El) {
        let u2 = f.mul(&self.u, &self.u);
        let u3 = f.mul(&u2, &self.u);
        let xr = f.sub(x, &self.r);
        let xp = f.div(&xr, &u2);
        let yp = f.div(&f.sub(&f.sub(y, &f.mul(&self.s, &xr)), &self.t), &u3);
        (xp, yp)
    }

    /// Inverse of [`Transform::push_point`]: x = u^2 x' + r,
    /// y = u^3 y' + s u^2 x' + t.
    pub fn pull_point(&self, f: &F, xp: &F::El, yp: &F::El) -> (F::El, F::El) {
        let u2 = f.mul(&self.u, &self.u);
        let u3 = f.mul(&u2, &self.u);
        let x = f.add(&f.mul(&u2, xp), &self.r);
        let y = f.add(
            &f.add(&f.mul(&u3, yp), &f.mul(&self.s, &f.mul(&u2, xp))),
            &self.t,
        );
        (x, y)
    }
}

/// A finite place presented to the reduction machinery: valuation,
/// uniformizer, residue field, and reduction/lifting maps.
pub trait TatePlace<F: ExactField> {
    fn field(&self) -> &F;
    fn residue_char(&self) -> u64;
    fn fq(&self) -> &Fq;
    /// v(x), normalized so v(uniformizer) = 1; `INF_VAL` on zero.
    fn val(&self, x: &F::El) -> i64;
    fn uniformizer(&self) -> F::El;
    /// Reduction to the residue field; requires v(x) >= 0.
    fn reduce(&self, x: &F::El) -> FqEl;
    /// Any lift along `reduce`.
    fn lift(&self, r: FqEl) -> F::El;
    fn label(&self) -> String;
}

fn int_val(n: &Integer, p: u64) -> i64 {
    debug_assert!(*n != 0);
    let pz = Integer::from(p);
    let mut m = n.clone();
    let mut v = 0i64;
    while m.is_divisible(&pz) {
        m.div_exact_mut(&pz);
        v += 1;
    }
    v
}

fn rat_val(x: &Rational, p: u64) -> i64 {
    if *x == 0 {
        return INF_VAL;
    }
    int_val(x.numer(), p) - int_val(x.denom(), p)
}

/// Reduce a p-integral rational mod p.
fn rat_red(x: &Rational, p: u64) -> u64 {
    use rug::ops::RemRounding;
    debug_assert!(rat_val(x, p) >= 0, "rational not p-integral");
    let num = Integer::from(x.numer().rem_euc(&Integer::from(p)))
        .to_u64()
        .unwrap();
    let den = Integer::from(x.denom().rem_euc(&Integer::from(p)))
        .to_u64()
        .unwrap();
    arith::mul_mod(num, arith::inv_mod(den, p), p)
}

/// The place of Q at a rational prime p.
pub struct QPlace {
    p: u64,
    fq: Fq,
}

impl QPlace {
    pub fn new(p: u64) -> QPlace {
        QPlace {
            p,
            fq: Fq::prime(p),
        }
    }
}

impl TatePlace<Rationals> for QPlace {
    fn field(&self) -> &Rationals {
        &Rationals
    }
    fn residue_char(&self) -> u64 {
        self.p
    }
    fn fq(&self) -> &Fq {
        &self.fq
    }
    fn val(&self, x: &Rational) -> i64 {
        rat_val(x, self.p)
    }
    fn uniformizer(&self) -> Rational {
        Rational::from(self.p)
    }
    fn reduce(&self, x: &Rational) -> FqEl {
        (rat_red(x, self.p), 0)
    }
    fn lift(&self, r: FqEl) -> Rational {
        debug_assert_eq!(r.1, 0);
        Rational::from(r.0)
    }
    fn label(&self) -> String {
        self.p.to_string()
    }
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum KKind {
    Inert,
    /// residue degree 1: omega reduces to `root` in F_p
    Deg1 { root: u64, ramified: bool },
}

/// The place of an imaginary quadratic field K at a prime ideal, with a fixed
/// principal generator as uniformizer (class number one).
pub struct KPlace {
    kq: QuadField,
    prime: FracIdeal,
    p: u64,
    kind: KKind,
    pi: QElem,
    /// conj(pi), a unit at the place, used to clear split denominators
    pi_conj: QElem,
    /// pi^2 / p, a global unit when p is ramified
    ram_unit: Option<QElem>,
    fq: Fq,
}

impl KPlace {
    pub fn new(field: &QuadField, prime: &FracIdeal) -> Result<KPlace> {
        if !prime.is_integral() {
            return Err(Error::BadInput("place must be an integral prime ideal".into()));
        }
        let (a, b, c) = prime.hnf();
        let p = a
            .to_u64()
            .ok_or_else(|| Error::BadInput("residue characteristic too large".into()))?;
        if Integer::from(p).is_probably_prime(40) == rug::integer::IsPrime::No {
            return Err(Error::BadInput(format!("{} is not a prime ideal", prime)));
        }
        let split = field.split_type(p);
        let kind = if c == a && b == 0 {
            if split != SplitType::Inert {
                return Err(Error::BadInput(format!("({}) is not a prime ideal", p)));
            }
            KKind::Inert
        } else if c == 1 {
            let b64 = b.to_u64().unwrap();
            KKind::Deg1 {
                root: (p - b64 % p) % p,
                ramified: split == SplitType::Ramified,
            }
        } else {
            return Err(Error::BadInput(format!("{} is not a prime ideal", prime)));
        };
        let pi = match kind {
            KKind::Inert => field.from_int(p as i64),
            KKind::Deg1 { .. } => prime.principal_generator().ok_or_else(|| {
                let h = crate::qfield::class_group(field.disc()).map(|g| g.h()).unwrap_or(0);
                Error::ClassNumberNotOne(h)
            })?,
        };
        let pi_conj = pi.conj();
        let ram_unit = match kind {
            KKind::Deg1 { ramified: true, .. } => {
                let u = pi.mul(&pi).mul_rational(&Rational::from((1u32, p as u32)));
                debug_assert!(u.is_integral() && u.norm().abs() == 1);
                Some(u)
            }
            _ => None,
        };
        let fq = match kind {
            KKind::Inert => {
                // minimal polynomial of omega: x^2 - tr(omega) x + N(omega)
                use rug::ops::RemRounding;
                let pz = Integer::from(p);
                let c1 = Integer::from((-field.omega_trace()).rem_euc(&pz))
                    .to_u64()
                    .unwrap();
                let c0 = Integer::from(field.omega_norm().rem_euc(&pz))
                    .to_u64()
                    .unwrap();
                Fq::quadratic(p, c1, c0)
            }
            KKind::Deg1 { .. } => Fq::prime(p),
        };
        Ok(KPlace {
            kq: field.clone(),
            prime: prime.clone(),
            p,
            kind,
            pi,
            pi_conj,
            ram_unit,
            fq,
        })
    }

    pub fn prime(&self) -> &FracIdeal {
        &self.prime
    }

    /// Reduction of an element with p-integral coordinates at a degree-1 place.
    fn red_deg1_integral(&self, x: &QElem) -> u64 {
        let root = match self.kind {
            KKind::Deg1 { root, .. } => root,
            KKind::Inert => unreachable!(),
        };
        let a = rat_red(x.coord_a(), self.p);
        let b = rat_red(x.coord_b(), self.p);
        arith::add_mod(a, arith::mul_mod(b, root, self.p), self.p)
    }
}

impl TatePlace<QuadField> for KPlace {
    fn field(&self) -> &QuadField {
        &self.kq
    }
    fn residue_char(&self) -> u64 {
        self.p
    }
    fn fq(&self) -> &Fq {
        &self.fq
    }

    fn val(&self, x: &QElem) -> i64 {
        if x.is_zero() {
            return INF_VAL;
        }
        match self.kind {
            // O_K tensor Z_p is free over Z_p with basis 1, omega
            KKind::Inert => rat_val(x.coord_a(), self.p).min(rat_val(x.coord_b(), self.p)),
            // v(x) = v_p(N(x)) since the place is invariant under conjugation
            KKind::Deg1 { ramified: true, .. } => rat_val(&x.norm(), self.p),
            KKind::Deg1 { ramified: false, .. } => {
                // strip the p-content so at least one coordinate is a p-unit;
                // then x is a unit at one of the two places above p, and the
                // norm valuation is carried entirely by this place iff the
                // residue vanishes
                let g = rat_val(x.coord_a(), self.p).min(rat_val(x.coord_b(), self.p));
                let scale = Rational::from(self.p).pow(-(g as i32));
                let x0 = x.mul_rational(&scale);
                if self.red_deg1_integral(&x0) != 0 {
                    g
                } else {
                    g + rat_val(&x0.norm(), self.p)
                }
            }
        }
    }

    fn uniformizer(&self) -> QElem {
        self.pi.clone()
    }

    fn reduce(&self, x: &QElem) -> FqEl {
        debug_assert!(self.val(x) >= 0, "element not integral at the place");
        match self.kind {
            KKind::Inert => (rat_red(x.coord_a(), self.p), rat_red(x.coord_b(), self.p)),
            KKind::Deg1 { ramified, .. } => {
                let mut m = Integer::from(x.coord_a().denom());
                m.lcm_mut(x.coord_b().denom());
                let k = if m == 1 { 0 } else { int_val(&m, self.p) };
                if k == 0 {
                    return (self.red_deg1_integral(x), 0);
                }
                // x = y/m with y integral; divide off the p-part of m against
                // an equal p-valuation inside y, using only place-units
                let y = x.mul_rational(&Rational::from(&m));
                let mp = Rational::from((m, Integer::from(self.p).pow(k as u32)));
                debug_assert!(mp.is_integer());
                let inv_mp = arith::inv_mod(rat_red(&mp, self.p), self.p);
                let r = if ramified {
                    // y / pi^{2k} is integral and x = (y/pi^{2k})/(m/p^k) * (pi^2/p)^k
                    let mut yy = y;
                    for _ in 0..2 * k {
                        yy = yy.div(&self.pi);
                    }
                    debug_assert!(yy.is_integral());
                    let unit = self.ram_unit.as_ref().unwrap();
                    let ru = self.red_deg1_integral(unit);
                    let base = arith::mul_mod(self.red_deg1_integral(&yy), inv_mp, self.p);
                    arith::mul_mod(base, arith::pow_mod(ru, k as u64, self.p), self.p)
                } else {
                    // multiply by the place-unit conj(pi)^k to make division
                    // by p^k land in O_K
                    let mut z = y;
                    for _ in 0..k {
                        z = z.mul(&self.pi_conj);
                    }
                    let zz = z.mul_rational(&Rational::from(Integer::from(self.p).pow(k as u32)).recip());
                    debug_assert!(zz.is_integral());
                    let rc = self.red_deg1_integral(&self.pi_conj);
                    debug_assert!(rc != 0);
                    let base = arith::mul_mod(self.red_deg1_integral(&zz), inv_mp, self.p);
                    arith::mul_mod(
                        base,
                        arith::pow_mod(arith::inv_mod(rc, self.p), k as u64, self.p),
                        self.p,
                    )
                };
                (r, 0)
            }
        }
    }

    fn lift(&self, r: FqEl) -> QElem {
        match self.kind {
            KKind::Inert => self.kq.elem(Rational::from(r.0), Rational::from(r.1)),
            KKind::Deg1 { .. } => {
                debug_assert_eq!(r.1, 0);
                self.kq.from_rational(Rational::from(r.0))
            }
        }
    }

    fn label(&self) -> String {
        format!("{}", self.prime)
    }
}

/// Result of running the reduction loop at one place.
pub(crate) struct EngineOut<F: ExactField> {
    pub kodaira: Kodaira,
    pub f: u32,
    pub c: u64,
    /// the translated (and, if the input was non-minimal, rescaled) model
    pub curve: Curve<F>,
    /// net transform from the input model to `curve`
    pub transform: Transform<F>,
    /// how many times the non-minimality step fired
    pub u_power: u32,
}

fn red_div<F: ExactField, P: TatePlace<F>>(place: &P, x: &F::El, k: u32) -> FqEl {
    let f = place.field();
    let pi = place.uniformizer();
    let mut y = x.clone();
    for _ in 0..k {
        y = f.div(&y, &pi);
    }
    place.reduce(&y)
}

fn pi_pow<F: ExactField, P: TatePlace<F>>(place: &P, k: u32) -> F::El {
    let f = place.field();
    let pi = place.uniformizer();
    let mut x = f.one();
    for _ in 0..k {
        x = f.mul(&x, &pi);
    }
    x
}

/// Singular point of the reduced curve, returned as lifted coordinates.
fn singular_point<F: ExactField, P: TatePlace<F>>(place: &P, e: &Curve<F>) -> (F::El, F::El) {
    let k = place.fq();
    let p = place.residue_char();
    if p <= 3 {
        // small residue field (q <= 9): locate the singular point by scanning
        let a1 = place.reduce(e.a1());
        let a2 = place.reduce(e.a2());
        let a3 = place.reduce(e.a3());
        let a4 = place.reduce(e.a4());
        let a6 = place.reduce(e.a6());
        let mut found = None;
        for x in k.elements() {
            for y in k.elements() {
                let x2 = k.mul(x, x);
                let x3 = k.mul(x2, x);
                // F = y^2 + a1 x y + a3 y - (x^3 + a2 x^2 + a4 x + a6)
                let fxy = k.sub(
                    k.add(k.mul(y, y), k.add(k.mul(a1, k.mul(x, y)), k.mul(a3, y))),
                    k.add(k.add(x3, k.mul(a2, x2)), k.add(k.mul(a4, x), a6)),
                );
                // F_x = a1 y - (3x^2 + 2 a2 x + a4)
                let fx = k.sub(
                    k.mul(a1, y),
                    k.add(
                        k.add(k.mul(k.from_u64(3), x2), k.mul(k.from_u64(2), k.mul(a2, x))),
                        a4,
                    ),
                );
                // F_y = 2y + a1 x + a3
                let fy = k.add(k.mul(k.from_u64(2), y), k.add(k.mul(a1, x), a3));
                if k.is_zero(fxy) && k.is_zero(fx) && k.is_zero(fy) {
                    debug_assert!(found.is_none(), "singular point must be unique");
                    found = Some((x, y));
                }
            }
        }
        let (x0, y0) = found.expect("singular reduction has a singular point");
        (place.lift(x0), place.lift(y0))
    } else {
        // p >= 5: complete the square; the singular x is the multiple root of
        // x^3 + (b2/4) x^2 + (b4/2) x + b6/4
        let pb = k.div(place.reduce(&e.b2()), k.from_u64(4));
        let qb = k.div(place.reduce(&e.b4()), k.from_u64(2));
        let rb = k.div(place.reduce(&e.b6()), k.from_u64(4));
        let disc2 = k.sub(k.mul(pb, pb), k.mul(k.from_u64(3), qb));
        let x0 = if k.is_zero(disc2) {
            // triple root -P/3
            k.div(k.neg(pb), k.from_u64(3))
        } else {
            // double root (9R - PQ) / (2 (P^2 - 3Q))
            let num = k.sub(k.mul(k.from_u64(9), rb), k.mul(pb, qb));
            k.div(num, k.mul(k.from_u64(2), disc2))
        };
        let y0 = k.div(
            k.neg(k.add(k.mul(place.reduce(e.a1()), x0), place.reduce(e.a3()))),
            k.from_u64(2),
        );
        (place.lift(x0), place.lift(y0))
    }
}

fn apply_translation<F: ExactField>(
    f: &F,
    cur: &mut Curve<F>,
    tr: &mut Transform<F>,
    r: &F::El,
    s: &F::El,
    t: &F::El,
) {
    let one = f.one();
    *cur = cur
        .transform(&one, r, s, t)
        .expect("translation preserves nonsingularity");
    let step = Transform {
        u: one,
        r: r.clone(),
        s: s.clone(),
        t: t.clone(),
    };
    *tr = Transform::compose(f, tr, &step);
}

pub(crate) fn tate_engine<F: ExactField, P: TatePlace<F>>(
    place: &P,
    e: &Curve<F>,
) -> Result<EngineOut<F>> {
    let fld = place.field().clone();
    for a in e.coeffs() {
        if place.val(a) < 0 {
            return Err(Error::NotIntegral(format!(
                "coefficient {} is not integral at {}",
                a,
                place.label()
            )));
        }
    }
    let k = place.fq().clone();
    let p = place.residue_char();
    let pi = place.uniformizer();
    let zero = fld.zero();

    let mut cur = e.clone();
    let mut tr = Transform::identity(&fld);
    let mut u_power = 0u32;

    let done = |kodaira: Kodaira, f: i64, c: u64, cur: Curve<F>, tr: Transform<F>, u_power| {
        debug_assert!(f >= 0);
        Ok(EngineOut {
            kodaira,
            f: f as u32,
            c,
            curve: cur,
            transform: tr,
            u_power,
        })
    };

    for _round in 0..64 {
        let n = place.val(cur.disc());
        if n == 0 {
            return done(Kodaira::I0, 0, 1, cur, tr, u_power);
        }

        // move the singular point of the reduction to (0, 0)
        let (r0, t0) = singular_point(place, &cur);
        apply_translation(&fld, &mut cur, &mut tr, &r0, &zero, &t0);
        debug_assert!(
            place.val(cur.a3()) >= 1 && place.val(cur.a4()) >= 1 && place.val(cur.a6()) >= 1
        );

        if place.val(&cur.b2()) == 0 {
            // multiplicative: split iff the tangent directions are rational,
            // i.e. T^2 + a1 T - a2 has roots in k
            let a1r = place.reduce(cur.a1());
            let a2r = place.reduce(cur.a2());
            let c = match k.quadratic_type(k.one(), a1r, k.neg(a2r)) {
                QuadraticType::Split(_, _) => n as u64,
                QuadraticType::NonSplit => {
                    if n % 2 == 0 {
                        2
                    } else {
                        1
                    }
                }
                QuadraticType::DoubleRoot(_) => unreachable!("tangent cone is nondegenerate"),
            };
            return done(Kodaira::In(n as u32), 1, c, cur, tr, u_power);
        }

        if place.val(cur.a6()) < 2 {
            return done(Kodaira::II, n, 1, cur, tr, u_power);
        }
        if place.val(&cur.b8()) < 3 {
            return done(Kodaira::III, n - 1, 2, cur, tr, u_power);
        }
        if place.val(&cur.b6()) < 3 {
            let a3t = red_div(place, cur.a3(), 1);
            let a6t = red_div(place, cur.a6(), 2);
            let c = match k.quadratic_type(k.one(), a3t, k.neg(a6t)) {
                QuadraticType::Split(_, _) => 3,
                QuadraticType::NonSplit => 1,
                QuadraticType::DoubleRoot(_) => unreachable!("v(b6) = 2 forces distinct roots"),
            };
            return done(Kodaira::IV, n - 2, c, cur, tr, u_power);
        }

        // normalize so that pi | a1, a2, pi^2 | a3, a4, pi^3 | a6
        let s6 = if p == 2 {
            place.lift(k.sqrt(place.reduce(cur.a2())).expect("squares in char 2"))
        } else {
            let a1r = place.reduce(cur.a1());
            place.lift(k.div(k.neg(a1r), k.from_u64(2)))
        };
        apply_translation(&fld, &mut cur, &mut tr, &zero, &s6, &zero);
        let t6 = if p == 2 {
            let a6t = red_div(place, cur.a6(), 2);
            fld.mul(&pi, &place.lift(k.sqrt(a6t).expect("squares in char 2")))
        } else {
            let a3t = red_div(place, cur.a3(), 1);
            fld.mul(&pi, &place.lift(k.div(k.neg(a3t), k.from_u64(2))))
        };
        apply_translation(&fld, &mut cur, &mut tr, &zero, &zero, &t6);
        debug_assert!(
            place.val(cur.a1()) >= 1
                && place.val(cur.a2()) >= 1
                && place.val(cur.a3()) >= 2
                && place.val(cur.a4()) >= 2
                && place.val(cur.a6()) >= 3,
            "normalization failed"
        );

        // the cubic T^3 + (a2/pi) T^2 + (a4/pi^2) T + a6/pi^3 over k
        let p2 = red_div(place, cur.a2(), 1);
        let p1 = red_div(place, cur.a4(), 2);
        let p0 = red_div(place, cur.a6(), 3);
        match k.cubic_type(p2, p1, p0) {
            CubicType::Separable(nroots) => {
                return done(Kodaira::I0Star, n - 4, 1 + nroots as u64, cur, tr, u_power);
            }
            CubicType::DoubleRoot(alpha) => {
                let r = fld.mul(&pi, &place.lift(alpha));
                apply_translation(&fld, &mut cur, &mut tr, &r, &zero, &zero);
                // now v(a2) = 1 and the I_n* subprocedure applies: test
                // alternating quadratics in y and x at increasing depth
                let a21 = red_div(place, cur.a2(), 1);
                debug_assert!(!k.is_zero(a21));
                let mut ix = 1u32;
                let mut iy = 1u32;
                loop {
                    let nn = ix + iy - 1;
                    if nn as i64 > n {
                        return Err(Error::Degenerate(
                            "non-terminating I_n* subprocedure".into(),
                        ));
                    }
                    // Y^2 + a_{3, iy+1} Y - a_{6, ix+iy+2}
                    let a3t = red_div(place, cur.a3(), iy + 1);
                    let a6t = red_div(place, cur.a6(), ix + iy + 2);
                    match k.quadratic_type(k.one(), a3t, k.neg(a6t)) {
                        QuadraticType::Split(_, _) => {
                            return done(
                                Kodaira::InStar(nn),
                                n - 4 - nn as i64,
                                4,
                                cur,
                                tr,
                                u_power,
                            );
                        }
                        QuadraticType::NonSplit => {
                            return done(
                                Kodaira::InStar(nn),
                                n - 4 - nn as i64,
                                2,
                                cur,
                                tr,
                                u_power,
                            );
                        }
                        QuadraticType::DoubleRoot(y1) => {
                            let t = fld.mul(&pi_pow(place, iy + 1), &place.lift(y1));
                            apply_translation(&fld, &mut cur, &mut tr, &zero, &zero, &t);
                            iy += 1;
                        }
                    }
                    let nn = ix + iy - 1;
                    // a_{2,1} X^2 + a_{4, ix+2} X + a_{6, ix+iy+2}
                    let a4t = red_div(place, cur.a4(), ix + 2);
                    let a6t = red_div(place, cur.a6(), ix + iy + 2);
                    match k.quadratic_type(a21, a4t, a6t) {
                        QuadraticType::Split(_, _) => {
                            return done(
                                Kodaira::InStar(nn),
                                n - 4 - nn as i64,
                                4,
                                cur,
                                tr,
                                u_power,
                            );
                        }
                        QuadraticType::NonSplit => {
                            return done(
                                Kodaira::InStar(nn),
                                n - 4 - nn as i64,
                                2,
                                cur,
                                tr,
                                u_power,
                            );
                        }
                        QuadraticType::DoubleRoot(x1) => {
                            let r = fld.mul(&pi_pow(place, ix + 1), &place.lift(x1));
                            apply_translation(&fld, &mut cur, &mut tr, &r, &zero, &zero);
                            ix += 1;
                        }
                    }
                }
            }
            CubicType::TripleRoot(alpha) => {
                let r = fld.mul(&pi, &place.lift(alpha));
                apply_translation(&fld, &mut cur, &mut tr, &r, &zero, &zero);
                // Y^2 + a_{3,2} Y - a_{6,4}
                let a3t = red_div(place, cur.a3(), 2);
                let a6t = red_div(place, cur.a6(), 4);
                match k.quadratic_type(k.one(), a3t, k.neg(a6t)) {
                    QuadraticType::Split(_, _) => {
                        return done(Kodaira::IVStar, n - 6, 3, cur, tr, u_power);
                    }
                    QuadraticType::NonSplit => {
                        return done(Kodaira::IVStar, n - 6, 1, cur, tr, u_power);
                    }
                    QuadraticType::DoubleRoot(y1) => {
                        let t = fld.mul(&pi_pow(place, 2), &place.lift(y1));
                        apply_translation(&fld, &mut cur, &mut tr, &zero, &zero, &t);
                        if place.val(cur.a4()) < 4 {
                            return done(Kodaira::IIIStar, n - 7, 2, cur, tr, u_power);
                        }
                        if place.val(cur.a6()) < 6 {
                            return done(Kodaira::IIStar, n - 8, 1, cur, tr, u_power);
                        }
                        // non-minimal: divide a_i by pi^i and restart
                        debug_assert!(cur.coeffs().iter().zip([1, 2, 3, 4, 6]).all(
                            |(a, w)| place.val(a) >= w,
                        ));
                        cur = cur
                            .transform(&pi, &zero, &zero, &zero)
                            .expect("rescaling preserves nonsingularity");
                        let step = Transform {
                            u: pi.clone(),
                            r: zero.clone(),
                            s: zero.clone(),
                            t: zero.clone(),
                        };
                        tr = Transform::compose(&fld, &tr, &step);
                        u_power += 1;
                    }
                }
            }
        }
    }
    Err(Error::Degenerate(
        "reduction loop failed to terminate".into(),
    ))
}

/// Local reduction data of an integral model of E/Q, minimal at p.
pub fn tate_algorithm_q(e: &CurveQ, p: u64) -> Result<LocalData> {
    let place = QPlace::new(p);
    let out = tate_engine(&place, e)?;
    if out.u_power > 0 {
        return Err(Error::NotMinimal(format!(
            "model is not minimal at {}; pass it through minimal_model first",
            p
        )));
    }
    Ok(LocalData {
        place: Place::Q(p),
        kodaira: out.kodaira,
        f: out.f,
        c: out.c,
        c_ideal: None,
    })
}

/// Local reduction data of an integral model of E/K at a prime ideal,
/// requiring the model minimal there.
pub fn tate_algorithm_k(e: &CurveK, prime: &FracIdeal) -> Result<LocalData> {
    let place = KPlace::new(e.field(), prime)?;
    let out = tate_engine(&place, e)?;
    if out.u_power > 0 {
        return Err(Error::NotMinimal(format!(
            "model is not minimal at {}; pass it through minimal_model first",
            prime
        )));
    }
    Ok(LocalData {
        place: Place::K(prime.clone()),
        kodaira: out.kodaira,
        f: out.f,
        c: out.c,
        c_ideal: tamagawa_ideal_for(e.field(), out.c),
    })
}

/// The order ideal of the component group as an O_K-module, from its order.
///
/// For CM curves the component group order ideal is (1), (2), or the ramified
/// prime above 2 or 3; Tamagawa numbers outside that table yield `None` and
/// callers fall back to norm-only reporting.
pub fn tamagawa_ideal_for(k: &QuadField, c: u64) -> Option<FracIdeal> {
    match c {
        1 => Some(FracIdeal::one(k.clone())),
        2 if k.split_type(2) == SplitType::Ramified => Some(k.prime_above(2)),
        3 if k.split_type(3) == SplitType::Ramified => Some(k.prime_above(3)),
        4 => Some(FracIdeal::principal(&k.from_int(2))),
        _ => None,
    }
}

fn floor_div(a: &Integer, b: i64) -> Integer {
    let (q, _) = a.clone().div_rem_floor(Integer::from(b));
    q
}

/// A global minimal model of E/Q together with the transform onto it.
///
/// Minimality is reached by running the reduction loop at every bad prime
/// (its final step strips one factor of p^12 from the discriminant at a
/// time), and the result is then normalized to a1, a3 in {0, 1} and a2 in
/// {-1, 0, 1}.
pub fn minimal_model_q(e: &CurveQ) -> Result<(CurveQ, Transform<Rationals>)> {
    let fld = Rationals;
    let mut cur = e.clone();
    let mut tr = Transform::identity(&fld);

    // integralize: scaling by u = 1/p multiplies a_i by p^i
    loop {
        let mut m = Integer::from(1);
        for a in cur.coeffs() {
            m.lcm_mut(a.denom());
        }
        if m == 1 {
            break;
        }
        let p = arith::factor(&m)[0].0.clone();
        let step = Transform {
            u: Rational::from((Integer::from(1), p)),
            r: fld.zero(),
            s: fld.zero(),
            t: fld.zero(),
        };
        cur = cur.transform(&step.u, &step.r, &step.s, &step.t)?;
        tr = Transform::compose(&fld, &tr, &step);
    }

    let delta = cur.disc().numer().clone();
    for (p, _) in arith::factor(&delta.abs_ref().into()) {
        let pu = p
            .to_u64()
            .ok_or_else(|| Error::BadInput("discriminant prime exceeds 64 bits".into()))?;
        let place = QPlace::new(pu);
        let out = tate_engine(&place, &cur)?;
        if out.u_power > 0 {
            cur = out.curve;
            tr = Transform::compose(&fld, &tr, &out.transform);
        }
    }

    // reduce translations: a1, a3 in {0, 1}, a2 in {-1, 0, 1}
    let s = Rational::from(-floor_div(cur.a1().numer(), 2));
    let zero = fld.zero();
    let step = Transform {
        u: fld.one(),
        r: zero.clone(),
        s,
        t: zero.clone(),
    };
    cur = cur.transform(&step.u, &step.r, &step.s, &step.t)?;
    tr = Transform::compose(&fld, &tr, &step);

    let r = Rational::from(-floor_div(&Integer::from(cur.a2().numer() + 1i64), 3));
    let step = Transform {
        u: fld.one(),
        r,
        s: zero.clone(),
        t: zero.clone(),
    };
    cur = cur.transform(&step.u, &step.r, &step.s, &step.t)?;
    tr = Transform::compose(&fld, &tr, &step);

    let t = Rational::from(-floor_div(cur.a3().numer(), 2));
    let step = Transform {
        u: fld.one(),
        r: zero.clone(),
        s: zero,
        t,
    };
    cur = cur.transform(&step.u, &step.r, &step.s, &step.t)?;
    tr = Transform::compose(&fld, &tr, &step);

    debug_assert!(cur.is_integral());
    debug_assert_eq!(
        e.transform(&tr.u, &tr.r, &tr.s, &tr.t)?,
        cur,
        "net transform must reproduce the minimal model"
    );
    Ok((cur, tr))
}

/// Prime ideals dividing the discriminant of an integral model over K.
fn bad_primes_k(e: &CurveK) -> Result<Vec<FracIdeal>> {
    let kf = e.field();
    let nd: Rational = e.disc().norm();
    debug_assert!(nd.is_integer());
    let mut out = Vec::new();
    let delta_ideal = FracIdeal::principal(e.disc());
    for (p, _) in arith::factor(&Integer::from(nd.numer().abs_ref())) {
        let pu = p
            .to_u64()
            .ok_or_else(|| Error::BadInput("discriminant prime exceeds 64 bits".into()))?;
        let pa = kf.prime_above(pu);
        let mut primes = vec![pa.clone()];
        if kf.split_type(pu) == SplitType::Split {
            primes.push(pa.conj());
        }
        for prime in primes {
            if delta_ideal.valuation_at(&prime) > 0 {
                out.push(prime);
            }
        }
    }
    Ok(out)
}

fn floor_div2_elem(kf: &QuadField, x: &QElem, b: i64, shift: i64) -> QElem {
    // coordinate-wise -floor((coord + shift)/b)
    let fa = -floor_div(&Integer::from(x.coord_a().numer() + shift), b);
    let fb = -floor_div(&Integer::from(x.coord_b().numer() + shift), b);
    kf.elem(Rational::from(fa), Rational::from(fb))
}

/// A minimal model of E/K (class number one) with the transform onto it.
pub fn minimal_model_k(e: &CurveK) -> Result<(CurveK, Transform<QuadField>)> {
    let kf = e.field().clone();
    let mut cur = e.clone();
    let mut tr = Transform::identity(&kf);

    loop {
        let mut m = Integer::from(1);
        for a in cur.coeffs() {
            m.lcm_mut(a.coord_a().denom());
            m.lcm_mut(a.coord_b().denom());
        }
        if m == 1 {
            break;
        }
        let p = arith::factor(&m)[0].0.clone();
        let step = Transform {
            u: kf.from_rational(Rational::from((Integer::from(1), p))),
            r: kf.zero(),
            s: kf.zero(),
            t: kf.zero(),
        };
        cur = cur.transform(&step.u, &step.r, &step.s, &step.t)?;
        tr = Transform::compose(&kf, &tr, &step);
    }

    for prime in bad_primes_k(&cur)? {
        let place = KPlace::new(&kf, &prime)?;
        let out = tate_engine(&place, &cur)?;
        if out.u_power > 0 {
            cur = out.curve;
            tr = Transform::compose(&kf, &tr, &out.transform);
        }
    }

    // deterministic translation cleanup, coordinate-wise
    let zero = kf.zero();
    let s = floor_div2_elem(&kf, cur.a1(), 2, 0);
    let step = Transform {
        u: kf.one(),
        r: zero.clone(),
        s,
        t: zero.clone(),
    };
    cur = cur.transform(&step.u, &step.r, &step.s, &step.t)?;
    tr = Transform::compose(&kf, &tr, &step);

    let r = floor_div2_elem(&kf, cur.a2(), 3, 1);
    let step = Transform {
        u: kf.one(),
        r,
        s: zero.clone(),
        t: zero.clone(),
    };
    cur = cur.transform(&step.u, &step.r, &step.s, &step.t)?;
    tr = Transform::compose(&kf, &tr, &step);

    let t = floor_div2_elem(&kf, cur.a3(), 2, 0);
    let step = Transform {
        u: kf.one(),
        r: zero.clone(),
        s: zero,
        t,
    };
    cur = cur.transform(&step.u, &step.r, &step.s, &step.t)?;
    tr = Transform::compose(&kf, &tr, &step);

    debug_assert!(cur.is_integral());
    debug_assert_eq!(e.transform(&tr.u, &tr.r, &tr.s, &tr.t)?, cur);
    Ok((cur, tr))
}

/// Local data at every bad prime of a minimal integral model of E/Q.
pub fn local_data_q(e: &CurveQ) -> Result<Vec<LocalData>> {
    if !e.is_integral() {
        return Err(Error::NotIntegral("model must be integral".into()));
    }
    let delta = e.disc().numer().clone();
    let mut out = Vec::new();
    for (p, _) in arith::factor(&Integer::from(delta.abs_ref())) {
        let pu = p
            .to_u64()
            .ok_or_else(|| Error::BadInput("discriminant prime exceeds 64 bits".into()))?;
        out.push(tate_algorithm_q(e, pu)?);
    }
    Ok(out)
}

/// Local data at every bad prime of a minimal integral model of E/K.
pub fn local_data_k(e: &CurveK) -> Result<Vec<LocalData>> {
    if !e.is_integral() {
        return Err(Error::NotIntegral("model must be integral".into()));
    }
    let mut out = Vec::new();
    for prime in bad_primes_k(e)? {
        out.push(tate_algorithm_k(e, &prime)?);
    }
    Ok(out)
}

/// The conductor N of E/Q (any rational model).
pub fn conductor_q(e: &CurveQ) -> Result<Integer> {
    let (m, _) = minimal_model_q(e)?;
    let mut n = Integer::from(1);
    for data in local_data_q(&m)? {
        if let Place::Q(p) = data.place {
            n *= Integer::from(p).pow(data.f);
        }
    }
    Ok(n)
}

/// The conductor ideal of E/K (any model over a class-number-one field).
pub fn conductor_k(e: &CurveK) -> Result<FracIdeal> {
    let (m, _) = minimal_model_k(e)?;
    let mut n = FracIdeal::one(e.field().clone());
    for data in local_data_k(&m)? {
        if let Place::K(prime) = &data.place {
            n = n.mul(&prime.pow(data.f as i32)?)?;
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveQ;

    fn q_local(a: [i64; 5], p: u64) -> LocalData {
        let e = CurveQ::from_ints(a).unwrap();
        tate_algorithm_q(&e, p).unwrap()
    }

    #[test]
    fn good_reduction_is_i0() {
        let d = q_local([0, 0, 0, -1, 0], 5);
        assert_eq!(d.kodaira, Kodaira::I0);
        assert_eq!((d.f, d.c), (0, 1));
    }

    #[test]
    fn multiplicative_split_i5() {
        // y^2 + y = x^3 - x^2 - 10x - 20, discriminant -11^5
        let d = q_local([0, -1, 1, -10, -20], 11);
        assert_eq!(d.kodaira, Kodaira::In(5));
        assert_eq!((d.f, d.c), (1, 5));
    }

    #[test]
    fn multiplicative_nonsplit_i1() {
        // y^2 + y = x^3 - x^2, discriminant -11: tangent slopes satisfy
        // T^2 + 1 = 0 which has no root mod 11
        let d = q_local([0, -1, 1, 0, 0], 11);
        assert_eq!(d.kodaira, Kodaira::In(1));
        assert_eq!((d.f, d.c), (1, 1));
    }

    #[test]
    fn additive_types_at_two_and_seven() {
        // y^2 = x^3 - x at 2: type III, f = 5 (conductor 32)
        let d = q_local([0, 0, 0, -1, 0], 2);
        assert_eq!(d.kodaira, Kodaira::III);
        assert_eq!((d.f, d.c), (5, 2));

        // y^2 + xy = x^3 - x^2 - 2x - 1 at 7: type III, f = 2 (conductor 49)
        let d = q_local([1, -1, 0, -2, -1], 7);
        assert_eq!(d.kodaira, Kodaira::III);
        assert_eq!((d.f, d.c), (2, 2));
    }

    #[test]
    fn j_zero_curve_types() {
        // y^2 = x^3 + 1, discriminant -432 = -2^4 3^3, conductor 36
        let d = q_local([0, 0, 0, 0, 1], 2);
        assert_eq!(d.kodaira, Kodaira::IV);
        assert_eq!(d.f, 2);
        let d = q_local([0, 0, 0, 0, 1], 3);
        assert_eq!(d.kodaira, Kodaira::III);
        assert_eq!((d.f, d.c), (2, 2));
    }

    #[test]
    fn iv_star_at_three() {
        // y^2 + y = x^3 - 7, discriminant -3^9, conductor 27
        let d = q_local([0, 0, 1, 0, -7], 3);
        assert_eq!(d.kodaira, Kodaira::IVStar);
        assert_eq!((d.f, d.c), (3, 3));
    }

    #[test]
    fn i0_star_for_congruent_number_curve() {
        // y^2 = x^3 - 9x at 3: the cubic has three rational roots
        let d = q_local([0, 0, 0, -9, 0], 3);
        assert_eq!(d.kodaira, Kodaira::I0Star);
        assert_eq!((d.f, d.c), (2, 4));
        // and at 2 the type matches the n = 1 curve
        let d = q_local([0, 0, 0, -9, 0], 2);
        assert_eq!(d.kodaira, Kodaira::III);
        assert_eq!(d.f, 5);
    }

    #[test]
    fn quadratic_twist_gives_in_star() {
        // twisting the split I5 curve by -11 turns I5 into I5* at 11
        let e = CurveQ::from_ints([0, -1, 1, -10, -20]).unwrap();
        let tw = e.quadratic_twist(-11).unwrap();
        let d = tate_algorithm_q(&tw, 11).unwrap();
        assert_eq!(d.kodaira, Kodaira::InStar(5));
        assert_eq!(d.f, 2);
        assert!(d.c == 2 || d.c == 4);
        // v(Delta) = f + m - 1 with m = 5 + n components
        assert_eq!(rat_val(tw.disc(), 11), 2 + (5 + 5) - 1);
    }

    #[test]
    fn non_minimal_model_detected_and_reduced() {
        // u = 2 rescaling of y^2 = x^3 - x
        let big = CurveQ::from_ints([0, 0, 0, -16, 0]).unwrap();
        match tate_algorithm_q(&big, 2) {
            Err(Error::NotMinimal(_)) => {}
            other => panic!("expected NotMinimal, got {:?}", other),
        }
        let (m, tr) = minimal_model_q(&big).unwrap();
        let small = CurveQ::from_ints([0, 0, 0, -1, 0]).unwrap();
        assert_eq!(m, small);
        assert_eq!(tr.u, Rational::from(2));
    }

    #[test]
    fn minimal_model_round_trip() {
        let e = CurveQ::from_ints([0, -1, 1, -10, -20]).unwrap();
        // scramble by (u, r, s, t) = (1/2, 3, 1, 4): coefficients stay integral
        let half = Rational::from((1, 2));
        let scr = e
            .transform(&half, &Rational::from(3), &Rational::from(1), &Rational::from(4))
            .unwrap();
        let (m, _) = minimal_model_q(&scr).unwrap();
        assert_eq!(m, e, "recovers the reduced minimal model");
        // and minimal_model is idempotent
        let (m2, tr2) = minimal_model_q(&m).unwrap();
        assert_eq!(m2, m);
        assert!(tr2.is_identity(&Rationals));
    }

    #[test]
    fn conductors_over_q() {
        let cases: [([i64; 5], u64); 6] = [
            ([0, -1, 1, -10, -20], 11),
            ([0, 0, 0, -1, 0], 32),
            ([1, -1, 0, -2, -1], 49),
            ([0, 0, 0, 0, 1], 36),
            ([0, 0, 1, 0, -7], 27),
            ([0, 0, 0, -9, 0], 288),
        ];
        for (a, n) in cases {
            let e = CurveQ::from_ints(a).unwrap();
            assert_eq!(conductor_q(&e).unwrap(), Integer::from(n), "N of {:?}", a);
        }
    }

    #[test]
    fn tame_conductor_exponent_at_large_primes() {
        // for p >= 5 the conductor exponent of additive reduction is exactly 2
        for (a, p) in [
            ([0i64, 0, 0, -25, 0], 5u64),
            ([0, 0, 0, 0, 49], 7),
            ([0, 0, 0, -9, 0], 3), // p = 3 but still tame here
        ] {
            let e = CurveQ::from_ints(a).unwrap();
            let (m, _) = minimal_model_q(&e).unwrap();
            let d = tate_algorithm_q(&m, p).unwrap();
            assert!(d.kodaira.is_additive());
            assert_eq!(d.f, 2, "tame exponent at {}", p);
        }
    }

    #[test]
    fn k_place_valuation_and_reduction() {
        let k = QuadField::new(-4).unwrap();
        let p2 = k.prime_above(2);
        let place = KPlace::new(&k, &p2).unwrap();
        // v(2) = 2 at the ramified prime, v(1+i) = 1
        assert_eq!(place.val(&k.from_int(2)), 2);
        let one_plus_i = place.uniformizer();
        assert_eq!(place.val(&one_plus_i), 1);
        // reduce a unit with 2-power denominator: (1+i)/(1-i) = i, v = 0
        let i_unit = one_plus_i.div(&one_plus_i.conj());
        assert_eq!(place.val(&i_unit), 0);
        assert_eq!(place.reduce(&i_unit), (1, 0));

        // split place of Q(i) above 5: pi/5 = 1/conj(pi) is a unit at pi,
        // while conj(pi)/5 = 1/pi has valuation -1
        let p5 = k.prime_above(5);
        let place5 = KPlace::new(&k, &p5).unwrap();
        let pi5 = place5.uniformizer();
        let x = pi5.mul_rational(&Rational::from((1, 5)));
        assert_eq!(place5.val(&x), 0, "pi/5 is a unit at pi");
        let r = place5.reduce(&x);
        assert!(r.0 != 0);
        let y = pi5.conj().mul_rational(&Rational::from((1, 5)));
        assert_eq!(place5.val(&y), -1, "conj(pi)/5 = 1/pi at pi");
        // inert place above 3: valuation is the coordinate minimum
        let p3 = k.prime_above(3);
        let place3 = KPlace::new(&k, &p3).unwrap();
        assert_eq!(place3.val(&k.from_int(9)), 2);
        assert_eq!(place3.val(&one_plus_i), 0);
    }

    #[test]
    fn base_change_to_q_i_at_ramified_two() {
        // y^2 = x^3 - x over Q(i): fibre I2* at (1+i), conductor exponent 6
        let k = QuadField::new(-4).unwrap();
        let e = CurveQ::from_ints([0, 0, 0, -1, 0])
            .unwrap()
            .base_change(k.clone())
            .unwrap();
        let p2 = k.prime_above(2);
        let d = tate_algorithm_k(&e, &p2).unwrap();
        assert_eq!(d.kodaira, Kodaira::InStar(2));
        assert_eq!((d.f, d.c), (6, 4));
        // component group order ideal (2), of norm c = 4
        let ci = d.c_ideal.expect("CM classification applies");
        assert_eq!(ci, FracIdeal::principal(&k.from_int(2)));
        // conductor ideal (1+i)^6 of norm 64
        let n = conductor_k(&e).unwrap();
        assert_eq!(n, p2.pow(6).unwrap());
        assert_eq!(n.norm(), Rational::from(64));
    }

    #[test]
    fn base_change_preserves_split_local_data() {
        // 11 splits in Q(sqrt(-7)); the completions at both primes above 11
        // are Q_11, so the local data matches the rational one
        let k = QuadField::new(-7).unwrap();
        let e = CurveQ::from_ints([0, -1, 1, -10, -20]).unwrap();
        let ek = e.base_change(k.clone()).unwrap();
        assert_eq!(k.split_type(11), SplitType::Split);
        let p11 = k.prime_above(11);
        for prime in [p11.clone(), p11.conj()] {
            let d = tate_algorithm_k(&ek, &prime).unwrap();
            assert_eq!(d.kodaira, Kodaira::In(5));
            assert_eq!((d.f, d.c), (1, 5));
        }
    }

    #[test]
    fn base_change_inert_multiplicative_becomes_split() {
        // nonsplit I1 at 11 over Q; 11 is inert in Q(i) and every quadratic
        // splits over F_121, so the type becomes split with c = n
        let k = QuadField::new(-4).unwrap();
        assert_eq!(k.split_type(11), SplitType::Inert);
        let e = CurveQ::from_ints([0, -1, 1, 0, 0]).unwrap();
        let ek = e.base_change(k.clone()).unwrap();
        let d = tate_algorithm_k(&ek, &k.prime_above(11)).unwrap();
        assert_eq!(d.kodaira, Kodaira::In(1));
        assert_eq!((d.f, d.c), (1, 1));
    }

    #[test]
    fn minimal_model_k_round_trip() {
        let k = QuadField::new(-4).unwrap();
        let e = CurveQ::from_ints([0, 0, 0, -1, 0])
            .unwrap()
            .base_change(k.clone())
            .unwrap();
        // scramble with a unit u = i and translations in O_K
        let i = k.elem(Rational::from(2), Rational::from(1)); // 2 + omega = i
        assert_eq!(i.mul(&i), k.from_int(-1));
        let scr = e
            .transform(&i, &k.from_int(3), &i, &k.from_int(-2))
            .unwrap();
        let (m, _) = minimal_model_k(&scr).unwrap();
        // the minimal model is unchanged up to the deterministic cleanup,
        // so its discriminant ideal matches the original
        assert_eq!(
            FracIdeal::principal(m.disc()),
            FracIdeal::principal(e.disc())
        );
        let (m2, tr2) = minimal_model_k(&m).unwrap();
        assert_eq!(m2, m);
        assert!(tr2.is_identity(&k));
    }

    #[test]
    fn local_data_json_shape() {
        let e = CurveQ::from_ints([0, 0, 0, -1, 0]).unwrap();
        let d = tate_algorithm_q(&e, 2).unwrap();
        let v = d.to_json();
        assert_eq!(v["p"], 2);
        assert_eq!(v["kodaira"], "III");
        assert_eq!(v["f"], 5);
        assert_eq!(v["c"], 2);
        assert!(v["c_ideal"].is_null());
    }

    #[test]
    fn transform_composition_matches_sequential_application() {
        let f = Rationals;
        let e = CurveQ::from_ints([1, -1, 0, -2, -1]).unwrap();
        let t1 = Transform {
            u: Rational::from(2),
            r: Rational::from(3),
            s: Rational::from((1, 2)),
            t: Rational::from(-1),
        };
        let t2 = Transform {
            u: Rational::from((1, 3)),
            r: Rational::from(-2),
            s: Rational::from(5),
            t: Rational::from((7, 4)),
        };
        let seq = e
            .transform(&t1.u, &t1.r, &t1.s, &t1.t)
            .unwrap()
            .transform(&t2.u, &t2.r, &t2.s, &t2.t)
            .unwrap();
        let net = Transform::compose(&f, &t1, &t2);
        let direct = e.transform(&net.u, &net.r, &net.s, &net.t).unwrap();
        assert_eq!(seq, direct);
    }

    #[test]
    fn push_point_lands_on_transformed_curve() {
        let f = Rationals;
        let e = CurveQ::from_ints([0, 0, 0, 0, 1]).unwrap(); // contains (0, 1)
        let tr = Transform {
            u: Rational::from((2, 3)),
            r: Rational::from(1),
            s: Rational::from(-2),
            t: Rational::from(5),
        };
        let e2 = e.transform(&tr.u, &tr.r, &tr.s, &tr.t).unwrap();
        let (x, y) = tr.push_point(&f, &Rational::from(0), &Rational::from(1));
        assert!(f.is_zero(&e2.equation(&x, &y)));
    }
}
