//! Class groups of imaginary quadratic fields via reduced binary quadratic
//! forms, with characters given by exact roots of unity.
//!
//! A positive definite primitive form (A, B, C) of discriminant D = B^2 - 4AC
//! is reduced when |B| <= A <= C, with B >= 0 if |B| = A or A = C; each class
//! contains exactly one reduced form, and A <= sqrt(|D|/3) bounds the
//! enumeration.  Composition is delegated to ideal multiplication through the
//! dictionary
//!
//! ```text
//! (A, B, C)  <-->  Z A + Z (b + w),   b = (B - D)/2,
//! ```
//!
//! under which N(b + w) = AC, so the class group is literally the ideal class
//! group and no Gauss/Dirichlet composition formulas are needed.
//!
//! The group structure is extracted by a polycyclic scan: generators are
//! accumulated greedily with their relative orders, giving a triangular
//! relation matrix whose Smith normal form yields elementary divisors
//! d_1 | d_2 | ... and a coordinate map; characters are then the exponent
//! vectors t with values chi(x) = exp(2 pi i * sum_j t_j y_j / d_j), stored as
//! exact rationals in Q/Z.  Orthogonality sum checks run in Z[x]/Phi_L(x).

use super::{FracIdeal, QuadField};
use crate::Result;
use rug::ops::RemRounding;
use rug::{Complex, Float, Integer, Rational};
use std::collections::HashMap;
use std::fmt;

/// A positive definite integral binary quadratic form A x^2 + B xy + C y^2.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && (b >= 0 || (b.abs() < a && a < c))
    }

    /// The ideal Z A + Z ((B - D)/2 + w) in the class of this form.
    pub fn to_ideal(&self, field: QuadField) -> FracIdeal {
        let d = field.disc();
        let b_id = Rational::from((self.b - d) / 2);
        FracIdeal::from_generators(
            field,
            &[
                field.from_int(self.a),
                field.elem(b_id, Rational::from(1)),
            ],
        )
        .expect("form ideal")
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// Reduce a (possibly large-entry) form of discriminant d to its canonical
/// reduced representative.
fn reduce_form(a: Integer, b: Integer, c: Integer, d: i64) -> QuadForm {
    let (mut a, mut b, mut c) = (a, b, c);
    let d_big = Integer::from(d);
    loop {
        // normalize b into (-a, a]
        if b > a || b <= -a.clone() {
            let two_a = Integer::from(2) * &a;
            let mut r = b.rem_euc(two_a.clone());
            if r > a {
                r -= &two_a;
            }
            b = r;
            c = (Integer::from(&b * &b) - &d_big) / (Integer::from(4) * &a);
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        break;
    }
    if a == c && b < 0 {
        b = -b;
    }
    QuadForm {
        a: a.to_i64().expect("reduced form fits i64"),
        b: b.to_i64().expect("reduced form fits i64"),
        c: c.to_i64().expect("reduced form fits i64"),
    }
}

/// The class group of the field of fundamental discriminant D.
#[derive(Clone, Debug)]
pub struct ClassGroup {
    field: QuadField,
    forms: Vec<QuadForm>,
    index: HashMap<QuadForm, usize>,
    table: Vec<Vec<usize>>,
    identity: usize,
    /// elementary divisors d_1 | d_2 | ... (all > 1; empty for h = 1)
    divisors: Vec<u64>,
    /// SNF coordinates of each form: coords[i][j] in [0, d_j)
    coords: Vec<Vec<u64>>,
}

/// Construct the class group for the fundamental discriminant `d`.
pub fn class_group(d: i64) -> Result<ClassGroup> {
    let field = QuadField::new(d)?;
    Ok(ClassGroup::new(field))
}

impl ClassGroup {
    pub fn new(field: QuadField) -> ClassGroup {
        let d = field.disc();
        let mut forms = Vec::new();
        let bound = {
            let mut a = 1i64;
            while 3 * (a + 1) * (a + 1) <= -d {
                a += 1;
            }
            a
        };
        for a in 1..=bound {
            for b in (-a + 1)..=a {
                if (b - d).rem_euclid(2) != 0 {
                    continue;
                }
                let num = b * b - d;
                if num % (4 * a) != 0 {
                    continue;
                }
                let c = num / (4 * a);
                if c < a || (c == a && b < 0) {
                    continue;
                }
                let f = QuadForm { a, b, c };
                debug_assert!(f.is_reduced());
                debug_assert_eq!(gcd3(a, b, c), 1, "fundamental disc gives primitive forms");
                forms.push(f);
            }
        }
        forms.sort();
        let index: HashMap<QuadForm, usize> =
            forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let h = forms.len();
        let mut table = vec![vec![0usize; h]; h];
        for i in 0..h {
            for j in 0..=i {
                let prod = forms[i]
                    .to_ideal(field)
                    .mul(&forms[j].to_ideal(field))
                    .expect("same field");
                let k = index[&form_of_ideal(field, &prod)];
                table[i][j] = k;
                table[j][i] = k;
            }
        }
        let identity = {
            let b = if d % 2 == 0 { 0 } else { 1 };
            let f = QuadForm {
                a: 1,
                b,
                c: (b * b - d) / 4,
            };
            index[&f]
        };
        let (divisors, coords) = group_structure(&table, identity);
        ClassGroup {
            field,
            forms,
            index,
            table,
            identity,
            divisors,
            coords,
        }
    }

    pub fn field(&self) -> QuadField {
        self.field
    }

    pub fn disc(&self) -> i64 {
        self.field.disc()
    }

    /// The class number h.
    pub fn h(&self) -> u64 {
        self.forms.len() as u64
    }

    pub fn forms(&self) -> &[QuadForm] {
        &self.forms
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    /// Elementary divisors d_1 | d_2 | ... of the group (empty for h = 1).
    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }

    pub fn compose(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn inverse(&self, i: usize) -> usize {
        // the inverse class is the conjugate form (A, -B, C)
        let f = self.forms[i];
        let inv = reduce_form(
            Integer::from(f.a),
            Integer::from(-f.b),
            Integer::from(f.c),
            self.disc(),
        );
        self.index[&inv]
    }

    /// Index of the class of an arbitrary fractional ideal.
    pub fn class_of_ideal(&self, ideal: &FracIdeal) -> usize {
        self.index[&form_of_ideal(self.field, ideal)]
    }

    /// All h characters, ordered lexicographically by exponent vector on the
    /// Smith basis; the first is the trivial character.
    pub fn characters(&self) -> Vec<ClassChar> {
        let mut out = Vec::with_capacity(self.forms.len());
        let k = self.divisors.len();
        let mut t = vec![0u64; k];
        loop {
            out.push(self.character_from_exponents(&t));
            // odometer over prod Z/d_j
            let mut pos = k;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                t[pos] += 1;
                if t[pos] < self.divisors[pos] {
                    break;
                }
                t[pos] = 0;
            }
        }
    }

    fn character_from_exponents(&self, t: &[u64]) -> ClassChar {
        let exps: Vec<Rational> = self
            .coords
            .iter()
            .map(|y| {
                let mut q = Rational::new();
                for ((&yj, &dj), &tj) in y.iter().zip(self.divisors.iter()).zip(t.iter()) {
                    q += Rational::from((yj * tj, dj));
                }
                frac_mod_one(q)
            })
            .collect();
        ClassChar { exps }
    }

    /// Exact orthogonality of the character table: for every pair (phi, psi),
    /// sum_C phi(C) conj(psi)(C) equals h or 0 in the cyclotomic ring
    /// Z[x]/Phi_L(x), L the exponent lcm.  Returns false on any failure.
    pub fn orthogonality_exact(&self) -> bool {
        let chars = self.characters();
        let h = self.forms.len();
        let mut lcm = Integer::from(1);
        for ch in &chars {
            for q in &ch.exps {
                lcm.lcm_mut(q.denom());
            }
        }
        let l = lcm.to_u64().expect("small exponent lcm") as usize;
        let phi_l = cyclotomic(l);
        for phi in &chars {
            for psi in &chars {
                // coefficient vector of sum_C zeta^(exp_phi(C) - exp_psi(C))
                let mut poly = vec![Integer::new(); l.max(1)];
                for c in 0..h {
                    let e = frac_mod_one(Rational::from(&phi.exps[c] - &psi.exps[c]));
                    let idx = (Rational::from(l as u64) * e)
                        .into_numer_denom()
                        .0
                        .to_usize()
                        .expect("exponent index");
                    poly[idx % l.max(1)] += 1;
                }
                let rem = poly_rem(poly, &phi_l);
                let target = if phi.exps == psi.exps {
                    vec![Integer::from(h as u64)]
                } else {
                    Vec::new()
                };
                if rem != target {
                    return false;
                }
            }
        }
        true
    }
}

/// A character of the class group, stored as exact exponents: the value on
/// class C_i is exp(2 pi i * exps[i]) with exps[i] in Q/Z, 0 <= exps[i] < 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassChar {
    exps: Vec<Rational>,
}

impl ClassChar {
    /// Exponent q in [0,1) with chi(C_i) = e^{2 pi i q}.
    pub fn exponent(&self, i: usize) -> &Rational {
        &self.exps[i]
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|q| *q == 0)
    }

    /// Real characters take values in {1, -1}.
    pub fn is_real(&self) -> bool {
        self.exps
            .iter()
            .all(|q| *q == 0 || *q == Rational::from((1, 2)))
    }

    pub fn conj(&self) -> ClassChar {
        ClassChar {
            exps: self
                .exps
                .iter()
                .map(|q| frac_mod_one(Rational::from(-q)))
                .collect(),
        }
    }

    /// chi(C_i) as a complex number at the given precision.
    pub fn value(&self, i: usize, prec: u32) -> Complex {
        let two_pi = Float::with_val(prec, rug::float::Constant::Pi) * 2u32;
        let theta = Float::with_val(prec, &self.exps[i]) * two_pi;
        let (s, c) = theta.sin_cos(Float::new(prec));
        Complex::with_val(prec, (c, s))
    }
}

fn frac_mod_one(q: Rational) -> Rational {
    let f = q.clone().floor();
    q - f
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    let g = Integer::from(a).gcd(&Integer::from(b)).gcd(&Integer::from(c));
    g.to_i64().unwrap().abs()
}

/// Canonical reduced form of the class of a fractional ideal.
fn form_of_ideal(field: QuadField, ideal: &FracIdeal) -> QuadForm {
    let (a, b, c) = ideal.hnf();
    // primitive part: divide the content c out of {a, b + c w}
    let ap = Integer::from(&a / &c);
    let bp = Integer::from(&b / &c);
    let d = field.disc();
    // form (a', 2 b' + D, N(b' + w)/a')
    let big_b = Integer::from(2) * &bp + Integer::from(d);
    let n = Integer::from(&bp * &bp)
        + Integer::from(&bp) * field.omega_trace()
        + field.omega_norm();
    let big_c = n / &ap;
    reduce_form(ap, big_b, big_c, d)
}

/// Polycyclic scan + Smith normal form.
///
/// Returns (elementary divisors > 1, per-element coordinates on the Smith
/// basis).  `table` is the full composition table and `identity` its unit.
fn group_structure(table: &[Vec<usize>], identity: usize) -> (Vec<u64>, Vec<Vec<u64>>) {
    let h = table.len();
    let mut gens: Vec<usize> = Vec::new();
    let mut rel_rows: Vec<Vec<i64>> = Vec::new();
    // exponent vectors (w.r.t. gens, possibly shorter than final length)
    let mut span: HashMap<usize, Vec<i64>> = HashMap::new();
    span.insert(identity, Vec::new());
    for f in 0..h {
        if span.contains_key(&f) {
            continue;
        }
        // relative order: least n >= 1 with f^n in the current span
        let mut pw = f;
        let mut n: i64 = 1;
        while !span.contains_key(&pw) {
            pw = table[pw][f];
            n += 1;
        }
        let tail = span[&pw].clone();
        let mut row = vec![0i64; gens.len() + 1];
        for (j, e) in tail.iter().enumerate() {
            row[j] = -e;
        }
        row[gens.len()] = n;
        // extend the span by f^j * s for 1 <= j < n
        let olds: Vec<(usize, Vec<i64>)> = span.iter().map(|(k, v)| (*k, v.clone())).collect();
        let gen_pos = gens.len();
        let mut fj = f;
        for j in 1..n {
            for (s, es) in &olds {
                let elt = table[fj][*s];
                let mut e2 = es.clone();
                e2.resize(gen_pos, 0);
                e2.push(j);
                span.insert(elt, e2);
            }
            fj = table[fj][f];
        }
        gens.push(f);
        rel_rows.push(row);
    }
    let k = gens.len();
    if k == 0 {
        return (Vec::new(), vec![Vec::new(); h]);
    }
    let mut m = vec![vec![Integer::new(); k]; k];
    for (i, row) in rel_rows.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            m[i][j] = Integer::from(e);
        }
    }
    let (diag, v) = smith_with_column_transform(m);
    // keep only divisors > 1, remembering their positions
    let kept: Vec<usize> = (0..k).filter(|&j| diag[j] > 1).collect();
    let divisors: Vec<u64> = kept
        .iter()
        .map(|&j| diag[j].to_u64().expect("desk-scale order"))
        .collect();
    let mut coords = vec![Vec::new(); h];
    for (elt, es) in span.iter() {
        let mut e = es.clone();
        e.resize(k, 0);
        // y = e * V, reduced mod diag
        let y: Vec<u64> = kept
            .iter()
            .map(|&j| {
                let mut acc = Integer::new();
                for (i, &ei) in e.iter().enumerate() {
                    acc += Integer::from(ei) * &v[i][j];
                }
                acc.rem_euc(diag[j].clone()).to_u64().expect("coordinate")
            })
            .collect();
        coords[*elt] = y;
    }
    (divisors, coords)
}

/// Smith normal form with tracking of the right transform: returns (diagonal,
/// V) with U * M * V diagonal and x -> x V the coordinate change on elements.
fn smith_with_column_transform(mut m: Vec<Vec<Integer>>) -> (Vec<Integer>, Vec<Vec<Integer>>) {
    let k = m.len();
    let mut v: Vec<Vec<Integer>> = (0..k)
        .map(|i| (0..k).map(|j| Integer::from((i == j) as u32)).collect())
        .collect();
    for t in 0..k {
        loop {
            // locate the minimal nonzero pivot in the trailing block
            let mut piv: Option<(usize, usize)> = None;
            for i in t..k {
                for j in t..k {
                    if m[i][j] != 0
                        && piv
                            .map(|(pi, pj)| {
                                Integer::from(m[i][j].abs_ref()) < Integer::from(m[pi][pj].abs_ref())
                            })
                            .unwrap_or(true)
                    {
                        piv = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = piv else { break };
            m.swap(t, pi);
            if pj != t {
                for row in m.iter_mut() {
                    row.swap(t, pj);
                }
                v.iter_mut().for_each(|row| row.swap(t, pj));
            }
            // clear column t below and row t to the right
            let mut dirty = false;
            for i in (t + 1)..k {
                if m[i][t] != 0 {
                    let q = Integer::from(&m[i][t]).div_rem_floor(Integer::from(&m[t][t])).0;
                    for j in t..k {
                        let sub = Integer::from(&q * &m[t][j]);
                        m[i][j] -= sub;
                    }
                    if m[i][t] != 0 {
                        dirty = true;
                    }
                }
            }
            for j in (t + 1)..k {
                if m[t][j] != 0 {
                    let q = Integer::from(&m[t][j]).div_rem_floor(Integer::from(&m[t][t])).0;
                    for i in 0..k {
                        let sub = Integer::from(&q * &m[i][t]);
                        m[i][j] -= sub;
                        let subv = Integer::from(&q * &v[i][t]);
                        v[i][j] -= subv;
                    }
                    if m[t][j] != 0 {
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            let clear = ((t + 1)..k).all(|i| m[i][t] == 0) && ((t + 1)..k).all(|j| m[t][j] == 0);
            if clear {
                // enforce divisibility: pivot must divide the trailing block
                let mut fixed = true;
                'outer: for i in (t + 1)..k {
                    for j in (t + 1)..k {
                        if !m[i][j].is_divisible(&m[t][t]) {
                            // add column j to column t and restart this pivot
                            for r in 0..k {
                                let add = Integer::from(&m[r][j]);
                                m[r][t] += add;
                                let addv = Integer::from(&v[r][j]);
                                v[r][t] += addv;
                            }
                            fixed = false;
                            break 'outer;
                        }
                    }
                }
                if fixed {
                    break;
                }
            }
        }
    }
    let mut diag: Vec<Integer> = (0..k).map(|t| Integer::from(m[t][t].abs_ref())).collect();
    // |det| is preserved, diagonal entries divide in order by construction
    for t in 0..k.saturating_sub(1) {
        debug_assert!(
            diag[t] == 0 || diag[t + 1].is_divisible(&diag[t]),
            "Smith divisibility chain"
        );
    }
    for d in diag.iter_mut() {
        if *d == 0 {
            *d = Integer::from(1);
        }
    }
    (diag, v)
}

/// Coefficients of the L-th cyclotomic polynomial, low degree first.
fn cyclotomic(l: usize) -> Vec<Integer> {
    if l <= 1 {
        return vec![Integer::from(-1), Integer::from(1)]; // x - 1
    }
    let mut num = vec![Integer::new(); l + 1]; // x^l - 1
    num[0] = Integer::from(-1);
    num[l] = Integer::from(1);
    let mut f = num;
    for d in 1..l {
        if l % d == 0 {
            let phi_d = cyclotomic(d);
            f = poly_div_exact(&f, &phi_d);
        }
    }
    f
}

/// Exact division of integer polynomials (divisor monic up to sign).
fn poly_div_exact(num: &[Integer], den: &[Integer]) -> Vec<Integer> {
    let mut r: Vec<Integer> = num.to_vec();
    let dn = den.len() - 1;
    let lead = den[dn].clone();
    assert!(lead == 1 || lead == -1);
    let qn = r.len() - 1 - dn;
    let mut q = vec![Integer::new(); qn + 1];
    for i in (0..=qn).rev() {
        let coef = Integer::from(&r[i + dn] / &lead);
        q[i] = coef.clone();
        for j in 0..=dn {
            let sub = Integer::from(&coef * &den[j]);
            r[i + j] -= sub;
        }
    }
    assert!(r.iter().all(|x| *x == 0), "non-exact polynomial division");
    q
}

/// Remainder of an integer polynomial modulo a monic divisor.
fn poly_rem(mut p: Vec<Integer>, m: &[Integer]) -> Vec<Integer> {
    let dm = m.len() - 1;
    while p.len() > dm {
        let top = p.len() - 1;
        let coef = p[top].clone();
        if coef != 0 {
            for j in 0..=dm {
                let sub = Integer::from(&coef * &m[j]);
                p[top - dm + j] -= sub;
            }
        }
        p.pop();
    }
    while p.last().map(|x| *x == 0).unwrap_or(false) {
        p.pop();
    }
    p
}
