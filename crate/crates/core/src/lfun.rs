//! Central L-values by exponentially smoothed Dirichlet sums.
//!
//! For a weight-2 newform with coefficients a_n and conductor N put
//!
//! ```text
//!   g(y) = sum_{n >= 1} a_n exp(-2 pi n y / sqrt(N)),
//! ```
//!
//! so that Lambda(s) = (sqrt(N)/2pi)^s Gamma(s) L(s) is the Mellin transform
//! of g.  Splitting the transform at y = 1 and applying the involution
//! g(1/y) = w y^2 g(y), where w = +-1 is the sign of the functional equation,
//! turns the central value into a rapidly convergent *exact* identity:
//!
//! ```text
//!   L(1) = (1 + w) sum_{n >= 1} (a_n / n) exp(-2 pi n / sqrt(N)).
//! ```
//!
//! Truncating at X with 2 pi X / sqrt(N) ~ (prec/2 + 8) log 2 leaves a tail
//! below the target accuracy, bounded rigorously through d(n) <= sqrt(3 n):
//! the terms are dominated by sqrt(3) e^{-cn}, a geometric series.
//!
//! The sign w is not assumed: it is read off the involution itself, by
//! evaluating the quotient g(1/y) / (y^2 g(y)) at two unrelated points
//! y = 1.15 and y = 1.3 and demanding that both agree on +1 or on -1 to
//! twenty bits.  A curve whose coefficients fail this test (wrong conductor,
//! truncation too short) gets `root_number: None` and an error bar wide
//! enough to cover both hypotheses, rather than a silently wrong value.
//!
//! The same machinery runs the equivariant value L(psibar, 1) from the exact
//! ideal-indexed coefficients b_n of a Hecke character, embedded into C at
//! working precision; for a character attached to a curve defined over Q the
//! two routes must agree, and the tests make them compete.

use rug::{Complex, Float, Integer};

use crate::cm::HeckeChar;
use crate::{Error, Result};

/// A central L-value with a rigorous error bar.
#[derive(Clone, Debug)]
pub struct LValue {
    pub value: Complex,
    /// bound on |computed - true|, covering truncation and sign ambiguity
    pub abs_err: Float,
    pub terms_used: usize,
    /// sign of the functional equation, when the theta involution settles it
    pub root_number: Option<i32>,
}

/// Number of coefficients needed for the smoothed sum at this precision:
/// the first index whose smoothing factor drops below 2^-(prec/2 + 8).
pub fn terms_needed(n_cond: &Integer, prec: u32) -> usize {
    let bits = prec as f64 / 2.0 + 8.0;
    let sqrt_n = n_cond.to_f64().sqrt();
    (sqrt_n * bits * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI)).ceil() as usize + 1
}

/// 2 pi / sqrt(N) at working precision.
fn decay_rate(n_cond: &Integer, wp: u32) -> Float {
    let pi = Float::with_val(wp, rug::float::Constant::Pi);
    let sqrt_n = Float::with_val(wp, n_cond).sqrt();
    pi * 2u32 / sqrt_n
}

/// sqrt(3) sum_{n > x} e^{-cn} = sqrt(3) e^{-c(x+1)} / (1 - e^{-c}),
/// a bound on the discarded tail since |a_n| <= d(n) sqrt(n) <= sqrt(3) n.
fn tail_bound(c: &Float, x: usize, wp: u32) -> Float {
    let e = (-(c.clone() * Float::with_val(wp, x as u32 + 1))).exp();
    let denom = Float::with_val(wp, 1) - (-c.clone()).exp();
    e * Float::with_val(wp, 3).sqrt() / denom
}

/// g(y) = sum a_n e^{-cny} over the supplied coefficients.
fn theta_int(coeffs: &[i64], c: &Float, y: f64, wp: u32) -> Float {
    let q = (-(c.clone() * Float::with_val(wp, y))).exp();
    let mut qn = Float::with_val(wp, 1);
    let mut s = Float::new(wp);
    for &a in &coeffs[1..] {
        qn *= &q;
        if a != 0 {
            s += Float::with_val(wp, a) * &qn;
        }
    }
    s
}

fn theta_cplx(coeffs: &[Complex], c: &Float, y: f64, wp: u32) -> Complex {
    let q = (-(c.clone() * Float::with_val(wp, y))).exp();
    let mut qn = Float::with_val(wp, 1);
    let mut s = Complex::new(wp);
    for a in &coeffs[1..] {
        qn *= &q;
        s += a.clone() * &qn;
    }
    s
}

/// Read the sign of the involution g(1/y) = w y^2 g(y) off two test points.
fn detect_w(theta: impl Fn(f64) -> Complex, wp: u32) -> Option<i32> {
    let tol = Float::with_val(wp, 1) >> 20;
    let floor = Float::with_val(wp, 1) >> (wp / 2);
    let mut verdict: Option<i32> = None;
    for y in [1.15f64, 1.3] {
        let top = theta(1.0 / y);
        let bot = theta(y) * Float::with_val(wp, y * y);
        if *bot.clone().abs().real() < floor {
            return None;
        }
        let rho = top / bot;
        let near = |target: i32| {
            let d = rho.clone() - Float::with_val(wp, target);
            *d.abs().real() < tol
        };
        let w = if near(1) {
            1
        } else if near(-1) {
            -1
        } else {
            return None;
        };
        match verdict {
            None => verdict = Some(w),
            Some(v) if v != w => return None,
            _ => {}
        }
    }
    verdict
}

/// L(1) from integer Dirichlet coefficients (index n stored at coeffs[n]).
/// The slice must extend past `terms_needed`; how far it reaches sets the
/// tail of the error bar.
pub fn l_value_rank0(coeffs: &[i64], n_cond: &Integer, prec: u32) -> Result<LValue> {
    let x = coeffs.len().saturating_sub(1);
    if x < terms_needed(n_cond, prec) {
        return Err(Error::BadInput(format!(
            "need {} coefficients for conductor {} at {} bits, got {}",
            terms_needed(n_cond, prec),
            n_cond,
            prec,
            x
        )));
    }
    let wp = prec + 32;
    let c = decay_rate(n_cond, wp);

    // S = sum (a_n / n) e^{-cn}
    let q = (-c.clone()).exp();
    let mut qn = Float::with_val(wp, 1);
    let mut s = Float::new(wp);
    for (n, &a) in coeffs.iter().enumerate().skip(1) {
        qn *= &q;
        if a != 0 {
            s += Float::with_val(wp, a) / Float::with_val(wp, n as u64) * &qn;
        }
    }
    let tail = tail_bound(&c, x, wp);

    let w = detect_w(
        |y| Complex::with_val(wp, (theta_int(coeffs, &c, y, wp), Float::new(wp))),
        wp,
    );
    let round_off = Float::with_val(wp, 1) >> (prec + 8);
    let (value, abs_err) = match w {
        Some(w) => (
            Float::with_val(wp, &s * (1 + w)),
            tail.clone() * 2u32 + round_off,
        ),
        None => (s.clone(), s.clone().abs() + tail.clone() * 2u32 + round_off),
    };
    Ok(LValue {
        value: Complex::with_val(wp, (value, Float::new(wp))),
        abs_err,
        terms_used: x,
        root_number: w,
    })
}

/// The central value of a CM curve over Q, coefficients included.
pub fn l_value_of_curve(e: &crate::curve::CurveQ, prec: u32) -> Result<LValue> {
    let chi = HeckeChar::new(e)?;
    let x = terms_needed(chi.level(), prec);
    let a = chi.dirichlet_coeffs(x)?;
    l_value_rank0(&a, chi.level(), prec)
}

/// L(psibar, 1) from the exact ideal-indexed coefficients of the character,
/// sharing conductor N with the curve over Q.
pub fn equivariant_l_value(chi: &HeckeChar, prec: u32) -> Result<LValue> {
    let n_cond = chi.level();
    let x = terms_needed(n_cond, prec);
    let wp = prec + 32;
    let b = chi.k_coeffs(x)?;
    let coeffs: Vec<Complex> = b.iter().map(|v| v.embed(wp)).collect();
    let c = decay_rate(n_cond, wp);

    let q = (-c.clone()).exp();
    let mut qn = Float::with_val(wp, 1);
    let mut s = Complex::new(wp);
    for (n, bn) in coeffs.iter().enumerate().skip(1) {
        qn *= &q;
        s += bn.clone() / Float::with_val(wp, n as u64) * &qn;
    }
    let tail = tail_bound(&c, x, wp);

    let w = detect_w(|y| theta_cplx(&coeffs, &c, y, wp), wp);
    let round_off = Float::with_val(wp, 1) >> (prec + 8);
    let (value, abs_err) = match w {
        Some(w) => (
            s.clone() * Float::with_val(wp, 1 + w),
            tail.clone() * 2u32 + round_off,
        ),
        None => (
            s.clone(),
            s.clone().abs().real().clone() + tail * 2u32 + round_off,
        ),
    };
    Ok(LValue {
        value,
        abs_err,
        terms_used: x,
        root_number: w,
    })
}
